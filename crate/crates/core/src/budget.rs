//! Analytic gate-error budget, presets for the reference setups, and
//! cluster-generation timing.
//!
//! Frequencies here are ordinary frequencies in Hz and decay rates are in
//! 1/s; every ε-term is dimensionless. Angular factors are already folded in
//! (e.g. `2πγ/V` with `V` angular equals `γ/V_Hz`).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Error, Result};
use crate::gate::{default_delta_v_ratio, InteractionParams, PulseParams};
use crate::gate_blockade::{self, BlockadePulse, ONE_PHOTON_INACTIVE_P_QUOTED};
use crate::gate_noblockade;
use crate::lattice::{harmonic_width, LatticeParams};

/// Quoted two-photon blockade ε_Ω var; the printed formula gives ≈0.115.
pub const BLOCKADE_OMEGA_VAR_QUOTED: f64 = 0.15;
/// `kx_n` of the even-pair potential minimum used for the no-blockade average.
pub const NOBLOCKADE_KXN: f64 = 5.0 * PI / 2.0;

const PLANCK_CGS: f64 = 6.626_070_15e-27;
const DEBYE_CGS: f64 = 1e-18;

pub const EPS_OMEGA_VAR: &str = "eps_omega_var";
pub const EPS_IMP_EXC: &str = "eps_imp_exc";
pub const EPS_RYDB_DECAY1: &str = "eps_rydb_decay1";
pub const EPS_RYDB_DECAY2: &str = "eps_rydb_decay2";
pub const EPS_DIF_PAIRS: &str = "eps_dif_pairs";
pub const EPS_NON_ADIAB: &str = "eps_non_adiab";
pub const EPS_IMP_BLOCK: &str = "eps_imp_block";
pub const EPS_RYDB_DECAY_BLOCKADE: &str = "eps_rydb_decay_blockade";
pub const EPS_MF_FLUCT: &str = "eps_mf_fluct";
pub const P_SE_INTERMEDIATE: &str = "p_se_intermediate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    NoBlockade,
    Blockade,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::NoBlockade => "no_blockade",
            Scheme::Blockade => "blockade",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "no_blockade" | "noblockade" => Ok(Scheme::NoBlockade),
            "blockade" => Ok(Scheme::Blockade),
            _ => param(format!(
                "unknown scheme '{s}' (expected no_blockade or blockade)"
            )),
        }
    }
}

fn photon_scale(photon_order: u32) -> Result<f64> {
    if ![1, 2, 4].contains(&photon_order) {
        return param(format!(
            "photon order must be 1, 2 or 4, got {photon_order}"
        ));
    }
    Ok((photon_order as f64 / 2.0).powi(2))
}

/// Two-photon no-blockade Rabi-variation error for width `ka` around `kx_n`.
pub fn omega_variation_noblockade(ka: f64, kx_n: f64) -> f64 {
    PI * PI * (ka / 4.0).powi(2) * (kx_n / 4.0 + FRAC_PI_4).tan().powi(2)
}

/// Two-photon blockade Rabi-variation error for width `ka` in a `V0, V1` double well.
pub fn omega_variation_blockade(ka: f64, v0: f64, v1: f64) -> Result<f64> {
    let r = gate_blockade::inactive_drive_ratio(v0, v1)?;
    Ok(PI * PI * ka * ka * r)
}

/// ε_Ω var for a scheme and photon order, with `a` from the harmonic width of `lattice`.
pub fn omega_variation_error(
    scheme: Scheme,
    photon_order: u32,
    lattice: &LatticeParams,
) -> Result<f64> {
    let scale = photon_scale(photon_order)?;
    let ka = harmonic_width(lattice)? * lattice.k;
    let two_photon = match scheme {
        Scheme::NoBlockade => omega_variation_noblockade(ka, NOBLOCKADE_KXN),
        Scheme::Blockade => omega_variation_blockade(ka, lattice.v0, lattice.v1)?,
    };
    Ok(scale * two_photon)
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return param(format!("{name} must be positive, got {x}"));
    }
    Ok(())
}

fn check_non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return param(format!("{name} must be non-negative, got {x}"));
    }
    Ok(())
}

/// `(ε_imp exc, ε_dif pairs)` for interaction `v` and light shift `g` (same units).
pub fn interaction_errors(v: f64, g: f64, delta_v_ratio: f64) -> Result<(f64, f64)> {
    check_non_negative("interaction", v)?;
    check_positive("light shift", g)?;
    check_non_negative("next-pair ratio", delta_v_ratio)?;
    let x = v / g;
    let imp = x * x / 8.0;
    let dif = 3.0 * PI * PI / 16.0 * (0.125 + 19.0 * PI * PI / 256.0) * delta_v_ratio * x.powi(3);
    Ok((imp, dif))
}

/// Decay terms: `[(decay1, γ/V), (decay2, γ/2g)]` without blockade,
/// `[(decay_blockade, 7γ/8g)]` with it.
pub fn decay_errors(
    scheme: Scheme,
    gamma: f64,
    v_hz: f64,
    g_hz: f64,
) -> Result<Vec<(&'static str, f64)>> {
    check_non_negative("decay rate", gamma)?;
    check_positive("light shift", g_hz)?;
    Ok(match scheme {
        Scheme::NoBlockade => {
            check_positive("interaction", v_hz)?;
            vec![
                (EPS_RYDB_DECAY1, gamma / v_hz),
                (EPS_RYDB_DECAY2, gamma / (2.0 * g_hz)),
            ]
        }
        Scheme::Blockade => vec![(EPS_RYDB_DECAY_BLOCKADE, 7.0 * gamma / (8.0 * g_hz))],
    })
}

/// `(π²/4)(a/R)² − (π²/4)(a/R)⁴(V/ω)²`; only the first term once `V > ω`, clamped at zero.
pub fn non_adiabatic_error(a: f64, r: f64, v_int: f64, omega_trap: f64) -> Result<f64> {
    check_non_negative("width", a)?;
    check_positive("neighbour distance", r)?;
    check_non_negative("interaction", v_int)?;
    check_positive("trap frequency", omega_trap)?;
    let x2 = (a / r).powi(2);
    let first = PI * PI / 4.0 * x2;
    if v_int > omega_trap {
        return Ok(first);
    }
    Ok((first - PI * PI / 4.0 * x2 * x2 * (v_int / omega_trap).powi(2)).max(0.0))
}

/// `(δω·T_PG)²` with `δω` in 1/s and `T_PG` in s.
pub fn mf_fluct_error(delta_omega: f64, t_pg: f64) -> f64 {
    (delta_omega * t_pg).powi(2)
}

/// Intermediate-state scattering `πγ/Δ` with Δ angular, i.e. `γ/(2Δ_Hz)`.
pub fn p_se(gamma_6p: f64, delta_hz: f64) -> Result<f64> {
    check_non_negative("intermediate decay rate", gamma_6p)?;
    check_positive("intermediate detuning", delta_hz)?;
    Ok(gamma_6p / (2.0 * delta_hz))
}

/// `(ε_MF fluct, p_se)`.
pub fn misc_errors(
    delta_omega: f64,
    t_pg: f64,
    gamma_6p: f64,
    delta_hz: f64,
) -> Result<(f64, f64)> {
    check_non_negative("frequency fluctuation", delta_omega)?;
    check_non_negative("gate time", t_pg)?;
    Ok((mf_fluct_error(delta_omega, t_pg), p_se(gamma_6p, delta_hz)?))
}

/// In-pair addressing error `g²/(2Δ_vec²)`.
pub fn imperfect_blockade_error(g: f64, delta_vec: f64) -> Result<f64> {
    check_non_negative("light shift", g)?;
    check_positive("vector shift", delta_vec)?;
    Ok(gate_blockade::imperfect_blockade_oracle(g, delta_vec))
}

/// Dipole-dipole shift `μ²/R³` in Hz for `μ` in Debye and `R` in nm.
pub fn dipolar_interaction_hz(mu_debye: f64, r_nm: f64) -> f64 {
    let mu = mu_debye * DEBYE_CGS;
    let r = r_nm * 1e-7;
    mu * mu / r.powi(3) / PLANCK_CGS
}

/// Drive ratio `Ω̃/Ω` between standing-wave minimum and maximum sites without blockade.
pub fn noblockade_site_ratio() -> f64 {
    ((3.0 * PI / 8.0).cos() / (7.0 * PI / 8.0).cos()).abs()
}

/// Reference setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    RbNoblockade2ph,
    RbNoblockade4ph,
    RbBlockade2ph,
    CshoBlockade1ph,
    CoMolecule2ph,
    CoMolecule4ph,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::RbNoblockade2ph,
        Preset::RbNoblockade4ph,
        Preset::RbBlockade2ph,
        Preset::CshoBlockade1ph,
        Preset::CoMolecule2ph,
        Preset::CoMolecule4ph,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::RbNoblockade2ph => "rb_noblockade_2ph",
            Preset::RbNoblockade4ph => "rb_noblockade_4ph",
            Preset::RbBlockade2ph => "rb_blockade_2ph",
            Preset::CshoBlockade1ph => "csho_blockade_1ph",
            Preset::CoMolecule2ph => "co_molecule_2ph",
            Preset::CoMolecule4ph => "co_molecule_4ph",
        }
    }

    /// Raw physical parameters; every ε is derived from these.
    pub fn params(&self) -> PresetParams {
        let rb_lattice = LatticeParams::new(100.0, 100.0, 0.0);
        let noblockade = PresetParams {
            scheme: Scheme::NoBlockade,
            photon_order: 2,
            lattice: LatticeParams::new(100.0, 0.0, 0.0),
            wavelength_nm: 810.0,
            light_shift_hz: 30e6,
            v_int_hz: 3e6,
            power: 6,
            gamma: 2000.0,
            delta_vec_hz: 0.0,
            delta_omega: 0.0,
            t_pg: 25e-6,
            gamma_6p: 1.0 / 125e-9,
            intermediate_detuning_hz: 40e9,
            omega_trap_hz: 70e3,
        };
        let blockade = PresetParams {
            scheme: Scheme::Blockade,
            lattice: rb_lattice,
            light_shift_hz: 40e3,
            v_int_hz: 100e6,
            delta_vec_hz: 200e3,
            delta_omega: 1e3,
            ..noblockade
        };
        let co = PresetParams {
            light_shift_hz: 100e3,
            v_int_hz: dipolar_interaction_hz(1.4, 500.0),
            power: 3,
            gamma: 2.0,
            ..noblockade
        };
        match self {
            Preset::RbNoblockade2ph => noblockade,
            Preset::RbNoblockade4ph => PresetParams {
                photon_order: 4,
                ..noblockade
            },
            Preset::RbBlockade2ph => blockade,
            Preset::CshoBlockade1ph => PresetParams {
                photon_order: 1,
                lattice: LatticeParams::new(200.0, 100.0, 0.0),
                light_shift_hz: 100e3,
                delta_vec_hz: 1e6,
                ..blockade
            },
            Preset::CoMolecule2ph => co,
            Preset::CoMolecule4ph => PresetParams {
                photon_order: 4,
                ..co
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(Preset::name).collect();
                Error::Parameter(format!(
                    "unknown preset '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// Raw inputs of a preset. `light_shift_hz` is `Ω²/Δ` for two photons, `Ω` for
/// one, and the multi-photon Rabi frequency otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub scheme: Scheme,
    pub photon_order: u32,
    pub lattice: LatticeParams,
    pub wavelength_nm: f64,
    pub light_shift_hz: f64,
    pub v_int_hz: f64,
    /// 6 for van der Waals, 3 for dipole-dipole.
    pub power: u32,
    /// Rydberg (or excited-molecule) decay rate, 1/s.
    pub gamma: f64,
    pub delta_vec_hz: f64,
    /// Qubit-frequency fluctuation δω (1/s).
    pub delta_omega: f64,
    /// Gate duration (s) used for the field-fluctuation term.
    pub t_pg: f64,
    /// Intermediate-state decay rate (1/s).
    pub gamma_6p: f64,
    pub intermediate_detuning_hz: f64,
    pub omega_trap_hz: f64,
}

/// Evaluated error terms of one preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub preset: String,
    pub scheme: Scheme,
    pub photon_order: u32,
    pub terms: BTreeMap<String, f64>,
    /// Sum of the terms that enter the gate error.
    pub total: f64,
    pub inactive_p: f64,
    /// `1 − inactive_p`, reported outside the total.
    pub eps_inact_exc: f64,
    /// Closed-form values of quantities that are stored as quoted constants.
    pub formula_values: BTreeMap<String, f64>,
}

impl ErrorBudget {
    /// Names of the terms summed into the total.
    pub fn total_members(scheme: Scheme) -> &'static [&'static str] {
        match scheme {
            Scheme::NoBlockade => &[EPS_OMEGA_VAR, EPS_IMP_EXC, EPS_RYDB_DECAY1, EPS_RYDB_DECAY2],
            Scheme::Blockade => &[
                EPS_OMEGA_VAR,
                EPS_IMP_BLOCK,
                EPS_RYDB_DECAY_BLOCKADE,
                EPS_MF_FLUCT,
            ],
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.get(name).copied()
    }

    /// Plain-text table: one row per term, members of the total marked.
    pub fn to_text_table(&self) -> String {
        let members = Self::total_members(self.scheme);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} ({}, {}-photon)",
            self.preset, self.scheme, self.photon_order
        );
        let _ = writeln!(s, "{:<26} {:>12}", "term", "value");
        for (name, v) in &self.terms {
            let mark = if members.contains(&name.as_str()) {
                ""
            } else {
                " *"
            };
            let _ = writeln!(s, "{:<26} {:>12.3e}{mark}", name, v);
        }
        let _ = writeln!(s, "{:<26} {:>12.3e}", "total", self.total);
        let _ = writeln!(s, "{:<26} {:>12.3e}", "eps_inact_exc", self.eps_inact_exc);
        let _ = writeln!(s, "{:<26} {:>12.4}", "inactive_P", self.inactive_p);
        for (name, v) in &self.formula_values {
            let _ = writeln!(s, "{:<26} {:>12.3e} (formula; quoted value used)", name, v);
        }
        s.push_str("* not included in total\n");
        s
    }
}

/// Inactive-pair probability for a preset, plus its closed-form value when a
/// quoted constant is used instead.
fn inactive_probability(p: &PresetParams) -> Result<(f64, Option<f64>)> {
    match p.scheme {
        Scheme::NoBlockade => {
            let r = noblockade_site_ratio().powi(p.photon_order as i32);
            Ok((gate_noblockade::inactive_probability_closed_form(r)?, None))
        }
        Scheme::Blockade => {
            let ratio = gate_blockade::inactive_drive_ratio(p.lattice.v0, p.lattice.v1)?;
            let closed = gate_blockade::run_blockade_inactive(ratio, p.photon_order)?.average;
            if p.photon_order == 1 {
                Ok((ONE_PHOTON_INACTIVE_P_QUOTED, Some(closed)))
            } else {
                Ok((closed, None))
            }
        }
    }
}

/// Evaluates every applicable term of `preset` (one of [`Preset::ALL`]'s names).
pub fn assemble_table(preset: &str) -> Result<ErrorBudget> {
    let preset: Preset = preset.parse()?;
    assemble_from(preset.name(), &preset.params())
}

/// As [`assemble_table`] for arbitrary raw parameters.
pub fn assemble_from(name: &str, p: &PresetParams) -> Result<ErrorBudget> {
    let mut terms = BTreeMap::new();
    let mut formula_values = BTreeMap::new();
    let g = p.light_shift_hz;
    let mut omega_var = omega_variation_error(p.scheme, p.photon_order, &p.lattice)?;
    if p.scheme == Scheme::Blockade && p.photon_order == 2 {
        formula_values.insert(EPS_OMEGA_VAR.to_string(), omega_var);
        omega_var = BLOCKADE_OMEGA_VAR_QUOTED;
    }
    terms.insert(EPS_OMEGA_VAR.to_string(), omega_var);
    for (k, v) in decay_errors(p.scheme, p.gamma, p.v_int_hz, g)? {
        terms.insert(k.to_string(), v);
    }
    match p.scheme {
        Scheme::NoBlockade => {
            let (imp, dif) = interaction_errors(p.v_int_hz, g, default_delta_v_ratio(p.power))?;
            terms.insert(EPS_IMP_EXC.to_string(), imp);
            terms.insert(EPS_DIF_PAIRS.to_string(), dif);
            let a = harmonic_width(&p.lattice)?;
            let r = p.lattice.period();
            terms.insert(
                EPS_NON_ADIAB.to_string(),
                non_adiabatic_error(a, r, p.v_int_hz, p.omega_trap_hz)?,
            );
            terms.insert(
                P_SE_INTERMEDIATE.to_string(),
                p_se(p.gamma_6p, p.intermediate_detuning_hz)?,
            );
        }
        Scheme::Blockade => {
            terms.insert(
                EPS_IMP_BLOCK.to_string(),
                imperfect_blockade_error(g, p.delta_vec_hz)?,
            );
            terms.insert(
                EPS_MF_FLUCT.to_string(),
                mf_fluct_error(p.delta_omega, p.t_pg),
            );
        }
    }
    if terms.values().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return domain("an error term evaluated to a negative or non-finite value");
    }
    let total = ErrorBudget::total_members(p.scheme)
        .iter()
        .map(|k| terms[*k])
        .sum();
    let (inactive_p, closed) = inactive_probability(p)?;
    if let Some(c) = closed {
        formula_values.insert("inactive_p".to_string(), c);
    }
    Ok(ErrorBudget {
        preset: name.to_string(),
        scheme: p.scheme,
        photon_order: p.photon_order,
        terms,
        total,
        inactive_p,
        eps_inact_exc: 1.0 - inactive_p,
        formula_values,
    })
}

/// One numeric entry of the reference error table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub preset: String,
    pub entry: String,
    /// Quoted value as printed.
    pub quoted: String,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Half a unit in the second significant digit of `quoted` (or the first, if
/// only one is printed).
pub fn two_sigfig_tolerance(quoted: &str) -> Result<f64> {
    let q: f64 = quoted
        .parse()
        .map_err(|_| Error::Parameter(format!("cannot parse quoted value '{quoted}'")))?;
    let mantissa = quoted.split(['e', 'E']).next().unwrap_or(quoted);
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sig = digits.trim_start_matches('0').len().max(1);
    let exp = q.abs().log10().floor() as i32 - (sig.min(2) as i32 - 1);
    Ok(0.5 * 10f64.powi(exp))
}

/// Quoted entries of the reference table, per preset.
const TABLE: [(Preset, &[(&str, &str)]); 4] = [
    (
        Preset::RbNoblockade2ph,
        &[
            (EPS_OMEGA_VAR, "1.05e-2"),
            (EPS_IMP_EXC, "1.25e-3"),
            (EPS_RYDB_DECAY1, "6.7e-4"),
            (EPS_RYDB_DECAY2, "3e-5"),
            (EPS_NON_ADIAB, "2.5e-2"),
            ("total", "1.25e-2"),
            ("eps_inact_exc", "0.25"),
        ],
    ),
    (
        Preset::RbNoblockade4ph,
        &[
            (EPS_OMEGA_VAR, "4.2e-2"),
            (EPS_IMP_EXC, "1.25e-3"),
            (EPS_RYDB_DECAY1, "6.7e-4"),
            (EPS_RYDB_DECAY2, "3e-5"),
            (EPS_NON_ADIAB, "2.5e-2"),
            ("total", "4.4e-2"),
            ("eps_inact_exc", "6.5e-3"),
        ],
    ),
    (
        Preset::RbBlockade2ph,
        &[
            (EPS_OMEGA_VAR, "0.15"),
            (EPS_IMP_BLOCK, "2e-2"),
            (EPS_RYDB_DECAY_BLOCKADE, "4.38e-2"),
            (EPS_MF_FLUCT, "6e-4"),
            ("total", "0.21"),
            ("eps_inact_exc", "2e-3"),
        ],
    ),
    (
        Preset::CshoBlockade1ph,
        &[
            (EPS_OMEGA_VAR, "1.13e-2"),
            (EPS_IMP_BLOCK, "5e-3"),
            (EPS_RYDB_DECAY_BLOCKADE, "1.75e-2"),
            (EPS_MF_FLUCT, "6e-4"),
            ("total", "3.44e-2"),
            ("eps_inact_exc", "0.13"),
        ],
    ),
];

/// Every numeric cell of the reference table against its preset evaluation.
pub fn table_regression() -> Result<Vec<TableCell>> {
    let mut out = Vec::new();
    for (preset, entries) in TABLE {
        let b = assemble_table(preset.name())?;
        for (entry, quoted) in entries {
            let computed = match *entry {
                "total" => b.total,
                "eps_inact_exc" => b.eps_inact_exc,
                name => b
                    .term(name)
                    .ok_or_else(|| Error::Contract(format!("preset {preset} lacks term {name}")))?,
            };
            let tolerance = two_sigfig_tolerance(quoted)?;
            let q: f64 = quoted.parse().expect("table literals parse");
            out.push(TableCell {
                preset: preset.name().to_string(),
                entry: entry.to_string(),
                quoted: quoted.to_string(),
                computed,
                tolerance,
                pass: (computed - q).abs() <= tolerance,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "1d")]
    One,
    #[serde(rename = "2d")]
    Two,
}

impl FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "1d" => Ok(Dimension::One),
            "2" | "2d" => Ok(Dimension::Two),
            _ => param(format!("unknown dimension '{s}' (expected 1d or 2d)")),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::One => "1d",
            Dimension::Two => "2d",
        })
    }
}

/// Ordered steps of a cluster-generation sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingBudget {
    pub scheme: Scheme,
    pub dimension: Dimension,
    /// `(label, duration μs)`.
    pub steps: Vec<(String, f64)>,
    /// Sum of the step durations (μs).
    pub total: f64,
}

/// Phase-gate duration without addressing (μs).
pub const NOBLOCKADE_GATE_US: f64 = 20.0;
/// Phase-gate duration with in-pair addressing (μs).
pub const BLOCKADE_GATE_US: f64 = 25.0;
/// Double-well merge between gate rounds (μs).
pub const MERGE_US: f64 = 600.0;
/// Lattice stretch or shrink along one axis (μs).
pub const STRETCH_US: f64 = 730.0;
/// Ramping the double-well lattice down or up (μs).
pub const LATTICE_RAMP_US: f64 = 250.0;

fn steps_1d(scheme: Scheme, axis: &str) -> Vec<(String, f64)> {
    match scheme {
        Scheme::NoBlockade => (1..=4)
            .map(|i| (format!("{axis} gate round {i}"), NOBLOCKADE_GATE_US))
            .collect(),
        Scheme::Blockade => {
            let mut s: Vec<_> = (1..=4)
                .map(|i| (format!("{axis} gate round {i}"), BLOCKADE_GATE_US))
                .collect();
            s.push((format!("{axis} double-well merge"), MERGE_US));
            s
        }
    }
}

/// Step-by-step duration of 1D or 2D cluster generation.
pub fn timing(scheme: Scheme, dimension: Dimension) -> TimingBudget {
    let mut steps = steps_1d(scheme, "x");
    if dimension == Dimension::Two {
        if scheme == Scheme::Blockade {
            steps.push(("ramp down V0".to_string(), LATTICE_RAMP_US));
        }
        steps.push(("stretch x lattice".to_string(), STRETCH_US));
        steps.push(("shrink y lattice".to_string(), STRETCH_US));
        if scheme == Scheme::Blockade {
            steps.push(("ramp up V3".to_string(), LATTICE_RAMP_US));
        }
        steps.extend(steps_1d(scheme, "y"));
    }
    let total = steps.iter().map(|(_, d)| d).sum();
    TimingBudget {
        scheme,
        dimension,
        steps,
        total,
    }
}

/// Analytic term versus its numeric gate counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub analytic: f64,
    pub numeric: f64,
}

impl OracleCheck {
    /// `|analytic − numeric| / analytic`.
    pub fn relative_gap(&self) -> f64 {
        (self.analytic - self.numeric).abs() / self.analytic
    }
}

/// Cross-checks of the analytic terms against exact gate dynamics in their
/// perturbative regimes (Rb parameters, Δ = 40 GHz).
pub fn oracle_checks() -> Result<Vec<OracleCheck>> {
    let (delta, hf) = (4.0e4, 6834.7);
    let mut out = Vec::new();

    let p = PulseParams::from_light_shift(30.0, delta, hf);
    let i = InteractionParams::new(0.3, 6);
    let num = gate_noblockade::run_gate(&p, &i)?.infidelity();
    out.push(OracleCheck {
        name: EPS_IMP_EXC.to_string(),
        analytic: interaction_errors(0.3, 30.0, 0.0)?.0,
        numeric: num,
    });

    // Decay terms are gate errors: compare with the infidelity added by γ.
    let gamma = 2000.0;
    let i = InteractionParams::new(3.0, 6);
    let base = gate_noblockade::run_gate(&p, &i)?.infidelity();
    let lossy = gate_noblockade::run_gate(&p, &i.with_gamma(gamma))?.infidelity();
    let decay: f64 = decay_errors(Scheme::NoBlockade, gamma, 3e6, 30e6)?
        .iter()
        .map(|(_, v)| v)
        .sum();
    out.push(OracleCheck {
        name: "no_blockade_decay".to_string(),
        analytic: decay,
        numeric: lossy - base,
    });

    let bp = BlockadePulse::new(PulseParams::from_light_shift(0.025, delta, hf), 0.2);
    let i = InteractionParams::new(100.0, 6);
    let base = gate_blockade::run_blockade_gate(&bp, &i)?.infidelity();
    let lossy = gate_blockade::run_blockade_gate(&bp, &i.with_gamma(gamma))?.infidelity();
    out.push(OracleCheck {
        name: EPS_RYDB_DECAY_BLOCKADE.to_string(),
        analytic: decay_errors(Scheme::Blockade, gamma, 0.0, 25e3)?[0].1,
        numeric: lossy - base,
    });

    let r = noblockade_site_ratio().powi(2);
    let inactive = gate_noblockade::run_inactive(&p.with_effective_drive(r))?;
    out.push(OracleCheck {
        name: "no_blockade_inactive_p".to_string(),
        analytic: gate_noblockade::inactive_probability_closed_form(r)?,
        numeric: inactive,
    });

    let (g, dv) = (1.5625e-3, 0.2);
    let bp = BlockadePulse::new(PulseParams::from_light_shift(g, delta, hf), dv);
    let num =
        gate_blockade::run_blockade_gate(&bp, &InteractionParams::new(100.0, 6))?.infidelity();
    out.push(OracleCheck {
        name: EPS_IMP_BLOCK.to_string(),
        analytic: imperfect_blockade_error(g, dv)?,
        numeric: num,
    });

    let ratio = gate_blockade::inactive_drive_ratio(100.0, 100.0)?;
    let bp = BlockadePulse::new(PulseParams::from_light_shift(0.025, delta, hf), 0.2);
    let mut scaled = bp;
    scaled.pulse = scaled.pulse.with_effective_drive(ratio * ratio);
    let num =
        gate_blockade::run_blockade_inactive_numeric(&scaled, &InteractionParams::new(100.0, 6))?;
    out.push(OracleCheck {
        name: "blockade_inactive_p".to_string(),
        analytic: gate_blockade::run_blockade_inactive(ratio, 2)?.average,
        numeric: num.average,
    });
    Ok(out)
}
