//! Phase gate without individual addressing: both atoms of a pair are driven
//! by the same two-photon π-pulse, accumulate an interaction phase in `|rr⟩`,
//! and are brought back by a second π-pulse.
//!
//! Bases: `|11⟩` branch {11, +, rr} with `|+⟩ = (|1r⟩+|r1⟩)/√2`; `|01⟩` and
//! `|10⟩` branches {01, 0r}; `|00⟩` is a scalar light-shift phase.

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::gate::{
    basis_state, generator, stage, BranchOutcome, GateOutcome, InteractionParams, Propagation,
    PulseParams,
};
use crate::numerics::{self, CMatrix};

/// Numerical options for the gate simulators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GateOptions {
    pub propagation: Propagation,
}

/// Light-shift plus coupling matrix of the `|11⟩` branch (MHz).
pub fn hamiltonian_11(p: &PulseParams, v_int: f64) -> [[f64; 3]; 3] {
    let (a1, a2) = p.scaled_squares();
    let c = SQRT_2 * p.scaled_product() / p.delta;
    [
        [-2.0 * a1 / p.delta, -c, 0.0],
        [-c, -(a1 + a2) / p.delta, -c],
        [0.0, -c, v_int - 2.0 * a2 / p.delta],
    ]
}

/// Matrix of the `|01⟩` (equivalently `|10⟩`) branch (MHz).
pub fn hamiltonian_01(p: &PulseParams) -> [[f64; 2]; 2] {
    let (a1, a2) = p.scaled_squares();
    let d = p.delta;
    let dh = p.delta + p.delta_hf;
    let c = p.scaled_product() / d;
    [[-a1 * (1.0 / d + 1.0 / dh), -c], [-c, -(a2 / d + a1 / dh)]]
}

/// Energy of the `|00⟩` state while the pulses are on (MHz).
pub fn energy_00(p: &PulseParams) -> f64 {
    let (a1, _) = p.scaled_squares();
    -2.0 * a1 / (p.delta + p.delta_hf)
}

fn rows3(m: &[[f64; 3]; 3]) -> [&[f64]; 3] {
    [&m[0], &m[1], &m[2]]
}

fn rows2(m: &[[f64; 2]; 2]) -> [&[f64]; 2] {
    [&m[0], &m[1]]
}

/// Interaction-stage propagation of the `|11⟩` branch.
enum InteractionStage {
    /// Evolve under `V_int` for `1/(2V_int)` μs with drive off.
    Dynamic,
    /// Multiply `|rr⟩` by `e^{−iφ}` instantly.
    Phase(f64),
}

fn branches(
    p: &PulseParams,
    i: &InteractionParams,
    v_pulse: f64,
    interaction: InteractionStage,
    how: Propagation,
) -> Result<Vec<BranchOutcome>> {
    let g_us = i.gamma_per_us();
    let t = p.pi_time();
    let t_int = if i.v_int > 0.0 { 0.5 / i.v_int } else { 0.0 };

    let h11 = generator(&rows3(&hamiltonian_11(p, v_pulse)), &[0.0, 1.0, 2.0], g_us);
    let mut psi = stage(&h11, &basis_state(3, 0), t, how)?;
    match interaction {
        InteractionStage::Dynamic => {
            let zero = [0.0; 3];
            let vrow = [0.0, 0.0, i.v_int];
            let hi = generator(&[&zero, &zero, &vrow], &[0.0, 1.0, 2.0], g_us);
            psi = stage(&hi, &psi, t_int, how)?;
        }
        InteractionStage::Phase(phi) => psi[2] *= C64::from_polar(1.0, -phi),
    }
    psi = stage(&h11, &psi, t, how)?;
    let b11 = BranchOutcome::new("11", &["11", "+", "rr"], psi.iter().copied().collect());

    let h01 = generator(&rows2(&hamiltonian_01(p)), &[0.0, 1.0], g_us);
    let mut psi = stage(&h01, &basis_state(2, 0), t, how)?;
    if let InteractionStage::Dynamic = interaction {
        let zero = [0.0; 2];
        let hi = generator(&[&zero, &zero], &[0.0, 1.0], g_us);
        psi = stage(&hi, &psi, t_int, how)?;
    }
    psi = stage(&h01, &psi, t, how)?;
    let amps: Vec<C64> = psi.iter().copied().collect();
    let b01 = BranchOutcome::new("01", &["01", "0r"], amps.clone());
    let b10 = BranchOutcome::new("10", &["10", "r0"], amps);

    let a00 = C64::from_polar(1.0, -TAU * energy_00(p) * 2.0 * t);
    let b00 = BranchOutcome::new("00", &["00"], vec![a00]);
    Ok(vec![b00, b01, b10, b11])
}

/// Runs the gate with exact stage propagation.
pub fn run_gate(p: &PulseParams, i: &InteractionParams) -> Result<GateOutcome> {
    run_gate_with(p, i, &GateOptions::default())
}

pub fn run_gate_with(
    p: &PulseParams,
    i: &InteractionParams,
    opts: &GateOptions,
) -> Result<GateOutcome> {
    let warnings = p.validate()?;
    i.validate()?;
    let b = branches(p, i, i.v_int, InteractionStage::Dynamic, opts.propagation)?;
    Ok(GateOutcome::from_branches(b, warnings))
}

/// Averaged probability that a pair at the standing-wave minima is left in its
/// input state. The drive is scaled by `p.effective_drive()`, the pair does not
/// interact during the pulses and picks up the phase `interaction_phase` on
/// `|rr⟩` between them.
pub fn run_inactive_with(p: &PulseParams, interaction_phase: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p.drive_ratio) {
        return param(format!(
            "drive ratio must lie in [0, 1], got {}",
            p.drive_ratio
        ));
    }
    let mut nominal = *p;
    nominal.drive_ratio = 1.0;
    nominal.validate()?;
    let i = InteractionParams::new(0.0, 6);
    let b = branches(
        p,
        &i,
        0.0,
        InteractionStage::Phase(interaction_phase),
        Propagation::Exact,
    )?;
    Ok(0.25 * b.iter().map(|x| x.overlap.norm_sqr()).sum::<f64>())
}

/// [`run_inactive_with`] using the π interaction phase of the active pairs.
pub fn run_inactive(p: &PulseParams) -> Result<f64> {
    run_inactive_with(p, PI)
}

/// Closed-form averaged probability for effective drive ratio `r = Ω̃²/Ω²`.
pub fn inactive_probability_closed_form(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return param(format!("drive ratio must lie in [0, 1], got {r}"));
    }
    let c = (PI * r).cos();
    let p11 = (0.5 * (c * c + 2.0 * c - 1.0)).powi(2);
    Ok(0.25 * (p11 + 2.0 * c * c + 1.0))
}

/// Comparison of the exact `|11⟩`-branch spectrum and final overlap with the
/// second-order series in `x = V_int/(Ω²/Δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub ratio: f64,
    /// Series eigenvalues λ₃ ≤ λ₁ ≤ λ₂ in ascending order (MHz).
    pub eigenvalues_series: Vec<f64>,
    pub eigenvalues_exact: Vec<f64>,
    /// Max eigenvalue deviation in units of `Ω²/Δ`.
    pub eigenvalue_deviation: f64,
    /// Max eigenvector component deviation after sign alignment.
    pub eigenvector_deviation: f64,
    pub overlap_exact: C64,
    pub overlap_series: C64,
    pub overlap_deviation: f64,
    pub regime_ok: bool,
    pub warnings: Vec<String>,
}

/// Second-order eigenpairs, ordered λ₃, λ₁, λ₂ (ascending for small `x`).
fn series_eigenpairs(g: f64, v: f64) -> [(f64, [f64; 3]); 3] {
    let x = v / g;
    let l1 = -2.0 * g + v / 2.0 - v.powi(3) / (32.0 * g * g);
    let l2 = v / 4.0 + 5.0 * v * v / (64.0 * g);
    let l3 = -4.0 * g + v / 4.0 - 5.0 * v * v / (64.0 * g);
    let r = 1.0 / SQRT_2;
    let psi1 = [
        r * (1.0 + x * x / 32.0),
        -x / 4.0,
        -r * (1.0 - 3.0 * x * x / 32.0),
    ];
    let psi2 = [
        -0.5 * (1.0 - 3.0 * x / 16.0 - 25.0 * x * x / 512.0),
        r * (1.0 - x / 16.0 - 17.0 * x * x / 512.0),
        -0.5 * (1.0 + 5.0 * x / 16.0 + 23.0 * x * x / 512.0),
    ];
    let psi3 = [
        0.5 * (1.0 + 3.0 * x / 16.0 - 25.0 * x * x / 512.0),
        r * (1.0 + x / 16.0 - 17.0 * x * x / 512.0),
        0.5 * (1.0 - 5.0 * x / 16.0 + 23.0 * x * x / 512.0),
    ];
    [(l3, psi3), (l1, psi1), (l2, psi2)]
}

/// Series value of `⟨11|ψ_final⟩`.
pub fn overlap_series(x: f64) -> C64 {
    C64::new(
        -1.0 + (0.25 + 9.0 * PI * PI / 128.0) * x * x,
        3.0 * PI * x / 8.0,
    )
}

/// Checks the printed perturbative eigensystem and final overlap against exact
/// numerics. Uses `Ω² = Ω₁Ω₂` and ignores decay.
pub fn perturbation_check(p: &PulseParams, i: &InteractionParams) -> Result<PerturbationReport> {
    let mut warnings = p.validate()?;
    i.validate()?;
    let g = p.light_shift();
    let v = i.v_int;
    let x = v / g;
    let regime_ok = x <= 0.2;
    if !regime_ok {
        warnings.push(format!("V_int/(Ω²/Δ) = {x} exceeds the series regime 0.2"));
    }
    let mut sym = *p;
    let omega = (p.omega1 * p.omega2).sqrt();
    sym.omega1 = omega;
    sym.omega2 = omega;
    sym.rabi_offset = 0.0;
    sym.drive_ratio = 1.0;

    let m = hamiltonian_11(&sym, v);
    let mut h = CMatrix::zeros(3, 3);
    for r in 0..3 {
        for c in 0..3 {
            h[(r, c)] = C64::new(m[r][c], 0.0);
        }
    }
    let spec = numerics::eigh(&h)?;
    let series = series_eigenpairs(g, v);
    let mut ev_dev = 0.0_f64;
    let mut vec_dev = 0.0_f64;
    for (k, (lam, vec)) in series.iter().enumerate() {
        ev_dev = ev_dev.max((spec.eigenvalues[k] - lam).abs() / g);
        let exact = spec.vector(k);
        let dot: f64 = (0..3).map(|j| exact[j].re * vec[j]).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        for j in 0..3 {
            vec_dev = vec_dev.max((exact[j] - C64::new(sign * vec[j], 0.0)).norm());
        }
    }

    let mut quiet = i.with_gamma(0.0);
    quiet.v_int = v;
    let out = run_gate(&sym, &quiet)?;
    let overlap_exact = out.branch("11").map(|b| b.overlap).unwrap_or_default();
    let series_ov = overlap_series(x);
    Ok(PerturbationReport {
        ratio: x,
        eigenvalues_series: series.iter().map(|s| s.0).collect(),
        eigenvalues_exact: spec.eigenvalues.clone(),
        eigenvalue_deviation: ev_dev,
        eigenvector_deviation: vec_dev,
        overlap_exact,
        overlap_series: series_ov,
        overlap_deviation: (overlap_exact - series_ov).norm(),
        regime_ok,
        warnings,
    })
}

/// Rough `|11⟩` survival estimate used by the decay oracle:
/// `exp(−γπ/(Ω²/Δ) − 2γπ/V_int)` with angular frequencies.
pub fn decay_survival_estimate(p: &PulseParams, i: &InteractionParams) -> f64 {
    let g = TAU * p.light_shift();
    let mut e = i.gamma_per_us() * PI / g;
    if i.v_int > 0.0 {
        e += 2.0 * i.gamma_per_us() * PI / (TAU * i.v_int);
    }
    (-e).exp()
}

/// Norm² of a state vector, exposed for branch survival checks.
pub fn survival(b: &BranchOutcome) -> f64 {
    b.norm
}
