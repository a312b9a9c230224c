//! Parameter and outcome types shared by the two phase-gate simulators.
//!
//! Frequencies are ordinary frequencies in MHz; evolution uses `2π·f` so
//! times come out in μs. Decay rates are `1/lifetime` in 1/s.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::numerics::{self, CMatrix, CVector};

/// Excitation-pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    /// Lower-leg single-photon Rabi frequency (MHz).
    pub omega1: f64,
    /// Upper-leg single-photon Rabi frequency (MHz).
    pub omega2: f64,
    /// Intermediate-state detuning (MHz).
    pub delta: f64,
    /// Ground hyperfine splitting (MHz).
    pub delta_hf: f64,
    /// 1, 2 or 4.
    pub photon_order: u32,
    /// Fractional Rabi offset δΩ/⟨Ω⟩ applied to both legs.
    pub rabi_offset: f64,
    /// Ω̃/Ω for atoms at standing-wave minima; 1 for active atoms.
    pub drive_ratio: f64,
}

impl PulseParams {
    /// Equal-leg pulse with two-photon light shift `g = Ω²/Δ` (MHz).
    pub fn from_light_shift(g: f64, delta: f64, delta_hf: f64) -> Self {
        let omega = (g * delta).sqrt();
        Self {
            omega1: omega,
            omega2: omega,
            delta,
            delta_hf,
            photon_order: 2,
            rabi_offset: 0.0,
            drive_ratio: 1.0,
        }
    }

    /// Nominal `Ω₁Ω₂/Δ` (MHz), which sets every pulse duration.
    pub fn light_shift(&self) -> f64 {
        self.omega1 * self.omega2 / self.delta
    }

    /// Factor multiplying `Ω²` terms: `drive_ratio^photon_order`.
    pub fn effective_drive(&self) -> f64 {
        self.drive_ratio.powi(self.photon_order as i32)
    }

    /// Sets `drive_ratio` so that [`Self::effective_drive`] equals `r`.
    pub fn with_effective_drive(mut self, r: f64) -> Self {
        self.drive_ratio = r.max(0.0).powf(1.0 / self.photon_order as f64);
        self
    }

    /// `Ω₁Ω₂` including offset and drive scaling (MHz²).
    pub(crate) fn scaled_product(&self) -> f64 {
        let s = (1.0 + self.rabi_offset).powi(2) * self.effective_drive();
        self.omega1 * self.omega2 * s
    }

    pub(crate) fn scaled_squares(&self) -> (f64, f64) {
        let s = (1.0 + self.rabi_offset).powi(2) * self.effective_drive();
        (self.omega1 * self.omega1 * s, self.omega2 * self.omega2 * s)
    }

    /// Checks ranges and returns soft warnings for the validity regime.
    pub fn validate(&self) -> Result<Vec<String>> {
        let finite = [
            self.omega1,
            self.omega2,
            self.delta,
            self.delta_hf,
            self.rabi_offset,
            self.drive_ratio,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return param("pulse parameters must be finite");
        }
        if self.omega1 < 0.0 || self.omega2 < 0.0 {
            return param("Rabi frequencies must be non-negative");
        }
        if self.delta <= 0.0 {
            return param(format!(
                "intermediate detuning must be positive, got {}",
                self.delta
            ));
        }
        if self.delta_hf < 0.0 {
            return param("hyperfine splitting must be non-negative");
        }
        if ![1, 2, 4].contains(&self.photon_order) {
            return param(format!(
                "photon order must be 1, 2 or 4, got {}",
                self.photon_order
            ));
        }
        if !(0.0..=1.0).contains(&self.drive_ratio) {
            return param(format!(
                "drive ratio must lie in [0, 1], got {}",
                self.drive_ratio
            ));
        }
        if self.rabi_offset <= -1.0 {
            return param("Rabi offset must exceed -1");
        }
        if self.light_shift() == 0.0 {
            return param("zero Rabi frequency cannot realize a finite pulse area");
        }
        let mut warnings = Vec::new();
        if self.delta < 10.0 * self.omega1.max(self.omega2) {
            warnings.push(format!(
                "intermediate detuning {} MHz is not much larger than the Rabi frequencies",
                self.delta
            ));
        }
        Ok(warnings)
    }

    /// π-pulse duration (μs): `2π·(Ω²/Δ)·T = π/2`.
    pub fn pi_time(&self) -> f64 {
        0.25 / self.light_shift()
    }
}

/// Rydberg interaction and decay parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    /// Interaction shift of `|rr⟩` (MHz).
    pub v_int: f64,
    /// Next-pair interaction relative to `v_int`.
    pub delta_v_ratio: f64,
    /// Rydberg decay rate (1/s).
    pub gamma: f64,
    /// 6 for van der Waals, 3 for dipole-dipole.
    pub power: u32,
    /// Nearest-neighbour distance (nm).
    pub r_nm: f64,
    /// Trap frequency (kHz).
    pub omega_trap: f64,
}

impl InteractionParams {
    /// Interaction with the default next-pair ratio `1/3^power`.
    pub fn new(v_int: f64, power: u32) -> Self {
        Self {
            v_int,
            delta_v_ratio: default_delta_v_ratio(power),
            gamma: 0.0,
            power,
            r_nm: 405.0,
            omega_trap: 70.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Decay rate in 1/μs.
    pub fn gamma_per_us(&self) -> f64 {
        self.gamma * 1e-6
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.v_int,
            self.delta_v_ratio,
            self.gamma,
            self.r_nm,
            self.omega_trap,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return param("interaction parameters must be finite");
        }
        if self.v_int < 0.0 {
            return param(format!(
                "interaction must be non-negative, got {}",
                self.v_int
            ));
        }
        if self.gamma < 0.0 {
            return param("decay rate must be non-negative");
        }
        if self.power != 3 && self.power != 6 {
            return param(format!(
                "interaction power must be 3 or 6, got {}",
                self.power
            ));
        }
        Ok(())
    }
}

/// Next-pair interaction ratio for a pair spacing three times the in-pair spacing.
pub fn default_delta_v_ratio(power: u32) -> f64 {
    3f64.powi(-(power as i32))
}

/// Final state of one computational input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOutcome {
    /// Computational input, e.g. `"01"`.
    pub label: String,
    /// Labels of the integrated basis; the first entry is the input itself.
    pub basis: Vec<String>,
    pub amplitudes: Vec<C64>,
    /// `⟨input|ψ_final⟩`.
    pub overlap: C64,
    /// `‖ψ_final‖²` over the integrated basis.
    pub norm: f64,
    /// `1 − |overlap|²`.
    pub leakage: f64,
}

impl BranchOutcome {
    pub(crate) fn new(label: &str, basis: &[&str], amplitudes: Vec<C64>) -> Self {
        let overlap = amplitudes[0];
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        Self {
            label: label.to_string(),
            basis: basis.iter().map(|s| s.to_string()).collect(),
            leakage: (1.0 - overlap.norm_sqr()).clamp(0.0, 1.0),
            amplitudes,
            overlap,
            norm,
        }
    }
}

/// Outcome of a simulated two-qubit phase gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    /// Inputs in the order 00, 01, 10, 11.
    pub branches: Vec<BranchOutcome>,
    /// `arg⟨11⟩ − arg⟨01⟩ − arg⟨10⟩ + arg⟨00⟩`, in `[0, 2π)`.
    pub phase: f64,
    /// `¼·Σ|⟨input|ψ_final⟩|²`.
    pub fidelity_avg: f64,
    pub warnings: Vec<String>,
}

impl GateOutcome {
    pub(crate) fn from_branches(branches: Vec<BranchOutcome>, warnings: Vec<String>) -> Self {
        let ov: Vec<C64> = branches.iter().map(|b| b.overlap).collect();
        let phase = (ov[3].arg() - ov[1].arg() - ov[2].arg() + ov[0].arg()).rem_euclid(TAU);
        let fidelity_avg = (0.25 * ov.iter().map(|z| z.norm_sqr()).sum::<f64>()).clamp(0.0, 1.0);
        Self {
            branches,
            phase,
            fidelity_avg,
            warnings,
        }
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity_avg
    }

    pub fn branch(&self, label: &str) -> Option<&BranchOutcome> {
        self.branches.iter().find(|b| b.label == label)
    }

    /// Diagonal of the realized map on the qubit subspace, order 00, 01, 10, 11.
    pub fn diagonal(&self) -> [C64; 4] {
        [
            self.branches[0].overlap,
            self.branches[1].overlap,
            self.branches[2].overlap,
            self.branches[3].overlap,
        ]
    }

    /// Conditional phase distance from π (radians).
    pub fn phase_error(&self) -> f64 {
        (self.phase - PI).abs()
    }
}

/// How piecewise-constant gate stages are propagated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Propagation {
    /// Matrix exponential of each constant stage.
    #[default]
    Exact,
    /// Fixed-step RK4 with the given number of steps per fastest period.
    Rk4 { steps_per_period: f64 },
}

/// Evolves `psi` under the constant generator `h` (rad/μs) for `t` μs.
pub(crate) fn stage(h: &CMatrix, psi: &CVector, t: f64, how: Propagation) -> Result<CVector> {
    if t == 0.0 {
        return Ok(psi.clone());
    }
    match how {
        Propagation::Exact => numerics::propagate_constant(h, psi, t),
        Propagation::Rk4 { steps_per_period } => {
            if !(steps_per_period > 0.0) {
                return Err(Error::Parameter(
                    "RK4 steps per period must be positive".into(),
                ));
            }
            let rate = numerics::max_abs(h).max(f64::MIN_POSITIVE);
            let dt = TAU / rate / steps_per_period;
            Ok(numerics::evolve(h, psi, (0.0, t), dt)?.final_state)
        }
    }
}

/// Builds `2π·m − i·γ·diag(excitations)` from a real matrix in MHz.
pub(crate) fn generator(m: &[&[f64]], excitations: &[f64], gamma_us: f64) -> CMatrix {
    let n = m.len();
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = C64::new(TAU * m[i][j], 0.0);
        }
        h[(i, i)] -= C64::new(0.0, gamma_us * excitations[i]);
    }
    h
}

pub(crate) fn basis_state(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = C64::new(1.0, 0.0);
    v
}
