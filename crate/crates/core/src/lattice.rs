//! Double-well superlattice `V(x) = V₀cos²(kx+φ) + V₁cos²(2kx)`.
//!
//! Energies are in recoil units `E_R = ħ²k_ref²/2m`, wavevectors in units of
//! `k_ref`, lengths in `1/k_ref`. Bloch states are expanded in plane waves
//! `e^{i(q+2nk)x}`, `n ∈ [−N_max, N_max]`, so the lattice period is `π/k`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, param, Result};
use crate::numerics::{self, CMatrix};

/// Default plane-wave cutoff.
pub const DEFAULT_N_MAX: usize = 10;
/// Default number of quasi-momenta for band structures.
pub const DEFAULT_Q_POINTS: usize = 32;
/// Quadrature points per lattice period.
pub const POINTS_PER_PERIOD: usize = 512;

/// Superlattice amplitudes, phase and wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    /// Amplitude of the `cos²(kx+φ)` lattice (E_R).
    pub v0: f64,
    /// Amplitude of the `cos²(2kx)` lattice (E_R).
    pub v1: f64,
    /// Relative phase (rad).
    pub phi: f64,
    /// Wavevector in units of `k_ref`.
    pub k: f64,
    /// Recoil energy (kHz).
    pub recoil_khz: f64,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            v0: 100.0,
            v1: 100.0,
            phi: 0.0,
            k: 1.0,
            recoil_khz: 3.5,
        }
    }
}

impl LatticeParams {
    pub fn new(v0: f64, v1: f64, phi: f64) -> Self {
        Self {
            v0,
            v1,
            phi,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.v0, self.v1, self.phi, self.k, self.recoil_khz]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return param("lattice parameters must be finite");
        }
        if self.v0 < 0.0 || self.v1 < 0.0 {
            return param(format!(
                "lattice depths must be non-negative, got V0 = {}, V1 = {}",
                self.v0, self.v1
            ));
        }
        if self.k <= 0.0 {
            return param(format!("wavevector must be positive, got {}", self.k));
        }
        if self.recoil_khz <= 0.0 {
            return param("recoil energy must be positive");
        }
        Ok(())
    }

    /// Lattice period `π/k`.
    pub fn period(&self) -> f64 {
        PI / self.k
    }

    /// Scalar potential at `x` (E_R).
    pub fn potential(&self, x: f64) -> f64 {
        self.v0 * (self.k * x + self.phi).cos().powi(2) + self.v1 * (2.0 * self.k * x).cos().powi(2)
    }

    /// Centre of the double-well cell: the barrier between its two wells.
    pub fn cell_center(&self) -> f64 {
        ((FRAC_PI_2 - self.phi) / self.k).rem_euclid(self.period())
    }
}

/// Central-equation matrix at quasi-momentum `q` on `2·n_max+1` plane waves.
pub fn central_hamiltonian(p: &LatticeParams, q: f64, n_max: usize) -> CMatrix {
    let d = 2 * n_max + 1;
    let mut h = CMatrix::zeros(d, d);
    let c1 = C64::from_polar(p.v0 / 4.0, 2.0 * p.phi);
    let c2 = C64::new(p.v1 / 4.0, 0.0);
    for r in 0..d {
        let n = r as f64 - n_max as f64;
        h[(r, r)] = C64::new((q + 2.0 * n * p.k).powi(2) + 0.5 * (p.v0 + p.v1), 0.0);
        if r >= 1 {
            h[(r, r - 1)] = c1;
            h[(r - 1, r)] = c1.conj();
        }
        if r >= 2 {
            h[(r, r - 2)] = c2;
            h[(r - 2, r)] = c2;
        }
    }
    h
}

/// Midpoint grid of `q_points` quasi-momenta in `[−k, k)`; a single point is `q = 0`.
pub fn q_grid(k: f64, q_points: usize) -> Vec<f64> {
    let n = q_points as f64;
    (0..q_points)
        .map(|j| k * (2.0 * j as f64 + 1.0 - n) / n)
        .collect()
}

/// Bloch bands over a quasi-momentum grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub params: LatticeParams,
    pub q_grid: Vec<f64>,
    /// `energies[band][q]` (E_R).
    pub energies: Vec<Vec<f64>>,
    /// `coefficients[band][q][n + N_max]`.
    pub coefficients: Vec<Vec<Vec<C64>>>,
    pub n_max: usize,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    /// Splitting between bands `b` and `b+1` at every q.
    pub fn gap(&self, b: usize) -> Vec<f64> {
        self.energies[b + 1]
            .iter()
            .zip(&self.energies[b])
            .map(|(u, l)| u - l)
            .collect()
    }

    /// Bloch function `Σ_n c_n e^{i(q+2nk)x}` of band `b` at grid index `iq`.
    pub fn bloch_value(&self, b: usize, iq: usize, x: f64) -> C64 {
        let q = self.q_grid[iq];
        let k = self.params.k;
        self.coefficients[b][iq]
            .iter()
            .enumerate()
            .map(|(r, c)| {
                let n = r as f64 - self.n_max as f64;
                c * C64::from_polar(1.0, (q + 2.0 * n * k) * x)
            })
            .sum()
    }

    /// CSV with one row per q and one column per band.
    pub fn energies_csv(&self) -> String {
        let mut s = String::from("q");
        for b in 0..self.n_bands() {
            let _ = write!(s, ",E{}", b + 1);
        }
        s.push('\n');
        for (iq, q) in self.q_grid.iter().enumerate() {
            let _ = write!(s, "{q:.17e}");
            for band in &self.energies {
                let _ = write!(s, ",{:.17e}", band[iq]);
            }
            s.push('\n');
        }
        s
    }
}

/// Diagonalizes the central equation on a q grid and keeps the lowest `n_bands`.
pub fn solve_bands(
    p: &LatticeParams,
    n_bands: usize,
    q_points: usize,
    n_max: usize,
) -> Result<BandStructure> {
    p.validate()?;
    if n_bands == 0 || n_bands > 2 * n_max {
        return param(format!(
            "band count must lie in [1, 2·N_max] = [1, {}], got {n_bands}",
            2 * n_max
        ));
    }
    if q_points == 0 {
        return param("at least one quasi-momentum is required");
    }
    let qs = q_grid(p.k, q_points);
    let spectra: Vec<numerics::HermitianSpectrum> = qs
        .par_iter()
        .map(|&q| numerics::eigh(&central_hamiltonian(p, q, n_max)))
        .collect::<Result<_>>()?;
    let mut energies = vec![Vec::with_capacity(q_points); n_bands];
    let mut coefficients = vec![Vec::with_capacity(q_points); n_bands];
    for s in &spectra {
        for b in 0..n_bands {
            energies[b].push(s.eigenvalues[b]);
            coefficients[b].push(s.eigenvectors.column(b).iter().copied().collect());
        }
    }
    Ok(BandStructure {
        params: *p,
        q_grid: qs,
        energies,
        coefficients,
        n_max,
    })
}

/// Band-1/band-2 Wannier functions of one cell and their left/right combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WannierSet {
    pub x_grid: Vec<f64>,
    pub w1: Vec<C64>,
    pub w2: Vec<C64>,
    pub psi_l: Vec<C64>,
    pub psi_r: Vec<C64>,
    /// Barrier position of the chosen cell.
    pub cell_center: f64,
    /// Lattice period `π/k`.
    pub period: f64,
    /// Grid spacing used for quadrature.
    pub dx: f64,
}

impl WannierSet {
    /// `∫|f|²` over `[a, b)`.
    pub fn weight_in(&self, f: &[C64], a: f64, b: f64) -> f64 {
        self.x_grid
            .iter()
            .zip(f)
            .filter(|(x, _)| **x >= a && **x < b)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * self.dx
    }

    /// Weight of `psi_l` in the left half of its cell.
    pub fn left_weight(&self) -> f64 {
        let half = 0.5 * self.period;
        self.weight_in(&self.psi_l, self.cell_center - half, self.cell_center)
    }

    /// Weight of `psi_r` in the right half of its cell.
    pub fn right_weight(&self) -> f64 {
        let half = 0.5 * self.period;
        self.weight_in(&self.psi_r, self.cell_center, self.cell_center + half)
    }

    /// `⟨f|g⟩` by the rectangle rule (exact for the periodic supercell grid).
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum::<C64>() * self.dx
    }

    /// Mean and RMS width of `|f|²`.
    pub fn moments(&self, f: &[C64]) -> (f64, f64) {
        let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        let mean = self
            .x_grid
            .iter()
            .zip(f)
            .map(|(x, z)| x * z.norm_sqr())
            .sum::<f64>()
            / norm;
        let var = self
            .x_grid
            .iter()
            .zip(f)
            .map(|(x, z)| (x - mean).powi(2) * z.norm_sqr())
            .sum::<f64>()
            / norm;
        (mean, var.sqrt())
    }

    /// CSV with x and real/imaginary parts of every function.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,w1_re,w1_im,w2_re,w2_im,psiL_re,psiL_im,psiR_re,psiR_im\n");
        for i in 0..self.x_grid.len() {
            let _ = write!(s, "{:.17e}", self.x_grid[i]);
            for f in [&self.w1, &self.w2, &self.psi_l, &self.psi_r] {
                let _ = write!(s, ",{:.17e},{:.17e}", f[i].re, f[i].im);
            }
            s.push('\n');
        }
        s
    }
}

/// Position of the potential minimum in the right half of the cell, by grid search.
fn right_minimum(p: &LatticeParams) -> f64 {
    let c = p.cell_center();
    let half = 0.5 * p.period();
    let n = POINTS_PER_PERIOD / 2;
    (0..n)
        .map(|j| c + half * j as f64 / n as f64)
        .min_by(|a, b| p.potential(*a).total_cmp(&p.potential(*b)))
        .unwrap_or(c)
}

/// Wannier functions of bands 1 and 2 centred on cell `cell_index`, and the
/// generalized combinations `(w1 ∓ w2)/√2` localized in the left/right well.
///
/// Gauge: every Bloch function is made real positive at the right-well minimum,
/// so both Wannier functions are positive there.
pub fn wannier(bs: &BandStructure, cell_index: i64) -> Result<WannierSet> {
    if bs.n_bands() < 2 {
        return param("Wannier construction needs at least two bands");
    }
    let p = &bs.params;
    let nq = bs.q_grid.len();
    let l = p.period();
    let x_i = cell_index as f64 * l;
    let c = p.cell_center();
    let x_ref = right_minimum(p);

    let gauge: Vec<Vec<C64>> = (0..2)
        .map(|b| {
            (0..nq)
                .map(|iq| {
                    let v = bs.bloch_value(b, iq, x_ref);
                    if v.norm() < 1e-8 {
                        // Fall back to the largest-coefficient phase of eigh.
                        C64::new(1.0, 0.0)
                    } else {
                        v.conj() / v.norm()
                    }
                })
                .collect()
        })
        .collect();

    let npts = nq * POINTS_PER_PERIOD;
    let span = nq as f64 * l;
    let dx = span / npts as f64;
    let start = x_i + c - 0.5 * span;
    let x_grid: Vec<f64> = (0..npts).map(|j| start + j as f64 * dx).collect();

    let build = |b: usize| -> Vec<C64> {
        let mut w: Vec<C64> = x_grid
            .par_iter()
            .map(|&x| {
                (0..nq)
                    .map(|iq| {
                        let shift = C64::from_polar(1.0, -bs.q_grid[iq] * x_i);
                        gauge[b][iq] * shift * bs.bloch_value(b, iq, x)
                    })
                    .sum()
            })
            .collect();
        let norm = (w.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
        for z in w.iter_mut() {
            *z /= norm;
        }
        w
    };
    let w1 = build(0);
    let w2 = build(1);
    if w1
        .iter()
        .chain(&w2)
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return domain("Wannier construction produced non-finite values");
    }
    let psi_l: Vec<C64> = w1.iter().zip(&w2).map(|(a, b)| (a - b) / SQRT_2).collect();
    let psi_r: Vec<C64> = w1.iter().zip(&w2).map(|(a, b)| (a + b) / SQRT_2).collect();
    Ok(WannierSet {
        x_grid,
        w1,
        w2,
        psi_l,
        psi_r,
        cell_center: x_i + c,
        period: l,
        dx,
    })
}

/// `k·x` of the two minima of the `n = 0` double well (geometry with φ = 0).
pub fn double_well_minima(p: &LatticeParams) -> Result<(f64, f64)> {
    p.validate()?;
    if p.v0 > 4.0 * p.v1 || p.v1 == 0.0 {
        return domain(format!(
            "single-well regime: V0 = {} exceeds 4·V1 = {}",
            p.v0,
            4.0 * p.v1
        ));
    }
    let s = (p.v0 / (4.0 * p.v1)).asin() / 2.0;
    Ok((s + FRAC_PI_4, -s + 3.0 * FRAC_PI_4))
}

/// Vector light shift at the double-well minima (E_R); `Δ_vec = 2·|result|`.
pub fn vector_shift(p: &LatticeParams, alpha_ratio: f64, m_f: f64) -> Result<f64> {
    p.validate()?;
    if !(alpha_ratio > 0.0 && alpha_ratio <= 1.0) {
        return param(format!("α_v/α_s must lie in (0, 1], got {alpha_ratio}"));
    }
    if p.v1 <= 0.0 {
        return param("vector shift needs V1 > 0");
    }
    if p.v0 > 4.0 * p.v1 {
        return domain(format!(
            "single-well regime: V0 = {} exceeds 4·V1 = {}",
            p.v0,
            4.0 * p.v1
        ));
    }
    let amp = (p.v0 * p.v1 * (1.0 - p.v0 / (4.0 * p.v1)) / 2.0).sqrt();
    Ok(alpha_ratio * amp * p.v0 / (2.0 * p.v1) * m_f)
}

/// Harmonic ground-state width `a = (E_R/V0)^{1/4}/k` (units `1/k_ref`).
pub fn harmonic_width(p: &LatticeParams) -> Result<f64> {
    if !(p.v0 > 0.0 && p.v0.is_finite()) {
        return param(format!("harmonic width needs V0 > 0, got {}", p.v0));
    }
    if !(p.k > 0.0) {
        return param("wavevector must be positive");
    }
    Ok(p.v0.powf(-0.25) / p.k)
}
