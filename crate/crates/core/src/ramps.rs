//! Ground-band retention through time-dependent lattice manipulations.
//!
//! Dynamics run in the full `2N_max+1` plane-wave space at `q = 0`; band
//! populations are projections onto instantaneous eigenvectors and serve only
//! for reporting. Times are in `1/E_R` (ħ = 1) unless suffixed `_us`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lattice::{self, LatticeParams, DEFAULT_N_MAX};
use crate::numerics::{self, CMatrix, CVector, Generator};

/// Segment durations (μs) of the default merge: V₀ down, φ ramp, V₀ up.
/// Tuned with [`adiabaticity_scan`]-style sweeps of the middle segment.
pub const MERGE_SPLIT_US: [f64; 3] = [252.5, 95.0, 252.5];
/// Depth of the V₀ plateau during the phase ramp (E_R).
pub const MERGE_LOW_V0: f64 = 20.0;
/// Number of population samples recorded by default.
pub const DEFAULT_SAMPLES: usize = 200;

/// Converts μs to `1/E_R` for a recoil energy given in kHz.
pub fn us_to_recoil(us: f64, recoil_khz: f64) -> f64 {
    TAU * recoil_khz * 1e-3 * us
}

/// Converts `1/E_R` to μs for a recoil energy given in kHz.
pub fn recoil_to_us(t: f64, recoil_khz: f64) -> f64 {
    t / (TAU * recoil_khz * 1e-3)
}

/// One linear ramp of every lattice parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Duration (1/E_R).
    pub duration: f64,
    pub v0: (f64, f64),
    pub v1: (f64, f64),
    pub phi: (f64, f64),
    pub k: (f64, f64),
}

impl Segment {
    fn at(&self, s: f64) -> [f64; 4] {
        let lerp = |(a, b): (f64, f64)| a + (b - a) * s;
        [lerp(self.v0), lerp(self.v1), lerp(self.phi), lerp(self.k)]
    }
}

/// Piecewise-linear lattice schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    segments: Vec<Segment>,
}

impl RampSchedule {
    /// Validates positivity of durations and continuity across boundaries.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return param("schedule needs at least one segment");
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return param(format!(
                    "segment {i} duration must be positive, got {}",
                    s.duration
                ));
            }
            let ends = [s.v0, s.v1, s.phi, s.k];
            if ends.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
                return param(format!("segment {i} has non-finite endpoints"));
            }
            if s.v0.0 < 0.0 || s.v0.1 < 0.0 || s.v1.0 < 0.0 || s.v1.1 < 0.0 {
                return param(format!("segment {i} reaches a negative lattice depth"));
            }
            if s.k.0 <= 0.0 || s.k.1 <= 0.0 {
                return param(format!("segment {i} reaches k ≤ 0"));
            }
        }
        for (i, w) in segments.windows(2).enumerate() {
            let (a, b) = (w[0].at(1.0), w[1].at(0.0));
            if a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-12) {
                return param(format!("schedule is discontinuous after segment {i}"));
            }
        }
        Ok(Self { segments })
    }

    /// Merge schedule with segment durations in μs, starting from `V₀ = v_high`, φ = 0.
    pub fn merge_with_split(
        split_us: [f64; 3],
        v_high: f64,
        v1: f64,
        recoil_khz: f64,
    ) -> Result<Self> {
        let d = split_us.map(|u| us_to_recoil(u, recoil_khz));
        let seg = |duration, v0, phi| Segment {
            duration,
            v0,
            v1: (v1, v1),
            phi,
            k: (1.0, 1.0),
        };
        Self::new(vec![
            seg(d[0], (v_high, MERGE_LOW_V0), (0.0, 0.0)),
            seg(d[1], (MERGE_LOW_V0, MERGE_LOW_V0), (0.0, FRAC_PI_2)),
            seg(d[2], (MERGE_LOW_V0, v_high), (FRAC_PI_2, FRAC_PI_2)),
        ])
    }

    /// Default merge at 100/100 E_R and 3.5 kHz recoil.
    pub fn merge() -> Self {
        Self::merge_with_split(MERGE_SPLIT_US, 100.0, 100.0, 3.5)
            .expect("default merge schedule is valid")
    }

    /// Holds `p` fixed for `duration`.
    pub fn hold(p: &LatticeParams, duration: f64) -> Result<Self> {
        Self::new(vec![Segment {
            duration,
            v0: (p.v0, p.v0),
            v1: (p.v1, p.v1),
            phi: (p.phi, p.phi),
            k: (p.k, p.k),
        }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// All durations multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return param(format!("scale factor must be positive, got {scale}"));
        }
        let mut out = self.clone();
        for s in &mut out.segments {
            s.duration *= scale;
        }
        Ok(out)
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> Self {
        let swap = |(a, b): (f64, f64)| (b, a);
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                duration: s.duration,
                v0: swap(s.v0),
                v1: swap(s.v1),
                phi: swap(s.phi),
                k: swap(s.k),
            })
            .collect();
        Self { segments }
    }

    /// Concatenation; fails if `next` does not start where `self` ends.
    pub fn then(&self, next: &RampSchedule) -> Result<Self> {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&next.segments);
        Self::new(segments)
    }

    /// Lattice parameters at time `t`, clamped to the schedule span.
    pub fn params_at(&self, t: f64, base: &LatticeParams) -> LatticeParams {
        let mut t = t.max(0.0);
        let last = self.segments.len() - 1;
        for (i, s) in self.segments.iter().enumerate() {
            if t <= s.duration || i == last {
                let [v0, v1, phi, k] = s.at((t / s.duration).min(1.0));
                return LatticeParams {
                    v0,
                    v1,
                    phi,
                    k,
                    ..*base
                };
            }
            t -= s.duration;
        }
        unreachable!("schedule has at least one segment")
    }
}

/// Band-projected populations sampled along a ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionReport {
    /// Final ground-band population.
    pub retention: f64,
    /// Sample times (1/E_R).
    pub times: Vec<f64>,
    /// `band_populations[sample][band]` over the tracked bands.
    pub band_populations: Vec<Vec<f64>>,
    /// Total duration (μs).
    pub total_time: f64,
    /// Final population summed over every instantaneous band.
    pub completeness: f64,
    /// Largest `|‖ψ‖² − 1|` seen at the samples.
    pub max_norm_error: f64,
    pub recoil_khz: f64,
}

impl RetentionReport {
    /// CSV time series: `time_us, P_band1, ...`.
    pub fn to_csv(&self) -> String {
        let nb = self.band_populations.first().map_or(0, Vec::len);
        let mut s = String::from("time_us");
        for b in 0..nb {
            let _ = write!(s, ",P_band{}", b + 1);
        }
        s.push('\n');
        for (t, row) in self.times.iter().zip(&self.band_populations) {
            let _ = write!(s, "{:.17e}", recoil_to_us(*t, self.recoil_khz));
            for p in row {
                let _ = write!(s, ",{p:.17e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Integration controls shared by the ramp evolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampOptions {
    pub n_max: usize,
    /// Step size (1/E_R); `None` picks [`numerics::default_dt`].
    pub dt: Option<f64>,
    pub samples: usize,
}

impl Default for RampOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            dt: None,
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// Pentadiagonal `q = 0` central-equation Hamiltonian along a schedule.
struct ScheduleGenerator<'a> {
    schedule: &'a RampSchedule,
    base: LatticeParams,
    n_max: usize,
}

impl ScheduleGenerator<'_> {
    fn params(&self, t: f64) -> LatticeParams {
        self.schedule.params_at(t, &self.base)
    }
}

impl Generator for ScheduleGenerator<'_> {
    fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let p = self.params(t);
        let d = self.dim();
        let c1 = C64::from_polar(p.v0 / 4.0, 2.0 * p.phi);
        let c1c = c1.conj();
        let c2 = p.v1 / 4.0;
        let offset = 0.5 * (p.v0 + p.v1);
        for r in 0..d {
            let n = r as f64 - self.n_max as f64;
            let mut acc = psi[r] * ((2.0 * n * p.k).powi(2) + offset);
            if r >= 1 {
                acc += c1 * psi[r - 1];
            }
            if r + 1 < d {
                acc += c1c * psi[r + 1];
            }
            if r >= 2 {
                acc += psi[r - 2] * c2;
            }
            if r + 2 < d {
                acc += psi[r + 2] * c2;
            }
            out[r] = acc;
        }
    }

    fn max_rate(&self, t: f64) -> f64 {
        let p = self.params(t);
        (2.0 * self.n_max as f64 * p.k).powi(2) + 0.5 * (p.v0 + p.v1)
    }
}

/// Collects populations at each observation; the first eigh failure is kept.
struct Recorder {
    n_tracked: usize,
    times: Vec<f64>,
    pops: Vec<Vec<f64>>,
    max_norm_error: f64,
    error: Option<Error>,
}

impl Recorder {
    fn new(n_tracked: usize) -> Self {
        Self {
            n_tracked,
            times: Vec::new(),
            pops: Vec::new(),
            max_norm_error: 0.0,
            error: None,
        }
    }

    fn record(&mut self, t: f64, h: &CMatrix, psi: &[C64]) {
        if self.error.is_some() {
            return;
        }
        match populations(h, psi) {
            Ok(all) => {
                let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                self.max_norm_error = self.max_norm_error.max((norm - 1.0).abs());
                self.times.push(t);
                self.pops.push(all[..self.n_tracked].to_vec());
            }
            Err(e) => self.error = Some(e),
        }
    }
}

/// Populations of every eigenvector of `h`, ascending in energy.
fn populations(h: &CMatrix, psi: &[C64]) -> Result<Vec<f64>> {
    let s = numerics::eigh(h)?;
    Ok((0..s.dim())
        .map(|j| {
            s.eigenvectors
                .column(j)
                .iter()
                .zip(psi)
                .map(|(v, p)| v.conj() * p)
                .sum::<C64>()
                .norm_sqr()
        })
        .collect())
}

fn check_tracked(n_tracked: usize, n_max: usize) -> Result<()> {
    if n_tracked == 0 || n_tracked > 2 * n_max + 1 {
        return param(format!(
            "tracked bands must lie in [1, {}], got {n_tracked}",
            2 * n_max + 1
        ));
    }
    Ok(())
}

fn ground_state(h: &CMatrix) -> Result<CVector> {
    Ok(numerics::eigh(h)?.vector(0))
}

/// Runs `gen` from the ground state of `h_of(0)`, projecting onto the
/// eigenvectors of `h_of(t)` at each sample.
fn run<G, H>(
    gen: &G,
    h_of: H,
    duration: f64,
    n_tracked: usize,
    opts: &RampOptions,
    recoil_khz: f64,
) -> Result<RetentionReport>
where
    G: Generator,
    H: Fn(f64) -> CMatrix,
{
    let psi0 = ground_state(&h_of(0.0))?;
    let dt = opts
        .dt
        .unwrap_or_else(|| numerics::default_dt(gen, (0.0, duration)));
    let mut rec = Recorder::new(n_tracked);
    let result =
        numerics::evolve_observed(gen, &psi0, (0.0, duration), dt, opts.samples, |t, psi| {
            rec.record(t, &h_of(t), psi)
        })?;
    if let Some(e) = rec.error {
        return Err(e);
    }
    let fin: Vec<C64> = result.final_state.iter().copied().collect();
    let all = populations(&h_of(duration), &fin)?;
    Ok(RetentionReport {
        retention: all[0],
        times: rec.times,
        band_populations: rec.pops,
        total_time: recoil_to_us(duration, recoil_khz),
        completeness: all.iter().sum(),
        max_norm_error: rec.max_norm_error,
        recoil_khz,
    })
}

/// Evolves the `q = 0` ground state of the schedule's initial lattice.
///
/// `p0` must coincide with the schedule start; it supplies the recoil energy.
pub fn evolve_bands(
    schedule: &RampSchedule,
    p0: &LatticeParams,
    n_tracked: usize,
) -> Result<RetentionReport> {
    evolve_bands_with(schedule, p0, n_tracked, &RampOptions::default())
}

pub fn evolve_bands_with(
    schedule: &RampSchedule,
    p0: &LatticeParams,
    n_tracked: usize,
    opts: &RampOptions,
) -> Result<RetentionReport> {
    p0.validate()?;
    check_tracked(n_tracked, opts.n_max)?;
    let start = schedule.params_at(0.0, p0);
    let mismatch = [
        (start.v0, p0.v0),
        (start.v1, p0.v1),
        (start.phi, p0.phi),
        (start.k, p0.k),
    ]
    .iter()
    .any(|(a, b)| (a - b).abs() > 1e-12);
    if mismatch {
        return param("initial lattice does not match the schedule start");
    }
    let gen = ScheduleGenerator {
        schedule,
        base: *p0,
        n_max: opts.n_max,
    };
    let h_of = |t: f64| lattice::central_hamiltonian(&gen.params(t), 0.0, opts.n_max);
    run(
        &gen,
        h_of,
        schedule.total_duration(),
        n_tracked,
        opts,
        p0.recoil_khz,
    )
}

/// Single-cosine lattice `V₁cos²(kx)` with `k` ramped linearly, in the
/// co-moving coordinate `z = k(t)·x`.
///
/// In `z` the lattice is fixed with period π, the kinetic term scales as `k²`
/// and the rescaling adds `(k̇/k)·D`, where `D` is the symmetrized dilation
/// `(zp+pz)/2` about the well centre. Bands are projected without `D`.
struct StretchGenerator {
    k0: f64,
    rate: f64,
    v1: f64,
    n_max: usize,
    dilation: CMatrix,
}

impl StretchGenerator {
    fn new(k0: f64, k1: f64, duration: f64, v1: f64, n_max: usize) -> Self {
        let d = 2 * n_max + 1;
        let mut dilation = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                if r != c {
                    let (m, n) = (r as f64 - n_max as f64, c as f64 - n_max as f64);
                    dilation[(r, c)] = C64::new(0.0, (m + n) / (2.0 * (m - n)));
                }
            }
        }
        Self {
            k0,
            rate: (k1 - k0) / duration,
            v1,
            n_max,
            dilation,
        }
    }

    fn k(&self, t: f64) -> f64 {
        self.k0 + self.rate * t
    }

    fn static_part(&self, t: f64) -> CMatrix {
        stretch_hamiltonian(self.k(t), self.v1, self.n_max)
    }
}

fn stretch_hamiltonian(k: f64, v1: f64, n_max: usize) -> CMatrix {
    let d = 2 * n_max + 1;
    let mut h = CMatrix::zeros(d, d);
    for r in 0..d {
        let n = r as f64 - n_max as f64;
        h[(r, r)] = C64::new((2.0 * n * k).powi(2) + 0.5 * v1, 0.0);
        if r >= 1 {
            h[(r, r - 1)] = C64::new(v1 / 4.0, 0.0);
            h[(r - 1, r)] = C64::new(v1 / 4.0, 0.0);
        }
    }
    h
}

impl Generator for StretchGenerator {
    fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        let k = self.k(t);
        let g = self.rate / k;
        let d = self.dim();
        for r in 0..d {
            let n = r as f64 - self.n_max as f64;
            let mut acc = psi[r] * ((2.0 * n * k).powi(2) + 0.5 * self.v1);
            if r >= 1 {
                acc += psi[r - 1] * (self.v1 / 4.0);
            }
            if r + 1 < d {
                acc += psi[r + 1] * (self.v1 / 4.0);
            }
            if g != 0.0 {
                let mut dil = C64::new(0.0, 0.0);
                for (c, p) in psi.iter().enumerate() {
                    dil += self.dilation[(r, c)] * p;
                }
                acc += dil * g;
            }
            out[r] = acc;
        }
    }

    fn max_rate(&self, t: f64) -> f64 {
        let k = self.k(t);
        let n = self.n_max as f64;
        (2.0 * n * k).powi(2) + 0.5 * self.v1 + (self.rate / k).abs() * n
    }
}

/// Linear stretch `k_start → k_end` over `duration` (1/E_R) at depth `v1`.
pub fn evolve_stretch(duration: f64, k_start: f64, k_end: f64, v1: f64) -> Result<RetentionReport> {
    evolve_stretch_with(
        duration,
        k_start,
        k_end,
        v1,
        3.5,
        4,
        &RampOptions::default(),
    )
}

pub fn evolve_stretch_with(
    duration: f64,
    k_start: f64,
    k_end: f64,
    v1: f64,
    recoil_khz: f64,
    n_tracked: usize,
    opts: &RampOptions,
) -> Result<RetentionReport> {
    if !(k_end > 0.0 && k_start > 0.0) || !k_end.is_finite() || !k_start.is_finite() {
        return param(format!(
            "wavevectors must be positive, got {k_start} → {k_end}"
        ));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return param(format!("duration must be positive, got {duration}"));
    }
    if !(v1 >= 0.0 && v1.is_finite()) {
        return param(format!("lattice depth must be non-negative, got {v1}"));
    }
    if !(recoil_khz > 0.0) {
        return param("recoil energy must be positive");
    }
    check_tracked(n_tracked, opts.n_max)?;
    let gen = StretchGenerator::new(k_start, k_end, duration, v1, opts.n_max);
    let h_of = |t: f64| gen.static_part(t);
    run(&gen, h_of, duration, n_tracked, opts, recoil_khz)
}

/// Retention with all durations multiplied by each scale, evaluated in parallel.
pub fn adiabaticity_scan(
    schedule: &RampSchedule,
    p0: &LatticeParams,
    scales: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if scales.is_empty() {
        return param("scale list is empty");
    }
    scales
        .par_iter()
        .map(|&s| {
            let r = evolve_bands(&schedule.scaled(s)?, p0, 4)?;
            Ok((s, r.retention))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn merge_start() -> LatticeParams {
        LatticeParams::new(100.0, 100.0, 0.0)
    }

    #[test]
    fn unit_conversion_round_trips() {
        let t = us_to_recoil(730.0, 3.5);
        assert!((t - 16.05).abs() < 0.01, "{t}");
        assert!((recoil_to_us(t, 3.5) - 730.0).abs() < 1e-10);
    }

    #[test]
    fn schedule_validation() {
        let seg = Segment {
            duration: 1.0,
            v0: (1.0, 2.0),
            v1: (1.0, 1.0),
            phi: (0.0, 0.0),
            k: (1.0, 1.0),
        };
        assert!(RampSchedule::new(vec![seg]).is_ok());
        assert!(RampSchedule::new(vec![]).is_err());
        assert!(RampSchedule::new(vec![Segment {
            duration: 0.0,
            ..seg
        }])
        .is_err());
        assert!(RampSchedule::new(vec![Segment {
            v0: (1.0, -1.0),
            ..seg
        }])
        .is_err());
        assert!(RampSchedule::new(vec![Segment {
            k: (1.0, 0.0),
            ..seg
        }])
        .is_err());
        assert!(RampSchedule::new(vec![seg, seg]).is_err());
        let cont = Segment {
            v0: (2.0, 1.0),
            ..seg
        };
        assert!(RampSchedule::new(vec![seg, cont]).is_ok());
    }

    #[test]
    fn merge_schedule_shape() {
        let s = RampSchedule::merge();
        assert!((recoil_to_us(s.total_duration(), 3.5) - 600.0).abs() < 1e-9);
        let base = merge_start();
        let end = s.params_at(s.total_duration(), &base);
        assert!((end.phi - FRAC_PI_2).abs() < 1e-15 && (end.v0 - 100.0).abs() < 1e-12);
        let mid = s.params_at(0.5 * s.total_duration(), &base);
        assert!((mid.v0 - MERGE_LOW_V0).abs() < 1e-12);
    }

    #[test]
    fn hold_keeps_ground_state() {
        let p = LatticeParams::new(60.0, 30.0, 0.4);
        let r = evolve_bands(&RampSchedule::hold(&p, 3.0).unwrap(), &p, 4).unwrap();
        assert!((r.retention - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mismatched_start_rejected() {
        let s = RampSchedule::merge();
        assert!(evolve_bands(&s, &LatticeParams::new(90.0, 100.0, 0.0), 4).is_err());
        assert!(evolve_bands(&s, &merge_start(), 0).is_err());
    }

    #[test]
    fn merge_retention_and_bookkeeping() {
        let r = evolve_bands(&RampSchedule::merge(), &merge_start(), 4).unwrap();
        assert!(r.retention >= 0.995, "{}", r.retention);
        assert!((r.completeness - 1.0).abs() < 1e-7);
        assert!(r.max_norm_error < 1e-7);
        let last = r.band_populations.last().unwrap();
        assert!((last[0] - r.retention).abs() < 1e-12);
        for row in &r.band_populations {
            assert!(row.iter().all(|p| (0.0..=1.0 + 1e-9).contains(p)));
            assert!(row.iter().sum::<f64>() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn compressed_merge_loses_population() {
        let s = RampSchedule::merge().scaled(0.05).unwrap();
        let r = evolve_bands(&s, &merge_start(), 4).unwrap();
        assert!(r.retention < 0.99, "{}", r.retention);
    }

    #[test]
    fn step_halving_converged() {
        let s = RampSchedule::merge();
        let p = merge_start();
        let a = evolve_bands(&s, &p, 4).unwrap();
        let gen = ScheduleGenerator {
            schedule: &s,
            base: p,
            n_max: DEFAULT_N_MAX,
        };
        let dt = numerics::default_dt(&gen, (0.0, s.total_duration())) / 2.0;
        let opts = RampOptions {
            dt: Some(dt),
            ..RampOptions::default()
        };
        let b = evolve_bands_with(&s, &p, 4, &opts).unwrap();
        assert!((a.retention - b.retention).abs() < 1e-6);
    }

    #[test]
    fn forward_then_reverse_returns() {
        let s = RampSchedule::merge();
        let p = merge_start();
        let fwd = evolve_bands(&s, &p, 4).unwrap();
        let round = evolve_bands(&s.then(&s.reversed()).unwrap(), &p, 4).unwrap();
        // Leakage amplitudes of the two legs can add coherently: |2a|² = 4|a|².
        assert!(1.0 - round.retention <= 4.0 * (1.0 - fwd.retention) + 1e-9);
        assert!(round.retention > 0.9999);
    }

    #[test]
    fn slower_merges_stay_adiabatic() {
        let s = RampSchedule::merge();
        let scan = adiabaticity_scan(&s, &merge_start(), &[0.05, 1.0, 2.0, 4.0]).unwrap();
        assert!(scan[0].1 < 0.99);
        for (_, r) in &scan[1..] {
            assert!(*r > 0.9999, "{r}");
        }
    }

    #[test]
    fn scan_singleton_matches_direct_run() {
        let s = RampSchedule::merge();
        let p = merge_start();
        let scan = adiabaticity_scan(&s, &p, &[1.0]).unwrap();
        let direct = evolve_bands(&s, &p, 4).unwrap();
        assert_eq!(scan, vec![(1.0, direct.retention)]);
        assert!(adiabaticity_scan(&s, &p, &[0.0]).is_err());
        assert!(adiabaticity_scan(&s, &p, &[]).is_err());
    }

    #[test]
    fn stretch_retention() {
        let r = evolve_stretch(16.0, 2.0, 0.4, 100.0).unwrap();
        assert!((r.retention - 0.9955).abs() <= 0.005, "{}", r.retention);
        assert!((r.total_time - 727.6).abs() < 0.5);
        assert!(r.max_norm_error < 1e-7);
        assert!((r.completeness - 1.0).abs() < 1e-7);
    }

    #[test]
    fn stretch_faster_loses_more() {
        let slow = evolve_stretch(16.0, 2.0, 0.4, 100.0).unwrap();
        let fast = evolve_stretch(1.6, 2.0, 0.4, 100.0).unwrap();
        assert!(fast.retention < slow.retention);
        assert!(fast.retention < 0.999, "{}", fast.retention);
    }

    #[test]
    fn stretch_without_change_is_stationary() {
        let r = evolve_stretch(2.0, 1.0, 1.0, 80.0).unwrap();
        assert!((r.retention - 1.0).abs() < 1e-8);
        assert!(evolve_stretch(2.0, 1.0, 0.0, 80.0).is_err());
        assert!(evolve_stretch(0.0, 1.0, 0.5, 80.0).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = LatticeParams::new(50.0, 50.0, 0.0);
        let r = evolve_bands(&RampSchedule::hold(&p, 0.5).unwrap(), &p, 2).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time_us,P_band1,P_band2"));
        assert_eq!(lines.count(), r.times.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn short_ramps_conserve_norm(
            v0a in 0.0f64..80.0, v0b in 0.0f64..80.0,
            phi in 0.0f64..1.6, dur in 0.05f64..0.5,
        ) {
            let seg = Segment { duration: dur, v0: (v0a, v0b), v1: (50.0, 50.0), phi: (0.0, phi), k: (1.0, 1.0) };
            let s = RampSchedule::new(vec![seg]).unwrap();
            let p = LatticeParams::new(v0a, 50.0, 0.0);
            let r = evolve_bands(&s, &p, 4).unwrap();
            prop_assert!(r.max_norm_error < 1e-7);
            prop_assert!((r.completeness - 1.0).abs() < 1e-7);
            prop_assert!((0.0..=1.0 + 1e-9).contains(&r.retention));
        }
    }
}
