//! Dense Hermitian eigendecomposition and fixed-step RK4 propagation of
//! `i dψ/dt = H(t) ψ` with complex, possibly non-Hermitian generators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{domain, Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative Hermiticity tolerance accepted by [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default step as a fraction of the fastest period of the generator.
pub const STEPS_PER_PERIOD: f64 = 200.0;

/// Number of norm samples recorded by [`evolve`].
pub const DEFAULT_NORM_SAMPLES: usize = 100;

/// Eigenpairs of a Hermitian matrix, ascending, with a fixed phase per vector.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`; its largest-magnitude entry is real positive.
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j).into_owned()
    }
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn all_finite<'a>(it: impl IntoIterator<Item = &'a C64>) -> bool {
    it.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Rotates `v` so its largest-magnitude entry (first one on near ties) is real positive.
pub fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let rot = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
}

/// Eigendecomposition of a complex Hermitian matrix.
pub fn eigh(h: &CMatrix) -> Result<HermitianSpectrum> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Contract(format!(
            "eigh needs a square matrix, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if !all_finite(h.iter()) {
        return domain("eigh input has non-finite entries");
    }
    if n == 0 {
        return Ok(HermitianSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let scale = max_abs(h);
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::Contract(format!(
            "eigh input is not Hermitian: asymmetry {asym:e} vs scale {scale:e}"
        )));
    }
    // Solve the Hermitian part; the asymmetry check above bounds what is dropped.
    let m = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = 0.5 * (h[(i, j)] + h[(j, i)].conj());
        faer::c64::new(z.re, z.im)
    });
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Domain(format!("Hermitian eigensolver failed: {e:?}")))?;
    let (u, s) = (eig.U(), eig.S());

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let mut vectors = CMatrix::zeros(n, n);
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (col, &src) in idx.iter().enumerate() {
        for (row, z) in v.iter_mut().enumerate() {
            let w = u[(row, src)];
            *z = C64::new(w.re, w.im);
        }
        fix_phase(&mut v);
        vectors.set_column(col, &CVector::from_column_slice(&v));
    }
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| s[i].re).collect();
    if !eigenvalues.iter().all(|x| x.is_finite()) || !all_finite(vectors.iter()) {
        return domain("Hermitian eigensolver produced non-finite output");
    }
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// A time-dependent generator `H(t)` acting on state vectors.
pub trait Generator {
    fn dim(&self) -> usize;
    /// Writes `H(t)·psi` into `out`.
    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]);
    /// Largest matrix-element magnitude of `H(t)`.
    fn max_rate(&self, t: f64) -> f64;
}

impl Generator for CMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, _t: f64, psi: &[C64], out: &mut [C64]) {
        matvec(self, psi, out);
    }

    fn max_rate(&self, _t: f64) -> f64 {
        max_abs(self)
    }
}

/// Adapts a closure returning a dense matrix into a [`Generator`].
pub struct MatrixFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> CMatrix> MatrixFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64) -> CMatrix> Generator for MatrixFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        matvec(&(self.f)(t), psi, out);
    }

    fn max_rate(&self, t: f64) -> f64 {
        max_abs(&(self.f)(t))
    }
}

fn matvec(m: &CMatrix, psi: &[C64], out: &mut [C64]) {
    let n = m.nrows();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = C64::new(0.0, 0.0);
        for (j, p) in psi.iter().enumerate() {
            acc += m[(i, j)] * p;
        }
        *o = acc;
    }
}

/// Final state of a propagation plus norm samples.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: CVector,
    /// Norm at the start and at each sample point.
    pub norm_history: Vec<f64>,
    pub step_count: usize,
}

/// Default step: 1/200 of the fastest period among matrix-element magnitudes,
/// probed at the start, middle and end of the span.
pub fn default_dt<G: Generator + ?Sized>(gen: &G, span: (f64, f64)) -> f64 {
    let (t0, t1) = span;
    let rate = [t0, 0.5 * (t0 + t1), t1]
        .iter()
        .map(|&t| gen.max_rate(t))
        .fold(0.0_f64, f64::max);
    if rate > 0.0 && rate.is_finite() {
        std::f64::consts::TAU / rate / STEPS_PER_PERIOD
    } else {
        (t1 - t0).max(f64::MIN_POSITIVE)
    }
}

/// Classical RK4 from `span.0` to `span.1` with the largest uniform step not exceeding `dt`.
pub fn evolve<G: Generator + ?Sized>(
    gen: &G,
    psi0: &CVector,
    span: (f64, f64),
    dt: f64,
) -> Result<EvolutionResult> {
    evolve_observed(gen, psi0, span, dt, DEFAULT_NORM_SAMPLES, |_, _| {})
}

/// As [`evolve`], calling `observe(t, ψ)` at the start and at `samples` evenly spaced steps.
pub fn evolve_observed<G, O>(
    gen: &G,
    psi0: &CVector,
    span: (f64, f64),
    dt: f64,
    samples: usize,
    mut observe: O,
) -> Result<EvolutionResult>
where
    G: Generator + ?Sized,
    O: FnMut(f64, &[C64]),
{
    let (t0, t1) = span;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("step must be positive, got {dt}")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::Parameter(format!("invalid time span ({t0}, {t1})")));
    }
    let n = gen.dim();
    if psi0.len() != n {
        return Err(Error::Contract(format!(
            "state has dimension {} but generator has {}",
            psi0.len(),
            n
        )));
    }
    if !all_finite(psi0.iter()) {
        return domain("initial state has non-finite entries");
    }

    let steps = if t1 > t0 {
        ((t1 - t0) / dt).ceil().max(1.0) as usize
    } else {
        0
    };
    let h = if steps > 0 {
        (t1 - t0) / steps as f64
    } else {
        0.0
    };

    let mut marks: Vec<usize> = (1..=samples)
        .map(|k| (k * steps).div_ceil(samples.max(1)))
        .filter(|&s| s > 0)
        .collect();
    marks.dedup();
    let mut next_mark = 0;

    let mut psi: Vec<C64> = psi0.iter().copied().collect();
    let mut norm_history = vec![l2(&psi)];
    observe(t0, &psi);

    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * h;
        deriv(gen, t, &psi, &mut k1);
        axpy_into(&psi, 0.5 * h, &k1, &mut tmp);
        deriv(gen, t + 0.5 * h, &tmp, &mut k2);
        axpy_into(&psi, 0.5 * h, &k2, &mut tmp);
        deriv(gen, t + 0.5 * h, &tmp, &mut k3);
        axpy_into(&psi, h, &k3, &mut tmp);
        deriv(gen, t + h, &tmp, &mut k4);
        let w = h / 6.0;
        for i in 0..n {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        if !all_finite(psi.iter()) {
            return domain(format!(
                "non-finite state at t = {}; generator entries are not finite or the step is unstable",
                t + h
            ));
        }
        if next_mark < marks.len() && marks[next_mark] == step {
            next_mark += 1;
            norm_history.push(l2(&psi));
            let t_now = if step == steps {
                t1
            } else {
                t0 + step as f64 * h
            };
            observe(t_now, &psi);
        }
    }

    Ok(EvolutionResult {
        final_state: CVector::from_vec(psi),
        norm_history,
        step_count: steps,
    })
}

fn deriv<G: Generator + ?Sized>(gen: &G, t: f64, psi: &[C64], out: &mut [C64]) {
    gen.apply(t, psi, out);
    for z in out.iter_mut() {
        // -i·z
        *z = C64::new(z.im, -z.re);
    }
}

fn axpy_into(x: &[C64], a: f64, y: &[C64], out: &mut [C64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + yi * a;
    }
}

fn l2(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Exact propagation `exp(−i H t) ψ` for a constant generator.
pub fn propagate_constant(h: &CMatrix, psi: &CVector, t: f64) -> Result<CVector> {
    if h.nrows() != h.ncols() || h.nrows() != psi.len() {
        return Err(Error::Contract("propagator dimensions disagree".into()));
    }
    if !all_finite(h.iter()) || !t.is_finite() {
        return domain("propagator input has non-finite entries");
    }
    let u = (h * C64::new(0.0, -t)).exp();
    let out = u * psi;
    if !all_finite(out.iter()) {
        return domain("matrix exponential overflowed");
    }
    Ok(out)
}

/// Squared norm of a state.
pub fn norm_sqr(psi: &CVector) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}
