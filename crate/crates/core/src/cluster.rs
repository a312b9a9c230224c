//! Entangling schedules, small statevector simulation of the gate protocol,
//! and cluster-state stabilizer checks.
//!
//! Sites are 1-based. Grid site `(r, c)` (0-based row and column) has index
//! `r·cols + c + 1`. In a state vector, qubit `q` of `n` is bit `n − q`, so
//! qubit 1 is the most significant bit.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gate::GateOutcome;

/// Largest register simulated as a state vector.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Chain { n: usize },
    Grid { rows: usize, cols: usize },
}

impl Geometry {
    pub fn n_sites(&self) -> usize {
        match *self {
            Geometry::Chain { n } => n,
            Geometry::Grid { rows, cols } => rows * cols,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Geometry::Chain { n } if n < 2 => {
                param(format!("a chain needs at least 2 sites, got {n}"))
            }
            Geometry::Grid { rows, cols } if rows < 2 || cols < 2 => param(format!(
                "a grid needs at least 2×2 sites, got {rows}×{cols}"
            )),
            _ => Ok(()),
        }
    }

    /// Nearest-neighbour edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match *self {
            Geometry::Chain { n } => (1..n).map(|a| (a, a + 1)).collect(),
            Geometry::Grid { rows, cols } => {
                let idx = |r: usize, c: usize| r * cols + c + 1;
                let mut e = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            e.push((idx(r, c), idx(r, c + 1)));
                        }
                        if r + 1 < rows {
                            e.push((idx(r, c), idx(r + 1, c)));
                        }
                    }
                }
                e
            }
        }
    }

    /// Neighbours of site `a`.
    pub fn neighbours(&self, a: usize) -> Vec<usize> {
        self.edges()
            .into_iter()
            .filter_map(|(x, y)| {
                if x == a {
                    Some(y)
                } else if y == a {
                    Some(x)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Line (row or column) and position along it of an edge, for the separation rule.
    fn line_of(&self, (a, b): (usize, usize)) -> (usize, usize, usize) {
        match *self {
            Geometry::Chain { .. } => (0, a, b),
            Geometry::Grid { cols, .. } => {
                let (ra, ca) = ((a - 1) / cols, (a - 1) % cols);
                let (rb, cb) = ((b - 1) / cols, (b - 1) % cols);
                if ra == rb {
                    (ra, ca, cb)
                } else {
                    (usize::MAX - ca, ra, rb)
                }
            }
        }
    }
}

/// `1d:N` or `2d:RxC`.
impl FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || param(format!("geometry '{s}' must look like 1d:N or 2d:RxC"));
        let Some((kind, size)) = s
            .trim()
            .to_ascii_lowercase()
            .split_once(':')
            .map(|(a, b)| (a.to_string(), b.to_string()))
        else {
            return bad();
        };
        let num = |t: &str| t.trim().parse::<usize>().ok();
        let g = match kind.as_str() {
            "1d" => num(&size).map(|n| Geometry::Chain { n }),
            "2d" => size.split_once('x').and_then(|(r, c)| {
                Some(Geometry::Grid {
                    rows: num(r)?,
                    cols: num(c)?,
                })
            }),
            _ => None,
        };
        match g {
            Some(g) => g.validate().map(|_| g),
            None => bad(),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Geometry::Chain { n } => write!(f, "1d:{n}"),
            Geometry::Grid { rows, cols } => write!(f, "2d:{rows}x{cols}"),
        }
    }
}

/// Rounds of simultaneous gates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub geometry: Geometry,
    pub rounds: Vec<Vec<(usize, usize)>>,
}

/// Four-round pattern on a line of `n` sites, positions 1-based along the line.
fn line_rounds(n: usize) -> [Vec<(usize, usize)>; 4] {
    let round = |first: usize| {
        (first..n)
            .step_by(4)
            .map(|a| (a, a + 1))
            .collect::<Vec<_>>()
    };
    [round(1), round(3), round(2), round(4)]
}

/// 1D: `(4n+1,4n+2)`, `(4n+3,4n+4)`, `(4n+2,4n+3)`, `(4n+4,4n+5)`; 2D: that
/// pattern on every row, then on every column. Empty rounds are dropped.
pub fn make_schedule(geometry: Geometry) -> Result<Schedule> {
    geometry.validate()?;
    let mut rounds: Vec<Vec<(usize, usize)>> = match geometry {
        Geometry::Chain { n } => line_rounds(n).into_iter().collect(),
        Geometry::Grid { rows, cols } => {
            let idx = |r: usize, c: usize| r * cols + c + 1;
            let mut out = Vec::new();
            for round in line_rounds(cols) {
                out.push(
                    (0..rows)
                        .flat_map(|r| {
                            round
                                .iter()
                                .map(move |&(a, b)| (idx(r, a - 1), idx(r, b - 1)))
                        })
                        .collect(),
                );
            }
            for round in line_rounds(rows) {
                out.push(
                    (0..cols)
                        .flat_map(|c| {
                            round
                                .iter()
                                .map(move |&(a, b)| (idx(a - 1, c), idx(b - 1, c)))
                        })
                        .collect(),
                );
            }
            out
        }
    };
    rounds.retain(|r| !r.is_empty());
    Ok(Schedule { geometry, rounds })
}

impl Schedule {
    /// Checks disjointness, the every-other-pair spacing along each line, and
    /// that the rounds cover every edge exactly once.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (k, round) in self.rounds.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &(a, b) in round {
                if !seen.insert(a) || !seen.insert(b) {
                    return Err(format!("round {} reuses a site", k + 1));
                }
            }
            for (i, &p) in round.iter().enumerate() {
                for &q in &round[i + 1..] {
                    let (lp, p0, p1) = self.geometry.line_of(p);
                    let (lq, q0, q1) = self.geometry.line_of(q);
                    if lp == lq {
                        let gap = p0.max(q0) - p0.min(q0).max(p1.min(q1));
                        let gap = gap.min(q0.abs_diff(p1)).min(p0.abs_diff(q1));
                        if gap < 3 {
                            return Err(format!(
                                "round {} has pairs {p:?} and {q:?} too close",
                                k + 1
                            ));
                        }
                    }
                }
            }
        }
        let mut scheduled: Vec<(usize, usize)> = self
            .rounds
            .iter()
            .flatten()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        scheduled.sort_unstable();
        let mut edges = self.geometry.edges();
        edges.sort_unstable();
        if scheduled != edges {
            return Err("rounds do not cover each nearest-neighbour edge exactly once".to_string());
        }
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }
}

/// Diagonal-or-general map on a qubit pair, basis order 00, 01, 10, 11.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitGate {
    pub matrix: [[C64; 4]; 4],
    /// The map equals `(Z⊗Z)·CZ`; both frame bits flip when it is applied.
    pub frame_flip: bool,
}

impl TwoQubitGate {
    pub fn diagonal(d: [C64; 4]) -> Self {
        let z = C64::new(0.0, 0.0);
        let mut matrix = [[z; 4]; 4];
        for (i, v) in d.into_iter().enumerate() {
            matrix[i][i] = v;
        }
        Self {
            matrix,
            frame_flip: false,
        }
    }

    /// `diag(1, 1, 1, −1)`.
    pub fn cz() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::diagonal([one, one, one, -one])
    }

    /// The phase gate as realized, `diag(1, −1, −1, −1) = (Z⊗Z)·CZ`.
    pub fn realized() -> Self {
        let one = C64::new(1.0, 0.0);
        Self {
            frame_flip: true,
            ..Self::diagonal([one, -one, -one, -one])
        }
    }

    /// Qubit-subspace map of a simulated gate. Single-qubit phases are removed
    /// (local Z rotations): the result is `diag(|d00|, |d01|, |d10|, |d11|·e^{iθ})`
    /// with `θ` the conditional phase, so leakage and phase error survive.
    pub fn from_outcome(outcome: &GateOutcome) -> Self {
        let d = outcome.diagonal();
        let phase = C64::from_polar(1.0, outcome.phase);
        Self::diagonal([
            C64::new(d[0].norm(), 0.0),
            C64::new(d[1].norm(), 0.0),
            C64::new(d[2].norm(), 0.0),
            phase * d[3].norm(),
        ])
    }

    fn is_diagonal(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || self.matrix[i][j] == C64::new(0.0, 0.0)))
    }
}

/// State vector over `n ≤ 16` qubits with a Z-correction frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub n: usize,
    pub amplitudes: Vec<C64>,
    /// Pending Z corrections, one bit per qubit.
    pub frame: Vec<u8>,
}

impl QubitState {
    fn check_size(n: usize) -> Result<()> {
        if n == 0 || n > MAX_QUBITS {
            return param(format!(
                "register size must lie in [1, {MAX_QUBITS}], got {n}"
            ));
        }
        Ok(())
    }

    /// `|+⟩^⊗n`.
    pub fn plus(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        let a = C64::new(FRAC_1_SQRT_2.powi(n as i32), 0.0);
        Ok(Self {
            n,
            amplitudes: vec![a; dim],
            frame: vec![0; n],
        })
    }

    /// `|0⟩^⊗n`.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self {
            n,
            amplitudes,
            frame: vec![0; n],
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - q)
    }

    /// Applies Z to every qubit with a pending frame bit and clears the frame.
    pub fn apply_frame(&mut self) {
        let mask: usize = (1..=self.n)
            .filter(|&q| self.frame[q - 1] == 1)
            .map(|q| self.bit(q))
            .sum();
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask).count_ones() % 2 == 1 {
                *z = -*z;
            }
        }
        self.frame.iter_mut().for_each(|f| *f = 0);
    }

    /// `⟨other|self⟩`.
    pub fn inner(&self, other: &QubitState) -> C64 {
        other
            .amplitudes
            .iter()
            .zip(&self.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Applies `gate` to `pair = (first, second)`; `first` is the left qubit of
/// the 4×4 basis. The norm is not restored for lossy maps.
pub fn apply_gate(state: &mut QubitState, pair: (usize, usize), gate: &TwoQubitGate) -> Result<()> {
    let (a, b) = pair;
    if a == 0 || b == 0 || a > state.n || b > state.n || a == b {
        return param(format!("pair {pair:?} is invalid for {} qubits", state.n));
    }
    let (ba, bb) = (state.bit(a), state.bit(b));
    let m = &gate.matrix;
    if gate.is_diagonal() {
        let d = [m[0][0], m[1][1], m[2][2], m[3][3]];
        for (i, z) in state.amplitudes.iter_mut().enumerate() {
            let k = (usize::from(i & ba != 0) << 1) | usize::from(i & bb != 0);
            *z *= d[k];
        }
    } else {
        for i in 0..state.amplitudes.len() {
            if i & (ba | bb) != 0 {
                continue;
            }
            let idx = [i, i | bb, i | ba, i | ba | bb];
            let v = idx.map(|j| state.amplitudes[j]);
            for (r, &j) in idx.iter().enumerate() {
                state.amplitudes[j] = (0..4).map(|c| m[r][c] * v[c]).sum();
            }
        }
    }
    if gate.frame_flip {
        state.frame[a - 1] ^= 1;
        state.frame[b - 1] ^= 1;
    }
    Ok(())
}

/// Gate applied on every scheduled pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSource {
    /// Textbook CZ.
    Ideal,
    /// `(Z⊗Z)·CZ` with frame tracking.
    Realized,
    /// A simulated gate map.
    Map(Box<TwoQubitGate>),
}

impl GateSource {
    pub fn from_outcome(outcome: &GateOutcome) -> Self {
        GateSource::Map(Box::new(TwoQubitGate::from_outcome(outcome)))
    }

    fn gate(&self) -> TwoQubitGate {
        match self {
            GateSource::Ideal => TwoQubitGate::cz(),
            GateSource::Realized => TwoQubitGate::realized(),
            GateSource::Map(g) => **g,
        }
    }
}

/// Final state and figures of merit of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub geometry: Geometry,
    #[serde(skip)]
    pub state: Option<QubitState>,
    /// `|⟨ideal|ψ⟩|²` with ψ unnormalized, so leakage counts as error.
    pub fidelity: f64,
    /// `‖ψ‖²`.
    pub success_probability: f64,
    /// Fidelity of the renormalized state.
    pub conditional_fidelity: f64,
    pub stabilizers: Vec<f64>,
    pub rounds: usize,
    pub gates: usize,
}

/// `CZ` on every edge applied to `|+⟩^⊗N`, built directly from edge parities.
pub fn ideal_cluster(geometry: Geometry) -> Result<QubitState> {
    geometry.validate()?;
    let mut s = QubitState::plus(geometry.n_sites())?;
    let masks: Vec<usize> = geometry
        .edges()
        .iter()
        .map(|&(a, b)| s.bit(a) | s.bit(b))
        .collect();
    for (i, z) in s.amplitudes.iter_mut().enumerate() {
        let parity = masks.iter().filter(|&&m| i & m == m).count();
        if parity % 2 == 1 {
            *z = -*z;
        }
    }
    Ok(s)
}

/// Runs the schedule from `|+⟩^⊗N`, then applies pending frame corrections.
pub fn run_protocol(geometry: Geometry, source: &GateSource) -> Result<ProtocolResult> {
    let schedule = make_schedule(geometry)?;
    let mut state = QubitState::plus(geometry.n_sites())?;
    let gate = source.gate();
    for round in &schedule.rounds {
        for &pair in round {
            apply_gate(&mut state, pair, &gate)?;
        }
    }
    state.apply_frame();
    let ideal = ideal_cluster(geometry)?;
    let fidelity = state.inner(&ideal).norm_sqr();
    let success_probability = state.norm_sqr();
    let stabilizers = stabilizer_expectations(&state, geometry);
    Ok(ProtocolResult {
        geometry,
        fidelity,
        success_probability,
        conditional_fidelity: if success_probability > 0.0 {
            fidelity / success_probability
        } else {
            0.0
        },
        stabilizers,
        rounds: schedule.rounds.len(),
        gates: schedule.gate_count(),
        state: Some(state),
    })
}

/// `⟨K_a⟩ = ⟨X_a Π_{b∼a} Z_b⟩ / ‖ψ‖²` for every site.
pub fn stabilizer_expectations(state: &QubitState, geometry: Geometry) -> Vec<f64> {
    let norm = state.norm_sqr();
    (1..=state.n)
        .map(|a| {
            let flip = state.bit(a);
            let zmask: usize = geometry
                .neighbours(a)
                .into_iter()
                .filter(|&b| b <= state.n)
                .map(|b| state.bit(b))
                .sum();
            let mut acc = 0.0;
            for (i, z) in state.amplitudes.iter().enumerate() {
                let sign = if (i & zmask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                acc += sign * (state.amplitudes[i ^ flip].conj() * z).re;
            }
            if norm > 0.0 {
                acc / norm
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain(n: usize) -> Geometry {
        Geometry::Chain { n }
    }

    #[test]
    fn chain_schedule_examples() {
        let s = make_schedule(chain(5)).unwrap();
        assert_eq!(
            s.rounds,
            vec![vec![(1, 2)], vec![(3, 4)], vec![(2, 3)], vec![(4, 5)]]
        );
        let s = make_schedule(chain(2)).unwrap();
        assert_eq!(s.rounds, vec![vec![(1, 2)]]);
        let s = make_schedule(chain(9)).unwrap();
        assert_eq!(s.rounds[0], vec![(1, 2), (5, 6)]);
        assert_eq!(s.rounds[3], vec![(4, 5), (8, 9)]);
        assert!(make_schedule(chain(1)).is_err());
        assert!(make_schedule(Geometry::Grid { rows: 1, cols: 4 }).is_err());
    }

    #[test]
    fn geometry_strings_round_trip() {
        for g in [chain(6), Geometry::Grid { rows: 3, cols: 4 }] {
            assert_eq!(g.to_string().parse::<Geometry>().unwrap(), g);
        }
        assert_eq!(
            "2D:2X2".parse::<Geometry>().unwrap(),
            Geometry::Grid { rows: 2, cols: 2 }
        );
        for bad in ["1d:1", "3d:4", "1d", "2d:3", "2d:1x4", "1d:x"] {
            assert!(bad.parse::<Geometry>().is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_schedule_covers_edges() {
        let g = Geometry::Grid { rows: 2, cols: 2 };
        let s = make_schedule(g).unwrap();
        assert_eq!(s.rounds, vec![vec![(1, 2), (3, 4)], vec![(1, 3), (2, 4)]]);
        assert_eq!(s.gate_count(), 4);
        s.validate().unwrap();
    }

    #[test]
    fn schedules_valid_by_enumeration() {
        for n in 2..=64 {
            make_schedule(chain(n)).unwrap().validate().unwrap();
        }
        for rows in 2..=8 {
            for cols in 2..=8 {
                make_schedule(Geometry::Grid { rows, cols })
                    .unwrap()
                    .validate()
                    .unwrap();
            }
        }
    }

    #[test]
    fn validation_catches_bad_schedules() {
        let g = chain(6);
        let bad = Schedule {
            geometry: g,
            rounds: vec![vec![(1, 2), (3, 4)], vec![(2, 3), (4, 5), (5, 6)]],
        };
        assert!(bad.validate().is_err());
        let missing = Schedule {
            geometry: g,
            rounds: vec![vec![(1, 2)]],
        };
        assert!(missing.validate().is_err());
        let twice = Schedule {
            geometry: chain(2),
            rounds: vec![vec![(1, 2)], vec![(1, 2)]],
        };
        assert!(twice.validate().is_err());
    }

    #[test]
    fn two_qubit_cluster_stabilizers() {
        let mut s = QubitState::plus(2).unwrap();
        apply_gate(&mut s, (1, 2), &TwoQubitGate::cz()).unwrap();
        let k = stabilizer_expectations(&s, chain(2));
        assert!(k.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn realized_gate_plus_frame_is_cz() {
        let mut a = QubitState::plus(2).unwrap();
        apply_gate(&mut a, (1, 2), &TwoQubitGate::realized()).unwrap();
        assert_eq!(a.frame, vec![1, 1]);
        a.apply_frame();
        let mut b = QubitState::plus(2).unwrap();
        apply_gate(&mut b, (1, 2), &TwoQubitGate::cz()).unwrap();
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn protocol_matches_ideal_for_all_sizes() {
        let mut geoms: Vec<Geometry> = (2..=10).map(chain).collect();
        for rows in 2..=4 {
            for cols in 2..=4 {
                geoms.push(Geometry::Grid { rows, cols });
            }
        }
        for g in geoms {
            let ideal = run_protocol(g, &GateSource::Ideal).unwrap();
            assert!(
                ideal.stabilizers.iter().all(|v| (v - 1.0).abs() < 1e-10),
                "{g:?}"
            );
            assert!((ideal.fidelity - 1.0).abs() < 1e-10);
            let real = run_protocol(g, &GateSource::Realized).unwrap();
            let (x, y) = (ideal.state.unwrap(), real.state.unwrap());
            for (p, q) in x.amplitudes.iter().zip(&y.amplitudes) {
                assert!((p - q).norm() < 1e-12, "{g:?}");
            }
        }
    }

    #[test]
    fn product_states_have_zero_stabilizers() {
        let g = chain(4);
        let plus = stabilizer_expectations(&QubitState::plus(4).unwrap(), g);
        assert!(plus.iter().all(|v| v.abs() < 1e-12));
        let zero = stabilizer_expectations(&QubitState::zeros(4).unwrap(), g);
        assert!(zero.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn lossy_map_norm_bookkeeping() {
        let r = C64::new(0.9, 0.0);
        let d = [C64::new(1.0, 0.0), r, r * 0.99, -r * 0.98];
        let gate = TwoQubitGate::diagonal(d);
        let mean_leak = 0.25 * d.iter().map(|z| 1.0 - z.norm_sqr()).sum::<f64>();
        let mut s = QubitState::plus(2).unwrap();
        apply_gate(&mut s, (1, 2), &gate).unwrap();
        assert!((s.norm_sqr() - (1.0 - mean_leak)).abs() < 1e-9);
    }

    #[test]
    fn general_matrix_application() {
        // CNOT with qubit 1 as control flips qubit 2 of |10⟩.
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let cnot = TwoQubitGate {
            matrix: [[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]],
            frame_flip: false,
        };
        let mut s = QubitState::zeros(3).unwrap();
        s.amplitudes[0] = z;
        s.amplitudes[0b100] = o;
        apply_gate(&mut s, (1, 2), &cnot).unwrap();
        assert_eq!(s.amplitudes[0b110], o);
        apply_gate(&mut s, (2, 3), &cnot).unwrap();
        assert_eq!(s.amplitudes[0b111], o);
    }

    #[test]
    fn bad_pairs_rejected() {
        let mut s = QubitState::plus(3).unwrap();
        assert!(apply_gate(&mut s, (0, 1), &TwoQubitGate::cz()).is_err());
        assert!(apply_gate(&mut s, (2, 4), &TwoQubitGate::cz()).is_err());
        assert!(apply_gate(&mut s, (2, 2), &TwoQubitGate::cz()).is_err());
        assert!(QubitState::plus(17).is_err());
        assert!(run_protocol(Geometry::Grid { rows: 4, cols: 5 }, &GateSource::Ideal).is_err());
    }

    proptest! {
        #[test]
        fn gates_within_a_round_commute(n in 4usize..12, seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let g = chain(n);
            let s = make_schedule(g).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gate = TwoQubitGate::diagonal([
                C64::new(0.99, 0.0), C64::from_polar(0.98, 0.1), C64::from_polar(0.97, -0.2), C64::from_polar(0.96, 3.0),
            ]);
            let mut a = QubitState::plus(n).unwrap();
            let mut b = QubitState::plus(n).unwrap();
            for round in &s.rounds {
                for &p in round { apply_gate(&mut a, p, &gate).unwrap(); }
                let mut shuffled = round.clone();
                shuffled.shuffle(&mut rng);
                for &p in &shuffled { apply_gate(&mut b, p, &gate).unwrap(); }
            }
            for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn unitary_protocol_keeps_norm(n in 2usize..=12) {
            let r = run_protocol(chain(n), &GateSource::Realized).unwrap();
            prop_assert!((r.success_probability - 1.0).abs() < 1e-9);
        }
    }
}
