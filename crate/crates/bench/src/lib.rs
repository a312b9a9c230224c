//! Fixed inputs shared by the kernel benchmarks.

use rydlat::budget::noblockade_site_ratio;
use rydlat::gate_blockade::BlockadePulse;
use rydlat::lattice::LatticeParams;
use rydlat::numerics::CMatrix;
use rydlat::{Complex64, InteractionParams, PulseParams};

/// Deterministic dense Hermitian matrix of size `n`.
pub fn hermitian(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        let re = ((a + 1.0) * (b + 2.0)).sin();
        let im = if i == j {
            0.0
        } else {
            ((a + 3.0) * (b + 1.0)).cos()
        };
        Complex64::new(re, if i < j { im } else { -im })
    })
}

pub fn superlattice() -> LatticeParams {
    LatticeParams::new(100.0, 100.0, 0.0)
}

/// Gate without blockade at Ω²/Δ = 30 MHz, V_int = 3 MHz, γ = 2000 s⁻¹.
pub fn noblockade_gate() -> (PulseParams, InteractionParams) {
    (
        PulseParams::from_light_shift(30.0, 4.0e4, 6834.7),
        InteractionParams::new(3.0, 6).with_gamma(2000.0),
    )
}

/// Blockade gate at Ω²/Δ = 25 kHz, Δ_vec = 200 kHz (θ = 8π).
pub fn blockade_gate() -> (BlockadePulse, InteractionParams) {
    (
        BlockadePulse::new(PulseParams::from_light_shift(0.025, 4.0e4, 6834.7), 0.2),
        InteractionParams::new(1.0e3, 3).with_gamma(2000.0),
    )
}

/// Effective drive of an inactive two-photon pair without blockade.
pub fn inactive_drive() -> f64 {
    noblockade_site_ratio().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_matrix_is_hermitian() {
        let h = hermitian(12);
        assert_eq!(h, h.adjoint());
    }
}
