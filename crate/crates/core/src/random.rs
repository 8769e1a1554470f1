//! Random coin states and operators for property checks and Monte Carlo runs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::coin::{CoinOperator, CoinVector, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed pure state.
pub fn pure_state<R: Rng + ?Sized>(rng: &mut R) -> CoinVector {
    CoinVector::new(gaussian(rng), gaussian(rng)).unit()
}

/// Haar-distributed element of U(2): a uniform unit quaternion times a uniform phase.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> CoinOperator {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    let a = C64::new(w, z);
    let b = C64::new(y, x);
    let su = CoinOperator::new([[a, -b.conj()], [b, a.conj()]]);
    let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    su.scale(phase)
}

/// Density matrix `GG†/Tr(GG†)` from a complex Ginibre matrix (Hilbert–Schmidt measure).
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R) -> CoinOperator {
    let g = CoinOperator::new([
        [gaussian(rng), gaussian(rng)],
        [gaussian(rng), gaussian(rng)],
    ]);
    let m = g * g.adjoint();
    m.scale_re(1.0 / m.trace().re)
}

/// Hermitian, trace-one matrix that need not be positive.
pub fn hermitian_unit_trace<R: Rng + ?Sized>(rng: &mut R) -> CoinOperator {
    let a: f64 = rng.sample(StandardNormal);
    let off = gaussian(rng);
    CoinOperator::new([
        [C64::new(0.5 + a, 0.0), off],
        [off.conj(), C64::new(0.5 - a, 0.0)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn samples_are_physical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert!((pure_state(&mut rng).norm_sqr() - 1.0).abs() < 1e-14);
            assert!(haar_unitary(&mut rng).is_unitary(1e-14));
            let rho = density_matrix(&mut rng);
            assert!(rho.is_psd(1e-14));
            assert!((rho.trace().re - 1.0).abs() < 1e-14);
            let h = hermitian_unit_trace(&mut rng);
            assert!(h.is_hermitian(0.0));
        }
    }
}
