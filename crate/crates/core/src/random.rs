//! Random matrices, states and channels for tests and witness checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::matrix::{ComplexMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn random_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::new(DMatrix::from_fn(d, d, |_, _| gaussian(rng)))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, rng).into_inner();
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::new(q)
}

/// Uniformly random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Full-rank random density matrix `GG†/Tr[GG†]`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, rng);
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

/// Random CPTP channel with `n_kraus` Kraus operators, cut from a Haar
/// isometry `d → d·n_kraus`.
pub fn random_channel<R: Rng + ?Sized>(d: usize, n_kraus: usize, rng: &mut R) -> Channel {
    let u = haar_unitary(d * n_kraus, rng);
    let kraus = (0..n_kraus).map(|k| ComplexMatrix::new(u.view((k * d, 0), (d, d)).into_owned())).collect();
    Channel::from_kraus(kraus, "random").expect("square blocks")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{is_cptp, CPTP_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in [2, 3, 4] {
            assert!(haar_unitary(d, &mut rng).is_unitary(1e-12));
        }
    }

    #[test]
    fn haar_first_entry_has_uniform_weight() {
        // |U₀₀|² is Beta(1, d−1) under Haar measure, mean 1/d.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20_000;
        let mean = (0..n).map(|_| haar_unitary(2, &mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
        // Var = 1/12 for the uniform distribution on [0, 1].
        assert!((mean - 0.5).abs() < 5.0 * (1.0 / 12.0 / n as f64).sqrt());
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            assert!(is_cptp(&random_channel(2, n, &mut rng), CPTP_TOL).is_cptp());
        }
        let rho = random_density(3, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.eigvalsh()[0] > 0.0);
    }
}
