//! Dual witnesses `Y` with `0 ≤ Tr[Y·J_O] ≤ 1` on implementable operations `O`.
//!
//! A witness certifies the lower bound `γ ≥ 2·Tr[Y·J_U] − 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{adjoint, choi, compose, inverse, Channel, LinearMap, Superoperator};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::random::{haar_unitary, random_pure_state};

/// Slack allowed on either side of `[0, 1]` before a value counts as a violation.
pub const WITNESS_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub y: ComplexMatrix,
    pub construction: String,
}

impl Witness {
    pub fn new(y: ComplexMatrix, construction: impl Into<String>) -> Result<Self> {
        if !y.is_square() {
            return Err(Error::InvalidInput("witness must be square".into()));
        }
        Ok(Self { y, construction: construction.into() })
    }

    /// `Re Tr[Y·J_Λ]`.
    pub fn pairing<S: Superoperator + ?Sized>(&self, map: &S) -> f64 {
        let j = choi(map);
        self.y.as_dmatrix().iter().zip(j.transpose().as_dmatrix().iter()).map(|(a, b)| (a * b).re).sum()
    }
}

/// `Y = d⁻²·J_{(E⁻¹)†∘U}`.
pub fn systematic_witness<U: Superoperator + ?Sized>(noise: &Channel, u: &U) -> Result<Witness> {
    let d = noise.dim();
    let inv_adj = adjoint(&inverse(noise)?);
    let y = choi(&compose(&inv_adj, u)?).scale_real(1.0 / (d * d) as f64);
    Witness::new(y, format!("systematic({})", noise.label()))
}

/// `2·Tr[Y·J_U] − 1`.
pub fn lower_bound_from_witness<U: Superoperator + ?Sized>(w: &Witness, u: &U) -> f64 {
    2.0 * w.pairing(u) - 1.0
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub n_samples: usize,
    pub seed: u64,
    pub min_val: f64,
    pub max_val: f64,
    pub violations: usize,
}

/// Which kind of implementable operation a draw produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawKind {
    Unitary,
    Preparation,
    Mixture,
}

impl DrawKind {
    pub fn of_index(i: usize) -> Self {
        match i % 3 {
            0 => DrawKind::Unitary,
            1 => DrawKind::Preparation,
            _ => DrawKind::Mixture,
        }
    }
}

fn random_op(kind: DrawKind, d: usize, rng: &mut ChaCha8Rng) -> LinearMap {
    match kind {
        DrawKind::Unitary => Channel::unitary(&haar_unitary(d, rng), "haar").expect("unitary").to_linear_map(),
        DrawKind::Preparation => {
            Channel::preparation(&random_pure_state(d, rng), "prep").expect("state").to_linear_map()
        }
        DrawKind::Mixture => {
            let a = random_op(DrawKind::Unitary, d, rng);
            let b = random_op(if rng.random::<bool>() { DrawKind::Unitary } else { DrawKind::Preparation }, d, rng);
            let p: f64 = rng.random();
            LinearMap::linear_combination(&[(p, &a), (1.0 - p, &b)], "mixture").expect("same dimension")
        }
    }
}

/// The `i`-th sampled operation `V` of a witness check. Draw `i` uses its own
/// ChaCha stream, so results do not depend on thread scheduling.
pub fn sample_operation(d: usize, seed: u64, i: usize) -> LinearMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    random_op(DrawKind::of_index(i), d, &mut rng)
}

/// Evaluates `Tr[Y·J_{E∘V}]` over `n_samples` random `V`: Haar unitaries,
/// pure-state preparations and two-term mixtures, in rotation.
///
/// This can falsify a witness but never proves one.
pub fn witness_check(w: &Witness, noise: &Channel, n_samples: usize, seed: u64) -> Result<WitnessReport> {
    let d = noise.dim();
    if w.y.rows() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: w.y.rows() });
    }
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let v = sample_operation(d, seed, i);
            w.pairing(&compose(noise, &v).expect("same dimension"))
        })
        .collect();
    let min_val = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_val = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let violations = values.iter().filter(|&&v| !(-WITNESS_SLACK..=1.0 + WITNESS_SLACK).contains(&v)).count();
    Ok(WitnessReport { n_samples, seed, min_val, max_val, violations })
}
