//! Quasiprobability decompositions `target = Σ ηᵢ·Oᵢ` over implementable operations.

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::channel::{Channel, LinearMap, Superoperator};
use crate::error::{Error, Result};
use crate::lp::{self, SPAN_TOL};
use crate::matrix::re;

/// Relative singular-value threshold used to decide that a basis is independent.
pub const EXACT_RANK_RTOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Term {
    pub eta: f64,
    pub op: Channel,
}

#[derive(Clone, Debug)]
pub struct QuasiDecomposition {
    terms: Vec<Term>,
    gamma: f64,
}

impl QuasiDecomposition {
    pub fn new(terms: Vec<(f64, Channel)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidDecomposition("no terms".into()))?;
        let d = first.1.dim();
        if let Some((_, bad)) = terms.iter().find(|(_, op)| op.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
        }
        let gamma = terms.iter().map(|(eta, _)| eta.abs()).sum();
        Ok(Self { terms: terms.into_iter().map(|(eta, op)| Term { eta, op }).collect(), gamma })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `γ = Σ|ηᵢ|`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.terms[0].op.dim()
    }

    /// Total weight on negative coefficients; `γ = 2s + 1` when `Σηᵢ = 1`.
    pub fn negative_weight(&self) -> f64 {
        self.terms.iter().filter(|t| t.eta < 0.0).map(|t| -t.eta).sum()
    }

    pub fn eta_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.eta).sum()
    }

    pub fn etas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.eta).collect()
    }

    /// `Σ ηᵢ·Oᵢ` as a linear map.
    pub fn reconstruct(&self) -> LinearMap {
        let parts: Vec<(f64, &Channel)> = self.terms.iter().map(|t| (t.eta, &t.op)).collect();
        LinearMap::linear_combination(&parts, "reconstruction").expect("uniform dimension")
    }

    /// Drops terms whose coefficient is exactly zero.
    pub fn without_zeros(&self) -> Self {
        let terms: Vec<Term> = self.terms.iter().filter(|t| t.eta != 0.0).cloned().collect();
        if terms.is_empty() {
            return self.clone();
        }
        Self { terms, gamma: self.gamma }
    }

    /// Same coefficients with each operation replaced by `f(op)`.
    pub fn map_ops(&self, f: impl Fn(&Channel) -> Result<Channel>) -> Result<Self> {
        let terms = self.terms.iter().map(|t| Ok((t.eta, f(&t.op)?))).collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }
}

impl Serialize for QuasiDecomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct TermOut<'a> {
            eta: f64,
            label: &'a str,
        }
        let terms: Vec<TermOut> = self.terms.iter().map(|t| TermOut { eta: t.eta, label: t.op.label() }).collect();
        let mut st = s.serialize_struct("QuasiDecomposition", 2)?;
        st.serialize_field("gamma", &self.gamma)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// Real constraint matrix: one column per operation, holding the real then
/// imaginary parts of its vectorized superoperator.
fn stacked<S: Superoperator + ?Sized>(m: &S) -> DVector<f64> {
    let v = m.superop().as_slice();
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

fn constraint_system<T: Superoperator + ?Sized>(target: &T, ops: &[Channel]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if ops.is_empty() {
        return Err(Error::InvalidInput("no operations to decompose over".into()));
    }
    let d = target.dim();
    let cols: Vec<DVector<f64>> = ops
        .iter()
        .map(|op| {
            if op.dim() != d {
                Err(Error::DimensionMismatch { expected: d, found: op.dim() })
            } else {
                Ok(stacked(op))
            }
        })
        .collect::<Result<_>>()?;
    Ok((DMatrix::from_columns(&cols), stacked(target)))
}

/// The unique decomposition over a linearly independent set.
pub fn decompose_exact<T: Superoperator + ?Sized>(target: &T, basis: &[Channel]) -> Result<QuasiDecomposition> {
    let (a, b) = constraint_system(target, basis)?;
    let n = a.ncols();
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > EXACT_RANK_RTOL * smax).count();
    if rank < n {
        return Err(Error::RankDeficientBasis { rank, expected: n });
    }
    // Singular values decide the rank; the solve goes through QR because the
    // singular vectors are not reliable for every input.
    let qr = a.clone().qr();
    let eta = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * &b))
        .ok_or_else(|| Error::SolverFailure("triangular factor is singular".into()))?;
    let residual = (&a * &eta - &b).amax();
    if residual > SPAN_TOL {
        return Err(Error::TargetOutsideSpan { residual });
    }
    QuasiDecomposition::new(eta.iter().zip(basis).map(|(&e, op)| (e, op.clone())).collect())
}

/// The minimum-`γ` decomposition over a possibly overcomplete set.
pub fn decompose_l1<T: Superoperator + ?Sized>(target: &T, candidates: &[Channel]) -> Result<QuasiDecomposition> {
    let (a, b) = constraint_system(target, candidates)?;
    let eta = lp::min_l1(&a, &b)?;
    QuasiDecomposition::new(eta.into_iter().zip(candidates).map(|(e, op)| (e, op.clone())).collect())
}

/// `‖Σ ηᵢ·S(Oᵢ) − S(target)‖_max`.
pub fn validate<T: Superoperator + ?Sized>(dec: &QuasiDecomposition, target: &T) -> f64 {
    if dec.dim() != target.dim() {
        return f64::INFINITY;
    }
    let mut acc = target.superop().as_dmatrix().clone();
    for t in dec.terms() {
        acc -= t.op.superop().as_dmatrix() * re(t.eta);
    }
    acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
