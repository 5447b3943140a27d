//! Linear maps on `d×d` operators and their Kraus, Choi and superoperator forms.
//!
//! Conventions:
//!
//! * Vectorization stacks columns, so `vec(AXB†) = (conj(B) ⊗ A)·vec(X)` and a
//!   Kraus map `ρ ↦ Σ KρK†` has superoperator `Σ conj(K) ⊗ K`.
//! * The Choi matrix is `J = (id ⊗ Λ)(d·Φ_d) = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, input
//!   factor first. `Tr_B` traces the output factor.
//! * `a ∘ b` applies `b` first.

use std::fmt;

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{re, ComplexMatrix, C64, ONE, ZERO};

/// Tolerance for the CP and TP checks.
pub const CPTP_TOL: f64 = 1e-10;
/// A superoperator is treated as singular when `σ_min ≤ SINGULAR_RTOL·σ_max`.
pub const SINGULAR_RTOL: f64 = 1e-12;
/// Choi eigenvalues at or below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-12;

/// Anything with a `d²×d²` superoperator.
pub trait Superoperator {
    fn dim(&self) -> usize;
    fn superop(&self) -> &ComplexMatrix;
    fn label(&self) -> &str;
}

/// A linear map with no positivity or trace claims.
#[derive(Clone)]
pub struct LinearMap {
    dim: usize,
    superop: ComplexMatrix,
    label: String,
}

/// A completely positive map, optionally carrying a Kraus representation.
///
/// Trace preservation is not assumed: the projections in the
/// sixteen-element basis are trace nonincreasing. Use [`is_cptp`] to check.
#[derive(Clone)]
pub struct Channel {
    dim: usize,
    superop: ComplexMatrix,
    kraus: Option<Vec<ComplexMatrix>>,
    label: String,
}

impl Superoperator for LinearMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }
    fn label(&self) -> &str {
        &self.label
    }
}

impl Superoperator for Channel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn superop(&self) -> &ComplexMatrix {
        &self.superop
    }
    fn label(&self) -> &str {
        &self.label
    }
}

fn check_superop_shape(dim: usize, superop: &ComplexMatrix) -> Result<()> {
    if dim < 1 {
        return Err(Error::InvalidDimension(dim));
    }
    let n = dim * dim;
    if superop.rows() != n || superop.cols() != n {
        return Err(Error::InvalidInput(format!(
            "superoperator for d={dim} must be {n}x{n}, got {}x{}",
            superop.rows(),
            superop.cols()
        )));
    }
    Ok(())
}

fn dim_from_superop(superop: &ComplexMatrix) -> Result<usize> {
    let n = superop.rows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(Error::InvalidInput(format!("{n} is not a square dimension")));
    }
    Ok(d)
}

impl LinearMap {
    pub fn new(dim: usize, superop: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        check_superop_shape(dim, &superop)?;
        Ok(Self { dim, superop, label: label.into() })
    }

    pub fn from_superop(superop: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = dim_from_superop(&superop)?;
        Self::new(dim, superop, label)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, superop: ComplexMatrix::identity(dim * dim), label: "id".into() }
    }

    /// `Σ cᵢ·Λᵢ` over maps of a common dimension.
    pub fn linear_combination<S: Superoperator + ?Sized>(
        terms: &[(f64, &S)],
        label: impl Into<String>,
    ) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidInput("empty linear combination".into()))?;
        let dim = first.1.dim();
        let n = dim * dim;
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for (c, m) in terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
            acc += m.superop().as_dmatrix() * re(*c);
        }
        Self::new(dim, ComplexMatrix::new(acc), label)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl Channel {
    /// Builds a CP map from Kraus operators. See [`channel_from_kraus`].
    pub fn from_kraus(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("no Kraus operators".into()))?;
        let dim = first.rows();
        for k in &kraus {
            if !k.is_square() || k.rows() != dim {
                return Err(Error::InvalidInput(format!(
                    "Kraus operators must be square {dim}x{dim}, got {}x{}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        Ok(Self { dim, superop: kraus_superop(&kraus), kraus: Some(kraus), label: label.into() })
    }

    /// `ρ ↦ UρU†`. Fails when `U` is not unitary within `1e-10`.
    pub fn unitary(u: &ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if !u.is_unitary(1e-10) {
            return Err(Error::InvalidInput("gate matrix is not unitary".into()));
        }
        Self::from_kraus(vec![u.clone()], label)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(vec![ComplexMatrix::identity(dim)], "id").expect("identity")
    }

    /// `ρ ↦ Tr[ρ]·|ψ⟩⟨ψ|`. The state is normalized.
    pub fn preparation(psi: &[C64], label: impl Into<String>) -> Result<Self> {
        let d = psi.len();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if d < 2 || norm == 0.0 {
            return Err(Error::InvalidInput("preparation needs a nonzero state of dimension ≥ 2".into()));
        }
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let kraus = (0..d)
            .map(|k| {
                let mut m = DMatrix::<C64>::zeros(d, d);
                for (a, amp) in psi.iter().enumerate() {
                    m[(a, k)] = *amp;
                }
                ComplexMatrix::new(m)
            })
            .collect();
        Self::from_kraus(kraus, label)
    }

    /// Recovers a CP map from its Choi matrix via eigendecomposition.
    ///
    /// Fails when the Hermitian part has an eigenvalue below `−CPTP_TOL` or the
    /// matrix is not Hermitian within `CPTP_TOL`.
    pub fn from_choi(choi: &ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let d = dim_from_superop(choi)?;
        if !choi.is_hermitian(CPTP_TOL) {
            return Err(Error::InvalidInput("Choi matrix is not Hermitian".into()));
        }
        let (vals, vecs) = choi.eigh();
        let mut kraus = Vec::new();
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda < -CPTP_TOL {
                return Err(Error::InvalidInput(format!("Choi matrix has eigenvalue {lambda:.3e} < 0")));
            }
            if lambda <= KRAUS_CUTOFF {
                continue;
            }
            let amp = lambda.sqrt();
            let mut m = DMatrix::<C64>::zeros(d, d);
            for i in 0..d {
                for a in 0..d {
                    m[(a, i)] = vecs[(i * d + a, k)] * amp;
                }
            }
            kraus.push(ComplexMatrix::new(m));
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(d, d));
        }
        let mut ch = Self::from_kraus(kraus, label)?;
        // Keep the exact superoperator; the Kraus list reproduces it up to the cutoff.
        ch.superop = choi_to_superop(choi, d);
        Ok(ch)
    }

    /// Wraps a superoperator after checking that it is completely positive.
    pub fn from_superop(superop: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let d = dim_from_superop(&superop)?;
        let j = superop_to_choi(&superop, d);
        Self::from_choi(&j, label)
    }

    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn to_linear_map(&self) -> LinearMap {
        LinearMap { dim: self.dim, superop: self.superop.clone(), label: self.label.clone() }
    }

    /// `self ∘ inner`, keeping Kraus products when both sides have them.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: inner.dim });
        }
        let kraus = match (&self.kraus, &inner.kraus) {
            (Some(a), Some(b)) => Some(a.iter().flat_map(|ka| b.iter().map(move |kb| ka * kb)).collect()),
            _ => None,
        };
        Ok(Channel {
            dim: self.dim,
            superop: &self.superop * &inner.superop,
            kraus,
            label: compose_label(&self.label, &inner.label),
        })
    }
}

fn compose_label(a: &str, b: &str) -> String {
    match (a, b) {
        ("id", _) => b.to_string(),
        (_, "id") => a.to_string(),
        _ => format!("{a}∘{b}"),
    }
}

fn kraus_superop(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let d = kraus[0].rows();
    let mut acc = DMatrix::<C64>::zeros(d * d, d * d);
    for k in kraus {
        acc += k.conj().kron(k).into_inner();
    }
    ComplexMatrix::new(acc)
}

/// Reshuffles a superoperator into its Choi matrix.
pub fn superop_to_choi(superop: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let mut j = DMatrix::<C64>::zeros(d * d, d * d);
    for i in 0..d {
        for jj in 0..d {
            for a in 0..d {
                for b in 0..d {
                    j[(i * d + a, jj * d + b)] = superop[(a + d * b, i + d * jj)];
                }
            }
        }
    }
    ComplexMatrix::new(j)
}

/// Inverse of [`superop_to_choi`].
pub fn choi_to_superop(choi: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let mut s = DMatrix::<C64>::zeros(d * d, d * d);
    for i in 0..d {
        for jj in 0..d {
            for a in 0..d {
                for b in 0..d {
                    s[(a + d * b, i + d * jj)] = choi[(i * d + a, jj * d + b)];
                }
            }
        }
    }
    ComplexMatrix::new(s)
}

/// The maximally entangled projector `Φ_d = (1/d) Σ_ij |ii⟩⟨jj|`.
pub fn max_entangled(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    Ok(ComplexMatrix::projector(&v).scale_real(1.0 / d as f64))
}

/// Builds a CP map from Kraus operators; superop = `Σ conj(K)⊗K`.
pub fn channel_from_kraus(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Channel> {
    Channel::from_kraus(kraus, label)
}

/// `J_Λ = (id ⊗ Λ)(d·Φ_d)`.
pub fn choi<S: Superoperator + ?Sized>(map: &S) -> ComplexMatrix {
    superop_to_choi(map.superop(), map.dim())
}

/// `a ∘ b` as a plain linear map.
pub fn compose<A: Superoperator + ?Sized, B: Superoperator + ?Sized>(a: &A, b: &B) -> Result<LinearMap> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(LinearMap { dim: a.dim(), superop: a.superop() * b.superop(), label: compose_label(a.label(), b.label()) })
}

/// Superoperator of `a ⊗ b`, where `a` acts on the first tensor factor.
fn tensor_superop(a: &ComplexMatrix, da: usize, b: &ComplexMatrix, db: usize) -> ComplexMatrix {
    let d = da * db;
    let mut s = DMatrix::<C64>::zeros(d * d, d * d);
    for ia in 0..da {
        for ja in 0..da {
            let col_a = ia + da * ja;
            for ib in 0..db {
                for jb in 0..db {
                    let col_b = ib + db * jb;
                    let col = (ia * db + ib) + d * (ja * db + jb);
                    // Output |pa⟩⟨qa| ⊗ |pb⟩⟨qb| with weights from each column.
                    for pa in 0..da {
                        for qa in 0..da {
                            let wa = a[(pa + da * qa, col_a)];
                            if wa == ZERO {
                                continue;
                            }
                            for pb in 0..db {
                                for qb in 0..db {
                                    let wb = b[(pb + db * qb, col_b)];
                                    let row = (pa * db + pb) + d * (qa * db + qb);
                                    s[(row, col)] += wa * wb;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    ComplexMatrix::new(s)
}

/// `a ⊗ b` on the composite system (a on the first factor).
pub fn tensor(a: &Channel, b: &Channel) -> Channel {
    let kraus = match (&a.kraus, &b.kraus) {
        (Some(ka), Some(kb)) => Some(ka.iter().flat_map(|x| kb.iter().map(move |y| x.kron(y))).collect()),
        _ => None,
    };
    Channel {
        dim: a.dim * b.dim,
        superop: tensor_superop(&a.superop, a.dim, &b.superop, b.dim),
        kraus,
        label: format!("{}⊗{}", a.label, b.label),
    }
}

/// `a ⊗ b` for arbitrary linear maps.
pub fn tensor_maps<A: Superoperator + ?Sized, B: Superoperator + ?Sized>(a: &A, b: &B) -> LinearMap {
    LinearMap {
        dim: a.dim() * b.dim(),
        superop: tensor_superop(a.superop(), a.dim(), b.superop(), b.dim()),
        label: format!("{}⊗{}", a.label(), b.label()),
    }
}

/// `Λ(ρ)`, computed as `unvec(S·vec(ρ))`.
pub fn apply<S: Superoperator + ?Sized>(map: &S, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = map.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.rows().max(rho.cols()) });
    }
    let out = map.superop().as_dmatrix() * rho.vec();
    ComplexMatrix::unvec(&out, d)
}

/// Hilbert–Schmidt adjoint; its superoperator is the conjugate transpose.
pub fn adjoint<S: Superoperator + ?Sized>(map: &S) -> LinearMap {
    LinearMap { dim: map.dim(), superop: map.superop().dagger(), label: format!("({})†", map.label()) }
}

/// Two-sided inverse of a channel's superoperator.
pub fn inverse<S: Superoperator + ?Sized>(ch: &S) -> Result<LinearMap> {
    let sv = ch.superop().singular_values();
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio <= SINGULAR_RTOL {
        return Err(Error::NonInvertibleChannel { ratio });
    }
    let inv = ch.superop().as_dmatrix().clone().try_inverse().ok_or(Error::NonInvertibleChannel { ratio })?;
    Ok(LinearMap { dim: ch.dim(), superop: ComplexMatrix::new(inv), label: format!("({})⁻¹", ch.label()) })
}

/// `Tr_B` over the output factor of a `d²×d²` operator.
pub fn partial_trace_output(m: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let mut out = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = (0..d).map(|a| m[(i * d + a, j * d + a)]).sum();
        }
    }
    ComplexMatrix::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    pub min_choi_eigenvalue: f64,
    pub tp_deviation: f64,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.cp && self.tp
    }
}

/// CP iff `λ_min(J) ≥ −tol`; TP iff `‖Tr_B J − 𝕀‖_max ≤ tol`.
pub fn is_cptp<S: Superoperator + ?Sized>(map: &S, tol: f64) -> CptpReport {
    let d = map.dim();
    let j = choi(map);
    let min_choi_eigenvalue = j.eigvalsh()[0];
    let tp_deviation = partial_trace_output(&j, d).max_abs_diff(&ComplexMatrix::identity(d));
    // A non-Hermitian Choi matrix is not CP regardless of its Hermitian part.
    let cp = min_choi_eigenvalue >= -tol && j.is_hermitian(tol.max(1e-12));
    CptpReport { cp, tp: tp_deviation <= tol, min_choi_eigenvalue, tp_deviation }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearMap({}, d={})", self.label, self.dim)
    }
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nk = self.kraus.as_ref().map(Vec::len);
        write!(f, "Channel({}, d={}, kraus={:?})", self.label, self.dim, nk)
    }
}

#[derive(Serialize, Deserialize)]
struct MapWire {
    dim: usize,
    label: String,
    superop: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kraus: Option<Vec<ComplexMatrix>>,
}

impl Serialize for Channel {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        MapWire { dim: self.dim, label: self.label.clone(), superop: self.superop.clone(), kraus: self.kraus.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MapWire::deserialize(d)?;
        check_superop_shape(w.dim, &w.superop).map_err(D::Error::custom)?;
        match w.kraus {
            Some(k) => {
                let ch = Channel::from_kraus(k, w.label).map_err(D::Error::custom)?;
                if ch.dim != w.dim || ch.superop.max_abs_diff(&w.superop) > CPTP_TOL {
                    return Err(D::Error::custom("Kraus operators disagree with superoperator"));
                }
                Ok(Channel { superop: w.superop, ..ch })
            }
            None => {
                let j = superop_to_choi(&w.superop, w.dim);
                if !j.is_hermitian(CPTP_TOL) || j.eigvalsh()[0] < -CPTP_TOL {
                    return Err(D::Error::custom("superoperator is not completely positive"));
                }
                Ok(Channel { dim: w.dim, superop: w.superop, kraus: None, label: w.label })
            }
        }
    }
}

impl Serialize for LinearMap {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        MapWire { dim: self.dim, label: self.label.clone(), superop: self.superop.clone(), kraus: None }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MapWire::deserialize(d)?;
        LinearMap::new(w.dim, w.superop, w.label).map_err(D::Error::custom)
    }
}
