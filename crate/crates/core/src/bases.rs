//! Fixed universal operation sets for one and two qubits.
//!
//! Elements are stored as channels, so global phases of the defining gates
//! do not matter. Element order is fixed and coefficient vectors returned by
//! the decomposer follow it.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::channel::{choi, tensor, Channel, Superoperator};
use crate::error::{Error, Result};
use crate::gates::{self, ch, ch_x, cs, cx, h, k, on_first, proj0, s, x, y, z};
use crate::matrix::{ComplexMatrix, C64};

/// Relative singular-value threshold for [`rank_of`].
pub const RANK_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct BasisSet {
    pub name: String,
    pub dim: usize,
    pub elements: Vec<Channel>,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.elements.iter().map(|e| e.label()).collect()
    }

    /// Every element preceded by `noise`, i.e. `noise ∘ B_i`.
    pub fn noisy(&self, noise: &Channel) -> Result<Vec<Channel>> {
        self.elements.iter().map(|b| noise.compose(b)).collect()
    }

    pub fn by_name(name: &str) -> Result<BasisSet> {
        match name {
            "b16" => Ok(basis_b16()),
            "b13" => Ok(basis_b13()),
            "tq241" => Ok(basis_two_qubit_241()),
            other => Err(Error::InvalidInput(format!("unknown basis '{other}' (expected b16, b13 or tq241)"))),
        }
    }
}

fn kraus1(m: ComplexMatrix, label: &str) -> Channel {
    Channel::from_kraus(vec![m], label).expect("square Kraus operator")
}

/// The ten unitary conjugations shared by both single-qubit sets.
fn clifford_ten() -> Vec<Channel> {
    let kk = k();
    let kd = kk.dagger();
    let sd = s().dagger();
    vec![
        kraus1(gates::identity(2), "id"),
        kraus1(x(), "X"),
        kraus1(y(), "Y"),
        kraus1(z(), "Z"),
        kraus1(&kd * &sd * &kk, "K†S†K"),
        kraus1(&kk * &sd * &kd, "KS†K†"),
        kraus1(sd.clone(), "S†"),
        kraus1(&kk * &h() * &kd, "KHK†"),
        kraus1(h(), "H"),
        kraus1(&kd * &h() * &kk, "K†HK"),
    ]
}

/// Sixteen Clifford conjugations and `|0⟩` projections. The last six are
/// trace nonincreasing.
pub fn basis_b16() -> BasisSet {
    let kk = k();
    let kd = kk.dagger();
    let p = proj0();
    let px = &p * &x();
    let mut elements = clifford_ten();
    elements.extend([
        kraus1(&kd * &p * &kk, "K†πzK"),
        kraus1(&kk * &p * &kd, "KπzK†"),
        kraus1(p.clone(), "πz"),
        kraus1(&kd * &px * &kk, "K†πzXK"),
        kraus1(&kk * &px * &kd, "KπzXK†"),
        kraus1(px, "πzX"),
    ]);
    BasisSet { name: "b16".into(), dim: 2, elements }
}

/// Thirteen CPTP maps: ten unitaries plus preparations of `|+⟩`, `|+y⟩`, `|0⟩`.
pub fn basis_b13() -> BasisSet {
    let mut elements = clifford_ten();
    for (psi, label) in [(gates::ket_plus(), "P|+>"), (gates::ket_plus_y(), "P|+y>"), (gates::ket0(), "P|0>")] {
        elements.push(Channel::preparation(&psi, label).expect("valid state"));
    }
    BasisSet { name: "b13".into(), dim: 2, elements }
}

/// `V†UV` for each listed `V = V₁ ⊗ V₂`.
fn conjugations(
    u: &ComplexMatrix,
    name: &str,
    firsts: &[(&ComplexMatrix, &str)],
    seconds: &[(&ComplexMatrix, &str)],
) -> Vec<Channel> {
    let mut out = Vec::new();
    for (v1, n1) in firsts {
        for (v2, n2) in seconds {
            let v = v1.kron(v2);
            let label = if (*n1, *n2) == ("I", "I") { name.to_string() } else { format!("{name}[{n1}{n2}]") };
            out.push(kraus1(&v.dagger() * u * &v, &label));
        }
    }
    out
}

/// Two-qubit set of 241 CPTP maps: all products of [`basis_b13`] pairs and
/// 72 entangling unitaries dressed by single-qubit `K` conjugations.
///
/// The nine-member families conjugate by `V₁ ⊗ V₂` with `V₁, V₂ ∈ {I, K, K†}`.
/// SWAP uses `V₁ = I`, `V₂ ∈ {I, K, K†}`; iSWAP uses `V₁ ∈ {I, K}`,
/// `V₂ ∈ {I, K, K†}`.
pub fn basis_two_qubit_241() -> BasisSet {
    let single = basis_b13();
    let mut elements = Vec::with_capacity(241);
    for a in &single.elements {
        for b in &single.elements {
            elements.push(tensor(a, b));
        }
    }

    let id = gates::identity(2);
    let kk = k();
    let kd = kk.dagger();
    let three = [(&id, "I"), (&kk, "K"), (&kd, "K†")];
    let x1 = on_first(&x());
    let h1 = on_first(&h());
    let sw = gates::swap();

    let families: [(ComplexMatrix, &str); 6] = [
        (cx(), "CX"),
        (&x1 * &cx() * &x1, "X1·CX·X1"),
        (cs(), "CS"),
        (ch(), "CH"),
        (ch_x(), "CHX"),
        (&cx() * &h1, "CX·H1"),
    ];
    for (u, name) in &families {
        elements.extend(conjugations(u, name, &three, &three));
    }
    elements.extend(conjugations(&sw, "SW", &three[..1], &three));
    elements.extend(conjugations(&gates::iswap(), "iSW", &three[..2], &three));
    elements.extend(conjugations(&(&sw * &h1), "SW·H1", &three, &three));
    debug_assert_eq!(elements.len(), 241);
    BasisSet { name: "tq241".into(), dim: 4, elements }
}

/// Numerical rank of the maps' vectorized Choi matrices.
pub fn rank_of<S: Superoperator>(maps: &[S]) -> Result<usize> {
    let first = maps.first().ok_or_else(|| Error::InvalidInput("rank of an empty set".into()))?;
    let d = first.dim();
    let n = d * d * d * d;
    let mut rows = DMatrix::<C64>::zeros(maps.len(), n);
    for (r, m) in maps.iter().enumerate() {
        if m.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
        }
        let v = choi(m).vec();
        rows.row_mut(r).copy_from(&v.transpose());
    }
    let sv = ComplexMatrix::new(rows).singular_values();
    let max = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s > RANK_RTOL * max).count())
}
