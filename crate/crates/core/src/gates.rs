//! Gate and state matrices in the computational basis.
//!
//! Two-qubit matrices order the tensor factors as (qubit 1, qubit 2), so
//! `|01⟩` means qubit 1 in `|0⟩` and qubit 2 in `|1⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::matrix::{re, ComplexMatrix, C64, I, ONE, ZERO};

fn m2(a: C64, b: C64, c: C64, d: C64) -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, 2, &[a, b, c, d]).expect("2x2")
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d)
}

pub fn x() -> ComplexMatrix {
    m2(ZERO, ONE, ONE, ZERO)
}

pub fn y() -> ComplexMatrix {
    m2(ZERO, -I, I, ZERO)
}

pub fn z() -> ComplexMatrix {
    m2(ONE, ZERO, ZERO, -ONE)
}

pub fn h() -> ComplexMatrix {
    let s = re(FRAC_1_SQRT_2);
    m2(s, s, s, -s)
}

/// Phase gate `diag(1, i)`.
pub fn s() -> ComplexMatrix {
    m2(ONE, ZERO, ZERO, I)
}

pub fn t() -> ComplexMatrix {
    m2(ONE, ZERO, ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4))
}

/// `K = S·H`, which cycles `K†XK = Y`, `K†YK = Z`, `K†ZK = X`.
pub fn k() -> ComplexMatrix {
    s() * h()
}

/// `n̂·σ̂` for a unit axis.
pub fn pauli_axis(n: [f64; 3]) -> ComplexMatrix {
    x().scale_real(n[0]) + y().scale_real(n[1]) + z().scale_real(n[2])
}

/// Single-qubit Paulis `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    [identity(2), x(), y(), z()]
}

/// Unitary orthogonal operator basis of dimension `d`, identity first.
///
/// For `d = 2^k` these are the Pauli strings (qubit 1 most significant);
/// otherwise the clock-and-shift operators `X^a Z^b`.
pub fn operator_basis(d: usize) -> Vec<(String, ComplexMatrix)> {
    if d.is_power_of_two() && d >= 2 {
        let n = d.trailing_zeros() as usize;
        let names = ["I", "X", "Y", "Z"];
        let ps = paulis();
        (0..d * d)
            .map(|mut idx| {
                let mut digits = vec![0usize; n];
                for q in (0..n).rev() {
                    digits[q] = idx % 4;
                    idx /= 4;
                }
                let label: String = digits.iter().map(|&p| names[p]).collect();
                let m = digits.iter().skip(1).fold(ps[digits[0]].clone(), |acc, &p| acc.kron(&ps[p]));
                (label, m)
            })
            .collect()
    } else {
        let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
        let mut shift = ComplexMatrix::zeros(d, d).into_inner();
        let mut clock = ComplexMatrix::zeros(d, d).into_inner();
        for i in 0..d {
            shift[((i + 1) % d, i)] = ONE;
            clock[(i, i)] = omega.powu(i as u32);
        }
        let shift = ComplexMatrix::new(shift);
        let clock = ComplexMatrix::new(clock);
        let mut out = Vec::with_capacity(d * d);
        let mut xa = identity(d);
        for a in 0..d {
            let mut zb = identity(d);
            for b in 0..d {
                out.push((format!("X^{a}Z^{b}"), &xa * &zb));
                zb = &zb * &clock;
            }
            xa = &xa * &shift;
        }
        out
    }
}

pub fn ket0() -> Vec<C64> {
    vec![ONE, ZERO]
}

pub fn ket1() -> Vec<C64> {
    vec![ZERO, ONE]
}

pub fn ket_plus() -> Vec<C64> {
    vec![re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]
}

/// `(|0⟩ + i|1⟩)/√2`, the +1 eigenstate of Y.
pub fn ket_plus_y() -> Vec<C64> {
    vec![re(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2)]
}

/// `|0⟩⟨0|`, the rank-one projection used by the trace-nonincreasing basis maps.
pub fn proj0() -> ComplexMatrix {
    ComplexMatrix::projector(&ket0())
}

pub fn on_first(u: &ComplexMatrix) -> ComplexMatrix {
    u.kron(&identity(2))
}

pub fn on_second(u: &ComplexMatrix) -> ComplexMatrix {
    identity(2).kron(u)
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`.
pub fn controlled(u: &ComplexMatrix) -> ComplexMatrix {
    let p0 = proj0();
    let p1 = ComplexMatrix::projector(&ket1());
    p0.kron(&identity(2)) + p1.kron(u)
}

pub fn cx() -> ComplexMatrix {
    controlled(&x())
}

/// Controlled phase gate, `controlled(S)`.
pub fn cs() -> ComplexMatrix {
    controlled(&s())
}

pub fn ch() -> ComplexMatrix {
    controlled(&h())
}

/// NOT on qubit 2 controlled by the ±1 eigenstates of H on qubit 1.
pub fn ch_x() -> ComplexMatrix {
    // H = P₊ − P₋ with P± = (I ± H)/2.
    let plus = (identity(2) + h()).scale_real(0.5);
    let minus = (identity(2) - h()).scale_real(0.5);
    plus.kron(&identity(2)) + minus.kron(&x())
}

pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
    .expect("4x4")
}

/// `|00⟩⟨00| + i|10⟩⟨01| + i|01⟩⟨10| + |11⟩⟨11|`.
pub fn iswap() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4).into_inner();
    m[(0, 0)] = ONE;
    m[(2, 1)] = I;
    m[(1, 2)] = I;
    m[(3, 3)] = ONE;
    ComplexMatrix::new(m)
}
