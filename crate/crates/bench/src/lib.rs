//! Fixtures shared by the benchmarks.

use qpec_core::pec::Circuit;
use qpec_core::{gates, ComplexMatrix};

/// `H T H` on `|0⟩`, measuring `X + Z`.
pub fn one_qubit_circuit() -> Circuit {
    Circuit::new(
        ComplexMatrix::projector(&gates::ket0()),
        vec![gates::h(), gates::t(), gates::h()],
        gates::x() + gates::z(),
    )
    .expect("valid circuit")
}

/// CX then T on the control, from `|+0⟩`, measuring `XX + ZZ`.
pub fn two_qubit_circuit() -> Circuit {
    Circuit::new(
        ComplexMatrix::projector(&gates::ket_plus()).kron(&ComplexMatrix::projector(&gates::ket0())),
        vec![gates::cx(), gates::on_first(&gates::t())],
        gates::x().kron(&gates::x()) + gates::z().kron(&gates::z()),
    )
    .expect("valid circuit")
}
