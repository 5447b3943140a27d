//! Quasiprobability decompositions for probabilistic error cancellation.
//!
//! Channels are stored as superoperators acting on column-stacked density
//! matrices; `a.compose(&b)` applies `b` first.
//!
//! ```
//! use qpec_core::bases::basis_b13;
//! use qpec_core::bounds::{bounds_for, closed_form_decomposition};
//! use qpec_core::decomposer::decompose_l1;
//! use qpec_core::pec::{decompositions_from_identity, run_pec, Circuit, PecOptions};
//! use qpec_core::{gates, make_noise, Channel, ComplexMatrix, NoiseSpec};
//!
//! let spec = NoiseSpec::Dephasing { eps: 0.1 };
//! let report = bounds_for(&spec)?;
//! assert!((report.upper - 1.25).abs() < 1e-12);
//!
//! let noise = make_noise(&spec)?;
//! let ops = basis_b13().noisy(&noise)?;
//! let dec = decompose_l1(&Channel::identity(2), &ops)?;
//! assert!((dec.gamma() - 1.25).abs() < 1e-8);
//!
//! let circuit = Circuit::new(ComplexMatrix::projector(&gates::ket0()), vec![gates::h()], gates::x())?;
//! let decs = decompositions_from_identity(&circuit, &closed_form_decomposition(&spec)?)?;
//! let r = run_pec(&circuit, &decs, &PecOptions::new(100_000, 1))?;
//! assert!((r.estimate - 1.0).abs() < 5.0 * r.std_error);
//! # Ok::<(), qpec_core::Error>(())
//! ```

pub mod bases;
pub mod bounds;
pub mod channel;
pub mod decomposer;
pub mod error;
pub mod gates;
pub mod lp;
pub mod matrix;
pub mod noise;
pub mod pec;
pub mod random;
pub mod series;
pub mod witness;

pub use channel::{Channel, LinearMap, Superoperator};
pub use error::{Error, ErrorClass, Result};
pub use matrix::{ComplexMatrix, C64};
pub use noise::{make_noise, GeneralNoise, NoiseSpec};
