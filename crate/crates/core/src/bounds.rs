//! Optimal sampling costs and bounds for the supported noise models.
//!
//! Depolarizing and dephasing noise have tight closed forms. Amplitude damping
//! has a gap between a witness lower bound and an explicit decomposition. For
//! a general `E = (1−ε)id + ε₊Λ − ε₋Ξ` the upper bound comes from the
//! coin-flip decomposition of the Neumann series and the lower bound from the
//! exact inverse.

use serde::Serialize;

use crate::channel::{choi, inverse, max_entangled, Channel, Superoperator};
use crate::decomposer::QuasiDecomposition;
use crate::error::{Error, Result};
use crate::gates;
use crate::matrix::ComplexMatrix;
use crate::noise::{make_noise, unit_axis, GeneralNoise, NoiseSpec};
use crate::witness::{systematic_witness, Witness};

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub method_lower: String,
    pub method_upper: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<QuasiDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn check_rate(name: &str, eps: f64, below: f64) -> Result<()> {
    if !(0.0..below).contains(&eps) {
        return Err(Error::InvalidParameter(format!("{name} = {eps} must lie in [0, {below})")));
    }
    Ok(())
}

fn unitary(u: ComplexMatrix, label: &str) -> Channel {
    Channel::unitary(&u, label).expect("unitary gate")
}

/// `D∘U` with weight `1 + (d²−1)ε/(d²(1−ε))` and `D∘Pᵢ∘U` with weight
/// `−ε/(d²(1−ε))` for each non-identity Pauli (or clock-shift) `Pᵢ`, at `U = id`.
pub fn depolarizing_decomposition(d: usize, eps: f64) -> Result<QuasiDecomposition> {
    check_rate("eps", eps, 1.0)?;
    let noise = make_noise(&NoiseSpec::Depolarizing { d, eps })?;
    let dd = (d * d) as f64;
    let mut terms = Vec::with_capacity(d * d);
    for (k, (label, w)) in gates::operator_basis(d).into_iter().enumerate() {
        let eta = if k == 0 { 1.0 + (dd - 1.0) * eps / (dd * (1.0 - eps)) } else { -eps / (dd * (1.0 - eps)) };
        terms.push((eta, noise.compose(&unitary(w, &label))?));
    }
    QuasiDecomposition::new(terms)
}

fn two_term(noise: Channel, flip: Channel, eps: f64) -> Result<QuasiDecomposition> {
    QuasiDecomposition::new(vec![
        ((1.0 - eps) / (1.0 - 2.0 * eps), noise.clone()),
        (-eps / (1.0 - 2.0 * eps), noise.compose(&flip)?),
    ])
}

/// `(1−ε)/(1−2ε)·F − ε/(1−2ε)·F∘N` where `N` conjugates by `n̂·σ`, at `U = id`.
pub fn rotation_dephasing_decomposition(axis: [f64; 3], eps: f64) -> Result<QuasiDecomposition> {
    check_rate("eps", eps, 0.5)?;
    let noise = make_noise(&NoiseSpec::GeneralizedDephasing { axis, eps })?;
    two_term(noise, unitary(gates::pauli_axis(unit_axis(axis)?), "n.sigma"), eps)
}

/// [`rotation_dephasing_decomposition`] about `z`, built on the dephasing channel.
pub fn dephasing_decomposition(eps: f64) -> Result<QuasiDecomposition> {
    check_rate("eps", eps, 0.5)?;
    two_term(make_noise(&NoiseSpec::Dephasing { eps })?, unitary(gates::z(), "Z"), eps)
}

/// Three-term decomposition of the identity under amplitude damping:
/// `A∘id`, `A∘Z` and `A∘P_{|0⟩}`.
pub fn amplitude_damping_decomposition(eps: f64) -> Result<QuasiDecomposition> {
    check_rate("eps", eps, 1.0)?;
    let noise = make_noise(&NoiseSpec::AmplitudeDamping { eps })?;
    let s = (1.0 - eps).sqrt();
    let z = unitary(gates::z(), "Z");
    let p0 = Channel::preparation(&gates::ket0(), "P|0>")?;
    QuasiDecomposition::new(vec![
        ((1.0 + s) / (2.0 * (1.0 - eps)), noise.clone()),
        ((1.0 - s) / (2.0 * (1.0 - eps)), noise.compose(&z)?),
        (-eps / (1.0 - eps), noise.compose(&p0)?),
    ])
}

/// Tight cost `(1 + (1 − 2/d²)ε)/(1−ε)` for depolarizing noise.
pub fn gamma_depolarizing(d: usize, eps: f64) -> Result<BoundsReport> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    check_rate("eps", eps, 1.0)?;
    let dd = (d * d) as f64;
    let gamma = (1.0 + (1.0 - 2.0 / dd) * eps) / (1.0 - eps);
    let noise = make_noise(&NoiseSpec::Depolarizing { d, eps })?;
    Ok(BoundsReport {
        lower: gamma,
        upper: gamma,
        method_lower: "systematic-witness".into(),
        method_upper: "pauli-twirl-decomposition".into(),
        decomposition: Some(depolarizing_decomposition(d, eps)?),
        witness: Some(systematic_witness(&noise, &Channel::identity(d))?),
    })
}

/// Tight cost `1/(1−2ε)` for dephasing noise.
pub fn gamma_dephasing(eps: f64) -> Result<BoundsReport> {
    check_rate("eps", eps, 0.5)?;
    let gamma = 1.0 / (1.0 - 2.0 * eps);
    let noise = make_noise(&NoiseSpec::Dephasing { eps })?;
    Ok(BoundsReport {
        lower: gamma,
        upper: gamma,
        method_lower: "systematic-witness".into(),
        method_upper: "two-term-decomposition".into(),
        decomposition: Some(dephasing_decomposition(eps)?),
        witness: Some(systematic_witness(&noise, &Channel::identity(2))?),
    })
}

/// `(√(1−ε) + ε/2)/(1−ε) ≤ γ ≤ (1+ε)/(1−ε)` for amplitude damping.
pub fn gamma_amplitude_damping(eps: f64) -> Result<BoundsReport> {
    check_rate("eps", eps, 1.0)?;
    let noise = make_noise(&NoiseSpec::AmplitudeDamping { eps })?;
    Ok(BoundsReport {
        lower: ((1.0 - eps).sqrt() + eps / 2.0) / (1.0 - eps),
        upper: (1.0 + eps) / (1.0 - eps),
        method_lower: "systematic-witness".into(),
        method_upper: "three-term-decomposition".into(),
        decomposition: Some(amplitude_damping_decomposition(eps)?),
        witness: Some(systematic_witness(&noise, &Channel::identity(2))?),
    })
}

/// `2·Tr[Φ_d (id⊗E⁻¹)(Φ_d)] − 1` through the exact superoperator inverse.
pub fn inverse_overlap_bound(noise: &Channel) -> Result<f64> {
    let d = noise.dim();
    let phi = max_entangled(d)?;
    // (id⊗E⁻¹)(Φ_d) = J_{E⁻¹}/d
    let j = choi(&inverse(noise)?).scale_real(1.0 / d as f64);
    Ok(2.0 * (&phi * &j).trace().re - 1.0)
}

/// Bounds for `E = (1−ε)id + ε₊Λ − ε₋Ξ`: upper `1/(1−2ε₊)`, lower from the
/// exact inverse.
///
/// The bounds describe this particular representation; other splittings of
/// the same channel can give different numbers.
pub fn gamma_general(noise: &GeneralNoise) -> Result<BoundsReport> {
    let channel = noise.channel()?;
    noise.check_hypothesis()?;
    Ok(BoundsReport {
        lower: inverse_overlap_bound(&channel)?,
        upper: 1.0 / (1.0 - 2.0 * noise.eps_plus),
        method_lower: "exact-inverse".into(),
        method_upper: "neumann-series-sampling".into(),
        decomposition: None,
        witness: None,
    })
}

/// Dispatches to the matching bound for a spec.
///
/// Generalized dephasing goes through [`gamma_general`] and carries the
/// two-term rotation decomposition, which attains the upper bound.
pub fn bounds_for(spec: &NoiseSpec) -> Result<BoundsReport> {
    match spec {
        NoiseSpec::Depolarizing { d, eps } => gamma_depolarizing(*d, *eps),
        NoiseSpec::Dephasing { eps } => gamma_dephasing(*eps),
        NoiseSpec::AmplitudeDamping { eps } => gamma_amplitude_damping(*eps),
        NoiseSpec::GeneralizedDephasing { axis, eps } => {
            check_rate("eps", *eps, 0.5)?;
            let mut report = gamma_general(&spec.to_general()?)?;
            report.decomposition = Some(rotation_dephasing_decomposition(*axis, *eps)?);
            report.method_upper = "two-term-decomposition".into();
            Ok(report)
        }
        NoiseSpec::General(g) => gamma_general(g),
    }
}

/// The explicit decomposition of the identity for a named model, if one is known.
pub fn closed_form_decomposition(spec: &NoiseSpec) -> Result<QuasiDecomposition> {
    match spec {
        NoiseSpec::Depolarizing { d, eps } => depolarizing_decomposition(*d, *eps),
        NoiseSpec::Dephasing { eps } => dephasing_decomposition(*eps),
        NoiseSpec::GeneralizedDephasing { axis, eps } => rotation_dephasing_decomposition(*axis, *eps),
        NoiseSpec::AmplitudeDamping { eps } => amplitude_damping_decomposition(*eps),
        NoiseSpec::General(_) => {
            Err(Error::InvalidSpec("no finite decomposition for a general spec; use the series sampler".into()))
        }
    }
}

/// `⌈2γ²/δ² · ln(2/ε)⌉` samples bound the estimator error by `δ` with
/// probability at least `1 − ε`.
pub fn hoeffding_samples(gamma_tot: f64, delta: f64, fail_prob: f64) -> Result<u64> {
    if !(gamma_tot > 0.0 && delta > 0.0 && fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need gamma > 0, delta > 0, 0 < fail_prob < 1; got ({gamma_tot}, {delta}, {fail_prob})"
        )));
    }
    let x = 2.0 * gamma_tot * gamma_tot / (delta * delta) * (2.0 / fail_prob).ln();
    // Values that are integers up to rounding error must not be bumped up by ceil.
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
    if n > u64::MAX as f64 {
        return Err(Error::ResourceLimit(format!("{x:e} samples")));
    }
    Ok(n as u64)
}
