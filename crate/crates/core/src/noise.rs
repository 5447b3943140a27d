//! Noise models.
//!
//! Besides the named channels, [`GeneralNoise`] describes a channel as
//! `E = (1−ε)·id + ε₊·Λ − ε₋·Ξ` with CPTP `Λ`, `Ξ`. That form drives the
//! series bounds and the coin-flip sampler.

use serde::{Deserialize, Serialize};

use crate::channel::{is_cptp, Channel, LinearMap, Superoperator, CPTP_TOL};
use crate::error::{Error, Result};
use crate::gates;
use crate::matrix::{ComplexMatrix, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `(1−ε)ρ + ε·𝕀/d`.
    Depolarizing {
        d: usize,
        eps: f64,
    },
    /// `(1−ε)ρ + ε·ZρZ`.
    Dephasing {
        eps: f64,
    },
    /// `(1−ε)ρ + ε·(n̂·σ)ρ(n̂·σ)`; the axis is normalized on use.
    GeneralizedDephasing {
        axis: [f64; 3],
        eps: f64,
    },
    AmplitudeDamping {
        eps: f64,
    },
    General(GeneralNoise),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralNoise {
    pub eps: f64,
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub lambda: Channel,
    pub xi: Channel,
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// Normalizes a rotation axis; fails on a zero or non-finite vector.
pub fn unit_axis(axis: [f64; 3]) -> Result<[f64; 3]> {
    let n = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !n.is_finite() || n == 0.0 {
        return Err(Error::InvalidParameter(format!("axis {axis:?} cannot be normalized")));
    }
    Ok(axis.map(|a| a / n))
}

fn mixture(eps: f64, k: ComplexMatrix, label: String) -> Result<Channel> {
    let d = k.rows();
    let kraus = vec![ComplexMatrix::identity(d).scale_real((1.0 - eps).sqrt()), k.scale_real(eps.sqrt())];
    Channel::from_kraus(kraus, label)
}

impl NoiseSpec {
    /// The dominant error rate `ε` of the spec.
    pub fn eps(&self) -> f64 {
        match self {
            NoiseSpec::Depolarizing { eps, .. }
            | NoiseSpec::Dephasing { eps }
            | NoiseSpec::GeneralizedDephasing { eps, .. }
            | NoiseSpec::AmplitudeDamping { eps } => *eps,
            NoiseSpec::General(g) => g.eps,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NoiseSpec::Depolarizing { d, .. } => *d,
            NoiseSpec::General(g) => g.lambda.dim(),
            _ => 2,
        }
    }

    /// Same model with a different rate. Not defined for the general form.
    pub fn with_eps(&self, eps: f64) -> Result<NoiseSpec> {
        Ok(match self {
            NoiseSpec::Depolarizing { d, .. } => NoiseSpec::Depolarizing { d: *d, eps },
            NoiseSpec::Dephasing { .. } => NoiseSpec::Dephasing { eps },
            NoiseSpec::GeneralizedDephasing { axis, .. } => NoiseSpec::GeneralizedDephasing { axis: *axis, eps },
            NoiseSpec::AmplitudeDamping { .. } => NoiseSpec::AmplitudeDamping { eps },
            NoiseSpec::General(_) => {
                return Err(Error::InvalidSpec("a general spec has no single rate to vary".into()))
            }
        })
    }

    /// Rewrites the model as `(1−ε)id + ε₊Λ − ε₋Ξ`.
    ///
    /// Pauli-type channels use `ε₊ = ε`, `ε₋ = 0`, `Ξ = id`. Amplitude damping
    /// uses [`GeneralNoise::amplitude_damping`].
    pub fn to_general(&self) -> Result<GeneralNoise> {
        match self {
            NoiseSpec::Depolarizing { d, eps } => {
                check_unit_interval("eps", *eps)?;
                let full = make_noise(&NoiseSpec::Depolarizing { d: *d, eps: 1.0 })?;
                GeneralNoise::new(*eps, *eps, 0.0, full, Channel::identity(*d))
            }
            NoiseSpec::Dephasing { eps } => GeneralNoise::generalized_dephasing([0.0, 0.0, 1.0], *eps),
            NoiseSpec::GeneralizedDephasing { axis, eps } => GeneralNoise::generalized_dephasing(*axis, *eps),
            NoiseSpec::AmplitudeDamping { eps } => GeneralNoise::amplitude_damping(*eps),
            NoiseSpec::General(g) => Ok(g.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NoiseSpec::Depolarizing { d, eps } => format!("depolarizing(d={d},eps={eps})"),
            NoiseSpec::Dephasing { eps } => format!("dephasing(eps={eps})"),
            NoiseSpec::GeneralizedDephasing { axis, eps } => {
                format!("gdeph(axis=[{},{},{}],eps={eps})", axis[0], axis[1], axis[2])
            }
            NoiseSpec::AmplitudeDamping { eps } => format!("ad(eps={eps})"),
            NoiseSpec::General(g) => {
                format!("general(eps={},eps+={},eps-={})", g.eps, g.eps_plus, g.eps_minus)
            }
        }
    }
}

impl GeneralNoise {
    /// Validates that `Λ`, `Ξ` are CPTP of one dimension and that the
    /// combination is a CPTP channel.
    pub fn new(eps: f64, eps_plus: f64, eps_minus: f64, lambda: Channel, xi: Channel) -> Result<Self> {
        let g = Self { eps, eps_plus, eps_minus, lambda, xi };
        g.channel()?;
        Ok(g)
    }

    /// Amplitude damping with rate `δ` as
    /// `(1−ε)id + δ·P_{|0⟩} − ε₋·Z`, with
    /// `ε = (1+δ−√(1−δ))/2` and `ε₋ = (√(1−δ)−(1−δ))/2`.
    pub fn amplitude_damping(delta: f64) -> Result<Self> {
        check_unit_interval("delta", delta)?;
        let s = (1.0 - delta).sqrt();
        let z = Channel::unitary(&gates::z(), "Z")?;
        let p0 = Channel::preparation(&gates::ket0(), "P|0>")?;
        Self::new((1.0 + delta - s) / 2.0, delta, (s - (1.0 - delta)) / 2.0, p0, z)
    }

    /// Generalized dephasing as `(1−ε)id + ε·(n̂·σ conjugation)`.
    pub fn generalized_dephasing(axis: [f64; 3], eps: f64) -> Result<Self> {
        check_unit_interval("eps", eps)?;
        let n = unit_axis(axis)?;
        let rot = Channel::unitary(&gates::pauli_axis(n), "n.sigma")?;
        Self::new(eps, eps, 0.0, rot, Channel::identity(2))
    }

    /// `(ε₊+ε₋)/(1−ε)`, the ratio of the geometric series.
    pub fn series_ratio(&self) -> f64 {
        (self.eps_plus + self.eps_minus) / (1.0 - self.eps)
    }

    /// `1−ε > ε₊+ε₋`, under which `E⁻¹` has a convergent series.
    pub fn check_hypothesis(&self) -> Result<()> {
        if 1.0 - self.eps > self.eps_plus + self.eps_minus {
            Ok(())
        } else {
            Err(Error::TheoremInapplicable(format!(
                "need 1-eps > eps+ + eps-, got 1-{} <= {} + {}",
                self.eps, self.eps_plus, self.eps_minus
            )))
        }
    }

    /// The channel `(1−ε)id + ε₊Λ − ε₋Ξ`; fails unless it is CPTP.
    pub fn channel(&self) -> Result<Channel> {
        for (name, x) in [("eps", self.eps), ("eps_plus", self.eps_plus), ("eps_minus", self.eps_minus)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidSpec(format!("{name} = {x} is outside [0, 1]")));
            }
        }
        let d = self.lambda.dim();
        if self.xi.dim() != d {
            return Err(Error::InvalidSpec(format!("Λ has dimension {d} but Ξ has {}", self.xi.dim())));
        }
        for (name, ch) in [("Λ", &self.lambda), ("Ξ", &self.xi)] {
            if !is_cptp(ch, CPTP_TOL).is_cptp() {
                return Err(Error::InvalidSpec(format!("{name} is not CPTP")));
            }
        }
        let id = LinearMap::identity(d);
        let lam = self.lambda.to_linear_map();
        let xi = self.xi.to_linear_map();
        let combo = LinearMap::linear_combination(
            &[(1.0 - self.eps, &id), (self.eps_plus, &lam), (-self.eps_minus, &xi)],
            "general",
        )?;
        let report = is_cptp(&combo, CPTP_TOL);
        if !report.tp {
            return Err(Error::InvalidSpec(format!(
                "combination is not trace preserving (deviation {:.3e})",
                report.tp_deviation
            )));
        }
        if !report.cp {
            return Err(Error::InvalidSpec(format!(
                "combination is not completely positive (min Choi eigenvalue {:.3e})",
                report.min_choi_eigenvalue
            )));
        }
        Channel::from_superop(combo.superop().clone(), "general").map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

/// Builds the channel a spec describes.
pub fn make_noise(spec: &NoiseSpec) -> Result<Channel> {
    match spec {
        NoiseSpec::Depolarizing { d, eps } => {
            if *d < 2 {
                return Err(Error::InvalidDimension(*d));
            }
            check_unit_interval("eps", *eps)?;
            let dd = (*d * *d) as f64;
            let mut kraus = Vec::with_capacity(d * d);
            for (k, (_, w)) in gates::operator_basis(*d).into_iter().enumerate() {
                let p = if k == 0 { 1.0 - eps + eps / dd } else { eps / dd };
                kraus.push(w.scale_real(p.sqrt()));
            }
            Channel::from_kraus(kraus, spec.label())
        }
        NoiseSpec::Dephasing { eps } => {
            check_unit_interval("eps", *eps)?;
            mixture(*eps, gates::z(), spec.label())
        }
        NoiseSpec::GeneralizedDephasing { axis, eps } => {
            check_unit_interval("eps", *eps)?;
            mixture(*eps, gates::pauli_axis(unit_axis(*axis)?), spec.label())
        }
        NoiseSpec::AmplitudeDamping { eps } => {
            check_unit_interval("eps", *eps)?;
            let a0 = ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new((1.0 - eps).sqrt(), 0.0)]);
            let a1 = ComplexMatrix::unit(2, 0, 1).scale_real(eps.sqrt());
            Channel::from_kraus(vec![a0, a1], spec.label())
        }
        NoiseSpec::General(g) => Ok(g.channel()?.with_label(spec.label())),
    }
}
