//! Neumann-series expansion of `E⁻¹` for `E = (1−ε)id + ε₊Λ − ε₋Ξ`.
//!
//! `E⁻¹ = Σᵢ (ε₋Ξ − ε₊Λ)ⁱ / (1−ε)^{i+1}`. Expanding the power gives, for each
//! order `i`, the `2ⁱ` compositions of `Λ` and `Ξ`. A pattern is a bit string
//! with bit 1 ↦ `Λ`, bit 0 ↦ `Ξ`, leftmost bit ↦ outermost (last applied) map,
//! so `[0, 1, 1]` is `Ξ∘Λ∘Λ`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::channel::{apply, Channel, Superoperator};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::noise::GeneralNoise;

/// Largest order accepted by the pattern enumeration.
pub const MAX_SERIES_ORDER: usize = 20;

/// `Tr[Φ_d (id⊗M)(Φ_d)] = Tr(S_M)/d²`.
fn phi_overlap(superop: &DMatrix<C64>, d: usize) -> f64 {
    superop.trace().re / (d * d) as f64
}

/// Applies a pattern to a state, innermost (rightmost) map first.
pub fn apply_pattern(lambda: &Channel, xi: &Channel, pattern: &[bool], rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    for &bit in pattern.iter().rev() {
        out = apply(if bit { lambda } else { xi }, &out)?;
    }
    Ok(out)
}

/// Superoperator of a pattern composition.
pub fn pattern_superop(lambda: &Channel, xi: &Channel, pattern: &[bool]) -> ComplexMatrix {
    let d = lambda.dim();
    let mut acc = DMatrix::<C64>::identity(d * d, d * d);
    for &bit in pattern {
        let m = if bit { lambda.superop() } else { xi.superop() };
        acc *= m.as_dmatrix();
    }
    ComplexMatrix::new(acc)
}

/// `t_ij` for all `0 ≤ j ≤ i ≤ i_max`, as `t[i][j]`.
///
/// Patterns are enumerated depth first, each step prepending an outer map, so
/// the cost is one superoperator product per pattern.
pub fn t_coefficients(lambda: &Channel, xi: &Channel, i_max: usize) -> Result<Vec<Vec<f64>>> {
    if i_max > MAX_SERIES_ORDER {
        return Err(Error::ResourceLimit(format!(
            "series order {i_max} exceeds {MAX_SERIES_ORDER} (2^i patterns per order)"
        )));
    }
    let d = lambda.dim();
    if xi.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: xi.dim() });
    }
    let mut t: Vec<Vec<f64>> = (0..=i_max).map(|i| vec![0.0; i + 1]).collect();
    let maps = [xi.superop().as_dmatrix(), lambda.superop().as_dmatrix()];

    fn walk(
        acc: &DMatrix<C64>,
        depth: usize,
        ones: usize,
        i_max: usize,
        d: usize,
        maps: &[&DMatrix<C64>; 2],
        t: &mut [Vec<f64>],
    ) {
        t[depth][ones] += phi_overlap(acc, d);
        if depth == i_max {
            return;
        }
        for (bit, m) in maps.iter().enumerate() {
            let next = *m * acc;
            walk(&next, depth + 1, ones + bit, i_max, d, maps, t);
        }
    }

    walk(&DMatrix::identity(d * d, d * d), 0, 0, i_max, d, &maps, &mut t);
    Ok(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesSum {
    /// `Σ_{i ≤ i_max} Σ_j t_ij (−ε₊)ʲ ε₋^{i−j} / (1−ε)^{i+1}`.
    pub partial_sum: f64,
    /// `2·partial_sum − 1`.
    pub lower_bound: f64,
    /// Bound on `|Σ_{i > i_max} …|` using `|t_ij| ≤ C(i, j)`.
    pub tail_bound: f64,
    pub i_max: usize,
}

/// Truncated series for `Tr[Φ_d (id⊗E⁻¹)(Φ_d)]`.
pub fn t_ij_series(noise: &GeneralNoise, i_max: usize) -> Result<SeriesSum> {
    noise.check_hypothesis()?;
    let t = t_coefficients(&noise.lambda, &noise.xi, i_max)?;
    let (e, ep, em) = (noise.eps, noise.eps_plus, noise.eps_minus);
    let mut sum = 0.0;
    for (i, row) in t.iter().enumerate() {
        let denom = (1.0 - e).powi(i as i32 + 1);
        for (j, tij) in row.iter().enumerate() {
            sum += tij * (-ep).powi(j as i32) * em.powi((i - j) as i32) / denom;
        }
    }
    let r = noise.series_ratio();
    let tail_bound = r.powi(i_max as i32 + 1) / ((1.0 - e) - (ep + em));
    Ok(SeriesSum { partial_sum: sum, lower_bound: 2.0 * sum - 1.0, tail_bound, i_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn pattern_order_matches_composition() {
        let a = Channel::unitary(&gates::h(), "H").unwrap();
        let b = Channel::unitary(&gates::s(), "S").unwrap();
        // [0, 1, 1] with bit 1 ↦ A is B∘A∘A.
        let s = pattern_superop(&a, &b, &[false, true, true]);
        let expect = b.compose(&a).unwrap().compose(&a).unwrap();
        assert!(s.approx_eq(expect.superop(), 1e-14));

        let rho = ComplexMatrix::unit(2, 0, 0);
        let out = apply_pattern(&a, &b, &[false, true], &rho).unwrap();
        let direct = apply(&b, &apply(&a, &rho).unwrap()).unwrap();
        assert!(out.approx_eq(&direct, 1e-14));
    }

    #[test]
    fn amplitude_damping_coefficients() {
        let g = GeneralNoise::amplitude_damping(0.1).unwrap();
        let t = t_coefficients(&g.lambda, &g.xi, 8).unwrap();
        assert!((t[0][0] - 1.0).abs() < 1e-14);
        for (i, row) in t.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let expect = match (i, j) {
                    (i, 0) if i % 2 == 0 => 1.0,
                    (_, 0) => 0.0,
                    (i, j) => 0.25 * binom(i, j),
                };
                assert!((v - expect).abs() < 1e-12, "t[{i}][{j}] = {v}, expected {expect}");
            }
        }
    }

    #[test]
    fn order_limit() {
        let g = GeneralNoise::amplitude_damping(0.1).unwrap();
        assert!(matches!(t_ij_series(&g, 21), Err(Error::ResourceLimit(_))));
    }
}
