//! Monte Carlo probabilistic error cancellation on dense density matrices.
//!
//! Each gate `𝓤ᵢ` is replaced by a term `𝓞_α` of a quasiprobability
//! decomposition drawn with probability `|η_α|/γᵢ`. The product
//! `γ_tot·sgn_tot·μ(A)` of a single-shot outcome `μ(A)` is an unbiased
//! estimate of `Tr[A·ρ_f]`.
//!
//! Samples are processed in blocks of [`BLOCK_SIZE`]. Block `b` draws from
//! ChaCha8 seeded with `seed` on stream `b`, and block statistics are merged
//! in block order, so results are bit-identical for any worker count.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{is_cptp, Channel, Superoperator, CPTP_TOL};
use crate::decomposer::{decompose_l1, validate, QuasiDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::noise::GeneralNoise;

/// Samples per RNG stream.
pub const BLOCK_SIZE: usize = 4096;
/// Largest series order a single draw may reach; longer draws are truncated and counted.
pub const MAX_SERIES_DRAW: u64 = 10_000;
/// Largest residual accepted between a gate and its decomposition.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

const STATE_TOL: f64 = 1e-10;
const OBSERVABLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Circuit {
    dim: usize,
    input: ComplexMatrix,
    gates: Vec<Channel>,
    observable: ComplexMatrix,
}

impl Circuit {
    pub fn new(input: ComplexMatrix, gates: Vec<ComplexMatrix>, observable: ComplexMatrix) -> Result<Self> {
        let d = input.rows();
        if !input.is_square() {
            return Err(Error::InvalidInput("input state must be square".into()));
        }
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if (input.trace() - C64::new(1.0, 0.0)).norm() > STATE_TOL
            || !input.is_hermitian(STATE_TOL)
            || input.eigvalsh()[0] < -STATE_TOL
        {
            return Err(Error::InvalidInput("input is not a density matrix".into()));
        }
        if observable.rows() != d || observable.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: observable.rows() });
        }
        if !observable.is_hermitian(OBSERVABLE_TOL) {
            return Err(Error::InvalidInput("observable is not Hermitian".into()));
        }
        let gates = gates
            .iter()
            .enumerate()
            .map(|(k, u)| {
                if u.rows() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: u.rows() });
                }
                Channel::unitary(u, format!("U{}", k + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: d, input, gates, observable })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input(&self) -> &ComplexMatrix {
        &self.input
    }

    pub fn gates(&self) -> &[Channel] {
        &self.gates
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    fn unitaries(&self) -> Vec<&ComplexMatrix> {
        self.gates.iter().map(|g| &g.kraus().expect("unitary gate")[0]).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    dim: usize,
    input: ComplexMatrix,
    gates: Vec<ComplexMatrix>,
    observable: ComplexMatrix,
}

impl Serialize for Circuit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitWire {
            dim: self.dim,
            input: self.input.clone(),
            gates: self.unitaries().into_iter().cloned().collect(),
            observable: self.observable.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = CircuitWire::deserialize(d)?;
        if w.input.rows() != w.dim {
            return Err(D::Error::custom(format!("dim {} does not match input size {}", w.dim, w.input.rows())));
        }
        Circuit::new(w.input, w.gates, w.observable).map_err(D::Error::custom)
    }
}

fn expectation(observable: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    (observable * rho).trace().re
}

/// `Tr[A·𝓤_L∘…∘𝓤₁(ρ)]` by dense simulation.
pub fn ideal_expectation(c: &Circuit) -> f64 {
    let rho = c.unitaries().into_iter().fold(c.input.clone(), |rho, u| &(u * &rho) * &u.dagger());
    expectation(&c.observable, &rho)
}

/// Expectation with `noise` after every gate and no mitigation.
pub fn noisy_expectation(c: &Circuit, noise: &Channel) -> Result<f64> {
    if noise.dim() != c.dim {
        return Err(Error::DimensionMismatch { expected: c.dim, found: noise.dim() });
    }
    let mut rho = c.input.vec();
    for g in &c.gates {
        rho = noise.superop().as_dmatrix() * (g.superop().as_dmatrix() * rho);
    }
    Ok(expectation(&c.observable, &ComplexMatrix::unvec(&rho, c.dim)?))
}

/// How the single-shot value `μ(A)` is produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    /// An eigenvalue of `A` drawn with Born probabilities in the final state.
    #[default]
    Born,
    /// `Tr[A·ρ̃]` of the sampled final state. Lower variance but not a
    /// physical measurement.
    Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PecOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub measurement: Measurement,
}

impl PecOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, workers: 1, measurement: Measurement::Born }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn measurement(mut self, m: Measurement) -> Self {
        self.measurement = m;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PecResult {
    pub estimate: f64,
    pub std_error: f64,
    pub gamma_tot: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub measurement: Measurement,
    /// Series draws truncated at [`MAX_SERIES_DRAW`]; always zero for finite decompositions.
    pub capped_draws: u64,
}

/// Precomputed readout of `A` acting on `vec(ρ)`.
struct Meter {
    eigenvalues: Vec<f64>,
    /// `w_k` with `⟨v_k|ρ|v_k⟩ = w_k·vec(ρ)`.
    born_rows: Vec<DVector<C64>>,
    /// `vec(Aᵀ)`, so that `Tr[Aρ] = vec(Aᵀ)·vec(ρ)`.
    trace_row: DVector<C64>,
    mode: Measurement,
}

impl Meter {
    fn new(a: &ComplexMatrix, mode: Measurement) -> Self {
        let d = a.rows();
        let (eigenvalues, vecs) = a.eigh();
        let born_rows =
            (0..d).map(|k| DVector::from_fn(d * d, |idx, _| vecs[(idx % d, k)].conj() * vecs[(idx / d, k)])).collect();
        Self { eigenvalues, born_rows, trace_row: a.transpose().vec(), mode }
    }

    fn read<R: Rng>(&self, rho: &DVector<C64>, rng: &mut R) -> f64 {
        match self.mode {
            Measurement::Exact => self.trace_row.dot(rho).re,
            Measurement::Born => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, &lambda) in self.born_rows.iter().zip(&self.eigenvalues) {
                    acc += w.dot(rho).re.max(0.0);
                    if u < acc {
                        return lambda;
                    }
                }
                // Rounding left the cumulative sum just below one.
                *self.eigenvalues.last().expect("nonempty spectrum")
            }
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Stats {
    n: f64,
    mean: f64,
    m2: f64,
    capped: u64,
}

impl Stats {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, o: Stats) -> Stats {
        if self.n == 0.0 {
            return Stats { capped: self.capped + o.capped, ..o };
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Stats {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
            capped: self.capped + o.capped,
        }
    }
}

/// Runs `sample` once per index in fixed-size blocks and merges in block order.
fn run_blocks<F>(opts: &PecOptions, sample: F) -> Result<Stats>
where
    F: Fn(&mut ChaCha8Rng, &mut u64) -> f64 + Sync,
{
    if opts.n_samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {}", opts.n_samples)));
    }
    if opts.workers == 0 {
        return Err(Error::InvalidParameter("workers must be positive".into()));
    }
    let n_blocks = opts.n_samples.div_ceil(BLOCK_SIZE);
    let block = |b: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b as u64);
        let mut st = Stats::default();
        let len = BLOCK_SIZE.min(opts.n_samples - b * BLOCK_SIZE);
        for _ in 0..len {
            let x = sample(&mut rng, &mut st.capped);
            st.push(x);
        }
        st
    };
    let blocks: Vec<Stats> = if opts.workers == 1 {
        (0..n_blocks).map(block).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::ResourceLimit(format!("thread pool: {e}")))?
            .install(|| (0..n_blocks).into_par_iter().map(block).collect())
    };
    Ok(blocks.into_iter().fold(Stats::default(), Stats::merge))
}

fn finish(st: Stats, gamma_tot: f64, opts: &PecOptions) -> PecResult {
    let var = st.m2 / (st.n - 1.0);
    PecResult {
        estimate: st.mean,
        std_error: (var / st.n).sqrt(),
        gamma_tot,
        n_samples: opts.n_samples,
        seed: opts.seed,
        measurement: opts.measurement,
        capped_draws: st.capped,
    }
}

/// Per-gate decompositions obtained by composing each term of a decomposition
/// of the identity with the gate: `𝓤 = Σ η_α 𝓞_α∘𝓤`.
pub fn decompositions_from_identity(c: &Circuit, identity: &QuasiDecomposition) -> Result<Vec<QuasiDecomposition>> {
    if identity.dim() != c.dim {
        return Err(Error::DimensionMismatch { expected: c.dim, found: identity.dim() });
    }
    c.gates.iter().map(|g| identity.map_ops(|op| op.compose(g))).collect()
}

/// Minimum-cost decomposition of every gate over a set of noisy operations.
pub fn lp_decompositions(c: &Circuit, noisy_ops: &[Channel]) -> Result<Vec<QuasiDecomposition>> {
    c.gates.iter().map(|g| Ok(decompose_l1(g, noisy_ops)?.without_zeros())).collect()
}

struct GateTable {
    pick: WeightedIndex<f64>,
    signs: Vec<f64>,
    superops: Vec<DMatrix<C64>>,
}

/// PEC estimate of `Tr[A·ρ_f]` from one decomposition per gate.
pub fn run_pec(c: &Circuit, decs: &[QuasiDecomposition], opts: &PecOptions) -> Result<PecResult> {
    if decs.len() != c.gates.len() {
        return Err(Error::InvalidDecomposition(format!("{} decompositions for {} gates", decs.len(), c.gates.len())));
    }
    let mut tables = Vec::with_capacity(decs.len());
    let mut gamma_tot = 1.0;
    for (k, (dec, gate)) in decs.iter().zip(&c.gates).enumerate() {
        let terms: Vec<_> = dec.terms().iter().filter(|t| t.eta != 0.0).collect();
        for t in &terms {
            let rep = is_cptp(&t.op, CPTP_TOL);
            if !rep.tp {
                return Err(Error::NonTracePreserving(format!(
                    "term {} of gate {} (deviation {:.3e})",
                    t.op.label(),
                    k + 1,
                    rep.tp_deviation
                )));
            }
        }
        let residual = validate(dec, gate);
        if residual >= DECOMPOSITION_TOL {
            return Err(Error::InvalidDecomposition(format!("gate {}: residual {residual:.3e}", k + 1)));
        }
        let pick = WeightedIndex::new(terms.iter().map(|t| t.eta.abs()))
            .map_err(|e| Error::InvalidDecomposition(e.to_string()))?;
        gamma_tot *= dec.gamma();
        tables.push(GateTable {
            pick,
            signs: terms.iter().map(|t| t.eta.signum()).collect(),
            superops: terms.iter().map(|t| t.op.superop().as_dmatrix().clone()).collect(),
        });
    }
    let meter = Meter::new(&c.observable, opts.measurement);
    let rho0 = c.input.vec();
    let st = run_blocks(opts, |rng, _| {
        let mut rho = rho0.clone();
        let mut scratch = rho0.clone();
        let mut sign = 1.0;
        for t in &tables {
            let a = t.pick.sample(rng);
            sign *= t.signs[a];
            scratch.gemv(C64::new(1.0, 0.0), &t.superops[a], &rho, C64::new(0.0, 0.0));
            std::mem::swap(&mut rho, &mut scratch);
        }
        gamma_tot * sign * meter.read(&rho, rng)
    })?;
    Ok(finish(st, gamma_tot, opts))
}

/// One draw `(i, j, pattern)` from the series expansion of `E⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesDraw {
    /// Series order, the number of maps in the pattern.
    pub i: usize,
    /// Number of `Λ` factors.
    pub j: usize,
    /// Bit 1 ↦ `Λ`, bit 0 ↦ `Ξ`, leftmost bit ↦ outermost map.
    pub pattern: Vec<bool>,
    /// The order was truncated at [`MAX_SERIES_DRAW`].
    pub capped: bool,
}

/// Coin-flip sampler for `P_ijk ∝ ε₊ʲ·ε₋^{i−j}/(1−ε)^{i+1}`.
#[derive(Clone, Debug)]
pub struct SeriesSampler {
    order: Geometric,
    /// `ε₊/(ε₊+ε₋)`, or 0 when both vanish.
    p_lambda: f64,
}

impl SeriesSampler {
    /// Requires `1−ε > ε₊+ε₋ ≥ 0`.
    pub fn new(eps: f64, eps_plus: f64, eps_minus: f64) -> Result<Self> {
        let s = eps_plus + eps_minus;
        if !(eps_plus >= 0.0 && eps_minus >= 0.0 && eps < 1.0 && s < 1.0 - eps) {
            return Err(Error::TheoremInapplicable(format!(
                "need 1 − ε > ε₊ + ε₋ with ε₊, ε₋ ≥ 0; got ε = {eps}, ε₊ = {eps_plus}, ε₋ = {eps_minus}"
            )));
        }
        let p_head = s / (1.0 - eps);
        let order = Geometric::new(1.0 - p_head).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self { order, p_lambda: if s > 0.0 { eps_plus / s } else { 0.0 } })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SeriesDraw {
        let raw = self.order.sample(rng);
        let capped = raw > MAX_SERIES_DRAW;
        let i = raw.min(MAX_SERIES_DRAW) as usize;
        let j = if i == 0 {
            0
        } else {
            Binomial::new(i as u64, self.p_lambda).expect("probability in [0, 1]").sample(rng) as usize
        };
        let mut pattern = vec![false; i];
        for pos in rand::seq::index::sample(rng, i, j) {
            pattern[pos] = true;
        }
        SeriesDraw { i, j, pattern, capped }
    }
}

/// Single draw; see [`SeriesSampler`].
pub fn sample_series_term<R: Rng + ?Sized>(eps: f64, eps_plus: f64, eps_minus: f64, rng: &mut R) -> Result<SeriesDraw> {
    Ok(SeriesSampler::new(eps, eps_plus, eps_minus)?.draw(rng))
}

/// PEC through the series expansion of `E⁻¹` for `E = (1−ε)id + ε₊Λ − ε₋Ξ`.
///
/// Each gate becomes `E∘(pattern)∘𝓤` with sign `(−1)ʲ` and weight
/// `1/(1−2ε₊)`.
pub fn run_pec_general(c: &Circuit, noise: &GeneralNoise, opts: &PecOptions) -> Result<PecResult> {
    noise.check_hypothesis()?;
    let e = noise.channel()?;
    if e.dim() != c.dim {
        return Err(Error::DimensionMismatch { expected: c.dim, found: e.dim() });
    }
    let sampler = SeriesSampler::new(noise.eps, noise.eps_plus, noise.eps_minus)?;
    let gamma = 1.0 / (1.0 - 2.0 * noise.eps_plus);
    let gamma_tot = c.gates.iter().fold(1.0, |acc, _| acc * gamma);

    let s_e = e.superop().as_dmatrix();
    let s_lambda = noise.lambda.superop().as_dmatrix();
    let s_xi = noise.xi.superop().as_dmatrix();
    let gates: Vec<&DMatrix<C64>> = c.gates.iter().map(|g| g.superop().as_dmatrix()).collect();
    let meter = Meter::new(&c.observable, opts.measurement);
    let rho0 = c.input.vec();
    let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));

    let st = run_blocks(opts, |rng, capped| {
        let mut rho = rho0.clone();
        let mut scratch = rho0.clone();
        let mut step = |m: &DMatrix<C64>, rho: &mut DVector<C64>| {
            scratch.gemv(one, m, rho, zero);
            std::mem::swap(rho, &mut scratch);
        };
        let mut sign = 1.0;
        for u in &gates {
            step(u, &mut rho);
            let draw = sampler.draw(rng);
            *capped += u64::from(draw.capped);
            for &bit in draw.pattern.iter().rev() {
                step(if bit { s_lambda } else { s_xi }, &mut rho);
            }
            step(s_e, &mut rho);
            if draw.j % 2 == 1 {
                sign = -sign;
            }
        }
        gamma_tot * sign * meter.read(&rho, rng)
    })?;
    Ok(finish(st, gamma_tot, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::closed_form_decomposition;
    use crate::gates;
    use crate::noise::{make_noise, NoiseSpec};

    fn circuit(input: &[C64], gates: Vec<ComplexMatrix>, a: ComplexMatrix) -> Circuit {
        Circuit::new(ComplexMatrix::projector(input), gates, a).unwrap()
    }

    #[test]
    fn ideal_expectation_examples() {
        let z = gates::z();
        assert_eq!(ideal_expectation(&circuit(&gates::ket0(), vec![], z.clone())), 1.0);
        assert!((ideal_expectation(&circuit(&gates::ket0(), vec![gates::x()], z.clone())) + 1.0).abs() < 1e-15);
        let c = circuit(&gates::ket0(), vec![gates::h(), gates::t(), gates::h()], z);
        assert!((ideal_expectation(&c) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn noisy_expectation_examples() {
        let deph = make_noise(&NoiseSpec::Dephasing { eps: 0.25 }).unwrap();
        let c = circuit(&gates::ket_plus(), vec![gates::identity(2)], gates::x());
        assert!((noisy_expectation(&c, &deph).unwrap() - 0.5).abs() < 1e-12);

        let c = circuit(&gates::ket_plus(), vec![gates::h(), gates::t()], gates::identity(2));
        assert!((noisy_expectation(&c, &deph).unwrap() - 1.0).abs() < 1e-12);

        let depol = make_noise(&NoiseSpec::Depolarizing { d: 2, eps: 0.1 }).unwrap();
        let c = circuit(&gates::ket0(), vec![gates::x()], gates::z());
        assert!((noisy_expectation(&c, &depol).unwrap() + 0.9).abs() < 1e-12);
    }

    #[test]
    fn circuit_validation() {
        let bad = ComplexMatrix::identity(2);
        assert!(Circuit::new(bad, vec![], gates::z()).is_err());
        let rho = ComplexMatrix::projector(&gates::ket0());
        assert!(Circuit::new(rho.clone(), vec![gates::x().scale_real(2.0)], gates::z()).is_err());
        assert!(Circuit::new(rho.clone(), vec![], gates::h() * gates::s()).is_err());
        assert!(matches!(Circuit::new(rho, vec![gates::cx()], gates::z()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn circuit_json_round_trip() {
        let c = circuit(&gates::ket0(), vec![gates::h(), gates::t()], gates::z());
        let s = serde_json::to_string(&c).unwrap();
        let back: Circuit = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert!(serde_json::from_str::<Circuit>(&s.replace("\"dim\":2", "\"dim\":3")).is_err());
    }

    #[test]
    fn noiseless_single_term_exact_mode_is_exact() {
        let c = circuit(&gates::ket0(), vec![gates::h(), gates::t(), gates::h()], gates::z());
        let decs: Vec<_> = c.gates().iter().map(|g| QuasiDecomposition::new(vec![(1.0, g.clone())]).unwrap()).collect();
        let r = run_pec(&c, &decs, &PecOptions::new(1000, 3).measurement(Measurement::Exact)).unwrap();
        assert!((r.estimate - ideal_expectation(&c)).abs() < 1e-12);
        assert!(r.std_error < 1e-12);
        assert_eq!(r.gamma_tot, 1.0);
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let c = circuit(&gates::ket_plus(), vec![gates::identity(2)], gates::x());
        let id = closed_form_decomposition(&NoiseSpec::Dephasing { eps: 0.25 }).unwrap();
        let decs = decompositions_from_identity(&c, &id).unwrap();
        let opts = PecOptions::new(20_000, 9);
        let a = run_pec(&c, &decs, &opts).unwrap();
        let b = run_pec(&c, &decs, &opts.clone().workers(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, run_pec(&c, &decs, &opts).unwrap());
        assert_ne!(a.estimate, run_pec(&c, &decs, &PecOptions::new(20_000, 10)).unwrap().estimate);
    }

    #[test]
    fn rejects_wrong_and_non_tp_decompositions() {
        let c = circuit(&gates::ket0(), vec![gates::x()], gates::z());
        let wrong = vec![QuasiDecomposition::new(vec![(1.0, Channel::identity(2))]).unwrap()];
        assert!(matches!(run_pec(&c, &wrong, &PecOptions::new(10, 0)), Err(Error::InvalidDecomposition(_))));

        let x = c.gates()[0].clone();
        let p0 = Channel::from_kraus(vec![gates::proj0()], "pi0").unwrap();
        let p1 = Channel::from_kraus(vec![ComplexMatrix::unit(2, 1, 1)], "pi1").unwrap();
        let split = vec![
            QuasiDecomposition::new(vec![(1.0, p0.compose(&x).unwrap()), (1.0, p1.compose(&x).unwrap())]).unwrap()
        ];
        assert!(matches!(run_pec(&c, &split, &PecOptions::new(10, 0)), Err(Error::NonTracePreserving(_))));
    }

    #[test]
    fn gamma_tot_is_a_product() {
        let c = circuit(&gates::ket0(), vec![gates::h(), gates::t(), gates::h()], gates::z());
        let id = closed_form_decomposition(&NoiseSpec::AmplitudeDamping { eps: 0.1 }).unwrap();
        let decs = decompositions_from_identity(&c, &id).unwrap();
        let r = run_pec(&c, &decs, &PecOptions::new(100, 0)).unwrap();
        assert_eq!(r.gamma_tot, decs.iter().map(|d| d.gamma()).product::<f64>());

        let g = GeneralNoise::amplitude_damping(0.1).unwrap();
        let r = run_pec_general(&c, &g, &PecOptions::new(100, 0)).unwrap();
        assert!((r.gamma_tot - 1.25f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn series_sampler_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let d = sample_series_term(0.0, 0.0, 0.0, &mut rng).unwrap();
            assert_eq!((d.i, d.j, d.pattern.len()), (0, 0, 0));
        }
        assert!(matches!(sample_series_term(0.5, 0.3, 0.2, &mut rng), Err(Error::TheoremInapplicable(_))));
        let s = SeriesSampler::new(0.1, 0.2, 0.3).unwrap();
        for _ in 0..1000 {
            let d = s.draw(&mut rng);
            assert_eq!(d.pattern.len(), d.i);
            assert_eq!(d.pattern.iter().filter(|&&b| b).count(), d.j);
            assert!(!d.capped);
        }
    }

    #[test]
    fn series_sampler_zero_order_rate() {
        let s = SeriesSampler::new(0.05, 0.03, 0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| s.draw(&mut rng).i == 0).count() as f64;
        let p = 0.9 / 0.95;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((zeros / n as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn trivial_general_noise_is_shot_noise_only() {
        let id = Channel::identity(2);
        let g = GeneralNoise::new(0.0, 0.0, 0.0, id.clone(), id).unwrap();
        let c = circuit(&gates::ket0(), vec![gates::h(), gates::t(), gates::h()], gates::z());
        let r = run_pec_general(&c, &g, &PecOptions::new(1000, 5).measurement(Measurement::Exact)).unwrap();
        assert!((r.estimate - ideal_expectation(&c)).abs() < 1e-12);
        assert!(r.std_error < 1e-12);
    }

    #[test]
    fn mitigation_variance_scales_with_gamma_squared() {
        let eps = 0.25;
        let noise = make_noise(&NoiseSpec::Dephasing { eps }).unwrap();
        let c = circuit(&gates::ket_plus(), vec![gates::identity(2)], gates::x());
        // Unmitigated run: the noisy output state measured directly.
        let noisy_out = crate::channel::apply(&noise, c.input()).unwrap();
        let base_c = Circuit::new(noisy_out, vec![], gates::x()).unwrap();
        let n = 400_000;
        let base = run_pec(&base_c, &[], &PecOptions::new(n, 1)).unwrap();
        let id = closed_form_decomposition(&NoiseSpec::Dephasing { eps }).unwrap();
        let mitigated = run_pec(&c, &decompositions_from_identity(&c, &id).unwrap(), &PecOptions::new(n, 2)).unwrap();
        assert!((mitigated.gamma_tot - 2.0).abs() < 1e-12);
        // Var = γ² − ⟨X⟩² = 3 against 1 − (1−2ε)² = 0.75.
        let ratio = (mitigated.std_error / base.std_error).powi(2);
        assert!((ratio - 4.0).abs() < 0.8, "variance ratio {ratio}");
    }
}
