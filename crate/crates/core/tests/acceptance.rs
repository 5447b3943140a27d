//! Acceptance checks, one pass/fail line each. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qpec_core::bases::{basis_b13, basis_b16, basis_two_qubit_241, rank_of};
use qpec_core::bounds::{
    amplitude_damping_decomposition, bounds_for, closed_form_decomposition, gamma_amplitude_damping, gamma_general,
    hoeffding_samples,
};
use qpec_core::decomposer::{decompose_l1, validate};
use qpec_core::pec::{
    decompositions_from_identity, ideal_expectation, noisy_expectation, run_pec, run_pec_general, Circuit, PecOptions,
    SeriesSampler,
};
use qpec_core::series::t_ij_series;
use qpec_core::witness::{lower_bound_from_witness, witness_check};
use qpec_core::{gates, make_noise, Channel, ComplexMatrix, GeneralNoise, NoiseSpec};

type Check = Result<String, String>;

/// Floating-point allowance on top of a mathematical truncation bound.
const ROUNDING_SLACK: f64 = 1e-12;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn lp_identity(spec: &NoiseSpec, basis: &[Channel]) -> Result<(f64, Duration), String> {
    let noise = make_noise(spec).map_err(|e| e.to_string())?;
    let cands: Vec<Channel> =
        basis.iter().map(|b| noise.compose(b)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (dec, dt) = timed(|| decompose_l1(&Channel::identity(spec.dim()), &cands));
    let dec = dec.map_err(|e| e.to_string())?;
    ensure(
        validate(&dec, &Channel::identity(spec.dim())) < 1e-8,
        format!("{spec:?}: LP solution does not reconstruct"),
    )?;
    Ok((dec.gamma(), dt))
}

fn closed_form_vs_lp() -> Check {
    let (b13, b16) = (basis_b13(), basis_b16());
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for eps in [0.01, 0.05, 0.1, 0.2] {
        for (spec, expect) in [
            (NoiseSpec::Depolarizing { d: 2, eps }, (1.0 + eps / 2.0) / (1.0 - eps)),
            (NoiseSpec::Dephasing { eps }, 1.0 / (1.0 - 2.0 * eps)),
        ] {
            for basis in [&b13, &b16] {
                let (g, dt) = lp_identity(&spec, &basis.elements)?;
                let err = (g - expect).abs();
                ensure(err < 1e-8, format!("{spec:?} over {}: {g} vs {expect}", basis.name))?;
                ensure(dt < Duration::from_secs(1), format!("{spec:?} over {}: {dt:?}", basis.name))?;
                worst = worst.max(err);
                slowest = slowest.max(dt);
            }
        }
    }
    Ok(format!("max |LP - closed form| = {worst:.1e}, slowest {slowest:?}"))
}

fn two_qubit_depolarizing() -> Check {
    let eps = 0.01;
    let expect = (1.0 + (1.0 - 2.0 / 16.0) * eps) / (1.0 - eps);
    let (g, dt) = lp_identity(&NoiseSpec::Depolarizing { d: 4, eps }, &basis_two_qubit_241().elements)?;
    ensure((g - expect).abs() < 1e-6, format!("gamma {g:.10} vs {expect:.10}"))?;
    ensure(dt < Duration::from_secs(60), format!("took {dt:?}"))?;
    // 1.0195707 is (1 + (1 - 1/d²)ε)/(1 - ε), which gives 1 + 3ε/4 rather than 1 + ε/2 at d = 2.
    let other = 1.0195707;
    Ok(format!("gamma = {g:.10} (closed form {expect:.10}; {other} is off by {:.1e}) in {dt:?}", (g - other).abs()))
}

fn amplitude_damping_bounds() -> Check {
    let eps = 0.1;
    let r = gamma_amplitude_damping(eps).map_err(|e| e.to_string())?;
    let lower = ((1.0 - eps).sqrt() + eps / 2.0) / (1.0 - eps);
    let upper = (1.0 + eps) / (1.0 - eps);
    ensure((r.lower - lower).abs() < 1e-9 && (r.upper - upper).abs() < 1e-9, format!("{} {}", r.lower, r.upper))?;
    ensure((r.lower - 1.1096481).abs() < 5e-8 && (r.upper - 1.2222222).abs() < 5e-8, "published digits")?;
    let dec = amplitude_damping_decomposition(eps).map_err(|e| e.to_string())?;
    let residual = validate(&dec, &Channel::identity(2));
    ensure(residual < 1e-12, format!("three-term residual {residual:e}"))?;
    ensure((dec.gamma() - upper).abs() < 1e-12, "three-term gamma")?;
    let (g, _) = lp_identity(&NoiseSpec::AmplitudeDamping { eps }, &basis_b16().elements)?;
    ensure((g - 4.0 / 3.0).abs() < 1e-8, format!("LP over b16 gave {g}"))?;
    ensure(g > r.upper, "LP over b16 should exceed the three-term cost")?;
    Ok(format!("bounds ({:.7}, {:.7}), residual {residual:.1e}, b16 LP {g:.10}", r.lower, r.upper))
}

fn witness_consistency() -> Check {
    let mut out = vec![];
    for (k, spec) in [
        NoiseSpec::Depolarizing { d: 2, eps: 0.1 },
        NoiseSpec::Depolarizing { d: 4, eps: 0.01 },
        NoiseSpec::Dephasing { eps: 0.25 },
    ]
    .into_iter()
    .enumerate()
    {
        let r = bounds_for(&spec).map_err(|e| e.to_string())?;
        let (w, dec) = (r.witness.unwrap(), r.decomposition.unwrap());
        let lb = lower_bound_from_witness(&w, &Channel::identity(spec.dim()));
        ensure((lb - dec.gamma()).abs() < 1e-9, format!("{spec:?}: witness {lb} vs gamma {}", dec.gamma()))?;
        let noise = make_noise(&spec).map_err(|e| e.to_string())?;
        let report = witness_check(&w, &noise, 1000, 1000 + k as u64).map_err(|e| e.to_string())?;
        ensure(report.violations == 0, format!("{spec:?}: {report:?}"))?;
        out.push(format!("{}: {lb:.9}", spec.label()));
    }
    Ok(format!("{}; 0 violations in 1000 draws each", out.join(", ")))
}

fn general_cross_check() -> Check {
    let (mut worst_gap, mut worst_tail): (f64, f64) = (0.0, 0.0);
    for delta in [0.05, 0.1, 0.3] {
        let g = GeneralNoise::amplitude_damping(delta).map_err(|e| e.to_string())?;
        let lower = gamma_general(&g).map_err(|e| e.to_string())?.lower;
        let closed = ((1.0 - delta).sqrt() + delta / 2.0) / (1.0 - delta);
        ensure((lower - closed).abs() < 1e-9, format!("delta {delta}: {lower} vs {closed}"))?;
        let s = t_ij_series(&g, 18).map_err(|e| e.to_string())?;
        let gap = (s.partial_sum - (closed + 1.0) / 2.0).abs();
        // The truncation bound says nothing about rounding in the partial sum.
        ensure(
            gap <= s.tail_bound + ROUNDING_SLACK,
            format!("delta {delta}: gap {gap:e} above tail bound {:e}", s.tail_bound),
        )?;
        worst_gap = worst_gap.max(gap);
        worst_tail = worst_tail.max(s.tail_bound);
    }
    Ok(format!("exact inverse matches; series gap <= {worst_gap:.1e}, tail bounds <= {worst_tail:.1e}"))
}

fn rotated_dephasing() -> Check {
    let axis = [(PI / 8.0).cos(), 0.0, (PI / 8.0).sin()];
    let spec = NoiseSpec::GeneralizedDephasing { axis, eps: 0.1 };
    let (g, _) = lp_identity(&spec, &basis_b16().elements)?;
    ensure((g - 1.3017767).abs() < 1e-7, format!("LP gamma {g:.10}"))?;
    let upper = gamma_general(&spec.to_general().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.upper;
    ensure((upper - 1.25).abs() < 1e-12 && g > upper, format!("upper {upper}"))?;
    Ok(format!("LP gamma {g:.10} > series bound {upper}"))
}

fn basis_ranks() -> Check {
    let r16 = rank_of(&basis_b16().elements).map_err(|e| e.to_string())?;
    let r13 = rank_of(&basis_b13().elements).map_err(|e| e.to_string())?;
    let ((b241, r241), dt) = timed(|| {
        let b = basis_two_qubit_241();
        let r = rank_of(&b.elements);
        (b.len(), r)
    });
    let r241 = r241.map_err(|e| e.to_string())?;
    ensure(r16 == 16 && r13 == 13 && r241 == 241 && b241 == 241, format!("ranks {r16} {r13} {r241}/{b241}"))?;
    ensure(dt < Duration::from_secs(30), format!("241 set took {dt:?}"))?;
    Ok(format!("ranks 16, 13, 241; 241 set in {dt:?}"))
}

fn one_and_three_gate_circuits() -> [Circuit; 2] {
    [
        Circuit::new(ComplexMatrix::projector(&gates::ket0()), vec![gates::h()], gates::x()).unwrap(),
        Circuit::new(ComplexMatrix::projector(&gates::ket0()), vec![gates::h(), gates::s(), gates::h()], gates::y())
            .unwrap(),
    ]
}

fn pec_unbiasedness() -> Check {
    let n = 1_000_000;
    let mut lines = vec![];
    let mut seed = 8000;
    for label in ["dephasing 0.25", "depolarizing 0.1", "amplitude damping 0.1"] {
        for c in one_and_three_gate_circuits() {
            seed += 1;
            let opts = PecOptions::new(n, seed);
            let (run, dt) = timed(|| -> Result<_, String> {
                let (r, noisy) = if label.starts_with("amplitude") {
                    let g = GeneralNoise::amplitude_damping(0.1).map_err(|e| e.to_string())?;
                    let noise = g.channel().map_err(|e| e.to_string())?;
                    (run_pec_general(&c, &g, &opts), noisy_expectation(&c, &noise))
                } else {
                    let spec = if label.starts_with("dephasing") {
                        NoiseSpec::Dephasing { eps: 0.25 }
                    } else {
                        NoiseSpec::Depolarizing { d: 2, eps: 0.1 }
                    };
                    let id = closed_form_decomposition(&spec).map_err(|e| e.to_string())?;
                    let decs = decompositions_from_identity(&c, &id).map_err(|e| e.to_string())?;
                    let noise = make_noise(&spec).map_err(|e| e.to_string())?;
                    (run_pec(&c, &decs, &opts), noisy_expectation(&c, &noise))
                };
                Ok((r.map_err(|e| e.to_string())?, noisy.map_err(|e| e.to_string())?))
            });
            let (r, noisy) = run?;
            let ideal = ideal_expectation(&c);
            let z = (r.estimate - ideal).abs() / r.std_error;
            let bias = (noisy - ideal).abs() / r.std_error;
            let l = c.gates().len();
            ensure(z < 5.0, format!("{label}, {l} gates: estimate {} vs ideal {ideal} ({z:.2} se)", r.estimate))?;
            ensure(dt < Duration::from_secs(120), format!("{label}, {l} gates: took {dt:?}"))?;
            ensure(bias > 10.0, format!("{label}, {l} gates: unmitigated bias only {bias:.1} se"))?;
            lines.push(format!("{label}/{l}g {z:.2}se (bias {bias:.0}se)"));
        }
    }
    Ok(lines.join(", "))
}

fn series_distribution() -> Check {
    let n = 1_000_000u64;
    let mut out = vec![];
    for (k, (eps, ep, em)) in [(0.05, 0.03, 0.02), (0.2, 0.25, 0.05), (0.1, 0.1, 0.2)].into_iter().enumerate() {
        let s = SeriesSampler::new(eps, ep, em).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(900 + k as u64);
        let i_top = 80usize;
        let mut counts = vec![vec![0u64; i_top + 1]; i_top + 1];
        let mut overflow = 0u64;
        for _ in 0..n {
            let d = s.draw(&mut rng);
            if d.i <= i_top {
                counts[d.i][d.j] += 1;
            } else {
                overflow += 1;
            }
        }
        // P_ij = (1 − ε − ε₊ − ε₋)·C(i, j)·ε₊ʲ·ε₋^{i−j}/(1−ε)^{i+1}
        let norm = 1.0 - eps - ep - em;
        let (mut obs, mut exp) = (vec![], vec![]);
        let (mut o_pool, mut e_pool) = (overflow, n as f64);
        let mut binom = vec![1.0f64];
        for (i, row) in counts.iter().enumerate() {
            if i > 0 {
                let mut next = vec![1.0; i + 1];
                for (j, w) in binom.windows(2).enumerate() {
                    next[j + 1] = w[0] + w[1];
                }
                binom = next;
            }
            for j in 0..=i {
                let p = norm * binom[j] * ep.powi(j as i32) * em.powi((i - j) as i32) / (1.0 - eps).powi(i as i32 + 1);
                let e = n as f64 * p;
                if e >= 5.0 {
                    e_pool -= e;
                    obs.push(row[j]);
                    exp.push(e);
                } else {
                    o_pool += row[j];
                }
            }
        }
        // Everything not binned on its own, including orders above the table.
        while e_pool < 5.0 {
            let (Some(o), Some(e)) = (obs.pop(), exp.pop()) else { break };
            o_pool += o;
            e_pool += e;
        }
        obs.push(o_pool);
        exp.push(e_pool);
        let stat: f64 = obs.iter().zip(&exp).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new((obs.len() - 1) as f64).unwrap().cdf(stat);
        ensure(p > 0.01, format!("({eps}, {ep}, {em}): chi-square p = {p:.4}"))?;
        out.push(format!("p={p:.3} ({} cells)", obs.len()));
    }
    Ok(out.join(", "))
}

fn hoeffding_coverage() -> Check {
    let n2952 = hoeffding_samples(2.0, 0.1, 0.05).map_err(|e| e.to_string())?;
    ensure(n2952 == 2952, format!("hoeffding_samples(2, 0.1, 0.05) = {n2952}"))?;
    let spec = NoiseSpec::Dephasing { eps: 0.25 };
    let c = Circuit::new(ComplexMatrix::projector(&gates::ket0()), vec![gates::h(), gates::t()], gates::x()).unwrap();
    let id = closed_form_decomposition(&spec).map_err(|e| e.to_string())?;
    let decs = decompositions_from_identity(&c, &id).map_err(|e| e.to_string())?;
    let gamma_tot: f64 = decs.iter().map(|d| d.gamma()).product();
    let (delta, fail) = (0.05, 0.05);
    let n = hoeffding_samples(gamma_tot, delta, fail).map_err(|e| e.to_string())? as usize;
    let ideal = ideal_expectation(&c);
    let mut hits = 0;
    for run in 0..100u64 {
        let r = run_pec(&c, &decs, &PecOptions::new(n, 50_000 + run)).map_err(|e| e.to_string())?;
        if (r.estimate - ideal).abs() <= delta {
            hits += 1;
        }
    }
    ensure(hits >= 95, format!("{hits}/100 runs within delta"))?;
    Ok(format!("2952 samples; {hits}/100 runs of {n} samples within {delta}"))
}

type Criterion = fn() -> Check;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("closed form vs LP, one qubit", closed_form_vs_lp),
        ("two-qubit depolarizing LP", two_qubit_depolarizing),
        ("amplitude damping bounds", amplitude_damping_bounds),
        ("witness consistency", witness_consistency),
        ("general noise cross-check", general_cross_check),
        ("rotated dephasing LP", rotated_dephasing),
        ("basis ranks", basis_ranks),
        ("PEC unbiasedness", pec_unbiasedness),
        ("series sampler distribution", series_distribution),
        ("Hoeffding sample count", hoeffding_coverage),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (res, dt) = timed(check);
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{:.2}s]", k + 1, dt.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{:.2}s]", k + 1, dt.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
