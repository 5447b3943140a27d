use std::io::Write;
use std::path::Path;

use serde::Serialize;

use qpec_core::bases::{rank_of, BasisSet};
use qpec_core::bounds::{bounds_for, closed_form_decomposition, BoundsReport};
use qpec_core::channel::{is_cptp, CptpReport, CPTP_TOL};
use qpec_core::decomposer::{decompose_exact, decompose_l1, validate, QuasiDecomposition};
use qpec_core::pec::{
    decompositions_from_identity, ideal_expectation, lp_decompositions, noisy_expectation, run_pec, run_pec_general,
    Circuit, Measurement, PecOptions, PecResult,
};
use qpec_core::{gates, make_noise, Channel, ComplexMatrix, ErrorClass, NoiseSpec, Superoperator};

use crate::format::sig9;
use crate::presets::{parse_noise, resolve};
use crate::{Command, DecomposeMode, Failure, NoiseArgs, SimulateMode};

type Outcome = Result<(), Failure>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Bounds { noise, json } => bounds(&noise, json),
        Command::Decompose { noise, basis, mode, target, json } => decompose(&noise, &basis, mode, &target, json),
        Command::Simulate { circuit, noise, mode, basis, samples, seed, workers, shots_exact, json } => {
            let seed = seed.ok_or_else(|| Failure::usage("simulate needs --seed or QPEC_SEED"))?;
            let measurement = if shots_exact { Measurement::Exact } else { Measurement::Born };
            let opts = PecOptions::new(samples, seed).workers(workers).measurement(measurement);
            simulate(&circuit, &noise, mode, basis.as_deref(), &opts, json)
        }
        Command::Basis { set, check, noise, json } => basis(&set, check, noise.as_deref(), json),
        Command::Sweep { noise, eps, lp_basis, output } => sweep(&noise, &eps, lp_basis.as_deref(), output.as_deref()),
    }
}

fn noise_spec(args: &NoiseArgs) -> Result<NoiseSpec, Failure> {
    resolve(args.noise.as_deref(), args.noise_file.as_deref(), None)
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    say!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct BoundsOut<'a> {
    noise: &'a NoiseSpec,
    #[serde(flatten)]
    report: &'a BoundsReport,
}

fn bounds(args: &NoiseArgs, json: bool) -> Outcome {
    let spec = noise_spec(args)?;
    let report = bounds_for(&spec)?;
    if json {
        return print_json(&BoundsOut { noise: &spec, report: &report });
    }
    say!("noise  {}", spec.label());
    say!("lower  {}  ({})", sig9(report.lower), report.method_lower);
    say!("upper  {}  ({})", sig9(report.upper), report.method_upper);
    if let Some(dec) = &report.decomposition {
        print_terms(dec, make_noise(&spec)?.label());
    }
    Ok(())
}

/// A named gate, or a unitary given as a JSON matrix `{"rows","cols","data"}`.
fn target_gate(name: &str, d: usize) -> Result<Channel, Failure> {
    if name.trim_start().starts_with('{') {
        let u: ComplexMatrix = serde_json::from_str(name).map_err(|e| Failure::usage(format!("target matrix: {e}")))?;
        if u.rows() != d || u.cols() != d {
            return Err(Failure::usage(format!("target is {}x{}, noise acts in dimension {d}", u.rows(), u.cols())));
        }
        return Ok(Channel::unitary(&u, "U")?);
    }
    let u = match (d, name) {
        (_, "id") => gates::identity(d),
        (2, "x") => gates::x(),
        (2, "y") => gates::y(),
        (2, "z") => gates::z(),
        (2, "h") => gates::h(),
        (2, "s") => gates::s(),
        (2, "t") => gates::t(),
        (4, "cx") => gates::cx(),
        (4, "cs") => gates::cs(),
        (4, "swap") => gates::swap(),
        (4, "iswap") => gates::iswap(),
        _ => return Err(Failure::usage(format!("no target '{name}' in dimension {d}"))),
    };
    Ok(Channel::unitary(&u, name)?)
}

/// Term table with the noise channel abbreviated to `E`.
fn print_terms(dec: &QuasiDecomposition, noise_label: &str) {
    // Solver round-off below this is not worth a line of output.
    let floor = 1e-12 * dec.gamma();
    let prefix = format!("{noise_label}∘");
    for t in dec.terms().iter().filter(|t| t.eta.abs() > floor) {
        let label = t.op.label();
        let short = match label.strip_prefix(&prefix) {
            Some(rest) => format!("E∘{rest}"),
            None if label == noise_label => "E".to_string(),
            None => label.to_string(),
        };
        say!("  {:>14}  {short}", sig9(t.eta));
    }
}

#[derive(Serialize)]
struct DecomposeOut<'a> {
    noise: &'a NoiseSpec,
    target: &'a str,
    basis: Option<&'a str>,
    mode: &'a str,
    residual: f64,
    #[serde(flatten)]
    decomposition: &'a QuasiDecomposition,
}

fn decompose(args: &NoiseArgs, basis: &str, mode: DecomposeMode, target: &str, json: bool) -> Outcome {
    let spec = noise_spec(args)?;
    let noise = make_noise(&spec)?;
    let u = target_gate(target, noise.dim())?;
    let (dec, basis_name, mode_name) = match mode {
        DecomposeMode::Theorem => (closed_form_decomposition(&spec)?.map_ops(|op| op.compose(&u))?, None, "theorem"),
        DecomposeMode::L1 | DecomposeMode::Exact => {
            let set = BasisSet::by_name(basis)?;
            let ops = set.noisy(&noise)?;
            let dec = match mode {
                DecomposeMode::L1 => decompose_l1(&u, &ops)?,
                _ => decompose_exact(&u, &ops)?,
            };
            (dec, Some(basis), if matches!(mode, DecomposeMode::L1) { "l1" } else { "exact" })
        }
    };
    let residual = validate(&dec, &u);
    if json {
        return print_json(&DecomposeOut {
            noise: &spec,
            target,
            basis: basis_name,
            mode: mode_name,
            residual,
            decomposition: &dec,
        });
    }
    say!("noise = {}", noise.label());
    say!("gamma = {}", sig9(dec.gamma()));
    say!("residual = {residual:.1e}");
    print_terms(&dec, noise.label());
    Ok(())
}

#[derive(Serialize)]
struct SimulateOut<'a> {
    noise: String,
    mode: &'a str,
    workers: usize,
    ideal: f64,
    unmitigated: f64,
    #[serde(flatten)]
    result: &'a PecResult,
}

fn default_basis(d: usize) -> &'static str {
    if d == 4 {
        "tq241"
    } else {
        "b13"
    }
}

fn simulate(
    path: &Path,
    args: &NoiseArgs,
    mode: SimulateMode,
    basis: Option<&str>,
    opts: &PecOptions,
    json: bool,
) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let circuit: Circuit =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let spec = noise_spec(args)?;
    let noise = make_noise(&spec)?;
    let unmitigated = noisy_expectation(&circuit, &noise)?;
    let (result, mode_name) = match mode {
        SimulateMode::Theorem => {
            let decs = decompositions_from_identity(&circuit, &closed_form_decomposition(&spec)?)?;
            (run_pec(&circuit, &decs, opts)?, "theorem")
        }
        SimulateMode::General => (run_pec_general(&circuit, &spec.to_general()?, opts)?, "general"),
        SimulateMode::Lp => {
            let set = BasisSet::by_name(basis.unwrap_or(default_basis(circuit.dim())))?;
            let decs = lp_decompositions(&circuit, &set.noisy(&noise)?)?;
            (run_pec(&circuit, &decs, opts)?, "lp")
        }
    };
    let ideal = ideal_expectation(&circuit);
    if json {
        return print_json(&SimulateOut {
            noise: spec.label(),
            mode: mode_name,
            workers: opts.workers,
            ideal,
            unmitigated,
            result: &result,
        });
    }
    say!("estimate     {} ± {}", sig9(result.estimate), sig9(result.std_error));
    say!("ideal        {}", sig9(ideal));
    say!("unmitigated  {}", sig9(unmitigated));
    say!("gamma_tot    {}", sig9(result.gamma_tot));
    say!("samples      {} (seed {})", result.n_samples, result.seed);
    if result.capped_draws > 0 {
        say!("capped       {}", result.capped_draws);
    }
    Ok(())
}

#[derive(Serialize)]
struct BasisOut<'a> {
    #[serde(flatten)]
    set: &'a BasisSet,
    size: usize,
    cptp: Vec<CptpReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
}

fn basis(name: &str, check: bool, noise: Option<&str>, json: bool) -> Outcome {
    let set = BasisSet::by_name(name)?;
    let spec = noise.map(|n| parse_noise(n, None)).transpose()?;
    let cptp: Vec<CptpReport> = set.elements.iter().map(|e| is_cptp(e, CPTP_TOL)).collect();
    let rank = if check {
        Some(match &spec {
            Some(s) => rank_of(&set.noisy(&make_noise(s)?)?)?,
            None => rank_of(&set.elements)?,
        })
    } else {
        None
    };
    if json {
        print_json(&BasisOut { set: &set, size: set.len(), cptp, noise: spec.as_ref().map(NoiseSpec::label), rank })?;
    } else {
        for (k, (label, report)) in set.labels().iter().zip(&cptp).enumerate() {
            let flag = if report.is_cptp() { "cptp" } else { "trace-nonincreasing" };
            say!("{:>4}  {label:<12} {flag}", k + 1);
        }
        if let Some(r) = rank {
            let verdict = if r == set.len() { "OK" } else { "DEFICIENT" };
            say!("rank {r}/{} {verdict}", set.len());
        }
    }
    match rank {
        Some(r) if r < set.len() => Err(Failure { code: 3, message: format!("{name} has rank {r} of {}", set.len()) }),
        _ => Ok(()),
    }
}

/// `start:stop:step` with the stop included up to rounding.
fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("bad range '{text}'")))?;
    let [start, stop, step] = parts[..] else {
        return Err(Failure::usage(format!("range '{text}' must be start:stop:step")));
    };
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Failure::usage(format!("range '{text}' needs finite ends and a positive step")));
    }
    if stop < start {
        return Ok(vec![]);
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

fn sweep(template: &str, range: &str, lp_basis: Option<&str>, output: Option<&Path>) -> Outcome {
    let values = parse_range(range)?;
    // Validates the template before any output is written.
    let probe = parse_noise(template, Some(values.first().copied().unwrap_or(0.0)))?;
    let lp_set = match lp_basis {
        Some("none") => None,
        Some(name) => Some(BasisSet::by_name(name)?),
        None => match probe.dim() {
            2 => Some(BasisSet::by_name("b16")?),
            4 => Some(BasisSet::by_name("tq241")?),
            _ => None,
        },
    };
    let sink: Box<dyn Write> = match output {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Failure::usage(e.to_string());
    w.write_record(["eps", "lower", "upper", "lp_gamma"]).map_err(csv_err)?;
    for eps in values {
        let spec = parse_noise(template, Some(eps))?;
        let report = match bounds_for(&spec) {
            Ok(r) => r,
            Err(e) if e.class() == ErrorClass::Domain => {
                eprintln!("warning: sweep truncated at eps = {eps}: {e}");
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let lp = match &lp_set {
            Some(set) if set.dim == spec.dim() => {
                let ops = set.noisy(&make_noise(&spec)?)?;
                decompose_l1(&Channel::identity(spec.dim()), &ops)?.gamma().to_string()
            }
            _ => String::new(),
        };
        w.write_record([eps.to_string(), report.lower.to_string(), report.upper.to_string(), lp]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(())
}
