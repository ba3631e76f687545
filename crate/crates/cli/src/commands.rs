use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use lossphase::evaluation::ReportRecord;
use lossphase::sequence_optimizer::OptimizationRecord;
use lossphase::{
    build_likelihood_table, evaluate_all, fisher_information, forward_simulate_triport, make_loss_resistant,
    make_single_photon, max_fisher_over_phi, optimize_with, sql_baseline_with, synthesize_triport, Channel,
    EvalOptions, Evaluator, LossResistantSpec, Plan, State, DEFAULT_BRANCH_GUARD,
};

use crate::config::{load_config, resolve, Angle, Format, Globals};
use crate::output::{csv_bytes, emit, envelope, sibling, write_bytes};
use crate::{Cli, Command, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Flag values as a JSON layer: unset options and unset switches are dropped.
fn flag_layer<T: Serialize>(args: &T) -> anyhow::Result<Value> {
    let Value::Object(map) = serde_json::to_value(args)? else {
        return Ok(Value::Object(Map::new()));
    };
    Ok(Value::Object(
        map.into_iter()
            .filter(|(_, v)| !v.is_null() && *v != Value::Bool(false))
            .collect(),
    ))
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct StatePrepArgs {
    /// χ in [0, 2]
    #[arg(long)]
    pub chi: Option<f64>,
    /// n in [(b₁†)² + χ b₁†b₂† + (b₂†)²]ⁿ
    #[arg(long)]
    pub half_n: Option<usize>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbsArgs {
    /// 1 for a single photon, otherwise an even loss-resistant state
    #[arg(long)]
    pub n_photons: Option<usize>,
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Also evaluate every probability at this system phase
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<Angle>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FisherScanArgs {
    /// 2 or 4
    #[arg(long)]
    pub n_photons: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<Angle>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<Angle>,
    #[arg(long)]
    pub chi_min: Option<f64>,
    #[arg(long)]
    pub chi_max: Option<f64>,
    #[arg(long)]
    pub chi_step: Option<f64>,
    /// Maximize over φ at each χ instead of using --phi
    #[arg(long)]
    pub max_over_phi: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Exact,
    Speedup,
    Mc,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long)]
    pub chi2: Option<f64>,
    #[arg(long)]
    pub n4: Option<usize>,
    #[arg(long)]
    pub chi4: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Monte Carlo trials
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest number of enumerated leaves
    #[arg(long)]
    pub guard: Option<u64>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeArgs {
    /// Total photon number
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub chi_step: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub guard: Option<u64>,
    /// Pareto table CSV (defaults to `<output>.pareto.csv` for JSON output)
    #[arg(long)]
    pub pareto_csv: Option<PathBuf>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let base = match &cli.config {
        Some(path) => load_config(path)?,
        None => Map::new(),
    };
    let mut global_flags = Map::new();
    if let Some(f) = cli.format {
        global_flags.insert("format".into(), serde_json::to_value(f)?);
    }
    if let Some(o) = &cli.output {
        global_flags.insert("output".into(), serde_json::to_value(o)?);
    }
    if let Some(s) = cli.seed {
        global_flags.insert("seed".into(), json!(s));
    }
    if let Some(t) = cli.threads {
        global_flags.insert("threads".into(), json!(t));
    }
    let global_flags = Value::Object(global_flags);
    let globals: Globals = resolve(base.clone(), &[global_flags])?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(globals.threads)
        .build_global()
        .map_err(|e| usage(format!("cannot configure thread pool: {e}")))?;

    match &cli.command {
        Command::StatePrep(a) => state_prep(resolve(base, &[flag_layer(a)?])?, &globals),
        Command::Probs(a) => probs(resolve(base, &[flag_layer(a)?])?, &globals),
        Command::FisherScan(a) => fisher_scan(resolve(base, &[flag_layer(a)?])?, &globals),
        Command::Evaluate(a) => evaluate(resolve(base, &[flag_layer(a)?])?, &globals),
        Command::Optimize(a) => optimize(resolve(base, &[flag_layer(a)?])?, &globals),
    }
}

/// Resolved parameters merged with the global settings, for echoing.
fn echo<T: Serialize>(params: &T, globals: &Globals) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(params)?;
    if let Value::Object(map) = &mut v {
        map.insert("seed".into(), json!(globals.seed));
        map.insert("threads".into(), json!(globals.threads));
        map.insert("format".into(), serde_json::to_value(globals.format)?);
        map.insert("output".into(), serde_json::to_value(&globals.output)?);
    }
    Ok(v)
}

fn loss_resistant(half_n: usize, chi: f64) -> anyhow::Result<State> {
    Ok(make_loss_resistant(&LossResistantSpec::new(half_n, chi)?)?)
}

fn state_prep(mut a: StatePrepArgs, globals: &Globals) -> anyhow::Result<()> {
    let start = Instant::now();
    let chi = a.chi.ok_or_else(|| usage("--chi is required"))?;
    let half_n = *a.half_n.get_or_insert(1);
    let spec = LossResistantSpec::new(half_n, chi)?;
    let state = make_loss_resistant(&spec)?;
    let triport = synthesize_triport(&spec)?;
    let simulated = forward_simulate_triport(&triport, half_n)?;
    let fidelity = state.fidelity(&simulated);

    #[derive(Serialize)]
    struct Amp {
        k: usize,
        re: f64,
        im: f64,
    }
    let amps: Vec<Amp> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, c)| Amp { k, re: c.re, im: c.im })
        .collect();
    let result = json!({
        "n_photons": state.n_photons(),
        "amplitudes": amps,
        "triport": triport,
        "fidelity": fidelity,
    });
    let env = envelope("state-prep", &echo(&a, globals)?, globals.seed, start.elapsed(), result);
    emit(globals, Format::Json, &env, Some(csv_bytes(amps)?))
}

fn probs(mut a: ProbsArgs, globals: &Globals) -> anyhow::Result<()> {
    let start = Instant::now();
    let n = *a.n_photons.get_or_insert(2);
    let eta = *a.eta.get_or_insert(1.0);
    let theta = a.theta.get_or_insert(Angle(0.0)).0;
    let state = match n {
        1 => make_single_photon(),
        n if n >= 2 && n % 2 == 0 => {
            let chi = a.chi.ok_or_else(|| usage("--chi is required for multi-photon states"))?;
            loss_resistant(n / 2, chi)?
        }
        _ => return Err(usage(format!("--n-photons must be 1 or even, got {n}"))),
    };
    let table = build_likelihood_table(&state, &Channel::new(eta)?);
    let record = table.to_record();

    #[derive(Serialize)]
    struct ProbRow {
        #[serde(rename = "L")]
        lost: usize,
        k: usize,
        probability: f64,
    }
    #[derive(Serialize)]
    struct CoeffRow {
        #[serde(rename = "L")]
        lost: usize,
        k: usize,
        d: isize,
        re: f64,
        im: f64,
    }
    let probabilities: Option<Vec<ProbRow>> = a.phi.map(|phi| {
        table
            .outcomes()
            .zip(evaluate_all(&table, phi.0, theta))
            .map(|(o, p)| ProbRow {
                lost: o.lost,
                k: o.detected,
                probability: p,
            })
            .collect()
    });
    let csv = match &probabilities {
        Some(rows) => csv_bytes(rows)?,
        None => csv_bytes(record.entries.iter().flat_map(|e| {
            let m = (e.re.len() / 2) as isize;
            e.re.iter().zip(&e.im).enumerate().map(move |(i, (&re, &im))| CoeffRow {
                lost: e.lost,
                k: e.k,
                d: i as isize - m,
                re,
                im,
            })
        }))?,
    };
    let result = json!({ "table": record, "probabilities": probabilities });
    let env = envelope("probs", &echo(&a, globals)?, globals.seed, start.elapsed(), result);
    emit(globals, Format::Json, &env, Some(csv))
}

fn fisher_scan(mut a: FisherScanArgs, globals: &Globals) -> anyhow::Result<()> {
    let start = Instant::now();
    let n = *a.n_photons.get_or_insert(2);
    if n != 2 && n != 4 {
        return Err(usage(format!("--n-photons must be 2 or 4, got {n}")));
    }
    let eta = *a.eta.get_or_insert(0.6);
    let phi = a.phi.get_or_insert(Angle(std::f64::consts::FRAC_PI_4)).0;
    let theta = a.theta.get_or_insert(Angle(0.0)).0;
    let lo = *a.chi_min.get_or_insert(0.0);
    let hi = *a.chi_max.get_or_insert(2.0);
    let step = *a.chi_step.get_or_insert(0.02);
    if step.is_nan() || step <= 0.0 || lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(usage("need chi_step > 0 and chi_min <= chi_max"));
    }
    let channel = Channel::new(eta)?;
    let count = ((hi - lo) / step + 1e-9).floor() as usize;

    #[derive(Serialize)]
    struct Row {
        chi: f64,
        fisher: String,
    }
    let mut rows = Vec::with_capacity(count + 1);
    let mut values = Vec::with_capacity(count + 1);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=count {
        let chi = ((lo + i as f64 * step) * 1e12).round() / 1e12;
        let state = loss_resistant(n / 2, chi)?;
        let f = if a.max_over_phi {
            max_fisher_over_phi(&build_likelihood_table(&state, &channel), theta).map(|(_, f)| f)
        } else {
            fisher_information(&state, eta, phi, theta)
        };
        let f = match f {
            Ok(v) => v,
            Err(e @ lossphase::Error::FisherDivergence { .. }) => {
                eprintln!("warning: chi={chi}: {e}");
                f64::NAN
            }
            Err(e) => return Err(e.into()),
        };
        if f.is_finite() && best.is_none_or(|(_, b)| f > b) {
            best = Some((chi, f));
        }
        rows.push(Row {
            chi,
            fisher: if f.is_nan() { "nan".into() } else { f.to_string() },
        });
        values.push(json!({ "chi": chi, "fisher": if f.is_finite() { json!(f) } else { Value::Null } }));
    }
    let result = json!({
        "rows": values,
        "argmax": best.map(|(chi, f)| json!({ "chi": chi, "fisher": f })),
    });
    let env = envelope("fisher-scan", &echo(&a, globals)?, globals.seed, start.elapsed(), result);
    emit(globals, Format::Csv, &env, Some(csv_bytes(rows)?))
}

fn evaluator(method: MethodArg, trials: usize, seed: u64) -> Evaluator {
    match method {
        MethodArg::Exact => Evaluator::Exact,
        MethodArg::Speedup => Evaluator::ExactWithSpeedup,
        MethodArg::Mc => Evaluator::MonteCarlo { trials, seed },
    }
}

fn evaluate(mut a: EvaluateArgs, globals: &Globals) -> anyhow::Result<()> {
    let start = Instant::now();
    let eta = a.eta.ok_or_else(|| usage("--eta is required"))?;
    let plan = Plan::new(
        *a.n1.get_or_insert(0),
        *a.n2.get_or_insert(0),
        a.chi2,
        *a.n4.get_or_insert(0),
        a.chi4,
        eta,
    )?;
    let method = *a.method.get_or_insert(MethodArg::Speedup);
    let trials = *a.trials.get_or_insert(100_000);
    let options = EvalOptions {
        branch_guard: u128::from(*a.guard.get_or_insert(DEFAULT_BRANCH_GUARD as u64)),
    };
    let report = evaluator(method, trials, globals.seed).evaluate(&plan, &options)?;
    let record: ReportRecord = report.to_record();
    let result = json!({ "plan": plan, "report": record });
    let env = envelope("evaluate", &echo(&a, globals)?, globals.seed, start.elapsed(), result);
    emit(globals, Format::Json, &env, Some(csv_bytes([record])?))
}

fn optimize(mut a: OptimizeArgs, globals: &Globals) -> anyhow::Result<()> {
    let start = Instant::now();
    let n = a.n.ok_or_else(|| usage("--n is required"))?;
    let eta = a.eta.ok_or_else(|| usage("--eta is required"))?;
    let step = *a.chi_step.get_or_insert(0.1);
    let method = *a.method.get_or_insert(MethodArg::Speedup);
    let trials = *a.trials.get_or_insert(10_000);
    let options = EvalOptions {
        branch_guard: u128::from(*a.guard.get_or_insert(DEFAULT_BRANCH_GUARD as u64)),
    };
    let result = optimize_with(n, eta, step, evaluator(method, trials, globals.seed), &options)?;
    let sql = match sql_baseline_with(n, eta, &options) {
        Ok(v) => Some(v),
        Err(lossphase::Error::BranchGuard { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let mut pareto = Vec::new();
    result.write_pareto_csv(&mut pareto)?;
    let record: OptimizationRecord = result.to_record();
    let payload = json!({
        "optimization": record,
        "sql_baseline": sql.map(|v| if v.is_finite() { json!(v) } else { json!("inf") }),
    });
    let env = envelope("optimize", &echo(&a, globals)?, globals.seed, start.elapsed(), payload);

    let format = globals.format.unwrap_or(Format::Json);
    let pareto_path = a
        .pareto_csv
        .clone()
        .or_else(|| (format == Format::Json).then(|| globals.output.as_deref().map(|p| sibling(p, "pareto.csv"))).flatten());
    if let Some(p) = &pareto_path {
        write_bytes(Some(p), &pareto)?;
    }
    emit(globals, Format::Json, &env, Some(pareto))
}
