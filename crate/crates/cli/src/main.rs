//! `schmidt`: batch front end for schmidt-core.

mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use schmidt_core::bounds::{bound_bundle, delta_epsilon, dp_manual_bound, sdp_relaxation_bound};
use schmidt_core::embezzle::{
    embezzler_objective, embezzler_search_losr, embezzler_search_lu, fig5_sweep, harmonic_dist,
    randomness_embezzle_fidelity, two_qubit, vdh_order_for_fidelity, EmbezzleLosrOptions,
};
use schmidt_core::iid::{dilution_lo, dilution_lu, distillation_lo, distillation_lu, DilutionOptions};
use schmidt_core::losr::{exact_convertible, f_losr, f_losr_grid_with_budget, LosrOptions};
use schmidt_core::lu::{f_lu, lu_decay_curve};
use schmidt_core::{Error, ProbVector, SchmidtState};
use serde_json::{json, Value};

use input::{parse_dims, parse_pairs, parse_state, parse_weights, InputError};

const DEFAULT_PAIRS: &str = "0.5:0.55,0.5:0.6,0.5:0.7,0.6:0.65,0.6:0.7,0.6:0.8";

#[derive(Parser)]
#[command(name = "schmidt", version, about = "Conversion fidelities between bipartite pure states")]
struct Cli {
    /// Grid resolution for searches.
    #[arg(long, global = true, default_value_t = 0.005)]
    step: f64,
    /// Convergence tolerance for iterative refinement.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Number of grid points refined by local ascent.
    #[arg(long, global = true, default_value_t = 16)]
    restarts: usize,
    /// Worker threads; SCHMIDT_BENCH_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report wall_time_ms as null so output is reproducible byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best fidelity under local unitaries.
    FidelityLu(Pair),
    /// Fidelity under local operations and shared randomness.
    FidelityLosr(LosrArgs),
    /// Every upper and lower bound for a conversion.
    Bounds(BoundsArgs),
    /// Dilution from copies of the maximally entangled state.
    IidDilute(Dilute),
    /// Distillation into copies of the maximally entangled state.
    IidDistill(Distill),
    /// The harmonic embezzling state.
    EmbezzleHarmonic(Harmonic),
    /// Best catalyst of a given dimension.
    EmbezzleSearch(Search),
    /// Fidelity of embezzling a target from the harmonic state.
    EmbezzleClassical(Classical),
    /// Plain versus LU-optimal fidelity of n copies of two-qubit states.
    Fig4(Fig4),
    /// Catalyst sweep over two-qubit pairs and dimensions.
    Fig5(Fig5),
    /// Whether the seed is exactly the target times some ancilla.
    ExactCheck(Pair),
    /// Dilution and distillation.
    Iid {
        #[command(subcommand)]
        op: IidOp,
    },
    /// Embezzling states and catalysts.
    Embezzle {
        #[command(subcommand)]
        op: EmbezzleOp,
    },
}

#[derive(Subcommand)]
enum IidOp {
    /// Same as iid-dilute.
    Dilute(Dilute),
    /// Same as iid-distill.
    Distill(Distill),
}

#[derive(Subcommand)]
enum EmbezzleOp {
    /// Same as embezzle-harmonic.
    Harmonic(Harmonic),
    /// Same as embezzle-classical.
    ClassicalFidelity(Classical),
    /// Same as embezzle-search.
    Search(Search),
    /// Same as fig5.
    Fig5(Fig5),
}

#[derive(Args)]
struct Pair {
    /// Target distribution (comma list, JSON array, or JSON file).
    #[arg(long)]
    target: String,
    /// Seed distribution.
    #[arg(long)]
    seed: String,
}

#[derive(Args)]
struct LosrArgs {
    #[command(flatten)]
    pair: Pair,
    /// Report the plain grid optimum without refinement.
    #[arg(long)]
    grid_only: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    pair: Pair,
    /// Infidelity for the communication bound.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Feasibility tolerance of the relaxation bound.
    #[arg(long, default_value_t = 1e-8)]
    sdp_tol: f64,
    /// Sorted position used by the coarse-graining bound.
    #[arg(long, default_value_t = 1)]
    pivot: usize,
}

#[derive(Args)]
struct Dilute {
    /// Target distribution.
    #[arg(long)]
    target: String,
    /// Local dimension of the maximally entangled resource.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of resource copies.
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Args)]
struct Distill {
    /// Seed distribution.
    #[arg(long)]
    seed: String,
    /// Local dimension of the maximally entangled state.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Copies of the maximally entangled state produced.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Seed copies consumed.
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Args)]
struct Harmonic {
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct Classical {
    /// Target distribution.
    #[arg(long)]
    target: String,
    /// Size of the harmonic state.
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct Search {
    /// Two-qubit target (p, 1-p); alternative to --target.
    #[arg(long, conflicts_with = "target")]
    p: Option<f64>,
    /// Two-qubit seed (q, 1-q); alternative to --seed.
    #[arg(long, conflicts_with = "seed")]
    q: Option<f64>,
    /// Target distribution.
    #[arg(long)]
    target: Option<String>,
    /// Seed distribution.
    #[arg(long)]
    seed: Option<String>,
    /// Catalyst dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Evaluate this catalyst instead of searching.
    #[arg(long)]
    catalyst: Option<String>,
    /// Also optimize a target-side ancilla.
    #[arg(long)]
    losr: bool,
}

#[derive(Args)]
struct Fig4 {
    /// Two-qubit target (p, 1-p).
    #[arg(long, default_value_t = 0.55)]
    p: f64,
    /// Two-qubit seed (q, 1-q).
    #[arg(long, default_value_t = 0.65)]
    q: f64,
    /// Largest number of copies.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig5 {
    /// Pairs p:q of two-qubit target and seed.
    #[arg(long, default_value = DEFAULT_PAIRS)]
    pairs: String,
    /// Catalyst dimensions, e.g. 1-8.
    #[arg(long, default_value = "1-8")]
    dims: String,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Budget(String),
    Other(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } | Error::SizeCap { .. } => Failure::Budget(e.to_string()),
            Error::NonConvergence { .. } => Failure::Other(e.to_string()),
            Error::OutOfRange { name, .. } => Failure::Input(format!("--{name}: {e}")),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// What a subcommand produced: a JSON document, or CSV rows.
enum Output {
    Json { method: &'static str, input: Value, result: Value },
    Csv { header: Vec<&'static str>, rows: Vec<Vec<String>>, out: Option<PathBuf>, summary: Value },
}

fn weights(v: &[f64]) -> Value {
    json!(v)
}

fn state(s: &SchmidtState) -> Value {
    weights(s.weights())
}

/// Formats a value with 12 significant digits and no trailing zeros.
fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn losr_options(cli: &Cli) -> LosrOptions {
    LosrOptions {
        step: cli.step,
        restarts: cli.restarts,
        tol: cli.tol,
        ..LosrOptions::default()
    }
}

fn pair_states(p: &Pair) -> Res<(SchmidtState, SchmidtState)> {
    Ok((parse_state("target", &p.target)?, parse_state("seed", &p.seed)?))
}

fn side(flag: &str, two: Option<f64>, raw: &Option<String>) -> Res<SchmidtState> {
    match (two, raw) {
        (Some(x), _) => two_qubit(x).map_err(|e| Failure::Input(format!("--{}: {e}", &flag[..1]))),
        (None, Some(r)) => Ok(parse_state(flag, r)?),
        (None, None) => Err(Failure::Input(format!(
            "--{flag}: required (or --{} for a two-qubit state)",
            &flag[..1]
        ))),
    }
}

fn dilute(cli: &Cli, a: &Dilute) -> Res<Output> {
    let t = parse_state("target", &a.target)?;
    let opts = DilutionOptions {
        restarts: cli.restarts,
        ..DilutionOptions::default()
    };
    let lu = dilution_lu(&t, a.d, a.n)?;
    let lo = dilution_lo(&t, a.d, a.n, &opts)?;
    Ok(Output::Json {
        method: "subgradient-ascent",
        input: json!({"target": state(&t), "d": a.d, "n": a.n}),
        result: json!({"f_lu": lu, "fidelity": lo.value, "ancilla": weights(lo.ancilla.weights())}),
    })
}

fn distill(a: &Distill) -> Res<Output> {
    let s = parse_state("seed", &a.seed)?;
    let lu = distillation_lu(&s, a.d, a.m, a.n)?;
    let lo = distillation_lo(&s, a.d, a.m, a.n)?;
    Ok(Output::Json {
        method: "analytic",
        input: json!({"seed": state(&s), "d": a.d, "m": a.m, "n": a.n}),
        result: json!({
            "f_lu": lu,
            "fidelity": lo.value,
            "numeric_fidelity": lo.numeric_value,
            "alpha": lo.alpha,
            "ancilla": weights(lo.ancilla.weights()),
        }),
    })
}

fn harmonic(a: &Harmonic) -> Res<Output> {
    let h = harmonic_dist(a.n)?;
    // Full weight lists only for sizes that are reasonable to print.
    let w = (a.n <= 100_000).then(|| weights(h.dist().weights()));
    Ok(Output::Json {
        method: "closed-form",
        input: json!({"n": a.n}),
        result: json!({"harmonic_number": h.harmonic_number, "weights": w}),
    })
}

fn classical(a: &Classical) -> Res<Output> {
    let t = parse_weights("target", &a.target)?;
    let t = ProbVector::new(t).map_err(|e| Failure::Input(format!("--target: {e}")))?;
    let f = randomness_embezzle_fidelity(&t, a.n)?;
    Ok(Output::Json {
        method: "closed-form",
        input: json!({"target": weights(t.weights()), "n": a.n}),
        result: json!({"fidelity": f, "overlap": f.sqrt()}),
    })
}

fn search(cli: &Cli, a: &Search) -> Res<Output> {
    let t = side("target", a.p, &a.target)?;
    let s = side("seed", a.q, &a.seed)?;
    let input = json!({"target": state(&t), "seed": state(&s), "dim": a.dim});
    if let Some(raw) = &a.catalyst {
        let r = ProbVector::new(parse_weights("catalyst", raw)?).map_err(|e| Failure::Input(format!("--catalyst: {e}")))?;
        let f = embezzler_objective(&t, &s, &r);
        return Ok(Output::Json {
            method: "evaluate",
            input: json!({"target": state(&t), "seed": state(&s), "catalyst": weights(r.weights())}),
            result: json!({"fidelity": f, "vdh_order": vdh_order_for_fidelity(f).ok()}),
        });
    }
    if a.losr {
        let opts = EmbezzleLosrOptions {
            step: cli.step,
            tol: cli.tol,
            ..EmbezzleLosrOptions::default()
        };
        let r = embezzler_search_losr(&t, &s, a.dim, &opts)?;
        return Ok(Output::Json {
            method: "alternating-grid",
            input,
            result: json!({
                "fidelity": r.fidelity,
                "lu_fidelity": r.lu_fidelity,
                "catalyst": weights(r.catalyst.weights()),
                "ancilla": weights(r.ancilla.weights()),
                "rounds": r.rounds,
            }),
        });
    }
    let r = embezzler_search_lu(&t, &s, a.dim, cli.step, None)?;
    Ok(Output::Json {
        method: "grid",
        input,
        result: json!({
            "fidelity": r.fidelity,
            "catalyst": weights(r.catalyst.weights()),
            "vdh_order": vdh_order_for_fidelity(r.fidelity).ok(),
        }),
    })
}

fn fig4(a: &Fig4) -> Res<Output> {
    let curve = lu_decay_curve(a.p, a.q, a.n)?;
    let rows = curve
        .iter()
        .map(|pt| vec![pt.n.to_string(), sig12(pt.f_plain), sig12(pt.f_lu)])
        .collect();
    Ok(Output::Csv {
        header: vec!["n", "f_plain", "f_lu"],
        rows,
        out: a.out.clone(),
        summary: json!({"p": a.p, "q": a.q, "n": a.n}),
    })
}

fn fig5(cli: &Cli, a: &Fig5) -> Res<Output> {
    let pairs = parse_pairs(&a.pairs)?;
    let dims = parse_dims(&a.dims)?;
    let rows = fig5_sweep(&pairs, &dims, cli.step)?
        .iter()
        .map(|r| {
            vec![
                format!("{}:{}", r.p, r.q),
                r.dim.to_string(),
                sig12(r.fidelity),
                r.vdh_order.map(sig12).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Output::Csv {
        header: vec!["pair", "dim", "fidelity", "vdh_order"],
        rows,
        out: a.out.clone(),
        summary: json!({"pairs": pairs, "dims": dims}),
    })
}

fn run(cli: &Cli) -> Res<Output> {
    let out = match &cli.command {
        Command::FidelityLu(p) => {
            let (t, s) = pair_states(p)?;
            let r = f_lu(&t, &s);
            Output::Json {
                method: "sorted",
                input: json!({"target": state(&t), "seed": state(&s)}),
                result: json!({"fidelity": r.fidelity, "permutation_witness": r.permutation_witness}),
            }
        }
        Command::FidelityLosr(a) => {
            let (t, s) = pair_states(&a.pair)?;
            let opts = losr_options(cli);
            let r = if a.grid_only {
                f_losr_grid_with_budget(&t, &s, cli.step, opts.budget)?
            } else {
                f_losr(&t, &s, &opts)?
            };
            Output::Json {
                method: match r.method {
                    schmidt_core::losr::LosrMethod::Grid => "grid",
                    schmidt_core::losr::LosrMethod::Refined => "grid+refine",
                    schmidt_core::losr::LosrMethod::ClosedForm => "closed-form",
                },
                input: json!({"target": state(&t), "seed": state(&s)}),
                result: json!({"fidelity": r.fidelity_lower_bound, "ancilla": weights(r.ancilla.weights())}),
            }
        }
        Command::Bounds(a) => {
            let (t, s) = pair_states(&a.pair)?;
            let b = bound_bundle(&t, &s, a.eps, &losr_options(cli), a.sdp_tol)?;
            let sdp = sdp_relaxation_bound(&t, &s, a.sdp_tol)?;
            let manual = dp_manual_bound(&t, &s, a.pivot.min(t.weights().len().saturating_sub(1))).ok();
            let delta = delta_epsilon(t.dist(), a.eps)?;
            Output::Json {
                method: "bundle",
                input: json!({"target": state(&t), "seed": state(&s), "eps": a.eps, "sdp_tol": a.sdp_tol}),
                result: json!({
                    "f_lu": b.f_lu,
                    "f_losr_lower": b.f_losr_lower,
                    "sdp_upper": b.sdp_upper,
                    "sdp_residual": sdp.residual,
                    "dp_upper": b.dp_upper,
                    "dp_manual": manual,
                    "hw_qubit_lower": b.hw_qubit_lower,
                    "hw_cbit_lower": b.hw_cbit_lower,
                    "delta_eps_target": delta.value,
                }),
            }
        }
        Command::IidDilute(a) | Command::Iid { op: IidOp::Dilute(a) } => dilute(cli, a)?,
        Command::IidDistill(a) | Command::Iid { op: IidOp::Distill(a) } => distill(a)?,
        Command::EmbezzleHarmonic(a) | Command::Embezzle { op: EmbezzleOp::Harmonic(a) } => harmonic(a)?,
        Command::EmbezzleClassical(a) | Command::Embezzle { op: EmbezzleOp::ClassicalFidelity(a) } => classical(a)?,
        Command::EmbezzleSearch(a) | Command::Embezzle { op: EmbezzleOp::Search(a) } => search(cli, a)?,
        Command::Fig4(a) => fig4(a)?,
        Command::Fig5(a) | Command::Embezzle { op: EmbezzleOp::Fig5(a) } => fig5(cli, a)?,
        Command::ExactCheck(p) => {
            let (t, s) = pair_states(p)?;
            let z = exact_convertible(&t, &s, cli.tol);
            Output::Json {
                method: "multiset-division",
                input: json!({"target": state(&t), "seed": state(&s)}),
                result: json!({"convertible": z.is_some(), "ancilla": z.map(|z| weights(z.weights()))}),
            }
        }
    };
    Ok(out)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::FidelityLu(_) => "fidelity-lu",
        Command::FidelityLosr(_) => "fidelity-losr",
        Command::Bounds(_) => "bounds",
        Command::IidDilute(_) | Command::Iid { op: IidOp::Dilute(_) } => "iid-dilute",
        Command::IidDistill(_) | Command::Iid { op: IidOp::Distill(_) } => "iid-distill",
        Command::EmbezzleHarmonic(_) | Command::Embezzle { op: EmbezzleOp::Harmonic(_) } => "embezzle-harmonic",
        Command::EmbezzleClassical(_) | Command::Embezzle { op: EmbezzleOp::ClassicalFidelity(_) } => {
            "embezzle-classical"
        }
        Command::EmbezzleSearch(_) | Command::Embezzle { op: EmbezzleOp::Search(_) } => "embezzle-search",
        Command::Fig4(_) => "fig4",
        Command::Fig5(_) | Command::Embezzle { op: EmbezzleOp::Fig5(_) } => "fig5",
        Command::ExactCheck(_) => "exact-check",
    }
}

fn validate_tuning(cli: &Cli) -> Res<()> {
    if !(cli.step > 0.0 && cli.step <= 1.0) {
        return Err(Failure::Input(format!("--step: {} is out of range (0, 1]", cli.step)));
    }
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(Failure::Input(format!("--tol: {} must be > 0", cli.tol)));
    }
    if cli.restarts == 0 {
        return Err(Failure::Input("--restarts: must be >= 1".into()));
    }
    Ok(())
}

fn thread_count(cli: &Cli) -> Res<Option<usize>> {
    match std::env::var("SCHMIDT_BENCH_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| Failure::Input(format!("SCHMIDT_BENCH_THREADS: {v:?} is not a positive integer"))),
        Err(_) => match cli.threads {
            Some(0) => Err(Failure::Input("--threads: must be >= 1".into())),
            t => Ok(t),
        },
    }
}

fn emit(cli: &Cli, output: Output, wall_ms: f64) -> Res<()> {
    let timing = if cli.no_timing { Value::Null } else { json!(wall_ms) };
    let mut doc = json!({
        "command": command_name(&cli.command),
        "step": cli.step,
        "tol": cli.tol,
        "restarts": cli.restarts,
        "wall_time_ms": timing,
    });
    let stdout = std::io::stdout();
    match output {
        Output::Json { method, input, result } => {
            doc["method"] = json!(method);
            doc["input"] = input;
            doc["result"] = result;
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, &doc).map_err(|e| Failure::Other(e.to_string()))?;
            writeln!(lock)?;
        }
        Output::Csv { header, rows, out, summary } => {
            let write = |w: &mut dyn Write| -> Res<()> {
                let mut wr = csv::Writer::from_writer(w);
                wr.write_record(&header)?;
                for r in &rows {
                    wr.write_record(r)?;
                }
                wr.flush()?;
                Ok(())
            };
            match out {
                Some(path) => {
                    let mut f = std::fs::File::create(&path)
                        .map_err(|e| Failure::Other(format!("--out: cannot create {}: {e}", path.display())))?;
                    write(&mut f)?;
                    doc["method"] = json!("csv");
                    doc["input"] = summary;
                    doc["result"] = json!({"out": path.display().to_string(), "rows": rows.len()});
                    let mut lock = stdout.lock();
                    serde_json::to_writer_pretty(&mut lock, &doc).map_err(|e| Failure::Other(e.to_string()))?;
                    writeln!(lock)?;
                }
                None => write(&mut stdout.lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        validate_tuning(&cli)?;
        if let Some(n) = thread_count(&cli)? {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Other(e.to_string()))?;
        }
        let start = Instant::now();
        let output = run(&cli)?;
        emit(&cli, output, start.elapsed().as_secs_f64() * 1e3)
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
