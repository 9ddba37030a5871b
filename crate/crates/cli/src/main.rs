mod manifest;
mod measure_arg;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use freefisher::engine::{DynFunctional, Word};
use freefisher::functionals::{
    entropy_of_measure, fisher_of_measure, json_real, log_energy, min_fisher_thm11, theorem_bound, BoundInput,
    FisherConstant, TheoremId,
};
use freefisher::rmt::{
    block_embed_matrix, compare_star_moments, compressed_entries, compression_freeness_residual, embedded_spectrum,
    hermitian_spectrum, rdiagonal_matrix, rdiagonal_trial, reassemble_blocks, singular_values, KdeOptions,
    TrialSeeds,
};
use freefisher::suites::{run_suite, Suite, SuiteOptions, SuiteReport};
use freefisher::{CompactMeasure, Error};

use manifest::RunManifest;
use measure_arg::parse_measure;

const EXIT_VERIFY: i32 = 2;
const EXIT_INPUT: i32 = 3;
const EXIT_RESOURCE: i32 = 4;
const EXIT_NUMERIC: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "freefisher", version, about = "Free Fisher information, free entropy and R-diagonal calculus")]
struct Cli {
    /// Write the JSON run manifest here (default: standard error).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the result table as CSV.
    #[arg(long, global = true)]
    csv: bool,
    /// Master seed for Monte Carlo commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exact rational arithmetic where available (default).
    #[arg(long, global = true, conflicts_with = "float")]
    rational: bool,
    /// Floating-point arithmetic.
    #[arg(long, global = true)]
    float: bool,
    /// Fisher constant κ (default 4π²/3).
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transform a measure and report its moments.
    Measure {
        #[arg(value_enum)]
        op: MeasureOp,
        measure: String,
        /// Dilation factor for `dilate`.
        #[arg(long)]
        lambda: Option<f64>,
        /// Highest moment to report.
        #[arg(long, default_value_t = 8)]
        upto: usize,
        /// Also tabulate the density at this many points.
        #[arg(long, default_value_t = 0)]
        grid: usize,
    },
    /// Free Fisher information κ∫ρ³ of a measure.
    Fisher { measure: String },
    /// Free entropy χ* of a measure.
    Entropy { measure: String },
    /// Right-hand side of a theorem bound.
    Bound {
        #[arg(long)]
        theorem: String,
        /// Measure input (ν, or the law of B for T12_2/T15_2).
        #[arg(long)]
        nu: Option<String>,
        /// Scalar input for T12_*/T15_* instead of a measure.
        #[arg(long)]
        value: Option<f64>,
        #[arg(long, default_value_t = 1)]
        d: u32,
    },
    /// Evaluate *-moments of a single generator `a`.
    Moments {
        #[arg(long, value_enum, default_value_t = Model::Rdiagonal)]
        model: Model,
        /// Law of a*a (default quartercircle(4)).
        #[arg(long)]
        nu: Option<String>,
        /// Word in `a` and `a*`, e.g. "a a* a a*"; repeatable.
        #[arg(long, required = true)]
        word: Vec<String>,
    },
    /// Run an exact verification suite; exit code 2 on failure.
    Verify {
        suite: String,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        nu: Option<String>,
        /// Explicit alternating-word bounds "n,k" for lemma39/prop38.
        #[arg(long)]
        alternation: Option<String>,
    },
    /// Monte Carlo experiments.
    Simulate {
        #[arg(value_enum)]
        model: SimModel,
        #[arg(short = 'N', long = "N", default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        seeds: usize,
        /// Law of a*a for rdiagonal/blockembed, of x for compress.
        #[arg(long)]
        nu: Option<String>,
        /// Block size for compress.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Longest *-word compared for rdiagonal.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Write the first trial's spectrum here, one value per line.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeasureOp {
    Sqrt,
    Square,
    Dilate,
    Moments,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Model {
    Rdiagonal,
    Circular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimModel {
    Rdiagonal,
    Compress,
    Blockembed,
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Core(Error::Input(_) | Error::UnknownGenerator(_) | Error::MissingWord(_)) => EXIT_INPUT,
            Failure::Core(Error::Resource(_)) => EXIT_RESOURCE,
            Failure::Core(_) => EXIT_NUMERIC,
            Failure::Io(_) => EXIT_INPUT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(s) => s.clone(),
        }
    }
}

type Run = Result<(), Failure>;

struct Ctx {
    kappa: FisherConstant,
    exact: bool,
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let kappa = match cli.kappa.map(FisherConstant::new).transpose() {
        Ok(k) => k.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let ctx = Ctx { kappa, exact: !cli.float, seed: cli.seed };
    let mut manifest = RunManifest::new(command_name(&cli.command), params(&cli), kappa.kappa);
    let result = dispatch(&cli.command, &ctx, &mut manifest);
    let code = match &result {
        Ok(()) => manifest.exit_code,
        Err(f) => {
            let _ = writeln!(std::io::stderr(), "error: {}", f.message());
            manifest.details = json!({ "error": f.message() });
            f.code()
        }
    };
    manifest.exit_code = code;
    if result.is_ok() {
        let _ = write!(std::io::stdout(), "{}", manifest.render(cli.csv));
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: cannot write `{}`: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
        }
        None => {
            let _ = writeln!(std::io::stderr(), "{text}");
        }
    }
    ExitCode::from(code as u8)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Measure { .. } => "measure",
        Command::Fisher { .. } => "fisher",
        Command::Entropy { .. } => "entropy",
        Command::Bound { .. } => "bound",
        Command::Moments { .. } => "moments",
        Command::Verify { .. } => "verify",
        Command::Simulate { .. } => "simulate",
    }
}

fn params(cli: &Cli) -> Value {
    json!({
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
        "parsed": format!("{:?}", cli.command),
        "seed": cli.seed,
        "mode": if cli.float { "float" } else { "rational" },
    })
}

fn dispatch(cmd: &Command, ctx: &Ctx, m: &mut RunManifest) -> Run {
    match cmd {
        Command::Measure { op, measure, lambda, upto, grid } => measure_cmd(*op, measure, *lambda, *upto, *grid, ctx, m),
        Command::Fisher { measure } => {
            let mu = parse_measure(measure)?;
            let v = fisher_of_measure(&mu, ctx.kappa)?;
            m.push_tol("fisher", json_real(v), format!("κ∫ρ³ over {}, κ = {}", mu.label(), ctx.kappa.kappa), 1e-10);
            Ok(())
        }
        Command::Entropy { measure } => {
            let mu = parse_measure(measure)?;
            let e = log_energy(&mu)?;
            let v = entropy_of_measure(&mu)?;
            m.push_tol("log_energy", json_real(e), format!("∫∫log|s−t| over {}", mu.label()), 1e-10);
            m.push_tol("entropy", json_real(v), "log energy + 3/4 + log(2π)/2", 1e-10);
            Ok(())
        }
        Command::Bound { theorem, nu, value, d } => {
            let id: TheoremId = theorem.parse()?;
            let inp = match (nu, value) {
                (Some(n), None) => BoundInput::Measure(parse_measure(n)?),
                (None, Some(v)) => BoundInput::Value(*v),
                _ => return Err(Error::Input("give exactly one of --nu and --value".into()).into()),
            };
            let b = theorem_bound(id, &inp, *d, ctx.kappa)?;
            m.push_tol(format!("{id}(d={d})"), json_real(b.value), b.formula_trace.clone(), 1e-8);
            m.details = serde_json::to_value(&b).unwrap_or(Value::Null);
            Ok(())
        }
        Command::Moments { model, nu, word } => moments_cmd(*model, nu.as_deref(), word, ctx, m),
        Command::Verify { suite, degree, nu, alternation } => {
            verify_cmd(suite, *degree, nu.as_deref(), alternation.as_deref(), ctx, m)
        }
        Command::Simulate { model, n, seeds, nu, d, max_len, spectrum } => {
            let seeds = TrialSeeds { master: ctx.seed, count: *seeds };
            if seeds.count == 0 {
                return Err(Error::Input("--seeds must be at least 1".into()).into());
            }
            m.seeds = seeds.seeds();
            match model {
                SimModel::Rdiagonal => simulate_rdiagonal(*n, seeds, nu.as_deref(), *max_len, spectrum.as_ref(), ctx, m),
                SimModel::Compress => simulate_compress(*n, seeds, nu.as_deref(), *d, m),
                SimModel::Blockembed => simulate_blockembed(*n, seeds, nu.as_deref(), spectrum.as_ref(), m),
            }
        }
    }
}

fn measure_cmd(op: MeasureOp, spec: &str, lambda: Option<f64>, upto: usize, grid: usize, ctx: &Ctx, m: &mut RunManifest) -> Run {
    let base = parse_measure(spec)?;
    let mu = match op {
        MeasureOp::Sqrt => base.symmetric_square_root()?,
        MeasureOp::Square => base.push_square()?,
        MeasureOp::Dilate => {
            let l = lambda.ok_or_else(|| Error::Input("dilate needs --lambda".into()))?;
            base.dilate(l)?
        }
        MeasureOp::Moments => base,
    };
    let (lo, hi) = mu.support();
    m.push("label", json!(mu.label()), "measure expression");
    m.push("support_lo", json_real(lo), "support");
    m.push("support_hi", json_real(hi), "support");
    m.push("atoms", json!(mu.atoms().len()), "atoms");
    let exact = if ctx.exact { mu.exact_moments(upto) } else { None };
    for k in 0..=upto {
        match &exact {
            Some(ms) => m.push(format!("m{k}"), json!(ms[k].to_string()), "exact moment"),
            None => m.push_tol(format!("m{k}"), json_real(mu.moment(k)?), "∫t^k dμ by quadrature", 1e-10),
        }
    }
    if grid > 0 {
        let step = (hi - lo) / (grid + 1) as f64;
        for i in 1..=grid {
            let x = lo + step * i as f64;
            m.push(format!("density({x:.6})"), json_real(mu.density(x)), "density");
        }
    }
    Ok(())
}

fn moments_cmd(model: Model, nu: Option<&str>, words: &[String], ctx: &Ctx, m: &mut RunManifest) -> Run {
    let nu = match (model, nu) {
        (Model::Circular, Some(_)) => return Err(Error::Input("--nu does not apply to the circular model".into()).into()),
        (_, Some(spec)) => parse_measure(spec)?,
        (_, None) => CompactMeasure::quartercircle(4.0)?,
    };
    let f = DynFunctional::rdiagonal(&nu, ctx.exact)?;
    for text in words {
        let w = Word::parse(text)?;
        if let Some(l) = w.letters().iter().find(|l| l.gen.name() != "a") {
            return Err(Error::UnknownGenerator(l.gen.name().to_string()).into());
        }
        let trace = format!("φ({w}) for R-diagonal a with a*a ~ {}", nu.label());
        match f.evaluate_exact_string(&w)? {
            Some(exact) => m.push(format!("φ({w})"), json!(exact), trace),
            None => {
                let v = f.evaluate(&w)?;
                let shown = if v.im == 0.0 { json_real(v.re) } else { json!([v.re, v.im]) };
                m.push_tol(format!("φ({w})"), shown, trace, 1e-10);
            }
        }
    }
    Ok(())
}

fn verify_cmd(name: &str, degree: Option<usize>, nu: Option<&str>, alt: Option<&str>, ctx: &Ctx, m: &mut RunManifest) -> Run {
    let suite: Suite = name.parse()?;
    let alternation = match alt {
        None => None,
        Some(s) => {
            let (n, k) = s.split_once(',').ok_or_else(|| Error::Input(format!("bad --alternation `{s}`, expected n,k")))?;
            let p = |x: &str| x.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad --alternation `{s}`")));
            match (p(n)?, p(k)?) {
                (0, _) | (_, 0) => return Err(Error::Input("--alternation bounds must be positive".into()).into()),
                nk => Some(nk),
            }
        }
    };
    let nu = nu.map(parse_measure).transpose()?;
    if nu.is_some() && !suite.uses_measure() {
        return Err(Error::Input(format!("{suite} does not take --nu")).into());
    }
    let report = run_suite(suite, &SuiteOptions { degree, alternation, nu, exact: ctx.exact })?;
    record_report(&report, m);
    Ok(())
}

fn record_report(report: &SuiteReport, m: &mut RunManifest) {
    let suite = report.suite;
    for c in &report.checks {
        let what = if c.expect_vanishing { "relations" } else { "control" };
        m.push_tol(
            format!("{what}: {}", c.name),
            json!(format!(
                "{} checked, max violation {:.3e}, {}",
                c.report.relations_checked,
                c.report.max_abs_violation,
                if c.ok { "ok" } else { "FAILED" }
            )),
            format!("degree {}, {}", c.report.degree, if c.report.exact { "exact" } else { "float" }),
            c.report.tolerance,
        );
    }
    for q in &report.quantities {
        m.push(q.name.clone(), json!(q.value), format!("expected {}", q.expected));
    }
    m.push_tol("max_violation", json_real(report.max_violation), format!("{suite} at degree {}", report.degree), 0.0);
    m.push("passed", json!(report.passed), format!("{suite}"));
    m.details = serde_json::to_value(report).unwrap_or(Value::Null);
    if !report.passed {
        m.exit_code = EXIT_VERIFY;
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn write_spectrum(path: &PathBuf, csv: String) -> Run {
    std::fs::write(path, csv).map_err(|e| Failure::Io(format!("cannot write `{}`: {e}", path.display())))
}

fn simulate_rdiagonal(
    n: usize,
    seeds: TrialSeeds,
    nu: Option<&str>,
    max_len: usize,
    spectrum: Option<&PathBuf>,
    ctx: &Ctx,
    m: &mut RunManifest,
) -> Run {
    let nu = nu.map(parse_measure).transpose()?.map_or_else(|| CompactMeasure::quartercircle(4.0), Ok)?;
    let mu = nu.symmetric_square_root()?;
    let kde = KdeOptions { kappa: ctx.kappa, seed: ctx.seed, ..Default::default() };
    let trials = seeds.seeds().into_iter().map(|s| rdiagonal_trial(&nu, n, s, max_len, &kde)).collect::<Result<Vec<_>, _>>()?;
    let ks: Vec<f64> = trials.iter().map(|t| t.ks).collect();
    let fisher: Vec<f64> = trials.iter().map(|t| t.fisher.value).collect();
    let energy: Vec<f64> = trials.iter().map(|t| t.log_energy.value).collect();
    let prov = format!("{} trials of A = U·P, N = {n}, master seed {}", seeds.count, seeds.master);
    m.push("max_ks", json_real(ks.iter().copied().fold(0.0, f64::max)), prov.clone());
    let (fm, fse) = mean_se(&fisher);
    m.push_tol("empirical_fisher", json_real(fm), prov.clone(), fse.max(trials[0].fisher.std_error));
    m.push("fisher_target", json_real(fisher_of_measure(&mu, ctx.kappa)?), format!("κ∫ρ³ over {}", mu.label()));
    let (em, ese) = mean_se(&energy);
    m.push_tol("empirical_log_energy", json_real(em), prov.clone(), ese);
    m.push("log_energy_target", json_real(log_energy(&mu)?), format!("∫∫log|s−t| over {}", mu.label()));
    let traces: Vec<_> = trials.iter().map(|t| t.traces.clone()).collect();
    let cmp = compare_star_moments(&nu, &traces, max_len, seeds.master, 2e-3)?;
    let passed = cmp.iter().filter(|c| c.pass).count();
    m.push("star_moments_within_tolerance", json!(format!("{passed}/{}", cmp.len())), "3·SE + 2e-3 against the symbolic engine");
    m.details = json!({ "trials": trials, "moments": cmp });
    if let Some(path) = spectrum {
        let (a, _) = rdiagonal_matrix(n, &nu, seeds.seeds()[0])?;
        write_spectrum(path, embedded_spectrum(&a.matrix)?.to_csv())?;
    }
    Ok(())
}

fn simulate_compress(n: usize, seeds: TrialSeeds, mu: Option<&str>, d: usize, m: &mut RunManifest) -> Run {
    let mu = mu.map(parse_measure).transpose()?.map_or_else(|| CompactMeasure::semicircle(2.0), Ok)?;
    let (mut resid, mut second, mut first) = (Vec::new(), Vec::new(), Vec::new());
    for s in seeds.seeds() {
        let blocks = compressed_entries(&mu, d, n, s)?;
        resid.push(compression_freeness_residual(&blocks));
        let b = reassemble_blocks(&blocks);
        let nd = (n * d) as f64;
        let b2 = &b * &b;
        second.push((0..b.nrows()).map(|i| b2[(i, i)].re).sum::<f64>() / nd);
        first.push((0..n).map(|i| blocks[0][0][(i, i)].re).sum::<f64>() / n as f64);
    }
    let prov = format!("{} compressions, d = {d}, N = {n}, master seed {}", seeds.count, seeds.master);
    m.push("max_freeness_residual", json_real(resid.iter().copied().fold(0.0, f64::max)), prov.clone());
    let (sm, sse) = mean_se(&second);
    m.push_tol("tr(B^2)", json_real(sm), prov.clone(), sse);
    m.push("m2_target", json_real(mu.moment(2)?), format!("∫t²dμ over {}", mu.label()));
    let (fm, fse) = mean_se(&first);
    m.push_tol("tr(b11)", json_real(fm), prov, fse);
    m.push("m1_target", json_real(mu.moment(1)?), format!("∫t dμ over {}", mu.label()));
    Ok(())
}

fn simulate_blockembed(n: usize, seeds: TrialSeeds, nu: Option<&str>, spectrum: Option<&PathBuf>, m: &mut RunManifest) -> Run {
    let nu = nu.map(parse_measure).transpose()?.map_or_else(|| CompactMeasure::quartercircle(4.0), Ok)?;
    let mu = nu.symmetric_square_root()?;
    let (mut gap, mut ks) = (0.0f64, 0.0f64);
    for (i, s) in seeds.seeds().into_iter().enumerate() {
        let (a, _) = rdiagonal_matrix(n, &nu, s)?;
        let eig = hermitian_spectrum(&block_embed_matrix(&a.matrix), "block-embedding")?;
        let sv = singular_values(&a.matrix)?;
        let mut pm: Vec<f64> = sv.values.iter().map(|x| -x).chain(sv.values.iter().copied()).collect();
        pm.sort_by(|x, y| x.total_cmp(y));
        gap = eig.values.iter().zip(&pm).map(|(x, y)| (x - y).abs()).fold(gap, f64::max);
        ks = ks.max(freefisher::rmt::kolmogorov_distance(&eig, &mu));
        if i == 0 {
            if let Some(path) = spectrum {
                write_spectrum(path, eig.to_csv())?;
            }
        }
    }
    let prov = format!("{} block embeddings of A = U·P, N = {n}, master seed {}", seeds.count, seeds.master);
    m.push_tol("max |eig − (±sv)|", json_real(gap), prov.clone(), 1e-10);
    m.push("max_ks", json_real(ks), prov);
    m.push("t11_target", json_real(min_fisher_thm11(&nu, FisherConstant::default())?), "2κ∫tρ_ν³");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_report_sets_exit_code_2() {
        let mut report = run_suite(Suite::Lemma39, &SuiteOptions { degree: Some(4), ..Default::default() }).unwrap();
        let mut m = RunManifest::new("verify", Value::Null, 1.0);
        record_report(&report, &mut m);
        assert_eq!(m.exit_code, 0);
        report.passed = false;
        let mut m = RunManifest::new("verify", Value::Null, 1.0);
        record_report(&report, &mut m);
        assert_eq!(m.exit_code, EXIT_VERIFY);
        assert_eq!(m.details["passed"], false);
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::Input("x".into())).code(), EXIT_INPUT);
        assert_eq!(Failure::from(Error::Resource("x".into())).code(), EXIT_RESOURCE);
        assert_eq!(Failure::Io("x".into()).code(), EXIT_INPUT);
    }
}
