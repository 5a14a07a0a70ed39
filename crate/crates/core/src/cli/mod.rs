//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verify check failed, 2 bad arguments or spec,
//! 3 domain error, 4 numerical non-convergence.

pub mod format;
pub mod spec;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::mc::{self, Agreement, MCConfig, MCEstimate};
use crate::measures::{Measure, MeasureConfig, MeasureValue};
use crate::par::{self, Execution};
use crate::properties::{self, CheckSummary, VerifyConfig};
use crate::quadrature::QuadratureConfig;

use format::{full, sig12};
pub use spec::{parse_spec, DistSpec, LastStage, Stage};

pub const VERSION_LINE: &str = concat!("# pastvar ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(
    name = "pastvar",
    version,
    about = "Past entropy, past varentropy and reversed-hazard measures of lifetime distributions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, value_name = "TOL")]
    pub abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, value_name = "TOL")]
    pub rel_tol: Option<f64>,
    /// Maximum number of adaptive bisections per integral.
    #[arg(long, global = true, value_name = "N")]
    pub max_subdiv: Option<usize>,
    /// Monte Carlo sample size.
    #[arg(long, global = true, value_name = "N")]
    pub mc_samples: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Machine-readable output; `curve` defaults to csv, the others to text.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Skip analytic shortcuts and always integrate.
    #[arg(long, global = true)]
    pub numerical_only: bool,
    /// Run on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one measure at one inspection time.
    Eval(EvalArgs),
    /// Tabulate measures over a uniform grid of inspection times.
    Curve(CurveArgs),
    /// Run the property checks that apply to a distribution.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of a measure, compared with the deterministic value.
    Mc(McArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Distribution spec, e.g. "family=power k=2 | prhr a=3".
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub measure: String,
    /// Inspection time; not needed for entropy and varentropy.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Order of the generalized reversed hazard.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub dist: String,
    /// One or more measures, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub measure: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, alias = "n-points", default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub dist: String,
    /// Only report checks whose name starts with one of these prefixes.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub measure: String,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::UnknownFamily(_) => 2,
        Error::NonConvergence { .. } => 4,
        _ => 3,
    }
}

/// Numerical settings derived from the global flags.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub measure: MeasureConfig,
    pub execution: Execution,
    pub mc: MCConfig,
}

impl Settings {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let d = QuadratureConfig::default();
        let quadrature = QuadratureConfig {
            abs_tol: cli.abs_tol.unwrap_or(d.abs_tol),
            rel_tol: cli.rel_tol.unwrap_or(d.rel_tol),
            max_subdivisions: cli.max_subdiv.unwrap_or(d.max_subdivisions),
            ..d
        };
        quadrature.validate()?;
        let execution = if cli.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        };
        let dm = MCConfig::default();
        let mc = MCConfig {
            n_samples: cli.mc_samples.unwrap_or(dm.n_samples),
            seed: cli.seed.unwrap_or(dm.seed),
            execution,
            ..dm
        };
        Ok(Self {
            measure: MeasureConfig {
                quadrature,
                use_closed_forms: !cli.numerical_only,
            },
            execution,
            mc,
        })
    }

    pub fn verify(&self) -> VerifyConfig {
        VerifyConfig {
            measure: self.measure,
            execution: self.execution,
            ..VerifyConfig::default()
        }
    }
}

fn needs_t(m: Measure) -> bool {
    !matches!(m, Measure::Entropy | Measure::Varentropy)
}

fn resolve_t(m: Measure, t: Option<f64>) -> Result<f64> {
    match t {
        Some(t) => Ok(t),
        None if !needs_t(m) => Ok(f64::NAN),
        None => Err(Error::Parse(format!("`{}` needs --t", m.name()))),
    }
}

/// Values of several measures over a strictly increasing grid of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub spec: String,
    pub measures: Vec<String>,
    pub t: Vec<f64>,
    /// `cells[i][j]` is measure `j` at `t[i]`.
    pub cells: Vec<Vec<MeasureValue>>,
}

impl CurveTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        for m in &self.measures {
            header.extend([m.clone(), format!("{m}_err"), format!("{m}_method")]);
        }
        w.write_record(&header).expect("in-memory write");
        for (t, row) in self.t.iter().zip(&self.cells) {
            // Measures without an inspection time leave the column empty.
            let mut rec = vec![if t.is_nan() { String::new() } else { full(*t) }];
            for c in row {
                rec.extend([full(c.value), full(c.numerical_error), c.method.to_string()]);
            }
            w.write_record(&rec).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
        format!("{VERSION_LINE}\n{body}")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<_> = self
            .t
            .iter()
            .zip(&self.cells)
            .map(|(t, row)| {
                let mut obj = serde_json::Map::new();
                obj.insert("t".into(), json!(t));
                for (m, c) in self.measures.iter().zip(row) {
                    obj.insert(m.clone(), json!(c));
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        pretty(&json!({
            "version": env!("CARGO_PKG_VERSION"),
            "dist": self.spec,
            "measures": self.measures,
            "rows": rows,
        }))
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Uniform grid from `t_min` to `t_max` inclusive.
pub fn t_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(Error::Parse(format!(
            "need finite t-min < t-max, got {t_min} and {t_max}"
        )));
    }
    if points < 2 {
        return Err(Error::Parse(format!("need at least 2 points, got {points}")));
    }
    let h = (t_max - t_min) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| t_min + i as f64 * h).collect();
    grid[points - 1] = t_max;
    Ok(grid)
}

pub fn cmd_eval(args: &EvalArgs, s: &Settings) -> Result<(DistSpec, Measure, f64, MeasureValue)> {
    let spec = parse_spec(&args.dist)?;
    let m = Measure::parse(&args.measure, args.alpha)?;
    let t = resolve_t(m, args.t)?;
    let v = m.evaluate(&*spec.dist, spec.prhr(), t, &s.measure)?;
    Ok((spec, m, t, v))
}

pub fn cmd_curve(args: &CurveArgs, s: &Settings) -> Result<CurveTable> {
    let spec = parse_spec(&args.dist)?;
    let measures = args
        .measure
        .iter()
        .map(|m| Measure::parse(m.trim(), args.alpha))
        .collect::<Result<Vec<_>>>()?;
    let grid = t_grid(args.t_min, args.t_max, args.points)?;
    let k = measures.len();
    let flat = par::map_range(s.execution, grid.len() * k, |i| {
        measures[i % k].evaluate(&*spec.dist, spec.prhr(), grid[i / k], &s.measure)
    });
    let flat = flat.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CurveTable {
        spec: spec.text.clone(),
        measures: measures.iter().map(|m| m.name().to_string()).collect(),
        t: grid,
        cells: flat.chunks(k).map(<[_]>::to_vec).collect(),
    })
}

/// The standard suite plus the checks belonging to the outermost stage.
pub fn verification_suite(spec: &DistSpec, cfg: &VerifyConfig) -> Vec<CheckSummary> {
    let mut out = properties::standard_suite(&spec.dist, cfg);
    let summarize = |name: &str, r: Result<properties::CheckReport>| match r {
        Ok(r) => r.summary(),
        Err(e) => CheckSummary::from_error(name, &e),
    };
    match &spec.last {
        LastStage::Family => {}
        LastStage::Linear(tr) => {
            let grid = properties::quantile_grid(&**tr.base(), 0.05, 0.95, 10);
            out.push(summarize(
                "linear-transform",
                properties::check_linear_transform(tr.base(), tr.scale(), tr.shift(), &grid, cfg),
            ));
        }
        LastStage::Prhr(fam) => {
            let grid = properties::quantile_grid(fam, 0.05, 0.95, 10);
            out.push(summarize(
                "prhr-gamma-vs-direct",
                properties::check_prhr_dual_route(fam, &grid, cfg),
            ));
            out.push(summarize(
                "prhr-proportionality",
                properties::check_prhr_proportionality(fam, &grid),
            ));
        }
        LastStage::Monotone(tr) => {
            let grid = properties::quantile_grid(tr, 0.05, 0.95, 10);
            out.push(summarize(
                "monotonic-transform",
                properties::check_monotonic_transform(tr, &grid, cfg),
            ));
        }
    }
    out
}

pub fn cmd_verify(args: &VerifyArgs, s: &Settings) -> Result<(DistSpec, Vec<CheckSummary>)> {
    let spec = parse_spec(&args.dist)?;
    let mut checks = verification_suite(&spec, &s.verify());
    if !args.only.is_empty() {
        checks.retain(|c| args.only.iter().any(|p| c.name.starts_with(p.as_str())));
    }
    Ok((spec, checks))
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub dist: String,
    pub measure: String,
    pub t: Option<f64>,
    pub estimate: MCEstimate,
    pub reference: Option<MeasureValue>,
    pub z_score: Option<f64>,
    pub agreement: Option<Agreement>,
    pub seed: u64,
    pub n_samples: usize,
    pub rng: &'static str,
}

pub fn cmd_mc(args: &McArgs, s: &Settings) -> Result<McReport> {
    let spec = parse_spec(&args.dist)?;
    let m = Measure::parse(&args.measure, 0.0)?;
    let t = resolve_t(m, args.t)?;
    let estimate = mc::mc_measure(m, &*spec.dist, t, &s.mc)?;
    let reference = m.evaluate(&*spec.dist, spec.prhr(), t, &s.measure).ok();
    Ok(McReport {
        dist: spec.text,
        measure: m.name().to_string(),
        t: needs_t(m).then_some(t),
        z_score: reference.map(|r| estimate.z_score(r.value)),
        agreement: reference.map(|r| Agreement::classify(&estimate, r.value)),
        reference,
        estimate,
        seed: s.mc.seed,
        n_samples: s.mc.n_samples,
        rng: mc::RNG_ALGORITHM,
    })
}

fn render_eval(spec: &DistSpec, m: Measure, t: f64, v: &MeasureValue, fmt: Option<Format>) -> String {
    match fmt {
        None => {
            let mut s = format!("dist: {}\nmeasure: {}\n", spec.text, m.name());
            if needs_t(m) {
                s += &format!("t: {}\n", sig12(t));
            }
            s + &format!(
                "value: {}\nnumerical_error: {}\nmethod: {}\n",
                sig12(v.value),
                sig12(v.numerical_error),
                v.method
            )
        }
        Some(Format::Csv) => CurveTable {
            spec: spec.text.clone(),
            measures: vec![m.name().to_string()],
            t: vec![t],
            cells: vec![vec![*v]],
        }
        .to_csv(),
        Some(Format::Json) => pretty(&json!({
            "version": env!("CARGO_PKG_VERSION"),
            "dist": spec.text,
            "measure": m.name(),
            "t": needs_t(m).then_some(t),
            "value": v.value,
            "numerical_error": v.numerical_error,
            "method": v.method,
        })),
    }
}

fn render_verify(spec: &DistSpec, checks: &[CheckSummary], fmt: Option<Format>) -> String {
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    match fmt {
        None => {
            let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
            let mut s = format!("dist: {}\n", spec.text);
            s += &format!(
                "{:<width$}  {:<10}  {:<6}  {:<18}  note\n",
                "check", "applicable", "passed", "max_residual"
            );
            for c in checks {
                let (passed, residual) = if c.applicable && !c.max_residual.is_nan() {
                    (yes_no(c.passed), sig12(c.max_residual))
                } else if c.applicable {
                    (yes_no(c.passed), "-".to_string())
                } else {
                    ("-", "-".to_string())
                };
                s += &format!(
                    "{:<width$}  {:<10}  {:<6}  {:<18}  {}\n",
                    c.name,
                    yes_no(c.applicable),
                    passed,
                    residual,
                    c.note
                );
            }
            let applicable = checks.iter().filter(|c| c.applicable).count();
            let failed = checks.iter().filter(|c| c.applicable && !c.passed).count();
            s + &format!(
                "{} checks: {} passed, {} failed, {} not applicable\n",
                checks.len(),
                applicable - failed,
                failed,
                checks.len() - applicable
            )
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["check", "applicable", "passed", "max_residual", "note"])
                .expect("in-memory write");
            for c in checks {
                w.write_record([
                    c.name.as_str(),
                    &c.applicable.to_string(),
                    &c.passed.to_string(),
                    &if c.max_residual.is_nan() { String::new() } else { full(c.max_residual) },
                    &c.note,
                ])
                .expect("in-memory write");
            }
            let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
            format!("{VERSION_LINE}\n{body}")
        }
        Some(Format::Json) => pretty(&json!({
            "version": env!("CARGO_PKG_VERSION"),
            "dist": spec.text,
            "passed": suite_passed(checks),
            "checks": checks,
        })),
    }
}

fn suite_passed(checks: &[CheckSummary]) -> bool {
    checks.iter().all(|c| !c.applicable || c.passed)
}

fn render_mc(r: &McReport, fmt: Option<Format>) -> String {
    let opt = |x: Option<f64>, f: fn(f64) -> String| x.map(f).unwrap_or_default();
    let agreement = |a: Option<Agreement>| match a {
        Some(Agreement::Agree) => "agree",
        Some(Agreement::Flagged) => "flagged",
        Some(Agreement::Disagree) => "disagree",
        None => "",
    };
    match fmt {
        None => {
            let mut s = format!("dist: {}\nmeasure: {}\n", r.dist, r.measure);
            if let Some(t) = r.t {
                s += &format!("t: {}\n", sig12(t));
            }
            s += &format!(
                "estimate: {}\nstd_error: {}\nn_effective: {}\nrng: {} (seed {})\n",
                sig12(r.estimate.mean),
                sig12(r.estimate.std_error),
                r.estimate.n_effective,
                r.rng,
                r.seed
            );
            match r.reference {
                Some(v) => {
                    s + &format!(
                        "reference: {} ({})\nz_score: {}\nagreement: {}\n",
                        sig12(v.value),
                        v.method,
                        sig12(r.z_score.unwrap_or(f64::NAN)),
                        agreement(r.agreement)
                    )
                }
                None => s + "reference: unavailable\n",
            }
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "t",
                "measure",
                "estimate",
                "std_error",
                "n_effective",
                "reference",
                "reference_method",
                "z_score",
                "agreement",
                "seed",
                "rng",
            ])
            .expect("in-memory write");
            w.write_record([
                opt(r.t, full),
                r.measure.clone(),
                full(r.estimate.mean),
                full(r.estimate.std_error),
                r.estimate.n_effective.to_string(),
                opt(r.reference.map(|v| v.value), full),
                r.reference.map(|v| v.method.to_string()).unwrap_or_default(),
                opt(r.z_score, full),
                agreement(r.agreement).to_string(),
                r.seed.to_string(),
                r.rng.to_string(),
            ])
            .expect("in-memory write");
            let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
            format!("{VERSION_LINE}\n{body}")
        }
        Some(Format::Json) => {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["version"] = json!(env!("CARGO_PKG_VERSION"));
            pretty(&v)
        }
    }
}

/// Runs a parsed command, returning the rendered output and exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32)> {
    let s = Settings::from_cli(cli)?;
    Ok(match &cli.command {
        Command::Eval(a) => {
            let (spec, m, t, v) = cmd_eval(a, &s)?;
            (render_eval(&spec, m, t, &v, cli.format), 0)
        }
        Command::Curve(a) => {
            let table = cmd_curve(a, &s)?;
            let text = match cli.format {
                Some(Format::Json) => table.to_json(),
                _ => table.to_csv(),
            };
            (text, 0)
        }
        Command::Verify(a) => {
            let (spec, checks) = cmd_verify(a, &s)?;
            let code = if suite_passed(&checks) { 0 } else { 1 };
            (render_verify(&spec, &checks, cli.format), code)
        }
        Command::Mc(a) => (render_mc(&cmd_mc(a, &s)?, cli.format), 0),
    })
}

/// Entry point shared by the binary: parses `args`, runs, writes output and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return 3;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
