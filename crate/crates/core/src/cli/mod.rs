//! The `qhstop` command line: reads a JSON config, runs one pipeline and
//! writes CSV or JSON tables.
//!
//! Exit codes: 0 ok, 2 validation, 3 numerical failure, 4 i/o. Errors are
//! printed to stderr as `{"error": {"kind", "code", "message"}}`.

pub mod output;

use crate::error::{Error, Result};
use crate::estimation::{estimate_beta, EstimateResult, EstimationSpec};
use crate::hazard;
use crate::identification::{self, Grid, IdentifiedSet, RichData};
use crate::model::{evaluate_welfare, solve_equilibrium, EquilibriumProfile, Preferences, StoppingProblem, TerminalValue};
use crate::rationalize::{
    moment_renormalize, rationalize_naive, rationalize_sophisticated, NaiveOptions, RationalizationResult, StoppingData,
};
use crate::simulate::simulate;
use clap::Parser;
use output::{emit_plot_data, num, write_output, BarSeries, Format, Meta, PlotKind, PlotSource, Table};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Parser)]
#[command(name = "qhstop", version, about = "Solve, rationalize, identify and estimate quasi-hyperbolic stopping problems")]
pub struct Args {
    /// JSON run config
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed for Monte-Carlo checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed-point tolerance for the naive construction
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Do not print a summary to stdout
    #[arg(long)]
    pub quiet: bool,
}

/// A problem given inline or as `{"path": "..."}` relative to the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Input<T> {
    Inline(T),
    File { path: PathBuf },
}

impl<T: for<'de> Deserialize<'de> + Clone> Input<T> {
    fn load(&self, base: &Path) -> Result<T> {
        match self {
            Input::Inline(x) => Ok(x.clone()),
            Input::File { path } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| Error::io(&full, e))?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }
}

/// Rich data given directly, from a file, or as the equilibrium of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    Observed(RichData),
    File { path: PathBuf },
    Solved { problem: Input<StoppingProblem>, prefs: Preferences },
}

impl DataSource {
    fn load(&self, base: &Path) -> Result<RichData> {
        match self {
            DataSource::Observed(d) => Ok(d.clone()),
            DataSource::File { path } => Input::<RichData>::File { path: path.clone() }.load(base),
            DataSource::Solved { problem, prefs } => {
                Ok(RichData::from_profile(&solve_equilibrium(&problem.load(base)?, prefs)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sophisticated,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Moments {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeProfile {
    pub weight: f64,
    pub p: Vec<f64>,
}

/// The JSON config: one command and its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Solve {
        problem: Input<StoppingProblem>,
        prefs: Preferences,
        /// Monte-Carlo paths for a simulation check (uses `--seed`).
        #[serde(default)]
        simulate_paths: Option<usize>,
        #[serde(default)]
        plot: Vec<PlotKind>,
    },
    Welfare {
        problem: Input<StoppingProblem>,
        prefs: Preferences,
    },
    Rationalize {
        p: Vec<f64>,
        prefs: Preferences,
        /// Self T's continuation value `ȳ` (finite).
        terminal_value: f64,
        /// Defaults to sophisticated when `β̂ = β`, naive when `β̂ = 1`.
        #[serde(default)]
        method: Option<Method>,
        #[serde(default)]
        c1: Option<f64>,
        #[serde(default)]
        c2: Option<f64>,
        #[serde(default)]
        max_iter: Option<usize>,
        /// Rescale the law to this mean and standard deviation afterwards.
        #[serde(default)]
        moments: Option<Moments>,
    },
    Identify {
        data: DataSource,
        #[serde(default)]
        beta_grid: Option<Grid>,
        #[serde(default)]
        delta_grid: Option<Grid>,
        /// When the penalty is observed, require `v_T` to equal it.
        #[serde(default)]
        terminal_value: Option<TerminalValue>,
        #[serde(default)]
        plot: Vec<PlotKind>,
    },
    Estimate {
        specs: Vec<EstimationSpec>,
        data: Vec<f64>,
        #[serde(default)]
        plot: Vec<PlotKind>,
    },
    Aggregate {
        types: Vec<TypeProfile>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Welfare { .. } => "welfare",
            Command::Rationalize { .. } => "rationalize",
            Command::Identify { .. } => "identify",
            Command::Estimate { .. } => "estimate",
            Command::Aggregate { .. } => "aggregate",
        }
    }
}

/// Parsed config plus the run options from the flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// Directory that relative input paths resolve against.
    pub base_dir: PathBuf,
    pub config_bytes: Vec<u8>,
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub quiet: bool,
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self> {
        let bytes = std::fs::read(&args.config).map_err(|e| Error::io(&args.config, e))?;
        let command: Command = serde_json::from_slice(&bytes)?;
        if let Some(tol) = args.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::invalid(format!("--tol must be positive, got {tol}")));
            }
        }
        if args.threads == Some(0) {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        Ok(RunConfig {
            command,
            base_dir: args.config.parent().map(Path::to_path_buf).unwrap_or_default(),
            config_bytes: bytes,
            out: args.out.clone(),
            format: args.format,
            seed: args.seed,
            tol: args.tol,
            threads: args.threads,
            quiet: args.quiet,
        })
    }

    fn naive_tol(&self) -> f64 {
        self.tol.unwrap_or(NaiveOptions::default().tol)
    }

    fn meta(&self) -> Meta {
        Meta::new(
            &self.config_bytes,
            self.seed,
            vec![
                ("naive_tol".into(), self.naive_tol()),
                ("consistency_slack".into(), identification::SLACK),
                ("zero_band_tol".into(), identification::ZERO_BAND_TOL),
                ("mass_tol".into(), crate::distributions::MASS_TOL),
            ],
        )
    }
}

/// Files written by a run plus a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs one config; the thread pool is local to the call.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    pool.install(|| dispatch(config))
}

struct Writer<'a> {
    config: &'a RunConfig,
    meta: Meta,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write<T: Serialize>(&mut self, name: &str, table: &Table, json: &T) -> Result<()> {
        let path = write_output(&self.config.out, name, self.config.format, &self.meta, table, json)?;
        self.files.push(path);
        Ok(())
    }

    // plot files are always CSV
    fn write_plot(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = write_output(&self.config.out, name, Format::Csv, &self.meta, table, &())?;
        self.files.push(path);
        Ok(())
    }
}

fn dispatch(config: &RunConfig) -> Result<RunReport> {
    let mut w = Writer { config, meta: config.meta(), files: Vec::new() };
    let base = &config.base_dir;
    let summary = match &config.command {
        Command::Solve { problem, prefs, simulate_paths, plot } => {
            let problem = problem.load(base)?;
            let profile = solve_equilibrium(&problem, prefs)?;
            w.write("profile", &profile_table(&profile), &profile)?;
            let mut summary = format!("p = {:?}", profile.p);
            if let Some(paths) = *simulate_paths {
                if paths == 0 {
                    return Err(Error::invalid("simulate_paths must be positive"));
                }
                let sim = simulate(&problem, &profile, paths, config.seed);
                let freq = sim.frequencies();
                let se = sim.standard_errors(&profile.p);
                let mut t = Table::new(&["t", "at_risk", "stopped", "frequency", "p", "se"]);
                for i in 0..profile.horizon() {
                    t.push(vec![
                        (i + 1).to_string(),
                        sim.at_risk[i].to_string(),
                        sim.stopped[i].to_string(),
                        num(freq[i]),
                        num(profile.p[i]),
                        num(se[i]),
                    ]);
                }
                w.write("simulation", &t, &sim)?;
                summary.push_str(&format!(", max |z| = {:.3}", sim.max_z(&profile.p)));
            }
            for kind in plot {
                let (q, _) = hazard::unconditional(&profile.p);
                let series = [BarSeries { label: "model".into(), q, p: profile.p.clone() }];
                w.write_plot(&format!("plot_{}", kind_name(*kind)), &emit_plot_data(PlotSource::Bars(&series), *kind)?)?;
            }
            summary
        }
        Command::Welfare { problem, prefs } => {
            let problem = problem.load(base)?;
            let profile = solve_equilibrium(&problem, prefs)?;
            let report = evaluate_welfare(&problem, prefs, &profile)?;
            let mut t = Table::new(&["t", "v", "p", "w"]);
            for i in 0..profile.horizon() {
                t.push(vec![(i + 1).to_string(), num(profile.v[i]), num(profile.p[i]), num(report.self_values[i])]);
            }
            w.write("welfare", &t, &report)?;
            let mut s = Table::new(&["quantity", "value"]);
            s.push(vec!["self1_value_beta".into(), num(report.self1_value_beta)]);
            s.push(vec!["post_deadline_value".into(), num(report.post_deadline_value)]);
            s.push(vec!["mandatory".into(), report.mandatory.to_string()]);
            if config.format == Format::Csv {
                w.write("welfare_summary", &s, &())?;
            }
            format!("W_1 = {}, self-1 value = {}", report.self_values[0], report.self1_value_beta)
        }
        Command::Rationalize { p, prefs, terminal_value, method, c1, c2, max_iter, moments } => {
            let data = StoppingData::new(p.clone())?;
            let method = match method {
                Some(m) => *m,
                None if prefs.is_sophisticated() => Method::Sophisticated,
                None if prefs.is_fully_naive() => Method::Naive,
                None => {
                    return Err(Error::invalid(
                        "rationalization needs beta_hat = beta (sophisticated) or beta_hat = 1 (naive)",
                    ))
                }
            };
            let mut result = match method {
                Method::Sophisticated => rationalize_sophisticated(&data, prefs, *terminal_value, *c1)?,
                Method::Naive => {
                    let d = NaiveOptions::default();
                    let opts = NaiveOptions {
                        c1: c1.unwrap_or(d.c1),
                        c2: c2.unwrap_or(d.c2),
                        tol: config.naive_tol(),
                        max_iter: max_iter.unwrap_or(d.max_iter),
                    };
                    rationalize_naive(&data, prefs, *terminal_value, &opts)?
                }
            };
            if let Some(m) = moments {
                result = moment_renormalize(&result, m.mean, m.sd)?;
            }
            let check = solve_equilibrium(&result.problem()?, &result.prefs)?;
            let err = check.p.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            w.write("law", &law_table(&result)?, &result)?;
            if config.format == Format::Csv {
                w.write("profile", &profile_table(&result.profile), &())?;
            }
            format!("{method:?} law with round-trip error {err:e}")
        }
        Command::Identify { data, beta_grid, delta_grid, terminal_value, plot } => {
            let data = data.load(base)?;
            if let Some(tv) = terminal_value {
                if !identification::check_terminal(&data, *tv) {
                    return Err(Error::invalid(format!(
                        "v_T = {} does not match the observed terminal value",
                        data.v[data.horizon() - 1]
                    )));
                }
            }
            let bg = beta_grid.unwrap_or_else(Grid::default_beta);
            let dg = delta_grid.unwrap_or_else(Grid::default_delta);
            let set = identification::identified_set(&data, &bg, &dg)?;
            w.write("region", &emit_plot_data(PlotSource::Region(&set), PlotKind::Region)?, &set)?;
            if let Some(wit) = &set.witness {
                if config.format == Format::Csv {
                    let mut t = Table::new(&["beta", "delta", "point", "weight"]);
                    if let crate::distributions::Distribution::Discrete(d) = &wit.distribution {
                        for (x, f) in d.points().iter().zip(d.weights()) {
                            t.push(vec![num(wit.beta), num(wit.delta), num(*x), num(*f)]);
                        }
                    }
                    w.write("witness", &t, &())?;
                }
            }
            for kind in plot {
                w.write_plot(&format!("plot_{}", kind_name(*kind)), &emit_plot_data(PlotSource::Region(&set), *kind)?)?;
            }
            region_summary(&set)
        }
        Command::Estimate { specs, data, plot } => {
            if specs.is_empty() {
                return Err(Error::invalid("estimate needs at least one spec"));
            }
            let results: Vec<EstimateResult> = specs.iter().map(|s| estimate_beta(s, data)).collect::<Result<_>>()?;
            let mut t = Table::new(&["model", "criterion", "beta_hat", "criterion_value", "reported_value"]);
            for (s, r) in specs.iter().zip(&results) {
                t.push(vec![
                    s.label(),
                    format!("{:?}", s.criterion).to_lowercase(),
                    num(r.beta_hat),
                    num(r.criterion_value),
                    num(r.reported_value),
                ]);
            }
            let json: Vec<_> = specs.iter().zip(&results).map(|(s, r)| serde_json::json!({"spec": s, "estimate": r})).collect();
            w.write("estimates", &t, &json)?;
            let curves: Vec<(String, Vec<_>)> = specs
                .iter()
                .zip(&results)
                .map(|(s, r)| (format!("{} {:?}", s.label(), s.criterion).to_lowercase(), r.per_beta_curve.clone()))
                .collect();
            for kind in plot {
                w.write_plot(&format!("plot_{}", kind_name(*kind)), &emit_plot_data(PlotSource::Curve(&curves), *kind)?)?;
            }
            let hats: Vec<String> = results.iter().map(|r| r.beta_hat.to_string()).collect();
            format!("beta estimates {}", hats.join(", "))
        }
        Command::Aggregate { types } => {
            let profiles: Vec<(f64, Vec<f64>)> = types.iter().map(|t| (t.weight, t.p.clone())).collect();
            let agg = identification::aggregate_mixture(&profiles)?;
            let mut t = Table::new(&["t", "q", "p"]);
            for i in 0..agg.p.len() {
                t.push(vec![(i + 1).to_string(), num(agg.q[i]), num(agg.p[i])]);
            }
            t.push(vec!["never".into(), num(agg.residual), String::new()]);
            w.write("aggregate", &t, &agg)?;
            format!("aggregate p = {:?}", agg.p)
        }
    };
    Ok(RunReport { files: w.files, summary })
}

fn kind_name(kind: PlotKind) -> &'static str {
    match kind {
        PlotKind::Bars => "bars",
        PlotKind::Region => "region",
        PlotKind::Curve => "curve",
    }
}

fn profile_table(profile: &EquilibriumProfile) -> Table {
    let (q, _) = hazard::unconditional(&profile.p);
    let mut t = Table::new(&["t", "v_t", "c_t", "p_t", "q_t"]);
    for i in 0..profile.horizon() {
        t.push(vec![(i + 1).to_string(), num(profile.v[i]), num(profile.c[i]), num(profile.p[i]), num(q[i])]);
    }
    t
}

fn law_table(result: &RationalizationResult) -> Result<Table> {
    use crate::distributions::Distribution;
    let mut t = Table::new(&["lo", "hi", "weight"]);
    let mut push_flat = |law: &Distribution, shift: f64, scale: f64| -> Result<()> {
        match law {
            Distribution::Discrete(d) => {
                for (x, f) in d.points().iter().zip(d.weights()) {
                    let y = scale * x + shift;
                    t.push(vec![num(y), num(y), num(*f)]);
                }
            }
            Distribution::PiecewiseUniform(pw) => {
                for s in pw.segments() {
                    t.push(vec![num(scale * s.lo + shift), num(scale * s.hi + shift), num(s.weight)]);
                }
            }
            other => return Err(Error::invalid(format!("cannot tabulate {other:?}"))),
        }
        Ok(())
    };
    match &result.distribution {
        Distribution::Affine(a) => push_flat(&a.inner, a.shift, a.scale)?,
        other => push_flat(other, 0.0, 1.0)?,
    }
    Ok(t)
}

fn region_summary(set: &IdentifiedSet) -> String {
    match set.beta_interval(1.0) {
        Some((lo, hi)) => format!("{} consistent cells; beta in [{lo}, {hi}] at delta nearest 1", set.count()),
        None => format!("{} consistent cells", set.count()),
    }
}

/// Machine-readable error for stderr.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({
        "error": { "kind": err.kind(), "code": err.exit_code(), "message": err.to_string() }
    })
    .to_string()
}

/// Entry point for the binary: parses flags, runs, prints, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = Error::Invalid(e.to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return err.exit_code();
        }
    };
    match RunConfig::from_args(&args).and_then(|c| run(&c).map(|r| (c, r))) {
        Ok((config, report)) => {
            if !config.quiet {
                println!("{}: {}", config.command.name(), report.summary);
                for f in &report.files {
                    println!("wrote {}", f.display());
                }
            }
            0
        }
        Err(err) => {
            eprintln!("{}", error_json(&err));
            err.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_fields() {
        let ok = r#"{"command":"aggregate","types":[{"weight":1.0,"p":[0.5,1.0]}]}"#;
        assert!(serde_json::from_str::<Command>(ok).is_ok());
        let bad = r#"{"command":"aggregate","types":[{"weight":1.0,"p":[0.5,1.0]}],"extra":1}"#;
        assert!(serde_json::from_str::<Command>(bad).is_err());
        let missing = r#"{"command":"solve","prefs":{"beta":1,"beta_hat":1,"delta":1}}"#;
        assert!(serde_json::from_str::<Command>(missing).is_err());
        let unknown = r#"{"command":"plot"}"#;
        assert!(serde_json::from_str::<Command>(unknown).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(Error::invalid("x").exit_code(), 2);
        assert_eq!(Error::NoConvergence { iterations: 1, gap: 1.0 }.exit_code(), 3);
        let io = Error::io("missing", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(io.exit_code(), 4);
        let j: serde_json::Value = serde_json::from_str(&error_json(&io)).unwrap();
        assert_eq!(j["error"]["kind"], "io");
        assert_eq!(j["error"]["code"], 4);
    }
}
