//! Command-line interface. Every command writes its CSV outputs,
//! `report.txt` and `run.manifest` into `--out` and touches nothing else.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use lifespan_core::design::{
    contingency_summary, profile_frequencies, to_exceedances, CovariateSchema, ExceedanceSet, IndividualRecord,
    ModelSpec, Profile,
};
use lifespan_core::diagnostics::{profile_endpoint_table, qq_grid, qq_grid_profile};
use lifespan_core::fit::{fit_mle, wald_intervals, FitOptions, FitResult};
use lifespan_core::inference::{
    bootstrap_percentile_ci, contrast_table, endpoint, endpoint_delta, BootstrapOptions, Resampling,
};
use lifespan_core::likelihood::ParamVector;
use lifespan_core::math::Matrix;
use lifespan_core::simulate::simulate_population;

use crate::error::{invalid, CliError, CliResult};
use crate::io::{format_schema, load_records, parse_coefficients, parse_profile, parse_schema, write_records};
use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::scenario::{parse_scenario, truth_sidecar};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "lifespan", version, about = "Maximum-lifespan estimation from truncated and censored survival data above a threshold age")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model and report coefficients with Wald intervals.
    Fit(FitCmd),
    /// Maximum lifespan per covariate profile.
    Endpoint(EndpointCmd),
    /// Lifespan change from switching one covariate of a base profile.
    Contrast(ContrastCmd),
    /// Nonparametric bootstrap of the fitted parameters.
    Bootstrap(BootstrapCmd),
    /// Quantile-quantile grid of fitted against observed exceedances.
    Qq(QqCmd),
    /// Refit over a range of threshold ages.
    Sweep(SweepCmd),
    /// Draw a synthetic population from a scenario file.
    Simulate(SimulateCmd),
    /// Counts by age band and calendar period, and profile frequencies.
    Summarize(SummarizeCmd),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Record CSV: entry_age,exit_age,event,<covariates>[,period].
    #[arg(long)]
    pub input: PathBuf,
    /// Schema file, one `name = cat1,cat2*,cat3` line per covariate.
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub step_tol: f64,
    /// Keep going with the best point found when the optimizer does not converge.
    #[arg(long)]
    pub allow_nonconverged: bool,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

impl FitArgs {
    fn options(&self) -> CliResult<FitOptions> {
        if self.max_iter == 0 || !(self.grad_tol > 0.0) || !(self.step_tol > 0.0) {
            return invalid("--max-iter, --grad-tol and --step-tol must be positive");
        }
        if !(0.0..1.0).contains(&self.level) {
            return invalid(format!("--level must lie in [0, 1), got {}", self.level));
        }
        Ok(FitOptions { max_iter: self.max_iter, grad_tol: self.grad_tol, step_tol: self.step_tol })
    }
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Data and/or fixed coefficients for the endpoint and contrast commands.
#[derive(Debug, Args)]
pub struct EstimateSource {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    pub threshold: f64,
    /// Use these `beta.<column>` / `xi` values instead of fitting.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EndpointCmd {
    #[command(flatten)]
    pub source: EstimateSource,
    /// `name=label,...`; repeatable. Defaults to every observed profile.
    #[arg(long)]
    pub profile: Vec<String>,
    /// Report only profiles observed more often than this among the exceedances.
    #[arg(long, default_value_t = 10)]
    pub min_frequency: usize,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ContrastCmd {
    #[command(flatten)]
    pub source: EstimateSource,
    /// Base profile `name=label,...`; defaults to the reference profile.
    #[arg(long)]
    pub base: Option<String>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct BootstrapCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Profiles whose endpoint is bootstrapped; defaults to the reference profile.
    #[arg(long)]
    pub profile: Vec<String>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct QqCmd {
    #[command(flatten)]
    pub data: DataArgs,
    /// Restrict to one profile instead of pooling.
    #[arg(long)]
    pub profile: Option<String>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Strictly increasing threshold ages, e.g. `98,99,100,101,102`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    /// Scenario file (see the README for its keys).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the scenario's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SummarizeCmd {
    #[command(flatten)]
    pub data: DataArgs,
    /// Upper-closed age band limits.
    #[arg(long, value_delimiter = ',', default_value = "100,102,104,106,108,110")]
    pub age_breaks: Vec<f64>,
    /// Period boundaries (years); requires a `period` column.
    #[arg(long, value_delimiter = ',')]
    pub period_breaks: Vec<i32>,
    #[arg(long, default_value_t = 10)]
    pub min_frequency: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Accumulates outputs of one run.
struct Run {
    dir: PathBuf,
    manifest: Manifest,
    report: String,
    written: Vec<PathBuf>,
}

impl Run {
    fn start(out: &OutArgs, command: &str, argv: &[String]) -> CliResult<Self> {
        fs::create_dir_all(&out.out).map_err(|e| CliError::io(&out.out, e))?;
        Ok(Self {
            dir: out.out.clone(),
            manifest: Manifest::new(command, argv),
            report: format!("lifespan {command}\n\n"),
            written: Vec::new(),
        })
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Validation(format!("{name}: {e}"));
        w.write_record(header).map_err(fail)?;
        for r in rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    fn finish(mut self) -> CliResult<Vec<PathBuf>> {
        let report = std::mem::take(&mut self.report);
        self.write("report.txt", report.as_bytes())?;
        let manifest = self.manifest.render();
        self.write(MANIFEST_FILE, manifest.as_bytes())?;
        Ok(self.written)
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

struct Loaded {
    records: Vec<IndividualRecord>,
    schema: CovariateSchema,
    data: ExceedanceSet,
}

fn load(run: &mut Run, input: &Path, schema_path: &Path, threshold: f64) -> CliResult<Loaded> {
    run.manifest.input("schema", schema_path)?;
    run.manifest.input("records", input)?;
    let decls = parse_schema(&read_text(schema_path)?)?;
    let file = fs::File::open(input).map_err(|e| CliError::io(input, e))?;
    let records = load_records(std::io::BufReader::new(file), &decls)
        .map_err(|e| CliError::Validation(format!("{}: {e}", input.display())))?;
    let schema = CovariateSchema::resolve(decls, &records)?;
    let extraction = to_exceedances(&records, &ModelSpec::new(threshold, schema.clone())?)?;
    run.line(format!("records: {} ({} above the threshold {threshold}, {} dropped)", records.len(), extraction.kept, extraction.dropped));
    let deaths = extraction.data.deaths();
    run.line(format!("exceedances: {} deaths, {} censored", deaths, extraction.data.len() - deaths));
    for cov in schema.covariates() {
        run.line(format!("reference {}: {}", cov.name(), cov.reference_label()));
    }
    Ok(Loaded { records, schema, data: extraction.data })
}

fn fit_or_fail(run: &mut Run, data: &ExceedanceSet, args: &FitArgs) -> CliResult<FitResult> {
    let result = fit_mle(data, None, &args.options()?)?;
    run.line(format!(
        "fit: log-likelihood {}, {} iterations, gradient max-norm {:e}, converged {}",
        result.loglik, result.iterations, result.gradient_norm, result.converged
    ));
    if !result.converged {
        if !args.allow_nonconverged {
            return Err(CliError::Numerical(format!(
                "optimizer did not converge after {} iterations (gradient max-norm {:e}); \
                 raise --max-iter or pass --allow-nonconverged to keep the best point",
                result.iterations, result.gradient_norm
            )));
        }
        run.line("warning: not converged; standard errors and intervals are omitted");
    }
    Ok(result)
}

fn coefficient_rows(schema: &CovariateSchema, result: &FitResult, level: f64) -> CliResult<Vec<Vec<String>>> {
    let names: Vec<String> = schema.column_names().into_iter().chain(["xi".to_string()]).collect();
    let se = result.standard_errors().filter(|_| result.converged);
    let ci = if result.converged { Some(wald_intervals(result, level)?) } else { None };
    Ok(names
        .into_iter()
        .zip(result.theta_hat.to_vec())
        .enumerate()
        .map(|(k, (name, est))| {
            vec![
                name,
                num(est),
                opt_num(se.as_ref().map(|s| s[k])),
                opt_num(ci.as_ref().map(|c| c[k].0)),
                opt_num(ci.as_ref().map(|c| c[k].1)),
            ]
        })
        .collect())
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn run_fit(cmd: &FitCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "fit", argv)?;
    let loaded = load(&mut run, &cmd.data.input, &cmd.data.schema, cmd.data.threshold)?;
    let result = fit_or_fail(&mut run, &loaded.data, &cmd.fit)?;
    let rows = coefficient_rows(&loaded.schema, &result, cmd.fit.level)?;
    run.line("");
    run.line(format!("{:<28} {:>12} {:>12}", "parameter", "estimate", "se"));
    for r in &rows {
        run.line(format!("{:<28} {:>12.6} {:>12}", r[0], r[1].parse::<f64>().unwrap_or(f64::NAN), r[2]));
    }
    run.csv("fit.csv", &header(&["parameter", "estimate", "se", "lower", "upper"]), &rows)?;
    if let (Some(cov), true) = (&result.covariance, result.converged) {
        let names: Vec<String> = loaded.schema.column_names().into_iter().chain(["xi".to_string()]).collect();
        let mut head = vec!["parameter".to_string()];
        head.extend(names.iter().cloned());
        let rows: Vec<Vec<String>> = names
            .iter()
            .enumerate()
            .map(|(i, n)| std::iter::once(n.clone()).chain(cov.row(i).iter().map(|v| num(*v))).collect())
            .collect();
        run.csv("covariance.csv", &head, &rows)?;
    }
    run.manifest.push("threshold", cmd.data.threshold);
    run.finish()
}

/// Point estimates plus, when fitted and converged, their covariance.
struct Estimates {
    schema: CovariateSchema,
    theta: ParamVector,
    covariance: Option<Matrix>,
    data: Option<ExceedanceSet>,
}

fn estimates(run: &mut Run, src: &EstimateSource, fit: &FitArgs) -> CliResult<Estimates> {
    let (schema, data) = match &src.input {
        Some(input) => {
            let l = load(run, input, &src.schema, src.threshold)?;
            (l.schema, Some(l.data))
        }
        None => {
            run.manifest.input("schema", &src.schema)?;
            (CovariateSchema::new(parse_schema(&read_text(&src.schema)?)?)?, None)
        }
    };
    if let Some(path) = &src.coefficients {
        run.manifest.input("coefficients", path)?;
        let theta = parse_coefficients(&read_text(path)?, &schema)?;
        run.line(format!("coefficients from {} (no standard errors)", path.display()));
        return Ok(Estimates { schema, theta, covariance: None, data });
    }
    let Some(d) = data else {
        return invalid("give --input to fit the model, or --coefficients");
    };
    let result = fit_or_fail(run, &d, fit)?;
    let covariance = result.covariance.filter(|_| result.converged);
    Ok(Estimates { schema, theta: result.theta_hat, covariance, data: Some(d) })
}

fn profile_cells(schema: &CovariateSchema, profile: &Profile) -> Vec<String> {
    schema.labels(profile).into_iter().map(str::to_string).collect()
}

fn describe(schema: &CovariateSchema, profile: &Profile) -> String {
    schema
        .covariates()
        .iter()
        .zip(schema.labels(profile))
        .map(|(c, l)| format!("{}={l}", c.name()))
        .collect::<Vec<_>>()
        .join(";")
}

fn run_endpoint(cmd: &EndpointCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "endpoint", argv)?;
    let est = estimates(&mut run, &cmd.source, &cmd.fit)?;
    let schema = &est.schema;
    let u = cmd.source.threshold;
    if !(est.theta.xi < 0.0) {
        return Err(lifespan_core::Error::NoFiniteEndpoint(est.theta.xi).into());
    }
    let frequencies = match &est.data {
        Some(d) => Some(profile_frequencies(d, schema)?),
        None => None,
    };

    let mut head: Vec<String> = schema.covariates().iter().map(|c| c.name().to_string()).collect();
    head.extend(header(&["frequency", "x_star", "se", "lower", "upper", "method"]));
    let mut rows = Vec::new();
    if cmd.profile.is_empty() {
        let Some(data) = &est.data else {
            return invalid("without --input, name the profiles with --profile");
        };
        let covariance = est.covariance.clone().unwrap_or_else(|| Matrix::zeros(est.theta.len()));
        for r in profile_endpoint_table(&est.theta, &covariance, schema, data, u, cmd.min_frequency, cmd.fit.level)? {
            let mut row = r.labels.clone();
            row.push(r.frequency.to_string());
            row.push(num(r.estimate.x_star));
            row.extend(delta_cells(est.covariance.is_some(), r.estimate.se, r.estimate.ci));
            rows.push(row);
        }
    } else {
        for spec in &cmd.profile {
            let profile = parse_profile(spec, schema)?;
            let freq = frequencies.as_ref().map(|f| f.get(&profile).copied().unwrap_or(0));
            if let Some(f) = freq.filter(|f| *f <= cmd.min_frequency) {
                run.line(format!("suppressed {} (frequency {f} <= {})", describe(schema, &profile), cmd.min_frequency));
                continue;
            }
            let design = schema.encode(&profile)?;
            let mut row = profile_cells(schema, &profile);
            row.push(freq.map(|f| f.to_string()).unwrap_or_default());
            match &est.covariance {
                Some(c) => {
                    let e = endpoint_delta(&est.theta, c, &design, u, cmd.fit.level)?;
                    row.push(num(e.x_star));
                    row.extend(delta_cells(true, e.se, e.ci));
                }
                None => {
                    row.push(num(endpoint(&est.theta, &design, u)?));
                    row.extend(delta_cells(false, 0.0, (0.0, 0.0)));
                }
            }
            rows.push(row);
        }
    }
    run.line(format!("{} profile rows at threshold {u}", rows.len()));
    run.csv("endpoints.csv", &head, &rows)?;
    run.finish()
}

fn delta_cells(with_se: bool, se: f64, ci: (f64, f64)) -> Vec<String> {
    if with_se {
        vec![num(se), num(ci.0), num(ci.1), "fisher-delta".into()]
    } else {
        vec![String::new(), String::new(), String::new(), "plug-in".into()]
    }
}

fn run_contrast(cmd: &ContrastCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "contrast", argv)?;
    let est = estimates(&mut run, &cmd.source, &cmd.fit)?;
    let base = match &cmd.base {
        Some(s) => parse_profile(s, &est.schema)?,
        None => est.schema.reference_profile(),
    };
    run.line(format!("base profile: {}", describe(&est.schema, &base)));
    let table = contrast_table(&est.theta, est.covariance.as_ref(), &est.schema, &base, cmd.source.threshold, cmd.fit.level)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|c| {
            vec![
                c.covariate.clone(),
                c.level.clone(),
                num(c.delta),
                opt_num(c.se),
                opt_num(c.ci.map(|x| x.0)),
                opt_num(c.ci.map(|x| x.1)),
            ]
        })
        .collect();
    for r in &rows {
        run.line(format!("{:<8} {:<14} {:>+9.3}", r[0], r[1], r[2].parse::<f64>().unwrap_or(f64::NAN)));
    }
    run.csv("contrasts.csv", &header(&["covariate", "level", "delta", "se", "lower", "upper"]), &rows)?;
    run.finish()
}

fn run_bootstrap(cmd: &BootstrapCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "bootstrap", argv)?;
    let loaded = load(&mut run, &cmd.data.input, &cmd.data.schema, cmd.data.threshold)?;
    let result = fit_or_fail(&mut run, &loaded.data, &cmd.fit)?;
    let schema = &loaded.schema;
    let profiles = if cmd.profile.is_empty() {
        vec![schema.reference_profile()]
    } else {
        cmd.profile.iter().map(|s| parse_profile(s, schema)).collect::<CliResult<Vec<_>>>()?
    };
    let designs = profiles.iter().map(|p| schema.encode(p)).collect::<Result<Vec<_>, _>>()?;

    let opts = BootstrapOptions {
        replicates: cmd.replicates,
        seed: cmd.seed,
        fit: cmd.fit.options()?,
        resampling: Resampling::WithReplacement,
    };
    run.manifest.push("seed", cmd.seed);
    let boot = parallel::bootstrap(&loaded.data, &result.theta_hat, &opts, cmd.threads)?;
    run.line(format!(
        "bootstrap: {} replicates, seed {}, {} failed{}",
        cmd.replicates,
        cmd.seed,
        boot.failures(),
        if boot.flagged() { " (more than 10%: results flagged)" } else { "" }
    ));

    let param_names: Vec<String> = schema.column_names().into_iter().chain(["xi".to_string()]).collect();
    let endpoint_names: Vec<String> = profiles.iter().map(|p| format!("endpoint[{}]", describe(schema, p))).collect();
    let mut head = header(&["replicate", "status"]);
    head.extend(param_names.iter().cloned());
    head.extend(endpoint_names.iter().cloned());
    let endpoint_value = |theta: &ParamVector, z: &[f64]| endpoint(theta, z, cmd.data.threshold).unwrap_or(f64::INFINITY);
    let mut rows: Vec<(usize, Vec<String>)> = boot
        .estimates
        .iter()
        .map(|r| {
            let mut row = vec![r.index.to_string(), "ok".to_string()];
            row.extend(r.estimate.to_vec().into_iter().map(num));
            row.extend(designs.iter().map(|z| num(endpoint_value(&r.estimate, z))));
            (r.index, row)
        })
        .collect();
    rows.extend(boot.failed.iter().map(|&i| {
        let mut row = vec![i.to_string(), "failed".to_string()];
        row.resize(head.len(), String::new());
        (i, row)
    }));
    rows.sort_by_key(|(i, _)| *i);
    let rows: Vec<Vec<String>> = rows.into_iter().map(|(_, r)| r).collect();
    run.csv("bootstrap_replicates.csv", &head, &rows)?;

    match bootstrap_percentile_ci(&boot, |t| t.xi, cmd.fit.level) {
        Ok(_) => {
            let wald = if result.converged { Some(wald_intervals(&result, cmd.fit.level)?) } else { None };
            let mut ci_rows = Vec::new();
            for (k, name) in param_names.iter().enumerate() {
                let (lo, hi) = bootstrap_percentile_ci(&boot, |t| t.to_vec()[k], cmd.fit.level)?;
                ci_rows.push(vec![
                    name.clone(),
                    num(result.theta_hat.to_vec()[k]),
                    opt_num(wald.as_ref().map(|w| w[k].0)),
                    opt_num(wald.as_ref().map(|w| w[k].1)),
                    num(lo),
                    num(hi),
                ]);
            }
            for (name, z) in endpoint_names.iter().zip(&designs) {
                let (lo, hi) = bootstrap_percentile_ci(&boot, |t| endpoint_value(t, z), cmd.fit.level)?;
                let delta = match (&result.covariance, result.converged) {
                    (Some(c), true) => endpoint_delta(&result.theta_hat, c, z, cmd.data.threshold, cmd.fit.level).ok(),
                    _ => None,
                };
                ci_rows.push(vec![
                    name.clone(),
                    num(endpoint_value(&result.theta_hat, z)),
                    opt_num(delta.as_ref().map(|d| d.ci.0)),
                    opt_num(delta.as_ref().map(|d| d.ci.1)),
                    num(lo),
                    num(hi),
                ]);
            }
            run.csv(
                "bootstrap_ci.csv",
                &header(&["quantity", "estimate", "wald_lower", "wald_upper", "bootstrap_lower", "bootstrap_upper"]),
                &ci_rows,
            )?;
        }
        Err(e) => run.line(format!("no percentile intervals: {e}")),
    }
    run.finish()
}

fn run_qq(cmd: &QqCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "qq", argv)?;
    let loaded = load(&mut run, &cmd.data.input, &cmd.data.schema, cmd.data.threshold)?;
    let result = fit_or_fail(&mut run, &loaded.data, &cmd.fit)?;
    if !result.converged {
        return Err(CliError::Numerical("a Q-Q grid needs a converged fit".into()));
    }
    let grid = match &cmd.profile {
        Some(spec) => {
            let profile = parse_profile(spec, &loaded.schema)?;
            run.line(format!("profile: {}", describe(&loaded.schema, &profile)));
            qq_grid_profile(&result, &loaded.data, &loaded.schema.encode(&profile)?, None)?
        }
        None => qq_grid(&result, &loaded.data, None)?,
    };
    run.line(format!("reference GPD: scale {} shape {}", grid.sigma, result.theta_hat.xi));
    run.line(format!("deaths used: {} (censored records excluded)", grid.deaths));
    run.line(format!("max |theoretical - empirical|: {}", grid.max_abs_gap()));
    if grid.few_deaths {
        run.line("warning: fewer than 100 deaths; the empirical quantiles are unreliable");
    }
    let rows: Vec<Vec<String>> = grid
        .probs
        .iter()
        .zip(&grid.theoretical)
        .zip(&grid.empirical)
        .map(|((p, t), e)| vec![num(*p), num(*t), num(*e)])
        .collect();
    run.csv("qq.csv", &header(&["prob", "theoretical", "empirical"]), &rows)?;
    run.finish()
}

fn run_sweep(cmd: &SweepCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "sweep", argv)?;
    let first = *cmd.thresholds.first().unwrap_or(&0.0);
    let loaded = load(&mut run, &cmd.input, &cmd.schema, first)?;
    let sweep = parallel::threshold_sweep(&loaded.records, &loaded.schema, &cmd.thresholds, &cmd.fit.options()?, cmd.fit.level, cmd.threads)?;
    let mut head = header(&["threshold", "n_exceedances", "converged", "xi", "xi_lower", "xi_upper"]);
    for c in &sweep.columns {
        head.extend([c.clone(), format!("{c}_lower"), format!("{c}_upper")]);
    }
    head.push("error".into());
    let mut rows = Vec::new();
    for r in &sweep.rows {
        let xi_ci = r.xi_interval();
        let mut row = vec![
            num(r.threshold),
            r.n_exceedances.to_string(),
            r.converged.to_string(),
            opt_num(r.estimate.as_ref().map(|t| t.xi)),
            opt_num(xi_ci.map(|c| c.0)),
            opt_num(xi_ci.map(|c| c.1)),
        ];
        for k in 0..sweep.columns.len() {
            let ci = r.intervals.as_ref().map(|v| v[k]);
            row.extend([
                opt_num(r.estimate.as_ref().map(|t| t.beta[k])),
                opt_num(ci.map(|c| c.0)),
                opt_num(ci.map(|c| c.1)),
            ]);
        }
        row.push(r.error.clone().unwrap_or_default());
        run.line(format!(
            "u = {:<6} n = {:<7} xi = {:<10} {}",
            r.threshold,
            r.n_exceedances,
            r.estimate.as_ref().map(|t| format!("{:.4}", t.xi)).unwrap_or_else(|| "-".into()),
            r.error.as_deref().unwrap_or("")
        ));
        rows.push(row);
    }
    run.csv("sweep.csv", &head, &rows)?;
    run.finish()
}

fn run_simulate(cmd: &SimulateCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "simulate", argv)?;
    run.manifest.input("config", &cmd.config)?;
    let cfg = parse_scenario(&read_text(&cmd.config)?, cmd.seed)?;
    run.manifest.push("seed", cfg.seed);
    let records = simulate_population(&cfg)?;
    let mut buf = Vec::new();
    write_records(&mut buf, &records, &cfg.schema).map_err(|e| CliError::Validation(e.to_string()))?;
    run.write("population.csv", &buf)?;
    run.write("schema.txt", format_schema(&cfg.schema).as_bytes())?;
    run.write("truth.txt", truth_sidecar(&cfg).as_bytes())?;
    let deaths = records.iter().filter(|r| r.event).count();
    run.line(format!("simulated {} individuals with seed {}: {} deaths, {} censored", records.len(), cfg.seed, deaths, records.len() - deaths));
    run.finish()
}

fn run_summarize(cmd: &SummarizeCmd, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut run = Run::start(&cmd.out, "summarize", argv)?;
    let loaded = load(&mut run, &cmd.data.input, &cmd.data.schema, cmd.data.threshold)?;
    let table = contingency_summary(&loaded.records, &cmd.age_breaks, &cmd.period_breaks)?;
    let mut head = vec!["age_band".to_string()];
    head.extend(table.col_labels.iter().cloned());
    head.push("total".into());
    let mut rows: Vec<Vec<String>> = table
        .row_labels
        .iter()
        .zip(&table.counts)
        .zip(table.row_totals())
        .map(|((label, counts), total)| {
            std::iter::once(label.clone())
                .chain(counts.iter().map(usize::to_string))
                .chain([total.to_string()])
                .collect()
        })
        .collect();
    rows.push(
        std::iter::once("total".to_string())
            .chain(table.col_totals().iter().map(usize::to_string))
            .chain([table.total().to_string()])
            .collect(),
    );
    run.csv("contingency.csv", &head, &rows)?;

    let mut freq: Vec<(Profile, usize)> = profile_frequencies(&loaded.data, &loaded.schema)?.into_iter().collect();
    freq.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let shown: Vec<Vec<String>> = freq
        .iter()
        .filter(|(_, n)| *n > cmd.min_frequency)
        .map(|(p, n)| {
            let mut row = profile_cells(&loaded.schema, p);
            row.push(n.to_string());
            row
        })
        .collect();
    let mut head: Vec<String> = loaded.schema.covariates().iter().map(|c| c.name().to_string()).collect();
    head.push("frequency".into());
    let mut note = String::new();
    let _ = write!(note, "{} of {} observed profiles have more than {} exceedances", shown.len(), freq.len(), cmd.min_frequency);
    run.line(note);
    run.csv("profiles.csv", &head, &shown)?;
    run.finish()
}

/// Runs a parsed command. `argv` (without the program name) is echoed into
/// the manifest so the run can be repeated.
pub fn execute(cli: &Cli, argv: &[String]) -> CliResult<Vec<PathBuf>> {
    match &cli.command {
        Command::Fit(c) => run_fit(c, argv),
        Command::Endpoint(c) => run_endpoint(c, argv),
        Command::Contrast(c) => run_contrast(c, argv),
        Command::Bootstrap(c) => run_bootstrap(c, argv),
        Command::Qq(c) => run_qq(c, argv),
        Command::Sweep(c) => run_sweep(c, argv),
        Command::Simulate(c) => run_simulate(c, argv),
        Command::Summarize(c) => run_summarize(c, argv),
    }
}

/// Parses and runs `argv` (without the program name).
pub fn run_args(argv: &[String]) -> CliResult<Vec<PathBuf>> {
    let cli = Cli::try_parse_from(std::iter::once("lifespan".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    execute(&cli, argv)
}
