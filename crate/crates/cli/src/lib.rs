//! Driver behind the `pdc` binary: config schema, subcommands and sweeps.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use pdcontract::agc::{run_agc_demo, AgcConfig};
use pdcontract::contraction::{certify, CertificateRecord};
use pdcontract::dynamics::{augmented_initial_state, fmt_g17, observer_augmented_field, pd_state_names};
use pdcontract::hierarchy::{linear_cascade, simulate_stack, CascadeParams};
use pdcontract::robustness::{
    bound_tracking, default_cutoff, run_observer_bounds, sup_optimum_rate, validate_bound, BoundId, BoundReport,
    LipschitzEstimates, ObserverRunSpec, Reference, StateBox,
};
use pdcontract::{integrate, make_quadratic_problem, pd_vector_field, Matrix, ObserverConfig, Problem, VectorSignal};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Parser)]
#[command(name = "pdc", version, about = "Contraction certificates and tracking bounds for primal-dual dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for sampled Lipschitz estimates (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parameter sweep `path=start:stop:count` over a dotted JSON path of the config.
    #[arg(long, global = true)]
    pub sweep: Option<String>,
    /// Norm used for error columns in CSV output. Reports always judge in the certificate metric.
    #[arg(long, global = true, value_enum, default_value_t = Metric::Theta)]
    pub metric: Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Contraction certificate of the configured problem.
    Certify,
    /// Integrate the primal-dual flow (and the observer-driven flow if configured).
    Simulate,
    /// Tracking and robustness bounds validated against simulation.
    Bounds,
    /// Generation-control case study with turbine lag.
    AgcDemo,
    /// Two-timescale linear cascade.
    HierarchyDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Theta,
    Euclidean,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub integration: Option<IntegrationConfig>,
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub observer: Option<ObserverSection>,
    #[serde(default)]
    pub lipschitz: Option<LipschitzSection>,
    #[serde(default)]
    pub transient_cutoff: Option<f64>,
    #[serde(default)]
    pub agc: Option<AgcConfig<f64>>,
    #[serde(default)]
    pub hierarchy: Option<HierarchySection>,
}

/// Quadratic problem `g(x) = ½xᵀPx + rᵀx` subject to `Ex = q(t)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: Matrix,
    #[serde(default)]
    pub r: Option<Vec<f64>>,
    pub e: Matrix,
    pub q: VectorSignal<f64>,
    #[serde(default)]
    pub forcing: Option<VectorSignal<f64>>,
    /// Fixed metric step; optimized when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

/// First-order lag on the listed state indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub unobserved: Vec<usize>,
    pub time_constant: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_radius")]
    pub domain_radius: f64,
}

fn default_samples() -> usize {
    1000
}

fn default_radius() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySection {
    pub cascade: CascadeParams<f64>,
    #[serde(default)]
    pub initial: Option<Vec<Vec<f64>>>,
}

/// Exit status for an error: 2 for violated bound conditions, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<pdcontract::Error>() {
        Some(e) if e.is_condition() => 2,
        _ => 1,
    }
}

/// Parses a config document; errors name the offending path.
pub fn parse_config(value: Value) -> anyhow::Result<RunConfig> {
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("invalid config at `{path}`: {}", e.into_inner())
    })?;
    if cfg.version != CONFIG_VERSION {
        bail!("invalid config at `version`: unsupported version {} (expected {CONFIG_VERSION})", cfg.version);
    }
    if let Some(i) = &cfg.integration {
        if !(i.step > 0.0) || !(i.t1 > i.t0) {
            bail!("invalid config at `integration`: need step > 0 and t1 > t0");
        }
    }
    Ok(cfg)
}

pub fn load_config_value(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Runs the command described by `cli`.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let value = match &cli.config {
        Some(p) => load_config_value(p)?,
        None => serde_json::json!({ "version": CONFIG_VERSION }),
    };
    match &cli.sweep {
        Some(spec) => run_sweep(cli, &value, spec),
        None => {
            let cfg = parse_config(value)?;
            run_case(cli.command, &cfg, &cli.out, cli.seed, cli.metric)
        }
    }
}

/// Parsed `path=start:stop:count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub path: Vec<String>,
    pub values: Vec<f64>,
}

pub fn parse_sweep(spec: &str) -> anyhow::Result<SweepSpec> {
    let (path, range) = spec.split_once('=').ok_or_else(|| anyhow!("sweep must look like path=start:stop:count"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 || path.is_empty() {
        bail!("sweep must look like path=start:stop:count");
    }
    let start: f64 = parts[0].parse().context("sweep start")?;
    let stop: f64 = parts[1].parse().context("sweep stop")?;
    let count: usize = parts[2].parse().context("sweep count")?;
    if count == 0 {
        bail!("sweep count must be at least 1");
    }
    let values = (0..count)
        .map(|i| if count == 1 { start } else { start + (stop - start) * i as f64 / (count - 1) as f64 })
        .collect();
    Ok(SweepSpec { path: path.split('.').map(str::to_string).collect(), values })
}

fn set_path(root: &mut Value, path: &[String], v: f64) -> anyhow::Result<()> {
    let mut cur = root;
    for key in path {
        cur = match cur {
            Value::Object(map) => map.get_mut(key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| anyhow!("sweep path `{}` does not exist in the config", path.join(".")))?;
    }
    *cur = serde_json::json!(v);
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepCase {
    case: usize,
    value: f64,
    directory: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn run_sweep(cli: &Cli, base: &Value, spec: &str) -> anyhow::Result<()> {
    let sweep = parse_sweep(spec)?;
    let mut configs = Vec::with_capacity(sweep.values.len());
    for &v in &sweep.values {
        let mut doc = base.clone();
        set_path(&mut doc, &sweep.path, v)?;
        configs.push(parse_config(doc)?);
    }
    let results: Vec<anyhow::Result<()>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let out = cli.out.join(format!("sweep_{i:03}"));
                scope.spawn(move || run_case(cli.command, cfg, &out, cli.seed, cli.metric))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(anyhow!("sweep case panicked")))).collect()
    });
    let mut first_err: Option<anyhow::Error> = None;
    let cases: Vec<SweepCase> = results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let (status, message) = match r {
                Ok(()) => ("ok", None),
                Err(e) => {
                    let code = exit_code(&e);
                    let msg = format!("{e:#}");
                    // a plain error outranks a condition error for the exit status
                    if first_err.as_ref().map_or(true, |f| exit_code(f) == 2 && code == 1) {
                        first_err = Some(e);
                    }
                    (if code == 2 { "condition" } else { "error" }, Some(msg))
                }
            };
            SweepCase { case: i, value: sweep.values[i], directory: format!("sweep_{i:03}"), status, message }
        })
        .collect();
    fs::create_dir_all(&cli.out)?;
    write_json(&cli.out.join("sweep_index.json"), &cases)?;
    match first_err {
        Some(e) => Err(e.context(format!("sweep over `{}` had failing cases", sweep.path.join(".")))),
        None => Ok(()),
    }
}

/// Runs one subcommand with a parsed config, writing artifacts to `out`.
pub fn run_case(command: Command, cfg: &RunConfig, out: &Path, seed: Option<u64>, metric: Metric) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    match command {
        Command::Certify => cmd_certify(cfg, out),
        Command::Simulate => cmd_simulate(cfg, out, metric),
        Command::Bounds => cmd_bounds(cfg, out, seed, metric),
        Command::AgcDemo => cmd_agc(cfg, out, metric),
        Command::HierarchyDemo => cmd_hierarchy(cfg, out),
    }
}

fn write_json<S: Serialize>(path: &Path, v: &S) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn build_problem(cfg: &RunConfig) -> anyhow::Result<Problem> {
    let pc = cfg.problem.as_ref().ok_or_else(|| anyhow!("invalid config at `problem`: section required"))?;
    let r = pc.r.clone().unwrap_or_else(|| vec![0.0; pc.p.rows()]);
    let mut prob = make_quadratic_problem(pc.p.clone(), r, pc.e.clone(), pc.q.clone())?;
    if let Some(f) = &pc.forcing {
        prob = prob.with_primal_forcing(f.clone())?;
    }
    Ok(prob)
}

fn integration(cfg: &RunConfig) -> anyhow::Result<IntegrationConfig> {
    cfg.integration.ok_or_else(|| anyhow!("invalid config at `integration`: section required"))
}

fn initial_state(cfg: &RunConfig, dim: usize) -> anyhow::Result<Vec<f64>> {
    match &cfg.initial_state {
        Some(z) if z.len() == dim => Ok(z.clone()),
        Some(z) => bail!("invalid config at `initial_state`: length {} but the problem has {dim} states", z.len()),
        None => Ok(vec![0.0; dim]),
    }
}

fn observer(cfg: &RunConfig, dim: usize) -> anyhow::Result<Option<ObserverConfig<f64>>> {
    cfg.observer
        .as_ref()
        .map(|o| ObserverConfig::lag_for(dim, o.unobserved.clone(), o.time_constant).map_err(anyhow::Error::from))
        .transpose()
}

fn cmd_certify(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let prob = build_problem(cfg)?;
    let alpha = cfg.problem.as_ref().and_then(|p| p.alpha);
    let cert = certify(&prob, alpha)?;
    write_json(&out.join("certificate.json"), &cert.record())
}

fn cmd_simulate(cfg: &RunConfig, out: &Path, metric: Metric) -> anyhow::Result<()> {
    let prob = build_problem(cfg)?;
    let ig = integration(cfg)?;
    let z0 = initial_state(cfg, prob.dim())?;
    let names = pd_state_names(prob.n(), prob.m());
    let traj = integrate(&pd_vector_field(&prob), &z0, ig.t0, ig.t1, ig.step)?.with_state_names(names.clone())?;
    write_text(&out.join("trajectory.csv"), &traj.to_csv())?;

    let cert = certify(&prob, cfg.problem.as_ref().and_then(|p| p.alpha))?;
    let theta = metric_matrix(metric, &cert.theta);
    let series = pdcontract::robustness::error_series(&traj, &Reference::Optimum(&prob), &theta)?;
    let mut csv = String::from("t,error\n");
    for (t, w, _) in series {
        csv.push_str(&format!("{},{}\n", fmt_g17(t), fmt_g17(w)));
    }
    write_text(&out.join("optimum_error.csv"), &csv)?;

    if let Some(obs) = observer(cfg, prob.dim())? {
        let mut aug_names = names.clone();
        aug_names.extend(obs.unobserved().iter().map(|&i| format!("hat_{}", names[i])));
        let aug = integrate(&observer_augmented_field(&prob, &obs)?, &augmented_initial_state(&z0, &obs), ig.t0, ig.t1, ig.step)?
            .with_state_names(aug_names)?;
        write_text(&out.join("trajectory_observer.csv"), &aug.to_csv())?;
    }
    Ok(())
}

fn metric_matrix(metric: Metric, theta: &Matrix) -> Matrix {
    match metric {
        Metric::Theta => theta.clone(),
        Metric::Euclidean => Matrix::identity(theta.rows()),
    }
}

#[derive(Debug, Serialize)]
struct BoundsOutput {
    certificate: CertificateRecord,
    sup_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lipschitz: Option<LipschitzEstimates>,
    reports: Vec<BoundReport>,
    all_satisfied: bool,
}

fn write_reports(out: &Path, output: &BoundsOutput) -> anyhow::Result<()> {
    write_json(&out.join("bounds_report.json"), output)?;
    let mut csv = String::from(BoundReport::csv_header());
    csv.push('\n');
    for r in &output.reports {
        csv.push_str(&r.to_csv_row());
        csv.push('\n');
    }
    write_text(&out.join("bounds_report.csv"), &csv)
}

fn cmd_bounds(cfg: &RunConfig, out: &Path, seed: u64, _metric: Metric) -> anyhow::Result<()> {
    let prob = build_problem(cfg)?;
    let ig = integration(cfg)?;
    let z0 = initial_state(cfg, prob.dim())?;
    let cert = certify(&prob, cfg.problem.as_ref().and_then(|p| p.alpha))?;
    let names = pd_state_names(prob.n(), prob.m());
    match observer(cfg, prob.dim())? {
        Some(obs) => {
            let lip = cfg.lipschitz.unwrap_or(LipschitzSection { samples: default_samples(), domain_radius: default_radius() });
            let spec = ObserverRunSpec {
                z0,
                t0: ig.t0,
                t1: ig.t1,
                step: ig.step,
                cutoff: cfg.transient_cutoff,
                samples: lip.samples,
                seed,
                domain: Some(StateBox::cube(prob.dim(), lip.domain_radius)?),
            };
            let run = run_observer_bounds(&prob, &cert, &obs, &spec)?;
            let mut aug_names = names.clone();
            aug_names.extend(obs.unobserved().iter().map(|&i| format!("hat_{}", names[i])));
            write_text(&out.join("trajectory.csv"), &run.exact.clone().with_state_names(names)?.to_csv())?;
            write_text(&out.join("trajectory_observer.csv"), &run.perturbed.clone().with_state_names(aug_names)?.to_csv())?;
            let all_satisfied = run.all_satisfied();
            write_reports(
                out,
                &BoundsOutput {
                    certificate: cert.record(),
                    sup_rate: run.sup_rate,
                    lipschitz: Some(run.lipschitz),
                    reports: run.reports,
                    all_satisfied,
                },
            )
        }
        None => {
            let sup_rate = sup_optimum_rate(&prob, ig.t0, ig.t1, Some(&cert.theta))?;
            let predicted = bound_tracking(cert.beta, sup_rate)?;
            let traj = integrate(&pd_vector_field(&prob), &z0, ig.t0, ig.t1, ig.step)?.with_state_names(names)?;
            let cutoff = cfg.transient_cutoff.unwrap_or_else(|| default_cutoff(cert.beta));
            let report = validate_bound(BoundId::Cor1Tracking, &traj, &Reference::Optimum(&prob), &cert.theta, predicted, cutoff)?
                .with_constants([("alpha", cert.alpha), ("beta", cert.beta), ("sup_rate", sup_rate)]);
            write_text(&out.join("trajectory.csv"), &traj.to_csv())?;
            let all_satisfied = report.satisfied;
            write_reports(
                out,
                &BoundsOutput { certificate: cert.record(), sup_rate, lipschitz: None, reports: vec![report], all_satisfied },
            )
        }
    }
}

fn cmd_agc(cfg: &RunConfig, out: &Path, metric: Metric) -> anyhow::Result<()> {
    let agc = cfg.agc.clone().unwrap_or_default();
    let ig = cfg.integration.unwrap_or(IntegrationConfig { t0: 0.0, t1: 100.0, step: 1e-3 });
    if ig.t0 != 0.0 {
        bail!("invalid config at `integration.t0`: the generation-control demo starts at t0 = 0");
    }
    let demo = run_agc_demo(&agc, cfg.initial_state.as_deref(), ig.t1, ig.step)?;
    write_text(&out.join("agc_error.csv"), &demo.error_csv(metric == Metric::Euclidean))?;
    write_text(&out.join("agc_trajectory.csv"), &demo.delayed_traj.to_csv())?;
    write_json(&out.join("agc_report.json"), &demo.summary())
}

fn cmd_hierarchy(cfg: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let section = cfg.hierarchy.clone().unwrap_or(HierarchySection { cascade: CascadeParams::two_layer_default(), initial: None });
    let stack = linear_cascade(&section.cascade)?;
    let ig = cfg.integration.unwrap_or(IntegrationConfig { t0: 0.0, t1: 60.0, step: 1e-3 });
    let initial = section.initial.unwrap_or_else(|| stack.layers.iter().map(|l| vec![0.0; l.dim]).collect());
    let run = simulate_stack(&stack, &initial, ig.t0, ig.t1, ig.step)?;
    for (k, traj) in run.layers.iter().enumerate() {
        write_text(&out.join(format!("layer{}.csv", k + 1)), &traj.to_csv())?;
    }
    for (k, series) in run.errors.iter().enumerate() {
        let mut csv = String::from("t,error\n");
        for &(t, e) in series {
            csv.push_str(&format!("{},{}\n", fmt_g17(t), fmt_g17(e)));
        }
        write_text(&out.join(format!("layer{}_error.csv", k + 1)), &csv)?;
    }
    write_json(&out.join("hierarchy_report.json"), &run.summary())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        let s = parse_sweep("problem.q.0.amplitude=0.1:0.5:5").unwrap();
        assert_eq!(s.path, vec!["problem", "q", "0", "amplitude"]);
        assert_eq!(s.values.len(), 5);
        assert!((s.values[4] - 0.5).abs() < 1e-15);
        assert_eq!(parse_sweep("a=1:2:1").unwrap().values, vec![1.0]);
        assert!(parse_sweep("a=1:2").is_err());
        assert!(parse_sweep("a=1:2:0").is_err());
    }

    #[test]
    fn set_path_walks_arrays() {
        let mut v = serde_json::json!({"a": [{"b": 1.0}]});
        set_path(&mut v, &["a".into(), "0".into(), "b".into()], 2.5).unwrap();
        assert_eq!(v["a"][0]["b"], 2.5);
        assert!(set_path(&mut v, &["a".into(), "3".into()], 1.0).is_err());
    }

    #[test]
    fn schema_errors_name_the_path() {
        let v = serde_json::json!({"version": 1, "problem": {"p": [[1.0]], "e": "oops", "q": []}});
        let msg = parse_config(v).unwrap_err().to_string();
        assert!(msg.contains("problem.e"), "{msg}");
        let v = serde_json::json!({"version": 2});
        assert!(parse_config(v).unwrap_err().to_string().contains("version"));
    }
}
