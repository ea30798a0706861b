use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ddpc_core::behavior::{
    collect_data, conservative_pe_order, is_persistently_exciting, min_data_length,
    required_pe_order, HankelRepresentation, PeReport,
};
use ddpc_core::descriptor::{DescriptorSystem, QuasiWeierstrass, Trajectory};
use ddpc_core::io;
use ddpc_core::linalg::Vector;
use ddpc_core::mpc::{run_closed_loop_logged, stability_diagnostics, MpcConfig, Setpoint};
use ddpc_core::ocp::{
    build_data_driven_ocp, solve_data_driven_ocp, solve_model_based_ocp, OcpSolution, OcpSpec,
};
use ddpc_core::presets;
use log::{info, warn};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

/// Machine-readable result of a command. `ok` decides the exit status.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub ok: bool,
}

impl Report {
    fn ok(json: Value) -> Self {
        Self { json, ok: true }
    }
}

const DEFAULT_OUT: &str = "ddpc-out";

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_system(path: Option<&Path>) -> Result<DescriptorSystem> {
    match path {
        Some(p) => io::read_system(p).with_context(|| format!("reading system {}", p.display())),
        None => Ok(presets::example_system()),
    }
}

/// Regularity, structural indices, rank tests and the smallest horizon.
pub fn analyze(sys: &DescriptorSystem, tol: f64) -> Report {
    let base = json!({"n": sys.n(), "m": sys.m(), "p": sys.p()});
    let qw = match QuasiWeierstrass::compute(sys, tol) {
        Ok(qw) => qw,
        Err(e) => {
            info!("pencil analysis failed: {e}");
            let mut v = base;
            v["regular"] = json!(sys.check_regularity(tol));
            v["error"] = json!(e.to_string());
            return Report::ok(v);
        }
    };
    let (res_e, res_a) = qw.residuals();
    let obs_index = qw.observability_index(tol).ok();
    let report = json!({
        "n": sys.n(),
        "m": sys.m(),
        "p": sys.p(),
        "regular": true,
        "q": qw.slow_dim(),
        "r": qw.fast_dim(),
        "s": qw.nilpotency_index(),
        "r_controllable": qw.r_controllable(tol),
        "r_observable": qw.r_observable(tol),
        "observability_index": obs_index,
        "window_length": qw.window_len(),
        "min_horizon": qw.min_horizon(),
        "residual_e": res_e,
        "residual_a": res_a,
    });
    info!(
        "regular pencil: q = {}, r = {}, s = {}, minimal horizon {}",
        qw.slow_dim(),
        qw.fast_dim(),
        qw.nilpotency_index(),
        qw.min_horizon()
    );
    Report::ok(report)
}

/// Window length and the excitation order needed for trajectories of
/// length window + horizon.
fn structure(cfg: &ExperimentConfig, qw: &QuasiWeierstrass) -> (usize, usize) {
    if cfg.conservative {
        let n = qw.system().n();
        let order = conservative_pe_order(n + cfg.horizon, n);
        (n, cfg.pe_order.unwrap_or(order))
    } else {
        let window = qw.window_len();
        let order = required_pe_order(window + cfg.horizon, qw.slow_dim(), qw.nilpotency_index());
        (window, cfg.pe_order.unwrap_or(order))
    }
}

fn check_length(cfg: &ExperimentConfig, m: usize, order: usize) -> Result<()> {
    let needed = min_data_length(m, order);
    if cfg.data_length < needed {
        bail!(
            "data length {} is too short for excitation of order {order}: minimal T is {needed}",
            cfg.data_length
        );
    }
    Ok(())
}

fn plant(cfg: &ExperimentConfig) -> Result<QuasiWeierstrass> {
    let sys = load_system(cfg.system.as_deref())?;
    Ok(QuasiWeierstrass::compute(&sys, cfg.rank_tol)?)
}

fn recorded_data(cfg: &ExperimentConfig, qw: &QuasiWeierstrass) -> Result<(Trajectory, PeReport)> {
    let (_, order) = structure(cfg, qw);
    match &cfg.data {
        Some(path) => {
            let traj = io::read_trajectory(path)
                .with_context(|| format!("reading data {}", path.display()))?;
            let pe = is_persistently_exciting(traj.inputs(), order, cfg.rank_tol);
            Ok((traj, pe))
        }
        None => {
            check_length(cfg, qw.system().m(), order)?;
            let data = collect_data(qw, cfg.data_length, order, cfg.seed)?;
            Ok((data.trajectory, data.pe))
        }
    }
}

fn representation(
    cfg: &ExperimentConfig,
    qw: &QuasiWeierstrass,
    data: &Trajectory,
) -> Result<HankelRepresentation> {
    let (window, _) = structure(cfg, qw);
    let truncation = if cfg.conservative { 1 } else { qw.nilpotency_index() };
    Ok(HankelRepresentation::new(data, window + cfg.horizon, truncation)?)
}

/// Records persistently exciting data and writes `data.csv` and
/// `pe_report.json`.
pub fn collect(cfg: &ExperimentConfig) -> Result<Report> {
    let qw = plant(cfg)?;
    let (_, order) = structure(cfg, &qw);
    check_length(cfg, qw.system().m(), order)?;
    let data = collect_data(&qw, cfg.data_length, order, cfg.seed)?;
    let dir = out_dir(cfg)?;
    io::write_trajectory(&dir.join("data.csv"), &data.trajectory)?;
    let pe = serde_json::to_value(&data.pe)?;
    write_json(&dir.join("pe_report.json"), &pe)?;
    info!(
        "collected {} samples, excitation of order {order}: {}",
        cfg.data_length, data.pe.verdict
    );
    Ok(Report {
        json: json!({"data": dir.join("data.csv"), "pe": pe}),
        ok: data.pe.verdict,
    })
}

pub fn check_pe(data: &Path, order: usize, tol: f64) -> Result<Report> {
    let traj = io::read_trajectory(data).with_context(|| format!("reading {}", data.display()))?;
    let pe = is_persistently_exciting(traj.inputs(), order, tol);
    info!(
        "rank {} of {} required (order {order}): {}",
        pe.achieved_rank, pe.required_rank, pe.verdict
    );
    Ok(Report {
        json: serde_json::to_value(&pe)?,
        ok: true,
    })
}

fn solution_json(result: &ddpc_core::Result<OcpSolution>) -> Value {
    match result {
        Ok(sol) => io::ocp_solution_to_json(sol),
        Err(e) => {
            let residual = match e {
                ddpc_core::Error::Infeasible { residual } => Some(*residual),
                _ => None,
            };
            json!({"feasible": false, "error": e.to_string(), "residual": residual})
        }
    }
}

/// Solves the data-driven and the model-based problem for one measured past
/// window and compares them.
pub fn ocp(cfg: &ExperimentConfig, past_file: &Path) -> Result<Report> {
    let qw = plant(cfg)?;
    let (data, _) = recorded_data(cfg, &qw)?;
    let rep = representation(cfg, &qw, &data)?;
    let past = io::read_trajectory(past_file)
        .with_context(|| format!("reading past window {}", past_file.display()))?;
    let (window, _) = structure(cfg, &qw);
    if past.len() < window {
        bail!("past window has {} samples, need {window}", past.len());
    }
    let past = past.window(past.end() + 1 - window as i64, window)?;
    let (m, p) = (qw.system().m(), qw.system().p());
    let mut spec = OcpSpec::new(
        cfg.horizon,
        cfg.q_weight.resolve(p)?,
        cfg.r_weight.resolve(m)?,
        past,
        window,
    )?;
    let t = spec.current_time();
    let schedule: Vec<Setpoint> = cfg.setpoints.iter().map(Setpoint::from).collect();
    if let Some(sp) = schedule.iter().rev().find(|sp| sp.start <= t) {
        spec = spec.with_setpoint(sp.u.clone(), sp.y.clone())?;
    }
    let dd = solve_data_driven_ocp(&rep, &spec);
    let mb = solve_model_based_ocp(&qw, &spec);
    let gap = match (&dd, &mb) {
        (Ok(a), Ok(b)) => Some(((a.cost - b.cost).abs(), (a.cost - b.cost).abs() / (1.0 + b.cost))),
        _ => None,
    };
    let report = json!({
        "time": t,
        "data_driven": solution_json(&dd),
        "model_based": solution_json(&mb),
        "cost_gap": gap.map(|g| g.0),
        "relative_cost_gap": gap.map(|g| g.1),
    });
    let dir = out_dir(cfg)?;
    write_json(&dir.join("ocp.json"), &report)?;
    if let Ok(sol) = &dd {
        let qp = build_data_driven_ocp(&rep, &spec)?;
        write_json(&dir.join("ocp_dump.json"), &io::ocp_dump(&qp, sol))?;
    }
    match gap {
        Some((_, rel)) => info!("both problems solved, relative cost gap {rel:.3e}"),
        None => warn!("at least one problem is infeasible"),
    }
    Ok(Report {
        json: report,
        ok: dd.is_ok() && mb.is_ok(),
    })
}

fn mpc_config(cfg: &ExperimentConfig, qw: QuasiWeierstrass) -> Result<MpcConfig> {
    let (m, p) = (qw.system().m(), qw.system().p());
    let mut mc = MpcConfig::new(qw, cfg.horizon, cfg.total_steps);
    if cfg.conservative {
        mc = mc.conservative();
    }
    mc.q_weight = cfg.q_weight.resolve(p)?;
    mc.r_weight = cfg.r_weight.resolve(m)?;
    mc.priming_steps = cfg.priming_steps.max(mc.window_len);
    mc.schedule = cfg.setpoints.iter().map(Setpoint::from).collect();
    if let Some(z) = &cfg.initial_slow {
        mc.initial_slow = Vector::from_vec(z.clone());
    }
    mc.settle_tol = cfg.settle_tol;
    mc.reconstruct_states = cfg.reconstruct_states;
    mc.validate()?;
    Ok(mc)
}

/// Runs the closed loop and writes `closed_loop.csv` and `summary.json`.
pub fn mpc(cfg: &ExperimentConfig) -> Result<Report> {
    let qw = plant(cfg)?;
    let (data, pe) = recorded_data(cfg, &qw)?;
    if !pe.verdict {
        warn!("recorded input is not persistently exciting of order {}", pe.order);
    }
    let rep = representation(cfg, &qw, &data)?;
    let mc = mpc_config(cfg, qw)?;
    let log = run_closed_loop_logged(&mc, &rep, cfg.seed)?;
    let report = stability_diagnostics(&log, &mc, cfg.settle_tol);
    let dir = out_dir(cfg)?;
    let csv_path = dir.join("closed_loop.csv");
    log.write_csv(fs::File::create(&csv_path)?)?;
    let summary = json!({
        "horizon": cfg.horizon,
        "data_length": data.len(),
        "seed": cfg.seed,
        "steps": log.records.len(),
        "all_feasible": report.all_feasible,
        "failing_step": report.failing_step,
        "failure": log.failure.as_ref().map(|f| f.message.clone()),
        "max_residual": report.max_residual,
        "pe": pe,
        "segments": report.segments,
        "log": csv_path,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    for s in &report.segments {
        info!(
            "setpoint from t = {}: settled at {:?}, cost non-increasing {}",
            s.start, s.settling_time, s.cost_non_increasing
        );
    }
    if let Some(f) = &log.failure {
        warn!("closed loop aborted at t = {}: {}", f.t, f.message);
    }
    Ok(Report {
        json: summary,
        ok: log.failure.is_none(),
    })
}

/// The reference experiment: four-state example, horizon 20, identity
/// weights, two setpoints and 60 recorded samples.
pub fn reference_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let qw = plant(cfg)?;
    let analysis = analyze(qw.system(), cfg.rank_tol).json;
    let (data, _) = recorded_data(cfg, &qw)?;
    let dir = out_dir(cfg)?;
    io::write_trajectory(&dir.join("data.csv"), &data)?;
    write_json(&dir.join("analysis.json"), &analysis)?;
    let mut report = mpc(cfg)?;
    report.json["analysis"] = analysis;
    report.json["note"] = json!(format!(
        "{} recorded samples are used; excitation of order {} with one input needs at least {} samples, more than the {} originally reported",
        cfg.data_length,
        structure(cfg, &qw).1,
        min_data_length(qw.system().m(), structure(cfg, &qw).1),
        presets::REPORTED_DATA_LENGTH
    ));
    write_json(&dir.join("summary.json"), &report.json)?;
    Ok(report)
}

/// Parses a `DDPC_LOG` value.
pub fn log_level(value: Option<&str>) -> Result<log::LevelFilter> {
    match value.map(str::to_ascii_lowercase).as_deref() {
        None | Some("info") => Ok(log::LevelFilter::Info),
        Some("quiet") => Ok(log::LevelFilter::Off),
        Some("debug") => Ok(log::LevelFilter::Debug),
        Some(other) => Err(anyhow!("DDPC_LOG must be quiet, info or debug, got `{other}`")),
    }
}
