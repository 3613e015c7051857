//! Stage dispatch and report files.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use conslaw_core::admissibility::extract_representation;
use conslaw_core::constitutive::elasticity_tensor;
use conslaw_core::solver::{affine_initial_field, run_with, sine_wave_field};
use conslaw_core::{
    assess, scan_acoustic, scan_directions, ConstitutiveModel, Error as CoreError, Field, HyperbolicityReport,
    MonitorTrace, ProbeSet, State, Ten2, Tolerances, Vec3,
};
use thiserror::Error;

use crate::config::{InitialSpec, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("model construction failed: {0}")]
    Model(CoreError),
}

/// Outcome category, ordered by stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    AdmissibilityFail,
    HyperbolicityFail,
    SimulationFail,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::AdmissibilityFail => 2,
            Status::HyperbolicityFail => 3,
            Status::SimulationFail => 4,
        }
    }
}

pub const CONFIG_ERROR_CODE: i32 = 64;
pub const IO_ERROR_CODE: i32 = 1;

#[derive(Debug, Clone)]
pub struct RunSummary {
    /// First failing category, or `Pass`.
    pub status: Status,
    /// One human-readable line per stage.
    pub lines: Vec<String>,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    header: String,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, comments: &[String], columns: &str, rows: &[String]) -> Result<(), RunError> {
        let mut text = self.header.clone();
        for c in comments {
            text.push_str("# ");
            text.push_str(c);
            text.push('\n');
        }
        if !columns.is_empty() {
            text.push_str(columns);
            text.push('\n');
        }
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }
}

/// Comment header shared by every output file.
pub fn file_header(cfg: &RunConfig) -> String {
    format!("# conslaw {VERSION}\n# config_sha256 = {}\n# seed = {}\n", cfg.hash(), cfg.seed)
}

/// Run every stage enabled by `cfg.mode` and write reports into `cfg.out`.
pub fn run_all(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let tol = Tolerances::DEFAULT;
    let model = cfg.model.build().map_err(RunError::Model)?;
    let dir = cfg.out.as_path();
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    remove_stale_snapshots(dir)?;

    let mut w = Writer { dir, header: file_header(cfg), files: Vec::new() };
    let mut lines = Vec::new();
    let mut failures = Vec::new();

    if cfg.mode.admissibility() {
        let (ok, line) = admissibility_stage(cfg, model.as_ref(), &tol, &mut w)?;
        lines.push(line);
        if !ok {
            failures.push(Status::AdmissibilityFail);
        }
    }
    if cfg.mode.hyperbolicity() {
        let (ok, line) = hyperbolicity_stage(cfg, model.as_ref(), &tol, &mut w)?;
        lines.push(line);
        if !ok {
            failures.push(Status::HyperbolicityFail);
        }
    }
    if cfg.mode.simulate() {
        let (status, line) = simulate_stage(cfg, model.as_ref(), &tol, &mut w)?;
        lines.push(line);
        if status != Status::Pass {
            failures.push(status);
        }
    }

    Ok(RunSummary { status: failures.first().copied().unwrap_or(Status::Pass), lines, files: w.files })
}

fn remove_stale_snapshots(dir: &Path) -> Result<(), RunError> {
    let entries = fs::read_dir(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    for entry in entries.flatten() {
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("snapshot_") && name.ends_with(".csv") {
            let path = entry.path();
            fs::remove_file(&path).map_err(|source| RunError::Io { path, source })?;
        }
    }
    Ok(())
}

fn admissibility_stage(
    cfg: &RunConfig,
    model: &dyn ConstitutiveModel,
    tol: &Tolerances,
    w: &mut Writer,
) -> Result<(bool, String), RunError> {
    let probes = ProbeSet::random(cfg.admissibility.probes, cfg.seed);
    let report = assess(model, &probes, tol);
    let comments = vec![format!("model = {}", report.model), format!("probes = {}", report.probe_count)];
    w.write("admissibility.csv", &comments, conslaw_core::AdmissibilityReport::CSV_HEADER, &report.csv_rows())?;

    let mut kv = report.to_key_value();
    match extract_representation(model, &probes, tol) {
        Ok(r) => {
            let _ = writeln!(kv, "v_fit = {}", fmt_ten2(&r.v_fit));
            let _ = writeln!(kv, "m_fit = {}", fmt_ten2(&r.m_fit));
            let _ = writeln!(kv, "v_symmetry_residual = {:.6e}", r.symmetry_residual);
            let _ = writeln!(kv, "v_linearity_residual = {:.6e}", r.linearity_residual);
            let _ = writeln!(kv, "split_residual = {:.6e}", r.split_residual);
            let _ = writeln!(kv, "split_ok = {}", r.split_ok);
        }
        Err(e) => {
            let _ = writeln!(kv, "representation_error = {e}");
        }
    }
    let kv_lines: Vec<String> = kv.lines().map(str::to_string).collect();
    w.write("admissibility.txt", &[], "", &kv_lines)?;

    let line = if report.all_passed() {
        format!("admissibility: PASS ({} checks, {} probes)", report.outcomes.len(), report.probe_count)
    } else {
        let detail: Vec<String> = report
            .outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| match (&o.error, o.worst_probe) {
                (Some(e), _) => format!("{} ({e})", o.kind.name()),
                (None, Some(p)) => format!("{} residual {:.3e} vs tolerance {:.1e} at probe {p}", o.kind.name(), o.value, o.tolerance),
                (None, None) => format!("{} residual {:.3e} vs tolerance {:.1e}", o.kind.name(), o.value, o.tolerance),
            })
            .collect();
        format!("admissibility: FAIL {}", detail.join("; "))
    };
    Ok((report.all_passed(), line))
}

fn hyperbolicity_stage(
    cfg: &RunConfig,
    model: &dyn ConstitutiveModel,
    tol: &Tolerances,
    w: &mut Writer,
) -> Result<(bool, String), RunError> {
    let f = cfg.hyperbolicity.deformation;
    let s4_at = |f: &Ten2| elasticity_tensor(model, &State::new(*f, Vec3::ZERO));
    let n = cfg.hyperbolicity.directions;
    let result = match model.classical_density() {
        Some(rho) => scan_directions(s4_at, &f, rho, n, tol),
        None => scan_acoustic(s4_at, &f, n, tol),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            w.write("hyperbolicity.csv", &[format!("error = {e}")], HyperbolicityReport::CSV_HEADER, &[])?;
            return Ok((false, format!("hyperbolicity: FAIL ({e})")));
        }
    };
    let worst = report.worst();
    let comments = vec![
        format!("model = {}", model.name()),
        format!("deformation = {}", fmt_ten2(&f)),
        format!("directions = {}", report.records.len()),
        format!("strongly_elliptic = {}", report.strongly_elliptic),
        format!("min_eigenvalue = {:.12e}", report.min_eigenvalue),
        format!("min_direction = {}", fmt_vec3(&worst.w)),
        format!("min_eigenvector = {}", fmt_vec3(&worst.min_vector)),
        format!("se_tol = {:.1e}", report.se_tol),
    ];
    w.write("hyperbolicity.csv", &comments, HyperbolicityReport::CSV_HEADER, &report.csv_rows())?;
    let verdict = if report.strongly_elliptic { "PASS" } else { "FAIL" };
    let line = format!(
        "hyperbolicity: {verdict} (min acoustic eigenvalue {:.6e} at direction {} over {} directions)",
        report.min_eigenvalue,
        fmt_vec3(&worst.w),
        report.records.len()
    );
    Ok((report.strongly_elliptic, line))
}

fn simulation_status(e: &CoreError) -> Status {
    match e {
        CoreError::NonHyperbolicState { .. } => Status::HyperbolicityFail,
        _ => Status::SimulationFail,
    }
}

fn simulate_stage(
    cfg: &RunConfig,
    model: &dyn ConstitutiveModel,
    tol: &Tolerances,
    w: &mut Writer,
) -> Result<(Status, String), RunError> {
    let initial = cfg.grid.build().and_then(|grid| match &cfg.initial {
        InitialSpec::Sine { wave, amplitude } => sine_wave_field(model, grid, *wave, *amplitude, tol),
        InitialSpec::Affine { a_mat, b_mat, a, b, c, x0 } => {
            affine_initial_field(model, grid, a_mat, b_mat, a, b, c, x0, tol)
        }
    });
    let field = match initial {
        Ok(f) => f,
        Err(e) => return Ok((simulation_status(&e), format!("simulate: FAIL initial data ({e})"))),
    };

    let every = cfg.simulate.snapshot_every;
    let writer = RefCell::new(&mut *w);
    let io_error: RefCell<Option<RunError>> = RefCell::new(None);
    let observe = |step: usize, field: &Field, last: bool| -> conslaw_core::Result<()> {
        if !(step == 0 || last || (every > 0 && step % every == 0)) {
            return Ok(());
        }
        let rows = field.snapshot_rows(model)?;
        let comments = vec![format!("step = {step}"), format!("t = {:.12e}", field.t)];
        let name = format!("snapshot_{step:06}.csv");
        if let Err(e) = writer.borrow_mut().write(&name, &comments, Field::SNAPSHOT_HEADER, &rows) {
            *io_error.borrow_mut() = Some(e);
            return Err(CoreError::Precondition("snapshot write failed".into()));
        }
        Ok(())
    };
    let result = run_with(
        model,
        field,
        cfg.simulate.t_end,
        cfg.simulate.cfl,
        cfg.simulate.monitor_every,
        tol,
        observe,
    );
    if let Some(e) = io_error.into_inner() {
        return Err(e);
    }
    let (last, trace) = match result {
        Ok(r) => r,
        Err(e) => return Ok((simulation_status(&e), format!("simulate: FAIL ({e})"))),
    };
    let w = writer.into_inner();
    write_monitors(w, &trace, &last)?;
    let steps = trace.last().map_or(0, |r| r.step);
    let line = format!(
        "simulate: PASS ({steps} steps to t = {:.4}; max energy drift {:.3e}, max involution residual {:.3e}, max dissipation residual {:.3e})",
        last.t,
        trace.max_abs_drift(),
        trace.max_involution(),
        trace.max_dissipation()
    );
    Ok((Status::Pass, line))
}

fn write_monitors(w: &mut Writer, trace: &MonitorTrace, last: &Field) -> Result<(), RunError> {
    let comments = vec![format!("cells = {}", last.grid.len()), format!("t_final = {:.12e}", last.t)];
    w.write("monitors.csv", &comments, MonitorTrace::CSV_HEADER, &trace.csv_rows())
}

fn fmt_vec3(v: &Vec3) -> String {
    format!("({:.6}, {:.6}, {:.6})", v.0[0], v.0[1], v.0[2])
}

fn fmt_ten2(t: &Ten2) -> String {
    let rows: Vec<String> = t.0.iter().map(|r| format!("[{:.9e}, {:.9e}, {:.9e}]", r[0], r[1], r[2])).collect();
    format!("[{}]", rows.join(", "))
}
