//! Energy, involution and dissipation diagnostics, and the time loop.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::{step_lax_friedrichs, Field};
use crate::constitutive::ConstitutiveModel;
use crate::error::{Error, Result};
use crate::tensor::{Ten2, Vec3};
use crate::tolerances::Tolerances;

/// Norm above which a run is declared blown up.
pub const BLOWUP_NORM: f64 = 1e12;

/// `Σ τ̂ dV` in cell order.
pub fn total_energy(model: &dyn ConstitutiveModel, field: &Field) -> Result<f64> {
    let dv = field.grid.cell_volume();
    let densities = field.cells.par_iter().map(|s| model.energy(s)).collect::<Result<Vec<_>>>()?;
    Ok(densities.iter().sum::<f64>() * dv)
}

/// Largest `‖∂_b F c_a − ∂_a F c_b‖` over cells and axis pairs, with central
/// differences along active axes and zero derivatives along inactive ones.
pub fn involution_residual(field: &Field) -> f64 {
    let g = field.grid;
    let derivative = |idx: usize, axis: usize| -> Ten2 {
        if axis >= g.dims {
            return Ten2::ZERO;
        }
        let (r, l) = (g.neighbor(idx, axis, 1), g.neighbor(idx, axis, -1));
        (field.cells[r].f - field.cells[l].f) * (1.0 / (2.0 * g.h[axis]))
    };
    (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let d = [derivative(idx, 0), derivative(idx, 1), derivative(idx, 2)];
            let mut worst = 0.0f64;
            for a in 0..3 {
                for b in (a + 1)..3 {
                    worst = worst.max((d[b].column(a) - d[a].column(b)).norm());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest `|τ̇ − Ŝ·Ḟ − v̂·ṗ|` over cells, with left-point rates across one step.
pub fn dissipation_residual(model: &dyn ConstitutiveModel, before: &Field, after: &Field, dt: f64) -> Result<f64> {
    let per_cell = before
        .cells
        .par_iter()
        .zip(&after.cells)
        .map(|(s0, s1)| {
            let tau_dot = (model.energy(s1)? - model.energy(s0)?) / dt;
            let fd = (s1.f - s0.f) * (1.0 / dt);
            let pd = (s1.p - s0.p) * (1.0 / dt);
            Ok((tau_dot - model.stress(s0)?.dot(&fd) - model.velocity(s0)?.dot(&pd)).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_cell.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRecord {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    /// `(E − E₀)/|E₀|`, or `E − E₀` when `E₀ = 0`.
    pub drift: f64,
    pub involution: f64,
    /// Zero for the initial record.
    pub dissipation: f64,
    pub momentum: Vec3,
    pub deformation: Ten2,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonitorTrace {
    pub records: Vec<MonitorRecord>,
}

impl MonitorTrace {
    pub const CSV_HEADER: &'static str = "step,t,energy,drift,involution,dissipation";

    pub fn csv_rows(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                let mut s = format!("{}", r.step);
                for x in [r.t, r.energy, r.drift, r.involution, r.dissipation] {
                    let _ = write!(s, ",{x:.12e}");
                }
                s
            })
            .collect()
    }

    pub fn last(&self) -> Option<&MonitorRecord> {
        self.records.last()
    }

    pub fn max_abs_drift(&self) -> f64 {
        self.records.iter().map(|r| r.drift.abs()).fold(0.0, f64::max)
    }

    pub fn max_involution(&self) -> f64 {
        self.records.iter().map(|r| r.involution).fold(0.0, f64::max)
    }

    pub fn max_dissipation(&self) -> f64 {
        self.records.iter().map(|r| r.dissipation).fold(0.0, f64::max)
    }
}

fn record(model: &dyn ConstitutiveModel, field: &Field, step: usize, e0: Option<f64>, dissipation: f64) -> Result<MonitorRecord> {
    let energy = total_energy(model, field)?;
    let e0 = e0.unwrap_or(energy);
    let drift = if e0 == 0.0 { energy - e0 } else { (energy - e0) / e0.abs() };
    let (deformation, momentum) = field.totals();
    Ok(MonitorRecord { step, t: field.t, energy, drift, involution: involution_residual(field), dissipation, momentum, deformation })
}

/// Step until `t_end`, recording monitors initially, every `monitor_every`
/// steps and at the final step.
pub fn run(
    model: &dyn ConstitutiveModel,
    field: Field,
    t_end: f64,
    cfl: f64,
    monitor_every: usize,
    tol: &Tolerances,
) -> Result<(Field, MonitorTrace)> {
    run_with(model, field, t_end, cfl, monitor_every, tol, |_, _, _| Ok(()))
}

/// [`run`] with a callback `(step, field, is_final)` invoked after the initial
/// state and after every step.
pub fn run_with(
    model: &dyn ConstitutiveModel,
    field: Field,
    t_end: f64,
    cfl: f64,
    monitor_every: usize,
    tol: &Tolerances,
    mut observe: impl FnMut(usize, &Field, bool) -> Result<()>,
) -> Result<(Field, MonitorTrace)> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let every = monitor_every.max(1);
    let first = record(model, &field, 0, None, 0.0)?;
    let e0 = first.energy;
    let mut trace = MonitorTrace { records: vec![first] };
    observe(0, &field, false)?;
    let mut cur = field;
    let mut step = 0usize;
    let end = cur.t + t_end;
    while cur.t < end * (1.0 - 1e-14) {
        let next = step_lax_friedrichs(model, &cur, cfl, end - cur.t, tol)?;
        step += 1;
        let norm = next.field.max_norm();
        if !(norm <= BLOWUP_NORM) {
            return Err(Error::Blowup { step, norm });
        }
        let done = next.field.t >= end * (1.0 - 1e-14);
        if step % every == 0 || done {
            let d = dissipation_residual(model, &cur, &next.field, next.dt)?;
            trace.records.push(record(model, &next.field, step, Some(e0), d)?);
        }
        observe(step, &next.field, done)?;
        cur = next.field;
    }
    Ok((cur, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{classical_model, IsotropicEnergy, State};
    use crate::solver::Grid;
    use std::sync::Arc;

    #[test]
    fn rest_state_has_quiet_monitors() {
        let m = classical_model(1.0, Arc::new(IsotropicEnergy::linear(2.0, 1.0))).unwrap();
        let field = Field::uniform(Grid::line(16, 1.0).unwrap(), State::rest());
        let (out, trace) = run(&m, field, 0.3, 0.5, 3, &Tolerances::DEFAULT).unwrap();
        assert!((out.t - 0.3).abs() < 1e-12);
        assert!(trace.records.len() > 2);
        assert_eq!(trace.max_abs_drift(), 0.0);
        assert_eq!(trace.max_involution(), 0.0);
        assert_eq!(trace.max_dissipation(), 0.0);
        assert_eq!(trace.csv_rows().len(), trace.records.len());
    }

    #[test]
    fn involution_detects_incompatible_field() {
        let grid = Grid::cube(8, 1.0).unwrap();
        let mut field = Field::uniform(grid, State::rest());
        for (idx, s) in field.cells.iter_mut().enumerate() {
            let x = grid.center(idx);
            // F c_1 depends on x_2 while F c_2 is constant: not a gradient.
            s.f.0[0][0] += 0.1 * (2.0 * std::f64::consts::PI * x.0[1]).sin();
        }
        assert!(involution_residual(&field) > 0.1);
    }

    #[test]
    fn blowup_is_reported() {
        let m = classical_model(1.0, Arc::new(IsotropicEnergy::linear(2.0, 1.0))).unwrap();
        let mut field = Field::uniform(Grid::line(8, 1.0).unwrap(), State::rest());
        field.cells[3].p = Vec3::new(1e14, 0.0, 0.0);
        match run(&m, field, 1.0, 0.5, 1, &Tolerances::DEFAULT) {
            Err(Error::Blowup { step: 1, .. }) => {}
            other => panic!("expected blowup, got {other:?}"),
        }
    }
}
