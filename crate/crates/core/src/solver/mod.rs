//! Periodic finite-volume solver for `Ḟ = Div(v⊗1)`, `ṗ = Div S`.
//!
//! The scheme is first-order local Lax–Friedrichs (Rusanov): the interface
//! flux is the flux average minus `½ a [U]`, with `a` the larger of the two
//! local acoustic speeds along the interface normal.

mod grid;
pub mod monitors;
pub mod wave;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use grid::Grid;
pub use monitors::{run, run_with, MonitorRecord, MonitorTrace};

use crate::constitutive::{elasticity_tensor, momentum_from_velocity_with, velocity_jacobian, ConstitutiveModel, State};
use crate::error::{Error, Result};
use crate::hyperbolicity::acoustic_tensor_with;
use crate::linalg::eig_sym_with;
use crate::tensor::{outer, Ten2, Vec3};
use crate::tolerances::Tolerances;

/// Cell states at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub cells: Vec<State>,
    pub t: f64,
}

impl Field {
    pub fn uniform(grid: Grid, state: State) -> Self {
        Field { grid, cells: vec![state; grid.len()], t: 0.0 }
    }

    /// Sample `x ↦ (F, v)` at cell centers and convert velocities to momenta.
    pub fn from_velocity_fn(
        model: &dyn ConstitutiveModel,
        grid: Grid,
        tol: &Tolerances,
        f: impl Fn(&Vec3) -> (Ten2, Vec3) + Sync,
    ) -> Result<Self> {
        let cells = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (def, vel) = f(&grid.center(idx));
                Ok(State::new(def, momentum_from_velocity_with(model, &def, &vel, tol)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Field { grid, cells, t: 0.0 })
    }

    pub fn is_finite(&self) -> bool {
        self.cells.iter().all(State::is_finite)
    }

    /// Largest `max(‖F‖, |p|)` over cells; infinite when any value is not finite.
    pub fn max_norm(&self) -> f64 {
        self.cells
            .iter()
            .map(|s| if s.is_finite() { s.f.norm().max(s.p.norm()) } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }

    /// `U(x) ↦ (F(−x), −p(−x))`.
    pub fn mirrored(&self) -> Field {
        let cells = (0..self.grid.len())
            .map(|idx| {
                let s = self.cells[self.grid.mirror(idx)];
                State::new(s.f, -s.p)
            })
            .collect();
        Field { grid: self.grid, cells, t: self.t }
    }

    /// `(Σ F dV, Σ p dV)`, summed in cell order.
    pub fn totals(&self) -> (Ten2, Vec3) {
        let dv = self.grid.cell_volume();
        let mut f = Ten2::ZERO;
        let mut p = Vec3::ZERO;
        for s in &self.cells {
            f += s.f * dv;
            p += s.p * dv;
        }
        (f, p)
    }

    pub const SNAPSHOT_HEADER: &'static str =
        "cell,x,y,z,F11,F12,F13,F21,F22,F23,F31,F32,F33,p1,p2,p3,v1,v2,v3,energy";

    /// Snapshot rows matching [`Field::SNAPSHOT_HEADER`].
    pub fn snapshot_rows(&self, model: &dyn ConstitutiveModel) -> Result<Vec<String>> {
        let mut rows = Vec::with_capacity(self.cells.len());
        for (idx, s) in self.cells.iter().enumerate() {
            let x = self.grid.center(idx);
            let v = model.velocity(s)?;
            let e = model.energy(s)?;
            let mut row = format!("{idx}");
            let flat = s.f.0.iter().flatten();
            for val in x.0.iter().chain(flat).chain(&s.p.0).chain(&v.0).chain(std::iter::once(&e)) {
                let _ = write!(row, ",{val:.12e}");
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

/// Axis-α fluxes: `−v⊗c_α` for `F` and `−S c_α` for `p`.
pub fn flux(model: &dyn ConstitutiveModel, s: &State) -> Result<([Ten2; 3], [Vec3; 3])> {
    let v = model.velocity(s)?;
    let stress = model.stress(s)?;
    let mut gf = [Ten2::ZERO; 3];
    let mut gp = [Vec3::ZERO; 3];
    for a in 0..3 {
        gf[a] = -outer(&v, &Vec3::basis(a));
        gp[a] = -stress.column(a);
    }
    Ok((gf, gp))
}

/// Largest characteristic speed along `w`: `√λ_max(N^½ E(w) N^½)` with
/// `N = ∂_p v̂`. Fails when `E(w)` has a negative eigenvalue.
pub fn local_wave_speed(model: &dyn ConstitutiveModel, s: &State, w: &Vec3, cell: usize, tol: &Tolerances) -> Result<f64> {
    let s4 = elasticity_tensor(model, s)?;
    acoustic_speed(model, s, &s4, w, cell, tol)
}

fn acoustic_speed(
    model: &dyn ConstitutiveModel,
    s: &State,
    s4: &crate::tensor::Ten4,
    w: &Vec3,
    cell: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let at = acoustic_tensor_with(s4, w, tol)?;
    let scale = at.eigenvalues()[0].abs().max(1.0);
    if at.min_eigenvalue() < -tol.eig_tol * scale {
        return Err(Error::NonHyperbolicState { cell, eigenvalue: at.min_eigenvalue() });
    }
    let top = if let Some(rho) = model.classical_density() {
        at.eigenvalues()[0] / rho
    } else {
        let n = velocity_jacobian(model, s, tol)?.sym();
        let ne = eig_sym_with(&n, tol)?;
        if ne.values[2] <= 0.0 {
            return Err(Error::Precondition(format!("velocity Jacobian not positive in cell {cell}")));
        }
        let mut root = Ten2::ZERO;
        for k in 0..3 {
            root += outer(&ne.vectors[k], &ne.vectors[k]) * ne.values[k].sqrt();
        }
        let k = root.matmul(&at.e.sym()).matmul(&root);
        eig_sym_with(&k.sym(), tol)?.values[0]
    };
    Ok(top.max(0.0).sqrt())
}

struct CellEval {
    gf: [Ten2; 3],
    gp: [Vec3; 3],
    speed: [f64; 3],
}

fn evaluate(model: &dyn ConstitutiveModel, field: &Field, tol: &Tolerances) -> Result<Vec<CellEval>> {
    let grid = field.grid;
    field
        .cells
        .par_iter()
        .enumerate()
        .map(|(idx, s)| {
            let (gf, gp) = flux(model, s)?;
            let s4 = elasticity_tensor(model, s)?;
            let mut speed = [0.0; 3];
            for a in grid.axes() {
                speed[a] = acoustic_speed(model, s, &s4, &Vec3::basis(a), idx, tol)?;
            }
            Ok(CellEval { gf, gp, speed })
        })
        .collect()
}

/// Result of one explicit step.
#[derive(Debug, Clone)]
pub struct Step {
    pub field: Field,
    pub dt: f64,
    /// Largest speed per axis used for the time step.
    pub max_speed: [f64; 3],
}

/// One Rusanov step with `Δt = cfl / Σ_α (a_α / h_α)`, capped at `dt_max`.
///
/// In one dimension this is `cfl·h / a_max`.
pub fn step_lax_friedrichs(
    model: &dyn ConstitutiveModel,
    field: &Field,
    cfl: f64,
    dt_max: f64,
    tol: &Tolerances,
) -> Result<Step> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidArgument(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    let grid = field.grid;
    let evals = evaluate(model, field, tol)?;
    let mut max_speed = [0.0f64; 3];
    for e in &evals {
        for a in grid.axes() {
            max_speed[a] = max_speed[a].max(e.speed[a]);
        }
    }
    let rate: f64 = grid.axes().map(|a| max_speed[a] / grid.h[a]).sum();
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Precondition(format!("maximum wave speed must be finite and positive, got {max_speed:?}")));
    }
    let dt = (cfl / rate).min(dt_max);
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("non-positive time step {dt}")));
    }

    // Flux through the right face of each cell along each axis.
    let faces: Vec<[(Ten2, Vec3); 3]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut out = [(Ten2::ZERO, Vec3::ZERO); 3];
            for a in grid.axes() {
                let r = grid.neighbor(idx, a, 1);
                let (el, er) = (&evals[idx], &evals[r]);
                let (ul, ur) = (&field.cells[idx], &field.cells[r]);
                let s = el.speed[a].max(er.speed[a]);
                out[a] = (
                    (el.gf[a] + er.gf[a]) * 0.5 - (ur.f - ul.f) * (0.5 * s),
                    (el.gp[a] + er.gp[a]) * 0.5 - (ur.p - ul.p) * (0.5 * s),
                );
            }
            out
        })
        .collect();

    let cells = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut s = field.cells[idx];
            for a in grid.axes() {
                let l = grid.neighbor(idx, a, -1);
                let lambda = dt / grid.h[a];
                s.f -= (faces[idx][a].0 - faces[l][a].0) * lambda;
                s.p -= (faces[idx][a].1 - faces[l][a].1) * lambda;
            }
            s
        })
        .collect();
    Ok(Step { field: Field { grid, cells, t: field.t + dt }, dt, max_speed })
}

/// Affine data `F = A + (a·(x − x₀)) b⊗a`, `v = B(x − x₀) + c` at cell centers.
#[allow(clippy::too_many_arguments)]
pub fn affine_initial_field(
    model: &dyn ConstitutiveModel,
    grid: Grid,
    a_mat: &Ten2,
    b_mat: &Ten2,
    a: &Vec3,
    b: &Vec3,
    c: &Vec3,
    x0: &Vec3,
    tol: &Tolerances,
) -> Result<Field> {
    let ba = outer(b, a);
    Field::from_velocity_fn(model, grid, tol, |x| {
        let d = *x - *x0;
        (*a_mat + ba * a.dot(&d), b_mat.apply(&d) + *c)
    })
}

/// Polarization of a plane sine wave travelling along `c_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveMode {
    Longitudinal,
    Transverse,
}

impl WaveMode {
    pub fn polarization(self) -> Vec3 {
        match self {
            WaveMode::Longitudinal => Vec3::basis(0),
            WaveMode::Transverse => Vec3::basis(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WaveMode::Longitudinal => "longitudinal",
            WaveMode::Transverse => "transverse",
        }
    }
}

/// Linearized speed `√(d·N E(c_1) d)` of the mode at the rest state.
pub fn linear_mode_speed(model: &dyn ConstitutiveModel, mode: WaveMode, tol: &Tolerances) -> Result<f64> {
    let rest = State::rest();
    let d = mode.polarization();
    let e = acoustic_tensor_with(&elasticity_tensor(model, &rest)?, &Vec3::basis(0), tol)?.e;
    let n = velocity_jacobian(model, &rest, tol)?;
    let c2 = d.dot(&n.matmul(&e).apply(&d));
    if !(c2 > 0.0) {
        return Err(Error::Precondition(format!("mode {} has no real speed", mode.name())));
    }
    Ok(c2.sqrt())
}

/// Right-travelling sine wave of amplitude `eps` along `c_1`:
/// `F = 1 + ε sin(2πx/L) d⊗c_1`, `v = −c ε sin(2πx/L) d`.
pub fn sine_wave_field(model: &dyn ConstitutiveModel, grid: Grid, mode: WaveMode, eps: f64, tol: &Tolerances) -> Result<Field> {
    let c = linear_mode_speed(model, mode, tol)?;
    let d = mode.polarization();
    let length = grid.h[0] * grid.n[0] as f64;
    let dd = outer(&d, &Vec3::basis(0));
    Field::from_velocity_fn(model, grid, tol, |x| {
        let s = (2.0 * std::f64::consts::PI * x.0[0] / length).sin();
        (Ten2::IDENTITY + dd * (eps * s), d * (-c * eps * s))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{classical_model, stored_energy_registry, tensor_mass_model, IsotropicEnergy};
    use std::sync::Arc;

    fn tol() -> Tolerances {
        Tolerances::DEFAULT
    }

    fn linear_model() -> crate::constitutive::ClassicalModel {
        classical_model(1.0, Arc::new(IsotropicEnergy::linear(2.0, 1.0))).unwrap()
    }

    #[test]
    fn flux_examples() {
        let m = linear_model();
        let (gf, gp) = flux(&m, &State::rest()).unwrap();
        assert!(gf.iter().all(|t| *t == Ten2::ZERO) && gp.iter().all(|v| *v == Vec3::ZERO));
        let (gf, gp) = flux(&m, &State::new(Ten2::IDENTITY, Vec3::basis(0))).unwrap();
        assert_eq!(gf[0].column(0), Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(gf[0].column(1), Vec3::ZERO);
        assert_eq!(gf[1].column(1), Vec3::new(-1.0, 0.0, 0.0));
        assert!(gp.iter().all(|v| *v == Vec3::ZERO));
    }

    #[test]
    fn uniform_fields_are_stationary() {
        let s = State::new(Ten2([[1.1, 0.05, 0.0], [0.0, 0.95, 0.02], [0.01, 0.0, 1.02]]), Vec3::new(0.3, -0.2, 0.1));
        let mut models: Vec<Box<dyn ConstitutiveModel>> = stored_energy_registry(2.0, 1.0)
            .into_iter()
            .map(|se| Box::new(classical_model(1.3, se).unwrap()) as Box<dyn ConstitutiveModel>)
            .collect();
        models.push(Box::new(tensor_mass_model(Ten2::diag(1.0, 0.5, 2.0), Arc::new(IsotropicEnergy::svk(2.0, 1.0))).unwrap()));
        for grid in [Grid::line(8, 1.0).unwrap(), Grid::cube(4, 1.0).unwrap()] {
            for m in &models {
                let field = Field::uniform(grid, s);
                let next = step_lax_friedrichs(m.as_ref(), &field, 0.9, f64::INFINITY, &tol()).unwrap();
                for c in &next.field.cells {
                    assert!((c.f - s.f).norm_inf() <= 1e-13 * s.f.norm_inf());
                    assert!((c.p - s.p).norm_inf() <= 1e-13 * s.p.norm_inf());
                }
            }
        }
    }

    #[test]
    fn time_step_follows_cfl() {
        let grid = Grid::line(10, 1.0).unwrap();
        let field = Field::uniform(grid, State::rest());
        let st = step_lax_friedrichs(&linear_model(), &field, 0.5, f64::INFINITY, &tol()).unwrap();
        assert!((st.max_speed[0] - 2.0).abs() < 1e-12);
        assert!((st.dt - 0.5 * 0.1 / 2.0).abs() < 1e-15);
        let capped = step_lax_friedrichs(&linear_model(), &field, 0.5, 1e-3, &tol()).unwrap();
        assert_eq!(capped.dt, 1e-3);
        assert!(step_lax_friedrichs(&linear_model(), &field, 1.5, 1.0, &tol()).is_err());
    }

    #[test]
    fn refuses_non_elliptic_state() {
        let m = classical_model(1.0, Arc::new(IsotropicEnergy::linear(2.0, -1.0))).unwrap();
        let field = Field::uniform(Grid::line(8, 1.0).unwrap(), State::rest());
        let err = step_lax_friedrichs(&m, &field, 0.5, 1.0, &tol()).unwrap_err();
        match err {
            Error::NonHyperbolicState { eigenvalue, .. } => assert!((eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tensor_mass_speed() {
        let m = tensor_mass_model(Ten2::diag(4.0, 1.0, 1.0), Arc::new(IsotropicEnergy::linear(2.0, 1.0))).unwrap();
        // N E(c_1) = diag(4, 1, 1)·diag(4, 1, 1): fastest speed 4.
        let c = local_wave_speed(&m, &State::rest(), &Vec3::basis(0), 0, &tol()).unwrap();
        assert!((c - 4.0).abs() < 1e-6);
    }

    #[test]
    fn affine_field_gradients() {
        let m = classical_model(1.0, Arc::new(IsotropicEnergy::svk(2.0, 1.0))).unwrap();
        let grid = Grid::line(40, 1.0).unwrap();
        let a = Vec3::basis(0);
        let b = Vec3::new(0.1, -0.2, 0.05);
        let bm = Ten2([[0.3, 0.0, 0.0], [-0.1, 0.0, 0.0], [0.2, 0.0, 0.0]]);
        let c = Vec3::new(0.1, 0.0, -0.1);
        let x0 = grid.center(20);
        let a_mat = Ten2::diag(1.05, 1.0, 0.98);
        let field = affine_initial_field(&m, grid, &a_mat, &bm, &a, &b, &c, &x0, &tol()).unwrap();
        assert_eq!(field.cells[20].f, a_mat);
        assert!((field.cells[20].p - c).norm() < 1e-15);
        let h = grid.h[0];
        let (l, r) = (&field.cells[19], &field.cells[21]);
        let df = (r.f - l.f) * (1.0 / (2.0 * h));
        assert!((df - outer(&b, &a)).norm_inf() < 1e-12);
        let dv = (r.p - l.p) * (1.0 / (2.0 * h));
        assert!((dv - bm.column(0)).norm_inf() < 1e-12);

        let flat = affine_initial_field(&m, grid, &a_mat, &Ten2::ZERO, &Vec3::ZERO, &Vec3::ZERO, &c, &x0, &tol()).unwrap();
        assert!(flat.cells.iter().all(|s| s.f == a_mat && s.p == c));
    }

    #[test]
    fn mirror_symmetry_of_the_scheme() {
        let m = classical_model(1.0, Arc::new(IsotropicEnergy::neo_hookean(2.0, 1.0))).unwrap();
        let grid = Grid::line(32, 1.0).unwrap();
        let field = Field::from_velocity_fn(&m, grid, &tol(), |x| {
            let s = (2.0 * std::f64::consts::PI * x.0[0]).sin();
            let c = (4.0 * std::f64::consts::PI * x.0[0]).cos();
            (Ten2::IDENTITY + Ten2([[0.05 * s, 0.0, 0.0], [0.02 * c, 0.0, 0.0], [0.0, 0.0, 0.0]]), Vec3::new(0.1 * c, 0.03 * s, 0.01))
        })
        .unwrap();
        let mut a = field.clone();
        let mut b = field.mirrored();
        for _ in 0..20 {
            a = step_lax_friedrichs(&m, &a, 0.8, f64::INFINITY, &tol()).unwrap().field;
            b = step_lax_friedrichs(&m, &b, 0.8, f64::INFINITY, &tol()).unwrap().field;
        }
        let back = b.mirrored();
        for (x, y) in a.cells.iter().zip(&back.cells) {
            assert!((x.f - y.f).norm_inf() < 1e-13 && (x.p - y.p).norm_inf() < 1e-13);
        }
    }

    #[test]
    fn conservation_in_three_dimensions() {
        let m = classical_model(1.0, Arc::new(IsotropicEnergy::svk(2.0, 1.0))).unwrap();
        let grid = Grid::cube(6, 1.0).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let field = Field::from_velocity_fn(&m, grid, &tol(), |x| {
            let f = Ten2::IDENTITY + Ten2::from_fn(|i, j| 0.02 * ((i + 1) as f64 * tau * x.0[j]).sin());
            (f, Vec3::new((tau * x.0[1]).cos(), 0.1, (tau * x.0[2]).sin()) * 0.05)
        })
        .unwrap();
        let (f0, p0) = field.totals();
        let mut cur = field;
        for _ in 0..10 {
            cur = step_lax_friedrichs(&m, &cur, 0.9, f64::INFINITY, &tol()).unwrap().field;
        }
        let (f1, p1) = cur.totals();
        assert!((f1 - f0).norm_inf() <= 1e-12 * f0.norm_inf());
        assert!((p1 - p0).norm_inf() <= 1e-12 * p0.norm_inf().max(1.0));
    }

    #[test]
    fn snapshot_rows_shape() {
        let field = Field::uniform(Grid::line(4, 1.0).unwrap(), State::rest());
        let rows = field.snapshot_rows(&linear_model()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].split(',').count(), Field::SNAPSHOT_HEADER.split(',').count());
    }
}
