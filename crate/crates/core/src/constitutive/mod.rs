//! Constitutive prescriptions for total energy, velocity and stress as
//! functions of the state `(F, p)`.

pub mod controls;
pub mod energy;

use std::fmt;
use std::sync::Arc;

pub use energy::{
    elasticity_of, fd_elasticity_tensor, fd_stress, stored_energy_registry, stress_of, EnergyKind, IsotropicEnergy,
    StoredEnergy, ZeroEnergy,
};

use crate::diff;
use crate::error::{Error, Result};
use crate::tensor::{Ten2, Ten4, Vec3};
use crate::tolerances::Tolerances;

/// Pointwise state: deformation gradient and momentum density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub f: Ten2,
    pub p: Vec3,
}

impl State {
    pub fn new(f: Ten2, p: Vec3) -> Self {
        State { f, p }
    }

    pub fn rest() -> Self {
        State { f: Ten2::IDENTITY, p: Vec3::ZERO }
    }

    /// Orientation preserving (`det F > 0`).
    pub fn is_physical(&self) -> bool {
        self.f.det() > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite() && self.p.is_finite()
    }
}

/// Constitutive triple `(τ̂, v̂, Ŝ)`.
pub trait ConstitutiveModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Total energy per unit reference volume.
    fn energy(&self, s: &State) -> Result<f64>;

    fn velocity(&self, s: &State) -> Result<Vec3>;

    /// Piola stress.
    fn stress(&self, s: &State) -> Result<Ten2>;

    /// `∂_F Ŝ` at fixed `p`, when a closed form exists.
    fn analytic_elasticity(&self, _s: &State) -> Option<Result<Ten4>> {
        None
    }

    /// `ρ` when the model has the classical form `v̂ = p/ρ`.
    fn classical_density(&self) -> Option<f64> {
        None
    }
}

/// `∂_F Ŝ(F, p)`: analytic when the model provides it, else central differences.
pub fn elasticity_tensor(model: &dyn ConstitutiveModel, s: &State) -> Result<Ten4> {
    if let Some(r) = model.analytic_elasticity(s) {
        return r;
    }
    let h = diff::step(Tolerances::DEFAULT.fd_rel_step_f, s.f.norm());
    diff::jacobian_ten2(|f| model.stress(&State::new(*f, s.p)), &s.f, h)
}

/// `N_ih = ∂ v̂_i / ∂ p_h` by central differences.
pub fn velocity_jacobian(model: &dyn ConstitutiveModel, s: &State, tol: &Tolerances) -> Result<Ten2> {
    let h = diff::step(tol.fd_rel_step_p, s.p.norm());
    diff::jacobian_vec3(|p| model.velocity(&State::new(s.f, *p)), &s.p, h)
}

/// Symmetric mass-density tensor `M` together with its inverse `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassDensityTensor {
    pub m: Ten2,
    pub v: Ten2,
}

impl MassDensityTensor {
    pub fn from_inverse(v: Ten2, tol: &Tolerances) -> Result<Self> {
        let scale = v.norm_inf().max(1.0);
        let asym = v.asymmetry();
        if asym > tol.sym_tol * scale {
            return Err(Error::NotSymmetric { asymmetry: asym, tolerance: tol.sym_tol * scale });
        }
        let det = v.det();
        if det.abs() <= 1e-12 {
            return Err(Error::Singular { det });
        }
        let m = v.inverse().ok_or(Error::Singular { det })?;
        Ok(MassDensityTensor { m, v })
    }

    pub fn classical(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("mass density must be positive, got {rho}")));
        }
        Ok(MassDensityTensor { m: Ten2::IDENTITY * rho, v: Ten2::IDENTITY * (1.0 / rho) })
    }
}

/// `τ̂ = |p|²/2ρ + σ̂(F)`, `v̂ = p/ρ`, `Ŝ = ∂_F σ̂`.
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    pub rho: f64,
    pub stored: Arc<dyn StoredEnergy>,
    name: String,
}

pub fn classical_model(rho: f64, stored: Arc<dyn StoredEnergy>) -> Result<ClassicalModel> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("mass density must be positive, got {rho}")));
    }
    let name = format!("classical[{}]", stored.name());
    Ok(ClassicalModel { rho, stored, name })
}

impl ConstitutiveModel for ClassicalModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * self.rho) + self.stored.sigma(&s.f)?)
    }

    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / self.rho))
    }

    fn stress(&self, s: &State) -> Result<Ten2> {
        stress_of(self.stored.as_ref(), &s.f)
    }

    fn analytic_elasticity(&self, s: &State) -> Option<Result<Ten4>> {
        self.stored.analytic_elasticity(&s.f)
    }

    fn classical_density(&self) -> Option<f64> {
        Some(self.rho)
    }
}

/// `τ̂ = ½ p·Vp + σ̂(F)`, `v̂ = Vp`, `Ŝ = ∂_F σ̂` with a symmetric invertible `V`.
#[derive(Debug, Clone)]
pub struct TensorMassModel {
    pub mass: MassDensityTensor,
    pub stored: Arc<dyn StoredEnergy>,
    name: String,
}

pub fn tensor_mass_model(v: Ten2, stored: Arc<dyn StoredEnergy>) -> Result<TensorMassModel> {
    let mass = MassDensityTensor::from_inverse(v, &Tolerances::DEFAULT)?;
    let name = format!("tensor_mass[{}]", stored.name());
    Ok(TensorMassModel { mass, stored, name })
}

impl TensorMassModel {
    pub fn kinetic(&self, p: &Vec3) -> f64 {
        0.5 * p.dot(&self.mass.v.apply(p))
    }
}

impl ConstitutiveModel for TensorMassModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn energy(&self, s: &State) -> Result<f64> {
        Ok(self.kinetic(&s.p) + self.stored.sigma(&s.f)?)
    }

    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(self.mass.v.apply(&s.p))
    }

    fn stress(&self, s: &State) -> Result<Ten2> {
        stress_of(self.stored.as_ref(), &s.f)
    }

    fn analytic_elasticity(&self, s: &State) -> Option<Result<Ten4>> {
        self.stored.analytic_elasticity(&s.f)
    }
}

/// Invert `p ↦ v̂(F, p)` by damped Newton iteration on the velocity residual.
///
/// The Jacobian is the difference quotient of `v̂` in `p`; the step is halved
/// while the residual fails to decrease.
pub fn momentum_from_velocity(model: &dyn ConstitutiveModel, f: &Ten2, v: &Vec3) -> Result<Vec3> {
    momentum_from_velocity_with(model, f, v, &Tolerances::DEFAULT)
}

pub fn momentum_from_velocity_with(model: &dyn ConstitutiveModel, f: &Ten2, v: &Vec3, tol: &Tolerances) -> Result<Vec3> {
    if let Some(rho) = model.classical_density() {
        return Ok(*v * rho);
    }
    let resid = |p: &Vec3| -> Result<Vec3> { Ok(model.velocity(&State::new(*f, *p))? - *v) };
    // Start from p = 0; fall back to p = v when the Jacobian is singular there.
    let mut last_err = None;
    for start in [Vec3::ZERO, *v] {
        match newton_from(model, f, start, &resid, tol) {
            Ok(p) => return Ok(p),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one start"))
}

fn newton_from(
    model: &dyn ConstitutiveModel,
    f: &Ten2,
    start: Vec3,
    resid: &dyn Fn(&Vec3) -> Result<Vec3>,
    tol: &Tolerances,
) -> Result<Vec3> {
    let mut p = start;
    let mut r = resid(&p)?;
    let mut rn = r.norm();
    for it in 0..tol.newton_max_iter {
        if rn <= tol.newton_tol {
            return Ok(p);
        }
        let n = velocity_jacobian(model, &State::new(*f, p), tol)?;
        // Minimum-norm step, so a velocity in the range of a singular Jacobian is still reached.
        let dp = crate::linalg::lstsq3(&n, &r, 1e-12);
        if dp == Vec3::ZERO {
            return Err(Error::NewtonDivergence { residual: rn, iterations: it });
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = p - dp * alpha;
            if let Ok(rt) = resid(&trial) {
                let rtn = rt.norm();
                if rtn.is_finite() && rtn < rn {
                    p = trial;
                    r = rt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDivergence { residual: rn, iterations: it + 1 });
        }
    }
    if rn <= tol.newton_tol {
        Ok(p)
    } else {
        Err(Error::NewtonDivergence { residual: rn, iterations: tol.newton_max_iter })
    }
}
