//! Models that deliberately violate one restriction each.
//!
//! They serve as negative controls for the admissibility checks and as
//! corrupted configurations for the command-line tool.

use std::sync::Arc;

use super::{stress_of, ConstitutiveModel, State, StoredEnergy};
use crate::error::Result;
use crate::tensor::{outer, Ten2, Vec3};

/// Classical model plus an odd energy term `c·p` (velocity `p/ρ + c`).
/// Breaks parity only.
#[derive(Debug, Clone)]
pub struct ParityBreaking {
    pub rho: f64,
    pub stored: Arc<dyn StoredEnergy>,
    pub c: Vec3,
}

impl ParityBreaking {
    pub fn new(rho: f64, stored: Arc<dyn StoredEnergy>, c: Vec3) -> Self {
        ParityBreaking { rho, stored, c }
    }
}

impl ConstitutiveModel for ParityBreaking {
    fn name(&self) -> &str {
        "parity_breaking"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * self.rho) + self.c.dot(&s.p) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / self.rho) + self.c)
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        stress_of(self.stored.as_ref(), &s.f)
    }
}

/// `τ̂ = σ̂ + ½ p·Vp` with a singular symmetric `V`, so `v̂ = Vp` is not
/// invertible in `p`. Breaks normality only.
#[derive(Debug, Clone)]
pub struct SingularMass {
    pub v: Ten2,
    pub stored: Arc<dyn StoredEnergy>,
}

impl SingularMass {
    /// `V = diag(1, 1, 0)`.
    pub fn new(stored: Arc<dyn StoredEnergy>) -> Self {
        SingularMass { v: Ten2::diag(1.0, 1.0, 0.0), stored }
    }
}

impl ConstitutiveModel for SingularMass {
    fn name(&self) -> &str {
        "singular_mass"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(0.5 * s.p.dot(&self.v.apply(&s.p)) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(self.v.apply(&s.p))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        stress_of(self.stored.as_ref(), &s.f)
    }
}

/// Classical model whose stress carries the extra term
/// `ε δ sin(p_1/δ) c_1⊗c_1`.
///
/// The term is below `εδ` in size, so the stress matches `∂_F τ̂` to that
/// accuracy, while its momentum derivative is of order `ε`. With
/// `εδ` under the thermodynamic tolerance and `ε` above the Maxwell tolerance
/// only the Maxwell check fails.
#[derive(Debug, Clone)]
pub struct OscillatoryStress {
    pub rho: f64,
    pub stored: Arc<dyn StoredEnergy>,
    pub eps: f64,
    pub delta: f64,
}

impl OscillatoryStress {
    /// `ε = 1e−3`, `δ = 1e−4`.
    pub fn new(rho: f64, stored: Arc<dyn StoredEnergy>) -> Self {
        OscillatoryStress { rho, stored, eps: 1e-3, delta: 1e-4 }
    }
}

impl ConstitutiveModel for OscillatoryStress {
    fn name(&self) -> &str {
        "oscillatory_stress"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * self.rho) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / self.rho))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        let bump = self.eps * self.delta * (s.p.0[0] / self.delta).sin();
        Ok(stress_of(self.stored.as_ref(), &s.f)? + Ten2::unit(0, 0) * bump)
    }
}

/// `τ̂ = σ̂ + |p|⁴/4`, `v̂ = |p|² p`: thermodynamically consistent but with a
/// singular momentum Jacobian at `p = 0`. Breaks normality, and Galilean
/// variance as a consequence of the nonlinear velocity.
#[derive(Debug, Clone)]
pub struct CubicVelocity {
    pub stored: Arc<dyn StoredEnergy>,
}

impl CubicVelocity {
    pub fn new(stored: Arc<dyn StoredEnergy>) -> Self {
        CubicVelocity { stored }
    }
}

impl ConstitutiveModel for CubicVelocity {
    fn name(&self) -> &str {
        "cubic_velocity"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        let q = s.p.dot(&s.p);
        Ok(0.25 * q * q + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * s.p.dot(&s.p))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        stress_of(self.stored.as_ref(), &s.f)
    }
}

/// Classical model with the stress multiplied by `factor`. With `factor ≠ 1`
/// the stress is no longer the energy derivative.
#[derive(Debug, Clone)]
pub struct StressScaled {
    pub rho: f64,
    pub stored: Arc<dyn StoredEnergy>,
    pub factor: f64,
}

impl StressScaled {
    pub fn new(rho: f64, stored: Arc<dyn StoredEnergy>, factor: f64) -> Self {
        StressScaled { rho, stored, factor }
    }
}

impl ConstitutiveModel for StressScaled {
    fn name(&self) -> &str {
        "stress_scaled"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * self.rho) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / self.rho))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        Ok(stress_of(self.stored.as_ref(), &s.f)? * self.factor)
    }
}

/// Velocity `p/ρ + F c_1` with classical energy and stress. The velocity
/// depends on `F` while the stress ignores `p`, so the mixed derivatives
/// disagree (and the velocity is not the momentum derivative of the energy).
#[derive(Debug, Clone)]
pub struct FrameCoupled {
    pub rho: f64,
    pub stored: Arc<dyn StoredEnergy>,
}

impl FrameCoupled {
    pub fn new(rho: f64, stored: Arc<dyn StoredEnergy>) -> Self {
        FrameCoupled { rho, stored }
    }
}

impl ConstitutiveModel for FrameCoupled {
    fn name(&self) -> &str {
        "frame_coupled"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * self.rho) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / self.rho) + s.f.column(0))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        stress_of(self.stored.as_ref(), &s.f)
    }
}

/// Consistent coupled model `τ̂ = σ̂ + |p|²/2ρ + p·F c_1`.
///
/// Both `∂_p Ŝ` and `∂_F v̂` equal the constant array `δ_ih δ_k1`. The odd
/// cross term breaks parity.
#[derive(Debug, Clone)]
pub struct CrossCoupled {
    pub rho: f64,
    pub stored: Arc<dyn StoredEnergy>,
}

impl CrossCoupled {
    pub fn new(rho: f64, stored: Arc<dyn StoredEnergy>) -> Self {
        CrossCoupled { rho, stored }
    }
}

impl ConstitutiveModel for CrossCoupled {
    fn name(&self) -> &str {
        "cross_coupled"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * self.rho) + s.p.dot(&s.f.column(0)) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / self.rho) + s.f.column(0))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        Ok(stress_of(self.stored.as_ref(), &s.f)? + outer(&s.p, &Vec3::basis(0)))
    }
}

/// Thermodynamically consistent model with a state-dependent density
/// `ρ(F) = 1 + ‖F − 1‖²`: `τ̂ = |p|²/2ρ(F) + σ̂(F)`. The velocity shift under
/// `p ↦ p + d` depends on `F`, violating Galilean variance.
#[derive(Debug, Clone)]
pub struct StateDependentDensity {
    pub stored: Arc<dyn StoredEnergy>,
}

impl StateDependentDensity {
    pub fn new(stored: Arc<dyn StoredEnergy>) -> Self {
        StateDependentDensity { stored }
    }

    fn rho(f: &Ten2) -> f64 {
        let d = *f - Ten2::IDENTITY;
        1.0 + d.dot(&d)
    }
}

impl ConstitutiveModel for StateDependentDensity {
    fn name(&self) -> &str {
        "state_dependent_density"
    }
    fn energy(&self, s: &State) -> Result<f64> {
        Ok(s.p.dot(&s.p) / (2.0 * Self::rho(&s.f)) + self.stored.sigma(&s.f)?)
    }
    fn velocity(&self, s: &State) -> Result<Vec3> {
        Ok(s.p * (1.0 / Self::rho(&s.f)))
    }
    fn stress(&self, s: &State) -> Result<Ten2> {
        let rho = Self::rho(&s.f);
        // ∂_F (|p|²/2ρ) = −|p|²/(2ρ²) · 2(F − 1)
        let kinetic = (s.f - Ten2::IDENTITY) * (-s.p.dot(&s.p) / (rho * rho));
        Ok(stress_of(self.stored.as_ref(), &s.f)? + kinetic)
    }
}
