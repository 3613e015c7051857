//! Stored-energy functions `σ̂(F)` and their derivatives.

use std::fmt;
use std::sync::Arc;

use crate::diff;
use crate::error::{Error, Result};
use crate::tensor::{Ten2, Ten4};
use crate::tolerances::Tolerances;

/// A stored energy per unit reference volume as a function of `F`.
pub trait StoredEnergy: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn sigma(&self, f: &Ten2) -> Result<f64>;

    /// `∂_F σ̂`, when a closed form is available.
    fn analytic_stress(&self, _f: &Ten2) -> Option<Result<Ten2>> {
        None
    }

    /// `∂²_FF σ̂`, when a closed form is available.
    fn analytic_elasticity(&self, _f: &Ten2) -> Option<Result<Ten4>> {
        None
    }

    /// Named material parameters, for reports.
    fn parameters(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }
}

/// Piola stress `∂_F σ̂`: analytic when provided, central differences otherwise.
pub fn stress_of(se: &dyn StoredEnergy, f: &Ten2) -> Result<Ten2> {
    match se.analytic_stress(f) {
        Some(s) => s,
        None => fd_stress(se, f),
    }
}

/// Elasticity tensor `∂²_FF σ̂`: analytic when provided, differences of the stress otherwise.
pub fn elasticity_of(se: &dyn StoredEnergy, f: &Ten2) -> Result<Ten4> {
    match se.analytic_elasticity(f) {
        Some(s) => s,
        None => fd_elasticity_tensor(se, f),
    }
}

/// Central-difference stress with step `h_F = 1e-5 · max(1, ‖F‖)`.
pub fn fd_stress(se: &dyn StoredEnergy, f: &Ten2) -> Result<Ten2> {
    let h = diff::step(Tolerances::DEFAULT.fd_rel_step_f, f.norm());
    diff::grad_ten2(|x| se.sigma(x), f, h)
}

/// Central differences of the stress map (analytic stress when available).
pub fn fd_elasticity_tensor(se: &dyn StoredEnergy, f: &Ten2) -> Result<Ten4> {
    let h = diff::step(Tolerances::DEFAULT.fd_rel_step_f, f.norm());
    diff::jacobian_ten2(|x| stress_of(se, x), f, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyKind {
    /// `½λ(tr ε)² + μ ε·ε`, `ε = sym(F) − 1`.
    LinearIsotropic,
    /// `½λ(tr E)² + μ E·E`, `E = ½(FᵀF − 1)`.
    StVenantKirchhoff,
    /// `½μ(F·F − 3) − μ ln J + ½λ (ln J)²`, `J = det F`.
    NeoHookean,
}

impl EnergyKind {
    pub const ALL: [EnergyKind; 3] = [EnergyKind::LinearIsotropic, EnergyKind::StVenantKirchhoff, EnergyKind::NeoHookean];

    pub fn name(self) -> &'static str {
        match self {
            EnergyKind::LinearIsotropic => "linear_isotropic",
            EnergyKind::StVenantKirchhoff => "st_venant_kirchhoff",
            EnergyKind::NeoHookean => "neo_hookean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        EnergyKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Isotropic stored energies parametrized by Lamé moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicEnergy {
    pub kind: EnergyKind,
    pub lambda: f64,
    pub mu: f64,
}

impl IsotropicEnergy {
    pub fn new(kind: EnergyKind, lambda: f64, mu: f64) -> Self {
        IsotropicEnergy { kind, lambda, mu }
    }

    pub fn linear(lambda: f64, mu: f64) -> Self {
        Self::new(EnergyKind::LinearIsotropic, lambda, mu)
    }

    pub fn svk(lambda: f64, mu: f64) -> Self {
        Self::new(EnergyKind::StVenantKirchhoff, lambda, mu)
    }

    pub fn neo_hookean(lambda: f64, mu: f64) -> Self {
        Self::new(EnergyKind::NeoHookean, lambda, mu)
    }

    fn log_det(&self, f: &Ten2) -> Result<(f64, Ten2)> {
        let j = f.det();
        if j <= 0.0 || !j.is_finite() {
            return Err(Error::Domain(format!("{}: det F = {j:.3e} ≤ 0", self.kind.name())));
        }
        let inv_t = f.inverse().ok_or(Error::Singular { det: j })?.transpose();
        Ok((j.ln(), inv_t))
    }
}

fn green_strain(f: &Ten2) -> Ten2 {
    (f.transpose().matmul(f) - Ten2::IDENTITY) * 0.5
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

impl StoredEnergy for IsotropicEnergy {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn sigma(&self, f: &Ten2) -> Result<f64> {
        let (l, m) = (self.lambda, self.mu);
        match self.kind {
            EnergyKind::LinearIsotropic => {
                let eps = f.sym() - Ten2::IDENTITY;
                let tr = eps.trace();
                Ok(0.5 * l * tr * tr + m * eps.dot(&eps))
            }
            EnergyKind::StVenantKirchhoff => {
                let e = green_strain(f);
                let tr = e.trace();
                Ok(0.5 * l * tr * tr + m * e.dot(&e))
            }
            EnergyKind::NeoHookean => {
                let (lnj, _) = self.log_det(f)?;
                Ok(0.5 * m * (f.dot(f) - 3.0) - m * lnj + 0.5 * l * lnj * lnj)
            }
        }
    }

    fn analytic_stress(&self, f: &Ten2) -> Option<Result<Ten2>> {
        let (l, m) = (self.lambda, self.mu);
        Some(match self.kind {
            EnergyKind::LinearIsotropic => {
                let eps = f.sym() - Ten2::IDENTITY;
                Ok(Ten2::IDENTITY * (l * eps.trace()) + eps * (2.0 * m))
            }
            EnergyKind::StVenantKirchhoff => {
                let e = green_strain(f);
                let second_pk = Ten2::IDENTITY * (l * e.trace()) + e * (2.0 * m);
                Ok(f.matmul(&second_pk))
            }
            EnergyKind::NeoHookean => self.log_det(f).map(|(lnj, inv_t)| *f * m + inv_t * (l * lnj - m)),
        })
    }

    fn analytic_elasticity(&self, f: &Ten2) -> Option<Result<Ten4>> {
        let (l, m) = (self.lambda, self.mu);
        Some(match self.kind {
            EnergyKind::LinearIsotropic => Ok(Ten4::isotropic(l, m)),
            EnergyKind::StVenantKirchhoff => {
                let e = green_strain(f);
                let pk2 = Ten2::IDENTITY * (l * e.trace()) + e * (2.0 * m);
                let ff = f.matmul(&f.transpose());
                let a = &f.0;
                Ok(Ten4::from_fn(|i, j, h, k| {
                    delta(i, h) * pk2.0[k][j] + l * a[i][j] * a[h][k] + m * (a[i][k] * a[h][j] + ff.0[i][h] * delta(j, k))
                }))
            }
            EnergyKind::NeoHookean => self.log_det(f).map(|(lnj, g)| {
                let c = l * lnj - m;
                Ten4::from_fn(|i, j, h, k| {
                    m * delta(i, h) * delta(j, k) + l * g.0[i][j] * g.0[h][k] - c * g.0[i][k] * g.0[h][j]
                })
            }),
        })
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![("lambda", self.lambda), ("mu", self.mu)]
    }
}

/// `σ̂ ≡ 0`: a degenerate energy with vanishing stress.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroEnergy;

impl StoredEnergy for ZeroEnergy {
    fn name(&self) -> &str {
        "zero"
    }

    fn sigma(&self, _f: &Ten2) -> Result<f64> {
        Ok(0.0)
    }

    fn analytic_stress(&self, _f: &Ten2) -> Option<Result<Ten2>> {
        Some(Ok(Ten2::ZERO))
    }

    fn analytic_elasticity(&self, _f: &Ten2) -> Option<Result<Ten4>> {
        Some(Ok(Ten4::zero()))
    }
}

/// The three isotropic stored energies at the given Lamé moduli.
pub fn stored_energy_registry(lambda: f64, mu: f64) -> Vec<Arc<dyn StoredEnergy>> {
    EnergyKind::ALL
        .into_iter()
        .map(|k| Arc::new(IsotropicEnergy::new(k, lambda, mu)) as Arc<dyn StoredEnergy>)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{outer, Vec3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Energy without closed-form derivatives, to force the difference paths.
    #[derive(Debug)]
    struct Opaque(IsotropicEnergy);

    impl StoredEnergy for Opaque {
        fn name(&self) -> &str {
            "opaque"
        }
        fn sigma(&self, f: &Ten2) -> Result<f64> {
            self.0.sigma(f)
        }
    }

    fn random_f(rng: &mut ChaCha8Rng, det_lo: f64, det_hi: f64) -> Ten2 {
        loop {
            let f = Ten2::IDENTITY + Ten2::from_fn(|_, _| 0.5 * rng.gen_range(-1.0..1.0));
            let d = f.det();
            if d >= det_lo && d <= det_hi {
                return f;
            }
        }
    }

    #[test]
    fn reference_state_is_stress_free() {
        for se in stored_energy_registry(2.0, 1.0) {
            assert_eq!(se.sigma(&Ten2::IDENTITY).unwrap(), 0.0);
            assert!(stress_of(se.as_ref(), &Ten2::IDENTITY).unwrap().norm_inf() < 1e-15);
        }
    }

    #[test]
    fn svk_matches_linear_to_first_order() {
        let (l, m) = (2.0, 1.0);
        let h = Ten2([[0.3, -0.7, 0.2], [0.5, 0.1, -0.4], [0.9, 0.2, -0.6]]);
        let h = h * (1e-5 / h.norm());
        let f = Ten2::IDENTITY + h;
        let eps = h.sym();
        let oracle = Ten2::IDENTITY * (l * eps.trace()) + eps * (2.0 * m);
        let svk = stress_of(&IsotropicEnergy::svk(l, m), &f).unwrap();
        let lin = stress_of(&IsotropicEnergy::linear(l, m), &f).unwrap();
        assert!((svk - oracle).norm_inf() < 1e-8);
        assert!((lin - oracle).norm_inf() < 1e-8);
    }

    #[test]
    fn neo_hookean_closed_form_value() {
        let (l, m) = (2.0, 1.0);
        let got = IsotropicEnergy::neo_hookean(l, m).sigma(&Ten2::diag(2.0, 1.0, 1.0)).unwrap();
        let ln2 = 2f64.ln();
        let want = 0.5 * m * (6.0 - 3.0) - m * ln2 + 0.5 * l * ln2 * ln2;
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn neo_hookean_rejects_inverted_states() {
        let nh = IsotropicEnergy::neo_hookean(2.0, 1.0);
        assert!(matches!(nh.sigma(&Ten2::diag(-1.0, 1.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(fd_stress(&nh, &Ten2::ZERO), Err(Error::Domain(_))));
    }

    #[test]
    fn fd_stress_exact_for_quadratics() {
        let lin = IsotropicEnergy::linear(2.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = random_f(&mut rng, 0.5, 2.0);
            let fd = fd_stress(&Opaque(lin), &f).unwrap();
            let exact = lin.analytic_stress(&f).unwrap().unwrap();
            assert!((fd - exact).norm_inf() <= 1e-10);
        }
    }

    #[test]
    fn fd_stress_linear_uniaxial() {
        let (l, m) = (2.0, 1.0);
        let f = Ten2::IDENTITY + outer(&Vec3::basis(0), &Vec3::basis(0)) * 1e-3;
        let s = fd_stress(&Opaque(IsotropicEnergy::linear(l, m)), &f).unwrap();
        assert!((s[(0, 0)] - (l + 2.0 * m) * 1e-3).abs() < 1e-12);
        assert!((s[(1, 1)] - l * 1e-3).abs() < 1e-12);
        assert!((s[(2, 2)] - l * 1e-3).abs() < 1e-12);
        assert!(s[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn fd_stress_matches_analytic_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for se in stored_energy_registry(2.0, 1.0) {
            for _ in 0..100 {
                let f = random_f(&mut rng, 0.5, 2.0);
                let fd = fd_stress(se.as_ref(), &f).unwrap();
                let an = se.analytic_stress(&f).unwrap().unwrap();
                let rel = (fd - an).norm_inf() / an.norm_inf().max(1e-12);
                assert!(rel <= 1e-6, "{} rel {rel}", se.name());
            }
        }
    }

    #[test]
    fn elasticity_linear_closed_form_and_constant() {
        let lin = Opaque(IsotropicEnergy::linear(2.0, 1.0));
        let oracle = Ten4::isotropic(2.0, 1.0);
        for f in [Ten2::IDENTITY, Ten2::diag(1.3, 0.8, 1.1)] {
            let s = fd_elasticity_tensor(&lin, &f).unwrap();
            assert!((s - oracle.clone()).norm_inf() < 1e-5);
        }
    }

    #[test]
    fn analytic_elasticity_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for se in stored_energy_registry(2.0, 1.0) {
            for _ in 0..20 {
                let f = random_f(&mut rng, 0.5, 2.0);
                let an = se.analytic_elasticity(&f).unwrap().unwrap();
                let fd = fd_elasticity_tensor(se.as_ref(), &f).unwrap();
                assert!((an.clone() - fd).norm_inf() <= 1e-6 * an.norm_inf().max(1.0), "{}", se.name());
            }
        }
    }

    #[test]
    fn neo_hookean_major_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let nh = IsotropicEnergy::neo_hookean(2.0, 1.0);
        for _ in 0..50 {
            let f = random_f(&mut rng, 0.5, f64::INFINITY);
            let s = fd_elasticity_tensor(&nh, &f).unwrap();
            assert!(s.major_asymmetry() <= 1e-6);
        }
    }
}
