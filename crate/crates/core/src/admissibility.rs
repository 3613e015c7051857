//! Numerical falsification of constitutive restrictions.
//!
//! Every check evaluates a model on a deterministic probe set and compares a
//! residual against a declared tolerance. The checks cover:
//!
//! * normality: invertibility of `N = ∂_p v̂`,
//! * ellipticity: invertibility of `E_ih(F, v; a) = ∂_{F_hk} S̃_ij a_j a_k` with
//!   `S̃(F, v) = Ŝ(F, p̂(F, v))`,
//! * thermodynamic consistency: `v̂ = ∂_p τ̂` and `Ŝ = ∂_F τ̂`,
//! * the Maxwell relation `∂_p Ŝ = ∂_F v̂`,
//! * Galilean variance: `v̂(F, p + d) − v̂(F, p)` independent of the state,
//! * parity: `τ̂(F, p) = τ̂(F, −p)`.
//!
//! [`extract_representation`] then fits the velocity tensor `V` and certifies
//! the additive split of the total energy into kinetic and stored parts.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{momentum_from_velocity_with, velocity_jacobian, ConstitutiveModel, State};
use crate::diff;
use crate::error::{Error, Result};
use crate::tensor::{outer, Ten2, Vec3};
use crate::tolerances::Tolerances;

/// Random states used by every check.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    pub seed: u64,
    pub states: Vec<State>,
    /// Unit directions paired with `states` for the ellipticity check.
    pub directions: Vec<Vec3>,
}

impl ProbeSet {
    /// `count` probes with `F = 1 + 0.5 R` (`R` uniform in `[−1, 1]`, kept only when
    /// `det F > 0.3`) and `p` uniform in the ball of radius 3. The first probe
    /// always has `p = 0`.
    pub fn random(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = Vec::with_capacity(count);
        let mut directions = Vec::with_capacity(count);
        for k in 0..count {
            let f = random_deformation(&mut rng, 0.3);
            let p = if k == 0 { Vec3::ZERO } else { random_in_ball(&mut rng, 3.0) };
            states.push(State::new(f, p));
            directions.push(random_unit(&mut rng));
        }
        ProbeSet { seed, states, directions }
    }

    pub fn from_states(states: Vec<State>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let directions = states.iter().map(|_| random_unit(&mut rng)).collect();
        ProbeSet { seed, states, directions }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn random_deformation(rng: &mut impl Rng, min_det: f64) -> Ten2 {
    loop {
        let f = Ten2::IDENTITY + Ten2::from_fn(|_, _| 0.5 * rng.gen_range(-1.0..=1.0));
        if f.det() > min_det {
            return f;
        }
    }
}

pub fn random_in_ball(rng: &mut impl Rng, radius: f64) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if v.norm() <= 1.0 {
            return v * radius;
        }
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = random_in_ball(rng, 1.0);
        let n = v.norm();
        if n > 1e-3 {
            return v * (1.0 / n);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Normality,
    Ellipticity,
    Thermo,
    Maxwell,
    Galilean,
    Parity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Normality,
        CheckKind::Ellipticity,
        CheckKind::Thermo,
        CheckKind::Maxwell,
        CheckKind::Galilean,
        CheckKind::Parity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Normality => "normality",
            CheckKind::Ellipticity => "ellipticity",
            CheckKind::Thermo => "thermo",
            CheckKind::Maxwell => "maxwell",
            CheckKind::Galilean => "galilean",
            CheckKind::Parity => "parity",
        }
    }
}

/// Outcome of one check.
///
/// For normality and ellipticity `value` is the smallest `|det|` and the check
/// passes when it exceeds `tolerance`; for the others `value` is the largest
/// residual and the check passes when it does not exceed `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub kind: CheckKind,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Index of the probe that determined `value`.
    pub worst_probe: Option<usize>,
    pub error: Option<String>,
}

impl CheckOutcome {
    fn lower_bound(kind: CheckKind, value: f64, tolerance: f64, worst: Option<usize>) -> Self {
        CheckOutcome { kind, value, tolerance, passed: value > tolerance, worst_probe: worst, error: None }
    }

    fn upper_bound(kind: CheckKind, value: f64, tolerance: f64, worst: Option<usize>) -> Self {
        CheckOutcome { kind, value, tolerance, passed: value <= tolerance, worst_probe: worst, error: None }
    }

    fn failed(kind: CheckKind, tolerance: f64, err: &Error) -> Self {
        CheckOutcome { kind, value: f64::NAN, tolerance, passed: false, worst_probe: None, error: Some(err.to_string()) }
    }
}

/// `(min |det N|, argmin)` over the probes.
pub fn check_normality(model: &dyn ConstitutiveModel, probes: &ProbeSet, tol: &Tolerances) -> Result<CheckOutcome> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("empty probe set".into()));
    }
    let mut worst = (f64::INFINITY, 0);
    for (k, s) in probes.states.iter().enumerate() {
        let d = velocity_jacobian(model, s, tol)?.det().abs();
        if d < worst.0 {
            worst = (d, k);
        }
    }
    Ok(CheckOutcome::lower_bound(CheckKind::Normality, worst.0, tol.normality_tol, Some(worst.1)))
}

/// `S̃(F, v) = Ŝ(F, p̂(F, v))`.
pub fn stress_at_velocity(model: &dyn ConstitutiveModel, f: &Ten2, v: &Vec3, tol: &Tolerances) -> Result<Ten2> {
    let p = momentum_from_velocity_with(model, f, v, tol)?;
    model.stress(&State::new(*f, p))
}

/// `E(F, v; a)`, assembled column by column: `E u = ∂_ε S̃(F + ε u⊗a, v) a`.
pub fn ellipticity_matrix(model: &dyn ConstitutiveModel, f: &Ten2, v: &Vec3, a: &Vec3, tol: &Tolerances) -> Result<Ten2> {
    let h = diff::step(tol.fd_rel_step_f, f.norm());
    let mut e = Ten2::ZERO;
    for col in 0..3 {
        let dir = outer(&Vec3::basis(col), a);
        let plus = stress_at_velocity(model, &(*f + dir * h), v, tol)?;
        let minus = stress_at_velocity(model, &(*f - dir * h), v, tol)?;
        let ecol = ((plus - minus) * (1.0 / (2.0 * h))).apply(a);
        for row in 0..3 {
            e.0[row][col] = ecol.0[row];
        }
    }
    if !e.is_finite() {
        return Err(Error::NonFinite { what: "ellipticity matrix" });
    }
    Ok(e)
}

/// `(min |det E|)` over probes `(F, v̂(F, p), a)`.
pub fn check_ellipticity(model: &dyn ConstitutiveModel, probes: &ProbeSet, tol: &Tolerances) -> Result<CheckOutcome> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("empty probe set".into()));
    }
    let mut worst = (f64::INFINITY, 0);
    for (k, (s, a)) in probes.states.iter().zip(&probes.directions).enumerate() {
        let v = model.velocity(s)?;
        let d = ellipticity_matrix(model, &s.f, &v, a, tol)?.det().abs();
        if d < worst.0 {
            worst = (d, k);
        }
    }
    Ok(CheckOutcome::lower_bound(CheckKind::Ellipticity, worst.0, tol.ellipticity_tol, Some(worst.1)))
}

/// Differences between the energy gradients and the prescribed velocity/stress.
#[derive(Debug, Clone, Copy)]
pub struct ThermoResiduals {
    pub grad_p: Vec3,
    pub grad_f: Ten2,
}

pub fn thermo_residuals(model: &dyn ConstitutiveModel, s: &State, tol: &Tolerances) -> Result<ThermoResiduals> {
    let hp = diff::step(tol.fd_rel_step_p, s.p.norm());
    let hf = diff::step(tol.fd_rel_step_f, s.f.norm());
    let dtau_dp = diff::grad_vec3(|p| model.energy(&State::new(s.f, *p)), &s.p, hp)?;
    let dtau_df = diff::grad_ten2(|f| model.energy(&State::new(*f, s.p)), &s.f, hf)?;
    Ok(ThermoResiduals { grad_p: dtau_dp - model.velocity(s)?, grad_f: dtau_df - model.stress(s)? })
}

/// Largest `max(‖∂_p τ̂ − v̂‖, ‖∂_F τ̂ − Ŝ‖)` over the probes.
pub fn check_thermo(model: &dyn ConstitutiveModel, probes: &ProbeSet, tol: &Tolerances) -> Result<CheckOutcome> {
    let mut worst = (0.0f64, 0);
    for (k, s) in probes.states.iter().enumerate() {
        let r = thermo_residuals(model, s, tol)?;
        let m = r.grad_p.norm().max(r.grad_f.norm());
        if m > worst.0 {
            worst = (m, k);
        }
    }
    Ok(CheckOutcome::upper_bound(CheckKind::Thermo, worst.0, tol.thermo_tol, Some(worst.1)))
}

/// A rate `(Ḟ, ṗ)` along which the dissipation inequality fails.
#[derive(Debug, Clone, Copy)]
pub struct DissipationViolation {
    pub probe: usize,
    pub state: State,
    pub rate_f: Ten2,
    pub rate_p: Vec3,
    /// `τ̇ − Ŝ·Ḟ − v̂·ṗ` along the rate; positive means violation.
    pub excess: f64,
}

/// Exhibit a violating direction at the probe with the largest thermo residual.
///
/// The rate is aligned with the residual, `(Ḟ, ṗ) = (∂_F τ̂ − Ŝ, ∂_p τ̂ − v̂)`;
/// the excess power is evaluated from a directional difference of `τ̂`
/// independently of the gradients used to pick the rate.
pub fn dissipation_violation(
    model: &dyn ConstitutiveModel,
    probes: &ProbeSet,
    tol: &Tolerances,
) -> Result<Option<DissipationViolation>> {
    let mut best: Option<(f64, usize, ThermoResiduals)> = None;
    for (k, s) in probes.states.iter().enumerate() {
        let r = thermo_residuals(model, s, tol)?;
        let m = (r.grad_p.dot(&r.grad_p) + r.grad_f.dot(&r.grad_f)).sqrt();
        if best.as_ref().map_or(true, |b| m > b.0) {
            best = Some((m, k, r));
        }
    }
    let Some((_, k, r)) = best else { return Ok(None) };
    let s = probes.states[k];
    let eps = 1e-6;
    let shifted = |t: f64| State::new(s.f + r.grad_f * t, s.p + r.grad_p * t);
    let tau_dot = (model.energy(&shifted(eps))? - model.energy(&shifted(-eps))?) / (2.0 * eps);
    let supplied = model.stress(&s)?.dot(&r.grad_f) + model.velocity(&s)?.dot(&r.grad_p);
    let excess = tau_dot - supplied;
    if excess > 0.0 && excess > tol.thermo_tol {
        Ok(Some(DissipationViolation { probe: k, state: s, rate_f: r.grad_f, rate_p: r.grad_p, excess }))
    } else {
        Ok(None)
    }
}

/// Largest entry of `∂_{p_h} Ŝ_ij − ∂_{F_ij} v̂_h` over the probes.
pub fn check_maxwell(model: &dyn ConstitutiveModel, probes: &ProbeSet, tol: &Tolerances) -> Result<CheckOutcome> {
    let mut worst = (0.0f64, 0);
    for (k, s) in probes.states.iter().enumerate() {
        let r = maxwell_residual(model, s, tol)?;
        if r > worst.0 {
            worst = (r, k);
        }
    }
    Ok(CheckOutcome::upper_bound(CheckKind::Maxwell, worst.0, tol.maxwell_tol, Some(worst.1)))
}

pub fn maxwell_residual(model: &dyn ConstitutiveModel, s: &State, tol: &Tolerances) -> Result<f64> {
    let hp = diff::step(tol.fd_rel_step_p, s.p.norm());
    let hf = diff::step(tol.fd_rel_step_f, s.f.norm());
    let ds_dp = diff::jacobian_ten2_by_vec3(|p| model.stress(&State::new(s.f, *p)), &s.p, hp)?;
    let dv_df = diff::jacobian_vec3_by_ten2(|f| model.velocity(&State::new(*f, s.p)), &s.f, hf)?;
    Ok(ds_dp.iter().zip(&dv_df).map(|(a, b)| (*a - *b).norm_inf()).fold(0.0, f64::max))
}

/// Shifts used by default for the Galilean check.
pub fn default_shifts() -> Vec<Vec3> {
    vec![
        Vec3::basis(0),
        Vec3::basis(1),
        Vec3::basis(2),
        Vec3::new(0.5, -1.0, 0.25),
        Vec3::new(-1.5, 0.7, 2.0),
    ]
}

/// Largest spread (max − min per component, across probes) of
/// `v̂(F, p + d) − v̂(F, p)` over the shifts `d`.
pub fn check_galilean(
    model: &dyn ConstitutiveModel,
    probes: &ProbeSet,
    shifts: &[Vec3],
    tol: &Tolerances,
) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for d in shifts {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for s in &probes.states {
            let diff = model.velocity(&State::new(s.f, s.p + *d))? - model.velocity(s)?;
            for c in 0..3 {
                lo[c] = lo[c].min(diff.0[c]);
                hi[c] = hi[c].max(diff.0[c]);
            }
        }
        for c in 0..3 {
            if probes.states.is_empty() {
                continue;
            }
            worst = worst.max(hi[c] - lo[c]);
        }
    }
    Ok(CheckOutcome::upper_bound(CheckKind::Galilean, worst, tol.galilean_tol, None))
}

/// Largest `|τ̂(F, p) − τ̂(F, −p)|`.
pub fn check_parity(model: &dyn ConstitutiveModel, probes: &ProbeSet, tol: &Tolerances) -> Result<CheckOutcome> {
    let mut worst = (0.0f64, 0);
    for (k, s) in probes.states.iter().enumerate() {
        let d = (model.energy(s)? - model.energy(&State::new(s.f, -s.p))?).abs();
        if d > worst.0 {
            worst = (d, k);
        }
    }
    Ok(CheckOutcome::upper_bound(CheckKind::Parity, worst.0, tol.parity_tol, Some(worst.1)))
}

/// Collected outcomes of all six checks.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub model: String,
    pub outcomes: Vec<CheckOutcome>,
    pub probe_count: usize,
    pub seed: u64,
    pub violation: Option<DissipationViolation>,
}

impl AdmissibilityReport {
    pub fn get(&self, kind: CheckKind) -> &CheckOutcome {
        self.outcomes.iter().find(|o| o.kind == kind).expect("all checks present")
    }

    pub fn passed(&self, kind: CheckKind) -> bool {
        self.get(kind).passed
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failed(&self) -> Vec<CheckKind> {
        self.outcomes.iter().filter(|o| !o.passed).map(|o| o.kind).collect()
    }

    /// Flat `key = value` block.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model = {}", self.model);
        let _ = writeln!(out, "probes = {}", self.probe_count);
        let _ = writeln!(out, "seed = {}", self.seed);
        for o in &self.outcomes {
            let n = o.kind.name();
            let _ = writeln!(out, "{n}_ok = {}", o.passed);
            let _ = writeln!(out, "{n}_value = {:.6e}", o.value);
            let _ = writeln!(out, "{n}_tolerance = {:.1e}", o.tolerance);
            if let Some(e) = &o.error {
                let _ = writeln!(out, "{n}_error = {e}");
            }
        }
        if let Some(v) = &self.violation {
            let _ = writeln!(out, "dissipation_violation_probe = {}", v.probe);
            let _ = writeln!(out, "dissipation_violation_excess = {:.6e}", v.excess);
        }
        out
    }

    pub const CSV_HEADER: &'static str = "check,residual,tolerance,pass";

    /// CSV rows `check,residual,tolerance,pass` (no header).
    pub fn csv_rows(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .map(|o| format!("{},{:.6e},{:.1e},{}", o.kind.name(), o.value, o.tolerance, o.passed))
            .collect()
    }
}

/// Run all six checks. A check that errors out is recorded as failed.
pub fn assess(model: &dyn ConstitutiveModel, probes: &ProbeSet, tol: &Tolerances) -> AdmissibilityReport {
    let shifts = default_shifts();
    let outcomes = CheckKind::ALL
        .iter()
        .map(|&kind| {
            let tolerance = match kind {
                CheckKind::Normality => tol.normality_tol,
                CheckKind::Ellipticity => tol.ellipticity_tol,
                CheckKind::Thermo => tol.thermo_tol,
                CheckKind::Maxwell => tol.maxwell_tol,
                CheckKind::Galilean => tol.galilean_tol,
                CheckKind::Parity => tol.parity_tol,
            };
            let r = match kind {
                CheckKind::Normality => check_normality(model, probes, tol),
                CheckKind::Ellipticity => check_ellipticity(model, probes, tol),
                CheckKind::Thermo => check_thermo(model, probes, tol),
                CheckKind::Maxwell => check_maxwell(model, probes, tol),
                CheckKind::Galilean => check_galilean(model, probes, &shifts, tol),
                CheckKind::Parity => check_parity(model, probes, tol),
            };
            r.unwrap_or_else(|e| CheckOutcome::failed(kind, tolerance, &e))
        })
        .collect::<Vec<_>>();
    let thermo_failed = outcomes.iter().any(|o| o.kind == CheckKind::Thermo && !o.passed);
    let violation = if thermo_failed { dissipation_violation(model, probes, tol).ok().flatten() } else { None };
    AdmissibilityReport {
        model: model.name().to_string(),
        outcomes,
        probe_count: probes.len(),
        seed: probes.seed,
        violation,
    }
}

/// Fitted velocity tensor and energy split.
#[derive(Debug, Clone)]
pub struct RepresentationResult<'a> {
    pub v_fit: Ten2,
    pub m_fit: Ten2,
    /// Largest `|V − Vᵀ|` entry.
    pub symmetry_residual: f64,
    /// Largest `‖v̂(F, p) − V p‖` over held-out probes and all probe deformations.
    pub linearity_residual: f64,
    /// Largest `|τ̂(F, p) − τ̂(F, 0) − ½ p·Vp|`.
    pub split_residual: f64,
    pub split_ok: bool,
    /// Reference deformation used for the fit.
    pub reference_f: Ten2,
    model: &'a dyn ConstitutiveModel,
}

impl RepresentationResult<'_> {
    /// Stored energy `σ̂(F) = τ̂(F, 0)`.
    pub fn sigma_fit(&self, f: &Ten2) -> Result<f64> {
        self.model.energy(&State::new(*f, Vec3::ZERO))
    }

    pub fn kinetic_fit(&self, p: &Vec3) -> f64 {
        0.5 * p.dot(&self.v_fit.apply(p))
    }
}

/// Least-squares fit of `p ↦ v̂(F₀, p)` at the first probe deformation.
///
/// Requires normality, Galilean variance and parity to pass on `probes`.
pub fn extract_representation<'a>(
    model: &'a dyn ConstitutiveModel,
    probes: &ProbeSet,
    tol: &Tolerances,
) -> Result<RepresentationResult<'a>> {
    let mut failed = Vec::new();
    for (kind, r) in [
        (CheckKind::Normality, check_normality(model, probes, tol)),
        (CheckKind::Galilean, check_galilean(model, probes, &default_shifts(), tol)),
        (CheckKind::Parity, check_parity(model, probes, tol)),
    ] {
        if !r.map(|o| o.passed).unwrap_or(false) {
            failed.push(kind.name());
        }
    }
    if !failed.is_empty() {
        return Err(Error::Precondition(format!("representation requires passing checks: {}", failed.join(", "))));
    }

    let f0 = probes.states[0].f;
    let momenta: Vec<Vec3> = probes.states.iter().map(|s| s.p).filter(|p| p.norm() > 1e-8).collect();
    let split_at = momenta.len().div_ceil(2);
    let (fit, held_out) = momenta.split_at(split_at);

    let mut ppt = Ten2::ZERO;
    let mut vpt = Ten2::ZERO;
    for p in fit {
        let v = model.velocity(&State::new(f0, *p))?;
        ppt += outer(p, p);
        vpt += outer(&v, p);
    }
    let gram_scale = ppt.trace();
    let det = ppt.det();
    if fit.len() < 3 || !(gram_scale > 0.0) || det.abs() <= 1e-10 * gram_scale.powi(3) {
        return Err(Error::FitDegenerate);
    }
    let v_fit = vpt.matmul(&ppt.inverse().ok_or(Error::FitDegenerate)?);
    let m_fit = v_fit.inverse().ok_or(Error::Singular { det: v_fit.det() })?;
    let inverse_err = (v_fit.matmul(&m_fit) - Ten2::IDENTITY).norm_inf();
    if inverse_err > 1e-10 {
        return Err(Error::Singular { det: v_fit.det() });
    }

    let mut linearity = 0.0f64;
    for p in held_out {
        let v = model.velocity(&State::new(f0, *p))?;
        linearity = linearity.max((v - v_fit.apply(p)).norm());
    }
    for s in &probes.states {
        linearity = linearity.max((model.velocity(s)? - v_fit.apply(&s.p)).norm());
    }

    let mut split = 0.0f64;
    for s in &probes.states {
        let tau = model.energy(s)?;
        let sigma = model.energy(&State::new(s.f, Vec3::ZERO))?;
        split = split.max((tau - sigma - 0.5 * s.p.dot(&v_fit.apply(&s.p))).abs());
    }

    Ok(RepresentationResult {
        v_fit,
        m_fit,
        symmetry_residual: v_fit.asymmetry(),
        linearity_residual: linearity,
        split_residual: split,
        split_ok: split <= tol.split_tol,
        reference_f: f0,
        model,
    })
}

/// Initial time rates at `x₀` for affine data `F = A + a·(x − x₀)(b⊗a)`,
/// `v = B(x − x₀) + c`:
///
/// `Ḟ = B`, `ṗ_i = ∂_{v_k} S̃_ij(A, c) B_kj + E_ih(A, c; a) b_h`.
pub fn initial_rate_check(
    model: &dyn ConstitutiveModel,
    a_mat: &Ten2,
    b_mat: &Ten2,
    a: &Vec3,
    b: &Vec3,
    c: &Vec3,
    tol: &Tolerances,
) -> Result<(Ten2, Vec3)> {
    if (a.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit { norm: a.norm() });
    }
    let coupling = velocity_coupling(model, a_mat, c, b_mat, tol)?;
    let e = ellipticity_matrix(model, a_mat, c, a, tol)?;
    Ok((*b_mat, coupling + e.apply(b)))
}

/// `∂_{v_k} S̃_ij(A, c) B_kj`.
pub fn velocity_coupling(model: &dyn ConstitutiveModel, a_mat: &Ten2, c: &Vec3, b_mat: &Ten2, tol: &Tolerances) -> Result<Vec3> {
    let hv = diff::step(tol.fd_rel_step_p, c.norm());
    let ds_dv = diff::jacobian_ten2_by_vec3(|v| stress_at_velocity(model, a_mat, v, tol), c, hv)?;
    let mut out = Vec3::ZERO;
    for (k, dk) in ds_dv.iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                out.0[i] += dk.0[i][j] * b_mat.0[k][j];
            }
        }
    }
    Ok(out)
}

/// Vector `b` producing the momentum rate `target` at `(A, B, a, c)`.
pub fn rate_preimage(
    model: &dyn ConstitutiveModel,
    a_mat: &Ten2,
    b_mat: &Ten2,
    a: &Vec3,
    c: &Vec3,
    target: &Vec3,
    tol: &Tolerances,
) -> Result<Vec3> {
    let coupling = velocity_coupling(model, a_mat, c, b_mat, tol)?;
    let e = ellipticity_matrix(model, a_mat, c, a, tol)?;
    let inv = e.inverse().ok_or(Error::Singular { det: e.det() })?;
    Ok(inv.apply(&(*target - coupling)))
}
