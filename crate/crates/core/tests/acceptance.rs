//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use conslaw_core::admissibility::{
    assess, extract_representation, initial_rate_check, random_deformation, rate_preimage, CheckKind, ProbeSet,
};
use conslaw_core::constitutive::controls::{
    OscillatoryStress, ParityBreaking, SingularMass, StateDependentDensity, StressScaled,
};
use conslaw_core::constitutive::{
    classical_model, elasticity_of, stored_energy_registry, tensor_mass_model, ConstitutiveModel, IsotropicEnergy,
    State, StoredEnergy, ZeroEnergy,
};
use conslaw_core::hyperbolicity::{
    acoustic_tensor, assemble_m, bisect_sign_change, eigenstructure, min_acoustic_eigenvalue, scan_directions,
    scan_directions_set,
};
use conslaw_core::linalg::eig_sym;
use conslaw_core::solver::wave::track_wave_speed;
use conslaw_core::solver::{affine_initial_field, run, sine_wave_field, step_lax_friedrichs, Field, Grid, WaveMode};
use conslaw_core::{Ten2, Tolerances, Vec3};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn tol() -> Tolerances {
    Tolerances::DEFAULT
}

fn lin() -> Arc<dyn StoredEnergy> {
    Arc::new(IsotropicEnergy::linear(2.0, 1.0))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s4 = elasticity_of(&IsotropicEnergy::linear(2.0, 1.0), &Ten2::IDENTITY).map_err(|e| e.to_string())?;
    let dirs = scan_directions_set(256);
    let want = [-2.0, -1.0, -1.0, 1.0, 1.0, 2.0];
    let results: Vec<Result<(f64, f64), String>> = dirs
        .par_iter()
        .map(|w| {
            let es = eigenstructure(&assemble_m(&s4, 1.0, w).map_err(|e| e.to_string())?.m).map_err(|e| e.to_string())?;
            ensure(es.zero_multiplicity == 6, format!("zero multiplicity {} at w = {:?}", es.zero_multiplicity, w.0))?;
            let mut vals: Vec<f64> = es.nonzero_values().iter().map(|l| l.re).collect();
            ensure(es.all_real() && vals.len() == 6, format!("nonzero spectrum {:?} at w = {:?}", es.nonzero_values(), w.0))?;
            vals.sort_by(f64::total_cmp);
            let err = vals.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(err <= 1e-8, format!("spectrum error {err:.2e} at w = {:?}", w.0))?;
            ensure(
                es.independent_count == 6 && es.independent_positive == 3 && es.independent_negative == 3,
                format!("independent eigenvectors {} at w = {:?}", es.independent_count, w.0),
            )?;
            Ok((err, es.independence_sv))
        })
        .collect();
    let mut max_err = 0.0f64;
    let mut min_sv = f64::INFINITY;
    for r in results {
        let (e, sv) = r?;
        max_err = max_err.max(e);
        min_sv = min_sv.min(sv);
    }
    ensure(min_sv > 1e-6, format!("eigenvector independence {min_sv:.2e}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("runtime {secs:.2} s"))?;
    Ok(format!(
        "{} directions, zero multiplicity 6, spectrum error {max_err:.1e}, min independence sv {min_sv:.3}, {secs:.2} s",
        dirs.len()
    ))
}

fn criterion_2() -> Outcome {
    let rho = 1.3;
    let dirs = scan_directions_set(256);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let states: Vec<Ten2> = (0..10).map(|_| random_deformation(&mut rng, 0.3)).collect();
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut worst = 0.0f64;
    for se in stored_energy_registry(2.0, 1.0) {
        for f in &states {
            let s4 = elasticity_of(se.as_ref(), f).map_err(|e| e.to_string())?;
            let per_dir: Vec<Result<Option<f64>, String>> = dirs
                .par_iter()
                .map(|w| {
                    let at = acoustic_tensor(&s4, w).map_err(|e| e.to_string())?;
                    if at.min_eigenvalue() <= tol().se_tol {
                        return Ok(None);
                    }
                    let es =
                        eigenstructure(&assemble_m(&s4, rho, w).map_err(|e| e.to_string())?.m).map_err(|e| e.to_string())?;
                    let vals = es.nonzero_values();
                    ensure(vals.len() == 6 && es.all_real(), format!("{}: nonzero spectrum {vals:?}", se.name()))?;
                    let mut mus: Vec<f64> = vals.iter().map(|l| rho * l.re * l.re).collect();
                    mus.sort_by(|a, b| b.total_cmp(a));
                    let mut rel = 0.0f64;
                    for (k, mu) in at.eigenvalues().iter().enumerate() {
                        for m in [mus[2 * k], mus[2 * k + 1]] {
                            rel = rel.max((m - mu).abs() / mu.abs());
                        }
                    }
                    Ok(Some(rel))
                })
                .collect();
            for r in per_dir {
                match r? {
                    Some(rel) => {
                        checked += 1;
                        worst = worst.max(rel);
                    }
                    None => skipped += 1,
                }
            }
        }
    }
    ensure(checked > 0, "no positive-definite directions")?;
    ensure(worst <= 1e-8, format!("max relative mismatch {worst:.2e}"))?;
    Ok(format!("{checked} (model, F, w) triples, max relative mismatch {worst:.1e} ({skipped} non-definite skipped)"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let probes = ProbeSet::random(100, 3);
    let mut constructed: Vec<Box<dyn ConstitutiveModel>> = Vec::new();
    for se in stored_energy_registry(2.0, 1.0) {
        constructed.push(Box::new(classical_model(1.3, se.clone()).map_err(|e| e.to_string())?));
        constructed.push(Box::new(tensor_mass_model(Ten2::diag(1.0, 2.0, 3.0), se.clone()).map_err(|e| e.to_string())?));
        let v = Ten2([[1.0, 0.2, 0.1], [0.2, 0.8, -0.1], [0.1, -0.1, 1.5]]);
        constructed.push(Box::new(tensor_mass_model(v, se).map_err(|e| e.to_string())?));
    }
    let mut worst_thermo = 0.0f64;
    let mut worst_maxwell = 0.0f64;
    for m in &constructed {
        let r = assess(m.as_ref(), &probes, &tol());
        ensure(r.all_passed(), format!("{} failed {:?}", m.name(), r.failed()))?;
        worst_thermo = worst_thermo.max(r.get(CheckKind::Thermo).value);
        worst_maxwell = worst_maxwell.max(r.get(CheckKind::Maxwell).value);
    }
    ensure(worst_thermo <= 1e-5 && worst_maxwell <= 1e-5, "residual above 1e-5")?;

    let controls: Vec<(Box<dyn ConstitutiveModel>, CheckKind)> = vec![
        (Box::new(SingularMass::new(lin())), CheckKind::Normality),
        (Box::new(classical_model(1.0, Arc::new(ZeroEnergy)).map_err(|e| e.to_string())?), CheckKind::Ellipticity),
        (Box::new(StressScaled::new(1.0, lin(), 1.1)), CheckKind::Thermo),
        (Box::new(OscillatoryStress::new(1.0, lin())), CheckKind::Maxwell),
        (Box::new(StateDependentDensity::new(lin())), CheckKind::Galilean),
        (Box::new(ParityBreaking::new(1.0, lin(), Vec3::new(0.0, 0.5, 0.0))), CheckKind::Parity),
    ];
    for (m, target) in &controls {
        let r = assess(m.as_ref(), &probes, &tol());
        ensure(r.failed() == vec![*target], format!("{} failed {:?}, expected [{:?}]", m.name(), r.failed(), target))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, format!("runtime {secs:.2} s"))?;
    Ok(format!(
        "{} models pass (thermo {worst_thermo:.1e}, maxwell {worst_maxwell:.1e}); 6 controls fail exactly their target; {secs:.2} s",
        constructed.len()
    ))
}

fn random_symmetric_invertible(rng: &mut ChaCha8Rng) -> Ten2 {
    let r = Ten2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let q = eig_sym(&(r + r.transpose())).expect("symmetric").vectors;
    let mut v = Ten2::ZERO;
    for qk in q {
        let mag = rng.gen_range(0.5..3.0);
        let sign = if rng.gen_bool(0.25) { -1.0 } else { 1.0 };
        v += conslaw_core::outer(&qk, &qk) * (sign * mag);
    }
    v.sym()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut e_v, mut e_split, mut e_sym) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..20 {
        let v = random_symmetric_invertible(&mut rng);
        let se: Arc<dyn StoredEnergy> = Arc::new(IsotropicEnergy::neo_hookean(2.0, 1.0));
        let model = tensor_mass_model(v, se).map_err(|e| e.to_string())?;
        let probes = ProbeSet::random(40, 400 + k);
        let r = extract_representation(&model, &probes, &tol()).map_err(|e| format!("V #{k}: {e}"))?;
        e_v = e_v.max((r.v_fit - v).norm_inf());
        e_split = e_split.max(r.split_residual);
        e_sym = e_sym.max(r.symmetry_residual);
    }
    ensure(e_v <= 1e-8, format!("V recovery error {e_v:.2e}"))?;
    ensure(e_split <= 1e-6, format!("split residual {e_split:.2e}"))?;
    ensure(e_sym <= 1e-9, format!("symmetry residual {e_sym:.2e}"))?;
    Ok(format!("20 tensors: |V_fit − V| {e_v:.1e}, split {e_split:.1e}, symmetry {e_sym:.1e}"))
}

fn criterion_5() -> Outcome {
    let model = classical_model(1.0, Arc::new(IsotropicEnergy::svk(2.0, 1.0))).map_err(|e| e.to_string())?;
    let grid = Grid::line(400, 1.0).map_err(|e| e.to_string())?;
    let h = grid.h[0];
    let x0_cell = 200;
    let x0 = grid.center(x0_cell);
    let a = Vec3::basis(0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ratio = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for _ in 0..5 {
        let a_mat = Ten2::IDENTITY + Ten2::from_fn(|_, _| rng.gen_range(-0.1..0.1));
        let mut b_mat = Ten2::ZERO;
        for i in 0..3 {
            b_mat.0[i][0] = rng.gen_range(-0.5..0.5);
        }
        let b = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let c = Vec3::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let field = affine_initial_field(&model, grid, &a_mat, &b_mat, &a, &b, &c, &x0, &tol()).map_err(|e| e.to_string())?;
        let st = step_lax_friedrichs(&model, &field, 0.5, f64::INFINITY, &tol()).map_err(|e| e.to_string())?;
        let (s0, s1) = (field.cells[x0_cell], st.field.cells[x0_cell]);
        let fd = (s1.f - s0.f) * (1.0 / st.dt);
        let pd = (s1.p - s0.p) * (1.0 / st.dt);
        let (f_rate, p_rate) = initial_rate_check(&model, &a_mat, &b_mat, &a, &b, &c, &tol()).map_err(|e| e.to_string())?;
        let scale = f_rate.norm().max(p_rate.norm()).max(1.0);
        let err = (fd - f_rate).norm().max((pd - p_rate).norm()) / scale;
        worst_ratio = worst_ratio.max(err / (st.dt + h * h));

        let target = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b_pre = rate_preimage(&model, &a_mat, &b_mat, &a, &c, &target, &tol()).map_err(|e| e.to_string())?;
        let (_, reached) = initial_rate_check(&model, &a_mat, &b_mat, &a, &b_pre, &c, &tol()).map_err(|e| e.to_string())?;
        let b_back = rate_preimage(&model, &a_mat, &b_mat, &a, &c, &reached, &tol()).map_err(|e| e.to_string())?;
        worst_round_trip = worst_round_trip.max((b_back - b_pre).norm()).max((reached - target).norm());
    }
    ensure(worst_ratio <= 5.0, format!("rate error / (Δt + h²) = {worst_ratio:.3}"))?;
    ensure(worst_round_trip <= 1e-8, format!("surjectivity round trip {worst_round_trip:.2e}"))?;
    Ok(format!("rate error ≤ {worst_ratio:.3}·(Δt + h²) over 5 data sets; round trip {worst_round_trip:.1e}"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let model = classical_model(1.0, lin()).map_err(|e| e.to_string())?;
    let grid = Grid::line(400, 1.0).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (mode, expected, component) in [(WaveMode::Longitudinal, 2.0, (0, 0)), (WaveMode::Transverse, 1.0, (1, 0))] {
        let field = sine_wave_field(&model, grid, mode, 1e-2, &tol()).map_err(|e| e.to_string())?;
        let period = 1.0 / expected;
        let m = track_wave_speed(&model, field, period, 0.5, 10, |s: &State| s.f.0[component.0][component.1], &tol())
            .map_err(|e| e.to_string())?;
        let rel = (m.speed - expected).abs() / expected;
        ensure(rel <= 0.02, format!("{} speed {:.4} vs {expected}", mode.name(), m.speed))?;
        parts.push(format!("{} {:.4} ({:.2}%)", mode.name(), m.speed, 100.0 * rel));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("runtime {secs:.2} s"))?;
    Ok(format!("{}, {secs:.2} s", parts.join(", ")))
}

fn smooth_1d(model: &dyn ConstitutiveModel, cells: usize) -> Result<Field, String> {
    let grid = Grid::line(cells, 1.0).map_err(|e| e.to_string())?;
    Field::from_velocity_fn(model, grid, &tol(), |x| {
        let s = (2.0 * PI * x.0[0]).sin();
        let c = (2.0 * PI * x.0[0]).cos();
        let f = Ten2::IDENTITY + Ten2([[0.02 * s, 0.0, 0.0], [0.01 * c, 0.0, 0.0], [0.005 * s, 0.0, 0.0]]);
        (f, Vec3::new(0.01 * c + 0.05, -0.02 * s, 0.01))
    })
    .map_err(|e| e.to_string())
}

fn compatible_3d(model: &dyn ConstitutiveModel, cells: usize) -> Result<Field, String> {
    let grid = Grid::cube(cells, 1.0).map_err(|e| e.to_string())?;
    let k = 2.0 * PI;
    Field::from_velocity_fn(model, grid, &tol(), |x| {
        let (x1, x2, x3) = (x.0[0], x.0[1], x.0[2]);
        // F = 1 + ε∇u with u = (sin kx₁ cos kx₂, sin k(x₂ + x₃), cos kx₁ sin kx₃)/k.
        let eps = 0.05;
        let grad = Ten2([
            [(k * x1).cos() * (k * x2).cos(), -(k * x1).sin() * (k * x2).sin(), 0.0],
            [0.0, (k * (x2 + x3)).cos(), (k * (x2 + x3)).cos()],
            [-(k * x1).sin() * (k * x3).sin(), 0.0, (k * x1).cos() * (k * x3).cos()],
        ]);
        (Ten2::IDENTITY + grad * eps, Vec3::new(0.02 * (k * x2).sin(), 0.0, 0.01))
    })
    .map_err(|e| e.to_string())
}

fn criterion_7() -> Outcome {
    let model = classical_model(1.0, Arc::new(IsotropicEnergy::svk(2.0, 1.0))).map_err(|e| e.to_string())?;
    let t_end = 0.25;
    let mut drift = Vec::new();
    let mut dissipation = Vec::new();
    let mut conservation = 0.0f64;
    for cells in [200, 400] {
        let field = smooth_1d(&model, cells)?;
        let (f0, p0) = field.totals();
        let mass: f64 = field.cells.iter().map(|s| s.f.norm() + s.p.norm()).sum::<f64>() * field.grid.cell_volume();
        let (out, trace) = run(&model, field, t_end, 0.5, 1, &tol()).map_err(|e| e.to_string())?;
        let (f1, p1) = out.totals();
        conservation = conservation.max((f1 - f0).norm().max((p1 - p0).norm()) / mass);
        drift.push(trace.last().map(|r| r.drift.abs()).unwrap_or(0.0));
        dissipation.push(trace.max_dissipation());
    }
    let drift_ratio = drift[1] / drift[0];
    let diss_ratio = dissipation[1] / dissipation[0];

    let mut involution = Vec::new();
    for cells in [8, 16] {
        let (_, trace) = run(&model, compatible_3d(&model, cells)?, 0.05, 0.5, 1, &tol()).map_err(|e| e.to_string())?;
        involution.push(trace.max_involution());
    }
    let inv_ratio = involution[1] / involution[0];

    ensure(conservation <= 1e-12, format!("conservation error {conservation:.2e}"))?;
    ensure(drift_ratio <= 0.7, format!("energy drift ratio {drift_ratio:.3} ({:.2e} → {:.2e})", drift[0], drift[1]))?;
    ensure(diss_ratio <= 0.7, format!("dissipation ratio {diss_ratio:.3}"))?;
    ensure(inv_ratio < 1.0, format!("involution ratio {inv_ratio:.3}"))?;
    Ok(format!(
        "conservation {conservation:.1e}; drift ratio {drift_ratio:.3}; dissipation ratio {diss_ratio:.3}; involution ratio {inv_ratio:.3} (3-D {:.2e} → {:.2e})",
        involution[0], involution[1]
    ))
}

fn criterion_8() -> Outcome {
    let neg = IsotropicEnergy::linear(2.0, -1.0);
    let r = scan_directions(|f| elasticity_of(&neg, f), &Ten2::IDENTITY, 1.0, 256, &tol()).map_err(|e| e.to_string())?;
    ensure(!r.strongly_elliptic, "μ = −1 reported strongly elliptic")?;
    let svk = IsotropicEnergy::svk(2.0, 1.0);
    let dirs = scan_directions_set(256);
    let g = |s: f64| -> conslaw_core::Result<f64> { min_acoustic_eigenvalue(&elasticity_of(&svk, &(Ten2::IDENTITY * s))?, &dirs) };
    let at_04 = g(0.4).map_err(|e| e.to_string())?;
    ensure(at_04 < 0.0, format!("no negative acoustic eigenvalue at F = 0.4·1 (min {at_04:.3e})"))?;
    let s_star = bisect_sign_change(g, 0.3, 1.0, 1e-10)
        .map_err(|e| e.to_string())?
        .ok_or("no sign change on [0.3, 1]")?;
    Ok(format!(
        "μ = −1 min eigenvalue {:.3}; SVK min eigenvalue {at_04:.3} at s = 0.4, sign change at s = {s_star:.8}",
        r.min_eigenvalue
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("eigenstructure of the block matrix", criterion_1),
        ("acoustic spectrum equals ρλ²", criterion_2),
        ("thermodynamic and Maxwell checks with controls", criterion_3),
        ("velocity tensor recovery and energy split", criterion_4),
        ("initial rate formulas and surjectivity", criterion_5),
        ("longitudinal and transverse wave speeds", criterion_6),
        ("conservation and refinement monitors", criterion_7),
        ("loss of strong ellipticity", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
