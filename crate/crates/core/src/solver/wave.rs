//! Propagation-speed measurement by circular cross-correlation.

use super::{step_lax_friedrichs, Field};
use crate::constitutive::{ConstitutiveModel, State};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Shift `s` (in cells, within `(−n/2, n/2]`) maximizing
/// `Σ_i a[i]·b[i + s]`, refined by a parabola through the peak and its neighbours.
pub fn correlation_shift(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    assert_eq!(n, b.len(), "profiles must have equal length");
    let corr = |s: usize| -> f64 { (0..n).map(|i| a[i] * b[(i + s) % n]).sum() };
    let values: Vec<f64> = (0..n).map(corr).collect();
    let mut best = 0;
    for s in 1..n {
        if values[s] > values[best] {
            best = s;
        }
    }
    let (l, c, r) = (values[(best + n - 1) % n], values[best], values[(best + 1) % n]);
    let denom = l - 2.0 * c + r;
    let frac = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    let mut s = best as f64 + frac;
    if s > n as f64 / 2.0 {
        s -= n as f64;
    }
    s
}

/// Measured speed and the run that produced it.
#[derive(Debug, Clone)]
pub struct SpeedMeasurement {
    pub speed: f64,
    pub displacement: f64,
    pub t: f64,
    pub steps: usize,
    pub field: Field,
}

/// Evolve a 1-D field to `t_end` and track the displacement of
/// `profile(state) − mean` by accumulating correlation lags every
/// `sample_every` steps.
pub fn track_wave_speed(
    model: &dyn ConstitutiveModel,
    field: Field,
    t_end: f64,
    cfl: f64,
    sample_every: usize,
    profile: impl Fn(&State) -> f64,
    tol: &Tolerances,
) -> Result<SpeedMeasurement> {
    if field.grid.dims != 1 {
        return Err(Error::InvalidArgument("wave tracking requires a 1-D grid".into()));
    }
    let sample = |f: &Field| -> Vec<f64> {
        let raw: Vec<f64> = f.cells.iter().map(&profile).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        raw.into_iter().map(|x| x - mean).collect()
    };
    let h = field.grid.h[0];
    let t0 = field.t;
    let mut reference = sample(&field);
    let mut cur = field;
    let mut displacement = 0.0;
    let mut steps = 0usize;
    let end = t0 + t_end;
    while cur.t < end * (1.0 - 1e-14) {
        cur = step_lax_friedrichs(model, &cur, cfl, end - cur.t, tol)?.field;
        steps += 1;
        let done = cur.t >= end * (1.0 - 1e-14);
        if steps % sample_every.max(1) == 0 || done {
            let now = sample(&cur);
            displacement += correlation_shift(&reference, &now) * h;
            reference = now;
        }
    }
    let t = cur.t - t0;
    Ok(SpeedMeasurement { speed: displacement / t, displacement, t, steps, field: cur })
}
