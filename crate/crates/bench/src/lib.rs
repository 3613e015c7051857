//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use conslaw_core::constitutive::{classical_model, ClassicalModel, IsotropicEnergy};
use conslaw_core::solver::{sine_wave_field, WaveMode};
use conslaw_core::{Field, Grid, Tolerances};

/// Classical linear isotropic model with `λ = 2`, `μ = 1`, `ρ = 1`.
pub fn linear_model() -> ClassicalModel {
    classical_model(1.0, Arc::new(IsotropicEnergy::linear(2.0, 1.0))).expect("valid density")
}

/// Classical St. Venant–Kirchhoff model with `λ = 2`, `μ = 1`, `ρ = 1`.
pub fn svk_model() -> ClassicalModel {
    classical_model(1.0, Arc::new(IsotropicEnergy::svk(2.0, 1.0))).expect("valid density")
}

/// Longitudinal sine wave on a 1-D grid.
pub fn line_field(model: &ClassicalModel, cells: usize) -> Field {
    let grid = Grid::line(cells, 1.0).expect("valid grid");
    sine_wave_field(model, grid, WaveMode::Longitudinal, 1e-3, &Tolerances::DEFAULT).expect("initial data")
}

/// Longitudinal sine wave on a 3-D grid.
pub fn cube_field(model: &ClassicalModel, cells: usize) -> Field {
    let grid = Grid::cube(cells, 1.0).expect("valid grid");
    sine_wave_field(model, grid, WaveMode::Longitudinal, 1e-3, &Tolerances::DEFAULT).expect("initial data")
}
