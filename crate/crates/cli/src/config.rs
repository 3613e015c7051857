//! Run configuration.
//!
//! The file is TOML with a few top-level keys and fixed sections:
//!
//! ```toml
//! mode = "all"            # admissibility | hyperbolicity | simulate | all
//! seed = 7
//! out = "conslaw_out"
//!
//! [model]
//! name = "classical"
//! sigma = "linear_isotropic"
//! lambda = 2.0
//! mu = 1.0
//! rho = 1.0
//!
//! [admissibility]
//! probes = 100
//!
//! [hyperbolicity]
//! directions = 256
//! deformation = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
//!
//! [grid]
//! dims = 1
//! cells = 200
//! length = 1.0
//!
//! [initial]
//! kind = "sine"           # sine | affine
//! wave = "longitudinal"
//! amplitude = 1e-3
//!
//! [simulate]
//! cfl = 0.5
//! t_end = 0.25
//! monitor_every = 10
//! snapshot_every = 0
//! ```
//!
//! Every key is optional. Validation collects all problems before failing.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use conslaw_core::constitutive::controls::{
    CrossCoupled, CubicVelocity, FrameCoupled, OscillatoryStress, ParityBreaking, SingularMass, StateDependentDensity,
    StressScaled,
};
use conslaw_core::constitutive::{classical_model, tensor_mass_model, EnergyKind, IsotropicEnergy, MassDensityTensor};
use conslaw_core::solver::WaveMode;
use conslaw_core::{ConstitutiveModel, Grid, Ten2, Tolerances, Vec3};
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

impl ConfigError {
    /// Validation messages, empty for parse errors.
    pub fn issues(&self) -> &[String] {
        match self {
            ConfigError::Validation(v) => v,
            ConfigError::Parse { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Admissibility,
    Hyperbolicity,
    Simulate,
    All,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Admissibility, Mode::Hyperbolicity, Mode::Simulate, Mode::All];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Admissibility => "admissibility",
            Mode::Hyperbolicity => "hyperbolicity",
            Mode::Simulate => "simulate",
            Mode::All => "all",
        }
    }

    pub fn admissibility(self) -> bool {
        matches!(self, Mode::Admissibility | Mode::All)
    }

    pub fn hyperbolicity(self) -> bool {
        matches!(self, Mode::Hyperbolicity | Mode::All)
    }

    pub fn simulate(self) -> bool {
        matches!(self, Mode::Simulate | Mode::All)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode {s:?} (expected one of {})", names(Mode::ALL.map(Mode::name))))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Model registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Classical,
    TensorMass,
    ParityBreaking,
    SingularMass,
    StressScaled,
    OscillatoryStress,
    StateDependentDensity,
    FrameCoupled,
    CrossCoupled,
    CubicVelocity,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Classical,
        ModelKind::TensorMass,
        ModelKind::ParityBreaking,
        ModelKind::SingularMass,
        ModelKind::StressScaled,
        ModelKind::OscillatoryStress,
        ModelKind::StateDependentDensity,
        ModelKind::FrameCoupled,
        ModelKind::CrossCoupled,
        ModelKind::CubicVelocity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Classical => "classical",
            ModelKind::TensorMass => "tensor_mass",
            ModelKind::ParityBreaking => "parity_breaking",
            ModelKind::SingularMass => "singular_mass",
            ModelKind::StressScaled => "stress_scaled",
            ModelKind::OscillatoryStress => "oscillatory_stress",
            ModelKind::StateDependentDensity => "state_dependent_density",
            ModelKind::FrameCoupled => "frame_coupled",
            ModelKind::CrossCoupled => "cross_coupled",
            ModelKind::CubicVelocity => "cubic_velocity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ModelKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Model-specific keys accepted in `[model]` besides `name`, `sigma`, `lambda`, `mu`.
    fn extra_keys(self) -> &'static [&'static str] {
        match self {
            ModelKind::Classical => &["rho", "parity_term"],
            ModelKind::ParityBreaking => &["rho", "parity_term"],
            ModelKind::TensorMass => &["v"],
            ModelKind::StressScaled => &["rho", "scale"],
            ModelKind::OscillatoryStress | ModelKind::FrameCoupled | ModelKind::CrossCoupled => &["rho"],
            ModelKind::SingularMass | ModelKind::StateDependentDensity | ModelKind::CubicVelocity => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub sigma: EnergyKind,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    /// Inverse mass density for `tensor_mass`.
    pub v: Ten2,
    /// Odd energy term `c·p`; a nonzero value turns a classical model into a parity-breaking one.
    pub parity_term: Vec3,
    /// Stress factor for `stress_scaled`.
    pub scale: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::Classical,
            sigma: EnergyKind::LinearIsotropic,
            lambda: 2.0,
            mu: 1.0,
            rho: 1.0,
            v: Ten2::IDENTITY,
            parity_term: Vec3::ZERO,
            scale: 1.1,
        }
    }
}

impl ModelSpec {
    pub fn build(&self) -> conslaw_core::Result<Box<dyn ConstitutiveModel>> {
        let stored = Arc::new(IsotropicEnergy::new(self.sigma, self.lambda, self.mu));
        let rho = self.rho;
        Ok(match self.kind {
            ModelKind::Classical if self.parity_term == Vec3::ZERO => Box::new(classical_model(rho, stored)?),
            ModelKind::Classical | ModelKind::ParityBreaking => {
                classical_model(rho, stored.clone())?;
                Box::new(ParityBreaking::new(rho, stored, self.parity_term))
            }
            ModelKind::TensorMass => Box::new(tensor_mass_model(self.v, stored)?),
            ModelKind::SingularMass => Box::new(SingularMass::new(stored)),
            ModelKind::StressScaled => Box::new(StressScaled::new(rho, stored, self.scale)),
            ModelKind::OscillatoryStress => Box::new(OscillatoryStress::new(rho, stored)),
            ModelKind::StateDependentDensity => Box::new(StateDependentDensity::new(stored)),
            ModelKind::FrameCoupled => Box::new(FrameCoupled::new(rho, stored)),
            ModelKind::CrossCoupled => Box::new(CrossCoupled::new(rho, stored)),
            ModelKind::CubicVelocity => Box::new(CubicVelocity::new(stored)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilitySpec {
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicitySpec {
    /// Fibonacci directions, in addition to the 26 lattice directions.
    pub directions: usize,
    /// Deformation at which the scan runs, with zero momentum.
    pub deformation: Ten2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: usize,
    pub cells: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn build(&self) -> conslaw_core::Result<Grid> {
        if self.dims == 3 {
            Grid::cube(self.cells, self.length)
        } else {
            Grid::line(self.cells, self.length)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Right-travelling sine wave along the first axis.
    Sine { wave: WaveMode, amplitude: f64 },
    /// `F = A + (a·(x − x₀)) b⊗a`, `v = B(x − x₀) + c`.
    Affine { a_mat: Ten2, b_mat: Ten2, a: Vec3, b: Vec3, c: Vec3, x0: Vec3 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSpec {
    pub cfl: f64,
    pub t_end: f64,
    pub monitor_every: usize,
    /// Snapshot interval in steps; 0 writes only the initial and final fields.
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub out: PathBuf,
    pub model: ModelSpec,
    pub admissibility: AdmissibilitySpec,
    pub hyperbolicity: HyperbolicitySpec,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    pub simulate: SimulateSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::All,
            seed: 1,
            out: PathBuf::from("conslaw_out"),
            model: ModelSpec::default(),
            admissibility: AdmissibilitySpec { probes: 100 },
            hyperbolicity: HyperbolicitySpec { directions: 256, deformation: Ten2::IDENTITY },
            grid: GridSpec { dims: 1, cells: 200, length: 1.0 },
            initial: InitialSpec::Sine { wave: WaveMode::Longitudinal, amplitude: 1e-3 },
            simulate: SimulateSpec { cfl: 0.5, t_end: 0.25, monitor_every: 10, snapshot_every: 0 },
        }
    }
}

impl RunConfig {
    /// SHA-256 of every setting that affects results; the output directory is excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        let digest = Sha256::digest(format!("{canonical:?}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

const SECTIONS: [&str; 6] = ["model", "admissibility", "hyperbolicity", "grid", "initial", "simulate"];
const TOP_KEYS: [&str; 3] = ["mode", "seed", "out"];
const COMMON_MODEL_KEYS: [&str; 4] = ["name", "sigma", "lambda", "mu"];
const SINE_KEYS: [&str; 3] = ["kind", "wave", "amplitude"];
const AFFINE_KEYS: [&str; 7] = ["kind", "A", "B", "a", "b", "c", "x0"];

/// Parse and validate a configuration, filling defaults for absent keys.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = match e.span() {
            Some(span) => line_column(text, span.start),
            None => (1, 1),
        };
        ConfigError::Parse { line, column, message: e.message().trim().to_string() }
    })?;

    let mut v = Validator::default();
    let mut cfg = RunConfig::default();

    for (key, value) in &root {
        let known = TOP_KEYS.contains(&key.as_str()) || SECTIONS.contains(&key.as_str());
        if !known {
            v.err(format!("unknown key {key:?}"));
        } else if SECTIONS.contains(&key.as_str()) && !value.is_table() {
            v.err(format!("{key}: expected a [{key}] section, found {}", value.type_str()));
        }
    }

    if let Some(s) = v.string(&root, "", "mode") {
        match s.parse() {
            Ok(m) => cfg.mode = m,
            Err(e) => v.err(format!("mode: {e}")),
        }
    }
    if let Some(seed) = v.uint(&root, "", "seed") {
        cfg.seed = seed;
    }
    if let Some(out) = v.string(&root, "", "out") {
        if out.is_empty() {
            v.err("out: must not be empty".into());
        } else {
            cfg.out = PathBuf::from(out);
        }
    }

    let empty = Table::new();
    let section = |name: &str| root.get(name).and_then(Value::as_table).unwrap_or(&empty);

    parse_model(&mut v, section("model"), &mut cfg.model);

    let t = section("admissibility");
    v.unknown_keys(t, "admissibility", &["probes"]);
    if let Some(n) = v.uint(t, "admissibility", "probes") {
        if n == 0 {
            v.err("admissibility.probes: must be at least 1".into());
        }
        cfg.admissibility.probes = n as usize;
    }

    let t = section("hyperbolicity");
    v.unknown_keys(t, "hyperbolicity", &["directions", "deformation"]);
    if let Some(n) = v.uint(t, "hyperbolicity", "directions") {
        if n == 0 {
            v.err("hyperbolicity.directions: must be at least 1".into());
        }
        cfg.hyperbolicity.directions = n as usize;
    }
    if let Some(f) = v.mat3(t, "hyperbolicity", "deformation") {
        if !(f.det() > 0.0) {
            v.err(format!("hyperbolicity.deformation: determinant must be positive, got {}", f.det()));
        }
        cfg.hyperbolicity.deformation = f;
    }

    let t = section("grid");
    v.unknown_keys(t, "grid", &["dims", "cells", "length"]);
    if let Some(d) = v.uint(t, "grid", "dims") {
        if d != 1 && d != 3 {
            v.err(format!("grid.dims: must be 1 or 3, got {d}"));
        }
        cfg.grid.dims = d as usize;
    }
    if let Some(n) = v.uint(t, "grid", "cells") {
        if n < 4 {
            v.err(format!("grid.cells: must be at least 4, got {n}"));
        }
        cfg.grid.cells = n as usize;
    }
    if let Some(l) = v.number(t, "grid", "length") {
        if !(l > 0.0) {
            v.err(format!("grid.length: must be positive, got {l}"));
        }
        cfg.grid.length = l;
    }

    parse_initial(&mut v, section("initial"), &mut cfg.initial);

    let t = section("simulate");
    v.unknown_keys(t, "simulate", &["cfl", "t_end", "monitor_every", "snapshot_every"]);
    if let Some(c) = v.number(t, "simulate", "cfl") {
        if !(c > 0.0 && c <= 1.0) {
            v.err(format!("simulate.cfl: must lie in (0, 1], got {c}"));
        }
        cfg.simulate.cfl = c;
    }
    if let Some(t_end) = v.number(t, "simulate", "t_end") {
        if !(t_end > 0.0) {
            v.err(format!("simulate.t_end: must be positive, got {t_end}"));
        }
        cfg.simulate.t_end = t_end;
    }
    if let Some(n) = v.uint(t, "simulate", "monitor_every") {
        if n == 0 {
            v.err("simulate.monitor_every: must be at least 1".into());
        }
        cfg.simulate.monitor_every = n as usize;
    }
    if let Some(n) = v.uint(t, "simulate", "snapshot_every") {
        cfg.simulate.snapshot_every = n as usize;
    }

    if v.errors.is_empty() {
        if let Err(e) = cfg.model.build() {
            v.err(format!("model: {e}"));
        }
    }
    if v.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Validation(v.errors))
    }
}

fn parse_model(v: &mut Validator, t: &Table, spec: &mut ModelSpec) {
    if let Some(name) = v.string(t, "model", "name") {
        match ModelKind::from_name(name) {
            Some(k) => spec.kind = k,
            None => v.err(format!(
                "model.name: unknown model {name:?} (expected one of {})",
                names(ModelKind::ALL.map(ModelKind::name))
            )),
        }
    }
    if spec.kind == ModelKind::ParityBreaking {
        spec.parity_term = Vec3::new(0.0, 0.5, 0.0);
    }
    let extra = spec.kind.extra_keys();
    for key in t.keys() {
        if COMMON_MODEL_KEYS.contains(&key.as_str()) || extra.contains(&key.as_str()) {
            continue;
        }
        let everywhere = ModelKind::ALL.iter().any(|k| k.extra_keys().contains(&key.as_str()));
        if everywhere {
            v.err(format!("model.{key}: not used by model {}", spec.kind.name()));
        } else {
            v.err(format!("unknown key \"model.{key}\""));
        }
    }
    if let Some(s) = v.string(t, "model", "sigma") {
        match EnergyKind::from_name(s) {
            Some(k) => spec.sigma = k,
            None => v.err(format!(
                "model.sigma: unknown stored energy {s:?} (expected one of {})",
                names(EnergyKind::ALL.map(EnergyKind::name))
            )),
        }
    }
    if let Some(x) = v.number(t, "model", "lambda") {
        spec.lambda = x;
    }
    if let Some(x) = v.number(t, "model", "mu") {
        spec.mu = x;
    }
    if let Some(x) = v.number(t, "model", "rho") {
        if !(x > 0.0) {
            v.err(format!("model.rho: must be positive, got {x}"));
        }
        spec.rho = x;
    }
    if let Some(x) = v.number(t, "model", "scale") {
        spec.scale = x;
    }
    if let Some(c) = v.vec3(t, "model", "parity_term") {
        spec.parity_term = c;
    }
    if let Some(m) = v.mat3(t, "model", "v") {
        if let Err(e) = MassDensityTensor::from_inverse(m, &Tolerances::DEFAULT) {
            v.err(format!("model.v: {e}"));
        }
        spec.v = m;
    }
}

fn parse_initial(v: &mut Validator, t: &Table, spec: &mut InitialSpec) {
    let kind = v.string(t, "initial", "kind").unwrap_or("sine");
    match kind {
        "sine" => {
            v.unknown_keys(t, "initial", &SINE_KEYS);
            let mut wave = WaveMode::Longitudinal;
            let mut amplitude = 1e-3;
            if let Some(w) = v.string(t, "initial", "wave") {
                match w {
                    "longitudinal" => wave = WaveMode::Longitudinal,
                    "transverse" => wave = WaveMode::Transverse,
                    _ => v.err(format!("initial.wave: expected \"longitudinal\" or \"transverse\", got {w:?}")),
                }
            }
            if let Some(x) = v.number(t, "initial", "amplitude") {
                amplitude = x;
            }
            *spec = InitialSpec::Sine { wave, amplitude };
        }
        "affine" => {
            v.unknown_keys(t, "initial", &AFFINE_KEYS);
            let a_mat = v.mat3(t, "initial", "A").unwrap_or(Ten2::IDENTITY);
            if !(a_mat.det() > 0.0) {
                v.err(format!("initial.A: determinant must be positive, got {}", a_mat.det()));
            }
            *spec = InitialSpec::Affine {
                a_mat,
                b_mat: v.mat3(t, "initial", "B").unwrap_or(Ten2::ZERO),
                a: v.vec3(t, "initial", "a").unwrap_or(Vec3::basis(0)),
                b: v.vec3(t, "initial", "b").unwrap_or(Vec3::ZERO),
                c: v.vec3(t, "initial", "c").unwrap_or(Vec3::ZERO),
                x0: v.vec3(t, "initial", "x0").unwrap_or(Vec3::ZERO),
            };
        }
        other => v.err(format!("initial.kind: expected \"sine\" or \"affine\", got {other:?}")),
    }
}

fn names<const N: usize>(list: [&str; N]) -> String {
    list.join(", ")
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn err(&mut self, msg: String) {
        self.errors.push(msg);
    }

    fn unknown_keys(&mut self, t: &Table, section: &str, allowed: &[&str]) {
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                self.err(format!("unknown key \"{section}.{key}\""));
            }
        }
    }

    fn get<'t>(&self, t: &'t Table, key: &str) -> Option<&'t Value> {
        t.get(key)
    }

    fn type_error(&mut self, section: &str, key: &str, expected: &str, found: &Value) {
        self.err(format!("{}: expected {expected}, found {}", path(section, key), found.type_str()));
    }

    fn string<'t>(&mut self, t: &'t Table, section: &str, key: &str) -> Option<&'t str> {
        let value = self.get(t, key)?;
        match value.as_str() {
            Some(s) => Some(s),
            None => {
                self.type_error(section, key, "a string", value);
                None
            }
        }
    }

    fn uint(&mut self, t: &Table, section: &str, key: &str) -> Option<u64> {
        let value = self.get(t, key)?;
        match value.as_integer() {
            Some(i) if i >= 0 => Some(i as u64),
            Some(i) => {
                self.err(format!("{}: must be non-negative, got {i}", path(section, key)));
                None
            }
            None => {
                self.type_error(section, key, "an integer", value);
                None
            }
        }
    }

    fn number(&mut self, t: &Table, section: &str, key: &str) -> Option<f64> {
        let value = self.get(t, key)?;
        match as_number(value) {
            Some(x) if x.is_finite() => Some(x),
            Some(x) => {
                self.err(format!("{}: must be finite, got {x}", path(section, key)));
                None
            }
            None => {
                self.type_error(section, key, "a number", value);
                None
            }
        }
    }

    fn vec3(&mut self, t: &Table, section: &str, key: &str) -> Option<Vec3> {
        let value = self.get(t, key)?;
        match value.as_array().and_then(|a| row3(a)) {
            Some(r) => Some(Vec3(r)),
            None => {
                self.err(format!("{}: expected an array of 3 finite numbers", path(section, key)));
                None
            }
        }
    }

    fn mat3(&mut self, t: &Table, section: &str, key: &str) -> Option<Ten2> {
        let value = self.get(t, key)?;
        let rows = value.as_array().filter(|a| a.len() == 3).and_then(|a| {
            let r: Option<Vec<[f64; 3]>> = a.iter().map(|r| r.as_array().and_then(|r| row3(r))).collect();
            r
        });
        match rows {
            Some(r) => Some(Ten2([r[0], r[1], r[2]])),
            None => {
                self.err(format!("{}: expected 3 rows of 3 finite numbers", path(section, key)));
                None
            }
        }
    }
}

fn path(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn row3(a: &[Value]) -> Option<[f64; 3]> {
    if a.len() != 3 {
        return None;
    }
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(a) {
        *o = as_number(x).filter(|x| x.is_finite())?;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mode = \"admissibility\"\n[model]\nname = \"classical\"\nrho = 1\nsigma = \"linear_isotropic\"\nlambda = 2\nmu = 1\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.mode, Mode::Admissibility);
        assert_eq!(cfg.model.kind, ModelKind::Classical);
        assert_eq!((cfg.model.lambda, cfg.model.mu, cfg.model.rho), (2.0, 1.0, 1.0));
        assert_eq!(cfg.simulate.cfl, 0.5);
        assert_eq!(cfg.admissibility.probes, 100);
        assert_eq!(cfg.grid.cells, 200);
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("[model]\nrho_typo = 2\n").unwrap_err();
        assert_eq!(err.issues().len(), 1);
        assert!(err.issues()[0].contains("model.rho_typo"), "{err}");
        let err = parse_config("rho_typo = 2\n").unwrap_err();
        assert!(err.to_string().contains("rho_typo"));
    }

    #[test]
    fn cfl_out_of_range() {
        let err = parse_config("[simulate]\ncfl = 1.5\n").unwrap_err();
        assert!(err.issues()[0].contains("simulate.cfl"), "{err}");
        assert!(parse_config("[simulate]\ncfl = 0\n").is_err());
        assert!(parse_config("[simulate]\ncfl = 1\n").is_ok());
    }

    #[test]
    fn violations_are_aggregated() {
        let text = "mode = \"walk\"\n[model]\nname = \"nope\"\nrho = -1\n[grid]\ncells = 2\ndims = 2\n[simulate]\ncfl = 2\n";
        let err = parse_config(text).unwrap_err();
        let joined = err.issues().join("\n");
        for needle in ["mode", "model.name", "model.rho", "grid.cells", "grid.dims", "simulate.cfl"] {
            assert!(joined.contains(needle), "missing {needle} in {joined}");
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse_config("mode = \"all\"\n[model]\nrho = = 1\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn model_specific_keys() {
        let err = parse_config("[model]\nname = \"classical\"\nv = [[1,0,0],[0,1,0],[0,0,1]]\n").unwrap_err();
        assert!(err.issues()[0].contains("not used by model classical"), "{err}");
        let cfg = parse_config("[model]\nname = \"tensor_mass\"\nv = [[2,0,0],[0,1,0],[0,0,0.5]]\n").unwrap();
        assert_eq!(cfg.model.v, Ten2::diag(2.0, 1.0, 0.5));
        let err = parse_config("[model]\nname = \"tensor_mass\"\nv = [[1,1,0],[0,1,0],[0,0,1]]\n").unwrap_err();
        assert!(err.issues()[0].contains("model.v"));
        assert!(parse_config("[model]\nsigma = \"rubber\"\n").is_err());
    }

    #[test]
    fn parity_term_switches_model() {
        let cfg = parse_config("[model]\nparity_term = [0, 0.5, 0]\n").unwrap();
        assert_eq!(cfg.model.build().unwrap().name(), "parity_breaking");
        let cfg = parse_config("[model]\nname = \"parity_breaking\"\n").unwrap();
        assert_eq!(cfg.model.parity_term, Vec3::new(0.0, 0.5, 0.0));
        assert!(cfg.model.build().unwrap().name().starts_with("parity"));
        assert!(parse_config("").unwrap().model.build().unwrap().name().starts_with("classical"));
    }

    #[test]
    fn affine_initial_condition() {
        let text = "[initial]\nkind = \"affine\"\nB = [[0,0,0],[0.1,0,0],[0,0,0]]\nc = [0.1, 0, 0]\nx0 = [0.5, 0, 0]\n";
        match parse_config(text).unwrap().initial {
            InitialSpec::Affine { b_mat, c, x0, a, .. } => {
                assert_eq!(b_mat.0[1][0], 0.1);
                assert_eq!(c, Vec3::new(0.1, 0.0, 0.0));
                assert_eq!(x0.0[0], 0.5);
                assert_eq!(a, Vec3::basis(0));
            }
            other => panic!("expected affine, got {other:?}"),
        }
        assert!(parse_config("[initial]\nkind = \"affine\"\nwave = \"transverse\"\n").is_err());
        assert!(parse_config("[initial]\nB = [[1,2],[3,4]]\n").is_err());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = parse_config("out = \"x\"\n").unwrap();
        let b = parse_config("out = \"y\"\n").unwrap();
        let c = parse_config("seed = 9\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
