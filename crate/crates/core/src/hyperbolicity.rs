//! Acoustic tensor, the 12×12 hyperbolicity matrix and direction scans.
//!
//! For a direction `w` and `V = ρ⁻¹ 1` the direction-contracted flux Jacobian
//! acts on `(Z, z) ∈ Lin × Vec`. Its vector representation uses the columns of
//! `Z` in order followed by `z`: index `3α + i` holds `Z_{iα}` and `9 + i`
//! holds `z_i`. Nonzero eigenvalues satisfy `E(w) z = ρλ² z`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig_general_with, eig_sym_with, svd, Matrix, SymEigen3};
use crate::tensor::{Ten2, Ten4, Vec3};
use crate::tolerances::Tolerances;

fn require_unit(w: &Vec3) -> Result<()> {
    let n = w.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit { norm: n });
    }
    Ok(())
}

/// `E(w)` with its eigendecomposition (eigenvalues descending).
#[derive(Debug, Clone, Copy)]
pub struct AcousticTensor {
    pub w: Vec3,
    pub e: Ten2,
    pub eigen: SymEigen3,
    /// `|E − Eᵀ|` before symmetrization; zero up to rounding when `𝕊` has major symmetry.
    pub asymmetry: f64,
}

impl AcousticTensor {
    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigen.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.values[2]
    }
}

/// `E(w)_ih = Σ_jk 𝕊_ijhk w_j w_k`.
pub fn acoustic_matrix(s4: &Ten4, w: &Vec3) -> Ten2 {
    Ten2::from_fn(|i, h| {
        let mut sum = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                sum += s4.get(i, j, h, k) * w.0[j] * w.0[k];
            }
        }
        sum
    })
}

pub fn acoustic_tensor(s4: &Ten4, w: &Vec3) -> Result<AcousticTensor> {
    acoustic_tensor_with(s4, w, &Tolerances::DEFAULT)
}

/// The eigendecomposition is taken of the symmetric part; `asymmetry` records
/// how far `E` is from symmetric.
pub fn acoustic_tensor_with(s4: &Ten4, w: &Vec3, tol: &Tolerances) -> Result<AcousticTensor> {
    require_unit(w)?;
    let e = acoustic_matrix(s4, w);
    let eigen = eig_sym_with(&e.sym(), tol)?;
    Ok(AcousticTensor { w: *w, e, eigen, asymmetry: e.asymmetry() })
}

/// Dense 12×12 hyperbolicity matrix `𝕄(w)` for `V = ρ⁻¹ 1`.
#[derive(Debug, Clone)]
pub struct BlockMatrix12 {
    pub m: Matrix,
    pub rho: f64,
    pub w: Vec3,
}

pub const fn z_index(i: usize, alpha: usize) -> usize {
    3 * alpha + i
}

pub const fn p_index(i: usize) -> usize {
    9 + i
}

/// `𝕄_{α4} z = −ρ⁻¹ w_α z`, `𝕄_{4α} u = −(𝕊[u⊗c_α]) w`, other blocks zero.
pub fn assemble_m(s4: &Ten4, rho: f64, w: &Vec3) -> Result<BlockMatrix12> {
    require_unit(w)?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("density must be positive, got {rho}")));
    }
    let mut m = Matrix::zeros(12, 12);
    for alpha in 0..3 {
        for i in 0..3 {
            m[(z_index(i, alpha), p_index(i))] = -w.0[alpha] / rho;
        }
        for i in 0..3 {
            for h in 0..3 {
                let mut sum = 0.0;
                for j in 0..3 {
                    sum += s4.get(i, j, h, alpha) * w.0[j];
                }
                m[(p_index(i), z_index(h, alpha))] = -sum;
            }
        }
    }
    Ok(BlockMatrix12 { m, rho, w: *w })
}

/// A cluster of numerically equal eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: Complex64,
    pub algebraic: usize,
    /// Dimension of the eigenspace.
    pub geometric: usize,
    /// Orthonormal real eigenspace basis (real clusters only).
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Eigenstructure {
    pub eigenvalues: Vec<Complex64>,
    /// `12 − rank(𝕄)` from singular values.
    pub zero_multiplicity: usize,
    /// Largest `|z|`-block norm over the orthonormal kernel basis.
    pub kernel_z_norm: f64,
    pub nonzero: Vec<EigenCluster>,
    /// Rank of the stacked eigenvectors of real nonzero eigenvalues.
    pub independent_count: usize,
    pub independent_positive: usize,
    pub independent_negative: usize,
    /// Smallest singular value of the stacked eigenvector matrix.
    pub independence_sv: f64,
}

impl Eigenstructure {
    /// Nonzero eigenvalues repeated by algebraic multiplicity.
    pub fn nonzero_values(&self) -> Vec<Complex64> {
        self.nonzero.iter().flat_map(|c| std::iter::repeat(c.value).take(c.algebraic)).collect()
    }

    pub fn all_real(&self) -> bool {
        self.nonzero.iter().all(|c| c.value.im == 0.0)
    }
}

pub fn eigenstructure(m: &Matrix) -> Result<Eigenstructure> {
    eigenstructure_with(m, &Tolerances::DEFAULT)
}

/// Zero multiplicity from the singular values of `𝕄`; eigenvalues from the
/// general eigensolver, clustered to `1e−6·‖𝕄‖`; eigenspaces of real clusters
/// from the null space of `𝕄 − λ1`.
pub fn eigenstructure_with(m: &Matrix, tol: &Tolerances) -> Result<Eigenstructure> {
    let n = m.rows();
    let s = svd(m)?;
    let smax = s.values.first().copied().unwrap_or(0.0);
    let zero_multiplicity = n - s.rank(tol.zero_band);
    let kernel_z_norm = s
        .null_space(tol.zero_band)
        .iter()
        .map(|v| v[9.min(n)..].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let eig = eig_general_with(m, tol)?;
    let band = tol.zero_band * smax;
    let cluster_tol = 1e-6 * smax.max(f64::MIN_POSITIVE);
    let mut values: Vec<Complex64> = eig.values.iter().copied().filter(|l| l.norm() > band).collect();
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for l in values {
        match clusters.iter_mut().find(|c| (c[0] - l).norm() <= cluster_tol) {
            Some(c) => c.push(l),
            None => clusters.push(vec![l]),
        }
    }

    let mut nonzero = Vec::with_capacity(clusters.len());
    for c in clusters {
        let mean = c.iter().sum::<Complex64>() / c.len() as f64;
        let real = mean.im.abs() <= cluster_tol;
        if real {
            let shifted = Matrix::from_fn(n, n, |r, k| m[(r, k)] - if r == k { mean.re } else { 0.0 });
            let ss = svd(&shifted)?;
            let basis = null_space_abs(&ss, tol.zero_band * smax);
            nonzero.push(EigenCluster { value: Complex64::new(mean.re, 0.0), algebraic: c.len(), geometric: basis.len(), basis });
        } else {
            // Realification of 𝕄 − λ1 acting on (Re x, Im x).
            let (a, b) = (mean.re, mean.im);
            let r = Matrix::from_fn(2 * n, 2 * n, |r, k| {
                let (br, bk) = (r / n, k / n);
                let (ir, ik) = (r % n, k % n);
                let diag = if ir == ik { 1.0 } else { 0.0 };
                match (br, bk) {
                    (0, 0) | (1, 1) => m[(ir, ik)] - a * diag,
                    (0, 1) => b * diag,
                    _ => -b * diag,
                }
            });
            let ss = svd(&r)?;
            let dim = null_space_abs(&ss, tol.zero_band * smax).len() / 2;
            nonzero.push(EigenCluster { value: mean, algebraic: c.len(), geometric: dim, basis: Vec::new() });
        }
    }

    let mut stacked: Vec<(f64, Vec<f64>)> = Vec::new();
    for c in nonzero.iter().filter(|c| c.value.im == 0.0) {
        for v in &c.basis {
            stacked.push((c.value.re, v.clone()));
        }
    }
    let rank_of = |vs: &[&Vec<f64>]| -> Result<(usize, f64)> {
        if vs.is_empty() {
            return Ok((0, 0.0));
        }
        let a = Matrix::from_fn(n, vs.len(), |r, k| vs[k][r]);
        let ss = svd(&a)?;
        Ok((ss.values.iter().filter(|&&x| x > 1e-6).count(), ss.smallest()))
    };
    let all: Vec<&Vec<f64>> = stacked.iter().map(|(_, v)| v).collect();
    let pos: Vec<&Vec<f64>> = stacked.iter().filter(|(l, _)| *l > 0.0).map(|(_, v)| v).collect();
    let neg: Vec<&Vec<f64>> = stacked.iter().filter(|(l, _)| *l < 0.0).map(|(_, v)| v).collect();
    let (independent_count, independence_sv) = rank_of(&all)?;

    Ok(Eigenstructure {
        eigenvalues: eig.values,
        zero_multiplicity,
        kernel_z_norm,
        nonzero,
        independent_count,
        independent_positive: rank_of(&pos)?.0,
        independent_negative: rank_of(&neg)?.0,
        independence_sv,
    })
}

fn null_space_abs(s: &crate::linalg::Svd, threshold: f64) -> Vec<Vec<f64>> {
    (0..s.values.len()).filter(|&k| s.values[k] <= threshold).map(|k| s.v.column(k)).collect()
}

/// Fibonacci-sphere points followed by the 26 axis, face-diagonal and
/// body-diagonal directions.
pub fn scan_directions_set(n_fib: usize) -> Vec<Vec3> {
    let mut dirs = Vec::with_capacity(n_fib + 26);
    let golden = PI * (3.0 - 5.0f64.sqrt());
    for k in 0..n_fib {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n_fib as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * k as f64;
        dirs.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
    }
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    dirs.push(Vec3::new(x as f64, y as f64, z as f64).normalized());
                }
            }
        }
    }
    dirs
}

/// Per-direction result of a scan.
#[derive(Debug, Clone)]
pub struct DirectionRecord {
    pub w: Vec3,
    pub acoustic: [f64; 3],
    /// Eigenvector of the smallest acoustic eigenvalue.
    pub min_vector: Vec3,
    /// `√(μ/ρ)` for each acoustic eigenvalue `μ`; NaN when `μ < 0` or no density is given.
    pub wave_speeds: [f64; 3],
    /// Block-matrix results, present when a scalar density is given.
    pub zero_multiplicity: Option<usize>,
    pub independent_count: Option<usize>,
}

impl DirectionRecord {
    pub fn min_eigenvalue(&self) -> f64 {
        self.acoustic[2]
    }
}

#[derive(Debug, Clone)]
pub struct HyperbolicityReport {
    pub f: Ten2,
    pub rho: Option<f64>,
    pub records: Vec<DirectionRecord>,
    pub min_eigenvalue: f64,
    /// Index into `records` of the direction attaining `min_eigenvalue`.
    pub argmin: usize,
    pub se_tol: f64,
    pub strongly_elliptic: bool,
}

impl HyperbolicityReport {
    pub fn worst(&self) -> &DirectionRecord {
        &self.records[self.argmin]
    }

    pub const CSV_HEADER: &'static str =
        "w1,w2,w3,mu1,mu2,mu3,speed1,speed2,speed3,zero_multiplicity,independent_count";

    pub fn csv_rows(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| {
                let mut s = String::new();
                for x in r.w.0.iter().chain(&r.acoustic).chain(&r.wave_speeds) {
                    let _ = write!(s, "{x:.10e},");
                }
                let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
                let _ = write!(s, "{},{}", opt(r.zero_multiplicity), opt(r.independent_count));
                s
            })
            .collect()
    }
}

/// Scan strong ellipticity of `𝕊(F)` over `n_dirs` Fibonacci directions plus
/// the 26 lattice directions, and the eigenstructure of `𝕄(w)` for each.
pub fn scan_directions(
    s4_at: impl Fn(&Ten2) -> Result<Ten4>,
    f: &Ten2,
    rho: f64,
    n_dirs: usize,
    tol: &Tolerances,
) -> Result<HyperbolicityReport> {
    scan(s4_at, f, Some(rho), n_dirs, tol)
}

/// Acoustic part of [`scan_directions`] only, for models without a scalar density.
pub fn scan_acoustic(
    s4_at: impl Fn(&Ten2) -> Result<Ten4>,
    f: &Ten2,
    n_dirs: usize,
    tol: &Tolerances,
) -> Result<HyperbolicityReport> {
    scan(s4_at, f, None, n_dirs, tol)
}

fn scan(
    s4_at: impl Fn(&Ten2) -> Result<Ten4>,
    f: &Ten2,
    rho: Option<f64>,
    n_dirs: usize,
    tol: &Tolerances,
) -> Result<HyperbolicityReport> {
    if n_dirs == 0 {
        return Err(Error::InvalidArgument("n_dirs must be at least 1".into()));
    }
    let s4 = s4_at(f)?;
    let dirs = scan_directions_set(n_dirs);
    let records = dirs
        .par_iter()
        .map(|w| direction_record(&s4, rho, w, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut argmin = 0;
    for (k, r) in records.iter().enumerate() {
        if r.min_eigenvalue() < records[argmin].min_eigenvalue() {
            argmin = k;
        }
    }
    let min_eigenvalue = records[argmin].min_eigenvalue();
    Ok(HyperbolicityReport {
        f: *f,
        rho,
        records,
        min_eigenvalue,
        argmin,
        se_tol: tol.se_tol,
        strongly_elliptic: min_eigenvalue > tol.se_tol,
    })
}

fn direction_record(s4: &Ten4, rho: Option<f64>, w: &Vec3, tol: &Tolerances) -> Result<DirectionRecord> {
    let at = acoustic_tensor_with(s4, w, tol)?;
    let es = match rho {
        Some(rho) => Some(eigenstructure_with(&assemble_m(s4, rho, w)?.m, tol)?),
        None => None,
    };
    let ev = at.eigenvalues();
    Ok(DirectionRecord {
        w: *w,
        acoustic: ev,
        min_vector: at.eigen.vectors[2],
        wave_speeds: ev.map(|mu| match rho {
            Some(rho) if mu >= 0.0 => (mu / rho).sqrt(),
            _ => f64::NAN,
        }),
        zero_multiplicity: es.as_ref().map(|e| e.zero_multiplicity),
        independent_count: es.as_ref().map(|e| e.independent_count),
    })
}

/// Smallest acoustic eigenvalue over `dirs`.
pub fn min_acoustic_eigenvalue(s4: &Ten4, dirs: &[Vec3]) -> Result<f64> {
    let mut min = f64::INFINITY;
    for w in dirs {
        min = min.min(acoustic_tensor(s4, w)?.min_eigenvalue());
    }
    Ok(min)
}

/// Locate a sign change of `g` in `[lo, hi]` by bisection to width `tol`.
///
/// Returns `None` when `g(lo)` and `g(hi)` have the same sign.
pub fn bisect_sign_change(g: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<Option<f64>> {
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a)?, g(b)?);
    if ga == 0.0 {
        return Ok(Some(a));
    }
    if gb == 0.0 {
        return Ok(Some(b));
    }
    if ga.signum() == gb.signum() {
        return Ok(None);
    }
    let sa = ga.signum();
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(Some(mid));
        }
        if gm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
