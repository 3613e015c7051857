//! Small dense eigen and singular value solvers.
//!
//! Everything here targets matrices of order at most a few dozen: cyclic Jacobi
//! for symmetric problems, one-sided Jacobi for the SVD, and Householder
//! reduction followed by Francis double-shift QR for general real matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{Ten2, Vec3};
use crate::tolerances::Tolerances;

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = *x;
        }
        m
    }

    pub fn from_ten2(t: &Ten2) -> Self {
        Matrix::from_fn(3, 3, |i, j| t.0[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum()).collect()
    }

    pub fn mul_cvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| x[j] * self[(i, j)]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: Matrix,
}

/// Eigendecomposition of a symmetric second-order tensor.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen3 {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

/// Cyclic Jacobi eigensolver for a symmetric `n × n` matrix.
pub fn jacobi_eigen(m: &Matrix, tol: &Tolerances) -> Result<SymEigen> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "square matrix required");
    if !m.is_finite() {
        return Err(Error::NonFinite { what: "symmetric eigen input" });
    }
    let scale = m.norm_inf().max(1.0);
    let asym = m.asymmetry();
    if asym > tol.sym_tol * scale {
        return Err(Error::NotSymmetric { asymmetry: asym, tolerance: tol.sym_tol * scale });
    }
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let mut v = Matrix::identity(n);
    let max_sweeps = 100;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { budget: max_sweeps });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric tensor.
pub fn eig_sym(m: &Ten2) -> Result<SymEigen3> {
    eig_sym_with(m, &Tolerances::DEFAULT)
}

pub fn eig_sym_with(m: &Ten2, tol: &Tolerances) -> Result<SymEigen3> {
    let e = jacobi_eigen(&Matrix::from_ten2(m), tol)?;
    let col = |k: usize| Vec3([e.vectors[(0, k)], e.vectors[(1, k)], e.vectors[(2, k)]]);
    Ok(SymEigen3 { values: [e.values[0], e.values[1], e.values[2]], vectors: [col(0), col(1), col(2)] })
}

/// Thin singular value decomposition `A = U Σ Vᵀ` for `rows ≥ cols`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending singular values.
    pub values: Vec<f64>,
    /// Right singular vectors as columns, matching `values`.
    pub v: Matrix,
}

impl Svd {
    /// Numerical rank with threshold `rel · σ_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let smax = self.values.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&s| s > rel * smax).count()
    }

    /// Orthonormal basis of the numerical null space (columns of `V`).
    pub fn null_space(&self, rel: f64) -> Vec<Vec<f64>> {
        let r = self.rank(rel);
        (r..self.values.len()).map(|k| self.v.column(k)).collect()
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "svd input" });
    }
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        let t = svd(&a.transpose())?;
        // Right singular vectors of Aᵀ are not needed by callers of wide matrices.
        return Ok(Svd { values: t.values, v: Matrix::identity(n) });
    }
    let mut u = a.clone();
    let mut v = Matrix::identity(n);
    let max_sweeps = 80;
    let rel = m as f64 * f64::EPSILON;
    // Columns below this squared norm are numerically zero and left alone.
    let negligible = (f64::EPSILON * a.frobenius_norm()).powi(2);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || alpha <= negligible || beta <= negligible || gamma.abs() <= rel * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { budget: max_sweeps });
    }
    let norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    Ok(Svd {
        values: order.iter().map(|&i| norms[i]).collect(),
        v: Matrix::from_fn(n, n, |r, c| v[(r, order[c])]),
    })
}

/// Eigenpairs of a general real matrix.
#[derive(Debug, Clone)]
pub struct GeneralEigen {
    pub values: Vec<Complex64>,
    /// Unit right eigenvector for each entry of `values`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl GeneralEigen {
    /// Largest `‖M v − λ v‖` over the returned pairs.
    pub fn max_residual(&self, m: &Matrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(l, v)| {
                let mv = m.mul_cvec(v);
                mv.iter().zip(v).map(|(a, b)| (a - l * b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues and right eigenvectors of a real square matrix (order ≤ 16).
///
/// Eigenvalues come from Householder–Hessenberg reduction and Francis QR with
/// a budget of `30·n` iterations. Eigenvectors are obtained by inverse
/// iteration on the original matrix; within a cluster of (numerically) equal
/// eigenvalues the iterates are orthogonalized against earlier members so that
/// semisimple eigenvalues receive independent vectors.
pub fn eig_general(m: &Matrix) -> Result<GeneralEigen> {
    eig_general_with(m, &Tolerances::DEFAULT)
}

pub fn eig_general_with(m: &Matrix, tol: &Tolerances) -> Result<GeneralEigen> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "square matrix required");
    if n > 16 {
        return Err(Error::InvalidArgument(format!("eig_general supports order ≤ 16, got {n}")));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite { what: "eig_general input" });
    }
    if n == 0 {
        return Ok(GeneralEigen { values: vec![], vectors: vec![] });
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let mut values = hqr(&mut h, 30 * n)?;
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-6 * scale;
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = values[k];
        let siblings: Vec<&Vec<Complex64>> = (0..k)
            .filter(|&j| (values[j] - lambda).norm() <= cluster_tol)
            .map(|j| &vectors[j])
            .collect();
        let mut vec = inverse_iteration(m, lambda, &siblings, k as u64);
        let mut lam = lambda;
        if residual(m, lam, &vec) > tol.eig_tol * scale && !siblings.is_empty() {
            // Defective cluster: fall back to an unconstrained eigenvector.
            vec = inverse_iteration(m, lambda, &[], k as u64);
        }
        if residual(m, lam, &vec) > tol.eig_tol * scale {
            let rq = rayleigh(m, &vec);
            if residual(m, rq, &vec) < residual(m, lam, &vec) {
                lam = rq;
            }
        }
        values[k] = lam;
        vectors.push(vec);
    }
    Ok(GeneralEigen { values, vectors })
}

fn residual(m: &Matrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.mul_cvec(v);
    mv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt()
}

fn rayleigh(m: &Matrix, v: &[Complex64]) -> Complex64 {
    let mv = m.mul_cvec(v);
    let num: Complex64 = v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn inverse_iteration(m: &Matrix, lambda: Complex64, deflate: &[&Vec<Complex64>], seed: u64) -> Vec<Complex64> {
    let n = m.rows();
    let scale = m.frobenius_norm().max(1e-300);
    let mut a: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(m[(i, j)], 0.0) - if i == j { lambda } else { Complex64::new(0.0, 0.0) }).collect())
        .collect();
    let lu = ComplexLu::factor(&mut a, f64::EPSILON * scale);

    // Deterministic start vector (splitmix64).
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ seed.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut x: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
    let project = |x: &mut Vec<Complex64>| {
        for _ in 0..2 {
            for d in deflate {
                let c: Complex64 = d.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
                for (xi, di) in x.iter_mut().zip(d.iter()) {
                    *xi -= c * di;
                }
            }
        }
    };
    project(&mut x);
    normalize(&mut x);
    for _ in 0..6 {
        let mut y = lu.solve(&x);
        project(&mut y);
        normalize(&mut y);
        x = y;
    }
    // Fix the phase so the largest component is real and positive.
    if let Some(big) = x.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        if big.norm() > 0.0 {
            let phase = big.conj() / big.norm();
            for xi in x.iter_mut() {
                *xi *= phase;
            }
        }
    }
    x
}

struct ComplexLu {
    a: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
}

impl ComplexLu {
    fn factor(a: &mut [Vec<Complex64>], tiny: f64) -> Self {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap_or(k);
            a.swap(k, piv);
            perm.swap(k, piv);
            if a[k][k].norm() < tiny {
                a[k][k] = Complex64::new(tiny.max(f64::MIN_POSITIVE), 0.0);
            }
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                a[i][k] = f;
                for j in (k + 1)..n {
                    let t = f * a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        ComplexLu { a: a.to_vec(), perm }
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.a.len();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.a[i][j] * y[j];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let t = self.a[i][j] * y[j];
                y[i] -= t;
            }
            y[i] /= self.a[i][i];
        }
        y
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut Matrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let alpha_sq: f64 = ((k + 1)..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        if alpha_sq == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        let mut v: Vec<f64> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // A ← H A
        for j in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(r, vi)| vi * a[(k + 1 + r, j)]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for (r, vi) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= f * vi;
            }
        }
        // A ← A H
        for i in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(r, vi)| vi * a[(i, k + 1 + r)]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for (r, vi) in v.iter().enumerate() {
                a[(i, k + 1 + r)] -= f * vi;
            }
        }
        for i in (k + 2)..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroys `a`).
fn hqr(a: &mut Matrix, budget: usize) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut total = 0usize;
    let (mut p, mut q, mut r, mut s, mut w, mut x, mut y, mut z);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= f64::EPSILON * s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            y = a[(nu - 1, nu - 1)];
            w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + if p >= 0.0 { z.abs() } else { -z.abs() };
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if total >= budget {
                return Err(Error::ConvergenceFailure { budget });
            }
            if its == 10 || its == 20 {
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;
            let mut m = nu - 2;
            loop {
                z = a[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - r - s;
                r = a[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k + 1 <= nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = 0.0;
                    if k + 1 != nu {
                        r = a[(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let root = (p * p + q * q + r * r).sqrt();
                s = if p >= 0.0 { root } else { -root };
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            p += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= p * z;
                        }
                        a[(k + 1, j)] -= p * y;
                        a[(k, j)] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        p = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            p += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= p * r;
                        }
                        a[(i, k + 1)] -= p * q;
                        a[(i, k)] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Solve the 3×3 system `A x = b` (Cramer-free, via the cofactor inverse).
/// Minimum-norm least-squares solution of `A x = b`, discarding singular
/// values below `rel · σ_max`.
pub fn lstsq3(a: &Ten2, b: &Vec3, rel: f64) -> Vec3 {
    let Ok(s) = svd(&Matrix::from_ten2(a)) else { return Vec3::ZERO };
    let smax = s.values[0];
    let atb = a.transpose().apply(b);
    let mut x = Vec3::ZERO;
    for k in 0..3 {
        let sigma = s.values[k];
        if sigma > rel * smax && sigma > 0.0 {
            let vk = Vec3([s.v[(0, k)], s.v[(1, k)], s.v[(2, k)]]);
            x += vk * (vk.dot(&atb) / (sigma * sigma));
        }
    }
    x
}

pub fn solve3(a: &Ten2, b: &Vec3) -> Option<Vec3> {
    a.inverse().map(|inv| inv.apply(b))
}
