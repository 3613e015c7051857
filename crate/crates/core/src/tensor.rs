//! Fixed-size tensor algebra in three dimensions.
//!
//! Components are taken with respect to a fixed orthonormal basis `c_1, c_2, c_3`.
//! The dyad convention is `(a ⊗ b)_{ij} = a_i b_j`, so `(a ⊗ b) u = a (b · u)`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// A vector of the three-dimensional inner-product space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

/// A second-order tensor (linear map of `Vec3` into itself), row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ten2(pub [[f64; 3]; 3]);

/// A fourth-order tensor acting linearly on `Ten2`: `(S[Z])_{ij} = S_{ijhk} Z_{hk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ten4(pub [f64; 81]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Basis vector `c_i` (zero-based index).
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Vec3(v)
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn normalized(&self) -> Vec3 {
        *self * (1.0 / self.norm())
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Dyad `a ⊗ b` with components `a_i b_j`.
pub fn outer(a: &Vec3, b: &Vec3) -> Ten2 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a.0[i] * b.0[j];
        }
    }
    Ten2(t)
}

impl Ten2 {
    pub const ZERO: Ten2 = Ten2([[0.0; 3]; 3]);
    pub const IDENTITY: Ten2 = Ten2([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Ten2([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = f(i, j);
            }
        }
        Ten2(t)
    }

    /// Unit tensor `c_i ⊗ c_j`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut t = Ten2::ZERO;
        t.0[i][j] = 1.0;
        t
    }

    pub fn transpose(&self) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Frobenius inner product `A · B = tr(Aᵀ B)`.
    pub fn dot(&self, other: &Ten2) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sym(&self) -> Ten2 {
        (*self + self.transpose()) * 0.5
    }

    /// Largest entry of `|A − Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        m
    }

    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Inverse by cofactors; `None` when `|det| ≤ 1e-300`.
    pub fn inverse(&self) -> Option<Ten2> {
        let d = self.det();
        if d.abs() <= 1e-300 || !d.is_finite() {
            return None;
        }
        let a = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        let adj = Ten2([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj * (1.0 / d))
    }

    pub fn matmul(&self, other: &Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let a = &self.0;
        Vec3([
            a[0][0] * v.0[0] + a[0][1] * v.0[1] + a[0][2] * v.0[2],
            a[1][0] * v.0[0] + a[1][1] * v.0[1] + a[1][2] * v.0[2],
            a[2][0] * v.0[0] + a[2][1] * v.0[1] + a[2][2] * v.0[2],
        ])
    }

    /// Column `A c_j`.
    pub fn column(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Ten4 {
    pub fn zero() -> Self {
        Ten4([0.0; 81])
    }

    #[inline]
    fn offset(i: usize, j: usize, h: usize, k: usize) -> usize {
        ((i * 3 + j) * 3 + h) * 3 + k
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Ten4::zero();
        for i in 0..3 {
            for j in 0..3 {
                for h in 0..3 {
                    for k in 0..3 {
                        t.0[Self::offset(i, j, h, k)] = f(i, j, h, k);
                    }
                }
            }
        }
        t
    }

    /// Identity on `Ten2`: `S_{ijhk} = δ_ih δ_jk`.
    pub fn identity() -> Self {
        Ten4::from_fn(|i, j, h, k| if i == h && j == k { 1.0 } else { 0.0 })
    }

    /// Isotropic linear elasticity `λ δ_ij δ_hk + μ (δ_ih δ_jk + δ_ik δ_jh)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Ten4::from_fn(|i, j, h, k| lambda * d(i, j) * d(h, k) + mu * (d(i, h) * d(j, k) + d(i, k) * d(j, h)))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, h: usize, k: usize) -> f64 {
        self.0[Self::offset(i, j, h, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, h: usize, k: usize, value: f64) {
        self.0[Self::offset(i, j, h, k)] = value;
    }

    /// Largest `|S_{ijhk} − S_{hkij}|`.
    pub fn major_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for h in 0..3 {
                    for k in 0..3 {
                        m = m.max((self.get(i, j, h, k) - self.get(h, k, i, j)).abs());
                    }
                }
            }
        }
        m
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// `(S[Z])_{ij} = Σ_{hk} S_{ijhk} Z_{hk}`.
pub fn apply4(s: &Ten4, z: &Ten2) -> Ten2 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for h in 0..3 {
                for k in 0..3 {
                    acc += s.get(i, j, h, k) * z.0[h][k];
                }
            }
            *x = acc;
        }
    }
    Ten2(out)
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Index<(usize, usize)> for Ten2 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Ten2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

macro_rules! impl_linear {
    ($t:ty, $zip:expr) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                $zip(self, rhs, |a: f64, b: f64| a + b)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                $zip(self, rhs, |a: f64, b: f64| a - b)
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, rhs: $t) {
                *self = self.clone() + rhs;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, rhs: $t) {
                *self = self.clone() - rhs;
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $zip(self.clone(), self, |a: f64, _b: f64| a * s)
            }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, t: $t) -> $t {
                t * self
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }
    };
}

fn zip_vec(a: Vec3, b: Vec3, f: impl Fn(f64, f64) -> f64) -> Vec3 {
    Vec3([f(a.0[0], b.0[0]), f(a.0[1], b.0[1]), f(a.0[2], b.0[2])])
}

fn zip_ten2(a: Ten2, b: Ten2, f: impl Fn(f64, f64) -> f64) -> Ten2 {
    Ten2::from_fn(|i, j| f(a.0[i][j], b.0[i][j]))
}

fn zip_ten4(mut a: Ten4, b: Ten4, f: impl Fn(f64, f64) -> f64) -> Ten4 {
    for (x, y) in a.0.iter_mut().zip(b.0.iter()) {
        *x = f(*x, *y);
    }
    a
}

impl_linear!(Vec3, zip_vec);
impl_linear!(Ten2, zip_ten2);
impl_linear!(Ten4, zip_ten4);
