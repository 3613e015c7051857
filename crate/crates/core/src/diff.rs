//! Central finite differences over tensor and vector arguments.

use crate::error::{Error, Result};
use crate::tensor::{Ten2, Ten4, Vec3};

/// Step `rel · max(1, scale)`.
pub fn step(rel: f64, scale: f64) -> f64 {
    rel * scale.max(1.0)
}

fn check(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite { what })
    }
}

/// Gradient of a scalar function of a tensor.
pub fn grad_ten2(f: impl Fn(&Ten2) -> Result<f64>, at: &Ten2, h: f64) -> Result<Ten2> {
    let mut g = Ten2::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let mut plus = *at;
            let mut minus = *at;
            plus.0[i][j] += h;
            minus.0[i][j] -= h;
            g.0[i][j] = check((f(&plus)? - f(&minus)?) / (2.0 * h), "tensor gradient")?;
        }
    }
    Ok(g)
}

/// Gradient of a scalar function of a vector.
pub fn grad_vec3(f: impl Fn(&Vec3) -> Result<f64>, at: &Vec3, h: f64) -> Result<Vec3> {
    let mut g = Vec3::ZERO;
    for i in 0..3 {
        let mut plus = *at;
        let mut minus = *at;
        plus.0[i] += h;
        minus.0[i] -= h;
        g.0[i] = check((f(&plus)? - f(&minus)?) / (2.0 * h), "vector gradient")?;
    }
    Ok(g)
}

/// Jacobian `J_ih = ∂ f_i / ∂ x_h` of a vector function of a vector.
pub fn jacobian_vec3(f: impl Fn(&Vec3) -> Result<Vec3>, at: &Vec3, h: f64) -> Result<Ten2> {
    let mut j = Ten2::ZERO;
    for col in 0..3 {
        let mut plus = *at;
        let mut minus = *at;
        plus.0[col] += h;
        minus.0[col] -= h;
        let d = (f(&plus)? - f(&minus)?) * (1.0 / (2.0 * h));
        if !d.is_finite() {
            return Err(Error::NonFinite { what: "vector jacobian" });
        }
        for row in 0..3 {
            j.0[row][col] = d.0[row];
        }
    }
    Ok(j)
}

/// `D_{ijhk} = ∂ f_ij / ∂ x_hk` for a tensor function of a tensor.
pub fn jacobian_ten2(f: impl Fn(&Ten2) -> Result<Ten2>, at: &Ten2, h: f64) -> Result<Ten4> {
    let mut d = Ten4::zero();
    for hh in 0..3 {
        for k in 0..3 {
            let mut plus = *at;
            let mut minus = *at;
            plus.0[hh][k] += h;
            minus.0[hh][k] -= h;
            let col = (f(&plus)? - f(&minus)?) * (1.0 / (2.0 * h));
            if !col.is_finite() {
                return Err(Error::NonFinite { what: "tensor jacobian" });
            }
            for i in 0..3 {
                for j in 0..3 {
                    d.set(i, j, hh, k, col.0[i][j]);
                }
            }
        }
    }
    Ok(d)
}

/// `D_{ijh} = ∂ f_ij / ∂ x_h`, stored as three tensors indexed by `h`.
pub fn jacobian_ten2_by_vec3(f: impl Fn(&Vec3) -> Result<Ten2>, at: &Vec3, h: f64) -> Result<[Ten2; 3]> {
    let mut out = [Ten2::ZERO; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut plus = *at;
        let mut minus = *at;
        plus.0[c] += h;
        minus.0[c] -= h;
        *slot = (f(&plus)? - f(&minus)?) * (1.0 / (2.0 * h));
        if !slot.is_finite() {
            return Err(Error::NonFinite { what: "mixed jacobian" });
        }
    }
    Ok(out)
}

/// `D_{ihk} = ∂ f_i / ∂ x_hk`, stored as three tensors indexed by `i`.
pub fn jacobian_vec3_by_ten2(f: impl Fn(&Ten2) -> Result<Vec3>, at: &Ten2, h: f64) -> Result<[Ten2; 3]> {
    let mut out = [Ten2::ZERO; 3];
    for hh in 0..3 {
        for k in 0..3 {
            let mut plus = *at;
            let mut minus = *at;
            plus.0[hh][k] += h;
            minus.0[hh][k] -= h;
            let d = (f(&plus)? - f(&minus)?) * (1.0 / (2.0 * h));
            if !d.is_finite() {
                return Err(Error::NonFinite { what: "mixed jacobian" });
            }
            for (i, slot) in out.iter_mut().enumerate() {
                slot.0[hh][k] = d.0[i];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_is_exact() {
        let a = Ten2([[1.0, 2.0, 0.5], [0.0, -1.0, 3.0], [2.0, 1.0, 1.0]]);
        let f = |x: &Ten2| Ok(0.5 * x.dot(x) + a.dot(x));
        let x = Ten2::diag(1.5, 0.3, -2.0);
        let g = grad_ten2(f, &x, 1e-5).unwrap();
        assert!((g - (x + a)).norm_inf() < 1e-10);
    }

    #[test]
    fn non_finite_is_reported() {
        let f = |x: &Vec3| Ok(if x.0[0] > 0.0 { f64::NAN } else { 0.0 });
        assert!(matches!(grad_vec3(f, &Vec3::ZERO, 1e-3), Err(Error::NonFinite { .. })));
    }
}
