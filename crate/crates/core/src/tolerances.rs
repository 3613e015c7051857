//! Numerical tolerances shared by every check in the crate.
//!
//! Admissibility thresholds sit one decade above the finite-difference noise
//! expected at the default step sizes.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest accepted `|A_ij − A_ji|`, relative to `max(1, ‖A‖∞)`.
    pub sym_tol: f64,
    /// Eigen residual bound, relative to the matrix norm.
    pub eig_tol: f64,
    /// Relative finite-difference step for `F` derivatives.
    pub fd_rel_step_f: f64,
    /// Relative finite-difference step for `p` derivatives.
    pub fd_rel_step_p: f64,
    pub fd_sym_tol: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub normality_tol: f64,
    pub ellipticity_tol: f64,
    pub thermo_tol: f64,
    pub maxwell_tol: f64,
    pub galilean_tol: f64,
    pub parity_tol: f64,
    pub split_tol: f64,
    /// Singular values below `zero_band · σ_max` count as zero.
    pub zero_band: f64,
    /// Smallest singular value of a stacked eigenvector matrix for independence.
    pub independence_tol: f64,
    /// Strong ellipticity requires the minimum acoustic eigenvalue to exceed this.
    pub se_tol: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        sym_tol: 1e-9,
        eig_tol: 1e-9,
        fd_rel_step_f: 1e-5,
        fd_rel_step_p: 1e-5,
        fd_sym_tol: 1e-6,
        newton_tol: 1e-10,
        newton_max_iter: 50,
        normality_tol: 1e-8,
        ellipticity_tol: 1e-8,
        thermo_tol: 1e-5,
        maxwell_tol: 1e-5,
        galilean_tol: 1e-9,
        parity_tol: 1e-9,
        split_tol: 1e-6,
        zero_band: 1e-8,
        independence_tol: 1e-6,
        se_tol: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}
