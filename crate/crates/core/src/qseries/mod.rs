//! Truncated q-series arithmetic and the special functions built on it:
//! Dedekind η, the quasimodular Eisenstein series G₂, the two-variable
//! series P₂(q_z, q) = ℘(z, τ) + G₂(τ), Weierstrass ℘, and the four theta
//! functions with half-integer characteristics.
//!
//! Numeric evaluation always goes through q-expansions or Gaussian lattice
//! sums. The conditionally convergent Eisenstein double sums are never used
//! for evaluation.

mod biseries;
mod series;
mod special;
mod theta;

use num_complex::Complex64;

pub use biseries::BiSeries;
pub use series::TruncatedSeries;
pub use special::{
    dedekind_eta, eisenstein_g2, eta_eval, eta_eval_with_floor, g2_eval, g2_eval_with_floor,
    p2_eval, p2_eval_with_floor, p2_series, weierstrass_p, weierstrass_p_with_floor,
};
pub use theta::{jacobi_theta, jacobi_theta_with_floor, HalfCharacteristic};

/// `2πi`.
pub const TAU_2PI_I: Complex64 = Complex64::new(0.0, std::f64::consts::TAU);

/// Default lower bound on `Im τ` accepted by the evaluators.
pub const DEFAULT_IM_TAU_FLOOR: f64 = 0.25;

/// Truncation target: terms are dropped once `|q|^N` falls below this.
pub(crate) const TRUNCATION_EPS: f64 = 1e-19;

/// Points closer than this to a lattice point `ℤτ + ℤ` count as poles.
pub const POLE_TOLERANCE: f64 = 1e-8;

pub(crate) fn check_floor(tau: Complex64, floor: f64) -> crate::Result<()> {
    if tau.im < floor || tau.im <= 0.0 || !tau.im.is_finite() {
        Err(crate::Error::ImTooSmall { im: tau.im, floor })
    } else {
        Ok(())
    }
}

/// `q = e^{2πiτ}`.
pub fn nome(tau: Complex64) -> Complex64 {
    (TAU_2PI_I * tau).exp()
}

/// Smallest `N` with `|q|^N` below the truncation target.
pub(crate) fn truncation_order(q_abs: f64) -> usize {
    debug_assert!(q_abs < 1.0);
    if q_abs == 0.0 {
        return 1;
    }
    (TRUNCATION_EPS.ln() / q_abs.ln()).ceil().max(1.0) as usize
}
