use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_floor, DEFAULT_IM_TAU_FLOOR, TRUNCATION_EPS};
use crate::error::Result;

/// A characteristic `(h, k)` with `h, k ∈ {0, ½}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfCharacteristic {
    h_half: bool,
    k_half: bool,
}

impl HalfCharacteristic {
    pub const ZERO_ZERO: Self = Self::new(false, false);
    pub const ZERO_HALF: Self = Self::new(false, true);
    pub const HALF_ZERO: Self = Self::new(true, false);
    pub const HALF_HALF: Self = Self::new(true, true);

    /// `h_half`/`k_half` select ½ instead of 0 for the respective entry.
    pub const fn new(h_half: bool, k_half: bool) -> Self {
        Self { h_half, k_half }
    }

    /// From numeric values; only 0 and ½ are accepted.
    pub fn from_values(h: f64, k: f64) -> Option<Self> {
        let pick = |v: f64| match v {
            v if v == 0.0 => Some(false),
            v if v == 0.5 => Some(true),
            _ => None,
        };
        Some(Self::new(pick(h)?, pick(k)?))
    }

    pub fn all() -> [Self; 4] {
        [Self::ZERO_ZERO, Self::ZERO_HALF, Self::HALF_ZERO, Self::HALF_HALF]
    }

    pub fn h(&self) -> f64 {
        if self.h_half {
            0.5
        } else {
            0.0
        }
    }

    pub fn k(&self) -> f64 {
        if self.k_half {
            0.5
        } else {
            0.0
        }
    }

    /// The characteristic with `h` and `k` exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.k_half, self.h_half)
    }

    /// Constant `ε` in `θ_{h,k}(z/τ, −1/τ) = ε (−iτ)^{1/2} e^{πiz²/τ} θ_{k,h}(z, τ)`,
    /// namely `e^{−2πihk}`: 1 except `−i` for `h = k = ½`.
    pub fn s_factor(&self) -> Complex64 {
        Complex64::new(0.0, -2.0 * PI * self.h() * self.k()).exp()
    }
}

impl std::fmt::Display for HalfCharacteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = |b: bool| if b { "1/2" } else { "0" };
        write!(f, "({},{})", s(self.h_half), s(self.k_half))
    }
}

pub fn jacobi_theta(c: HalfCharacteristic, z: Complex64, tau: Complex64) -> Result<Complex64> {
    jacobi_theta_with_floor(c, z, tau, DEFAULT_IM_TAU_FLOOR)
}

/// `θ_{h,k}(z, τ) = Σ_{n∈ℤ} exp(πi(n+h)²τ + 2πi(n+h)(z+k))`, summed around the
/// peak of the Gaussian envelope until the tail drops below the truncation target.
pub fn jacobi_theta_with_floor(
    c: HalfCharacteristic,
    z: Complex64,
    tau: Complex64,
    floor: f64,
) -> Result<Complex64> {
    check_floor(tau, floor)?;
    let (h, k) = (c.h(), c.k());
    // log|term| = −π t (n+h)² − 2π (n+h) Im z, peaked at n+h = −Im z / t
    let t = tau.im;
    let centre = (-z.im / t - h).round() as i64;
    let half_width = ((-TRUNCATION_EPS.ln() + 5.0) / (PI * t)).sqrt().ceil() as i64 + 2;
    let pi_i = Complex64::new(0.0, PI);
    let sum = (centre - half_width..=centre + half_width)
        .map(|n| {
            let m = n as f64 + h;
            (pi_i * m * m * tau + pi_i * 2.0 * m * (z + k)).exp()
        })
        .sum();
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn odd_theta_vanishes_at_origin() {
        for tau in [c(0.0, 1.0), c(0.3, 0.7), c(-0.4, 1.9)] {
            let v = jacobi_theta(HalfCharacteristic::HALF_HALF, c(0.0, 0.0), tau).unwrap();
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn theta_00_at_i() {
        // oracle: Σ e^{−πn²} summed directly
        let oracle: f64 = (-30i64..=30).map(|n| (-PI * (n * n) as f64).exp()).sum();
        let v = jacobi_theta(HalfCharacteristic::ZERO_ZERO, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((v - c(oracle, 0.0)).norm() < 1e-15);
        assert!((v.re - 1.086_434_811_213_308).abs() < 1e-14);
    }

    #[test]
    fn s_transform_rows() {
        let z = c(0.13, 0.07);
        let tau = c(0.2, 0.9);
        for ch in HalfCharacteristic::all() {
            let lhs = jacobi_theta_with_floor(ch, z / tau, -tau.inv(), 0.1).unwrap();
            let rhs = ch.s_factor()
                * (-Complex64::i() * tau).sqrt()
                * (Complex64::new(0.0, PI) * z * z / tau).exp()
                * jacobi_theta(ch.swapped(), z, tau).unwrap();
            assert!((lhs - rhs).norm() < 1e-12, "{ch}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn large_imaginary_shift_is_summed_around_peak() {
        let tau = c(0.1, 0.5);
        let z = c(0.2, 1.3);
        // quasi-periodicity θ₀₀(z+τ) = e^{−πiτ−2πiz} θ₀₀(z)
        let a = jacobi_theta(HalfCharacteristic::ZERO_ZERO, z + tau, tau).unwrap();
        let b = jacobi_theta(HalfCharacteristic::ZERO_ZERO, z, tau).unwrap()
            * (Complex64::new(0.0, -PI) * tau - Complex64::new(0.0, 2.0 * PI) * z).exp();
        assert!((a - b).norm() < 1e-12 * b.norm());
    }

    #[test]
    fn from_values_rejects_other_characteristics() {
        assert_eq!(
            HalfCharacteristic::from_values(0.5, 0.0),
            Some(HalfCharacteristic::HALF_ZERO)
        );
        assert_eq!(HalfCharacteristic::from_values(0.25, 0.0), None);
    }
}
