//! Two-variable truncated series: Laurent in `x = q_z`, power series in `q^{1/D}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use super::{TruncatedSeries, TAU_2PI_I};

/// `Σ c_{j,k} x^j q^{k/D}` with `x_min ≤ j ≤ x_max`, trusted for `k ≤ q_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSeries {
    x_min: i64,
    x_max: i64,
    q_denom: u32,
    q_order: i64,
    coeffs: BTreeMap<(i64, i64), Complex64>,
}

impl BiSeries {
    pub fn zero(x_min: i64, x_max: i64, q_denom: u32, q_order: i64) -> Self {
        assert!(x_min <= x_max && q_denom > 0);
        Self {
            x_min,
            x_max,
            q_denom,
            q_order,
            coeffs: BTreeMap::new(),
        }
    }

    /// Add `c x^j q^{k/D}`; terms outside the window are discarded.
    pub fn add_term(&mut self, j: i64, k: i64, c: Complex64) {
        if j < self.x_min || j > self.x_max || k > self.q_order || c.is_zero() {
            return;
        }
        let e = self.coeffs.entry((j, k)).or_insert_with(Complex64::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&(j, k));
        }
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.x_max
    }

    pub fn q_denom(&self) -> u32 {
        self.q_denom
    }

    pub fn q_order(&self) -> i64 {
        self.q_order
    }

    /// Coefficient of `x^j q^{k/D}`, `None` outside the trusted window.
    pub fn coeff(&self, j: i64, k: i64) -> Option<Complex64> {
        if j < self.x_min || j > self.x_max || k > self.q_order {
            None
        } else {
            Some(self.coeffs.get(&(j, k)).copied().unwrap_or_else(Complex64::zero))
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.coeffs.iter().map(|(&jk, &c)| (jk, c))
    }

    /// The `x^j` slice as a one-variable series.
    pub fn x_slice(&self, j: i64) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            self.q_denom,
            self.q_order,
            self.coeffs
                .range((j, i64::MIN)..=(j, i64::MAX))
                .map(|(&(_, k), &c)| (k, c)),
        )
    }

    pub fn lift(&self, q_denom: u32) -> Self {
        assert!(q_denom % self.q_denom == 0);
        let f = (q_denom / self.q_denom) as i64;
        Self {
            x_min: self.x_min,
            x_max: self.x_max,
            q_denom,
            q_order: (self.q_order + 1) * f - 1,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(j, k), &c)| ((j, k * f), c))
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.x_min, self.x_max, self.q_denom, self.q_order);
        for (&(j, k), &v) in &self.coeffs {
            out.add_term(j, k, v * c);
        }
        out
    }

    /// Sum over the intersection of both windows.
    pub fn add(&self, other: &Self) -> Self {
        let l = self.q_denom.lcm(&other.q_denom);
        let (a, b) = (self.lift(l), other.lift(l));
        let mut out = Self::zero(
            a.x_min.max(b.x_min),
            a.x_max.min(b.x_max),
            l,
            a.q_order.min(b.q_order),
        );
        for (&(j, k), &c) in a.coeffs.iter().chain(b.coeffs.iter()) {
            out.add_term(j, k, c);
        }
        out
    }

    /// Product with a series in `q` alone.
    pub fn mul_q_series(&self, s: &TruncatedSeries) -> Self {
        let l = self.q_denom.lcm(&s.denom());
        let a = self.lift(l);
        let s = s.lift(l);
        let s_val = s.min_exp().unwrap_or(s.guaranteed_order() + 1);
        // worst case over the x-slices: the slice valuation is at least the
        // smallest q-exponent present anywhere.
        let a_val = a
            .coeffs
            .keys()
            .map(|&(_, k)| k)
            .min()
            .unwrap_or(a.q_order + 1);
        let order = (a_val + s.guaranteed_order()).min(s_val + a.q_order);
        let mut out = Self::zero(a.x_min, a.x_max, l, order);
        for (&(j, k), &c) in &a.coeffs {
            for (ks, cs) in s.terms() {
                out.add_term(j, k + ks, c * cs);
            }
        }
        out
    }

    /// Evaluate at `x = q_z` and `q = e^{2πiτ}`.
    pub fn eval(&self, qz: Complex64, tau: Complex64) -> Complex64 {
        let d = self.q_denom as f64;
        self.coeffs
            .iter()
            .map(|(&(j, k), &c)| c * qz.powi(j as i32) * (TAU_2PI_I * tau * (k as f64 / d)).exp())
            .sum()
    }

    /// Largest coefficient gap over the common trusted window, after
    /// aligning q-denominators.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let l = self.q_denom.lcm(&other.q_denom);
        let (a, b) = (self.lift(l), other.lift(l));
        let (x_lo, x_hi) = (a.x_min.max(b.x_min), a.x_max.min(b.x_max));
        let order = a.q_order.min(b.q_order);
        a.coeffs
            .keys()
            .chain(b.coeffs.keys())
            .filter(|&&(j, k)| j >= x_lo && j <= x_hi && k <= order)
            .map(|&(j, k)| {
                (a.coeff(j, k).unwrap_or_default() - b.coeff(j, k).unwrap_or_default()).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_discards_out_of_range_terms() {
        let mut s = BiSeries::zero(-2, 2, 1, 5);
        s.add_term(3, 0, Complex64::new(1.0, 0.0));
        s.add_term(0, 6, Complex64::new(1.0, 0.0));
        s.add_term(1, 1, Complex64::new(2.0, 0.0));
        assert_eq!(s.terms().count(), 1);
        assert_eq!(s.coeff(3, 0), None);
        assert_eq!(s.coeff(1, 1), Some(Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn q_series_product_and_slice() {
        let mut s = BiSeries::zero(-1, 1, 1, 4);
        s.add_term(1, 0, Complex64::new(1.0, 0.0));
        s.add_term(-1, 1, Complex64::new(1.0, 0.0));
        let g = TruncatedSeries::from_terms(
            1,
            4,
            [(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(1.0, 0.0))],
        );
        let p = s.mul_q_series(&g);
        assert_eq!(p.q_order(), 4);
        assert_eq!(p.coeff(1, 1), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(p.coeff(-1, 2), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(p.x_slice(-1).coeff(1), Some(Complex64::new(1.0, 0.0)));
    }
}
