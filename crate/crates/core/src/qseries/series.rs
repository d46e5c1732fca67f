//! Truncated Laurent series in a fractional power of `q`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};

use super::TAU_2PI_I;

/// A Laurent series `Σ c_k q^{k/D}` known exactly for all `k ≤ guaranteed_order`.
///
/// Coefficients past `guaranteed_order` are never stored. An empty coefficient
/// map means the series is `O(q^{(guaranteed_order+1)/D})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    denom: u32,
    coeffs: BTreeMap<i64, Complex64>,
    guaranteed_order: i64,
}

impl TruncatedSeries {
    /// The zero series, exact through exponent `guaranteed_order / denom`.
    pub fn zero(denom: u32, guaranteed_order: i64) -> Self {
        assert!(denom > 0, "series denominator must be positive");
        Self {
            denom,
            coeffs: BTreeMap::new(),
            guaranteed_order,
        }
    }

    /// Build from `(k, c)` pairs meaning `c q^{k/denom}`; repeated keys add.
    pub fn from_terms<I>(denom: u32, guaranteed_order: i64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut s = Self::zero(denom, guaranteed_order);
        for (k, c) in terms {
            s.add_term(k, c);
        }
        s
    }

    /// `c q^{k/denom}`, exact through `guaranteed_order`.
    pub fn monomial(denom: u32, k: i64, c: Complex64, guaranteed_order: i64) -> Self {
        Self::from_terms(denom, guaranteed_order, [(k, c)])
    }

    /// The constant 1 exact through `guaranteed_order`.
    pub fn one(denom: u32, guaranteed_order: i64) -> Self {
        Self::monomial(denom, 0, Complex64::new(1.0, 0.0), guaranteed_order)
    }

    fn add_term(&mut self, k: i64, c: Complex64) {
        if k > self.guaranteed_order || c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(Complex64::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn guaranteed_order(&self) -> i64 {
        self.guaranteed_order
    }

    /// Smallest stored exponent numerator, if any.
    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Largest stored exponent numerator, if any.
    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Coefficient of `q^{k/denom}`. Returns `None` past the trusted order.
    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        if k > self.guaranteed_order {
            None
        } else {
            Some(self.coeffs.get(&k).copied().unwrap_or_else(Complex64::zero))
        }
    }

    /// Coefficient of `q^{num/den}` for an arbitrary rational exponent.
    pub fn coeff_at(&self, num: i64, den: i64) -> Option<Complex64> {
        assert!(den > 0);
        let d = self.denom as i64;
        // num/den = k/d  <=>  k = num*d/den
        if (num * d) % den != 0 {
            let k_floor = Integer::div_floor(&(num * d), &den);
            return if k_floor >= self.guaranteed_order {
                None
            } else {
                Some(Complex64::zero())
            };
        }
        self.coeff(num * d / den)
    }

    /// Stored `(k, c)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    /// Valuation used for order propagation; an empty series behaves like
    /// its error term.
    fn valuation(&self) -> i64 {
        self.min_exp().unwrap_or(self.guaranteed_order + 1)
    }

    /// Re-express with denominator `denom`, which must be a multiple of the
    /// current one.
    pub fn lift(&self, denom: u32) -> Self {
        assert!(denom % self.denom == 0, "lift target must be a multiple");
        let f = (denom / self.denom) as i64;
        Self {
            denom,
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k * f, c)).collect(),
            // the next untrusted exponent is (order+1)/D, i.e. (order+1)*f in new units
            guaranteed_order: (self.guaranteed_order + 1) * f - 1,
        }
    }

    fn unify(a: &Self, b: &Self) -> (Self, Self) {
        let l = a.denom.lcm(&b.denom);
        (a.lift(l), b.lift(l))
    }

    /// Drop everything past `order` (which may only lower the trusted order).
    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.guaranteed_order);
        Self {
            denom: self.denom,
            coeffs: self.coeffs.range(..=order).map(|(&k, &c)| (k, c)).collect(),
            guaranteed_order: order,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(
            self.denom,
            self.guaranteed_order,
            self.coeffs.iter().map(|(&k, &v)| (k, v * c)),
        )
    }

    /// Multiply by `q^{k/denom}`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&e, &c)| (e + k, c)).collect(),
            guaranteed_order: self.guaranteed_order + k,
        }
    }

    /// Multiplicative inverse via the recursive division recurrence.
    pub fn recip(&self) -> Result<Self> {
        let v = self.min_exp().ok_or_else(|| {
            Error::InvalidArgument("cannot invert a series with no known terms".into())
        })?;
        let lead = self.coeffs[&v];
        let rel = self.guaranteed_order - v;
        let inv_lead = lead.inv();
        let mut b: Vec<Complex64> = Vec::with_capacity(rel as usize + 1);
        b.push(inv_lead);
        for n in 1..=rel {
            let mut acc = Complex64::zero();
            for (&k, &c) in self.coeffs.range(v + 1..=v + n) {
                acc += c * b[(n - (k - v)) as usize];
            }
            b.push(-acc * inv_lead);
        }
        Ok(Self::from_terms(
            self.denom,
            rel - v,
            b.into_iter().enumerate().map(|(i, c)| (i as i64 - v, c)),
        ))
    }

    /// Non-negative integer power.
    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            let rel = self.guaranteed_order - self.valuation();
            return Self::one(self.denom, rel.max(0));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at `q = e^{2πiτ}` using `q^{k/D} = e^{2πiτk/D}`.
    pub fn eval_tau(&self, tau: Complex64) -> Result<Complex64> {
        if tau.im <= 0.0 {
            return Err(Error::ImTooSmall {
                im: tau.im,
                floor: 0.0,
            });
        }
        let d = self.denom as f64;
        Ok(self
            .coeffs
            .iter()
            .map(|(&k, &c)| c * (TAU_2PI_I * tau * (k as f64 / d)).exp())
            .sum())
    }

    /// Largest coefficient difference over the window both series trust.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let (a, b) = Self::unify(self, other);
        let order = a.guaranteed_order.min(b.guaranteed_order);
        let keys = a.coeffs.range(..=order).chain(b.coeffs.range(..=order));
        keys.map(|(&k, _)| {
            (a.coeff(k).unwrap_or_default() - b.coeff(k).unwrap_or_default()).norm()
        })
        .fold(0.0, f64::max)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: Self) -> TruncatedSeries {
        let (a, b) = TruncatedSeries::unify(self, rhs);
        let order = a.guaranteed_order.min(b.guaranteed_order);
        TruncatedSeries::from_terms(a.denom, order, a.terms().chain(b.terms()))
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: Self) -> TruncatedSeries {
        self + &(-rhs)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: Self) -> TruncatedSeries {
        let (a, b) = TruncatedSeries::unify(self, rhs);
        let order = (a.valuation().saturating_add(b.guaranteed_order))
            .min(b.valuation().saturating_add(a.guaranteed_order));
        let mut out = TruncatedSeries::zero(a.denom, order);
        for (&ka, &ca) in &a.coeffs {
            for (&kb, &cb) in b.coeffs.range(..=order - ka) {
                out.add_term(ka + kb, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)q^({}/{})", c.re, c.im, k, self.denom)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^({}/{}))", self.guaranteed_order + 1, self.denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn difference_of_squares() {
        let a = TruncatedSeries::from_terms(1, 10, [(0, c(1.0)), (1, c(1.0))]);
        let b = TruncatedSeries::from_terms(1, 10, [(0, c(1.0)), (1, c(-1.0))]);
        let p = &a * &b;
        assert_eq!(p.coeff(0), Some(c(1.0)));
        assert_eq!(p.coeff(1), Some(c(0.0)));
        assert_eq!(p.coeff(2), Some(c(-1.0)));
        assert_eq!(p.terms().count(), 2);
    }

    #[test]
    fn fractional_exponents_add() {
        let a = TruncatedSeries::monomial(24, 1, c(1.0), 100);
        let p = &a * &a;
        assert_eq!(p.coeff_at(1, 12), Some(c(1.0)));
        assert_eq!(p.min_exp(), Some(2));
    }

    #[test]
    fn mixed_denominators_lift_to_lcm() {
        let a = TruncatedSeries::monomial(8, 1, c(2.0), 16);
        let b = TruncatedSeries::monomial(24, 1, c(3.0), 48);
        let p = &a * &b;
        assert_eq!(p.denom(), 24);
        // q^{1/8} q^{1/24} = q^{4/24}
        assert_eq!(p.coeff(4), Some(c(6.0)));
    }

    #[test]
    fn order_propagates_through_product() {
        // (q + O(q^6)) * (1 + O(q^4))  ->  exact through q^4
        let a = TruncatedSeries::monomial(1, 1, c(1.0), 5);
        let b = TruncatedSeries::one(1, 3);
        assert_eq!((&a * &b).guaranteed_order(), 4);
    }

    #[test]
    fn recip_of_euler_product() {
        // oracle: naive long division of 1 by prod(1 - q^n)
        let order = 10;
        let mut prod = TruncatedSeries::one(1, order);
        for n in 1..=order {
            let f = TruncatedSeries::from_terms(1, order, [(0, c(1.0)), (n, c(-1.0))]);
            prod = &prod * &f;
        }
        let inv = prod.recip().unwrap();
        let one = &prod * &inv;
        assert_eq!(one.guaranteed_order(), order);
        assert!((one.coeff(0).unwrap() - c(1.0)).norm() < 1e-12);
        for k in 1..=order {
            assert!(one.coeff(k).unwrap().norm() < 1e-12, "k={k}");
        }
        // partition numbers 1,1,2,3,5,7,11,15,22,30,42
        let p = [1., 1., 2., 3., 5., 7., 11., 15., 22., 30., 42.];
        for (k, &pk) in p.iter().enumerate() {
            assert_eq!(inv.coeff(k as i64).unwrap(), c(pk));
        }
    }

    #[test]
    fn recip_handles_leading_shift() {
        let a = TruncatedSeries::from_terms(24, 48, [(1, c(2.0)), (25, c(1.0))]);
        let inv = a.recip().unwrap();
        assert_eq!(inv.min_exp(), Some(-1));
        assert_eq!(inv.coeff(-1), Some(c(0.5)));
        let one = &a * &inv;
        assert!((one.coeff(0).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(one.coeff(24).unwrap().norm() < 1e-15);
    }

    #[test]
    fn eval_rejects_lower_half_plane() {
        let a = TruncatedSeries::one(1, 3);
        assert!(a.eval_tau(Complex64::new(0.0, -1.0)).is_err());
    }
}
