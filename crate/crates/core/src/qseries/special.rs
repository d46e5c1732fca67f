use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    check_floor, nome, truncation_order, BiSeries, TruncatedSeries, DEFAULT_IM_TAU_FLOOR,
    POLE_TOLERANCE, TAU_2PI_I,
};
use crate::error::{Error, Result};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `η(τ) = q^{1/24} ∏_{n≥1} (1 − qⁿ)` as a series with denominator 24,
/// exact through `q^{1/24 + order}`.
pub fn dedekind_eta(order: u32) -> TruncatedSeries {
    let order = order.max(1) as i64;
    let mut prod = TruncatedSeries::one(1, order);
    for n in 1..=order {
        let f = TruncatedSeries::from_terms(1, order, [(0, re(1.0)), (n, re(-1.0))]);
        prod = &prod * &f;
    }
    prod.lift(24).shift(1)
}

/// Numeric η(τ) with the default `Im τ` floor.
pub fn eta_eval(tau: Complex64) -> Result<Complex64> {
    eta_eval_with_floor(tau, DEFAULT_IM_TAU_FLOOR)
}

pub fn eta_eval_with_floor(tau: Complex64, floor: f64) -> Result<Complex64> {
    check_floor(tau, floor)?;
    Ok(eta_unchecked(tau))
}

pub(crate) fn eta_unchecked(tau: Complex64) -> Complex64 {
    let q = nome(tau);
    let n_max = truncation_order(q.norm());
    let mut prod = (TAU_2PI_I * tau / 24.0).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 1..=n_max {
        qn *= q;
        prod *= Complex64::new(1.0, 0.0) - qn;
    }
    prod
}

/// Sum of divisors σ₁(n).
pub(crate) fn sigma1(n: u64) -> u64 {
    let mut s = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += d;
            if d * d != n {
                s += n / d;
            }
        }
        d += 1;
    }
    s
}

/// `G₂(τ) = (π²/3)(1 − 24 Σ σ₁(n) qⁿ)`, exact through `q^order`.
///
/// The constant term is `2ζ(2) = π²/3`, the one compatible with
/// `G₂(ατ) = (fτ+d)² G₂(τ) − 2πi f (fτ+d)`.
pub fn eisenstein_g2(order: u32) -> TruncatedSeries {
    let c = PI * PI / 3.0;
    let order = order as i64;
    TruncatedSeries::from_terms(
        1,
        order,
        std::iter::once((0, re(c)))
            .chain((1..=order).map(|n| (n, re(-24.0 * c * sigma1(n as u64) as f64)))),
    )
}

pub fn g2_eval(tau: Complex64) -> Result<Complex64> {
    g2_eval_with_floor(tau, DEFAULT_IM_TAU_FLOOR)
}

pub fn g2_eval_with_floor(tau: Complex64, floor: f64) -> Result<Complex64> {
    check_floor(tau, floor)?;
    Ok(g2_unchecked(tau))
}

pub(crate) fn g2_unchecked(tau: Complex64) -> Complex64 {
    // Lambert form: Σ σ₁(n) qⁿ = Σ n qⁿ / (1 − qⁿ)
    let q = nome(tau);
    let n_max = truncation_order(q.norm()) + 8;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=n_max {
        qn *= q;
        acc += qn * (n as f64) / (Complex64::new(1.0, 0.0) - qn);
    }
    re(PI * PI / 3.0) * (Complex64::new(1.0, 0.0) - acc * 24.0)
}

/// The coefficient window of
/// `P₂(x, q) = (2πi)² Σ_{n≥1} ( n xⁿ/(1−qⁿ) + n x⁻ⁿ qⁿ/(1−qⁿ) )`
/// for `|j| ≤ x_span` and `q`-powers through `q_order`. Every stored
/// coefficient is exact.
pub fn p2_series(x_span: u32, q_order: u32) -> BiSeries {
    let span = x_span as i64;
    let order = q_order as i64;
    let two_pi_i_sq = TAU_2PI_I * TAU_2PI_I;
    let mut s = BiSeries::zero(-span, span, 1, order);
    for n in 1..=span {
        // n xⁿ Σ_{i≥0} q^{ni}
        let mut m = 0;
        while m <= order {
            s.add_term(n, m, two_pi_i_sq * n as f64);
            m += n;
        }
        // n x⁻ⁿ Σ_{i≥1} q^{ni}
        let mut m = n;
        while m <= order {
            s.add_term(-n, m, two_pi_i_sq * n as f64);
            m += n;
        }
    }
    s
}

pub fn p2_eval(z: Complex64, tau: Complex64) -> Result<Complex64> {
    p2_eval_with_floor(z, tau, DEFAULT_IM_TAU_FLOOR)
}

/// Numeric `P₂(q_z, q)` on its annulus of convergence `|q| < |q_z| < |q|⁻¹`.
pub fn p2_eval_with_floor(z: Complex64, tau: Complex64, floor: f64) -> Result<Complex64> {
    check_floor(tau, floor)?;
    let x = (TAU_2PI_I * z).exp();
    let q = nome(tau);
    let (x_abs, q_abs) = (x.norm(), q.norm());
    if !(q_abs < x_abs && x_abs * q_abs < 1.0) {
        return Err(Error::OutOfAnnulus {
            qz_abs: x_abs,
            q_abs,
        });
    }
    let dist = (z - z.re.round()).norm();
    if dist < POLE_TOLERANCE {
        return Err(Error::PoleAtLatticePoint { distance: dist });
    }
    Ok(p2_unchecked(x, q))
}

/// Rearranged sum `x/(1−x)² + Σ_{m≥1} [ xqᵐ/(1−xqᵐ)² + x⁻¹qᵐ/(1−x⁻¹qᵐ)² ]`,
/// obtained by summing the geometric series in `P₂` along the other index.
fn p2_unchecked(x: Complex64, q: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let xi = x.inv();
    let ratio = q.norm() * x.norm().max(xi.norm());
    let m_max = truncation_order(ratio) + 4;
    let mut acc = x / ((one - x) * (one - x));
    let mut qm = one;
    for _ in 1..=m_max {
        qm *= q;
        let (u, w) = (x * qm, xi * qm);
        acc += u / ((one - u) * (one - u)) + w / ((one - w) * (one - w));
    }
    TAU_2PI_I * TAU_2PI_I * acc
}

pub fn weierstrass_p(z: Complex64, tau: Complex64) -> Result<Complex64> {
    weierstrass_p_with_floor(z, tau, DEFAULT_IM_TAU_FLOOR)
}

/// `℘(z, τ) = P₂(q_z, q) − G₂(τ)`, after reducing `z` into the period
/// parallelogram centred at the origin.
pub fn weierstrass_p_with_floor(z: Complex64, tau: Complex64, floor: f64) -> Result<Complex64> {
    check_floor(tau, floor)?;
    let n = (z.im / tau.im).round();
    let mut w = z - tau * n;
    w -= re(w.re.round());
    let dist = [-1.0, 0.0, 1.0]
        .iter()
        .flat_map(|&i| [-1.0, 0.0, 1.0].map(move |j| (i, j)))
        .map(|(i, j)| (w - tau * i - re(j)).norm())
        .fold(f64::INFINITY, f64::min);
    if dist < POLE_TOLERANCE {
        return Err(Error::PoleAtLatticePoint { distance: dist });
    }
    let x = (TAU_2PI_I * w).exp();
    Ok(p2_unchecked(x, nome(tau)) - g2_unchecked(tau))
}
