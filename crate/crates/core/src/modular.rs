//! `SL₂(ℤ)` acting on trace functions: the action on `τ` and on `(v, u)`,
//! S/T words, and least-squares fitting of the transition matrices in
//!
//! ```text
//! Z_{W_h}(v; u; ατ) = Σ_k A^h_{α,k} Z_{W_k}(dv + bu; fv + au; τ)
//! ```
//!
//! With `τ ↦ ατ` a left action, `φ(α)(v, u) = (dv + bu, fv + au)` satisfies
//! `φ(αβ) = φ(β)φ(α)`, which is what makes `A_{αβ} = A_α A_β` consistent.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{dual_coset_reps, CosetLabel, EvenLattice};
use crate::trace::{z_vector_with_floor, TracePoint};

/// Largest condition number of the normal equations accepted by the fit.
pub const MAX_CONDITION: f64 = 1e10;

/// `(a b; f d)` with `ad − bf = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    a: i64,
    b: i64,
    f: i64,
    d: i64,
}

impl UnimodularMatrix {
    pub const S: Self = Self { a: 0, b: -1, f: 1, d: 0 };
    pub const T: Self = Self { a: 1, b: 1, f: 0, d: 1 };
    pub const T_INV: Self = Self { a: 1, b: -1, f: 0, d: 1 };
    pub const IDENTITY: Self = Self { a: 1, b: 0, f: 0, d: 1 };

    pub fn new(a: i64, b: i64, f: i64, d: i64) -> Result<Self> {
        let det = a * d - b * f;
        if det != 1 {
            return Err(Error::NotUnimodular { det });
        }
        Ok(Self { a, b, f, d })
    }

    pub fn entries(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.f, self.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.f,
            b: self.a * o.b + self.b * o.d,
            f: self.f * o.a + self.d * o.f,
            d: self.f * o.b + self.d * o.d,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            f: -self.f,
            d: -self.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            f: -self.f,
            d: self.a,
        }
    }

    /// `(aτ + b)/(fτ + d)`.
    pub fn act_tau(&self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / (tau * self.f as f64 + self.d as f64)
    }
}

impl std::fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.f, self.d)
    }
}

fn combine(x: i64, v: &[Complex64], y: i64, u: &[Complex64]) -> Vec<Complex64> {
    v.iter().zip(u).map(|(p, q)| p * x as f64 + q * y as f64).collect()
}

/// `(v, u) ↦ (dv + bu, fv + au)`, the argument change under `τ ↦ ατ`.
pub fn act_pair(
    alpha: &UnimodularMatrix,
    v: &[Complex64],
    u: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let (a, b, f, d) = alpha.entries();
    (combine(d, v, b, u), combine(f, v, a, u))
}

/// `(v, u) ↦ (av + bu, fv + du)`. Agrees with [`act_pair`] when `a = d`
/// but is not compatible with composition in general.
pub fn act_pair_column(
    alpha: &UnimodularMatrix,
    v: &[Complex64],
    u: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let (a, b, f, d) = alpha.entries();
    (combine(a, v, b, u), combine(f, v, d, u))
}

/// Generator letters of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T,
    TInv,
}

impl Letter {
    pub fn matrix(&self) -> UnimodularMatrix {
        match self {
            Letter::S => UnimodularMatrix::S,
            Letter::T => UnimodularMatrix::T,
            Letter::TInv => UnimodularMatrix::T_INV,
        }
    }
}

/// `sign · (product of letters, left to right)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StWord {
    pub letters: Vec<Letter>,
    pub sign: i64,
}

impl StWord {
    pub fn product(&self) -> UnimodularMatrix {
        self.letters
            .iter()
            .fold(UnimodularMatrix::IDENTITY, |acc, l| acc.mul(&l.matrix()))
    }

    pub fn evaluate(&self) -> UnimodularMatrix {
        let p = self.product();
        if self.sign < 0 {
            p.neg()
        } else {
            p
        }
    }
}

fn push_t_power(letters: &mut Vec<Letter>, k: i64) {
    let l = if k >= 0 { Letter::T } else { Letter::TInv };
    letters.extend(std::iter::repeat_n(l, k.unsigned_abs() as usize));
}

/// Write `α = ± T^{q₁} S T^{q₂} S ⋯ T^{q_r}` by Euclid on the first column.
pub fn decompose_st(alpha: &UnimodularMatrix) -> StWord {
    let mut letters = Vec::new();
    let mut m = *alpha;
    while m.f != 0 {
        // m = T^q S m'' with m'' = (f, d; qf − a, qd − b)
        let q = m.a.div_euclid(m.f);
        push_t_power(&mut letters, q);
        letters.push(Letter::S);
        m = UnimodularMatrix {
            a: m.f,
            b: m.d,
            f: q * m.f - m.a,
            d: q * m.d - m.b,
        };
    }
    // m = s·(1, s·b; 0, 1) with s = a = d = ±1
    let s = m.a;
    push_t_power(&mut letters, s * m.b);
    StWord { letters, sign: s }
}

/// Uniformly random word of length `1..=max_len` in `{S, T}`.
pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> StWord {
    let len = rng.gen_range(1..=max_len);
    let letters = (0..len)
        .map(|_| if rng.gen_bool(0.5) { Letter::S } else { Letter::T })
        .collect();
    StWord { letters, sign: 1 }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random evaluation points for fitting `α`.
///
/// For `f = 0`, `τ = x + iy`; otherwise `τ = −d/f + (x + iy)/|f|`, so that
/// `fτ + d = ±(x + iy)` and both `Im τ ≥ 0.8/|f|` and `Im ατ ≥ 0.57/|f|`.
/// Here `x ∈ [−½, ½]`, `y ∈ [0.8, 1.6]`, and the coordinates of `a`, `b` have
/// real part in `[−0.4, 0.4]` and imaginary part in `[−0.1, 0.1]`.
pub fn sample_points(
    rng: &mut ChaCha8Rng,
    alpha: &UnimodularMatrix,
    rank: usize,
    count: usize,
) -> Vec<TracePoint> {
    let (_, _, f, d) = alpha.entries();
    (0..count)
        .map(|_| {
            let x = rng.gen_range(-0.5..=0.5);
            let y = rng.gen_range(0.8..=1.6);
            let tau = if f == 0 {
                Complex64::new(x, y)
            } else {
                Complex64::new(-(d as f64) / f as f64, 0.0) + Complex64::new(x, y) / f.abs() as f64
            };
            let mut coord = || Complex64::new(rng.gen_range(-0.4..=0.4), rng.gen_range(-0.1..=0.1));
            let a = (0..rank).map(|_| coord()).collect();
            let b = (0..rank).map(|_| coord()).collect();
            TracePoint::new(a, b, tau)
        })
        .collect()
}

/// Fitted `A_α`, rows and columns indexed by `dual_coset_reps`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub alpha: UnimodularMatrix,
    pub labels: Vec<CosetLabel>,
    pub entries: Vec<Vec<Complex64>>,
    /// Largest scaled residual over the fitting samples.
    pub fit_residual: f64,
    /// Condition number of the normal equations.
    pub condition: f64,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn as_matrix(&self) -> DMatrix<Complex64> {
        let m = self.size();
        DMatrix::from_fn(m, m, |i, j| self.entries[i][j])
    }

    fn from_matrix(
        alpha: UnimodularMatrix,
        labels: Vec<CosetLabel>,
        a: &DMatrix<Complex64>,
        fit_residual: f64,
        condition: f64,
    ) -> Self {
        let entries = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
            .collect();
        Self {
            alpha,
            labels,
            entries,
            fit_residual,
            condition,
        }
    }
}

/// Both sides of the transformation law at one point: `Z(v; u; ατ)` and
/// `Z(φ(α)(v, u); τ)`.
fn sides(
    lattice: &EvenLattice,
    alpha: &UnimodularMatrix,
    p: &TracePoint,
    floor: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let lhs = z_vector_with_floor(
        lattice,
        &TracePoint::new(p.a.clone(), p.b.clone(), alpha.act_tau(p.tau)),
        floor,
    )?;
    let (a2, b2) = act_pair(alpha, &p.a, &p.b);
    let rhs = z_vector_with_floor(lattice, &TracePoint::new(a2, b2, p.tau), floor)?;
    Ok((lhs, rhs))
}

/// `|LHS_h − Σ_k A_hk RHS_k|` relative to `max(1, max_h |LHS_h|)`.
fn scaled_residual(a: &DMatrix<Complex64>, lhs: &[Complex64], rhs: &[Complex64]) -> f64 {
    let scale = lhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    (0..lhs.len())
        .map(|h| {
            let pred: Complex64 = (0..rhs.len()).map(|k| a[(h, k)] * rhs[k]).sum();
            (lhs[h] - pred).norm() / scale
        })
        .fold(0.0, f64::max)
}

/// Least-squares `A` with `Z(v; u; ατ) ≈ A · Z(φ(α)(v, u); τ)` over `samples`.
pub fn fit_transition(
    lattice: &EvenLattice,
    alpha: &UnimodularMatrix,
    samples: &[TracePoint],
    floor: f64,
) -> Result<TransitionMatrix> {
    let labels = dual_coset_reps(lattice);
    let m = labels.len();
    if samples.len() < m {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot determine a {m}×{m} matrix",
            samples.len()
        )));
    }
    let evaluated: Vec<(Vec<Complex64>, Vec<Complex64>)> = samples
        .iter()
        .map(|p| sides(lattice, alpha, p, floor))
        .collect::<Result<_>>()?;
    // rows: samples; R Aᵀ = Y, each row scaled by the size of its values
    let n = samples.len();
    let mut r = DMatrix::<Complex64>::zeros(n, m);
    let mut y = DMatrix::<Complex64>::zeros(n, m);
    for (s, (lhs, rhs)) in evaluated.iter().enumerate() {
        let w = 1.0 / lhs.iter().chain(rhs).map(|z| z.norm()).fold(1.0, f64::max);
        for k in 0..m {
            r[(s, k)] = rhs[k] * w;
            y[(s, k)] = lhs[k] * w;
        }
    }
    let svd = SVD::new(r, true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let at = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let a = at.transpose();
    let fit_residual = evaluated
        .iter()
        .map(|(lhs, rhs)| scaled_residual(&a, lhs, rhs))
        .fold(0.0, f64::max);
    Ok(TransitionMatrix::from_matrix(*alpha, labels, &a, fit_residual, condition))
}

/// Holdout check of the transformation law with a fitted matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MainTheoremReport {
    pub alpha: UnimodularMatrix,
    pub points: usize,
    pub max_residual: f64,
}

pub fn verify_main_theorem(
    lattice: &EvenLattice,
    alpha: &UnimodularMatrix,
    holdout: &[TracePoint],
    a: &TransitionMatrix,
    floor: f64,
) -> Result<MainTheoremReport> {
    let am = a.as_matrix();
    let mut max_residual: f64 = 0.0;
    for p in holdout {
        let (lhs, rhs) = sides(lattice, alpha, p, floor)?;
        max_residual = max_residual.max(scaled_residual(&am, &lhs, &rhs));
    }
    Ok(MainTheoremReport {
        alpha: *alpha,
        points: holdout.len(),
        max_residual,
    })
}

/// `A_α A_β` against the independently fitted `A_{αβ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleReport {
    pub product: Vec<Vec<Complex64>>,
    pub max_difference: f64,
}

pub fn verify_cocycle(
    a_alpha: &TransitionMatrix,
    a_beta: &TransitionMatrix,
    a_alpha_beta: &TransitionMatrix,
) -> Result<CocycleReport> {
    if a_alpha.alpha.mul(&a_beta.alpha) != a_alpha_beta.alpha {
        return Err(Error::InvalidArgument(format!(
            "{} · {} is not {}",
            a_alpha.alpha, a_beta.alpha, a_alpha_beta.alpha
        )));
    }
    let prod = a_alpha.as_matrix() * a_beta.as_matrix();
    let direct = a_alpha_beta.as_matrix();
    let max_difference = (&prod - &direct).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let m = prod.nrows();
    Ok(CocycleReport {
        product: (0..m).map(|i| (0..m).map(|j| prod[(i, j)]).collect()).collect(),
        max_difference,
    })
}

/// Fit `A_α` on `fit_count` seeded samples and check it on `holdout_count`
/// further samples from the same stream.
pub fn fit_and_verify(
    lattice: &EvenLattice,
    alpha: &UnimodularMatrix,
    rng: &mut ChaCha8Rng,
    fit_count: usize,
    holdout_count: usize,
    floor: f64,
) -> Result<(TransitionMatrix, MainTheoremReport)> {
    let samples = sample_points(rng, alpha, lattice.rank(), fit_count);
    let a = fit_transition(lattice, alpha, &samples, floor)?;
    let holdout = sample_points(rng, alpha, lattice.rank(), holdout_count);
    let report = verify_main_theorem(lattice, alpha, &holdout, &a, floor)?;
    Ok((a, report))
}

/// `e^{2πi x}`.
pub fn unit_phase(x: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * x).exp()
}

/// Largest entrywise gap between two square matrices of equal size.
pub fn max_entry_difference(x: &[Vec<Complex64>], y: &[Vec<Complex64>]) -> f64 {
    x.iter()
        .zip(y)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tau_action_examples() {
        let i = c(0.0, 1.0);
        assert!((UnimodularMatrix::S.act_tau(i) - i).norm() < 1e-15);
        assert_eq!(UnimodularMatrix::T.act_tau(c(0.3, 0.7)), c(1.3, 0.7));
        let ts = UnimodularMatrix::T.mul(&UnimodularMatrix::S);
        assert!((ts.act_tau(c(0.0, 2.0)) - c(1.0, 0.5)).norm() < 1e-15);
        assert!(matches!(
            UnimodularMatrix::new(1, 1, 1, 1),
            Err(Error::NotUnimodular { det: 0 })
        ));
    }

    #[test]
    fn pair_action_on_generators() {
        let v = [c(1.0, 0.5)];
        let u = [c(-0.3, 0.2)];
        assert_eq!(act_pair(&UnimodularMatrix::S, &v, &u), (vec![-u[0]], vec![v[0]]));
        assert_eq!(act_pair(&UnimodularMatrix::T, &v, &u), (vec![v[0] + u[0]], vec![u[0]]));
        assert_eq!(act_pair(&UnimodularMatrix::IDENTITY, &v, &u), (v.to_vec(), u.to_vec()));
        assert_eq!(
            act_pair(&UnimodularMatrix::S, &v, &u),
            act_pair_column(&UnimodularMatrix::S, &v, &u)
        );
    }

    #[test]
    fn pair_action_reverses_composition() {
        let v = [c(0.4, 0.1)];
        let u = [c(-0.2, 0.3)];
        let x = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        let y = UnimodularMatrix::new(1, 0, 3, 1).unwrap();
        let (v1, u1) = act_pair(&x, &v, &u);
        let (v2, u2) = act_pair(&y, &v1, &u1);
        let direct = act_pair(&x.mul(&y), &v, &u);
        assert!((v2[0] - direct.0[0]).norm() < 1e-15 && (u2[0] - direct.1[0]).norm() < 1e-15);
    }

    #[test]
    fn st_decomposition_reproduces_matrix() {
        assert_eq!(decompose_st(&UnimodularMatrix::T).letters, vec![Letter::T]);
        let s = decompose_st(&UnimodularMatrix::S);
        assert_eq!(s.evaluate(), UnimodularMatrix::S);
        let m = UnimodularMatrix::new(1, 0, 1, 1).unwrap();
        assert_eq!(decompose_st(&m).evaluate(), m);
        for (a, b, f, d) in [(2, 1, 1, 1), (5, 3, 3, 2), (-1, 0, 0, -1), (3, -2, -4, 3), (0, 1, -1, 0)] {
            let m = UnimodularMatrix::new(a, b, f, d).unwrap();
            assert_eq!(decompose_st(&m).evaluate(), m);
        }
    }

    #[test]
    fn identity_and_t_fits() {
        let l = validate(vec![vec![4]]).unwrap();
        let mut rng = seeded_rng(1);
        let (a, rep) = fit_and_verify(&l, &UnimodularMatrix::IDENTITY, &mut rng, 8, 5, 0.25).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((a.entries[i][j] - e).norm() < 1e-10);
            }
        }
        assert!(rep.max_residual < 1e-12);

        let (a, rep) = fit_and_verify(&l, &UnimodularMatrix::T, &mut rng, 8, 5, 0.25).unwrap();
        let expect = [0.0, 1.0 / 8.0, 0.5, 1.0 / 8.0];
        for h in 0..4 {
            assert!((a.entries[h][h] - unit_phase(expect[h] - 1.0 / 24.0)).norm() < 1e-10);
        }
        assert!(rep.max_residual < 1e-10);
    }

    #[test]
    fn column_convention_fails_off_generators() {
        let l = validate(vec![vec![4]]).unwrap();
        let alpha = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        let mut rng = seeded_rng(7);
        let samples = sample_points(&mut rng, &alpha, 1, 12);
        let mut worst: f64 = 0.0;
        let fitted = fit_transition(&l, &alpha, &samples, 0.1).unwrap();
        assert!(fitted.fit_residual < 1e-9);
        for p in &samples {
            let lhs = crate::trace::z_vector_with_floor(
                &l,
                &TracePoint::new(p.a.clone(), p.b.clone(), alpha.act_tau(p.tau)),
                0.1,
            )
            .unwrap();
            let (a2, b2) = act_pair_column(&alpha, &p.a, &p.b);
            let rhs = crate::trace::z_vector_with_floor(&l, &TracePoint::new(a2, b2, p.tau), 0.1).unwrap();
            worst = worst.max(scaled_residual(&fitted.as_matrix(), &lhs, &rhs));
        }
        assert!(worst > 1e-3, "column convention unexpectedly consistent: {worst}");
    }

    #[test]
    fn ill_conditioned_fit_is_rejected() {
        let l = validate(vec![vec![4]]).unwrap();
        let p = TracePoint::new(vec![c(0.1, 0.0)], vec![c(0.0, 0.0)], c(0.0, 1.0));
        let samples = vec![p; 8];
        assert!(matches!(
            fit_transition(&l, &UnimodularMatrix::S, &samples, 0.25),
            Err(Error::IllConditioned { .. })
        ));
    }
}
