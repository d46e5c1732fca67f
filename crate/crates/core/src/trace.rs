//! Trace functions `Z_W(v; u; τ)` of lattice-VOA modules in closed form.
//!
//! For `W = V_{L+β}`, `v = a(−1)𝟙` and `u = b(−1)𝟙` the trace
//! `tr_W e^{2πi(v(0) − ⟨v,u⟩/2)} q^{u(0) − ⟨u,u⟩/2 + L(0) − c/24}` factors into
//! the oscillator part `η(τ)^{−d}` and a shifted lattice sum:
//!
//! ```text
//! Z_W = η(τ)^{−d} Σ_{m ∈ L+β} e^{2πi(⟨a,m⟩ − ⟨v,u⟩/2)} q^{⟨b,m⟩ − ⟨u,u⟩/2 + ⟨m,m⟩/2}
//! ```
//!
//! with `⟨v,u⟩ = STATE_PAIRING_SIGN · ⟨a,b⟩`. With the sign equal to `−1`
//! this is `η^{−d} Σ e^{2πi⟨a, m + b/2⟩} q^{⟨m+b, m+b⟩/2}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{dual_coset_reps, enumerate_vectors, CosetLabel, EvenLattice};
use crate::qseries::{eta_eval_with_floor, DEFAULT_IM_TAU_FLOOR, TAU_2PI_I};

/// Relation between the invariant form on `V₁` used in the trace definition
/// and the lattice form: `⟨a(−1)𝟙, b(−1)𝟙⟩ = STATE_PAIRING_SIGN · ⟨a, b⟩`.
pub const STATE_PAIRING_SIGN: f64 = -1.0;

/// Terms smaller than this fraction of the largest term are dropped.
const RELATIVE_TAIL: f64 = 1e-18;

/// Cap on lattice points visited by one trace evaluation.
const TRACE_POINT_CAP: u128 = 2_000_000;

/// Evaluation point: `v = a(−1)𝟙`, `u = b(−1)𝟙` in lattice-basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub tau: Complex64,
}

impl TracePoint {
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>, tau: Complex64) -> Self {
        Self { a, b, tau }
    }

    /// `a = b = 0`: the point at which `Z_W` is the character.
    pub fn character(rank: usize, tau: Complex64) -> Self {
        Self::new(vec![Complex64::zero(); rank], vec![Complex64::zero(); rank], tau)
    }
}

/// An irreducible module `V_{L+β}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleRef {
    lattice: EvenLattice,
    coset: CosetLabel,
}

impl ModuleRef {
    pub fn new(lattice: EvenLattice, coset: CosetLabel) -> Result<Self> {
        let coset = CosetLabel::new(&lattice, coset.beta().to_vec())?;
        Ok(Self { lattice, coset })
    }

    /// All modules of `lattice`, in `dual_coset_reps` order.
    pub fn all(lattice: &EvenLattice) -> Vec<Self> {
        dual_coset_reps(lattice)
            .into_iter()
            .map(|coset| Self {
                lattice: lattice.clone(),
                coset,
            })
            .collect()
    }

    pub fn lattice(&self) -> &EvenLattice {
        &self.lattice
    }

    pub fn coset(&self) -> &CosetLabel {
        &self.coset
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }
}

/// `⟨a(−1)𝟙, b(−1)𝟙⟩` in the normalization of the trace definition.
pub fn state_pairing(lattice: &EvenLattice, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    lattice.pair(a, b) * STATE_PAIRING_SIGN
}

fn check_point(w: &ModuleRef, p: &TracePoint) -> Result<()> {
    let d = w.rank();
    for len in [p.a.len(), p.b.len()] {
        if len != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: len,
            });
        }
    }
    Ok(())
}

/// `Σ_{m∈L+β} e^{2πi(⟨a,m⟩ − ⟨v,u⟩/2)} q^{⟨b,m⟩ − ⟨u,u⟩/2 + ⟨m,m⟩/2}`.
fn lattice_sum(w: &ModuleRef, p: &TracePoint) -> Result<Complex64> {
    check_point(w, p)?;
    let l = &w.lattice;
    let d = l.rank();
    let (a, b, tau) = (&p.a, &p.b, p.tau);
    let t2 = tau.im;
    let beta = w.coset.beta_f64();

    // log|term| = −π t₂ ⟨m − c, m − c⟩ + const with c = −(Im a + Im(τ b)) / t₂
    let centre: Vec<f64> = (0..d)
        .map(|i| -(a[i].im + (tau * b[i]).im) / t2 - beta[i])
        .collect();
    let covering: f64 = l.gram().iter().flatten().map(|&g| g.unsigned_abs() as f64).sum::<f64>() / 4.0;
    let radius_sq = covering + (-RELATIVE_TAIL.ln() + 4.0) / (PI * t2);

    let vu = state_pairing(l, a, b);
    let uu = state_pairing(l, b, b);
    let mut exps: Vec<Complex64> = Vec::new();
    let mut m = vec![Complex64::zero(); d];
    l.for_each_in_ellipsoid(&centre, radius_sq, TRACE_POINT_CAP, |y| {
        for i in 0..d {
            m[i] = Complex64::new(y[i] as f64 + beta[i], 0.0);
        }
        let phase = l.pair(a, &m) - vu * 0.5;
        let power = l.pair(b, &m) - uu * 0.5 + l.pair(&m, &m) * 0.5;
        exps.push(TAU_2PI_I * (phase + tau * power));
    })
    .map_err(|e| match e {
        Error::BoundTooLarge { visits, cap } => Error::TailBoundViolated(format!(
            "summation window needs {visits} points (cap {cap})"
        )),
        other => other,
    })?;
    let peak = exps.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() || peak > 700.0 {
        return Err(Error::TailBoundViolated(format!(
            "largest term has log-magnitude {peak}"
        )));
    }
    Ok(exps.iter().map(|e| e.exp()).sum())
}

pub fn z_trace(w: &ModuleRef, p: &TracePoint) -> Result<Complex64> {
    z_trace_with_floor(w, p, DEFAULT_IM_TAU_FLOOR)
}

/// `Z_W(v; u; τ)` in closed form.
pub fn z_trace_with_floor(w: &ModuleRef, p: &TracePoint, floor: f64) -> Result<Complex64> {
    let eta = eta_eval_with_floor(p.tau, floor)?;
    Ok(lattice_sum(w, p)? / eta.powi(w.rank() as i32))
}

pub fn theta_w(w: &ModuleRef, a: &[Complex64], tau: Complex64) -> Result<Complex64> {
    theta_w_with_floor(w, a, tau, DEFAULT_IM_TAU_FLOOR)
}

/// `θ_W(v, τ) = Z_W(v; 0; τ) η(τ)^d`, the bare lattice sum.
pub fn theta_w_with_floor(
    w: &ModuleRef,
    a: &[Complex64],
    tau: Complex64,
    floor: f64,
) -> Result<Complex64> {
    crate::qseries::check_floor(tau, floor)?;
    lattice_sum(
        w,
        &TracePoint::new(a.to_vec(), vec![Complex64::zero(); a.len()], tau),
    )
}

pub fn z_vector(lattice: &EvenLattice, p: &TracePoint) -> Result<Vec<Complex64>> {
    z_vector_with_floor(lattice, p, DEFAULT_IM_TAU_FLOOR)
}

/// `(Z_{W_h}(v; u; τ))_h` over `dual_coset_reps(lattice)`.
pub fn z_vector_with_floor(
    lattice: &EvenLattice,
    p: &TracePoint,
    floor: f64,
) -> Result<Vec<Complex64>> {
    let eta = eta_eval_with_floor(p.tau, floor)?.powi(lattice.rank() as i32);
    ModuleRef::all(lattice)
        .iter()
        .map(|w| Ok(lattice_sum(w, p)? / eta))
        .collect()
}

/// The diagonal phase `e^{2πi(⟨β,β⟩/2 − d/24)}` relating `Z_W(v; u; τ+1)` to
/// `Z_W(v+u; u; τ)`.
pub fn predicted_t_phase(w: &ModuleRef) -> Complex64 {
    let half = w.coset.half_norm(&w.lattice);
    let frac = &half - half.floor();
    let e = frac.to_f64().unwrap() - w.rank() as f64 / 24.0;
    (TAU_2PI_I * e).exp()
}

/// Returns the predicted T-phase after checking
/// `Z_W(a, b, τ+1) = phase · Z_W(a+b, b, τ)` at `p` to relative `tol`.
pub fn t_phase(w: &ModuleRef, p: &TracePoint, tol: f64) -> Result<Complex64> {
    let phase = predicted_t_phase(w);
    let shifted = TracePoint::new(p.a.clone(), p.b.clone(), p.tau + 1.0);
    let lhs = z_trace(w, &shifted)?;
    let a_plus_b: Vec<Complex64> = p.a.iter().zip(&p.b).map(|(x, y)| x + y).collect();
    let rhs = z_trace(w, &TracePoint::new(a_plus_b, p.b.clone(), p.tau))?;
    let error = (lhs - phase * rhs).norm() / lhs.norm().max(1.0);
    if error > tol {
        return Err(Error::PredictionMismatch { error });
    }
    Ok(phase)
}

/// A finite formal sum `Σ n_r e^{2πi r}` over phases `r ∈ ℚ/ℤ`, kept exactly.
pub type PhaseSum = BTreeMap<BigRational, BigInt>;

/// Per-grade content of `tr_W e^{2πi a(0)} q^{L(0)}` for rational `a`:
/// grade `g` maps to the exact phase sum of all states of that grade.
pub type GradedPhases = BTreeMap<BigRational, PhaseSum>;

pub(crate) fn reduce_mod_one(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Coefficients of `∏_{n≥1} (1 − qⁿ)^{−d}` through `q^{max_grade}`: the
/// number of oscillator states of each grade.
pub fn oscillator_counts(d: usize, max_grade: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); max_grade + 1];
    c[0] = BigInt::from(1);
    for _ in 0..d {
        for n in 1..=max_grade {
            for k in n..=max_grade {
                let prev = c[k - n].clone();
                c[k] += prev;
            }
        }
    }
    c
}

/// Closed-form phase-graded character through `grade_cutoff` (inclusive):
/// lattice points `m` with phases `⟨a, m⟩ mod 1`, times oscillator counts.
/// The global `q^{−c/24}` is not included.
pub fn phase_graded_character(
    w: &ModuleRef,
    a: &[BigRational],
    grade_cutoff: &BigRational,
) -> Result<GradedPhases> {
    if a.len() != w.rank() {
        return Err(Error::DimensionMismatch {
            expected: w.rank(),
            got: a.len(),
        });
    }
    let vectors = enumerate_vectors(&w.lattice, &w.coset, grade_cutoff)?;
    let max_osc = grade_cutoff.floor().to_integer().to_usize().unwrap_or(0);
    let osc = oscillator_counts(w.rank(), max_osc);
    let mut out = GradedPhases::new();
    for m in &vectors {
        let phase = reduce_mod_one(&w.lattice.pair_exact(a, &m.coords));
        let base = m.half_norm();
        for (n, count) in osc.iter().enumerate() {
            let g = &base + BigRational::from_integer(BigInt::from(n));
            if &g > grade_cutoff {
                break;
            }
            *out.entry(g).or_default().entry(phase.clone()).or_default() += count;
        }
    }
    for sums in out.values_mut() {
        sums.retain(|_, c| !c.is_zero());
    }
    Ok(out)
}

/// Numerical value of `Σ_g Σ_r n_r e^{2πi r} q^{g − d/24}`.
pub fn eval_graded_phases(g: &GradedPhases, rank: usize, tau: Complex64) -> Complex64 {
    let shift = rank as f64 / 24.0;
    g.iter()
        .map(|(grade, sums)| {
            let s: Complex64 = sums
                .iter()
                .map(|(r, n)| (TAU_2PI_I * r.to_f64().unwrap()).exp() * n.to_f64().unwrap())
                .sum();
            s * (TAU_2PI_I * tau * (grade.to_f64().unwrap() - shift)).exp()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate;
    use crate::qseries::{eta_eval, jacobi_theta, HalfCharacteristic};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rank_one() -> Vec<ModuleRef> {
        ModuleRef::all(&validate(vec![vec![4]]).unwrap())
    }

    #[test]
    fn character_at_zero_is_theta_over_eta() {
        let ws = rank_one();
        let tau = c(0.1, 0.9);
        for w in &ws {
            let z = z_trace(w, &TracePoint::character(1, tau)).unwrap();
            let th = crate::lattice::theta_series(w.lattice(), w.coset(), 40)
                .unwrap()
                .eval_tau(tau)
                .unwrap();
            assert!((z - th / eta_eval(tau).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn direct_sum_oracle_with_complex_a_and_b() {
        let ws = rank_one();
        let a = vec![c(0.3, -0.08)];
        let b = vec![c(-0.2, 0.05)];
        let tau = c(-0.3, 0.7);
        for w in &ws {
            let beta = w.coset().beta_f64()[0];
            // direct: Σ_n e^{2πi·4a(m + b/2)} q^{2(m+b)²}, m = n + β
            let mut s = Complex64::zero();
            for n in -40..=40 {
                let m = n as f64 + beta;
                let e = TAU_2PI_I * (a[0] * 4.0 * (m + b[0] * 0.5) + tau * 2.0 * (b[0] + m).powi(2));
                s += e.exp();
            }
            let z = z_trace(w, &TracePoint::new(a.clone(), b.clone(), tau)).unwrap();
            assert!((z * eta_eval(tau).unwrap() - s).norm() < 1e-13 * s.norm().max(1.0));
        }
    }

    #[test]
    fn dictionary_identities() {
        let ws = rank_one();
        let i = Complex64::i();
        for (z, tau) in [(c(0.13, 0.05), c(0.2, 0.9)), (c(-0.31, -0.2), c(-0.45, 1.3))] {
            // a = z·x with x = e/2 in basis coordinates
            let a = [z * 0.5];
            let th: Vec<Complex64> = ws.iter().map(|w| theta_w(w, &a, tau).unwrap()).collect();
            let pairs = [
                (HalfCharacteristic::ZERO_ZERO, th[0] + th[2]),
                (HalfCharacteristic::ZERO_HALF, th[0] - th[2]),
                (HalfCharacteristic::HALF_ZERO, th[1] + th[3]),
                (HalfCharacteristic::HALF_HALF, i * th[1] - i * th[3]),
            ];
            for (ch, combo) in pairs {
                let expect = jacobi_theta(ch, z, tau).unwrap();
                assert!((combo - expect).norm() < 1e-12, "{ch}");
            }
        }
    }

    #[test]
    fn character_is_positive_on_imaginary_axis() {
        let a2 = validate(vec![vec![2, -1], vec![-1, 2]]).unwrap();
        for t in [0.3, 1.0, 2.5] {
            for v in z_vector(&a2, &TracePoint::character(2, c(0.0, t))).unwrap() {
                assert!(v.re > 0.0 && v.im.abs() < 1e-14 * v.re);
            }
        }
    }

    #[test]
    fn conjugate_cosets_agree_for_real_a() {
        let z = z_vector(
            &validate(vec![vec![4]]).unwrap(),
            &TracePoint::new(vec![c(0.17, 0.0)], vec![c(0.0, 0.0)], c(0.0, 2.0)),
        )
        .unwrap();
        assert!((z[1] - z[3].conj()).norm() < 1e-15);
    }

    #[test]
    fn quasi_periodicity_in_a() {
        let a2 = validate(vec![vec![2, -1], vec![-1, 2]]).unwrap();
        let p = TracePoint::new(vec![c(0.1, 0.02), c(-0.2, 0.0)], vec![c(0.05, -0.03), c(0.1, 0.02)], c(0.3, 1.1));
        let ell = [2.0, -1.0];
        for w in ModuleRef::all(&a2) {
            let shifted: Vec<Complex64> = p.a.iter().zip(ell).map(|(x, l)| x + l).collect();
            let lhs = z_trace(&w, &TracePoint::new(shifted, p.b.clone(), p.tau)).unwrap();
            // phase e^{2πi⟨ℓ, β + b/2⟩}
            let beta = w.coset().beta_f64();
            let target: Vec<Complex64> = beta.iter().zip(&p.b).map(|(bt, b)| b * 0.5 + bt).collect();
            let ellc: Vec<Complex64> = ell.iter().map(|&l| c(l, 0.0)).collect();
            let phase = (TAU_2PI_I * a2.pair(&ellc, &target)).exp();
            let rhs = phase * z_trace(&w, &p).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn b_shift_moves_the_summation_lattice() {
        // Z(a, b+ℓ) = e^{−πi⟨a,ℓ⟩}·e^{...}: with m' = m+ℓ the sum over L+β is
        // unchanged, leaving the factor e^{2πi⟨a, −ℓ + ℓ/2⟩} = e^{−πi⟨a,ℓ⟩}.
        let l = validate(vec![vec![4]]).unwrap();
        let a = vec![c(0.21, -0.03)];
        let b = vec![c(0.1, 0.02)];
        let tau = c(0.1, 0.8);
        for w in ModuleRef::all(&l) {
            let z0 = z_trace(&w, &TracePoint::new(a.clone(), b.clone(), tau)).unwrap();
            let z1 = z_trace(&w, &TracePoint::new(a.clone(), vec![b[0] + 1.0], tau)).unwrap();
            let phase = (TAU_2PI_I * (-0.5) * l.pair(&a, &[c(1.0, 0.0)])).exp();
            assert!((z1 - phase * z0).norm() < 1e-12 * z0.norm());
        }
    }

    #[test]
    fn t_phase_values() {
        let ws = rank_one();
        let p = TracePoint::new(vec![c(0.1, 0.05)], vec![c(-0.15, 0.02)], c(0.2, 0.9));
        let w0 = t_phase(&ws[0], &p, 1e-12).unwrap();
        assert!((w0 - (TAU_2PI_I * (-1.0 / 24.0)).exp()).norm() < 1e-15);
        let w2 = t_phase(&ws[2], &p, 1e-12).unwrap();
        assert!((w2 - (TAU_2PI_I * (0.5 - 1.0 / 24.0)).exp()).norm() < 1e-15);
        for w in &ws {
            t_phase(w, &p, 1e-12).unwrap();
        }
    }

    #[test]
    fn dimension_mismatch_and_floor() {
        let w = &rank_one()[0];
        assert!(matches!(
            z_trace(w, &TracePoint::character(2, c(0.0, 1.0))),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            z_trace(w, &TracePoint::character(1, c(0.0, 0.1))),
            Err(Error::ImTooSmall { .. })
        ));
        assert!(z_trace_with_floor(w, &TracePoint::character(1, c(0.0, 0.1)), 0.05).is_ok());
    }

    #[test]
    fn oscillator_counts_are_partition_numbers() {
        let p: Vec<i64> = oscillator_counts(1, 8).iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(p, vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
        // two colours: 1, 2, 5, 10, 20
        let p2: Vec<i64> = oscillator_counts(2, 4).iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(p2, vec![1, 2, 5, 10, 20]);
    }

    #[test]
    fn graded_phases_sum_to_z_trace() {
        let ws = rank_one();
        let a = [BigRational::new(1.into(), 3.into())];
        let tau = c(0.05, 1.5);
        for w in &ws {
            let g = phase_graded_character(w, &a, &BigRational::from_integer(30.into())).unwrap();
            let approx = eval_graded_phases(&g, 1, tau);
            let exact = z_trace(w, &TracePoint::new(vec![c(1.0 / 3.0, 0.0)], vec![c(0.0, 0.0)], tau)).unwrap();
            assert!((approx - exact).norm() < 1e-12);
        }
    }
}
