//! Free-boson Fock spaces over lattice cosets and literal trace computations.
//!
//! A basis state of `V_{L+β}` is `e₁(−n₁)⋯e_k(−n_k)|m⟩` for `m ∈ L+β` and a
//! multiset of excitations `(n, i)`, where `e_i` is the `i`-th lattice basis
//! vector. Creation operators append excitations with coefficient 1; only
//! annihilators carry inner-product weights. Operators are applied without
//! truncating intermediate states, so every matrix element of a grade-`g`
//! basis state is exact regardless of the cutoff.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{coset_exponent_denom, enumerate_vectors, EvenLattice};
use crate::qseries::{p2_series, BiSeries, TruncatedSeries, TAU_2PI_I};
use crate::trace::{oscillator_counts, reduce_mod_one, GradedPhases, ModuleRef};

/// Default cap on the number of basis states.
pub const DEFAULT_STATE_CAP: usize = 100_000;

/// Coefficient field for mode actions.
pub trait Scalar: Clone + Num + std::ops::AddAssign {
    fn from_rational(r: &BigRational) -> Self;
}

impl Scalar for Complex64 {
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap(), 0.0)
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// `e_{i₁}(−n₁)⋯|m⟩`, ordered by grade first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    grade: BigRational,
    point: Vec<BigRational>,
    /// Sorted `(mode n ≥ 1, direction)` pairs.
    excitations: Vec<(u32, usize)>,
}

impl FockState {
    pub fn new(lattice: &EvenLattice, point: Vec<BigRational>, mut excitations: Vec<(u32, usize)>) -> Self {
        excitations.sort_unstable();
        let norm = lattice.pair_exact(&point, &point);
        let modes: u64 = excitations.iter().map(|&(n, _)| n as u64).sum();
        let grade = norm / BigRational::from_integer(BigInt::from(2))
            + BigRational::from_integer(BigInt::from(modes));
        Self {
            grade,
            point,
            excitations,
        }
    }

    pub fn grade(&self) -> &BigRational {
        &self.grade
    }

    pub fn point(&self) -> &[BigRational] {
        &self.point
    }

    pub fn excitations(&self) -> &[(u32, usize)] {
        &self.excitations
    }

    fn with_excitations(&self, excitations: Vec<(u32, usize)>, grade_shift: i64) -> Self {
        Self {
            grade: &self.grade + BigRational::from_integer(BigInt::from(grade_shift)),
            point: self.point.clone(),
            excitations,
        }
    }
}

/// All states of a module with grade at most `cutoff`, sorted.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    module: ModuleRef,
    cutoff: BigRational,
    states: Vec<FockState>,
}

impl GradedBasis {
    pub fn module(&self) -> &ModuleRef {
        &self.module
    }

    pub fn cutoff(&self) -> &BigRational {
        &self.cutoff
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    /// Number of states in each grade.
    pub fn dimensions(&self) -> BTreeMap<BigRational, usize> {
        let mut out = BTreeMap::new();
        for s in &self.states {
            *out.entry(s.grade.clone()).or_insert(0) += 1;
        }
        out
    }
}

pub fn build_basis(w: &ModuleRef, cutoff: &BigRational) -> Result<GradedBasis> {
    build_basis_capped(w, cutoff, DEFAULT_STATE_CAP)
}

pub fn build_basis_capped(w: &ModuleRef, cutoff: &BigRational, cap: usize) -> Result<GradedBasis> {
    if cutoff < &BigRational::zero() {
        return Err(Error::InvalidArgument("grade cutoff must be non-negative".into()));
    }
    let lattice = w.lattice();
    let d = lattice.rank();
    let points = enumerate_vectors(lattice, w.coset(), cutoff)?;
    let max_budget = cutoff.floor().to_integer().to_usize().unwrap_or(0);
    let osc = oscillator_counts(d, max_budget);
    let budgets: Vec<usize> = points
        .iter()
        .map(|m| (cutoff - m.half_norm()).floor().to_integer().to_usize().unwrap())
        .collect();
    let total: usize = budgets
        .iter()
        .map(|&b| osc[..=b].iter().map(|c| c.to_usize().unwrap_or(usize::MAX)).fold(0usize, usize::saturating_add))
        .fold(0, usize::saturating_add);
    if total > cap {
        return Err(Error::CutoffTooLarge { states: total, cap });
    }

    let mut states = Vec::with_capacity(total);
    for (m, &budget) in points.iter().zip(&budgets) {
        let parts: Vec<(u32, usize)> = (1..=budget as u32)
            .flat_map(|n| (0..d).map(move |i| (n, i)))
            .collect();
        let mut current = Vec::new();
        multisets(&parts, 0, budget as u32, &mut current, &mut |ex| {
            states.push(FockState::new(lattice, m.coords.clone(), ex.to_vec()));
        });
    }
    states.sort();
    Ok(GradedBasis {
        module: w.clone(),
        cutoff: cutoff.clone(),
        states,
    })
}

/// Every multiset of `parts[start..]` (non-decreasing index) with total mode ≤ `budget`.
fn multisets<F: FnMut(&[(u32, usize)])>(
    parts: &[(u32, usize)],
    start: usize,
    budget: u32,
    current: &mut Vec<(u32, usize)>,
    emit: &mut F,
) {
    emit(current);
    for idx in start..parts.len() {
        let p = parts[idx];
        if p.0 > budget {
            break;
        }
        current.push(p);
        multisets(parts, idx, budget - p.0, current, emit);
        current.pop();
    }
}

/// The Heisenberg operator `h(n)` with `h` in lattice-basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeAction<S> {
    pub h: Vec<S>,
    pub n: i64,
}

impl<S> ModeAction<S> {
    pub fn new(h: Vec<S>, n: i64) -> Self {
        Self { h, n }
    }
}

/// Linear combination of basis states.
pub type Combination<S> = BTreeMap<FockState, S>;

fn accumulate<S: Scalar>(out: &mut Combination<S>, s: FockState, c: S) {
    if c.is_zero() {
        return;
    }
    let e = out.entry(s).or_insert_with(S::zero);
    *e += c;
}

/// `⟨h, e_i⟩` for each basis direction.
fn pairings_with_basis<S: Scalar>(lattice: &EvenLattice, h: &[S]) -> Vec<S> {
    let g = lattice.gram();
    (0..lattice.rank())
        .map(|i| {
            let mut s = S::zero();
            for (j, hj) in h.iter().enumerate() {
                if g[j][i] != 0 {
                    s += hj.clone() * S::from_rational(&BigRational::from_integer(g[j][i].into()));
                }
            }
            s
        })
        .collect()
}

/// `h(n)` applied to one basis state.
pub fn apply_mode<S: Scalar>(lattice: &EvenLattice, op: &ModeAction<S>, s: &FockState) -> Combination<S> {
    let mut out = Combination::new();
    match op.n {
        0 => accumulate(&mut out, s.clone(), zero_mode_eigenvalue(lattice, &op.h, &s.point)),
        n if n < 0 => {
            let mode = (-n) as u32;
            for (i, hi) in op.h.iter().enumerate() {
                if hi.is_zero() {
                    continue;
                }
                let mut ex = s.excitations.clone();
                ex.push((mode, i));
                ex.sort_unstable();
                accumulate(&mut out, s.with_excitations(ex, mode as i64), hi.clone());
            }
        }
        n => {
            let mode = n as u32;
            let weights = pairings_with_basis(lattice, &op.h);
            let mut idx = 0;
            while idx < s.excitations.len() {
                let part = s.excitations[idx];
                let mult = s.excitations[idx..].iter().take_while(|&&p| p == part).count();
                if part.0 == mode && !weights[part.1].is_zero() {
                    let mut ex = s.excitations.clone();
                    ex.remove(idx);
                    let c = weights[part.1].clone()
                        * S::from_rational(&BigRational::from_integer(BigInt::from(mode as u64 * mult as u64)));
                    accumulate(&mut out, s.with_excitations(ex, -(mode as i64)), c);
                }
                idx += mult;
            }
        }
    }
    out
}

/// `⟨h, m⟩`, the eigenvalue of `h(0)` on `|m⟩`.
fn zero_mode_eigenvalue<S: Scalar>(lattice: &EvenLattice, h: &[S], m: &[BigRational]) -> S {
    let mut s = S::zero();
    for (w, mi) in pairings_with_basis(lattice, h).into_iter().zip(m) {
        s += w * S::from_rational(mi);
    }
    s
}

/// `h(n)` applied to a linear combination.
pub fn apply_mode_to<S: Scalar>(
    lattice: &EvenLattice,
    op: &ModeAction<S>,
    v: &Combination<S>,
) -> Combination<S> {
    let mut out = Combination::new();
    for (s, c) in v {
        for (t, e) in apply_mode(lattice, op, s) {
            accumulate(&mut out, t, c.clone() * e);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Common `q`-denominator for traces over `w` including the `q^{−d/24}` shift.
fn trace_denom(w: &ModuleRef) -> u32 {
    coset_exponent_denom(w.lattice(), w.coset()).lcm(&24)
}

fn grade_key(w: &ModuleRef, grade: &BigRational, denom: u32) -> i64 {
    let shifted = grade - BigRational::new(BigInt::from(w.rank()), BigInt::from(24));
    (shifted * BigRational::from_integer(BigInt::from(denom)))
        .to_integer()
        .to_i64()
        .unwrap()
}

fn trusted_order(w: &ModuleRef, cutoff: &BigRational, denom: u32) -> i64 {
    let shifted = cutoff - BigRational::new(BigInt::from(w.rank()), BigInt::from(24));
    (shifted * BigRational::from_integer(BigInt::from(denom)))
        .floor()
        .to_integer()
        .to_i64()
        .unwrap()
}

/// `S_W(1; z₁, …, z_n; τ)` for `n ∈ {1, 2}` as a series in `x = q_{z₂−z₁}`
/// and `q`, including the `q^{−c/24}` prefactor. The trace is taken literally
/// over `build_basis(W, cutoff)`; coefficients are exact for every grade up
/// to the cutoff.
pub fn s_function_trace(
    w: &ModuleRef,
    v_list: &[Vec<Complex64>],
    x_span: u32,
    cutoff: &BigRational,
) -> Result<BiSeries> {
    let basis = build_basis(w, cutoff)?;
    s_function_trace_on(&basis, v_list, x_span)
}

pub fn s_function_trace_on(
    basis: &GradedBasis,
    v_list: &[Vec<Complex64>],
    x_span: u32,
) -> Result<BiSeries> {
    let w = &basis.module;
    let lattice = w.lattice();
    for v in v_list {
        if v.len() != w.rank() {
            return Err(Error::DimensionMismatch {
                expected: w.rank(),
                got: v.len(),
            });
        }
    }
    let denom = trace_denom(w);
    let order = trusted_order(w, &basis.cutoff, denom);
    let span = x_span as i64;
    match v_list {
        [v] => {
            let mut out = BiSeries::zero(-span, span, denom, order);
            let op = ModeAction::new(v.clone(), 0);
            for s in &basis.states {
                let c = apply_mode(lattice, &op, s).remove(s).unwrap_or_default();
                out.add_term(0, grade_key(w, &s.grade, denom), c);
            }
            Ok(out)
        }
        [v1, v2] => {
            let mut out = BiSeries::zero(-span, span, denom, order);
            for k in -span..=span {
                let (op1, op2) = (ModeAction::new(v1.clone(), k), ModeAction::new(v2.clone(), -k));
                for s in &basis.states {
                    let mid = apply_mode(lattice, &op2, s);
                    let end = apply_mode_to(lattice, &op1, &mid);
                    if let Some(c) = end.get(s) {
                        out.add_term(k, grade_key(w, &s.grade, denom), *c);
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!(
            "n-point traces are implemented for n = 1, 2 (got {})",
            v_list.len()
        ))),
    }
}

/// `Σ_{m∈L+β} wt(m) q^{⟨m,m⟩/2 − d/24} ∏(1−qⁿ)^{−d}` through `cutoff`, from
/// lattice enumeration and oscillator counts (no Fock-space operators).
pub fn weighted_character<W>(w: &ModuleRef, cutoff: &BigRational, weight: W) -> Result<TruncatedSeries>
where
    W: Fn(&[f64]) -> Complex64,
{
    let denom = trace_denom(w);
    let order = trusted_order(w, cutoff, denom);
    let vectors = enumerate_vectors(w.lattice(), w.coset(), cutoff)?;
    let max_osc = cutoff.floor().to_integer().to_usize().unwrap_or(0);
    let osc = oscillator_counts(w.rank(), max_osc);
    let mut terms = Vec::new();
    for m in &vectors {
        let wt = weight(&m.coords_f64());
        let base = m.half_norm();
        for (n, count) in osc.iter().enumerate() {
            let g = &base + BigRational::from_integer(BigInt::from(n));
            if &g > cutoff {
                break;
            }
            terms.push((grade_key(w, &g, denom), wt * count.to_f64().unwrap()));
        }
    }
    Ok(TruncatedSeries::from_terms(denom, order, terms))
}

/// Both sides of the n-point recursion for `ψ = 1` and the largest
/// coefficient gap in their common trusted window.
#[derive(Clone, Debug)]
pub struct RecursionReport {
    pub lhs: BiSeries,
    pub rhs: BiSeries,
    pub max_discrepancy: f64,
    pub coefficients_compared: usize,
}

/// Compare the literal trace with the recursion
/// `Σ_{σ∈I(n)} ∏_{j<σ(j)} ⟨−v_j, v_σ(j)⟩ P₂(x, q)/(2πi)² · tr ∏_{r∈f(σ)} o(v_r) q^{L(0)−c/24}`.
pub fn verify_trace_recursion(
    w: &ModuleRef,
    v_list: &[Vec<Complex64>],
    x_span: u32,
    cutoff: &BigRational,
) -> Result<RecursionReport> {
    let lhs = s_function_trace(w, v_list, x_span, cutoff)?;
    let lattice = w.lattice();
    let span = x_span as i64;
    let denom = lhs.q_denom();

    let o_product = |vs: Vec<Vec<Complex64>>| {
        weighted_character(w, cutoff, move |m: &[f64]| {
            let mc: Vec<Complex64> = m.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            vs.iter().map(|v| lattice.pair(v, &mc)).product()
        })
    };
    let mut rhs = BiSeries::zero(-span, span, denom, lhs.q_order());
    // σ = id: every vector is fixed
    let fixed = o_product(v_list.to_vec())?;
    for (k, c) in fixed.terms() {
        rhs.add_term(0, k * (denom / fixed.denom()) as i64, c);
    }
    if let [v1, v2] = v_list {
        // σ = (12): ⟨−v₁, v₂⟩ = −STATE_PAIRING_SIGN·⟨a₁, a₂⟩
        let weight = -crate::trace::state_pairing(lattice, v1, v2);
        let q_order = cutoff.ceil().to_integer().to_u32().unwrap() + 1;
        let kernel = p2_series(x_span, q_order).scale(weight / (TAU_2PI_I * TAU_2PI_I));
        let ch = weighted_character(w, cutoff, |_| Complex64::new(1.0, 0.0))?;
        rhs = rhs.add(&kernel.mul_q_series(&ch));
    }
    let rhs = rhs.lift(denom);
    let order = lhs.q_order().min(rhs.q_order());
    let mut max_discrepancy: f64 = 0.0;
    let mut compared = 0;
    let min_key = grade_key(w, &BigRational::zero(), denom);
    for j in -span..=span {
        for k in min_key..=order {
            let (a, b) = (lhs.coeff(j, k).unwrap(), rhs.coeff(j, k).unwrap());
            max_discrepancy = max_discrepancy.max((a - b).norm());
            compared += 1;
        }
    }
    Ok(RecursionReport {
        lhs,
        rhs,
        max_discrepancy,
        coefficients_compared: compared,
    })
}

/// Literal phase-graded trace `tr e^{2πi a(0)} q^{L(0)}` over the basis:
/// each state contributes its exact zero-mode phase `⟨a, m⟩ mod 1`.
pub fn fock_phase_graded_trace(basis: &GradedBasis, a: &[BigRational]) -> GradedPhases {
    let lattice = basis.module.lattice();
    let op = ModeAction::new(a.to_vec(), 0);
    let mut out = GradedPhases::new();
    for s in &basis.states {
        let eig = apply_mode(lattice, &op, s).remove(s).unwrap_or_default();
        *out
            .entry(s.grade.clone())
            .or_default()
            .entry(reduce_mod_one(&eig))
            .or_default() += 1;
    }
    out
}
