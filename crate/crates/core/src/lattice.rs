//! Even positive-definite lattices, their discriminant cosets `L*/L`, and
//! vector enumeration up to a norm bound.
//!
//! Vectors are written in lattice-basis coordinates, so `⟨x, y⟩ = xᵀ G y`
//! for the Gram matrix `G`. Coset labels `β` satisfy `Gβ ∈ ℤᵈ` and are kept
//! canonical in the half-open box `[0, 1)ᵈ`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qseries::TruncatedSeries;

/// Default cap on candidate points visited by one enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// An even, positive-definite integral lattice given by its Gram matrix.
#[derive(Clone, Debug)]
pub struct EvenLattice {
    gram: Vec<Vec<i64>>,
    det: i128,
    /// `G⁻¹` in floating point, for enumeration bounds.
    gram_inv: Vec<Vec<f64>>,
}

/// Check that `gram` is square, symmetric, positive definite and even.
pub fn validate(gram: Vec<Vec<i64>>) -> Result<EvenLattice> {
    let d = gram.len();
    if d == 0 || gram.iter().any(|row| row.len() != d) {
        return Err(Error::NotSquare);
    }
    for i in 0..d {
        for j in 0..i {
            if gram[i][j] != gram[j][i] {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let wide: Vec<Vec<i128>> = gram
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    for k in 1..=d {
        let minor = bareiss_det(&wide, k);
        if minor <= 0 {
            return Err(Error::NotPositiveDefinite {
                index: k,
                minor,
            });
        }
    }
    for (i, row) in gram.iter().enumerate() {
        if row[i] % 2 != 0 {
            return Err(Error::NotEven {
                index: i,
                value: row[i],
            });
        }
    }
    let det = bareiss_det(&wide, d);
    let gram_inv = float_inverse(&gram);
    Ok(EvenLattice {
        gram,
        det,
        gram_inv,
    })
}

/// Determinant of the leading `k×k` block by fraction-free elimination.
fn bareiss_det(m: &[Vec<i128>], k: usize) -> i128 {
    let mut a: Vec<Vec<i128>> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for i in 0..k {
        if a[i][i] == 0 {
            match (i + 1..k).find(|&r| a[r][i] != 0) {
                Some(r) => {
                    a.swap(i, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for r in i + 1..k {
            for c in i + 1..k {
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) / prev;
            }
        }
        prev = a[i][i];
    }
    sign * a[k - 1][k - 1]
}

fn float_inverse(g: &[Vec<i64>]) -> Vec<Vec<f64>> {
    let d = g.len();
    let mut a: Vec<Vec<f64>> = g
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<f64> = r.iter().map(|&x| x as f64).collect();
            row.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..d {
        let p = (c..d)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap();
        a.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..d {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in 0..2 * d {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[d..].to_vec()).collect()
}

impl PartialEq for EvenLattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram
    }
}

impl Eq for EvenLattice {}

impl EvenLattice {
    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn det(&self) -> i128 {
        self.det
    }

    /// Order of the discriminant group `|L*/L| = det G`.
    pub fn discriminant_order(&self) -> usize {
        self.det as usize
    }

    /// Bilinear pairing of complex coordinate vectors (no conjugation).
    pub fn pair(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut s = Complex64::zero();
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if g != 0 {
                    s += x[i] * y[j] * g as f64;
                }
            }
        }
        s
    }

    pub fn pair_real(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                s += x[i] * y[j] * g as f64;
            }
        }
        s
    }

    /// Exact pairing of rational vectors.
    pub fn pair_exact(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if g != 0 {
                    s += &x[i] * &y[j] * BigRational::from_integer(BigInt::from(g));
                }
            }
        }
        s
    }

    /// Calls `visit` for every integer vector `y` with
    /// `(y − c)ᵀ G (y − c) ≤ radius_sq`, using the per-coordinate bound
    /// `|yᵢ − cᵢ| ≤ √(radius_sq · (G⁻¹)ᵢᵢ)`.
    ///
    /// The float test carries a small relative slack; callers needing exact
    /// membership re-check with rational arithmetic.
    pub(crate) fn for_each_in_ellipsoid<F: FnMut(&[i64])>(
        &self,
        centre: &[f64],
        radius_sq: f64,
        cap: u128,
        mut visit: F,
    ) -> Result<()> {
        let d = self.rank();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        let mut visits: u128 = 1;
        for i in 0..d {
            let w = (radius_sq.max(0.0) * self.gram_inv[i][i]).sqrt() * (1.0 + 1e-9) + 1e-9;
            let (l, h) = ((centre[i] - w).ceil() as i64, (centre[i] + w).floor() as i64);
            visits = visits.saturating_mul((h - l + 1).max(0) as u128);
            lo.push(l);
            hi.push(h);
        }
        if visits > cap {
            return Err(Error::BoundTooLarge { visits, cap });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Ok(());
        }
        let slack = radius_sq.abs() * 1e-9 + 1e-9;
        let mut y = lo.clone();
        let mut diff = vec![0.0; d];
        loop {
            for i in 0..d {
                diff[i] = y[i] as f64 - centre[i];
            }
            if self.pair_real(&diff, &diff) <= radius_sq + slack {
                visit(&y);
            }
            // odometer increment
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(());
                }
                if y[i] < hi[i] {
                    y[i] += 1;
                    break;
                }
                y[i] = lo[i];
                i += 1;
            }
        }
    }
}

/// A coset `β + L` of the lattice inside its dual, stored canonically with
/// every coordinate in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetLabel {
    beta: Vec<BigRational>,
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

impl CosetLabel {
    /// Validate `β` against the lattice (`Gβ` integral) and reduce mod `ℤᵈ`.
    pub fn new(lattice: &EvenLattice, beta: Vec<BigRational>) -> Result<Self> {
        if beta.len() != lattice.rank() {
            return Err(Error::DimensionMismatch {
                expected: lattice.rank(),
                got: beta.len(),
            });
        }
        for row in lattice.gram() {
            let s: BigRational = row
                .iter()
                .zip(&beta)
                .map(|(&g, b)| b * BigRational::from_integer(BigInt::from(g)))
                .sum();
            if !s.is_integer() {
                return Err(Error::NotInDual);
            }
        }
        Ok(Self {
            beta: beta.iter().map(frac).collect(),
        })
    }

    pub fn zero(rank: usize) -> Self {
        Self {
            beta: vec![BigRational::zero(); rank],
        }
    }

    pub fn beta(&self) -> &[BigRational] {
        &self.beta
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.to_f64().unwrap()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.beta.iter().all(Zero::is_zero)
    }

    /// The label of `−β + L`.
    pub fn negated(&self) -> Self {
        Self {
            beta: self.beta.iter().map(|b| frac(&-b)).collect(),
        }
    }

    /// `⟨β, β⟩/2`, well defined modulo 1 on the coset.
    pub fn half_norm(&self, lattice: &EvenLattice) -> BigRational {
        lattice.pair_exact(&self.beta, &self.beta) / BigRational::from_integer(BigInt::from(2))
    }

    /// Common denominator `N` with `Nβ ∈ ℤᵈ`, and the numerators.
    fn scaled(&self) -> (i128, Vec<i128>) {
        let n = self
            .beta
            .iter()
            .fold(BigInt::one(), |acc, b| acc.lcm(b.denom()));
        let p = self
            .beta
            .iter()
            .map(|b| (b * BigRational::from_integer(n.clone())).to_integer().to_i128().unwrap())
            .collect();
        (n.to_i128().unwrap(), p)
    }
}

impl PartialOrd for CosetLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CosetLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.beta.cmp(&other.beta)
    }
}

impl std::fmt::Display for CosetLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.beta.iter().map(|b| b.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A vector `m ∈ L + β` with its exact norm `⟨m, m⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeVector {
    pub coords: Vec<BigRational>,
    pub norm: BigRational,
}

impl LatticeVector {
    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64().unwrap()).collect()
    }

    /// `⟨m, m⟩/2`, the conformal weight of the lattice state.
    pub fn half_norm(&self) -> BigRational {
        &self.norm / BigRational::from_integer(BigInt::from(2))
    }
}

/// Smith normal form `U G V = D` over the integers. Returns `(D diagonal, V)`.
fn smith_normal_form(g: &[Vec<i64>]) -> (Vec<i128>, Vec<Vec<i128>>) {
    let n = g.len();
    let mut a: Vec<Vec<i128>> = g
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    for t in 0..n {
        loop {
            // smallest nonzero pivot in the trailing block
            let Some((pi, pj)) = (t..n)
                .flat_map(|i| (t..n).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs())
            else {
                break;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    for k in t..n {
                        a[i][k] -= q * a[t][k];
                    }
                }
                dirty |= a[i][t] != 0;
            }
            for j in t + 1..n {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                dirty |= a[t][j] != 0;
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block by the pivot
            if let Some(i) = (t + 1..n).find(|&i| (t + 1..n).any(|j| a[i][j] % p != 0)) {
                for k in t..n {
                    a[t][k] += a[i][k];
                }
                continue;
            }
            break;
        }
        if a[t][t] < 0 {
            for k in t..n {
                a[t][k] = -a[t][k];
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// One label per element of `L*/L`, sorted lexicographically by canonical
/// coordinates (so the zero coset comes first).
pub fn dual_coset_reps(lattice: &EvenLattice) -> Vec<CosetLabel> {
    let (diag, v) = smith_normal_form(lattice.gram());
    let n = lattice.rank();
    let mut labels: Vec<CosetLabel> = Vec::new();
    let mut k = vec![0i128; n];
    loop {
        // β = V D⁻¹ k
        let beta: Vec<BigRational> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        BigRational::new(BigInt::from(v[i][j] * k[j]), BigInt::from(diag[j]))
                    })
                    .sum()
            })
            .collect();
        labels.push(CosetLabel {
            beta: beta.iter().map(frac).collect(),
        });
        let mut i = 0;
        loop {
            if i == n {
                labels.sort();
                labels.dedup();
                return labels;
            }
            if k[i] + 1 < diag[i] {
                k[i] += 1;
                break;
            }
            k[i] = 0;
            i += 1;
        }
    }
}

/// Every `m ∈ L + β` with `⟨m, m⟩/2 ≤ bound`, sorted by norm then coordinates.
pub fn enumerate_vectors(
    lattice: &EvenLattice,
    coset: &CosetLabel,
    bound: &BigRational,
) -> Result<Vec<LatticeVector>> {
    enumerate_vectors_capped(lattice, coset, bound, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_vectors_capped(
    lattice: &EvenLattice,
    coset: &CosetLabel,
    bound: &BigRational,
    cap: u128,
) -> Result<Vec<LatticeVector>> {
    if bound.is_negative() {
        return Err(Error::InvalidArgument("norm bound must be non-negative".into()));
    }
    let (den, num) = coset.scaled();
    let beta = coset.beta_f64();
    let centre: Vec<f64> = beta.iter().map(|b| -b).collect();
    let radius_sq = 2.0 * bound.to_f64().unwrap();
    // exact test: wᵀGw ≤ 2·bound·N² with w = N·n + p
    let limit = BigRational::from_integer(BigInt::from(2 * den * den)) * bound;
    let mut out = Vec::new();
    lattice.for_each_in_ellipsoid(&centre, radius_sq, cap, |n| {
        let w: Vec<i128> = n.iter().zip(&num).map(|(&ni, &pi)| den * ni as i128 + pi).collect();
        let q = quad_form(lattice.gram(), &w);
        if BigRational::from_integer(BigInt::from(q)) <= limit {
            let dd = BigInt::from(den);
            out.push(LatticeVector {
                coords: w
                    .iter()
                    .map(|&wi| BigRational::new(BigInt::from(wi), dd.clone()))
                    .collect(),
                norm: BigRational::new(BigInt::from(q), BigInt::from(den * den)),
            });
        }
    })?;
    out.sort_by(|a, b| a.norm.cmp(&b.norm).then_with(|| a.coords.cmp(&b.coords)));
    Ok(out)
}

fn quad_form(g: &[Vec<i64>], w: &[i128]) -> i128 {
    let mut s = 0i128;
    for (i, row) in g.iter().enumerate() {
        for (j, &gij) in row.iter().enumerate() {
            s += w[i] * gij as i128 * w[j];
        }
    }
    s
}

/// Denominator of the `q`-exponents `⟨m,m⟩/2` occurring on the coset.
pub fn coset_exponent_denom(lattice: &EvenLattice, coset: &CosetLabel) -> u32 {
    let h = coset.half_norm(lattice);
    h.denom().to_u32().expect("coset exponent denominator fits in u32")
}

/// `Σ_{m ∈ L+β} q^{⟨m,m⟩/2}`, exact through `q^{q_order}`; coefficients are
/// vector counts.
pub fn theta_series(
    lattice: &EvenLattice,
    coset: &CosetLabel,
    q_order: u32,
) -> Result<TruncatedSeries> {
    theta_series_weighted(lattice, coset, q_order, |_| Complex64::new(1.0, 0.0))
}

/// `Σ_{m ∈ L+β} w(m) q^{⟨m,m⟩/2}` for a weight evaluated on float coordinates.
pub fn theta_series_weighted<W>(
    lattice: &EvenLattice,
    coset: &CosetLabel,
    q_order: u32,
    weight: W,
) -> Result<TruncatedSeries>
where
    W: Fn(&[f64]) -> Complex64,
{
    let denom = coset_exponent_denom(lattice, coset);
    let bound = BigRational::from_integer(BigInt::from(q_order));
    let vectors = enumerate_vectors(lattice, coset, &bound)?;
    let d = BigRational::from_integer(BigInt::from(denom));
    Ok(TruncatedSeries::from_terms(
        denom,
        q_order as i64 * denom as i64,
        vectors.iter().map(|m| {
            let k = (m.half_norm() * &d).to_integer().to_i64().unwrap();
            (k, weight(&m.coords_f64()))
        }),
    ))
}
