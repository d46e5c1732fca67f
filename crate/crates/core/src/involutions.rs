//! Exact combinatorics of the involution set `I(n) = {σ ∈ Σ_n : σ² = 1}`.
//!
//! The sign lemma `Σ_{σ₁+⋯+σ_t=σ} (−1)^t E_{σ_t}⋯E_{σ₁} = (−1)^p E_σ` reduces
//! to a signed count: the factors `E` are multiplicative over disjoint
//! products, so every decomposition contributes the same `E_σ` and only
//! `Σ (−1)^t = (−1)^p` remains to be checked.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest `n` for which `I(n)` is enumerated.
pub const MAX_N: usize = 12;

/// A self-inverse permutation of `{1, …, n}` stored as disjoint transpositions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Involution {
    n: usize,
    /// Sorted pairs `(i, j)` with `i < j`, 1-based.
    pairs: Vec<(usize, usize)>,
}

impl Involution {
    pub fn identity(n: usize) -> Self {
        Self { n, pairs: Vec::new() }
    }

    /// Build from transpositions; rejects overlapping or out-of-range pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        let mut out = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            let (i, j) = (a.min(b), a.max(b));
            if i == 0 || j > n || i == j || seen[i] || seen[j] {
                return Err(Error::InvalidArgument(format!(
                    "({a} {b}) is not a transposition disjoint from the others in 1..={n}"
                )));
            }
            seen[i] = true;
            seen[j] = true;
            out.push((i, j));
        }
        out.sort_unstable();
        Ok(Self { n, pairs: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `m(σ)`: the points moved by `σ`, sorted.
    pub fn moved(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
        m.sort_unstable();
        m
    }

    /// `f(σ)`: the fixed points of `σ`.
    pub fn fixed(&self) -> Vec<usize> {
        let m = self.moved();
        (1..=self.n).filter(|i| m.binary_search(i).is_err()).collect()
    }

    /// Image table, `perm[i] = σ(i)` for `i ∈ 1..=n` (entry 0 unused).
    pub fn as_permutation(&self) -> Vec<usize> {
        let mut p: Vec<usize> = (0..=self.n).collect();
        for &(i, j) in &self.pairs {
            p[i] = j;
            p[j] = i;
        }
        p
    }
}

impl std::fmt::Display for Involution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "id");
        }
        for (i, j) in &self.pairs {
            write!(f, "({i}{j})")?;
        }
        Ok(())
    }
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    // (p ∘ q)(i) = p(q(i))
    q.iter().map(|&x| p[x]).collect()
}

/// An ordered sequence of non-identity involutions with disjoint moved sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<Involution>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Product of the parts by permutation composition.
    pub fn product(&self, n: usize) -> Vec<usize> {
        self.parts
            .iter()
            .fold((0..=n).collect(), |acc, s| compose(&acc, &s.as_permutation()))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("n must be at least 1".into()))
    } else if n > MAX_N {
        Err(Error::NTooLarge { n, max: MAX_N })
    } else {
        Ok(())
    }
}

/// Visit every element of `I(n)` without materializing the list.
pub fn for_each_involution<F: FnMut(&Involution)>(n: usize, mut visit: F) -> Result<()> {
    check_n(n)?;
    let mut used = vec![false; n + 1];
    let mut sigma = Involution::identity(n);
    walk(1, &mut used, &mut sigma, &mut visit);
    Ok(())
}

fn walk<F: FnMut(&Involution)>(start: usize, used: &mut [bool], sigma: &mut Involution, visit: &mut F) {
    let n = sigma.n;
    let Some(i) = (start..=n).find(|&i| !used[i]) else {
        visit(sigma);
        return;
    };
    used[i] = true;
    // i fixed
    walk(i + 1, used, sigma, visit);
    // i paired with a later free point
    for j in i + 1..=n {
        if !used[j] {
            used[j] = true;
            sigma.pairs.push((i, j));
            walk(i + 1, used, sigma, visit);
            sigma.pairs.pop();
            used[j] = false;
        }
    }
    used[i] = false;
}

pub fn list_involutions(n: usize) -> Result<Vec<Involution>> {
    let mut out = Vec::new();
    for_each_involution(n, |s| {
        let mut s = s.clone();
        s.pairs.sort_unstable();
        out.push(s);
    })?;
    Ok(out)
}

fn check_parity(n: usize, r: usize) -> Result<usize> {
    let diff = n as i64 - r as i64;
    if diff < 0 || diff % 2 != 0 {
        return Err(Error::ParityMismatch { diff });
    }
    Ok(diff as usize / 2)
}

/// Number of `σ ∈ I(n)` with exactly `r` fixed points, by enumeration.
pub fn count_with_fixed(n: usize, r: usize) -> Result<BigInt> {
    check_parity(n, r)?;
    let mut count = 0u64;
    for_each_involution(n, |s| {
        if s.n - 2 * s.pairs.len() == r {
            count += 1;
        }
    })?;
    Ok(BigInt::from(count))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn binomial(n: usize, k: usize) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `C(2p+r, r) · (2p)! / (p! 2^p)`.
pub fn closed_form_count(p: usize, r: usize) -> BigInt {
    binomial(2 * p + r, r) * factorial(2 * p) / (factorial(p) * (BigInt::one() << p))
}

/// The variant with `(2p+r)!` in place of `(2p)!`. It overcounts and is kept for comparison.
pub fn overcounting_closed_form_count(p: usize, r: usize) -> BigInt {
    binomial(2 * p + r, r) * factorial(2 * p + r) / (factorial(p) * (BigInt::one() << p))
}

/// Enumeration against the closed form for `n = 2p + r`.
pub fn closed_form_check(p: usize, r: usize) -> Result<bool> {
    Ok(count_with_fixed(2 * p + r, r)? == closed_form_count(p, r))
}

/// Involution counts `T(n, r)` from the recurrence
/// `T(n, r) = T(n−1, r−1) + (n−1) T(n−2, r)` (the point `n` is either fixed
/// or paired with one of the other `n − 1` points).
pub fn recurrence_counts(n_max: usize) -> Vec<Vec<BigInt>> {
    let mut t = vec![vec![BigInt::zero(); n_max + 1]; n_max + 1];
    t[0][0] = BigInt::one();
    for n in 1..=n_max {
        for r in 0..=n {
            let mut v = BigInt::zero();
            if r >= 1 {
                v += &t[n - 1][r - 1];
            }
            if n >= 2 {
                v += &t[n - 2][r] * (n - 1);
            }
            t[n][r] = v;
        }
    }
    t
}

/// All ordered decompositions `σ₁ + ⋯ + σ_t = σ`, i.e. ordered set partitions
/// of the transpositions of `σ`.
pub fn enumerate_decompositions(sigma: &Involution) -> Result<Vec<Decomposition>> {
    if sigma.is_identity() {
        return Err(Error::InvalidArgument("the identity has no decompositions".into()));
    }
    let moved = 2 * sigma.pairs.len();
    if moved > MAX_N {
        return Err(Error::NTooLarge { n: moved, max: MAX_N });
    }
    let p = sigma.pairs.len();
    let mut out = Vec::new();
    // assign each pair a block label; labels in first-occurrence order give
    // unordered partitions, then every ordering of the blocks is emitted
    let mut labels = vec![0usize; p];
    set_partitions(0, 0, &mut labels, &mut |labels, blocks| {
        let groups: Vec<Involution> = (0..blocks)
            .map(|b| {
                let pairs: Vec<(usize, usize)> = (0..p)
                    .filter(|&i| labels[i] == b)
                    .map(|i| sigma.pairs[i])
                    .collect();
                Involution { n: sigma.n, pairs }
            })
            .collect();
        let mut order: Vec<usize> = (0..blocks).collect();
        permutations(&mut order, 0, &mut |ord| {
            out.push(Decomposition {
                parts: ord.iter().map(|&b| groups[b].clone()).collect(),
            });
        });
    });
    Ok(out)
}

fn set_partitions<F: FnMut(&[usize], usize)>(i: usize, blocks: usize, labels: &mut Vec<usize>, emit: &mut F) {
    if i == labels.len() {
        emit(labels, blocks);
        return;
    }
    for b in 0..=blocks {
        labels[i] = b;
        set_partitions(i + 1, blocks.max(b + 1), labels, emit);
    }
}

fn permutations<F: FnMut(&[usize])>(xs: &mut [usize], k: usize, emit: &mut F) {
    if k == xs.len() {
        emit(xs);
        return;
    }
    for i in k..xs.len() {
        xs.swap(k, i);
        permutations(xs, k + 1, emit);
        xs.swap(k, i);
    }
}

/// Checks every decomposition (disjoint moved sets, product equal to `σ` by
/// composition) and then `Σ (−1)^t = (−1)^p` for `|m(σ)| = 2p`.
pub fn verify_sign_lemma(sigma: &Involution) -> Result<bool> {
    let target = sigma.as_permutation();
    let mut total = 0i64;
    for dec in enumerate_decompositions(sigma)? {
        let mut seen = vec![false; sigma.n + 1];
        for part in &dec.parts {
            if part.is_identity() {
                return Ok(false);
            }
            for i in part.moved() {
                if std::mem::replace(&mut seen[i], true) {
                    return Ok(false);
                }
            }
        }
        if dec.product(sigma.n) != target {
            return Ok(false);
        }
        total += if dec.len() % 2 == 0 { 1 } else { -1 };
    }
    let p = sigma.pairs.len();
    Ok(total == if p % 2 == 0 { 1 } else { -1 })
}

/// `(1/(r+2p)!) C(r+2p, r) (2p)!/(p! 2^p) = (1/(r+p)!) C(r+p, r) (1/2^p)`.
pub fn verify_multinomial_identity(p: usize, r: usize) -> bool {
    let int = |x: BigInt| BigRational::from_integer(x);
    let lhs = int(binomial(r + 2 * p, r)) * int(factorial(2 * p))
        / (int(factorial(r + 2 * p)) * int(factorial(p)) * int(BigInt::one() << p));
    let rhs = int(binomial(r + p, r)) / (int(factorial(r + p)) * int(BigInt::one() << p));
    lhs == rhs
}

/// Outcome of the exponential regrouping check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegroupReport {
    pub p_max: usize,
    pub r_max: usize,
    /// Monomials `c^p X^r` compared.
    pub monomials: usize,
    /// Counts for `n ≤` this value came from enumerating `I(n)`; larger `n`
    /// used the recurrence.
    pub enumerated_through: usize,
    pub mismatches: Vec<(usize, usize)>,
}

impl RegroupReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// In the commuting model with `X` for `o(v)` and `c` for the pairing scalar,
/// compare `Σ_n (1/n!) Σ_{σ∈I(n)} c^{|m(σ)|/2} X^{|f(σ)|}` with `e^{c/2 + X}`
/// on every monomial `c^p X^r`, `p ≤ p_max`, `r ≤ r_max`.
pub fn exponential_regroup_check(p_max: usize, r_max: usize) -> Result<RegroupReport> {
    if p_max > 20 || r_max > 20 {
        return Err(Error::InvalidArgument("regrouping bounds are limited to 20".into()));
    }
    let n_max = 2 * p_max + r_max;
    // c^p X^r coefficient of the left side, keyed by (p, r)
    let mut lhs: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
    let enumerated_through = n_max.min(MAX_N);
    for n in 1..=enumerated_through {
        let mut tally = vec![0u64; n / 2 + 1];
        for_each_involution(n, |s| tally[s.pairs.len()] += 1)?;
        let nf = factorial(n);
        for (p, &c) in tally.iter().enumerate() {
            lhs.insert((p, n - 2 * p), BigRational::new(BigInt::from(c), nf.clone()));
        }
    }
    let rec = recurrence_counts(n_max);
    for (n, row) in rec.iter().enumerate().skip(enumerated_through + 1) {
        for p in 0..=n / 2 {
            lhs.insert((p, n - 2 * p), BigRational::new(row[n - 2 * p].clone(), factorial(n)));
        }
    }
    lhs.insert((0, 0), BigRational::one());

    let mut mismatches = Vec::new();
    let mut monomials = 0;
    for p in 0..=p_max {
        for r in 0..=r_max {
            // e^{c/2} e^X = Σ (c/2)^p/p! · X^r/r!
            let rhs = BigRational::new(
                BigInt::one(),
                factorial(p) * (BigInt::one() << p) * factorial(r),
            );
            monomials += 1;
            if lhs.get(&(p, r)) != Some(&rhs) {
                mismatches.push((p, r));
            }
        }
    }
    Ok(RegroupReport {
        p_max,
        r_max,
        monomials,
        enumerated_through,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_count(n: usize) -> usize {
        // all permutations of 1..=n squaring to the identity
        let mut xs: Vec<usize> = (1..=n).collect();
        let mut count = 0;
        permutations(&mut xs, 0, &mut |p| {
            if (0..n).all(|i| p[p[i] - 1] == i + 1) {
                count += 1;
            }
        });
        count
    }

    #[test]
    fn small_counts_match_brute_force() {
        for n in 1..=6 {
            assert_eq!(list_involutions(n).unwrap().len(), brute_force_count(n), "n={n}");
        }
        assert_eq!(list_involutions(3).unwrap().len(), 4);
        assert_eq!(list_involutions(4).unwrap().len(), 10);
        assert!(list_involutions(1).unwrap()[0].is_identity());
        assert!(matches!(list_involutions(13), Err(Error::NTooLarge { .. })));
    }

    #[test]
    fn fixed_point_counts() {
        assert_eq!(count_with_fixed(4, 0).unwrap(), BigInt::from(3));
        assert_eq!(count_with_fixed(4, 2).unwrap(), BigInt::from(6));
        assert_eq!(count_with_fixed(2, 2).unwrap(), BigInt::from(1));
        assert!(matches!(count_with_fixed(4, 1), Err(Error::ParityMismatch { diff: 3 })));
        assert!(matches!(count_with_fixed(2, 4), Err(Error::ParityMismatch { diff: -2 })));
    }

    #[test]
    fn overcounting_form_exceeds_enumeration() {
        assert!(closed_form_check(1, 1).unwrap());
        assert_eq!(overcounting_closed_form_count(1, 1), BigInt::from(9));
        assert_eq!(closed_form_count(1, 1), BigInt::from(3));
    }

    #[test]
    fn decomposition_counts() {
        let s = Involution::from_pairs(2, &[(1, 2)]).unwrap();
        assert_eq!(enumerate_decompositions(&s).unwrap().len(), 1);
        let s = Involution::from_pairs(4, &[(1, 2), (3, 4)]).unwrap();
        let d = enumerate_decompositions(&s).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().any(|x| x.len() == 1));
        let s = Involution::from_pairs(6, &[(1, 2), (3, 4), (5, 6)]).unwrap();
        let d = enumerate_decompositions(&s).unwrap();
        let by_len = |t| d.iter().filter(|x| x.len() == t).count();
        assert_eq!((by_len(1), by_len(2), by_len(3)), (1, 6, 6));
        assert!(enumerate_decompositions(&Involution::identity(3)).is_err());
    }

    #[test]
    fn sign_lemma_small() {
        for pairs in [vec![(1, 2)], vec![(1, 3), (2, 4)], vec![(1, 6), (2, 5), (3, 4)]] {
            let s = Involution::from_pairs(6, &pairs).unwrap();
            assert!(verify_sign_lemma(&s).unwrap());
        }
    }

    #[test]
    fn multinomial_examples() {
        assert!(verify_multinomial_identity(0, 5));
        assert!(verify_multinomial_identity(1, 1));
        assert!(verify_multinomial_identity(2, 0));
    }

    #[test]
    fn regroup_low_degree() {
        let r = exponential_regroup_check(2, 2).unwrap();
        assert!(r.passed());
        assert_eq!(r.monomials, 9);
        assert_eq!(r.enumerated_through, 6);
    }

    #[test]
    fn fixed_and_moved_partition_ground_set() {
        let s = Involution::from_pairs(5, &[(4, 2)]).unwrap();
        assert_eq!(s.moved(), vec![2, 4]);
        assert_eq!(s.fixed(), vec![1, 3, 5]);
        assert_eq!(s.to_string(), "(24)");
        assert!(Involution::from_pairs(4, &[(1, 2), (2, 3)]).is_err());
    }
}
