use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

use thetavoa::fock::{apply_mode_to, build_basis, verify_trace_recursion, Combination, ModeAction};
use thetavoa::lattice::{dual_coset_reps, theta_series, validate, EvenLattice};
use thetavoa::trace::{oscillator_counts, ModuleRef};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn a2() -> EvenLattice {
    validate(vec![vec![2, -1], vec![-1, 2]]).unwrap()
}

fn apply<S: thetavoa::fock::Scalar>(l: &EvenLattice, h: &[S], n: i64, v: &Combination<S>) -> Combination<S> {
    apply_mode_to(l, &ModeAction::new(h.to_vec(), n), v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_contract(
        h in proptest::collection::vec((-5i64..=5, 1i64..=4), 2),
        g in proptest::collection::vec((-5i64..=5, 1i64..=4), 2),
        m in -3i64..=3,
        pick in 0usize..400,
    ) {
        let l = a2();
        let h: Vec<BigRational> = h.into_iter().map(|(n, d)| rat(n, d)).collect();
        let g: Vec<BigRational> = g.into_iter().map(|(n, d)| rat(n, d)).collect();
        let modules = ModuleRef::all(&l);
        let w = &modules[pick % modules.len()];
        let basis = build_basis(w, &rat(3, 1)).unwrap();
        let s = basis.states()[pick % basis.states().len()].clone();
        let v: Combination<BigRational> = [(s.clone(), rat(1, 1))].into_iter().collect();

        let hg = apply(&l, &h, m, &apply(&l, &g, -m, &v));
        let gh = apply(&l, &g, -m, &apply(&l, &h, m, &v));
        let mut diff = hg;
        for (k, c) in gh {
            *diff.entry(k).or_insert_with(BigRational::zero) -= c;
        }
        diff.retain(|_, c| !c.is_zero());

        let expected = rat(m, 1) * l.pair_exact(&h, &g);
        if expected.is_zero() {
            prop_assert!(diff.is_empty());
        } else {
            prop_assert_eq!(diff.len(), 1);
            prop_assert_eq!(diff.get(&s), Some(&expected));
        }
    }
}

#[test]
fn basis_dimensions_match_series_through_grade_six() {
    for l in [validate(vec![vec![4]]).unwrap(), a2()] {
        let osc = oscillator_counts(l.rank(), 6);
        for beta in dual_coset_reps(&l) {
            let w = ModuleRef::new(l.clone(), beta.clone()).unwrap();
            let basis = build_basis(&w, &rat(6, 1)).unwrap();
            let theta = theta_series(&l, &beta, 6).unwrap();
            let denom = theta.denom() as i64;
            // dimension of grade k/denom = Σ_j theta[k - j·denom] · osc[j]
            for (grade, dim) in basis.dimensions() {
                let k = (grade * BigRational::from_integer(denom.into())).to_integer().to_i64().unwrap();
                let expected: f64 = (0..=6)
                    .filter(|j| k - j * denom >= 0)
                    .map(|j| theta.coeff(k - j * denom).unwrap().re * osc[j as usize].to_f64().unwrap())
                    .sum();
                assert_eq!(dim as f64, expected);
            }
            let total: usize = basis.dimensions().values().sum();
            assert_eq!(total, basis.states().len());
        }
    }
}

#[test]
fn recursion_on_a2_with_complex_vectors() {
    let l = a2();
    let v1 = vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.0)];
    let v2 = vec![Complex64::new(0.1, -0.4), Complex64::new(0.5, 0.2)];
    for w in ModuleRef::all(&l) {
        let r = verify_trace_recursion(&w, &[v1.clone(), v2.clone()], 3, &rat(4, 1)).unwrap();
        assert!(r.max_discrepancy < 1e-11, "{}", r.max_discrepancy);
    }
}

#[test]
fn two_point_trace_has_nontrivial_kernel_part() {
    // the x^k (k ≠ 0) coefficients come only from the P2 term, so a match
    // there is not a comparison of zeros
    let l = validate(vec![vec![4]]).unwrap();
    let w = &ModuleRef::all(&l)[0];
    let v = vec![Complex64::new(0.5, 0.0)];
    let r = verify_trace_recursion(w, &[v.clone(), v], 2, &rat(4, 1)).unwrap();
    let off_diagonal = r
        .lhs
        .terms()
        .filter(|((j, _), _)| *j != 0)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    assert!(off_diagonal > 0.5);
    assert!(r.max_discrepancy < 1e-12);
}
