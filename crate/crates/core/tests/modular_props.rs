use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use thetavoa::lattice::{validate, EvenLattice};
use thetavoa::modular::{
    decompose_st, fit_and_verify, seeded_rng, unit_phase, UnimodularMatrix,
};
use thetavoa::qseries::{eta_eval_with_floor, jacobi_theta, HalfCharacteristic};
use thetavoa::trace::{predicted_t_phase, z_trace, ModuleRef, TracePoint};

/// `e^{−2πi⟨β_h, β_k⟩} / √|L*/L|`.
fn gauss_s_matrix(l: &EvenLattice) -> Vec<Vec<Complex64>> {
    let ws = ModuleRef::all(l);
    let scale = (ws.len() as f64).sqrt().recip();
    ws.iter()
        .map(|h| {
            ws.iter()
                .map(|k| {
                    let p = l.pair_exact(h.coset().beta(), k.coset().beta()).to_f64().unwrap();
                    unit_phase(-p) * scale
                })
                .collect()
        })
        .collect()
}

#[test]
fn fitted_s_matches_gauss_sum() {
    for (l, seed) in [(validate(vec![vec![4]]).unwrap(), 11), (validate(vec![vec![2, -1], vec![-1, 2]]).unwrap(), 12)] {
        let mut rng = seeded_rng(seed);
        let (a, report) = fit_and_verify(&l, &UnimodularMatrix::S, &mut rng, 10, 10, 0.25).unwrap();
        let oracle = gauss_s_matrix(&l);
        let gap = thetavoa::modular::max_entry_difference(&a.entries, &oracle);
        assert!(gap < 1e-9, "{gap}");
        assert!(report.max_residual <= (10.0 * a.fit_residual).max(1e-13));
    }
}

#[test]
fn fitted_t_matches_phases() {
    let l = validate(vec![vec![2, -1], vec![-1, 2]]).unwrap();
    let mut rng = seeded_rng(3);
    let (a, _) = fit_and_verify(&l, &UnimodularMatrix::T, &mut rng, 6, 4, 0.25).unwrap();
    for (h, w) in ModuleRef::all(&l).iter().enumerate() {
        for k in 0..a.size() {
            let expected = if h == k { predicted_t_phase(w) } else { Complex64::new(0.0, 0.0) };
            assert!((a.entries[h][k] - expected).norm() < 1e-10);
        }
    }
}

#[test]
fn s_matrix_reproduces_classical_table() {
    // θ_{h,k}(z/τ, −1/τ) predicted through A_S and the module dictionary
    let l = validate(vec![vec![4]]).unwrap();
    let ws = ModuleRef::all(&l);
    let mut rng = seeded_rng(5);
    let (a, _) = fit_and_verify(&l, &UnimodularMatrix::S, &mut rng, 8, 2, 0.25).unwrap();
    let i = Complex64::i();
    let rows: [(HalfCharacteristic, [Complex64; 4]); 4] = [
        (HalfCharacteristic::ZERO_ZERO, [1.0.into(), 0.0.into(), 1.0.into(), 0.0.into()]),
        (HalfCharacteristic::ZERO_HALF, [1.0.into(), 0.0.into(), (-1.0).into(), 0.0.into()]),
        (HalfCharacteristic::HALF_ZERO, [0.0.into(), 1.0.into(), 0.0.into(), 1.0.into()]),
        (HalfCharacteristic::HALF_HALF, [0.0.into(), i, 0.0.into(), -i]),
    ];
    for (z, tau) in [(Complex64::new(0.13, 0.05), Complex64::new(0.2, 1.1)), (Complex64::new(-0.2, 0.1), Complex64::new(-0.3, 0.9))] {
        let zp = z / tau;
        let eta = eta_eval_with_floor(-tau.inv(), 0.1).unwrap();
        // Z_k(0; v'; τ) with v' = (z/τ)·x, i.e. b = z/(2τ) in basis coordinates
        let rhs: Vec<Complex64> = ws
            .iter()
            .map(|w| z_trace(w, &TracePoint::new(vec![0.0.into()], vec![zp * 0.5], tau)).unwrap())
            .collect();
        for (ch, combo) in rows {
            let predicted: Complex64 = (0..4)
                .map(|h| combo[h] * (0..4).map(|k| a.entries[h][k] * rhs[k]).sum::<Complex64>())
                .sum::<Complex64>()
                * eta;
            let classical = ch.s_factor()
                * (-i * tau).sqrt()
                * (Complex64::new(0.0, PI) * z * z / tau).exp()
                * jacobi_theta(ch.swapped(), z, tau).unwrap();
            assert!((predicted - classical).norm() < 1e-8, "{ch}: {predicted} vs {classical}");
        }
    }
}

proptest! {
    #[test]
    fn st_words_reproduce_random_matrices(a in -30i64..=30, f in -30i64..=30) {
        prop_assume!(num_integer::gcd(a, f) == 1);
        // complete (a, f) to a unimodular matrix via extended Euclid
        let e = num_integer::Integer::extended_gcd(&a, &f);
        let (x, y) = (e.x * e.gcd, e.y * e.gcd);
        // a·x + f·y = 1 ⇒ (a, −y; f, x)
        let m = UnimodularMatrix::new(a, -y, f, x).unwrap();
        let w = decompose_st(&m);
        prop_assert_eq!(w.evaluate(), m);
    }
}
