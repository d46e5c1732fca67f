//! Check lists for each `verify` suite.

use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use thetavoa::fock::{build_basis, fock_phase_graded_trace, verify_trace_recursion};
use thetavoa::involutions::{
    closed_form_count, count_with_fixed, exponential_regroup_check, list_involutions,
    recurrence_counts, verify_multinomial_identity, verify_sign_lemma,
};
use thetavoa::lattice::{validate, EvenLattice};
use thetavoa::modular::{
    fit_and_verify, max_entry_difference, random_word, sample_points, seeded_rng, unit_phase,
    verify_cocycle, TransitionMatrix, UnimodularMatrix,
};
use thetavoa::qseries::{
    dedekind_eta, eta_eval_with_floor, g2_eval, g2_eval_with_floor, jacobi_theta_with_floor,
    p2_eval_with_floor, weierstrass_p_with_floor, HalfCharacteristic,
};
use thetavoa::trace::{phase_graded_character, predicted_t_phase, theta_w_with_floor, z_trace_with_floor, ModuleRef, TracePoint};

use crate::config::RunConfig;
use crate::runner::{Check, Measure};

/// Inputs shared by every check of a run.
#[derive(Clone, Debug)]
pub struct Context {
    pub lattice: EvenLattice,
    pub config: RunConfig,
    pub seed: u64,
}

impl Context {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        seeded_rng(self.seed.wrapping_mul(1_000_003).wrapping_add(stream))
    }

    fn floor(&self) -> f64 {
        self.config.im_tau_floor
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|x − y|` relative to `max(|x|, |y|, 1)`.
fn rel(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / x.norm().max(y.norm()).max(1.0)
}

fn upper_tau(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-0.5..=0.5), rng.gen_range(0.5..=2.0))
}

fn small_z(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(r_min..=r_max), rng.gen_range(0.0..2.0 * PI))
}

fn rank_one() -> EvenLattice {
    validate(vec![vec![4]]).expect("[[4]] is a valid lattice")
}

pub fn special_functions(ctx: &Arc<Context>) -> Vec<Check> {
    let tol = ctx.config.tolerance("special-functions");
    let points = ctx.config.cutoff("points");
    let mut checks = Vec::new();

    let x = ctx.clone();
    checks.push(Check::new("eta under tau -> -1/tau", tol, move || {
        let mut rng = x.rng(101);
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let tau = upper_tau(&mut rng);
            let lhs = eta_eval_with_floor(-tau.inv(), x.floor())?;
            let rhs = (-Complex64::i() * tau).sqrt() * eta_eval_with_floor(tau, x.floor())?;
            worst = worst.max(rel(lhs, rhs));
        }
        Ok(Measure::error(worst))
    }));

    let x = ctx.clone();
    checks.push(Check::new("eta under tau -> tau+1", tol, move || {
        let mut rng = x.rng(102);
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let tau = upper_tau(&mut rng);
            let lhs = eta_eval_with_floor(tau + 1.0, x.floor())?;
            let rhs = unit_phase(1.0 / 24.0) * eta_eval_with_floor(tau, x.floor())?;
            worst = worst.max(rel(lhs, rhs));
        }
        Ok(Measure::error(worst))
    }));

    checks.push(Check::new("eta expansion against pentagonal numbers", 0.0, || {
        let order = 40i64;
        let eta = dedekind_eta(order as u32);
        let mut expected = vec![0.0; order as usize + 1];
        for j in -10i64..=10 {
            let k = j * (3 * j - 1) / 2;
            if k <= order {
                expected[k as usize] += if j % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
        let bad = (0..=order)
            .filter(|&k| eta.coeff(24 * k + 1).unwrap_or_default() != c(expected[k as usize], 0.0))
            .count();
        Ok(Measure::mismatches(bad, format!("coefficients through q^{order}")))
    }));

    let laws: [(&str, u64); 3] = [("G2", 103), ("P2", 104), ("wp", 105)];
    for (law, stream) in laws {
        let x = ctx.clone();
        checks.push(Check::new(format!("{law} law under S, T, TST"), tol, move || {
            let mut rng = x.rng(stream);
            let (s, t) = (UnimodularMatrix::S, UnimodularMatrix::T);
            let floor = x.floor();
            let mut worst: f64 = 0.0;
            for alpha in [s, t, t.mul(&s).mul(&t)] {
                let (_, _, f, d) = alpha.entries();
                for p in sample_points(&mut rng, &alpha, 1, points) {
                    let tau = p.tau;
                    let j = tau * f as f64 + d as f64;
                    let anomaly = c(0.0, 2.0 * PI) * f as f64 * j;
                    let z = small_z(&mut rng, 0.05, 0.3);
                    let at = alpha.act_tau(tau);
                    let (lhs, rhs) = match law {
                        "G2" => (g2_eval_with_floor(at, floor)?, j * j * g2_eval_with_floor(tau, floor)? - anomaly),
                        "P2" => (
                            p2_eval_with_floor(z / j, at, floor)?,
                            j * j * p2_eval_with_floor(z, tau, floor)? - anomaly,
                        ),
                        _ => (
                            weierstrass_p_with_floor(z / j, at, floor)?,
                            j * j * weierstrass_p_with_floor(z, tau, floor)?,
                        ),
                    };
                    worst = worst.max(rel(lhs, rhs));
                }
            }
            Ok(Measure::error(worst))
        }));
    }

    checks.push(Check::new("G2(i) = pi", tol.min(1e-12), || {
        Ok(Measure::error((g2_eval(c(0.0, 1.0))? - c(PI, 0.0)).norm()))
    }));
    checks
}

pub fn theta_classical(ctx: &Arc<Context>) -> Vec<Check> {
    let tol = ctx.config.tolerance("theta-classical");
    let points = ctx.config.cutoff("points");
    let mut checks = Vec::new();
    for (row, ch) in HalfCharacteristic::all().into_iter().enumerate() {
        let x = ctx.clone();
        checks.push(Check::new(format!("theta{ch} under tau -> -1/tau"), tol, move || {
            let mut rng = x.rng(200 + row as u64);
            let mut worst: f64 = 0.0;
            for _ in 0..points {
                let tau = upper_tau(&mut rng);
                let z = small_z(&mut rng, 0.0, 0.4);
                let lhs = jacobi_theta_with_floor(ch, z / tau, -tau.inv(), x.floor())?;
                let rhs = ch.s_factor()
                    * (-Complex64::i() * tau).sqrt()
                    * (c(0.0, PI) * z * z / tau).exp()
                    * jacobi_theta_with_floor(ch.swapped(), z, tau, x.floor())?;
                worst = worst.max(rel(lhs, rhs));
            }
            Ok(Measure::error(worst))
        }));
    }
    for (row, ch) in HalfCharacteristic::all().into_iter().enumerate() {
        let x = ctx.clone();
        checks.push(Check::new(format!("theta{ch} from [[4]] module thetas"), tol, move || {
            let ws = ModuleRef::all(&rank_one());
            let mut rng = x.rng(210 + row as u64);
            let i = Complex64::i();
            let mut worst: f64 = 0.0;
            for _ in 0..points {
                let tau = upper_tau(&mut rng);
                let z = small_z(&mut rng, 0.0, 0.4);
                // z·x with x = e/2
                let a = [z * 0.5];
                let th = ws
                    .iter()
                    .map(|w| theta_w_with_floor(w, &a, tau, x.floor()))
                    .collect::<thetavoa::Result<Vec<_>>>()?;
                let combo = match row {
                    0 => th[0] + th[2],
                    1 => th[0] - th[2],
                    2 => th[1] + th[3],
                    _ => i * th[1] - i * th[3],
                };
                worst = worst.max(rel(combo, jacobi_theta_with_floor(ch, z, tau, x.floor())?));
            }
            Ok(Measure::error(worst))
        }));
    }
    checks
}

pub fn combinatorics(ctx: &Arc<Context>) -> Vec<Check> {
    let sign_n = ctx.config.cutoff("sign_lemma_n");
    let count_n = ctx.config.cutoff("count_n");
    let multi = ctx.config.cutoff("multinomial");
    let degree = ctx.config.cutoff("regroup_degree");
    vec![
        Check::new(format!("sign lemma for n <= {sign_n}"), 0.0, move || {
            let mut bad = 0;
            let mut checked = 0;
            for n in 2..=sign_n {
                for sigma in list_involutions(n)? {
                    if !sigma.is_identity() {
                        checked += 1;
                        bad += usize::from(!verify_sign_lemma(&sigma)?);
                    }
                }
            }
            Ok(Measure::mismatches(bad, format!("{checked} involutions")))
        }),
        Check::new(format!("involution count by fixed points for n <= {count_n}"), 0.0, move || {
            let mut bad = 0;
            let mut checked = 0;
            for n in 1..=count_n {
                for r in (n % 2..=n).step_by(2) {
                    checked += 1;
                    bad += usize::from(count_with_fixed(n, r)? != closed_form_count((n - r) / 2, r));
                }
            }
            Ok(Measure::mismatches(bad, format!("{checked} (n, r) pairs")))
        }),
        Check::new(format!("total involution count recurrence for n <= {count_n}"), 0.0, move || {
            let rec = recurrence_counts(count_n);
            let mut bad = 0;
            for n in 1..=count_n {
                let total: BigInt = rec[n].iter().sum();
                bad += usize::from(BigInt::from(list_involutions(n)?.len()) != total);
            }
            Ok(Measure::mismatches(bad, format!("n = 1..{count_n}")))
        }),
        Check::new(format!("multinomial identity for p, r <= {multi}"), 0.0, move || {
            let bad = (0..=multi)
                .flat_map(|p| (0..=multi).map(move |r| (p, r)))
                .filter(|&(p, r)| !verify_multinomial_identity(p, r))
                .count();
            Ok(Measure::mismatches(bad, format!("{} pairs", (multi + 1) * (multi + 1))))
        }),
        Check::new(format!("exponential regrouping through degree {degree}"), 0.0, move || {
            let r = exponential_regroup_check(degree, degree)?;
            Ok(Measure::mismatches(r.mismatches.len(), format!("{} monomials", r.monomials)))
        }),
    ]
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn npoint(ctx: &Arc<Context>) -> Vec<Check> {
    let tol = ctx.config.tolerance("npoint");
    let grade = ctx.config.cutoff("fock_grade") as i64;
    let span = ctx.config.cutoff("x_span") as u32;
    let rank = ctx.lattice.rank();
    let mut checks = Vec::new();
    for w in ModuleRef::all(&ctx.lattice) {
        let label = w.coset().to_string();
        let module = w.clone();
        checks.push(Check::new(format!("two-point recursion on W{label}"), tol, move || {
            let v1: Vec<Complex64> = (0..rank).map(|i| c(if i == 0 { 0.5 } else { 0.25 }, 0.0)).collect();
            let v2: Vec<Complex64> = (0..rank).map(|i| c(0.5 - 0.1 * i as f64, 0.1 * i as f64)).collect();
            let r = verify_trace_recursion(&module, &[v1, v2], span, &rational(grade, 1))?;
            Ok(Measure::error(r.max_discrepancy).with_detail(format!("{} coefficients", r.coefficients_compared)))
        }));
        let module = w;
        checks.push(Check::new(format!("Fock trace against closed form on W{label}"), 0.0, move || {
            let cutoff = rational(grade, 1);
            let basis = build_basis(&module, &cutoff)?;
            let phases = [
                vec![rational(0, 1); rank],
                vec![rational(1, 3); rank],
                (0..rank).map(|i| if i % 2 == 0 { rational(3, 8) } else { rational(1, 5) }).collect(),
            ];
            let mut bad = 0;
            let mut graded = 0;
            for a in &phases {
                let fock = fock_phase_graded_trace(&basis, a);
                let closed = phase_graded_character(&module, a, &cutoff)?;
                graded += fock.len().max(closed.len());
                let grades: std::collections::BTreeSet<_> = fock.keys().chain(closed.keys()).collect();
                bad += grades.into_iter().filter(|g| fock.get(*g) != closed.get(*g)).count();
            }
            Ok(Measure::mismatches(bad, format!("{graded} graded pieces")))
        }));
    }
    checks
}

fn s_fit(ctx: &Context) -> thetavoa::Result<(TransitionMatrix, f64)> {
    let mut rng = ctx.rng(400);
    let fit = ctx.config.fit_samples(&ctx.lattice);
    let holdout = ctx.config.cutoff("holdout");
    let (a, report) = fit_and_verify(&ctx.lattice, &UnimodularMatrix::S, &mut rng, fit, holdout, ctx.floor())?;
    Ok((a, report.max_residual))
}

pub fn main_theorem(ctx: &Arc<Context>) -> Vec<Check> {
    let tol = ctx.config.tolerance("main-theorem");
    let points = ctx.config.cutoff("points");
    let mut checks = Vec::new();

    let x = ctx.clone();
    checks.push(Check::new("T-case diagonal phases", tol, move || {
        let mut rng = x.rng(401);
        let mut worst: f64 = 0.0;
        for p in sample_points(&mut rng, &UnimodularMatrix::T, x.lattice.rank(), points) {
            let apb: Vec<Complex64> = p.a.iter().zip(&p.b).map(|(a, b)| a + b).collect();
            for w in ModuleRef::all(&x.lattice) {
                let lhs = z_trace_with_floor(&w, &TracePoint::new(p.a.clone(), p.b.clone(), p.tau + 1.0), x.floor())?;
                let rhs = z_trace_with_floor(&w, &TracePoint::new(apb.clone(), p.b.clone(), p.tau), x.floor())?;
                worst = worst.max(rel(lhs, predicted_t_phase(&w) * rhs));
            }
        }
        Ok(Measure::error(worst))
    }));

    let x = ctx.clone();
    checks.push(Check::new("S-case holdout residual", tol, move || {
        let (a, holdout) = s_fit(&x)?;
        Ok(Measure::error(holdout).with_detail(format!("fit residual {:e}, condition {:e}", a.fit_residual, a.condition)))
    }));

    let x = ctx.clone();
    checks.push(Check::new("S-case entry moduli", tol, move || {
        let (a, _) = s_fit(&x)?;
        let expected = (a.size() as f64).powf(-0.5);
        let worst = a.entries.iter().flatten().map(|z| (z.norm() - expected).abs()).fold(0.0, f64::max);
        Ok(Measure::error(worst))
    }));

    let x = ctx.clone();
    checks.push(Check::new("S-case matrix against discriminant Gauss sum", tol, move || {
        let (a, _) = s_fit(&x)?;
        let scale = (a.size() as f64).sqrt().recip();
        let oracle: Vec<Vec<Complex64>> = a
            .labels
            .iter()
            .map(|h| {
                a.labels
                    .iter()
                    .map(|k| {
                        let p = x.lattice.pair_exact(h.beta(), k.beta()).to_f64().unwrap_or(f64::NAN);
                        unit_phase(-p) * scale
                    })
                    .collect()
            })
            .collect();
        Ok(Measure::error(max_entry_difference(&a.entries, &oracle)))
    }));

    let words = ctx.config.cutoff("words");
    let length = ctx.config.cutoff("word_length");
    let x = ctx.clone();
    checks.push(Check::new(format!("{words} random S,T words"), tol, move || {
        let mut rng = x.rng(402);
        let fit = x.config.fit_samples(&x.lattice);
        let holdout = x.config.cutoff("holdout");
        let mut worst: f64 = 0.0;
        let mut seen = Vec::new();
        for _ in 0..words {
            let alpha = random_word(&mut rng, length).evaluate();
            let (_, report) = fit_and_verify(&x.lattice, &alpha, &mut rng, fit, holdout, x.floor())?;
            worst = worst.max(report.max_residual);
            seen.push(alpha.to_string());
        }
        Ok(Measure::error(worst).with_detail(seen.join(" ")))
    }));

    let x = ctx.clone();
    checks.push(Check::new("cocycle for (S,T), (T,S), (S,S)", tol, move || {
        let mut rng = x.rng(403);
        let fit = x.config.fit_samples(&x.lattice);
        let mut fitted = |alpha: UnimodularMatrix| -> thetavoa::Result<TransitionMatrix> {
            Ok(fit_and_verify(&x.lattice, &alpha, &mut rng, fit, 1, x.floor())?.0)
        };
        let (s, t) = (UnimodularMatrix::S, UnimodularMatrix::T);
        let (a_s, a_t) = (fitted(s)?, fitted(t)?);
        let mut worst: f64 = 0.0;
        for (p, q, ap, aq) in [(s, t, &a_s, &a_t), (t, s, &a_t, &a_s), (s, s, &a_s, &a_s)] {
            let apq = fitted(p.mul(&q))?;
            worst = worst.max(verify_cocycle(ap, aq, &apq)?.max_difference);
        }
        Ok(Measure::error(worst))
    }));
    checks
}
