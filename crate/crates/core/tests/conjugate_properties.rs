use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torvol_core::conjugate::{
    conjugate_eval, conjugate_max, fenchel_young_residual, sup_norm_monomial, ConjugateOptions, ConjugateSolver,
};
use torvol_core::metric::MetricModel;
use torvol_core::{LatticePoint, Rational, RationalPoint};

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Uniform rational point of the standard simplex with denominator `den`.
fn random_simplex_point(rng: &mut ChaCha8Rng, d: usize, den: i64) -> RationalPoint {
    loop {
        let c: Vec<i64> = (0..d).map(|_| rng.random_range(0..=den)).collect();
        if c.iter().sum::<i64>() <= den {
            return RationalPoint::new(c.iter().map(|&x| rat(x, den)).collect());
        }
    }
}

fn models() -> Vec<MetricModel> {
    let fs1 = MetricModel::fubini_study(1);
    let fs2 = MetricModel::fubini_study(2);
    vec![fs1.clone(), fs2.clone(), fs2.sharpened(2.5).unwrap().scaled(-0.3)]
}

#[test]
fn shift_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let opts = ConjugateOptions::default();
    for m in models() {
        for _ in 0..20 {
            let x = random_simplex_point(&mut rng, m.dim(), 37);
            let base = conjugate_eval(&m, &x, &opts).unwrap().value;
            for lambda in [0.1, 1.0] {
                let shifted = conjugate_eval(&m.scaled(lambda), &x, &opts).unwrap().value;
                assert!((shifted - base - lambda).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn conjugate_is_concave() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for m in models() {
        let solver = ConjugateSolver::new(&m, ConjugateOptions::default());
        for _ in 0..1000 {
            let x = random_simplex_point(&mut rng, m.dim(), 60);
            let y = random_simplex_point(&mut rng, m.dim(), 60);
            let mid = x.add(&y).scale(&rat(1, 2));
            let (fx, fy, fm) = (solver.eval(&x).unwrap().value, solver.eval(&y).unwrap().value, solver.eval(&mid).unwrap().value);
            assert!(fm >= 0.5 * (fx + fy) - 1e-8, "{x} {y}");
        }
    }
}

#[test]
fn maximum_is_minus_g_at_origin() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for m in models() {
        let (max, argmax) = conjugate_max(&m).unwrap();
        let solver = ConjugateSolver::new(&m, ConjugateOptions::default());
        for _ in 0..200 {
            let x = random_simplex_point(&mut rng, m.dim(), 50);
            assert!(solver.eval(&x).unwrap().value <= max + 1e-12);
        }
        assert!((solver.eval_interior(&argmax).unwrap().value - max).abs() <= 1e-10);
    }
}

#[test]
fn sup_norms_are_multiplicative() {
    for m in models() {
        let d = m.dim();
        for l in 1..=4u32 {
            for e in m.polytope().lattice_points(l) {
                let base = sup_norm_monomial(&m, &e, l).unwrap();
                for k in 2..=5 {
                    let ke = LatticePoint::new(e.coords().iter().map(|c| c * k as i64).collect());
                    let v = sup_norm_monomial(&m, &ke, k * l).unwrap();
                    assert!((v - base.powi(k as i32)).abs() <= 1e-10 * base.powi(k as i32).max(1.0), "d={d} e={e:?}");
                }
            }
        }
    }
}

#[test]
fn conjugate_reverses_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let fs = MetricModel::fubini_study(1);
    let lower = MetricModel::log_sum_exp(vec![RationalPoint::from_ints(&[0]), RationalPoint::from_ints(&[1])], &[2.0, 1.0], 2.0).unwrap();
    let opts = ConjugateOptions::default();
    for _ in 0..100 {
        let x = random_simplex_point(&mut rng, 1, 97);
        assert!(conjugate_eval(&lower, &x, &opts).unwrap().value >= conjugate_eval(&fs, &x, &opts).unwrap().value - 1e-12);
    }
}

proptest! {
    #[test]
    fn fenchel_young_inequality(num in 0i64..=64, u in -20.0f64..20.0) {
        let fs = MetricModel::fubini_study(1);
        let r = fenchel_young_residual(&fs, &RationalPoint::new(vec![rat(num, 64)]), &[u]).unwrap();
        prop_assert!(r >= -1e-9);
    }

    #[test]
    fn fenchel_young_inequality_p2(a in 0i64..=20, b in 0i64..=20, u0 in -10.0f64..10.0, u1 in -10.0f64..10.0) {
        prop_assume!(a + b <= 20);
        let fs = MetricModel::fubini_study(2);
        let x = RationalPoint::new(vec![rat(a, 20), rat(b, 20)]);
        prop_assert!(fenchel_young_residual(&fs, &x, &[u0, u1]).unwrap() >= -1e-9);
    }
}
