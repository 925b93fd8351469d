use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torvol_core::lattice::{support_value, LatticePolytope};
use torvol_core::{Fan, Rational, RationalPoint, TorusDivisor};

fn hirzebruch(a: i64) -> Fan {
    Fan::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]], vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]]).unwrap()
}

fn square() -> Fan {
    Fan::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]]).unwrap()
}

fn fans() -> Vec<Fan> {
    vec![Fan::projective_space(1), Fan::projective_space(2), Fan::projective_space(3), square(), hirzebruch(1), hirzebruch(2)]
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

fn int(a: i64) -> Rational {
    Rational::from_integer(BigInt::from(a))
}

fn is_nef(div: &TorusDivisor) -> bool {
    let Ok(p) = div.polytope() else { return false };
    div.fan().rays().iter().zip(div.coeffs()).all(|(r, &a)| support_value(&p, &RationalPoint::from_ints(r)) == int(-a))
}

#[test]
fn support_function_takes_minus_coefficients_on_rays() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fan in fans() {
        for _ in 0..25 {
            let coeffs: Vec<i64> = (0..fan.rays().len()).map(|_| rng.random_range(-4..=4)).collect();
            let div = TorusDivisor::new(fan.clone(), coeffs.clone()).unwrap();
            let psi = div.support_function().unwrap();
            for (ray, a) in fan.rays().iter().zip(&coeffs) {
                assert_eq!(psi.eval(&RationalPoint::from_ints(ray)), Some(int(-a)));
            }
        }
    }
}

#[test]
fn sum_polytope_contains_minkowski_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut nef_pairs = 0;
    for fan in fans() {
        for _ in 0..40 {
            let n = fan.rays().len();
            let a = TorusDivisor::new(fan.clone(), (0..n).map(|_| rng.random_range(-1..=3)).collect()).unwrap();
            let b = TorusDivisor::new(fan.clone(), (0..n).map(|_| rng.random_range(-1..=3)).collect()).unwrap();
            let (Ok(pa), Ok(pb)) = (a.polytope(), b.polytope()) else { continue };
            let sum = a.add(&b).unwrap().polytope().unwrap();
            let mink = pa.minkowski_sum(&pb).unwrap();
            assert!(mink.vertices().iter().all(|v| sum.contains(v)));
            if is_nef(&a) && is_nef(&b) {
                nef_pairs += 1;
                assert_eq!(sum.vertices(), mink.vertices());
            }
        }
    }
    assert!(nef_pairs > 20);
}

#[test]
fn simplex_dilates_have_binomial_counts() {
    for d in 1..=3 {
        let simplex = LatticePolytope::standard_simplex(d);
        for l in 0..=10u32 {
            assert_eq!(simplex.lattice_points(l).len() as u64, binomial(l as u64 + d as u64, d as u64), "d={d} l={l}");
        }
    }
}

#[test]
fn monomial_map_is_projectively_the_character_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let polys = [
        LatticePolytope::standard_simplex(2),
        TorusDivisor::new(hirzebruch(1), vec![1, 1, 0, 1]).unwrap().polytope().unwrap(),
        TorusDivisor::new(square(), vec![1, 0, 2, 1]).unwrap().polytope().unwrap(),
    ];
    for p in &polys {
        let map = p.monomial_map().unwrap();
        for _ in 0..20 {
            let s: Vec<Rational> = (0..2)
                .map(|_| {
                    let num = rng.random_range(1..=9) * if rng.random_bool(0.5) { 1 } else { -1 };
                    Rational::new(BigInt::from(num), BigInt::from(rng.random_range(1..=7)))
                })
                .collect();
            let chars = map.characters(&s);
            let normalized = map.evaluate(&s);
            assert_eq!(chars.len(), normalized.len());
            for (c, v) in chars.iter().zip(&normalized) {
                assert_eq!(c, &(chars[0].clone() * v));
            }
        }
    }
}

proptest! {
    #[test]
    fn dilate_points_lie_in_dilate(l in 1u32..6, coeffs in prop::collection::vec(0i64..3, 4)) {
        let div = TorusDivisor::new(hirzebruch(1), coeffs).unwrap();
        if let Ok(p) = div.polytope() {
            let dil = p.dilate(&int(l as i64));
            for e in p.lattice_points(l) {
                prop_assert!(dil.contains(&e.to_rational()));
                prop_assert!(p.contains(&e.scaled_down(l)));
            }
        }
    }

    #[test]
    fn volume_scales_with_dilation(l in 1i64..5, coeffs in prop::collection::vec(0i64..3, 4)) {
        let div = TorusDivisor::new(square(), coeffs).unwrap();
        let p = div.polytope().unwrap();
        if p.is_full_dimensional() {
            prop_assert_eq!(p.dilate(&int(l)).volume().unwrap(), p.volume().unwrap() * int(l * l));
        }
    }
}
