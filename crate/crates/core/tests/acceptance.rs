//! Acceptance run: one PASS/FAIL line per criterion, with runtimes.
//!
//! Reference values come from closed forms and from quadratures written
//! here against the explicit formulas, not from the library.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use torvol_core::arithvol::{
    arithmetic_volume, classify_positivity, metric_sequence_experiment, parseval_check, sharpened_fubini_study,
    small_polynomial_search, volume_convergence_experiment, MahlerOptions,
};
use torvol_core::conjugate::{conjugate_eval, ConjugateOptions};
use torvol_core::metric::MetricModel;
use torvol_core::quadrature::{integrate_ma, l2_norm_squared_monomial, QuadratureOptions};
use torvol_core::sections::{build_section_space, count_ellipsoid_bounds, count_ellipsoid_exact, count_section_space};
use torvol_core::{Fan, LatticePoint, RationalPoint, TorusDivisor};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn entropy(x: f64) -> f64 {
    let t = |v: f64| if v > 0.0 { -v * v.ln() } else { 0.0 };
    t(x) + t(1.0 - x)
}

/// Composite Simpson on `[a, b]` after `x = a + (b − a)(1 − cos πt)/2`, which flattens
/// endpoint singularities of the derivative.
fn simpson_cosine<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let g = |t: f64| {
        let x = a + (b - a) * 0.5 * (1.0 - (std::f64::consts::PI * t).cos());
        f(x) * (b - a) * 0.5 * std::f64::consts::PI * (std::f64::consts::PI * t).sin()
    };
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn log_factorial(n: i64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `e!(l−e)!/(l+1)!`.
fn beta(e: i64, l: i64) -> f64 {
    (log_factorial(e) + log_factorial(l - e) - log_factorial(l + 1)).exp()
}

fn canonical(dim: usize) -> MetricModel {
    let mut coeffs = vec![0; dim + 1];
    coeffs[dim] = 1;
    MetricModel::canonical(&TorusDivisor::new(Fan::projective_space(dim), coeffs).unwrap()).unwrap()
}

fn criterion_1() -> Outcome {
    let oracle = 2.0 * simpson_cosine(|x| 0.5 * entropy(x), 0.0, 1.0, 200_000);
    let v = arithmetic_volume(&MetricModel::fubini_study(1), &QuadratureOptions::default()).unwrap();
    check((v - 0.5).abs() <= 1e-4 && (v - oracle).abs() <= 1e-4, format!("volume {v:.10}, entropy quadrature {oracle:.10}"))
}

fn criterion_2() -> Outcome {
    // ∫_{Δ²} −x ln x = ∫_0^1 (x² − x) ln x dx = 1/4 − 1/9, with ∫_0^1 x^k ln x = −1/(k+1)²
    let monomial_log = |k: f64| -1.0 / ((k + 1.0) * (k + 1.0));
    let oracle = 6.0 * 0.5 * 3.0 * (monomial_log(2.0) - monomial_log(1.0));
    let v = arithmetic_volume(&MetricModel::fubini_study(2), &QuadratureOptions::default()).unwrap();
    check((v - oracle).abs() <= 1e-3 && (oracle - 1.25).abs() < 1e-15, format!("volume {v:.8}, oracle {oracle:.8}"))
}

fn criterion_3() -> Outcome {
    let fs = MetricModel::fubini_study(1);
    let levels: Vec<u32> = (50..=400).collect();
    let rows = volume_convergence_experiment(&fs, &levels, None, &QuadratureOptions::default()).unwrap();
    let bracketed = rows.iter().filter(|r| r.lower_estimate <= 0.5 && 0.5 <= r.upper_estimate).count();
    let last = rows.last().unwrap();
    let width = last.upper_estimate - last.lower_estimate;
    // beta-integral fast path at the end points
    let mut fast_agrees = true;
    for l in [50i64, 400] {
        let diag: Vec<f64> = (0..=l).map(|e| beta(e, l)).collect();
        let (lo, hi) = count_ellipsoid_bounds(&diag).unwrap();
        let row = rows.iter().find(|r| r.level as i64 == l).unwrap();
        let norm = 2.0 / (l * l) as f64;
        fast_agrees &= norm * (lo - row.log_lower).abs() <= 1e-6 && norm * (hi - row.log_upper).abs() <= 1e-6;
    }
    check(
        bracketed == rows.len() && width <= 0.05 && fast_agrees && rows.iter().all(|r| r.certified),
        format!(
            "{bracketed}/{} levels bracket 0.5; l=400 bracket [{:.5}, {:.5}] width {width:.5}; beta fast path agrees: {fast_agrees}",
            rows.len(),
            last.lower_estimate,
            last.upper_estimate
        ),
    )
}

fn criterion_4() -> Outcome {
    let count = count_ellipsoid_exact(&[0.5, 0.5], 10_000_000).unwrap();
    let (lo, hi) = count_ellipsoid_bounds(&[0.5, 0.5]).unwrap();
    let space = build_section_space(&MetricModel::fubini_study(1), 1, &QuadratureOptions::default()).unwrap();
    let from_space = count_section_space(&space, Some(10_000_000)).unwrap();
    let lc = (count as f64).ln();
    check(
        count == 9 && from_space.exact == Some(9) && lo <= lc + 1e-12 && lc <= hi + 1e-12,
        format!("count {count}, section-space count {:?}, bounds [{lo:.6}, {hi:.6}] vs log 9 = {lc:.6}", from_space.exact),
    )
}

fn criterion_5() -> Outcome {
    let fs1 = MetricModel::fubini_study(1);
    let fs2 = MetricModel::fubini_study(2);
    let weighted = MetricModel::log_sum_exp(vec![RationalPoint::from_ints(&[0]), RationalPoint::from_ints(&[1])], &[2.0, 1.0], 2.0).unwrap();
    // (name, metric, ample, nef, big)
    let battery: Vec<(&str, MetricModel, bool, bool, bool)> = vec![
        ("FS P1", fs1.clone(), false, true, true),
        ("FS P1 + 0.1", fs1.scaled(0.1), true, true, true),
        ("FS P1 - 1", fs1.scaled(-1.0), false, false, false),
        ("FS P1 + FS P1", fs1.add(&fs1).unwrap(), false, true, true),
        ("FS P1 - 0.2", fs1.scaled(-0.2), false, false, true),
        ("FS P2", fs2.clone(), false, true, true),
        ("FS P2 + 0.05", fs2.scaled(0.05), true, true, true),
        ("FS P2 - 0.6", fs2.scaled(-0.6), false, false, false),
        ("FS P1 sharpness 4", fs1.sharpened(2.0).unwrap(), false, true, true),
        ("weights (2,1) on P1", weighted, false, true, true),
    ];
    let mut bad = Vec::new();
    for (name, m, ample, nef, big) in &battery {
        let r = classify_positivity(m).unwrap();
        if (r.ample, r.nef, r.big) != (*ample, *nef, *big) || !r.bigness_agrees || (r.ample && !r.nef) {
            bad.push(format!("{name}: got ample={} nef={} big={} agree={}", r.ample, r.nef, r.big, r.bigness_agrees));
        }
    }
    check(bad.is_empty(), if bad.is_empty() { format!("{} metrics classified as expected", battery.len()) } else { bad.join("; ") })
}

fn criterion_6() -> Outcome {
    let v1 = arithmetic_volume(&canonical(1), &QuadratureOptions::default()).unwrap();
    let v2 = arithmetic_volume(&canonical(2), &QuadratureOptions::default()).unwrap();
    let found = small_polynomial_search(2, 2, 4096, &MahlerOptions::default()).unwrap();
    let small: Vec<_> = found.iter().filter(|p| p.torus_sup <= 1.0 + 1e-12).collect();
    let ok_small = small.iter().all(|p| {
        p.parseval.is_unit_monomial && p.polynomial.is_monomial() && p.mahler.is_some_and(|m| m <= 1e-6)
    });
    let parseval_ok = found.iter().all(|p| {
        let r = parseval_check(&p.polynomial);
        (r.numerical_mass - r.mass as f64).abs() <= 1e-8 && r.is_unit_monomial == (r.mass == 1)
    });
    check(
        v1 == 0.0 && v2 == 0.0 && found.len() == 124 && small.len() == 6 && ok_small && parseval_ok,
        format!("canonical volumes {v1}, {v2}; {} polynomials, {} with sup ≤ 1, all ±X^ν: {ok_small}; Parseval: {parseval_ok}", found.len(), small.len()),
    )
}

fn criterion_7() -> Outcome {
    let g = |u: f64| -0.5 * (1.0 + (-2.0 * u).exp()).ln();
    let grid: Vec<(f64, f64)> = (0..=60_000).map(|i| -30.0 + i as f64 * 1e-3).map(|u| (u, g(u))).collect();
    let fs = MetricModel::fubini_study(1);
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let brute = grid.iter().map(|(u, gu)| x * u - gu).fold(f64::INFINITY, f64::min);
        let xq = RationalPoint::parse(&[&format!("{i}/100")]).unwrap();
        let newton = conjugate_eval(&fs, &xq, &ConjugateOptions::default()).unwrap().value;
        worst = worst.max((brute - newton).abs());
    }
    check(worst <= 1e-4, format!("max |Newton − grid| over 101 points = {worst:.3e}"))
}

fn criterion_8() -> Outcome {
    let opts = QuadratureOptions::default();
    let m1 = integrate_ma(&MetricModel::fubini_study(1), |_| 1.0, &opts).unwrap();
    let m2 = integrate_ma(&MetricModel::fubini_study(2), |_| 1.0, &opts).unwrap();
    let fs = MetricModel::fubini_study(1);
    let mut worst: f64 = 0.0;
    for l in 1..=10i64 {
        for e in 0..=l {
            let a = l2_norm_squared_monomial(&fs, &LatticePoint::new(vec![e]), l as u32, &opts).unwrap();
            worst = worst.max((a.value() - beta(e, l)).abs() / beta(e, l));
        }
    }
    check(
        (m1 - 1.0).abs() <= 1e-5 && (m2 - 1.0).abs() <= 1e-5 && worst <= 1e-6,
        format!("masses {m1:.10}, {m2:.10}; max relative error of a_e vs beta integrals {worst:.3e}"),
    )
}

fn criterion_9() -> Outcome {
    let fs = MetricModel::fubini_study(1);
    let opts = QuadratureOptions::default();
    let direct = |lambda: f64| {
        let f = |x: f64| 0.5 * entropy(x) + lambda;
        if lambda >= 0.0 {
            return 2.0 * simpson_cosine(f, 0.0, 1.0, 200_000);
        }
        // zero of H/2 + λ on (0, 1/2) by bisection
        let (mut a, mut b) = (0.0, 0.5);
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if f(c) < 0.0 {
                a = c;
            } else {
                b = c;
            }
        }
        2.0 * simpson_cosine(f, b, 1.0 - b, 200_000)
    };
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for lambda in [-0.2, -0.05, 0.0, 0.05, 0.2] {
        let v = arithmetic_volume(&fs.scaled(lambda), &opts).unwrap();
        worst = worst.max((v - direct(lambda)).abs());
        values.push(v);
    }
    let monotone = values.windows(2).all(|w| w[0] < w[1]);
    let continuous = (values[1] - values[2]).abs() < 0.2 && (values[3] - values[2]).abs() < 0.2;
    let slope = (values[4] - values[3]) / 0.15;
    check(
        worst <= 1e-5 && monotone && continuous && (slope - 2.0).abs() <= 1e-4,
        format!("max deviation from direct recomputation {worst:.3e}; volumes {values:.6?}; slope above 0 = {slope:.8}"),
    )
}

fn criterion_10() -> Outcome {
    let ks = [1u32, 2, 5, 10, 20, 50];
    let rows = metric_sequence_experiment(|k| sharpened_fubini_study(1, k), &canonical(1), &ks, &QuadratureOptions::default()).unwrap();
    let worst = rows.iter().map(|r| (r.volume - 1.0 / (2.0 * r.k as f64)).abs()).fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| w[1].volume < w[0].volume && w[1].distance < w[0].distance);
    let last = rows.last().unwrap();
    check(
        worst <= 1e-4 && decreasing && last.limit_volume == 0.0 && last.volume < 0.011,
        format!(
            "max |vol − 1/(2k)| = {worst:.3e}; k=50 volume {:.6}, distance {:.3e}; limit volume {}",
            last.volume, last.distance, last.limit_volume
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 volume of FS on P1 is 1/2", Duration::from_secs(1), criterion_1),
        ("2 volume of FS on P2 is 5/4", Duration::from_secs(30), criterion_2),
        ("3 sandwich bounds bracket 1/2 for l in 50..=400", Duration::from_secs(120), criterion_3),
        ("4 exact tiny ellipsoid count", Duration::from_secs(1), criterion_4),
        ("5 positivity battery", Duration::from_secs(1), criterion_5),
        ("6 canonical metric and small polynomials", Duration::from_secs(60), criterion_6),
        ("7 Newton conjugate vs grid minimization", Duration::from_secs(1), criterion_7),
        ("8 Monge-Ampere mass and beta integrals", Duration::from_secs(30), criterion_8),
        ("9 shifted volumes", Duration::from_secs(10), criterion_9),
        ("10 sharpened sequence", Duration::from_secs(10), criterion_10),
    ];
    let mut failures = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= limit;
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.3}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failures == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 10 criteria fail");
        ExitCode::FAILURE
    }
}
