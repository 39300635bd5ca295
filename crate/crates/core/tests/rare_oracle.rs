use rand_distr::{Distribution, Exp1};
use yule_bins_core::geometry::Interval;
use yule_bins_core::quad::QuadratureSpec;
use yule_bins_core::rare::{exact_exp_term, mc_oracle_terms, representation_term};
use yule_bins_core::rng::RngStream;

#[test]
fn representation_terms_match_simulation() {
    let n = 1e6;
    let spec = QuadratureSpec::with_tolerance(1e-9);
    let window = Interval::positive_half_line();
    for (rho, seed) in [(1.0f64, 10), (1.5, 11), (2.0, 12)] {
        let k = rho.floor() as usize;
        let (terms, _) = mc_oracle_terms(n, 100, rho, window, 40_000, seed).unwrap();
        for i in [25usize, 50, 100] {
            let (q, _) = representation_term(n, i, rho, window, &spec).unwrap();
            let mc = &terms[i - k - 1];
            let tol = 0.02 * q + 3.0 * mc.stderr;
            assert!((q - mc.value).abs() <= tol, "rho={rho} i={i}: {q} vs {} ± {}", mc.value, mc.stderr);
        }
    }
}

#[test]
fn windowed_terms_match_simulation() {
    let (n, rho) = (1e6, 2.0);
    let spec = QuadratureSpec::with_tolerance(1e-9);
    let window = Interval::new(3.0, 5.0).unwrap();
    let (terms, _) = mc_oracle_terms(n, 60, rho, window, 40_000, 13).unwrap();
    for i in [20usize, 60] {
        let (q, _) = representation_term(n, i, rho, window, &spec).unwrap();
        let mc = &terms[i - 3];
        assert!((q - mc.value).abs() <= 0.02 * q + 3.0 * mc.stderr, "i={i}: {q} vs {}", mc.value);
    }
}

#[test]
fn exact_law_matches_direct_draws() {
    // P_i = e^{-ρ t_{i-1}} (1 - e^{-ρ E_i / i}) with t_{i-1} a sum of scaled exponentials
    let (n, rho, i) = (1e4, 0.5, 30usize);
    let spec = QuadratureSpec::with_tolerance(1e-10);
    let (q, _) = exact_exp_term(n, i, rho, &spec).unwrap();
    let reps = 200_000;
    let mut rng = RngStream::new(14, 0).rng();
    let mut s = 0.0;
    let mut s2 = 0.0;
    for _ in 0..reps {
        let mut t = 0.0;
        for j in 1..i {
            let e: f64 = Exp1.sample(&mut rng);
            t += e / j as f64;
        }
        let e: f64 = Exp1.sample(&mut rng);
        let p = (-rho * t).exp() * -(-rho * e / i as f64).exp_m1();
        let v = (-n * p).exp();
        s += v;
        s2 += v * v;
    }
    let mean = s / reps as f64;
    let se = ((s2 / reps as f64 - mean * mean) / reps as f64).sqrt();
    assert!((q - mean).abs() <= 4.0 * se, "{q} vs {mean} ± {se}");
}

#[test]
fn representation_approaches_exact_law() {
    let (n, rho) = (1e7, 2.0);
    let spec = QuadratureSpec::with_tolerance(1e-9);
    let rel = |i| {
        let (r, _) = representation_term(n, i, rho, Interval::positive_half_line(), &spec).unwrap();
        let (e, _) = exact_exp_term(n, i, rho, &spec).unwrap();
        ((r - e) / e).abs()
    };
    let (a, b) = (rel(10), rel(100));
    assert!(b < a && b < 0.05, "{a} {b}");
}
