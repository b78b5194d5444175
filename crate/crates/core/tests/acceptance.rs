//! Acceptance suite. Each test checks one numbered criterion and prints a
//! single `criterion N: PASS|FAIL ...` line before asserting.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture
//! --test-threads=1` to see the report in order.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use specres::estimator::{
    convergence_slope, dixmier_baseline, estimate_coefficient, estimate_with_epsilon, sweep,
};
use specres::filters::{basis_moment, build_filter, Filter, PoleSet};
use specres::localized::{circle_projection_weights, estimate_localized, Parity, WeightedSpectrum};
use specres::models::{fit_heat_coefficients, Model, SpectralEntry, Spectrum};
use specres::quadrature::integrate;
use specres::special_functions::{gamma, is_gamma_pole, upper_gamma};

fn report(n: u32, passed: bool, elapsed: Duration, limit: Duration, detail: String) {
    let in_time = elapsed <= limit;
    let verdict = if passed && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {n:>2}: {verdict} ({:.3}s of {:.0}s) {detail}",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(passed, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its runtime budget");
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Oracle coefficients must first be reproduced by the brute-force heat
/// trace fit before any estimate is compared against them.
fn fitted_oracle(model: Model) -> Vec<f64> {
    let times = [1e-3, 1e-4];
    let spectrum = model.spectrum(60.0 / times[1]).unwrap();
    let oracle = model.oracle();
    let fit = fit_heat_coefficients(&spectrum, oracle.poles(), &times).unwrap();
    for (f, c) in fit.iter().zip(oracle.coefficients()) {
        assert!((f - c).abs() <= 1e-3 * c.abs(), "{model}: fit {f} vs oracle {c}");
    }
    oracle.coefficients().to_vec()
}

fn model_filter(model: Model, k: usize) -> Filter {
    build_filter(&model.oracle().pole_set(k).unwrap(), None).unwrap()
}

#[test]
fn criterion_01_special_functions() {
    let start = Instant::now();
    let mut worst_recurrence: f64 = 0.0;
    for a in linspace(-8.0, 8.0, 97) {
        if is_gamma_pole(a) || is_gamma_pole(a + 1.0) {
            continue;
        }
        for x in [0.5, 1.0, 2.0, 5.0] {
            let next = upper_gamma(a + 1.0, x).unwrap();
            let lhs = next - a * upper_gamma(a, x).unwrap() - x.powf(a) * (-x).exp();
            worst_recurrence = worst_recurrence.max(lhs.abs() / next.abs().max(1.0));
        }
    }
    // Stated check: rel |Γ(a, 1e−8) − Γ(a)| <= 1e−6 for a in {0.5, 1, 2.5}.
    // The exact gap is γ(a, x) ≈ x^a / a, which is 2e−4 relative at a = 0.5,
    // so this sub-check cannot pass for a correct Γ(a, x); the line below
    // prints both numbers.
    let mut worst_limit: f64 = 0.0;
    let mut limit_detail = Vec::new();
    for a in [0.5, 1.0, 2.5] {
        let g = gamma(a).unwrap();
        let err = rel(upper_gamma(a, 1e-8).unwrap(), g);
        let exact_gap = 1e-8f64.powf(a) / a / g;
        limit_detail.push(format!("a={a}: {err:.2e} (exact gap {exact_gap:.2e})"));
        worst_limit = worst_limit.max(err);
    }
    let mut worst_quadrature: f64 = 0.0;
    let mut all_positive = true;
    let (ln_lo, ln_hi) = (0.01f64.ln(), 50f64.ln());
    for a in linspace(-10.0, 10.0, 20) {
        for x in linspace(ln_lo, ln_hi, 20).map(f64::exp) {
            let got = upper_gamma(a, x).unwrap();
            all_positive &= got > 0.0;
            let oracle = integrate(|t| t.powf(a - 1.0) * (-t).exp(), x, x + 60.0, 1e-12).unwrap();
            worst_quadrature = worst_quadrature.max(rel(got, oracle));
        }
    }
    let passed = worst_recurrence <= 1e-10 && worst_limit <= 1e-6 && worst_quadrature <= 1e-9 && all_positive;
    report(
        1,
        passed,
        start.elapsed(),
        Duration::from_secs(1),
        format!(
            "recurrence {worst_recurrence:.2e} (<=1e-10), limit {worst_limit:.2e} (<=1e-6; {}), \
             quadrature {worst_quadrature:.2e} (<=1e-9), positive {all_positive}",
            limit_detail.join(", ")
        ),
    );
}

#[test]
fn criterion_02_filters() {
    let start = Instant::now();
    let pole_sets: [&[f64]; 4] = [&[0.5], &[1.0, 0.0], &[0.5, 0.0], &[1.5, 1.0, 0.5]];
    let mut worst_residual: f64 = 0.0;
    let mut worst_quadrature_moment: f64 = 0.0;
    let mut worst_laplace: f64 = 0.0;
    for poles in pole_sets {
        let set = PoleSet::targeting_last(poles.to_vec()).unwrap();
        let filter = build_filter(&set, None).unwrap();
        worst_residual = worst_residual.max(filter.moment_residual().unwrap());
        for (i, &s) in poles.iter().enumerate() {
            let target = if i == set.k() { 1.0 } else { 0.0 };
            let m = filter.moment_quadrature(s).unwrap();
            worst_quadrature_moment = worst_quadrature_moment.max((m - target).abs());
        }
        for x in [0.0, 0.1, 1.0, 5.0, 20.0] {
            let numeric = filter.laplace_quadrature(x).unwrap();
            worst_laplace = worst_laplace.max((filter.laplace(x) - numeric).abs());
        }
    }
    let mut worst_closed_form: f64 = 0.0;
    for s0 in [0.5, 1.0, 1.5] {
        let filter = build_filter(&PoleSet::new(vec![s0, s0 - 1.0], 1).unwrap(), Some(&[1.0, 2.0])).unwrap();
        let g = upper_gamma(2.0 - s0, 1.0).unwrap();
        // The normalizing integral itself, checked by quadrature.
        let g_quad = integrate(|t| t.powf(1.0 - s0) * (-t).exp(), 1.0, 61.0, 1e-13).unwrap();
        assert!(rel(g, g_quad) < 1e-10);
        let expected = [-1.0 / g, 2f64.powf(s0 - 1.0) / g];
        for (w, e) in filter.weights().iter().zip(expected) {
            worst_closed_form = worst_closed_form.max(rel(*w, e));
        }
        // Same weights, written through the basis moments directly.
        assert!(rel(-basis_moment(1.0, s0 - 1.0).unwrap(), -g) < 1e-14);
    }
    let passed = worst_residual <= 1e-10
        && worst_quadrature_moment <= 1e-8
        && worst_laplace <= 1e-8
        && worst_closed_form <= 1e-10;
    report(
        2,
        passed,
        start.elapsed(),
        Duration::from_secs(5),
        format!(
            "moment residual {worst_residual:.2e} (<=1e-10), quadrature moments {worst_quadrature_moment:.2e} \
             (<=1e-8), Laplace {worst_laplace:.2e} (<=1e-8), k=1 closed form {worst_closed_form:.2e} (<=1e-10)"
        ),
    );
}

fn model_estimate(model: Model, k: usize, cutoff: f64) -> (f64, f64) {
    let oracle = fitted_oracle(model);
    let spectrum = model.spectrum(cutoff).unwrap();
    let result = estimate_coefficient(&spectrum, &model_filter(model, k), cutoff, None).unwrap();
    assert_eq!(result.oracle, Some(oracle[k]));
    (result.estimate, oracle[k])
}

#[test]
fn criterion_03_circle_leading() {
    let start = Instant::now();
    let (estimate, truth) = model_estimate(Model::Circle, 0, 1e8);
    let err = rel(estimate, truth);
    report(
        3,
        err <= 0.01,
        start.elapsed(),
        Duration::from_secs(1),
        format!("c_0 = {estimate:.8} vs sqrt(pi) = {truth:.8}, rel error {err:.2e} (<=1e-2)"),
    );
}

#[test]
fn criterion_04_circle_subleading() {
    let start = Instant::now();
    let (estimate, truth) = model_estimate(Model::Circle, 1, 1e8);
    let err = rel(estimate, truth);
    report(
        4,
        err <= 0.05,
        start.elapsed(),
        Duration::from_secs(1),
        format!("c_1 = {estimate:.8} vs {truth}, rel error {err:.2e} (<=5e-2)"),
    );
}

#[test]
fn criterion_05_torus() {
    let start = Instant::now();
    let oracle = fitted_oracle(Model::Torus2);
    let spectrum = Model::Torus2.spectrum(1e6).unwrap();
    let c0 = estimate_coefficient(&spectrum, &model_filter(Model::Torus2, 0), 1e6, None).unwrap();
    let c1 = estimate_coefficient(&spectrum, &model_filter(Model::Torus2, 1), 1e6, None).unwrap();
    let (e0, e1) = (rel(c0.estimate, oracle[0]), rel(c1.estimate, oracle[1]));
    assert!((oracle[0] - PI).abs() < 1e-15);
    report(
        5,
        e0 <= 0.02 && e1 <= 0.10,
        start.elapsed(),
        Duration::from_secs(30),
        format!(
            "c_0 = {:.8} (rel {e0:.2e} <=2e-2), c_1 = {:.8} (rel {e1:.2e} <=1e-1), {} lattice points",
            c0.estimate, c1.estimate, c0.n_terms
        ),
    );
}

#[test]
fn criterion_06_sphere() {
    let start = Instant::now();
    let oracle = fitted_oracle(Model::Sphere);
    let spectrum = Model::Sphere.spectrum(1e7).unwrap();
    let c0 = estimate_coefficient(&spectrum, &model_filter(Model::Sphere, 0), 1e7, None).unwrap();
    let c1 = estimate_coefficient(&spectrum, &model_filter(Model::Sphere, 1), 1e7, None).unwrap();
    let (e0, e1) = (rel(c0.estimate, oracle[0]), rel(c1.estimate, oracle[1]));
    report(
        6,
        e0 <= 0.02 && e1 <= 0.10,
        start.elapsed(),
        Duration::from_secs(5),
        format!(
            "c_0 = {:.8} (rel {e0:.2e} <=2e-2), c_1 = {:.8} (rel {e1:.2e} <=1e-1)",
            c0.estimate, c1.estimate
        ),
    );
}

#[test]
fn criterion_07_dixmier_comparison() {
    let start = Instant::now();
    let truth = fitted_oracle(Model::Circle)[0];
    let spectrum = Model::Circle.spectrum(1e6).unwrap();
    let filtered = estimate_coefficient(&spectrum, &model_filter(Model::Circle, 0), 1e6, None).unwrap();
    let filter_err = rel(filtered.estimate, truth);
    let baseline = gamma(0.5).unwrap() * dixmier_baseline(&spectrum, 0.5, 1e6).unwrap();
    let baseline_err = rel(baseline, truth);
    report(
        7,
        filter_err < baseline_err,
        start.elapsed(),
        Duration::from_secs(1),
        format!("filter rel error {filter_err:.2e} < logarithmic baseline rel error {baseline_err:.2e}"),
    );
}

#[test]
fn criterion_08_convergence_slope() {
    let start = Instant::now();
    fitted_oracle(Model::Circle);
    let cutoffs = [1e4, 1e5, 1e6, 1e7, 1e8];
    let spectrum = Model::Circle.spectrum(1e8).unwrap();
    let results = sweep(&spectrum, &model_filter(Model::Circle, 0), &cutoffs, None).unwrap();
    let slope = convergence_slope(&results).unwrap();
    let errors: Vec<f64> = results.iter().map(|r| r.abs_error.unwrap()).collect();
    let decreasing = errors[1..].windows(2).all(|w| w[1] < w[0]);
    report(
        8,
        (0.2..=0.8).contains(&slope) && decreasing,
        start.elapsed(),
        Duration::from_secs(5),
        format!("slope {slope:.4} in [0.2, 0.8], errors decreasing from 1e5: {decreasing} ({errors:?})"),
    );
}

#[test]
fn criterion_09_localized() {
    let start = Instant::now();
    let cutoff = 1e8;
    let filter = model_filter(Model::Circle, 0);
    let even = circle_projection_weights(cutoff, Parity::Even).unwrap();
    let result = estimate_localized(&even, &filter, cutoff, None).unwrap();
    let truth = 0.5 * PI.sqrt();
    assert_eq!(result.oracle, Some(truth));
    let err = rel(result.estimate, truth);

    let circle = Model::Circle.spectrum(cutoff).unwrap();
    let plain = estimate_coefficient(&circle, &filter, cutoff, None).unwrap();
    let identity = estimate_localized(&WeightedSpectrum::identity(&circle), &filter, cutoff, None).unwrap();
    let bitwise = identity.estimate.to_bits() == plain.estimate.to_bits();

    let u = even.reweighted(|i, _| ((i as f64) * 0.37).sin()).unwrap();
    let v = even.reweighted(|i, _| ((i as f64) * 0.11).cos()).unwrap();
    let (alpha, beta) = (0.75, -1.5);
    let combo = even
        .reweighted(|i, _| alpha * u.entries()[i].weight + beta * v.entries()[i].weight)
        .unwrap();
    let eu = estimate_localized(&u, &filter, cutoff, None).unwrap().estimate;
    let ev = estimate_localized(&v, &filter, cutoff, None).unwrap().estimate;
    let ec = estimate_localized(&combo, &filter, cutoff, None).unwrap().estimate;
    let linear = alpha * eu + beta * ev;
    let linearity = (ec - linear).abs() / linear.abs();
    report(
        9,
        err <= 0.02 && bitwise && linearity <= 1e-12,
        start.elapsed(),
        Duration::from_secs(2),
        format!(
            "even projection {:.8} vs {truth:.8} (rel {err:.2e} <=2e-2), identity bit-for-bit {bitwise}, \
             linearity {linearity:.2e} (<=1e-12)",
            result.estimate
        ),
    );
}

fn random_spectrum(rng: &mut StdRng) -> Spectrum {
    let n = rng.gen_range(1..400);
    let entries = (0..n)
        .map(|_| SpectralEntry {
            eigenvalue: rng.gen_range(1e-6..=1e6),
            multiplicity: rng.gen_range(1..5),
        })
        .collect();
    Spectrum::new(entries, "random").unwrap()
}

fn random_filter(rng: &mut StdRng) -> Filter {
    let count = rng.gen_range(1..=3);
    let mut poles = vec![rng.gen_range(-3.0..=3.0)];
    for _ in 1..count {
        let next = poles.last().unwrap() - rng.gen_range(0.3..=1.5);
        if next < -3.0 {
            break;
        }
        poles.push(next);
    }
    build_filter(&PoleSet::targeting_last(poles).unwrap(), None).unwrap()
}

#[test]
fn criterion_10_algebraic_invariants() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0010);
    let mut worst_scaling: f64 = 0.0;
    let mut truncation_exact = true;
    for _ in 0..100 {
        let spectrum = random_spectrum(&mut rng);
        let filter = random_filter(&mut rng);
        let cutoff = rng.gen_range(1.0..=1e6);
        let epsilon = 10f64.powf(rng.gen_range(-6.0..=-1.0));
        let base = estimate_with_epsilon(&spectrum, &filter, cutoff, epsilon);

        let c = 10f64.powf(rng.gen_range(-2.0..=2.0));
        let scaled = spectrum.scaled(c).unwrap();
        let moved = estimate_with_epsilon(&scaled, &filter, c * cutoff, epsilon / c);
        let expected = c.powf(-filter.poles().target()) * base;
        if base != 0.0 {
            worst_scaling = worst_scaling.max((moved - expected).abs() / expected.abs());
        } else {
            truncation_exact &= moved == 0.0;
        }

        let mut extended = spectrum.entries().to_vec();
        for _ in 0..rng.gen_range(1..20) {
            extended.push(SpectralEntry {
                eigenvalue: cutoff * rng.gen_range(1.000_001..=100.0),
                multiplicity: rng.gen_range(1..5),
            });
        }
        let extended = Spectrum::new(extended, "extended").unwrap();
        truncation_exact &= estimate_with_epsilon(&extended, &filter, cutoff, epsilon) == base;
    }
    report(
        10,
        worst_scaling <= 1e-12 && truncation_exact,
        start.elapsed(),
        Duration::from_secs(5),
        format!("scaling identity worst rel {worst_scaling:.2e} (<=1e-12), truncation exact {truncation_exact}"),
    );
}
