//! One test per acceptance criterion. Each prints a `PASS`/`FAIL` line on
//! stderr (uncaptured) before asserting.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use randomset_core::brownian::{sample_zero_summary, SeedParams};
use randomset_core::distance::{mc_event_prob, mc_mean};
use randomset_core::poisson::{MarkFunction, PoissonModel};
use randomset_core::rng::{derive_seed, par_draws};
use randomset_core::specfun::{arcsine_phi, integrate, QuadOptions, Window};
use randomset_core::stats::ks_one_sample;
use randomset_core::tilt::{sample_seed, seed_density};
use randomset_core::verify::*;

fn seed_for(criterion: u64) -> u64 {
    derive_seed(0x5EED_0000, criterion)
}

fn line(criterion: &str, pass: bool, elapsed: Duration, limit_s: f64, detail: String) -> bool {
    let in_time = elapsed.as_secs_f64() < limit_s;
    let ok = pass && in_time;
    let _ = writeln!(
        std::io::stderr(),
        "ACCEPTANCE criterion {criterion}: {} ({detail}; {:.2}s of {limit_s}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn describe(rep: &BoundReport) -> String {
    let failing: Vec<String> = rep.criteria.iter().filter(|c| !c.pass).map(|c| format!("{} = {:.6e}", c.name, c.value)).collect();
    format!(
        "{}/{} points, worst margin {:.3e}{}",
        rep.pass.iter().filter(|p| **p).count(),
        rep.pass.len(),
        rep.worst_margin(),
        if failing.is_empty() { String::new() } else { format!(", failing: {}", failing.join("; ")) }
    )
}

#[test]
fn criterion_01_poisson_kernel() {
    let start = Instant::now();
    let cases = default_kernel_cases().unwrap();
    let rep = check_poisson_kernel(&cases, 1_000_000, seed_for(1)).unwrap();
    let single = (rep.bound[0] - (-2.0f64).exp()).abs() <= 1e-15;
    let ok = line("1 (Poisson covariance kernel)", rep.all_pass() && single, start.elapsed(), 30.0, describe(&rep));
    assert!(ok, "{rep:?}");
}

#[test]
fn criterion_02_poisson_factorization() {
    let start = Instant::now();
    let m = PoissonModel::new(2.0, vec![0.3, 0.7]).unwrap();
    let a = MarkFunction::new(vec![0.5, 1.5]).unwrap();
    let rep = check_poisson_factorization(&m, &a, 0.4, 0.6, 100_000, seed_for(2)).unwrap();
    let ok = line("2 (exact factorization)", rep.all_pass(), start.elapsed(), 10.0, format!("chi-square p {:.4}, {}", rep.actual[0], describe(&rep)));
    assert!(ok, "{rep:?}");
}

/// `e^{-x} I₀(x)` from the raw power series.
fn scaled_i0_series(x: f64) -> f64 {
    let (mut term, mut sum, mut k) = (1.0f64, 1.0f64, 0.0f64);
    while term > 1e-18 * sum {
        k += 1.0;
        term *= (x / 2.0).powi(2) / (k * k);
        sum += term;
    }
    sum * (-x).exp()
}

#[test]
fn criterion_03_arcsine_laplace() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for c in [0.1, 1.0, 5.0, 20.0, 50.0] {
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let q = integrate(
                |p| (-c * p.x).exp() / (std::f64::consts::PI * (p.from_lo * p.to_hi).sqrt()),
                Window::new(0.0, t).singular(true, true),
                QuadOptions::default(),
            )
            .unwrap()
            .value;
            let oracle = scaled_i0_series(c * t / 2.0);
            worst = worst.max(((q - oracle) / oracle).abs());
            worst = worst.max(((arcsine_phi(c, t) - oracle) / oracle).abs());
        }
    }
    let ok = line("3 (arcsine Laplace identity)", worst <= 1e-8, start.elapsed(), 1.0, format!("worst relative error {worst:.3e}"));
    assert!(ok);
}

const SEED_P: SeedParams = SeedParams { a: 1.0, beta: 1.0 };
const SEED_T: f64 = 1.0;

#[test]
fn criterion_04a_seed_vacuum_mass() {
    let start = Instant::now();
    let e = mc_event_prob(100_000, seed_for(4), |r| sample_seed(&SEED_P, SEED_T, r).unwrap(), |z| z.is_empty()).unwrap();
    let target = (-SEED_P.beta * SEED_T).exp();
    let ok = line("4a (seed vacuum mass)", e.within(target, 3.0), start.elapsed(), 60.0, format!("{:.6} vs {target:.6}, z = {:.2}", e.value, e.z_score(target)));
    assert!(ok);
}

fn anchor_ks(n: usize, seed: u64) -> (f64, usize) {
    let anchors: Vec<f64> = par_draws(seed, n, |r| sample_seed(&SEED_P, SEED_T, r).unwrap())
        .into_iter()
        .filter_map(|z| z.alpha())
        .collect();
    (ks_one_sample(&anchors, |x| (x / SEED_T).clamp(0.0, 1.0)), anchors.len())
}

#[test]
fn criterion_04b_seed_anchor_uniform() {
    let start = Instant::now();
    let (d, m) = anchor_ks(100_000, seed_for(4));
    let ok = line("4b (seed anchor KS vs uniform < 0.002)", d < 0.002, start.elapsed(), 60.0, format!("KS {d:.5} over {m} nonempty draws"));
    assert!(ok, "KS {d}");
}

#[test]
fn criterion_04c_seed_density_normalization() {
    let start = Instant::now();
    let e = mc_mean(1_000_000, seed_for(4), |r| seed_density(&SEED_P, SEED_T, &sample_zero_summary(SEED_P.a, SEED_T, r).unwrap()).unwrap()).unwrap();
    let ok = line(
        "4c (seed density normalization)",
        e.within(1.0, 3.0),
        start.elapsed(),
        60.0,
        format!("{:.6} ± {:.6}, z = {:.2}", e.value, e.stderr, e.z_score(1.0)),
    );
    assert!(ok, "{e:?}");
}

#[test]
fn companion_04_anchor_uniform_large_n() {
    let (d, m) = anchor_ks(10_000_000, derive_seed(seed_for(4), 1));
    let _ = writeln!(std::io::stderr(), "companion 4b: KS {d:.6} over {m} nonempty draws");
    assert!(d < 0.002, "KS {d}");
}

#[test]
fn companion_04_truncated_normalization() {
    // f is bounded on {α ≥ δ}, so this identity has finite variance
    let delta = 0.1;
    let e = mc_mean(1_000_000, derive_seed(seed_for(4), 2), |r| {
        let z = sample_zero_summary(SEED_P.a, SEED_T, r).unwrap();
        match z.alpha() {
            Some(a) if a < delta => 0.0,
            _ => seed_density(&SEED_P, SEED_T, &z).unwrap(),
        }
    })
    .unwrap();
    let v = (-SEED_P.beta * SEED_T).exp();
    let target = v + (1.0 - v) * (SEED_T - delta) / SEED_T;
    let _ = writeln!(std::io::stderr(), "companion 4c: truncated normalization {:.6} vs {target:.6}, z = {:.2}", e.value, e.z_score(target));
    assert!(e.within(target, 3.0), "{e:?}");
}

#[test]
fn criterion_05_diameter_tail() {
    let start = Instant::now();
    let rep = check_diam_tail(&SEED_P, &[0.02, 0.05, 0.1, 0.2], 1_000_000, seed_for(5)).unwrap();
    let ok = line("5 (diameter tail)", rep.all_pass(), start.elapsed(), 60.0, describe(&rep));
    assert!(ok, "{rep:?}");
}

#[test]
fn criterion_06_tilted_tv_and_tail() {
    let start = Instant::now();
    let g = Grids::default();
    let tv = check_tv_gamma(&g.tv_grid()).unwrap();
    let tail = check_tail(&g.tail_grid()).unwrap();
    let example = check_tv_gamma(&[(10.0, 1.0), (100.0, 1.0)]).unwrap();
    let examples_ok = example.all_pass() && (example.bound[0] - 0.6).abs() < 1e-15 && (example.bound[1] - 0.06).abs() < 1e-15;
    let ok = line(
        "6 (tilted arcsine TV and tail bounds)",
        tv.all_pass() && tail.all_pass() && tv.pass.len() == 49 && examples_ok,
        start.elapsed(),
        30.0,
        format!("TV {}; tail {}", describe(&tv), describe(&tail)),
    );
    assert!(ok);
}

#[test]
fn criterion_07_bridge_bound() {
    let start = Instant::now();
    let rep = check_bridge(1.0, 1.0, &dyadic_lambdas(4, 9)).unwrap();
    let fit = &rep.fits["main"];
    let ok = line(
        "7 (bridge bound O(u))",
        rep.all_pass() && fit.slope >= 0.9 && fit.r2 >= 0.95,
        start.elapsed(),
        10.0,
        format!("slope {:.4}, r2 {:.5}, {}", fit.slope, fit.r2, describe(&rep)),
    );
    assert!(ok, "{rep:?}");
}

const BLOCK_N: usize = 10_000_000;

struct Sweep {
    points: Vec<BlockPoint>,
    elapsed: Duration,
}

fn shared_sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let points = block_sweep(&SEED_P, 1.0, 1.0, &dyadic_lambdas(4, 9), BLOCK_N, seed_for(8), true).unwrap();
        Sweep { points, elapsed: start.elapsed() }
    })
}

#[test]
fn criterion_08_block_weights() {
    let sweep = shared_sweep();
    let start = Instant::now();
    let rep = block_weights_report(&SEED_P, &sweep.points, BLOCK_N, seed_for(8)).unwrap();
    let (f10, f01) = (&rep.fits["main"], &rep.fits["E01"]);
    let in_band = |s: f64| (1.7..=2.5).contains(&s);
    let vacuum = sweep.points.iter().all(|p| p.vacuum_log_gap == 0.0);
    let ok = line(
        "8 (block-weight matching)",
        rep.all_pass() && in_band(f10.slope) && in_band(f01.slope) && vacuum,
        sweep.elapsed + start.elapsed(),
        600.0,
        format!("slopes E10 {:.4}, E01 {:.4}, {}", f10.slope, f01.slope, describe(&rep)),
    );
    assert!(ok, "{rep:?}");
}

#[test]
fn criterion_09_hellinger_smallness() {
    let sweep = shared_sweep();
    let start = Instant::now();
    let hs = hellinger_slope_from_sweep(&sweep.points).unwrap();
    let vacuum = sweep.points.iter().all(|p| p.blocks.blocks[0].cond_term == 0.0);
    let ok = line(
        "9 (Hellinger smallness O(λ²))",
        hs.fit.slope >= 1.8 && hs.fit.r2 >= 0.95 && vacuum,
        sweep.elapsed + start.elapsed(),
        600.0,
        format!("slope {:.4}, r2 {:.5}, C {:.2}", hs.fit.slope, hs.fit.r2, hs.constant),
    );
    assert!(ok);
}

#[test]
fn invariant_hellinger_constant_stable_across_seeds() {
    let sweep = shared_sweep();
    let other = block_sweep(&SEED_P, 1.0, 1.0, &dyadic_lambdas(4, 9), BLOCK_N, derive_seed(seed_for(8), 0xB10C), false).unwrap();
    let rep = hellinger_slope_report(&sweep.points, Some(&other), BLOCK_N, seed_for(8)).unwrap();
    let _ = writeln!(std::io::stderr(), "invariant Hellinger constant: {}", describe(&rep));
    assert!(rep.all_pass(), "{rep:?}");
}

/// `H_N` summed from the small terms up.
fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

#[test]
fn criterion_10a_kakutani_product() {
    let start = Instant::now();
    let k = kakutani_product(1.0, 1.0, Dilation::Harmonic, 1000).unwrap();
    let oracle = (-harmonic(1000) / 2.0).exp();
    let first = (k.partial_products[0] - (-0.5f64).exp()).abs() < 1e-15;
    let product_ok = (k.product() - oracle).abs() <= 1e-9 && first;
    let rep = check_kakutani(1.0, 1.0, Dilation::Harmonic, 1000).unwrap();
    let overlap = check_linear_overlap(1.0, &Grids::default().overlap_t).unwrap();
    let ok = line(
        "10a (Kakutani product and linear overlap)",
        product_ok && rep.all_pass() && overlap.all_pass(),
        start.elapsed(),
        1.0,
        format!("product {:.10} vs exp(-H/2) {oracle:.10}, {}", k.product(), describe(&rep)),
    );
    assert!(ok);
}

#[test]
fn criterion_10b_kakutani_divergence_sum() {
    let start = Instant::now();
    let k = kakutani_product(1.0, 1.0, Dilation::Harmonic, 1000).unwrap();
    let sum = k.divergent_sum();
    let ok = line("10b (divergence sum at N = 1000 exceeds 3.7)", sum > 3.7, start.elapsed(), 1.0, format!("sum {sum:.6}"));
    assert!(ok, "divergence sum {sum}");
}
