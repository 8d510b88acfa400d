use approx::assert_relative_eq;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use rand::Rng;
use randomset_core::distance::{mc_event_prob, mc_mean};
use randomset_core::poisson::*;
use randomset_core::rng::substream;

fn mf(v: &[f64]) -> MarkFunction {
    MarkFunction::new(v.to_vec()).unwrap()
}

#[test]
fn mean_count_and_small_rate_void() {
    let m = PoissonModel::unmarked(2.0).unwrap();
    let e = mc_mean(1_000_000, 21, |r| sample_poisson(&m, 1.0, r).unwrap().len() as f64).unwrap();
    assert!(e.within(2.0, 3.0), "{e:?}");
    let m = PoissonModel::unmarked(0.01).unwrap();
    let v = mc_event_prob(1_000_000, 22, |r| sample_poisson(&m, 1.0, r).unwrap(), |z| z.is_empty()).unwrap();
    assert!(v.within((-0.01f64).exp(), 3.0), "{v:?}");
}

#[test]
fn void_probability_grid_matches_frequencies() {
    let m = PoissonModel::new(2.0, vec![0.25, 0.75]).unwrap();
    let t = 1.0;
    for (k, len) in [0.2, 0.5, 0.9].into_iter().enumerate() {
        for (j, (mark_set, weight)) in [(vec![0], 0.25), (vec![1], 0.75), (vec![0, 1], 1.0)].into_iter().enumerate() {
            let formula = void_probability(&m, t, len, weight).unwrap();
            let e = mc_event_prob(
                1_000_000,
                100 + (3 * k + j) as u64,
                |r| sample_poisson(&m, t, r).unwrap(),
                |z| !z.atoms().iter().any(|a| a.time <= len && mark_set.contains(&a.mark)),
            )
            .unwrap();
            assert!(e.within(formula, 3.0), "len {len} marks {mark_set:?}: {e:?} vs {formula}");
        }
    }
}

#[test]
fn unit_density_normalizes() {
    let m = PoissonModel::new(1.5, vec![0.4, 0.6]).unwrap();
    let a = mf(&[0.5, 1.8]);
    let e = mc_mean(1_000_000, 23, |r| unit_density(&m, &a, 1.0, &sample_poisson(&m, 1.0, r).unwrap()).unwrap()).unwrap();
    assert!(e.within(1.0, 3.0), "{e:?}");
}

#[test]
fn kernel_monte_carlo_single_mark() {
    let m = PoissonModel::unmarked(1.0).unwrap();
    let (a, b) = (mf(&[1.0]), mf(&[3.0]));
    let analytic = unit_inner_product(&m, &a, &b, 1.0).unwrap();
    assert_relative_eq!(analytic, (-2.0f64).exp(), max_relative = 1e-14);
    let e = mc_mean(1_000_000, 24, |r| {
        let z = sample_poisson(&m, 1.0, r).unwrap();
        (unit_density(&m, &a, 1.0, &z).unwrap() * unit_density(&m, &b, 1.0, &z).unwrap()).sqrt()
    })
    .unwrap();
    assert!(e.within(analytic, 3.0), "{e:?}");
}

#[test]
fn cox_pushforward_identity() {
    let m = PoissonModel::unmarked(1.0).unwrap();
    let (lambda, s, t, k) = (1.0, 0.4, 0.6, 1usize);
    // Δ is the density of the product of halves against the full-horizon law,
    // so 1/Δ on independent halves reproduces the full-horizon law
    let weighted = mc_mean(1_000_000, 25, |r| {
        let (n1, n2) = (sample_cox(&m, s, r).unwrap().len(), sample_cox(&m, t, r).unwrap().len());
        if n1 + n2 <= k {
            1.0 / cox_delta(lambda, s, t, n1 as u64, n2 as u64)
        } else {
            0.0
        }
    })
    .unwrap();
    let direct = mc_event_prob(1_000_000, 26, |r| sample_cox(&m, s + t, r).unwrap().len(), |n| *n <= k).unwrap();
    let se = (weighted.stderr.powi(2) + direct.stderr.powi(2)).sqrt();
    assert!((weighted.value - direct.value).abs() <= 3.0 * se, "{weighted:?} vs {direct:?}");
    // reverse direction: Δ on a split full-horizon sample
    let inverse = mc_mean(1_000_000, 27, |r| {
        let z = sample_cox(&m, s + t, r).unwrap();
        let (n1, n2) = (z.count_in(0.0, s), z.count_in(s, s + t));
        if n1 + n2 <= k {
            cox_delta(lambda, s, t, n1 as u64, n2 as u64)
        } else {
            0.0
        }
    })
    .unwrap();
    let halves = mc_event_prob(
        1_000_000,
        28,
        |r| sample_cox(&m, s, r).unwrap().len() + sample_cox(&m, t, r).unwrap().len(),
        |n| *n <= k,
    )
    .unwrap();
    let se = (inverse.stderr.powi(2) + halves.stderr.powi(2)).sqrt();
    assert!((inverse.value - halves.value).abs() <= 3.0 * se, "{inverse:?} vs {halves:?}");
}

fn random_functions(n_marks: usize, count: usize, seed: u64) -> Vec<MarkFunction> {
    let mut rng = substream(seed, 0);
    (0..count).map(|_| MarkFunction::new((0..n_marks).map(|_| rng.random::<f64>() * 3.0).collect()).unwrap()).collect()
}

#[test]
fn gram_rank_equals_mark_count() {
    for n_marks in [1usize, 2, 4] {
        let w = vec![1.0 / n_marks as f64; n_marks];
        let m = PoissonModel::new(1.7, w).unwrap();
        let g = index_gram(&m, &random_functions(n_marks, n_marks + 3, n_marks as u64)).unwrap();
        let sv = g.clone().svd(false, false).singular_values;
        let top = sv.max();
        let rank = sv.iter().filter(|s| **s > 1e-9 * top).count();
        assert_eq!(rank, n_marks);
        let eig = SymmetricEigen::new(g).eigenvalues;
        assert!(eig.min() >= -1e-10, "{eig}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_t_independent(
        lambda in 0.1f64..5.0,
        a in prop::collection::vec(0.0f64..3.0, 3),
        b in prop::collection::vec(0.0f64..3.0, 3),
        t in 0.05f64..4.0,
    ) {
        let m = PoissonModel::new(lambda, vec![0.2, 0.3, 0.5]).unwrap();
        let (a, b) = (mf(&a), mf(&b));
        let c = covariance_kernel(&m, &a, &b).unwrap();
        let via_inner = unit_inner_product(&m, &a, &b, t).unwrap().ln() / t;
        prop_assert!((c - via_inner).abs() <= 1e-10 * (1.0 + c.abs()));
        prop_assert!(c <= 1e-12);
    }

    #[test]
    fn gram_is_positive_semidefinite(seed in 0u64..1000, n_marks in 1usize..5) {
        let m = PoissonModel::new(1.0, vec![1.0 / n_marks as f64; n_marks]).unwrap();
        let g = index_gram(&m, &random_functions(n_marks, 5, seed)).unwrap();
        prop_assert!(SymmetricEigen::new(g).eigenvalues.min() >= -1e-10);
    }
}
