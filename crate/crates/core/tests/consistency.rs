//! Monte Carlo checks of the estimator's large-sample behavior.

use boundreg::simgen::{regression_value, stream_seed};
use boundreg::{
    local_constant_fit, make_dataset, minimize_theta, Bandwidths, CriterionKind, CriterionSpec,
    Dataset, Design, Family, Model, ScenarioSpec, SearchOptions, TransformSpec,
};
use rayon::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn estimate(data: &Dataset, kind: CriterionKind) -> f64 {
    let n = data.len();
    minimize_theta(
        data,
        Family::YeoJohnson,
        &Family::YeoJohnson.default_box(),
        Bandwidths::rule(n, 2.0),
        &CriterionSpec::new(kind),
        SearchOptions::default(),
    )
    .unwrap()
    .theta_hat[0]
}

fn dataset(model: Model, theta0: f64, n: usize, seed: u64) -> Dataset {
    make_dataset(&ScenarioSpec {
        model,
        theta0,
        n,
        design: Design::Fixed,
        seed: stream_seed(77, &[n as u64, seed]),
    })
    .unwrap()
}

fn median_abs_error(model: Model, theta0: f64, n: usize, seeds: u64) -> f64 {
    let errs: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|s| (estimate(&dataset(model, theta0, n, s), CriterionKind::Tcm) - theta0).abs())
        .collect();
    median(errs)
}

#[test]
fn theta_error_shrinks_with_n() {
    let errs: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&n| median_abs_error(Model::ParabolaWeibull, 0.5, n, 50))
        .collect();
    // one inversion of at most 10% is tolerated
    let inversions: Vec<f64> = errs
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| w[1] / w[0] - 1.0)
        .collect();
    assert!(
        inversions.len() <= 1 && inversions.iter().all(|&r| r <= 0.10),
        "{errs:?}"
    );
    assert!(errs[2] < errs[0], "{errs:?}");
}

#[test]
fn identity_truth_is_recovered() {
    // theta0 = 1 makes the model additive in the response
    let errs: Vec<f64> = (0..50)
        .into_par_iter()
        .map(|s| {
            (estimate(
                &dataset(Model::ParabolaWeibull, 1.0, 400, s),
                CriterionKind::Tcm,
            ) - 1.0)
                .abs()
        })
        .collect();
    let m = median(errs);
    assert!(m < 0.2, "median error {m}");
}

#[test]
fn fit_at_n_400_is_close() {
    let estimates: Vec<f64> = (0..20)
        .into_par_iter()
        .map(|s| {
            estimate(
                &dataset(Model::ParabolaWeibull, 0.5, 400, 1000 + s),
                CriterionKind::Tcm,
            )
        })
        .collect();
    let m = median(estimates);
    assert!((m - 0.5).abs() < 0.25, "median estimate {m}");
}

#[test]
fn every_criterion_improves_from_50_to_200() {
    for kind in CriterionKind::ALL {
        let err = |n: usize| {
            median(
                (0..50)
                    .into_par_iter()
                    .map(|s| {
                        (estimate(&dataset(Model::ParabolaWeibull, 0.5, n, s), kind) - 0.5).abs()
                    })
                    .collect(),
            )
        };
        let (small, large) = (err(50), err(200));
        assert!(large < small, "{}: {small} -> {large}", kind.label());
    }
}

#[test]
fn raw_boundary_error_shrinks_with_n() {
    let sup_err = |n: usize| {
        let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
        let errs: Vec<f64> = (0..50)
            .into_par_iter()
            .map(|s| {
                let data = dataset(Model::ParabolaWeibull, 1.0, n, s);
                let fit = local_constant_fit(
                    &data,
                    &TransformSpec::yeo_johnson(1.0).unwrap(),
                    Bandwidths::rule(n, 2.0).b,
                )
                .unwrap();
                grid.iter()
                    .map(|&x| {
                        (fit.eval(x) - regression_value(Model::ParabolaWeibull.regression(), x))
                            .abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        median(errs)
    };
    let (e100, e800) = (sup_err(100), sup_err(800));
    assert!(e800 < e100, "{e100} -> {e800}");
}

#[test]
fn boundary_estimate_dominates_responses() {
    let data = dataset(Model::SineLinearExp, 0.5, 300, 3);
    let t = TransformSpec::yeo_johnson(0.5).unwrap();
    let fit = local_constant_fit(&data, &t, 0.1).unwrap();
    for (&h, &z) in fit.raw_values().iter().zip(fit.transformed_y()) {
        assert!(h >= z);
    }
}
