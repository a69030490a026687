//! Boundary-curve estimation.
//!
//! [`BoundaryFit`] is the local-constant estimator: the maximum transformed
//! response over the window `|x_j - x| <= b`. [`SmoothFit`] averages those knot
//! maxima with Epanechnikov weights of bandwidth `a`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::TransformSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    Random,
    Fixed,
}

/// Covariate/response pairs sorted ascending by covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    design: Design,
}

impl Dataset {
    /// Validates and sorts the samples by `x` (stable, so ties keep input order).
    pub fn new(mut samples: Vec<Sample>, design: Design) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Argument("dataset is empty".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.x) {
                return Err(Error::Argument(format!(
                    "sample {i}: covariate {} outside [0, 1]",
                    s.x
                )));
            }
            if !s.y.is_finite() {
                return Err(Error::Argument(format!(
                    "sample {i}: response is not finite"
                )));
            }
        }
        samples.sort_by(|a, b| a.x.total_cmp(&b.x));
        if design == Design::Fixed {
            let strict = samples.windows(2).all(|w| w[0].x < w[1].x);
            let first = samples[0].x;
            let last = samples[samples.len() - 1].x;
            if !strict || first <= 0.0 || last >= 1.0 {
                return Err(Error::Argument(
                    "fixed design points must satisfy 0 < x_1 < ... < x_n < 1".into(),
                ));
            }
        }
        Ok(Dataset {
            xs: samples.iter().map(|s| s.x).collect(),
            ys: samples.iter().map(|s| s.y).collect(),
            design,
        })
    }

    pub fn from_columns(xs: Vec<f64>, ys: Vec<f64>, design: Design) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Argument(format!(
                "{} covariates but {} responses",
                xs.len(),
                ys.len()
            )));
        }
        let samples = xs
            .into_iter()
            .zip(ys)
            .map(|(x, y)| Sample { x, y })
            .collect();
        Self::new(samples, design)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        self.xs.iter().zip(&self.ys).map(|(&x, &y)| Sample { x, y })
    }
}

/// Epanechnikov kernel `0.75 (1 - u^2)` on `[-1, 1]`.
#[inline]
pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

#[inline]
fn in_window(xj: f64, x: f64, b: f64) -> bool {
    (xj - x).abs() <= b
}

/// Local-constant (windowed maximum) boundary estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFit {
    knots: Vec<f64>,
    raw_values: Vec<f64>,
    transformed_y: Vec<f64>,
    bandwidth_b: f64,
}

/// Evaluates the windowed maximum at every knot with a monotone deque.
///
/// `xs` must be sorted ascending. Membership uses the same `|x_j - x_i| <= b`
/// predicate as arbitrary-point evaluation, so the windows are contiguous and
/// both ends advance monotonically.
pub fn sliding_window_max(xs: &[f64], values: &[f64], b: f64) -> Vec<f64> {
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        while next < n && (xs[next] <= xs[i] || in_window(xs[next], xs[i], b)) {
            while let Some(&back) = deque.back() {
                if values[back] <= values[next] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        while let Some(&front) = deque.front() {
            if xs[front] < xs[i] && !in_window(xs[front], xs[i], b) {
                deque.pop_front();
            } else {
                break;
            }
        }
        out.push(values[*deque.front().expect("window contains x_i")]);
    }
    out
}

/// Builds the local-constant fit of `transform(Y)` with window half-width `b`.
pub fn local_constant_fit(
    data: &Dataset,
    transform: &TransformSpec,
    b: f64,
) -> Result<BoundaryFit> {
    if data.is_empty() {
        return Err(Error::Argument("dataset is empty".into()));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Argument(format!(
            "bandwidth b must be positive, got {b}"
        )));
    }
    let transformed_y = transform.forward_all(data.ys())?;
    let raw_values = sliding_window_max(data.xs(), &transformed_y, b);
    Ok(BoundaryFit {
        knots: data.xs().to_vec(),
        raw_values,
        transformed_y,
        bandwidth_b: b,
    })
}

impl BoundaryFit {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.raw_values
    }

    pub fn transformed_y(&self) -> &[f64] {
        &self.transformed_y
    }

    pub fn bandwidth_b(&self) -> f64 {
        self.bandwidth_b
    }

    /// Windowed maximum at an arbitrary `x`; falls back to the nearest
    /// sample's transformed response when the window is empty.
    pub fn eval(&self, x: f64) -> f64 {
        let b = self.bandwidth_b;
        let start = self
            .knots
            .partition_point(|&k| k < x && !in_window(k, x, b));
        let mut best = f64::NEG_INFINITY;
        let mut found = false;
        for j in start..self.knots.len() {
            let k = self.knots[j];
            if !in_window(k, x, b) {
                if k > x {
                    break;
                }
                continue;
            }
            found = true;
            best = best.max(self.transformed_y[j]);
        }
        if found {
            best
        } else {
            self.transformed_y[nearest_index(&self.knots, x)]
        }
    }

    /// Kernel-smooths this fit with bandwidth `a`.
    pub fn smooth(self, a: f64) -> Result<SmoothFit> {
        smooth_fit(self, a)
    }
}

/// Index of the knot closest to `x`; the lower index wins ties.
fn nearest_index(knots: &[f64], x: f64) -> usize {
    let p = knots.partition_point(|&k| k < x);
    if p == 0 {
        return 0;
    }
    if p == knots.len() {
        return knots.len() - 1;
    }
    if (x - knots[p - 1]) <= (knots[p] - x) {
        p - 1
    } else {
        p
    }
}

/// Result of evaluating the smoothed boundary at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothEval {
    pub value: f64,
    /// Set when no knot received positive kernel weight and the nearest knot's
    /// raw value was returned instead.
    pub fallback: bool,
}

/// Nadaraya-Watson smoothing of the local-constant knot values.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFit {
    fit: BoundaryFit,
    bandwidth_a: f64,
    knot_values: Vec<f64>,
}

pub fn smooth_fit(fit: BoundaryFit, a: f64) -> Result<SmoothFit> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Argument(format!(
            "bandwidth a must be positive, got {a}"
        )));
    }
    let knot_values = fit
        .knots
        .iter()
        .map(|&x| nw_eval(&fit, a, x).value)
        .collect();
    Ok(SmoothFit {
        fit,
        bandwidth_a: a,
        knot_values,
    })
}

fn nw_eval(fit: &BoundaryFit, a: f64, x: f64) -> SmoothEval {
    let knots = &fit.knots;
    let start = knots.partition_point(|&k| k < x - a);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in start..knots.len() {
        let u = (x - knots[j]) / a;
        if u < -1.0 {
            break;
        }
        let w = epanechnikov(u);
        num += w * fit.raw_values[j];
        den += w;
    }
    if den > 0.0 {
        SmoothEval {
            value: num / den,
            fallback: false,
        }
    } else {
        SmoothEval {
            value: fit.raw_values[nearest_index(knots, x)],
            fallback: true,
        }
    }
}

impl SmoothFit {
    pub fn raw(&self) -> &BoundaryFit {
        &self.fit
    }

    pub fn bandwidth_a(&self) -> f64 {
        self.bandwidth_a
    }

    /// Smoothed values at the knots, in sample order.
    pub fn knot_values(&self) -> &[f64] {
        &self.knot_values
    }

    pub fn eval(&self, x: f64) -> SmoothEval {
        nw_eval(&self.fit, self.bandwidth_a, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ds(points: &[(f64, f64)]) -> Dataset {
        Dataset::new(
            points.iter().map(|&(x, y)| Sample { x, y }).collect(),
            Design::Random,
        )
        .unwrap()
    }

    #[test]
    fn epanechnikov_values() {
        assert_eq!(epanechnikov(0.0), 0.75);
        assert_eq!(epanechnikov(1.0), 0.0);
        assert_eq!(epanechnikov(-1.0), 0.0);
        assert_eq!(epanechnikov(0.5), 0.5625);
        assert_eq!(epanechnikov(1.5), 0.0);
    }

    #[test]
    fn local_constant_examples() {
        let data = ds(&[(0.2, 1.0), (0.5, 3.0), (0.8, 2.0)]);
        let id = TransformSpec::identity();
        let wide = local_constant_fit(&data, &id, 0.4).unwrap();
        assert_eq!(wide.eval(0.5), 3.0);
        let narrow = local_constant_fit(&data, &id, 0.15).unwrap();
        assert_eq!(narrow.eval(0.1), 1.0);
        let single = local_constant_fit(&ds(&[(0.5, 4.0)]), &id, 0.01).unwrap();
        assert_eq!(single.eval(0.5), 4.0);
    }

    #[test]
    fn empty_window_falls_back_to_nearest() {
        let data = ds(&[(0.2, 1.0), (0.8, 2.0)]);
        let fit = local_constant_fit(&data, &TransformSpec::identity(), 0.05).unwrap();
        assert_eq!(fit.eval(0.0), 1.0);
        assert_eq!(fit.eval(0.6), 2.0);
        assert_eq!(fit.eval(0.5), 1.0);
    }

    #[test]
    fn window_is_inclusive() {
        let data = ds(&[(0.25, 1.0), (0.5, 7.0)]);
        let fit = local_constant_fit(&data, &TransformSpec::identity(), 0.25).unwrap();
        assert_eq!(fit.raw_values(), &[7.0, 7.0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let data = ds(&[(0.5, 1.0)]);
        assert!(local_constant_fit(&data, &TransformSpec::identity(), 0.0).is_err());
        assert!(Dataset::new(vec![], Design::Random).is_err());
        assert!(Dataset::new(vec![Sample { x: 1.5, y: 0.0 }], Design::Random).is_err());
        let fixed = vec![Sample { x: 0.0, y: 0.0 }, Sample { x: 0.5, y: 0.0 }];
        assert!(Dataset::new(fixed, Design::Fixed).is_err());
        let fit = local_constant_fit(&data, &TransformSpec::identity(), 0.1).unwrap();
        assert!(fit.smooth(-1.0).is_err());
    }

    #[test]
    fn smoothing_examples() {
        let data = ds(&[(0.4, 1.0), (0.6, 3.0)]);
        let fit = local_constant_fit(&data, &TransformSpec::identity(), 0.05).unwrap();
        let sm = fit.smooth(0.5).unwrap();
        let e = sm.eval(0.5);
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-15);
        assert!(!e.fallback);

        // bandwidth below half the knot spacing reproduces the raw values
        let data = ds(&[(0.1, 1.0), (0.3, -2.0), (0.7, 5.0)]);
        let fit = local_constant_fit(&data, &TransformSpec::identity(), 0.01).unwrap();
        let raw = fit.raw_values().to_vec();
        let sm = fit.smooth(0.05).unwrap();
        assert_eq!(sm.knot_values(), raw.as_slice());

        let far = sm.eval(0.5);
        assert!(far.fallback);
    }

    #[test]
    fn constant_raw_values_stay_constant() {
        let data = ds(&[(0.1, 2.0), (0.3, 2.0), (0.35, 2.0), (0.9, 2.0)]);
        let sm = local_constant_fit(&data, &TransformSpec::identity(), 0.1)
            .unwrap()
            .smooth(0.3)
            .unwrap();
        for x in [0.0, 0.2, 0.33, 0.8, 1.0] {
            let e = sm.eval(x);
            if !e.fallback {
                assert_relative_eq!(e.value, 2.0, max_relative = 1e-15);
            }
        }
    }

    fn naive_max(xs: &[f64], v: &[f64], b: f64) -> Vec<f64> {
        xs.iter()
            .map(|&xi| {
                xs.iter()
                    .zip(v)
                    .filter(|(&xj, _)| (xj - xi).abs() <= b)
                    .map(|(_, &vj)| vj)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn dominance_and_naive_agreement(
            pts in prop::collection::vec((0.0f64..=1.0, -5.0f64..5.0), 1..40),
            b in 0.001f64..0.6,
        ) {
            let data = ds(&pts);
            let fit = local_constant_fit(&data, &TransformSpec::identity(), b).unwrap();
            let expected = naive_max(data.xs(), data.ys(), b);
            prop_assert_eq!(fit.raw_values(), expected.as_slice());
            for (i, &xi) in data.xs().iter().enumerate() {
                prop_assert!(fit.raw_values()[i] >= data.ys()[i]);
                prop_assert_eq!(fit.eval(xi), fit.raw_values()[i]);
            }
        }

        #[test]
        fn smoothed_values_stay_within_window_range(
            pts in prop::collection::vec((0.0f64..=1.0, -5.0f64..5.0), 2..30),
            b in 0.01f64..0.3,
            a in 0.01f64..0.3,
            x in 0.0f64..=1.0,
        ) {
            let data = ds(&pts);
            let fit = local_constant_fit(&data, &TransformSpec::identity(), b).unwrap();
            let raws: Vec<f64> = fit.knots().iter().zip(fit.raw_values())
                .filter(|(&k, _)| (x - k).abs() < a).map(|(_, &r)| r).collect();
            let e = fit.smooth(a).unwrap().eval(x);
            if !e.fallback {
                let lo = raws.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = raws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(e.value >= lo - 1e-12 && e.value <= hi + 1e-12);
            }
        }
    }
}
