//! Minimum-distance estimation of the transformation parameter.
//!
//! For a candidate parameter the responses are transformed, the boundary is
//! re-estimated, and the residuals are compared with the covariates through
//!
//! ```text
//! G_n(y, s) = (1/n) sum_i 1{r_i <= y} (1{x_i <= s} - F_X(s))
//! ```
//!
//! which vanishes in expectation when residuals and covariates are
//! independent. The criterion is a semi-norm of `G_n` over a finite grid.
//!
//! Every surface entry is computed as an exact integer numerator divided by
//! `n^2`, so values are reproducible bit for bit no matter how they are
//! accumulated.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::{local_constant_fit, BoundaryFit, Dataset, SmoothFit};
use crate::error::{Error, Result};
use crate::transform::{Family, ParamBox, TransformSpec};

/// Relative padding of the residual grid on each side.
const Y_GRID_PAD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CriterionKind {
    /// Supremum over `(y, s)`.
    #[serde(rename = "TKS")]
    Tks,
    /// Root mean square over `(y, s)`.
    #[serde(rename = "TCM")]
    Tcm,
    /// Supremum over `s` of the root mean square over `y`.
    #[serde(rename = "TKSCM")]
    Tkscm,
    /// Supremum over `y` of the root mean square over `s`.
    #[serde(rename = "TCMKS")]
    Tcmks,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 4] = [
        CriterionKind::Tks,
        CriterionKind::Tcm,
        CriterionKind::Tkscm,
        CriterionKind::Tcmks,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CriterionKind::Tks => "TKS",
            CriterionKind::Tcm => "TCM",
            CriterionKind::Tkscm => "TKSCM",
            CriterionKind::Tcmks => "TCMKS",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TKS" => Ok(CriterionKind::Tks),
            "TCM" => Ok(CriterionKind::Tcm),
            "TKSCM" => Ok(CriterionKind::Tkscm),
            "TCMKS" => Ok(CriterionKind::Tcmks),
            other => Err(Error::Argument(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Placement of the residual grid between the padded residual extremes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YGrid {
    /// Interior points at empirical residual quantiles, so grid averages
    /// weight `y` by the residual distribution.
    #[default]
    Quantile,
    /// Equally spaced points.
    Equispaced,
}

impl FromStr for YGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quantile" => Ok(YGrid::Quantile),
            "equispaced" => Ok(YGrid::Equispaced),
            other => Err(Error::Argument(format!("unknown y grid `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionSpec {
    pub kind: CriterionKind,
    pub y_grid_size: usize,
    pub y_grid: YGrid,
}

impl CriterionSpec {
    pub fn new(kind: CriterionKind) -> Self {
        CriterionSpec {
            kind,
            y_grid_size: 100,
            y_grid: YGrid::Quantile,
        }
    }

    pub fn with_y_grid_size(kind: CriterionKind, y_grid_size: usize) -> Result<Self> {
        if y_grid_size < 2 {
            return Err(Error::Argument(format!(
                "y grid needs at least 2 points, got {y_grid_size}"
            )));
        }
        Ok(CriterionSpec {
            kind,
            y_grid_size,
            y_grid: YGrid::Quantile,
        })
    }

    pub fn with_y_grid(self, y_grid: YGrid) -> Self {
        CriterionSpec { y_grid, ..self }
    }
}

/// Which boundary estimate the residuals are taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    #[default]
    Smoothed,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    pub b: f64,
    pub a: f64,
}

impl Bandwidths {
    pub fn new(b: f64, a: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) || !(a > 0.0 && a.is_finite()) {
            return Err(Error::Argument(format!(
                "bandwidths must be positive, got b={b}, a={a}"
            )));
        }
        Ok(Bandwidths { b, a })
    }

    /// `b = n^(-1/3)` and `a = b / a_divisor`.
    pub fn rule(n: usize, a_divisor: f64) -> Self {
        let b = (n as f64).powf(-1.0 / 3.0);
        Bandwidths {
            b,
            a: b / a_divisor,
        }
    }
}

/// `(1/n) #{i : x_i <= s}`.
pub fn empirical_cdf_x(xs: &[f64], s: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().filter(|&&x| x <= s).count() as f64 / xs.len() as f64
}

/// Residuals `Lambda(Y_i) - h(x_i)` against the smoothed boundary.
pub fn residuals(data: &Dataset, fit: &SmoothFit) -> Result<Vec<f64>> {
    let ty = fit.raw().transformed_y();
    if ty.len() != data.len() {
        return Err(Error::Argument(format!(
            "fit has {} knots but data has {} samples",
            ty.len(),
            data.len()
        )));
    }
    Ok(ty
        .iter()
        .zip(fit.knot_values())
        .map(|(t, h)| t - h)
        .collect())
}

/// Residuals against the unsmoothed windowed maximum; all nonpositive.
pub fn raw_residuals(data: &Dataset, fit: &BoundaryFit) -> Result<Vec<f64>> {
    let ty = fit.transformed_y();
    if ty.len() != data.len() {
        return Err(Error::Argument(format!(
            "fit has {} knots but data has {} samples",
            ty.len(),
            data.len()
        )));
    }
    Ok(ty
        .iter()
        .zip(fit.raw_values())
        .map(|(t, h)| t - h)
        .collect())
}

/// Evaluates the criterion process at a single `(y, s)`.
pub fn gn_eval(residuals: &[f64], xs: &[f64], y: f64, s: f64) -> Result<f64> {
    let n = residuals.len();
    if n == 0 {
        return Err(Error::Argument(
            "criterion process needs at least one observation".into(),
        ));
    }
    if xs.len() != n {
        return Err(Error::Argument(format!(
            "{} residuals but {} covariates",
            n,
            xs.len()
        )));
    }
    let below_s = xs.iter().filter(|&&x| x <= s).count() as i64;
    let mut below_y = 0i64;
    let mut joint = 0i64;
    for (&r, &x) in residuals.iter().zip(xs) {
        if r <= y {
            below_y += 1;
            if x <= s {
                joint += 1;
            }
        }
    }
    Ok(scaled(joint * n as i64 - below_y * below_s, n))
}

#[inline]
fn scaled(numerator: i64, n: usize) -> f64 {
    numerator as f64 / (n as f64 * n as f64)
}

/// `G_n` tabulated on a residual grid (rows) and the distinct covariates (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSurface {
    values: Vec<f64>,
    y_grid: Vec<f64>,
    s_grid: Vec<f64>,
    y_span: f64,
}

impl CriterionSurface {
    /// Builds the surface. Returns `None` when all residuals coincide, in
    /// which case `G_n` is identically zero.
    ///
    /// `xs` must be sorted ascending. The first and last grid points lie just
    /// outside the residual range, so the first and last rows vanish.
    pub fn build(
        residuals: &[f64],
        xs: &[f64],
        y_grid_size: usize,
        placement: YGrid,
    ) -> Result<Option<Self>> {
        let n = residuals.len();
        if n == 0 || xs.len() != n {
            return Err(Error::Argument(format!(
                "{} residuals but {} covariates",
                n,
                xs.len()
            )));
        }
        if y_grid_size < 2 {
            return Err(Error::Argument("y grid needs at least 2 points".into()));
        }
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain("non-finite residual".into()));
        }
        let (min_r, max_r) = residuals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        let range = max_r - min_r;
        if range <= 0.0 {
            return Ok(None);
        }
        let pad = Y_GRID_PAD * range;
        let lo = min_r - pad;
        let hi = max_r.max(0.0) + pad;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| residuals[i].total_cmp(&residuals[j]));

        let mut y_grid: Vec<f64> = match placement {
            YGrid::Equispaced => {
                let step = (hi - lo) / (y_grid_size - 1) as f64;
                (0..y_grid_size).map(|j| lo + step * j as f64).collect()
            }
            YGrid::Quantile => {
                let inner = y_grid_size - 2;
                let mut g = Vec::with_capacity(y_grid_size);
                g.push(lo);
                for j in 0..inner {
                    let p = (j as f64 + 0.5) / inner as f64;
                    g.push(residuals[order[((p * n as f64) as usize).min(n - 1)]]);
                }
                g.push(hi);
                g
            }
        };
        y_grid[y_grid_size - 1] = hi;

        // distinct covariates and, for each sample, its column group
        let mut s_grid: Vec<f64> = Vec::with_capacity(n);
        let mut group = Vec::with_capacity(n);
        for &x in xs {
            if s_grid.last() != Some(&x) {
                s_grid.push(x);
            }
            group.push(s_grid.len() - 1);
        }
        let m = s_grid.len();
        let mut below_s = vec![0i64; m];
        for &g in &group {
            below_s[g] += 1;
        }
        for k in 1..m {
            below_s[k] += below_s[k - 1];
        }

        let mut joint_per_group = vec![0i64; m];
        let mut included = 0usize;
        let mut values = Vec::with_capacity(y_grid_size * m);
        for &y in &y_grid {
            while included < n && residuals[order[included]] <= y {
                joint_per_group[group[order[included]]] += 1;
                included += 1;
            }
            let below_y = included as i64;
            let mut joint = 0i64;
            for k in 0..m {
                joint += joint_per_group[k];
                values.push(scaled(joint * n as i64 - below_y * below_s[k], n));
            }
        }
        Ok(Some(CriterionSurface {
            values,
            y_grid,
            s_grid,
            y_span: hi - lo,
        }))
    }

    pub fn y_grid(&self) -> &[f64] {
        &self.y_grid
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn y_span(&self) -> f64 {
        self.y_span
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.s_grid.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.s_grid.len();
        &self.values[row * m..(row + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self, kind: CriterionKind) -> f64 {
        let rows = self.y_grid.len();
        let cols = self.s_grid.len();
        match kind {
            CriterionKind::Tks => self.values.iter().fold(0.0, |acc, v| acc.max(v.abs())),
            CriterionKind::Tcm => {
                let ss: f64 = self.values.iter().map(|v| v * v).sum();
                (ss / self.values.len() as f64).sqrt()
            }
            CriterionKind::Tkscm => (0..cols)
                .map(|k| {
                    let ss: f64 = (0..rows).map(|j| self.get(j, k).powi(2)).sum();
                    (ss / rows as f64).sqrt()
                })
                .fold(0.0, f64::max),
            CriterionKind::Tcmks => (0..rows)
                .map(|j| {
                    let ss: f64 = self.row(j).iter().map(|v| v * v).sum();
                    (ss / cols as f64).sqrt()
                })
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionValue {
    pub value: f64,
    /// All residuals were equal, so no grid could be laid out.
    pub degenerate: bool,
}

/// Criterion value for precomputed residuals; `xs` sorted ascending.
pub fn criterion_from_residuals(
    residuals: &[f64],
    xs: &[f64],
    spec: &CriterionSpec,
) -> Result<CriterionValue> {
    Ok(
        match CriterionSurface::build(residuals, xs, spec.y_grid_size, spec.y_grid)? {
            Some(surface) => CriterionValue {
                value: surface.norm(spec.kind),
                degenerate: false,
            },
            None => CriterionValue {
                value: 0.0,
                degenerate: true,
            },
        },
    )
}

/// Criterion `M_n` for a smoothed boundary fitted on `data`.
pub fn mn(data: &Dataset, fit: &SmoothFit, spec: &CriterionSpec) -> Result<CriterionValue> {
    let r = residuals(data, fit)?;
    criterion_from_residuals(&r, data.xs(), spec)
}

/// Residuals for the given transformation after refitting the boundary.
pub fn fitted_residuals(
    data: &Dataset,
    transform: &TransformSpec,
    bandwidths: Bandwidths,
    boundary: BoundaryKind,
) -> Result<Vec<f64>> {
    let fit = local_constant_fit(data, transform, bandwidths.b)?;
    match boundary {
        BoundaryKind::Raw => raw_residuals(data, &fit),
        BoundaryKind::Smoothed => residuals(data, &fit.smooth(bandwidths.a)?),
    }
}

/// Full pipeline for one candidate parameter.
pub fn evaluate_theta(
    data: &Dataset,
    family: Family,
    theta: &[f64],
    bandwidths: Bandwidths,
    spec: &CriterionSpec,
    boundary: BoundaryKind,
) -> Result<CriterionValue> {
    let transform = TransformSpec::new(family, theta.to_vec())?;
    let r = fitted_residuals(data, &transform, bandwidths, boundary)?;
    criterion_from_residuals(&r, data.xs(), spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchOptions {
    pub boundary: BoundaryKind,
    pub keep_trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaEstimate {
    pub theta_hat: Vec<f64>,
    pub criterion_value: f64,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_trace: Option<Vec<(Vec<f64>, f64)>>,
}

/// Grid resolution per coordinate: (coarse points, refinement points).
fn grid_sizes(dim: usize) -> (usize, usize) {
    match dim {
        0 | 1 => (61, 21),
        2 => (21, 11),
        _ => (9, 5),
    }
}

const REFINE_ROUNDS: usize = 2;
const ZOOM: f64 = 5.0;

fn axis_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if lo == hi || count < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut pts: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
    pts[count - 1] = hi;
    pts
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

struct Incumbent {
    theta: Vec<f64>,
    value: f64,
}

impl Incumbent {
    fn offer(&mut self, theta: &[f64], value: f64) {
        let better = value < self.value
            || (value == self.value && value.is_finite() && lex_cmp(theta, &self.theta).is_lt());
        if better {
            self.theta = theta.to_vec();
            self.value = value;
        }
    }
}

/// Minimizes the criterion over `theta_box` by a coarse grid followed by two
/// zoomed refinement grids around the incumbent.
///
/// Candidates whose pipeline fails (non-finite transforms, range errors) get
/// an infinite criterion. Ties go to the lexicographically smallest parameter.
pub fn minimize_theta(
    data: &Dataset,
    family: Family,
    theta_box: &ParamBox,
    bandwidths: Bandwidths,
    spec: &CriterionSpec,
    options: SearchOptions,
) -> Result<ThetaEstimate> {
    if theta_box.dim() != family.dim() {
        return Err(Error::Argument(format!(
            "{family} has {} parameter(s) but the search box has {}",
            family.dim(),
            theta_box.dim()
        )));
    }
    let bounds = theta_box.bounds();
    let (coarse, fine) = grid_sizes(bounds.len());
    let mut steps: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (coarse - 1) as f64)
        .collect();
    let mut axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| axis_points(lo, hi, coarse))
        .collect();

    let mut best = Incumbent {
        theta: Vec::new(),
        value: f64::INFINITY,
    };
    let mut evaluations = 0usize;
    let mut trace = options.keep_trace.then(Vec::new);
    let mut seen: Vec<Vec<f64>> = Vec::new();

    for round in 0..=REFINE_ROUNDS {
        if round > 0 {
            if !best.value.is_finite() {
                break;
            }
            let half = (fine - 1) / 2;
            axes = bounds
                .iter()
                .zip(&mut steps)
                .zip(&best.theta)
                .map(|((&(lo, hi), step), &center)| {
                    *step /= ZOOM;
                    let mut pts: Vec<f64> = (0..fine)
                        .map(|k| (center + (k as f64 - half as f64) * *step).clamp(lo, hi))
                        .collect();
                    pts.dedup();
                    pts
                })
                .collect();
        }
        for theta in cartesian(&axes) {
            if seen.iter().any(|s| s == &theta) {
                continue;
            }
            let value =
                match evaluate_theta(data, family, &theta, bandwidths, spec, options.boundary) {
                    Ok(v) => v.value,
                    Err(_) => f64::INFINITY,
                };
            evaluations += 1;
            if let Some(t) = trace.as_mut() {
                t.push((theta.clone(), value));
            }
            best.offer(&theta, value);
            seen.push(theta);
        }
    }

    if !best.value.is_finite() {
        return Err(Error::Estimation(
            "no candidate parameter produced a finite criterion".into(),
        ));
    }
    Ok(ThetaEstimate {
        theta_hat: best.theta,
        criterion_value: best.value,
        evaluations,
        search_trace: trace,
    })
}
