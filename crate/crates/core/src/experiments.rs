//! Monte Carlo study of the estimators.
//!
//! Each replication draws its own dataset from a seed derived from the master
//! seed and the cell coordinates, so results do not depend on scheduling.
//! Replications run on a rayon pool and are folded in replication order.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{Dataset, Design};
use crate::correlation::{correlations, Correlations};
use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::mdist::{
    fitted_residuals, minimize_theta, Bandwidths, BoundaryKind, CriterionKind, CriterionSpec,
    SearchOptions, YGrid,
};
use crate::simgen::{make_dataset, stream_seed, Model, ScenarioSpec};
use crate::tables::{self, RefCorrelation};
use crate::transform::{Family, ParamBox, TransformSpec};

/// Share of failed replications above which a cell is flagged invalid.
const MAX_FAILURE_SHARE: f64 = 0.05;

pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub model: Model,
    pub design: Design,
    pub theta0s: Vec<f64>,
    pub ns: Vec<usize>,
    pub reps: usize,
    pub criteria: Vec<CriterionKind>,
    /// Smoothing rules `a = b / divisor`.
    pub a_divisors: Vec<f64>,
    pub theta_box: ParamBox,
    pub master_seed: u64,
    pub y_grid_size: usize,
    pub y_grid: YGrid,
    pub boundary: BoundaryKind,
}

impl McConfig {
    /// Settings of the published study for one model.
    pub fn study(model: Model) -> Self {
        McConfig {
            model,
            design: Design::Fixed,
            theta0s: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            ns: vec![50, 100],
            reps: 1000,
            criteria: CriterionKind::ALL.to_vec(),
            a_divisors: vec![2.0, 20.0],
            theta_box: Family::YeoJohnson.default_box(),
            master_seed: 42,
            y_grid_size: 100,
            y_grid: YGrid::Quantile,
            boundary: BoundaryKind::Smoothed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Argument("reps must be at least 1".into()));
        }
        if self.criteria.is_empty()
            || self.theta0s.is_empty()
            || self.ns.is_empty()
            || self.a_divisors.is_empty()
        {
            return Err(Error::Argument(
                "criteria, theta0s, ns and smoothing rules must be nonempty".into(),
            ));
        }
        if self.theta_box.dim() != 1 {
            return Err(Error::Argument(
                "the Monte Carlo study searches a one-dimensional box".into(),
            ));
        }
        if self.a_divisors.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Argument(
                "smoothing divisors must be positive".into(),
            ));
        }
        CriterionSpec::with_y_grid_size(CriterionKind::Tcm, self.y_grid_size)?;
        for &n in &self.ns {
            for &theta0 in &self.theta0s {
                ScenarioSpec {
                    model: self.model,
                    theta0,
                    n,
                    design: self.design,
                    seed: 0,
                }
                .validate()?;
            }
        }
        Ok(())
    }
}

pub fn a_rule_label(divisor: f64) -> String {
    format!("b/{divisor}")
}

fn replication_seed(
    master: u64,
    model: Model,
    design: Design,
    n: usize,
    theta0: f64,
    rep: usize,
) -> u64 {
    let design_key = match design {
        Design::Fixed => 0,
        Design::Random => 1,
    };
    stream_seed(
        master,
        &[
            model.number() as u64,
            design_key,
            n as u64,
            theta0.to_bits(),
            rep as u64,
        ],
    )
}

fn scenario(
    model: Model,
    design: Design,
    n: usize,
    theta0: f64,
    master: u64,
    rep: usize,
) -> ScenarioSpec {
    ScenarioSpec {
        model,
        theta0,
        n,
        design,
        seed: replication_seed(master, model, design, n, theta0, rep),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCell {
    pub model: u8,
    pub n: usize,
    pub a_divisor: f64,
    pub criterion: CriterionKind,
    pub theta0: f64,
    pub mean: f64,
    pub median: f64,
    pub mise: f64,
    pub reps_used: usize,
    pub failures: usize,
    pub invalid: bool,
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub cells: Vec<McCell>,
}

impl McSummary {
    pub fn cell(
        &self,
        n: usize,
        a_divisor: f64,
        criterion: CriterionKind,
        theta0: f64,
    ) -> Option<&McCell> {
        self.cells.iter().find(|c| {
            c.n == n && c.a_divisor == a_divisor && c.criterion == criterion && c.theta0 == theta0
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,n,a_rule,criterion,theta0,mean,median,mise,failures\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.model,
                c.n,
                a_rule_label(c.a_divisor),
                c.criterion,
                fmt17(c.theta0),
                fmt17(c.mean),
                fmt17(c.median),
                fmt17(c.mise),
                c.failures
            );
        }
        out
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Mean, median and mean squared error about `truth`.
pub fn summarize(estimates: &[f64], truth: f64) -> (f64, f64, f64) {
    if estimates.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let mise = estimates.iter().map(|t| (t - truth).powi(2)).sum::<f64>() / k;
    (mean, median(estimates), mise)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Argument(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Runs the study. `threads = None` uses the global rayon pool.
pub fn run_mc(
    config: &McConfig,
    threads: Option<usize>,
    progress: Option<Progress<'_>>,
) -> Result<McSummary> {
    config.validate()?;
    let units: Vec<(usize, f64, usize)> = config
        .ns
        .iter()
        .flat_map(|&n| {
            config
                .theta0s
                .iter()
                .flat_map(move |&t| (0..config.reps).map(move |r| (n, t, r)))
        })
        .collect();
    let total = units.len();
    let done = AtomicUsize::new(0);
    let slots = config.a_divisors.len() * config.criteria.len();

    let outcomes: Vec<Vec<Option<f64>>> = with_pool(threads, || {
        units
            .par_iter()
            .map(|&(n, theta0, rep)| {
                let out = run_replication(config, n, theta0, rep, slots);
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(p) = progress {
                    p(k, total);
                }
                out
            })
            .collect()
    })?;

    let mut cells = Vec::new();
    let mut unit = 0;
    for &n in &config.ns {
        for &theta0 in &config.theta0s {
            let block = &outcomes[unit..unit + config.reps];
            unit += config.reps;
            for (ai, &a_divisor) in config.a_divisors.iter().enumerate() {
                for (ci, &criterion) in config.criteria.iter().enumerate() {
                    let slot = ai * config.criteria.len() + ci;
                    let estimates: Vec<f64> = block.iter().filter_map(|o| o[slot]).collect();
                    let failures = config.reps - estimates.len();
                    let (mean, median, mise) = summarize(&estimates, theta0);
                    cells.push(McCell {
                        model: config.model.number(),
                        n,
                        a_divisor,
                        criterion,
                        theta0,
                        mean,
                        median,
                        mise,
                        reps_used: estimates.len(),
                        failures,
                        invalid: failures as f64 > MAX_FAILURE_SHARE * config.reps as f64,
                        estimates,
                    });
                }
            }
        }
    }
    Ok(McSummary { cells })
}

fn run_replication(
    config: &McConfig,
    n: usize,
    theta0: f64,
    rep: usize,
    slots: usize,
) -> Vec<Option<f64>> {
    let spec = scenario(
        config.model,
        config.design,
        n,
        theta0,
        config.master_seed,
        rep,
    );
    let data = match make_dataset(&spec) {
        Ok(d) => d,
        Err(_) => return vec![None; slots],
    };
    let mut out = Vec::with_capacity(slots);
    for &divisor in &config.a_divisors {
        let bw = Bandwidths::rule(n, divisor);
        for &kind in &config.criteria {
            let crit = CriterionSpec {
                kind,
                y_grid_size: config.y_grid_size,
                y_grid: config.y_grid,
            };
            let est = minimize_theta(
                &data,
                Family::YeoJohnson,
                &config.theta_box,
                bw,
                &crit,
                SearchOptions {
                    boundary: config.boundary,
                    keep_trace: false,
                },
            );
            out.push(est.ok().map(|e| e.theta_hat[0]));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationConfig {
    pub model: Model,
    pub design: Design,
    pub n: usize,
    pub theta0: f64,
    pub reps: usize,
    pub a_divisor: f64,
    pub criteria: Vec<CriterionKind>,
    pub theta_box: ParamBox,
    pub master_seed: u64,
    pub y_grid_size: usize,
    pub y_grid: YGrid,
}

impl CorrelationConfig {
    pub fn study(model: Model) -> Self {
        CorrelationConfig {
            model,
            design: Design::Fixed,
            n: 100,
            theta0: 0.5,
            reps: 1000,
            a_divisor: 2.0,
            criteria: CriterionKind::ALL.to_vec(),
            theta_box: Family::YeoJohnson.default_box(),
            master_seed: 42,
            y_grid_size: 100,
            y_grid: YGrid::Quantile,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub label: String,
    pub pearson: f64,
    pub kendall: f64,
    pub spearman: f64,
    pub reps_used: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub model: u8,
    pub n: usize,
    pub theta0: f64,
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationReport {
    pub fn row(&self, label: &str) -> Option<&CorrelationRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

fn residual_correlations(
    data: &Dataset,
    transform: &TransformSpec,
    bw: Bandwidths,
) -> Option<Correlations> {
    let r = fitted_residuals(data, transform, bw, BoundaryKind::Smoothed).ok()?;
    correlations(data.xs(), &r).ok()
}

/// Average covariate/residual correlations for the untransformed data, the
/// true parameter, and each estimator.
pub fn run_correlations(
    config: &CorrelationConfig,
    threads: Option<usize>,
    progress: Option<Progress<'_>>,
) -> Result<CorrelationReport> {
    if config.reps == 0 || config.criteria.is_empty() {
        return Err(Error::Argument("reps and criteria must be nonempty".into()));
    }
    ScenarioSpec {
        model: config.model,
        theta0: config.theta0,
        n: config.n,
        design: config.design,
        seed: 0,
    }
    .validate()?;
    let bw = Bandwidths::rule(config.n, config.a_divisor);
    let labels: Vec<String> = ["Original data".to_string(), "True parameter".to_string()]
        .into_iter()
        .chain(config.criteria.iter().map(|c| c.label().to_string()))
        .collect();
    let done = AtomicUsize::new(0);

    let per_rep: Vec<Vec<Option<Correlations>>> = with_pool(threads, || {
        (0..config.reps)
            .into_par_iter()
            .map(|rep| {
                let spec = scenario(
                    config.model,
                    config.design,
                    config.n,
                    config.theta0,
                    config.master_seed,
                    rep,
                );
                let out = match make_dataset(&spec) {
                    Err(_) => vec![None; labels.len()],
                    Ok(data) => {
                        let mut row = vec![
                            residual_correlations(&data, &TransformSpec::identity(), bw),
                            residual_correlations(&data, &spec.truth(), bw),
                        ];
                        for &kind in &config.criteria {
                            let crit = CriterionSpec {
                                kind,
                                y_grid_size: config.y_grid_size,
                                y_grid: config.y_grid,
                            };
                            let est = minimize_theta(
                                &data,
                                Family::YeoJohnson,
                                &config.theta_box,
                                bw,
                                &crit,
                                SearchOptions::default(),
                            );
                            row.push(est.ok().and_then(|e| {
                                let t = TransformSpec::yeo_johnson(e.theta_hat[0]).ok()?;
                                residual_correlations(&data, &t, bw)
                            }));
                        }
                        row
                    }
                };
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(p) = progress {
                    p(k, config.reps);
                }
                out
            })
            .collect()
    })?;

    let rows = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let ok: Vec<Correlations> = per_rep.iter().filter_map(|r| r[i]).collect();
            let k = ok.len() as f64;
            let avg = |f: fn(&Correlations) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(f).sum::<f64>() / k
                }
            };
            CorrelationRow {
                label: label.clone(),
                pearson: avg(|c| c.pearson),
                kendall: avg(|c| c.kendall),
                spearman: avg(|c| c.spearman),
                reps_used: ok.len(),
                failures: config.reps - ok.len(),
            }
        })
        .collect();
    Ok(CorrelationReport {
        model: config.model.number(),
        n: config.n,
        theta0: config.theta0,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    /// Mean/median/MISE tables 1 to 8.
    Estimates(u8),
    /// Correlation tables 1 (model 3) and 2 (model 4).
    Correlation(u8),
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "cor1" => Ok(TableId::Correlation(1)),
            "cor2" => Ok(TableId::Correlation(2)),
            _ => match t.parse::<u8>() {
                Ok(k @ 1..=8) => Ok(TableId::Estimates(k)),
                _ => Err(Error::UnknownTable(s.to_string())),
            },
        }
    }
}

impl std::fmt::Display for TableId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableId::Estimates(k) => write!(f, "{k}"),
            TableId::Correlation(k) => write!(f, "cor{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateComparison {
    pub n: usize,
    pub theta0: f64,
    pub criterion: CriterionKind,
    /// `[mean, median, mise]`.
    pub reference: [f64; 3],
    pub reproduced: Option<[f64; 3]>,
    pub failures: usize,
}

impl EstimateComparison {
    pub fn deviation(&self) -> Option<[f64; 3]> {
        self.reproduced.map(|r| {
            [
                (r[0] - self.reference[0]).abs(),
                (r[1] - self.reference[1]).abs(),
                (r[2] - self.reference[2]).abs(),
            ]
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationComparison {
    pub label: String,
    pub reference: [f64; 3],
    pub reproduced: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TableBody {
    Estimates {
        model: u8,
        a_rule: String,
        cells: Vec<EstimateComparison>,
    },
    Correlations {
        model: u8,
        n: usize,
        theta0: f64,
        rows: Vec<CorrelationComparison>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub table: String,
    pub reps: usize,
    pub seed: u64,
    pub body: TableBody,
}

/// Re-runs a published table (or, with `reps = 0`, lists its reference values).
pub fn reproduce_table(
    table: TableId,
    reps: usize,
    master_seed: u64,
    threads: Option<usize>,
    progress: Option<Progress<'_>>,
) -> Result<TableReport> {
    let body = match table {
        TableId::Estimates(k) => {
            let (model, divisor) =
                tables::table_setting(k).ok_or_else(|| Error::UnknownTable(k.to_string()))?;
            let summary = if reps > 0 {
                let config = McConfig {
                    reps,
                    master_seed,
                    a_divisors: vec![divisor],
                    ..McConfig::study(model)
                };
                Some(run_mc(&config, threads, progress)?)
            } else {
                None
            };
            let mut cells = Vec::new();
            for row in tables::table_rows(k) {
                for kind in CriterionKind::ALL {
                    let found = summary
                        .as_ref()
                        .and_then(|s| s.cell(row.n, divisor, kind, row.theta0));
                    cells.push(EstimateComparison {
                        n: row.n,
                        theta0: row.theta0,
                        criterion: kind,
                        reference: row.cell(kind),
                        reproduced: found.map(|c| [c.mean, c.median, c.mise]),
                        failures: found.map_or(0, |c| c.failures),
                    });
                }
            }
            TableBody::Estimates {
                model: model.number(),
                a_rule: a_rule_label(divisor),
                cells,
            }
        }
        TableId::Correlation(k) => {
            let reference: &RefCorrelation = tables::CORRELATIONS
                .get(usize::from(k).wrapping_sub(1))
                .ok_or_else(|| Error::UnknownTable(format!("cor{k}")))?;
            let report = if reps > 0 {
                let config = CorrelationConfig {
                    reps,
                    master_seed,
                    ..CorrelationConfig::study(reference.model)
                };
                Some(run_correlations(&config, threads, progress)?)
            } else {
                None
            };
            let mut rows = Vec::new();
            let refs = [
                ("Original data", reference.original),
                ("True parameter", reference.truth),
            ]
            .into_iter()
            .chain(CriterionKind::ALL.iter().map(|k| {
                (
                    k.label(),
                    reference.estimators[tables::criterion_column(*k)],
                )
            }));
            for (label, reference) in refs {
                let reproduced = report
                    .as_ref()
                    .and_then(|r| r.row(label))
                    .map(|r| [r.pearson, r.kendall, r.spearman]);
                rows.push(CorrelationComparison {
                    label: label.to_string(),
                    reference,
                    reproduced,
                });
            }
            TableBody::Correlations {
                model: reference.model.number(),
                n: 100,
                theta0: 0.5,
                rows,
            }
        }
    };
    Ok(TableReport {
        table: table.to_string(),
        reps,
        seed: master_seed,
        body,
    })
}

fn text6(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.6}")
    }
}

fn opt_csv(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt17)
}

impl TableReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.body {
            TableBody::Estimates {
                model,
                a_rule,
                cells,
            } => {
                let _ = writeln!(
                    out,
                    "Table {}: mean, median (MISE) of theta_hat, model {model}, a = {a_rule}, reps = {}, seed = {}",
                    self.table, self.reps, self.seed
                );
                let mut ns: Vec<usize> = cells.iter().map(|c| c.n).collect();
                ns.dedup();
                for n in ns {
                    let _ = writeln!(out, "\nn = {n}");
                    let mut thetas: Vec<f64> = cells
                        .iter()
                        .filter(|c| c.n == n)
                        .map(|c| c.theta0)
                        .collect();
                    thetas.dedup();
                    for theta0 in thetas {
                        let _ = writeln!(out, "theta0 = {theta0}");
                        for c in cells.iter().filter(|c| c.n == n && c.theta0 == theta0) {
                            let fmt3 = |v: [f64; 3]| {
                                format!("{} {} ({})", text6(v[0]), text6(v[1]), text6(v[2]))
                            };
                            let ours = c.reproduced.map_or_else(|| "N/A".to_string(), fmt3);
                            let dev = c.deviation().map_or_else(|| "N/A".to_string(), fmt3);
                            let _ = writeln!(
                                out,
                                "  {:<6} ref {:<30} reproduced {:<30} |dev| {}{}",
                                c.criterion.label(),
                                fmt3(c.reference),
                                ours,
                                dev,
                                if c.failures > 0 {
                                    format!("  failures {}", c.failures)
                                } else {
                                    String::new()
                                }
                            );
                        }
                    }
                }
            }
            TableBody::Correlations {
                model,
                n,
                theta0,
                rows,
            } => {
                let _ = writeln!(
                    out,
                    "Table {}: average Pearson, Kendall, Spearman correlation of covariates and residuals, model {model}, n = {n}, theta0 = {theta0}, reps = {}, seed = {}",
                    self.table, self.reps, self.seed
                );
                for r in rows {
                    let fmt3 =
                        |v: [f64; 3]| format!("{} {} {}", text6(v[0]), text6(v[1]), text6(v[2]));
                    let ours = r.reproduced.map_or_else(|| "N/A".to_string(), fmt3);
                    let dev = r
                        .reproduced
                        .map(|v| {
                            fmt3([
                                (v[0] - r.reference[0]).abs(),
                                (v[1] - r.reference[1]).abs(),
                                (v[2] - r.reference[2]).abs(),
                            ])
                        })
                        .unwrap_or_else(|| "N/A".to_string());
                    let _ = writeln!(
                        out,
                        "  {:<15} ref {:<30} reproduced {:<40} |dev| {}",
                        r.label,
                        fmt3(r.reference),
                        ours,
                        dev
                    );
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.body {
            TableBody::Estimates {
                model,
                a_rule,
                cells,
            } => {
                out.push_str("model,n,a_rule,criterion,theta0,mean,median,mise,failures,ref_mean,ref_median,ref_mise,dev_mean,dev_median,dev_mise\n");
                for c in cells {
                    let r = c.reproduced;
                    let d = c.deviation();
                    let _ = writeln!(
                        out,
                        "{model},{},{a_rule},{},{},{},{},{},{},{},{},{},{},{},{}",
                        c.n,
                        c.criterion,
                        fmt17(c.theta0),
                        opt_csv(r.map(|v| v[0])),
                        opt_csv(r.map(|v| v[1])),
                        opt_csv(r.map(|v| v[2])),
                        c.failures,
                        fmt17(c.reference[0]),
                        fmt17(c.reference[1]),
                        fmt17(c.reference[2]),
                        opt_csv(d.map(|v| v[0])),
                        opt_csv(d.map(|v| v[1])),
                        opt_csv(d.map(|v| v[2])),
                    );
                }
            }
            TableBody::Correlations { rows, .. } => {
                out.push_str(
                    "method,pearson,kendall,spearman,ref_pearson,ref_kendall,ref_spearman\n",
                );
                for r in rows {
                    let v = r.reproduced;
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        r.label,
                        opt_csv(v.map(|v| v[0])),
                        opt_csv(v.map(|v| v[1])),
                        opt_csv(v.map(|v| v[2])),
                        fmt17(r.reference[0]),
                        fmt17(r.reference[1]),
                        fmt17(r.reference[2]),
                    );
                }
            }
        }
        out
    }
}
