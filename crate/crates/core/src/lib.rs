//! Semi-parametric transformation boundary regression.
//!
//! A response `Y` is observed together with a covariate `x` in `[0, 1]`. For
//! some member `Lambda` of a parametric family of increasing transformations,
//! `Lambda(Y) = h(x) + eps` with `eps <= 0` independent of `x`. The crate
//! estimates the transformation parameter by minimizing a distance between the
//! joint empirical distribution of residuals and covariates and the product
//! of its marginals, and estimates the boundary `h` by a smoothed windowed
//! maximum.
//!
//! Modules:
//! - [`transform`]: Yeo-Johnson and sinh-arcsinh families.
//! - [`boundary`]: datasets, local-constant and smoothed boundary fits.
//! - [`mdist`]: criterion process, semi-norms and the parameter search.
//! - [`simgen`]: simulation models and reproducible data generation.
//! - [`experiments`]: Monte Carlo harness and table reproduction.

pub mod boundary;
pub mod correlation;
pub mod error;
pub mod experiments;
pub mod io;
pub mod mdist;
pub mod simgen;
pub mod tables;
pub mod transform;

pub use boundary::{
    epanechnikov, local_constant_fit, smooth_fit, BoundaryFit, Dataset, Design, Sample, SmoothFit,
};
pub use error::{Error, Result};
pub use mdist::{
    empirical_cdf_x, gn_eval, minimize_theta, mn, residuals, Bandwidths, BoundaryKind,
    CriterionKind, CriterionSpec, CriterionSurface, SearchOptions, ThetaEstimate, YGrid,
};
pub use simgen::{make_dataset, Model, ScenarioSpec};
pub use transform::{sas_forward, yj_forward, yj_inverse, Family, ParamBox, TransformSpec};
