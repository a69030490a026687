//! Parametric families of strictly increasing response transformations.
//!
//! Every member maps `0` to `0`. The Yeo-Johnson family is onto the real line
//! only for `theta` in `[0, 2]`; outside that range its image is a half-bounded
//! interval and [`yj_inverse`] reports values that fall outside it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this distance from 0 (resp. 2) the logarithmic branch is used.
const BRANCH_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    YeoJohnson,
    SinhArcsinh,
    Identity,
}

impl Family {
    pub fn dim(self) -> usize {
        match self {
            Family::YeoJohnson => 1,
            Family::SinhArcsinh => 2,
            Family::Identity => 0,
        }
    }

    /// Default search box for the family's parameters.
    pub fn default_box(self) -> ParamBox {
        match self {
            Family::YeoJohnson => ParamBox::new(vec![(-0.5, 2.5)]).unwrap(),
            Family::SinhArcsinh => ParamBox::new(vec![(0.2, 5.0), (-2.0, 2.0)]).unwrap(),
            Family::Identity => ParamBox::new(vec![]).unwrap(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::YeoJohnson => "yeo-johnson",
            Family::SinhArcsinh => "sinh-arcsinh",
            Family::Identity => "identity",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "yeo-johnson" | "yj" | "yeojohnson" => Ok(Family::YeoJohnson),
            "sinh-arcsinh" | "sas" | "sinharcsinh" => Ok(Family::SinhArcsinh),
            "identity" | "id" => Ok(Family::Identity),
            other => Err(Error::Argument(format!(
                "unknown transformation family `{other}`"
            ))),
        }
    }
}

/// Axis-aligned box of admissible parameter values, one `(lo, hi)` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    bounds: Vec<(f64, f64)>,
}

impl ParamBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &bounds {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::Argument(format!(
                    "empty or non-finite parameter interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(ParamBox { bounds })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.bounds.len()
            && theta
                .iter()
                .zip(&self.bounds)
                .all(|(&t, &(lo, hi))| lo <= t && t <= hi)
    }
}

/// A family together with a concrete parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    family: Family,
    params: Vec<f64>,
}

impl TransformSpec {
    pub fn new(family: Family, params: Vec<f64>) -> Result<Self> {
        if params.len() != family.dim() {
            return Err(Error::Parameter(format!(
                "{family} expects {} parameter(s), got {}",
                family.dim(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter(
                "non-finite transformation parameter".into(),
            ));
        }
        if family == Family::SinhArcsinh && params[0] <= 0.0 {
            return Err(Error::Parameter(format!(
                "sinh-arcsinh tailweight must be positive, got {}",
                params[0]
            )));
        }
        Ok(TransformSpec { family, params })
    }

    pub fn yeo_johnson(theta: f64) -> Result<Self> {
        Self::new(Family::YeoJohnson, vec![theta])
    }

    pub fn sinh_arcsinh(tailweight: f64, skewness: f64) -> Result<Self> {
        Self::new(Family::SinhArcsinh, vec![tailweight, skewness])
    }

    pub fn identity() -> Self {
        TransformSpec {
            family: Family::Identity,
            params: Vec::new(),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn forward(&self, y: f64) -> Result<f64> {
        match self.family {
            Family::YeoJohnson => yj_forward(self.params[0], y),
            Family::SinhArcsinh => sas_forward(self.params[0], self.params[1], y),
            Family::Identity => finite(y).map(|_| y),
        }
    }

    pub fn inverse(&self, z: f64) -> Result<f64> {
        match self.family {
            Family::YeoJohnson => yj_inverse(self.params[0], z),
            Family::SinhArcsinh => sas_inverse(self.params[0], self.params[1], z),
            Family::Identity => finite(z).map(|_| z),
        }
    }

    /// Open interval `(lower, upper)` forming the image of the map.
    pub fn range(&self) -> (f64, f64) {
        match self.family {
            Family::YeoJohnson => yj_range(self.params[0]),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Applies the forward map to every element.
    pub fn forward_all(&self, ys: &[f64]) -> Result<Vec<f64>> {
        ys.iter()
            .map(|&y| {
                let z = self.forward(y)?;
                if z.is_finite() {
                    Ok(z)
                } else {
                    Err(Error::Domain(format!(
                        "transformation of {y} is not finite"
                    )))
                }
            })
            .collect()
    }
}

fn finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite input {v}")))
    }
}

/// Yeo-Johnson transformation.
pub fn yj_forward(theta: f64, y: f64) -> Result<f64> {
    finite(theta)?;
    finite(y)?;
    if theta == 1.0 {
        return Ok(y);
    }
    let v = if y >= 0.0 {
        if theta.abs() < BRANCH_EPS {
            y.ln_1p()
        } else {
            (theta * y.ln_1p()).exp_m1() / theta
        }
    } else {
        let p = 2.0 - theta;
        if p.abs() < BRANCH_EPS {
            -(-y).ln_1p()
        } else {
            -(p * (-y).ln_1p()).exp_m1() / p
        }
    };
    Ok(v)
}

/// Image of the Yeo-Johnson map as an open interval.
pub fn yj_range(theta: f64) -> (f64, f64) {
    let upper = if theta < -BRANCH_EPS {
        -1.0 / theta
    } else {
        f64::INFINITY
    };
    let p = 2.0 - theta;
    let lower = if p < -BRANCH_EPS {
        1.0 / p
    } else {
        f64::NEG_INFINITY
    };
    (lower, upper)
}

/// Inverse of [`yj_forward`] on its image.
pub fn yj_inverse(theta: f64, z: f64) -> Result<f64> {
    finite(theta)?;
    finite(z)?;
    let (lower, upper) = yj_range(theta);
    if z <= lower || z >= upper {
        return Err(Error::Range {
            value: z,
            lower,
            upper,
        });
    }
    if theta == 1.0 {
        return Ok(z);
    }
    let y = if z >= 0.0 {
        if theta.abs() < BRANCH_EPS {
            z.exp_m1()
        } else {
            ((theta * z).ln_1p() / theta).exp_m1()
        }
    } else {
        let p = 2.0 - theta;
        if p.abs() < BRANCH_EPS {
            -(-z).exp_m1()
        } else {
            -((-p * z).ln_1p() / p).exp_m1()
        }
    };
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Range {
            value: z,
            lower,
            upper,
        })
    }
}

/// Sinh-arcsinh transformation shifted so that 0 maps to 0.
pub fn sas_forward(tailweight: f64, skewness: f64, y: f64) -> Result<f64> {
    check_sas(tailweight, skewness)?;
    finite(y)?;
    Ok((tailweight * y.asinh() - skewness).sinh() + skewness.sinh())
}

pub fn sas_inverse(tailweight: f64, skewness: f64, z: f64) -> Result<f64> {
    check_sas(tailweight, skewness)?;
    finite(z)?;
    Ok((((z - skewness.sinh()).asinh() + skewness) / tailweight).sinh())
}

fn check_sas(tailweight: f64, skewness: f64) -> Result<()> {
    if !(tailweight > 0.0) || !tailweight.is_finite() {
        return Err(Error::Parameter(format!(
            "sinh-arcsinh tailweight must be positive, got {tailweight}"
        )));
    }
    if !skewness.is_finite() {
        return Err(Error::Parameter("non-finite sinh-arcsinh skewness".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn yj_examples() {
        assert_eq!(yj_forward(1.0, 5.0).unwrap(), 5.0);
        for theta in [-0.5, 0.0, 0.3, 1.0, 2.0, 2.5] {
            assert_eq!(yj_forward(theta, 0.0).unwrap(), 0.0);
        }
        assert_relative_eq!(
            yj_forward(2.0, -0.5).unwrap(),
            -(1.5f64).ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(yj_forward(2.0, -0.5).unwrap(), -0.4054651, epsilon = 1e-7);
        assert_relative_eq!(
            yj_forward(0.0, std::f64::consts::E - 1.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn yj_inverse_examples() {
        assert_relative_eq!(yj_inverse(1.0, -3.0).unwrap(), -3.0, max_relative = 1e-15);
        let z = yj_forward(0.5, 2.7).unwrap();
        assert_relative_eq!(yj_inverse(0.5, z).unwrap(), 2.7, max_relative = 1e-14);
        assert_relative_eq!(
            yj_inverse(2.0, -(1.5f64).ln()).unwrap(),
            -0.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn non_finite_input_is_domain_error() {
        assert!(matches!(yj_forward(1.0, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(
            yj_forward(f64::INFINITY, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            yj_inverse(1.0, f64::NEG_INFINITY),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn inverse_outside_range_reports_interval() {
        // theta = -0.5: image of [0, inf) is [0, 2)
        match yj_inverse(-0.5, 2.0) {
            Err(Error::Range { upper, .. }) => assert_eq!(upper, 2.0),
            other => panic!("expected range error, got {other:?}"),
        }
        // theta = 2.5: image of (-inf, 0) is (-2, 0)
        match yj_inverse(2.5, -2.5) {
            Err(Error::Range { lower, .. }) => assert_eq!(lower, -2.0),
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(yj_inverse(2.5, -1.9).is_ok());
    }

    #[test]
    fn branch_continuity() {
        for y in [0.5, 5.0, 50.0] {
            let d = (yj_forward(1e-9, y).unwrap() - yj_forward(0.0, y).unwrap()).abs();
            assert!(d < 1e-6, "y={y} d={d}");
        }
        for y in [-0.5, -5.0, -50.0] {
            let d = (yj_forward(2.0 - 1e-9, y).unwrap() - yj_forward(2.0, y).unwrap()).abs();
            assert!(d < 1e-6, "y={y} d={d}");
        }
    }

    #[test]
    fn theta_slope_bounded_on_grid() {
        let h = 1e-6;
        for y in [-3.0, -0.5, 0.7, 4.0] {
            let mut t = -0.5;
            while t <= 2.5 - h {
                let slope = (yj_forward(t + h, y).unwrap() - yj_forward(t, y).unwrap()) / h;
                assert!(
                    slope.is_finite() && slope.abs() < 50.0,
                    "theta={t} y={y} slope={slope}"
                );
                t += 0.01;
            }
        }
    }

    #[test]
    fn sas_examples() {
        assert_relative_eq!(
            sas_forward(1.0, 0.0, 7.0).unwrap(),
            7.0,
            max_relative = 1e-14
        );
        for (a, b) in [(0.3, -1.0), (1.0, 0.5), (4.0, 2.0)] {
            assert_eq!(sas_forward(a, b, 0.0).unwrap(), 0.0);
        }
        assert_relative_eq!(
            sas_forward(2.0, 0.0, 1.0).unwrap(),
            2.8284271,
            epsilon = 1e-7
        );
        assert!(matches!(
            sas_forward(0.0, 0.0, 1.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            TransformSpec::sinh_arcsinh(-1.0, 0.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn spec_arity_checked() {
        assert!(TransformSpec::new(Family::YeoJohnson, vec![]).is_err());
        assert!(TransformSpec::new(Family::Identity, vec![1.0]).is_err());
        assert_eq!("sas".parse::<Family>().unwrap(), Family::SinhArcsinh);
    }

    #[test]
    fn monotone_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let theta = rng.gen_range(-0.5..=2.5);
            let a = rng.gen_range(-20.0..20.0);
            let b = rng.gen_range(-20.0..20.0);
            let (y1, y2) = if a < b { (a, b) } else { (b, a) };
            if y1 == y2 {
                continue;
            }
            assert!(yj_forward(theta, y1).unwrap() < yj_forward(theta, y2).unwrap());
        }
    }

    proptest! {
        #[test]
        fn yj_round_trip(theta in -0.5f64..2.5, y in -30.0f64..30.0) {
            let z = yj_forward(theta, y).unwrap();
            let back = yj_inverse(theta, z).unwrap();
            prop_assert!((back - y).abs() <= 1e-10 * y.abs().max(1e-300) || (back - y).abs() < 1e-14);
        }

        #[test]
        fn yj_inverse_then_forward(theta in 0.0f64..2.0, z in -10.0f64..10.0) {
            let y = yj_inverse(theta, z).unwrap();
            let back = yj_forward(theta, y).unwrap();
            prop_assert!((back - z).abs() <= 1e-10 * z.abs() || (back - z).abs() < 1e-14);
        }

        #[test]
        fn sas_round_trip_and_monotone(a in 0.2f64..5.0, b in -2.0f64..2.0, y1 in -10.0f64..10.0, d in 1e-3f64..5.0) {
            let z = sas_forward(a, b, y1).unwrap();
            let back = sas_inverse(a, b, z).unwrap();
            prop_assert!((back - y1).abs() <= 1e-8 * y1.abs().max(1.0));
            prop_assert!(sas_forward(a, b, y1 + d).unwrap() > z);
        }
    }
}
