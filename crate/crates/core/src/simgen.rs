//! Synthetic data for the four simulation models.
//!
//! Responses are generated on the original scale as
//! `Y = Lambda_theta0^{-1}(h0(x) + eps)` with nonpositive errors, so that
//! `h0` is the upper boundary of the transformed responses.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::{Dataset, Design, Sample};
use crate::error::{Error, Result};
use crate::transform::TransformSpec;

const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regression {
    /// `10 (x - 1/2)^2`
    Parabola,
    /// `sin(2 pi x) / 2 + 4 x`
    SineLinear,
}

pub fn regression_value(kind: Regression, x: f64) -> f64 {
    match kind {
        Regression::Parabola => 10.0 * (x - 0.5) * (x - 0.5),
        Regression::SineLinear => 0.5 * (2.0 * std::f64::consts::PI * x).sin() + 4.0 * x,
    }
}

/// Error laws; draws are negated so every error is `<= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorLaw {
    /// `-W` with `W ~ Weibull(scale 1, shape 3)`.
    WeibullNeg,
    /// `-E` with `E ~ Exp(rate 3)`.
    ExpNeg,
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // gen::<f64>() is in [0, 1); flip to (0, 1]
    1.0 - rng.gen::<f64>()
}

pub fn sample_error<R: Rng + ?Sized>(kind: ErrorLaw, rng: &mut R) -> f64 {
    let u = open_unit(rng);
    match kind {
        ErrorLaw::WeibullNeg => -(-u.ln()).cbrt(),
        ErrorLaw::ExpNeg => u.ln() / 3.0,
    }
}

pub fn sample_errors<R: Rng + ?Sized>(kind: ErrorLaw, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| sample_error(kind, rng)).collect()
}

/// The four simulation models, numbered 1 to 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    ParabolaWeibull,
    ParabolaExp,
    SineLinearWeibull,
    SineLinearExp,
}

impl Model {
    pub const ALL: [Model; 4] = [
        Model::ParabolaWeibull,
        Model::ParabolaExp,
        Model::SineLinearWeibull,
        Model::SineLinearExp,
    ];

    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Model::ParabolaWeibull),
            2 => Ok(Model::ParabolaExp),
            3 => Ok(Model::SineLinearWeibull),
            4 => Ok(Model::SineLinearExp),
            _ => Err(Error::Argument(format!("model must be 1..4, got {k}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Model::ParabolaWeibull => 1,
            Model::ParabolaExp => 2,
            Model::SineLinearWeibull => 3,
            Model::SineLinearExp => 4,
        }
    }

    pub fn regression(self) -> Regression {
        match self {
            Model::ParabolaWeibull | Model::ParabolaExp => Regression::Parabola,
            Model::SineLinearWeibull | Model::SineLinearExp => Regression::SineLinear,
        }
    }

    pub fn error_law(self) -> ErrorLaw {
        match self {
            Model::ParabolaWeibull | Model::SineLinearWeibull => ErrorLaw::WeibullNeg,
            Model::ParabolaExp | Model::SineLinearExp => ErrorLaw::ExpNeg,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub model: Model,
    pub theta0: f64,
    pub n: usize,
    pub design: Design,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Argument(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if !(-0.5..=2.5).contains(&self.theta0) {
            return Err(Error::Argument(format!(
                "theta0 must lie in [-0.5, 2.5], got {}",
                self.theta0
            )));
        }
        Ok(())
    }

    pub fn truth(&self) -> TransformSpec {
        TransformSpec::yeo_johnson(self.theta0).expect("validated theta0 is finite")
    }
}

/// Equidistant interior design `i / (n + 1)`, `i = 1..n`.
pub fn fixed_design(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a key path.
pub fn stream_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |acc, &k| {
        splitmix64(acc ^ splitmix64(k))
    })
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `Lambda^{-1}(h + eps)`, redrawing `eps` while `h + eps` falls
/// outside the image of `truth`.
fn draw_response<R: Rng + ?Sized>(
    truth: &TransformSpec,
    h: f64,
    law: ErrorLaw,
    rng: &mut R,
    index: usize,
) -> Result<f64> {
    let mut last = None;
    for _ in 0..MAX_REDRAWS {
        match truth.inverse(h + sample_error(law, rng)) {
            Ok(y) => return Ok(y),
            Err(e) => last = Some(e),
        }
    }
    let reason = last.map_or_else(|| "no draws".to_string(), |e| e.to_string());
    Err(Error::Generation { index, reason })
}

pub fn make_dataset(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let xs = match spec.design {
        Design::Fixed => fixed_design(spec.n),
        Design::Random => {
            let mut xs: Vec<f64> = (0..spec.n).map(|_| rng.gen::<f64>()).collect();
            xs.sort_by(f64::total_cmp);
            xs
        }
    };
    let truth = spec.truth();
    let regression = spec.model.regression();
    let law = spec.model.error_law();
    let mut samples = Vec::with_capacity(spec.n);
    for (i, &x) in xs.iter().enumerate() {
        let h = regression_value(regression, x);
        let y = draw_response(&truth, h, law, &mut rng, i)?;
        samples.push(Sample { x, y });
    }
    Dataset::new(samples, spec.design)
}
