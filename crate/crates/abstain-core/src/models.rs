//! Rejector function families.
//!
//! A rejector maps an example to a real output; positive means accept. Four
//! families: a constant, a linear map, a one-hidden-layer tanh network, and
//! a score offset that ignores features and thresholds the upstream
//! confidence score instead.
//!
//! Trainable families expose their parameters as a single flat vector
//! ([`Rejector::params_flat`] / [`Rejector::with_params`]) with gradients in
//! the same layout, so the trainer needs no knowledge of the architecture.
//! Serialization uses the same flat layout and round-trips doubles
//! bit-faithfully.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Example;
use crate::error::{CoreError, Result};

pub const DEFAULT_MLP_WIDTH: usize = 16;
pub const DEFAULT_SCORE_OFFSET: f64 = 0.5;

/// Architecture choice handed to [`init_rejector`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RejectorSpec {
    Constant,
    Linear,
    Mlp1 { width: usize },
    ScoreOffset { offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejector {
    /// `r(x) = bias`, ignoring the input.
    Constant { dim: usize, bias: f64 },
    /// `r(x) = w . x + bias`.
    Linear {
        dim: usize,
        weights: Vec<f64>,
        bias: f64,
    },
    /// One tanh hidden layer: `r(x) = w2 . tanh(W1 x + b1) + b2`. `w1` is
    /// row-major: hidden unit `h` owns `w1[h*dim .. (h+1)*dim]`.
    Mlp1 {
        dim: usize,
        width: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    },
    /// `r = score - offset`, reading the example's score field. Has no
    /// feature dimension (dim 0) and no trainable parameters.
    ScoreOffset { offset: f64 },
}

/// Draws a fresh rejector. Linear and hidden-layer parameters are uniform in
/// `[-s, s]` with `s = 1/sqrt(fan_in)`; the constant starts at 0.
/// Deterministic per seed.
pub fn init_rejector(spec: RejectorSpec, dim: usize, seed: u64) -> Result<Rejector> {
    match spec {
        RejectorSpec::ScoreOffset { offset } => {
            if !offset.is_finite() {
                return Err(CoreError::InvalidRejector(format!(
                    "offset must be finite, got {offset}"
                )));
            }
            Ok(Rejector::ScoreOffset { offset })
        }
        _ if dim == 0 => Err(CoreError::InvalidRejector(
            "parametric rejectors need dim >= 1".into(),
        )),
        RejectorSpec::Constant => Ok(Rejector::Constant { dim, bias: 0.0 }),
        RejectorSpec::Linear => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = 1.0 / (dim as f64).sqrt();
            let weights = (0..dim).map(|_| rng.random_range(-s..s)).collect();
            let bias = rng.random_range(-s..s);
            Ok(Rejector::Linear { dim, weights, bias })
        }
        RejectorSpec::Mlp1 { width } => {
            if width == 0 {
                return Err(CoreError::InvalidRejector(
                    "hidden width must be >= 1".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s_in = 1.0 / (dim as f64).sqrt();
            let s_out = 1.0 / (width as f64).sqrt();
            let w1 = (0..width * dim).map(|_| rng.random_range(-s_in..s_in)).collect();
            let b1 = (0..width).map(|_| rng.random_range(-s_in..s_in)).collect();
            let w2 = (0..width).map(|_| rng.random_range(-s_out..s_out)).collect();
            let b2 = rng.random_range(-s_out..s_out);
            Ok(Rejector::Mlp1 {
                dim,
                width,
                w1,
                b1,
                w2,
                b2,
            })
        }
    }
}

impl Rejector {
    pub fn dim(&self) -> usize {
        match self {
            Rejector::Constant { dim, .. } => *dim,
            Rejector::Linear { dim, .. } => *dim,
            Rejector::Mlp1 { dim, .. } => *dim,
            Rejector::ScoreOffset { .. } => 0,
        }
    }

    pub fn reads_score(&self) -> bool {
        matches!(self, Rejector::ScoreOffset { .. })
    }

    pub fn trainable(&self) -> bool {
        !self.reads_score()
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Rejector::Constant { .. } => "constant",
            Rejector::Linear { .. } => "linear",
            Rejector::Mlp1 { .. } => "mlp1",
            Rejector::ScoreOffset { .. } => "score-offset",
        }
    }

    /// Rejector output for an example; positive accepts.
    pub fn predict(&self, example: &Example) -> Result<f64> {
        if let Rejector::ScoreOffset { offset } = self {
            let score = example.score.ok_or(CoreError::ScoreRequired)?;
            return Ok(score - offset);
        }
        if example.features.len() != self.dim() {
            return Err(CoreError::RejectorDimension {
                expected: self.dim(),
                found: example.features.len(),
            });
        }
        Ok(self.predict_features(&example.features))
    }

    /// Output on a raw feature vector. Feature-reading families only; the
    /// score-offset family has no feature-space value.
    pub fn predict_features(&self, x: &[f64]) -> f64 {
        match self {
            Rejector::Constant { bias, .. } => *bias,
            Rejector::Linear { weights, bias, .. } => {
                weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias
            }
            Rejector::Mlp1 {
                dim,
                width,
                w1,
                b1,
                w2,
                b2,
            } => {
                let mut out = *b2;
                for h in 0..*width {
                    let z: f64 = w1[h * dim..(h + 1) * dim]
                        .iter()
                        .zip(x)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
                        + b1[h];
                    out += w2[h] * z.tanh();
                }
                out
            }
            Rejector::ScoreOffset { .. } => {
                panic!("score-offset rejector evaluated on features; call predict with an example")
            }
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Rejector::Constant { .. } => 1,
            Rejector::Linear { dim, .. } => dim + 1,
            Rejector::Mlp1 { dim, width, .. } => width * dim + 2 * width + 1,
            Rejector::ScoreOffset { .. } => 1,
        }
    }

    /// All parameters as one vector. Layout: constant `[bias]`; linear
    /// `[w, bias]`; mlp1 `[w1 row-major, b1, w2, b2]`; score-offset
    /// `[offset]`.
    pub fn params_flat(&self) -> Vec<f64> {
        match self {
            Rejector::Constant { bias, .. } => vec![*bias],
            Rejector::Linear { weights, bias, .. } => {
                let mut p = weights.clone();
                p.push(*bias);
                p
            }
            Rejector::Mlp1 {
                w1, b1, w2, b2, ..
            } => {
                let mut p = w1.clone();
                p.extend_from_slice(b1);
                p.extend_from_slice(w2);
                p.push(*b2);
                p
            }
            Rejector::ScoreOffset { offset } => vec![*offset],
        }
    }

    /// Same architecture with parameters replaced from a flat vector.
    pub fn with_params(&self, flat: &[f64]) -> Result<Rejector> {
        if flat.len() != self.n_params() {
            return Err(CoreError::InvalidRejector(format!(
                "{} rejector takes {} parameters, got {}",
                self.family_name(),
                self.n_params(),
                flat.len()
            )));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidRejector(
                "parameters must be finite".into(),
            ));
        }
        Ok(match self {
            Rejector::Constant { dim, .. } => Rejector::Constant {
                dim: *dim,
                bias: flat[0],
            },
            Rejector::Linear { dim, .. } => Rejector::Linear {
                dim: *dim,
                weights: flat[..*dim].to_vec(),
                bias: flat[*dim],
            },
            Rejector::Mlp1 { dim, width, .. } => {
                let (d, w) = (*dim, *width);
                Rejector::Mlp1 {
                    dim: d,
                    width: w,
                    w1: flat[..w * d].to_vec(),
                    b1: flat[w * d..w * d + w].to_vec(),
                    w2: flat[w * d + w..w * d + 2 * w].to_vec(),
                    b2: flat[w * d + 2 * w],
                }
            }
            Rejector::ScoreOffset { .. } => Rejector::ScoreOffset { offset: flat[0] },
        })
    }

    /// Gradient of `upstream * predict(x)` with respect to each parameter,
    /// in [`Rejector::params_flat`] layout. `upstream` carries dl/dr.
    pub fn param_grad(&self, x: &[f64], upstream: f64) -> Result<Vec<f64>> {
        match self {
            Rejector::Constant { .. } => Ok(vec![upstream]),
            Rejector::Linear { dim, .. } => {
                let mut g: Vec<f64> = x[..*dim].iter().map(|v| upstream * v).collect();
                g.push(upstream);
                Ok(g)
            }
            Rejector::Mlp1 {
                dim,
                width,
                w1,
                b1,
                w2,
                ..
            } => {
                let (d, w) = (*dim, *width);
                let mut g = vec![0.0; self.n_params()];
                for h in 0..w {
                    let z: f64 = w1[h * d..(h + 1) * d]
                        .iter()
                        .zip(x)
                        .map(|(wv, v)| wv * v)
                        .sum::<f64>()
                        + b1[h];
                    let t = z.tanh();
                    let dt = 1.0 - t * t;
                    let back = upstream * w2[h] * dt;
                    for i in 0..d {
                        g[h * d + i] = back * x[i];
                    }
                    g[w * d + h] = back;
                    g[w * d + w + h] = upstream * t;
                }
                g[w * d + 2 * w] = upstream;
                Ok(g)
            }
            Rejector::ScoreOffset { .. } => Err(CoreError::NonTrainable {
                variant: "score-offset",
            }),
        }
    }
}

/// Wire form: `{variant, dim, params}` plus `width` for the hidden-layer
/// family. Doubles survive the round trip bit-for-bit.
#[derive(Debug, Serialize, Deserialize)]
struct RejectorWire {
    variant: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<usize>,
    params: Vec<f64>,
}

pub fn to_json(rejector: &Rejector) -> String {
    let wire = RejectorWire {
        variant: rejector.family_name().to_string(),
        dim: rejector.dim(),
        width: match rejector {
            Rejector::Mlp1 { width, .. } => Some(*width),
            _ => None,
        },
        params: rejector.params_flat(),
    };
    serde_json::to_string(&wire).expect("rejector wire form always serializes")
}

pub fn from_json(text: &str) -> Result<Rejector> {
    let wire: RejectorWire = serde_json::from_str(text)?;
    let skeleton = match wire.variant.as_str() {
        "constant" => {
            if wire.dim == 0 {
                return Err(CoreError::InvalidRejector("constant needs dim >= 1".into()));
            }
            Rejector::Constant {
                dim: wire.dim,
                bias: 0.0,
            }
        }
        "linear" => {
            if wire.dim == 0 {
                return Err(CoreError::InvalidRejector("linear needs dim >= 1".into()));
            }
            Rejector::Linear {
                dim: wire.dim,
                weights: vec![0.0; wire.dim],
                bias: 0.0,
            }
        }
        "mlp1" => {
            let width = wire.width.ok_or_else(|| {
                CoreError::InvalidRejector("mlp1 wire form needs a width field".into())
            })?;
            if wire.dim == 0 || width == 0 {
                return Err(CoreError::InvalidRejector(
                    "mlp1 needs dim >= 1 and width >= 1".into(),
                ));
            }
            Rejector::Mlp1 {
                dim: wire.dim,
                width,
                w1: vec![0.0; width * wire.dim],
                b1: vec![0.0; width],
                w2: vec![0.0; width],
                b2: 0.0,
            }
        }
        "score-offset" => {
            if wire.dim != 0 {
                return Err(CoreError::InvalidRejector(
                    "score-offset has dim 0 by definition".into(),
                ));
            }
            Rejector::ScoreOffset { offset: 0.0 }
        }
        other => {
            return Err(CoreError::InvalidRejector(format!(
                "unknown variant {other:?}"
            )))
        }
    };
    skeleton.with_params(&wire.params)
}

pub fn save_json<P: AsRef<Path>>(rejector: &Rejector, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(to_json(rejector).as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_json<P: AsRef<Path>>(path: P) -> Result<Rejector> {
    let mut text = String::new();
    use std::io::Read as _;
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    from_json(&text)
}
