use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SurrogateError, TrainingSet};

/// Per-input affine map `xs = (x − center) / half_range`; bounds map to [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaling {
    pub center: Vec<f64>,
    pub half_range: Vec<f64>,
}

impl InputScaling {
    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self, SurrogateError> {
        if lower.len() != upper.len() {
            return Err(SurrogateError::Dimension {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(upper)
            .any(|(l, u)| !(u > l) || !l.is_finite() || !u.is_finite())
        {
            return Err(SurrogateError::InvalidBounds);
        }
        Ok(Self {
            center: lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
            half_range: lower.iter().zip(upper).map(|(l, u)| 0.5 * (u - l)).collect(),
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            center: vec![0.0; d],
            half_range: vec![1.0; d],
        }
    }

    pub fn scale(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.center.iter().zip(&self.half_range))
            .map(|(x, (c, h))| (x - c) / h)
            .collect()
    }

    pub fn unscale(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter()
            .zip(self.center.iter().zip(&self.half_range))
            .map(|(s, (c, h))| c + s * h)
            .collect()
    }
}

/// `y = offset + scale · o` from the raw network output `o` to cost units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputScaling {
    pub offset: f64,
    pub scale: f64,
}

impl OutputScaling {
    pub fn identity() -> Self {
        Self {
            offset: 0.0,
            scale: 1.0,
        }
    }

    /// Zero mean, unit range over `targets`.
    pub fn from_targets(targets: &[f64]) -> Self {
        if targets.is_empty() {
            return Self::identity();
        }
        let mean = targets.iter().sum::<f64>() / targets.len() as f64;
        let (lo, hi) = targets.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
        let range = hi - lo;
        Self {
            offset: mean,
            scale: if range > 0.0 && range.is_finite() { range } else { 1.0 },
        }
    }
}

/// Two-layer perceptron: tanh hidden units, one linear output.
///
/// Weights are stored flat. The first `m_hidden · (d_in + 1)` entries are the hidden
/// layer, row `j` holding `w⁽¹⁾ⱼ₁ … w⁽¹⁾ⱼd` followed by the bias `w⁽¹⁾ⱼ₀`. The last
/// `m_hidden + 1` entries are `w⁽²⁾₁ … w⁽²⁾M` followed by the output bias `w⁽²⁾₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateNet {
    pub d_in: usize,
    pub m_hidden: usize,
    pub weights: Vec<f64>,
    pub input_scaling: InputScaling,
    pub output_scaling: OutputScaling,
}

pub fn weight_count(d_in: usize, m_hidden: usize) -> usize {
    m_hidden * (d_in + 1) + m_hidden + 1
}

/// Randomly initialized net with inputs scaled from `[lower, upper]`.
///
/// Each weight is uniform in ±1/√fan_in of its layer. Fails if the weight count
/// is not below `planned_samples`.
pub fn init_net(
    d_in: usize,
    m_hidden: usize,
    lower: &[f64],
    upper: &[f64],
    planned_samples: usize,
    seed: u64,
) -> Result<SurrogateNet, SurrogateError> {
    if d_in == 0 || m_hidden == 0 {
        return Err(SurrogateError::Architecture);
    }
    if lower.len() != d_in {
        return Err(SurrogateError::Dimension {
            expected: d_in,
            found: lower.len(),
        });
    }
    let count = weight_count(d_in, m_hidden);
    if count >= planned_samples {
        return Err(SurrogateError::TooManyWeights {
            weights: count,
            samples: planned_samples,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = 1.0 / (d_in as f64).sqrt();
    let a2 = 1.0 / (m_hidden as f64).sqrt();
    let hidden = m_hidden * (d_in + 1);
    let weights = (0..count)
        .map(|i| {
            let a = if i < hidden { a1 } else { a2 };
            rng.random_range(-a..=a)
        })
        .collect();
    Ok(SurrogateNet {
        d_in,
        m_hidden,
        weights,
        input_scaling: InputScaling::from_bounds(lower, upper)?,
        output_scaling: OutputScaling::identity(),
    })
}

impl SurrogateNet {
    /// Net with explicit weights and identity scalings.
    pub fn from_weights(d_in: usize, m_hidden: usize, weights: Vec<f64>) -> Result<Self, SurrogateError> {
        let expected = weight_count(d_in, m_hidden);
        if weights.len() != expected {
            return Err(SurrogateError::Dimension {
                expected,
                found: weights.len(),
            });
        }
        Ok(Self {
            d_in,
            m_hidden,
            weights,
            input_scaling: InputScaling::identity(d_in),
            output_scaling: OutputScaling::identity(),
        })
    }

    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    pub fn w1(&self, j: usize, i: usize) -> f64 {
        self.weights[j * (self.d_in + 1) + i]
    }

    pub fn hidden_bias(&self, j: usize) -> f64 {
        self.weights[j * (self.d_in + 1) + self.d_in]
    }

    pub fn w2(&self, j: usize) -> f64 {
        self.weights[self.m_hidden * (self.d_in + 1) + j]
    }

    pub fn output_bias(&self) -> f64 {
        self.weights[self.m_hidden * (self.d_in + 1) + self.m_hidden]
    }

    /// Sets the output map from the range of `targets`. The represented function changes.
    pub fn fit_output_scaling(&mut self, targets: &[f64]) {
        self.output_scaling = OutputScaling::from_targets(targets);
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64, SurrogateError> {
        if x.len() != self.d_in {
            return Err(SurrogateError::Dimension {
                expected: self.d_in,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SurrogateError::NonFinite);
        }
        let xs = self.input_scaling.scale(x);
        Ok(self.descale(raw_output(&self.weights, self.d_in, self.m_hidden, &xs)))
    }

    fn descale(&self, o: f64) -> f64 {
        self.output_scaling.offset + self.output_scaling.scale * o
    }

    fn check_data(&self, data: &TrainingSet) -> Result<(), SurrogateError> {
        if data.dim() != self.d_in {
            return Err(SurrogateError::Dimension {
                expected: self.d_in,
                found: data.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn raw_output(w: &[f64], d: usize, m: usize, xs: &[f64]) -> f64 {
    let out = m * (d + 1);
    let mut o = w[out + m];
    for j in 0..m {
        let row = &w[j * (d + 1)..(j + 1) * (d + 1)];
        let a: f64 = row[..d].iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() + row[d];
        o += w[out + j] * a.tanh();
    }
    o
}

/// Sum-of-squares error in scaled output units and its gradient with respect to
/// the flat weight vector. `xs`/`ts` are pre-scaled inputs and targets.
pub(crate) fn scaled_error_grad(
    w: &[f64],
    d: usize,
    m: usize,
    xs: &[Vec<f64>],
    ts: &[f64],
    grad: Option<&mut [f64]>,
) -> f64 {
    let out = m * (d + 1);
    let mut hidden = vec![0.0; m];
    let mut e = 0.0;
    let mut g = grad;
    if let Some(g) = g.as_deref_mut() {
        g.fill(0.0);
    }
    for (x, &t) in xs.iter().zip(ts) {
        let mut o = w[out + m];
        for j in 0..m {
            let row = &w[j * (d + 1)..(j + 1) * (d + 1)];
            let a: f64 = row[..d].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + row[d];
            hidden[j] = a.tanh();
            o += w[out + j] * hidden[j];
        }
        let r = o - t;
        e += r * r;
        if let Some(g) = g.as_deref_mut() {
            let delta_out = 2.0 * r;
            for j in 0..m {
                g[out + j] += delta_out * hidden[j];
                let delta_h = delta_out * w[out + j] * (1.0 - hidden[j] * hidden[j]);
                let grow = &mut g[j * (d + 1)..(j + 1) * (d + 1)];
                for i in 0..d {
                    grow[i] += delta_h * x[i];
                }
                grow[d] += delta_h;
            }
            g[out + m] += delta_out;
        }
    }
    e
}

/// `Σₙ (tₙ − yₙ)²` in cost units.
pub fn loss(net: &SurrogateNet, data: &TrainingSet) -> Result<f64, SurrogateError> {
    net.check_data(data)?;
    data.inputs()
        .iter()
        .zip(data.targets())
        .map(|(x, t)| net.forward(x).map(|y| (t - y) * (t - y)))
        .sum()
}

/// Exact gradient of [`loss`] with respect to every weight, in the flat layout.
pub fn grad(net: &SurrogateNet, data: &TrainingSet) -> Result<Vec<f64>, SurrogateError> {
    net.check_data(data)?;
    let (xs, ts) = scaled_data(net, data);
    let mut g = vec![0.0; net.weight_count()];
    scaled_error_grad(&net.weights, net.d_in, net.m_hidden, &xs, &ts, Some(&mut g));
    let s2 = net.output_scaling.scale * net.output_scaling.scale;
    g.iter_mut().for_each(|v| *v *= s2);
    Ok(g)
}

pub(crate) fn scaled_data(net: &SurrogateNet, data: &TrainingSet) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs = data.inputs().iter().map(|x| net.input_scaling.scale(x)).collect();
    let OutputScaling { offset, scale } = net.output_scaling;
    let ts = data.targets().iter().map(|t| (t - offset) / scale).collect();
    (xs, ts)
}
