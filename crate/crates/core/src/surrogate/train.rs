//! Full-batch training. One cycle is one optimizer iteration over the whole set.
//!
//! The default trainer is Møller's scaled conjugate gradient: a conjugate
//! direction is combined with a Levenberg-Marquardt style scale `λ` in place of a
//! line search. The curvature along the direction comes from a finite difference
//! of gradients, and a step is only accepted when the error does not increase.

use serde::{Deserialize, Serialize};

use super::net::{scaled_data, scaled_error_grad, SurrogateNet};
use super::{SurrogateError, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Trainer {
    #[default]
    ScaledConjugateGradient,
    /// Steepest descent with step halving; kept for debugging the SCG path.
    GradientDescent { learning_rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: SurrogateNet,
    /// Loss in cost units before and after the run.
    pub initial_loss: f64,
    pub final_loss: f64,
    pub cycles_run: usize,
    /// Set when training ended early on a numerical failure.
    pub diagnostic: Option<String>,
}

struct Objective {
    xs: Vec<Vec<f64>>,
    ts: Vec<f64>,
    d: usize,
    m: usize,
}

impl Objective {
    fn value(&self, w: &[f64]) -> f64 {
        scaled_error_grad(w, self.d, self.m, &self.xs, &self.ts, None)
    }

    fn grad(&self, w: &[f64], g: &mut [f64]) -> f64 {
        scaled_error_grad(w, self.d, self.m, &self.xs, &self.ts, Some(g))
    }
}

/// Trains a copy of `net` on `data` for `cycles` iterations, starting from its
/// current weights. Scalings are left untouched.
pub fn train(
    net: &SurrogateNet,
    data: &TrainingSet,
    cycles: usize,
    trainer: Trainer,
) -> Result<TrainOutcome, SurrogateError> {
    if cycles == 0 {
        return Err(SurrogateError::ZeroCycles);
    }
    if data.dim() != net.d_in {
        return Err(SurrogateError::Dimension {
            expected: net.d_in,
            found: data.dim(),
        });
    }
    if net.weight_count() >= data.len() {
        return Err(SurrogateError::TooManyWeights {
            weights: net.weight_count(),
            samples: data.len(),
        });
    }
    if net.weights.iter().any(|w| !w.is_finite()) {
        return Err(SurrogateError::NonFinite);
    }
    let (xs, ts) = scaled_data(net, data);
    let obj = Objective {
        xs,
        ts,
        d: net.d_in,
        m: net.m_hidden,
    };
    let s2 = net.output_scaling.scale * net.output_scaling.scale;

    let mut w = net.weights.clone();
    let initial = obj.value(&w);
    let (final_err, cycles_run, diagnostic) = match trainer {
        Trainer::ScaledConjugateGradient => scg(&obj, &mut w, cycles),
        Trainer::GradientDescent { learning_rate } => gradient_descent(&obj, &mut w, cycles, learning_rate),
    };
    if let Some(msg) = &diagnostic {
        log::warn!("surrogate training stopped after {cycles_run} cycles: {msg}");
    }
    Ok(TrainOutcome {
        net: SurrogateNet {
            weights: w,
            ..net.clone()
        },
        initial_loss: initial * s2,
        final_loss: final_err * s2,
        cycles_run,
        diagnostic,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scg(obj: &Objective, w: &mut [f64], cycles: usize) -> (f64, usize, Option<String>) {
    const SIGMA0: f64 = 1e-4;
    const BETA_MIN: f64 = 1e-15;
    const BETA_MAX: f64 = 1e100;
    let n = w.len();

    let mut g_new = vec![0.0; n];
    let mut f_old = obj.grad(w, &mut g_new);
    let mut g_old = g_new.clone();
    let mut d: Vec<f64> = g_new.iter().map(|g| -g).collect();
    let mut g_plus = vec![0.0; n];
    let mut trial = vec![0.0; n];

    let mut success = true;
    let mut n_success = 0;
    let mut beta = 1.0;
    let (mut mu, mut kappa, mut theta) = (0.0, 0.0, 0.0);

    for cycle in 1..=cycles {
        if success {
            mu = dot(&d, &g_new);
            if mu >= 0.0 {
                d.iter_mut().zip(&g_new).for_each(|(d, g)| *d = -g);
                mu = dot(&d, &g_new);
            }
            kappa = dot(&d, &d);
            if kappa < f64::EPSILON {
                return (f_old, cycle - 1, None);
            }
            let sigma = SIGMA0 / kappa.sqrt();
            trial
                .iter_mut()
                .zip(w.iter().zip(&d))
                .for_each(|(t, (w, d))| *t = w + sigma * d);
            obj.grad(&trial, &mut g_plus);
            theta = d
                .iter()
                .zip(g_plus.iter().zip(&g_new))
                .map(|(d, (gp, g))| d * (gp - g))
                .sum::<f64>()
                / sigma;
        }

        let mut delta = theta + beta * kappa;
        if delta <= 0.0 {
            delta = beta * kappa;
            beta -= theta / kappa;
        }
        let alpha = -mu / delta;
        trial
            .iter_mut()
            .zip(w.iter().zip(&d))
            .for_each(|(t, (w, d))| *t = w + alpha * d);
        let f_new = obj.value(&trial);
        let comparison = 2.0 * (f_new - f_old) / (alpha * mu);

        if comparison >= 0.0 && f_new.is_finite() {
            success = true;
            n_success += 1;
            w.copy_from_slice(&trial);
            f_old = f_new;
            std::mem::swap(&mut g_old, &mut g_new);
            obj.grad(w, &mut g_new);
            if dot(&g_new, &g_new) == 0.0 {
                return (f_old, cycle, None);
            }
        } else {
            success = false;
            if !comparison.is_finite() && !beta.is_finite() {
                return (f_old, cycle, Some("non-finite step".into()));
            }
        }

        if comparison.is_nan() || comparison < 0.25 {
            beta = (4.0 * beta).min(BETA_MAX);
        }
        if comparison > 0.75 {
            beta = (0.5 * beta).max(BETA_MIN);
        }
        if beta >= BETA_MAX && !success {
            return (f_old, cycle, Some("scale parameter saturated".into()));
        }

        if n_success == n {
            d.iter_mut().zip(&g_new).for_each(|(d, g)| *d = -g);
            n_success = 0;
        } else if success {
            let gamma = (dot(&g_old, &g_new) - dot(&g_new, &g_new)) / mu;
            d.iter_mut().zip(&g_new).for_each(|(d, g)| *d = gamma * *d - g);
        }
    }
    (f_old, cycles, None)
}

fn gradient_descent(obj: &Objective, w: &mut [f64], cycles: usize, lr: f64) -> (f64, usize, Option<String>) {
    let n = w.len();
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut f = obj.grad(w, &mut g);
    let mut step = lr;
    for cycle in 1..=cycles {
        let mut accepted = false;
        for _ in 0..40 {
            trial
                .iter_mut()
                .zip(w.iter().zip(&g))
                .for_each(|(t, (w, g))| *t = w - step * g);
            let f_new = obj.value(&trial);
            if f_new <= f {
                w.copy_from_slice(&trial);
                f = obj.grad(w, &mut g);
                accepted = true;
                step *= 1.2;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (f, cycle, Some("no descent step found".into()));
        }
    }
    (f, cycles, None)
}
