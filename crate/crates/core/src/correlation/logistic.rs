//! Four-parameter logistic mapping fitted with Levenberg-Marquardt.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 10_000;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

/// `f(x) = b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl LogisticParams {
    pub fn eval(&self, x: f64) -> f64 {
        // midpoint plus half-range times tanh(z/2): same curve, exact at x = beta3
        let z = (x - self.beta3) / self.beta4.abs();
        0.5 * (self.beta1 + self.beta2) + 0.5 * (self.beta1 - self.beta2) * (0.5 * z).tanh()
    }

    fn from_array(b: [f64; 4]) -> Self {
        LogisticParams {
            beta1: b[0],
            beta2: b[1],
            beta3: b[2],
            beta4: b[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub sse: f64,
    /// SSE of the starting point followed by every accepted step.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn sse(params: &LogisticParams, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (y - params.eval(x)).powi(2)).sum()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for k in 0..4 {
        let pivot = (k..4).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[pivot][k] == 0.0 || !a[pivot][k].is_finite() {
            return None;
        }
        a.swap(k, pivot);
        b.swap(k, pivot);
        for i in (k + 1)..4 {
            let f = a[i][k] / a[k][k];
            for j in k..4 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 4];
    for k in (0..4).rev() {
        let s: f64 = ((k + 1)..4).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Damped least-squares fit of the logistic curve to `(xs, ys)`.
///
/// Non-convergence is not an error: the best parameters found are returned with
/// `converged == false`.
pub fn fit_logistic(xs: &[f64], ys: &[f64]) -> Result<LogisticFit> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!("{} xs vs {} ys", xs.len(), ys.len())));
    }
    if xs.len() < 5 {
        return Err(Error::Insufficient(format!("logistic fit needs 5 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("xs", "non-finite value"));
    }
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if x_max == x_min {
        return Err(Error::invalid("xs", "all metric values are equal"));
    }
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x_range = x_max - x_min;
    let y_scale = (y_max - y_min).max(y_max.abs()).max(1.0);
    let min_slope = 1e-9 * x_range;

    let mut beta = [y_max, y_min, median(xs), x_range / 4.0];
    let mut current = sse(&LogisticParams::from_array(beta), xs, ys);
    let mut history = vec![current];
    let mut lambda = 1e-3;
    let mut converged = current == 0.0;
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let steps = [1e-7 * y_scale, 1e-7 * y_scale, 1e-7 * x_range, 1e-7 * x_range];
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&x, &y) in xs.iter().zip(ys) {
            let p = LogisticParams::from_array(beta);
            let r = y - p.eval(x);
            let mut g = [0.0; 4];
            for (k, gk) in g.iter_mut().enumerate() {
                let h = steps[k].max(1e-7 * beta[k].abs());
                let mut up = beta;
                let mut down = beta;
                up[k] += h;
                down[k] -= h;
                *gk = (LogisticParams::from_array(up).eval(x) - LogisticParams::from_array(down).eval(x)) / (2.0 * h);
            }
            for i in 0..4 {
                jtr[i] += g[i] * r;
                for j in 0..4 {
                    jtj[i][j] += g[i] * g[j];
                }
            }
        }
        let mut damped = jtj;
        for (i, row) in damped.iter_mut().enumerate() {
            row[i] += lambda * jtj[i][i].max(1e-12);
        }
        let Some(delta) = solve4(damped, jtr) else {
            lambda *= 10.0;
            if lambda > 1e30 {
                break;
            }
            continue;
        };
        let mut candidate = [beta[0] + delta[0], beta[1] + delta[1], beta[2] + delta[2], beta[3] + delta[3]];
        candidate[3] = candidate[3].abs().max(min_slope);
        let trial = sse(&LogisticParams::from_array(candidate), xs, ys);
        if trial.is_finite() && trial <= current {
            let change = (current - trial) / current.max(f64::MIN_POSITIVE);
            beta = candidate;
            current = trial;
            history.push(current);
            lambda = (lambda / 10.0).max(1e-15);
            if current == 0.0 || change < RELATIVE_TOLERANCE {
                converged = true;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e30 {
                // no descent direction left at this point
                converged = true;
            }
        }
    }

    beta[3] = beta[3].abs();
    Ok(LogisticFit {
        params: LogisticParams::from_array(beta),
        sse: current,
        sse_history: history,
        iterations,
        converged,
    })
}
