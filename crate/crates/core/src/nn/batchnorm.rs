//! Per-channel batch normalization over (batch, length).
//!
//! Train mode normalizes with biased batch statistics and updates the
//! running estimates as `running = (1 − momentum)·running + momentum·batch`
//! (momentum 0.1 by default). Eval mode is a pure affine map built from
//! the running statistics.

use crate::error::{Error, Result};
use crate::nn::batch::Batch3;
use crate::nn::param::Param;

pub const DEFAULT_MOMENTUM: f64 = 0.1;
pub const DEFAULT_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub eps: f64,
}

pub struct BnCache {
    /// Normalized values, same shape as the input.
    pub xhat: Vec<f64>,
    /// Per-channel 1/√(σ² + ε).
    pub invstd: Vec<f64>,
}

impl BatchNorm {
    pub fn new(name_prefix: &str, channels: usize) -> Self {
        Self {
            gamma: Param::new(format!("{name_prefix}.gamma"), vec![channels], vec![1.0; channels]),
            beta: Param::zeros(format!("{name_prefix}.beta"), vec![channels]),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: DEFAULT_MOMENTUM,
            eps: DEFAULT_EPS,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    /// Train-mode forward with batch statistics. `update_running`
    /// controls whether the running estimates advance (gradient
    /// checking re-evaluates the loss without disturbing them).
    pub fn forward_train(&mut self, x: &Batch3, update_running: bool) -> Result<(Batch3, BnCache)> {
        if x.n < 2 {
            return Err(Error::InvalidBatch(format!(
                "batch norm in train mode needs batch >= 2, got {}",
                x.n
            )));
        }
        debug_assert_eq!(x.c, self.channels());
        let m = (x.n * x.l) as f64;
        let mut out = Batch3::zeros(x.n, x.c, x.l);
        let mut xhat = vec![0.0; x.data.len()];
        let mut invstd = vec![0.0; x.c];

        for c in 0..x.c {
            let mut sum = 0.0;
            for s in 0..x.n {
                let row = &x.data[(s * x.c + c) * x.l..(s * x.c + c + 1) * x.l];
                sum += row.iter().sum::<f64>();
            }
            let mean = sum / m;
            let mut var_sum = 0.0;
            for s in 0..x.n {
                let row = &x.data[(s * x.c + c) * x.l..(s * x.c + c + 1) * x.l];
                for &v in row {
                    let d = v - mean;
                    var_sum += d * d;
                }
            }
            let var = var_sum / m;
            let istd = 1.0 / (var + self.eps).sqrt();
            invstd[c] = istd;
            let (g, b) = (self.gamma.data[c], self.beta.data[c]);
            for s in 0..x.n {
                let base = (s * x.c + c) * x.l;
                for i in 0..x.l {
                    let h = (x.data[base + i] - mean) * istd;
                    xhat[base + i] = h;
                    out.data[base + i] = g * h + b;
                }
            }
            if update_running {
                self.running_mean[c] = (1.0 - self.momentum) * self.running_mean[c] + self.momentum * mean;
                self.running_var[c] = (1.0 - self.momentum) * self.running_var[c] + self.momentum * var;
            }
        }
        Ok((out, BnCache { xhat, invstd }))
    }

    /// Eval-mode forward: `y = scale[c]·x + shift[c]` from running
    /// statistics. Works for any batch size.
    pub fn forward_eval(&self, x: &Batch3) -> Batch3 {
        debug_assert_eq!(x.c, self.channels());
        let mut out = Batch3::zeros(x.n, x.c, x.l);
        for c in 0..x.c {
            let istd = 1.0 / (self.running_var[c] + self.eps).sqrt();
            let scale = self.gamma.data[c] * istd;
            let shift = self.beta.data[c] - scale * self.running_mean[c];
            for s in 0..x.n {
                let base = (s * x.c + c) * x.l;
                for i in 0..x.l {
                    out.data[base + i] = scale * x.data[base + i] + shift;
                }
            }
        }
        out
    }

    /// Train-mode backward; accumulates gamma/beta gradients.
    pub fn backward_train(&mut self, gout: &Batch3, cache: &BnCache) -> Batch3 {
        let m = (gout.n * gout.l) as f64;
        let mut gx = Batch3::zeros(gout.n, gout.c, gout.l);
        for c in 0..gout.c {
            let mut sum_g = 0.0;
            let mut sum_gx = 0.0;
            for s in 0..gout.n {
                let base = (s * gout.c + c) * gout.l;
                for i in 0..gout.l {
                    let g = gout.data[base + i];
                    sum_g += g;
                    sum_gx += g * cache.xhat[base + i];
                }
            }
            self.beta.grad[c] += sum_g;
            self.gamma.grad[c] += sum_gx;
            let coeff = self.gamma.data[c] * cache.invstd[c] / m;
            for s in 0..gout.n {
                let base = (s * gout.c + c) * gout.l;
                for i in 0..gout.l {
                    let g = gout.data[base + i];
                    gx.data[base + i] = coeff * (m * g - sum_g - cache.xhat[base + i] * sum_gx);
                }
            }
        }
        gx
    }

    /// Eval-mode backward: the affine map's fixed per-channel slope.
    pub fn backward_eval(&self, gout: &Batch3) -> Batch3 {
        let mut gx = Batch3::zeros(gout.n, gout.c, gout.l);
        for c in 0..gout.c {
            let scale = self.gamma.data[c] / (self.running_var[c] + self.eps).sqrt();
            for s in 0..gout.n {
                let base = (s * gout.c + c) * gout.l;
                for i in 0..gout.l {
                    gx.data[base + i] = scale * gout.data[base + i];
                }
            }
        }
        gx
    }
}
