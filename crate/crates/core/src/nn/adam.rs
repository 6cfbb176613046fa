//! Bias-corrected Adam with a per-parameter trainability mask.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::nn::param::Param;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Optimizer state: per-parameter first/second moment estimates plus a
/// shared step count. Frozen parameters are skipped entirely — their
/// values and moments never advance.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    slots: HashMap<String, Moments>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
            step: 0,
            slots: HashMap::new(),
        }
    }

    /// Applies one update to every trainable parameter, reading the
    /// accumulated gradients. Parameters are visited in the order given,
    /// so the update is deterministic.
    pub fn step(&mut self, params: &mut [&mut Param]) -> Result<()> {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for p in params.iter_mut() {
            if !p.trainable {
                continue;
            }
            let slot = self
                .slots
                .entry(p.name.clone())
                .or_insert_with(|| Moments { m: vec![0.0; p.len()], v: vec![0.0; p.len()] });
            for i in 0..p.data.len() {
                let g = p.grad[i];
                if !g.is_finite() {
                    return Err(Error::NumericalError(format!(
                        "non-finite gradient in parameter '{}' at element {i}",
                        p.name
                    )));
                }
                slot.m[i] = self.beta1 * slot.m[i] + (1.0 - self.beta1) * g;
                slot.v[i] = self.beta2 * slot.v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = slot.m[i] / bc1;
                let v_hat = slot.v[i] / bc2;
                p.data[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }

    /// First/second moments recorded for a parameter, if any.
    pub fn moments(&self, name: &str) -> Option<(&[f64], &[f64])> {
        self.slots.get(name).map(|s| (s.m.as_slice(), s.v.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(data: Vec<f64>) -> Param {
        let n = data.len();
        Param::new("p", vec![n], data)
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut p = param(vec![1.0, -2.0]);
        p.grad = vec![0.5, -3.0]; // |g| >> eps
        let mut adam = Adam::new(0.001);
        adam.step(&mut [&mut p]).unwrap();
        assert!((p.data[0] - (1.0 - 0.001)).abs() < 1e-6);
        assert!((p.data[1] - (-2.0 + 0.001)).abs() < 1e-6);
    }

    #[test]
    fn zero_grad_fresh_state_leaves_params_unchanged() {
        let mut p = param(vec![0.7, -0.1]);
        let before = p.data.clone();
        let mut adam = Adam::new(0.01);
        adam.step(&mut [&mut p]).unwrap();
        assert_eq!(p.data, before);
    }

    #[test]
    fn three_step_trace_matches_scalar_recurrence() {
        let grads = [0.3, -0.8, 0.1];
        let mut p = param(vec![1.0]);
        let mut adam = Adam::new(0.01);

        // Hand-rolled scalar Adam recurrence.
        let (b1, b2, eps, lr) = (DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS, 0.01);
        let (mut m, mut v, mut theta) = (0.0f64, 0.0f64, 1.0f64);
        for (t, &g) in grads.iter().enumerate() {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let m_hat = m / (1.0 - b1.powi(t as i32 + 1));
            let v_hat = v / (1.0 - b2.powi(t as i32 + 1));
            theta -= lr * m_hat / (v_hat.sqrt() + eps);

            p.grad = vec![g];
            adam.step(&mut [&mut p]).unwrap();
            assert_eq!(p.data[0], theta, "step {t}");
        }
    }

    #[test]
    fn nan_gradient_is_a_numerical_error() {
        let mut p = param(vec![1.0]);
        p.grad = vec![f64::NAN];
        let mut adam = Adam::new(0.01);
        assert!(matches!(adam.step(&mut [&mut p]), Err(Error::NumericalError(_))));
    }

    #[test]
    fn frozen_params_untouched_and_moments_not_advanced() {
        let mut p = param(vec![1.0]);
        p.trainable = false;
        p.grad = vec![5.0];
        let mut adam = Adam::new(0.1);
        adam.step(&mut [&mut p]).unwrap();
        assert_eq!(p.data, vec![1.0]);
        assert!(adam.moments("p").is_none());
    }
}
