//! Minimal deterministic tensor/NN engine.
//!
//! Direct (valid, stride-1) 1-D convolution, batch normalization,
//! ReLU, 2×1 max pooling, fully connected layers, fused
//! softmax/cross-entropy, MSE, and bias-corrected Adam, each with an
//! exact analytic backward pass. All arithmetic is in f64 with fixed
//! summation order, so every op is bitwise deterministic for fixed
//! inputs.

pub mod adam;
pub mod batch;
pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod loss;
pub mod param;
pub mod pool;
pub mod relu;

pub use adam::Adam;
pub use batch::{Batch2, Batch3};
pub use batchnorm::{BatchNorm, BnCache};
pub use gradcheck::{rel_err, GradCheckReport};
pub use param::Param;

/// Dot product over eight independent accumulation chains; the fixed
/// reassociation is deterministic and keeps the FMA units busy.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let (a8, b8) = (&a[8 * i..8 * i + 8], &b[8 * i..8 * i + 8]);
        for lane in 0..8 {
            acc[lane] += a8[lane] * b8[lane];
        }
    }
    let mut tail = 0.0;
    for i in 8 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}
