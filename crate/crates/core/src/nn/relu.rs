//! ReLU with the derivative at 0 pinned to 0 (subgradient choice).

use crate::nn::batch::Batch3;

pub fn forward(x: &mut Batch3) {
    for v in &mut x.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Masks the incoming gradient by the *output* of the forward pass:
/// relu(x) > 0 exactly where x > 0, so the stored activation doubles as
/// the mask and the gradient at x = 0 is 0.
pub fn backward(gout: &mut Batch3, activated: &Batch3) {
    debug_assert_eq!(gout.data.len(), activated.data.len());
    for (g, &y) in gout.data.iter_mut().zip(&activated.data) {
        if y <= 0.0 {
            *g = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_negatives_passes_positives() {
        let mut b = Batch3::from_samples(1, 1, 4, vec![-1.0, 2.0, 0.0, -0.5]);
        forward(&mut b);
        assert_eq!(b.data, vec![0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_at_zero_is_zero() {
        let mut x = Batch3::from_samples(1, 1, 3, vec![-1.0, 0.0, 3.0]);
        forward(&mut x);
        let mut g = Batch3::from_samples(1, 1, 3, vec![1.0, 1.0, 1.0]);
        backward(&mut g, &x);
        assert_eq!(g.data, vec![0.0, 0.0, 1.0]);
    }
}
