//! Shared pieces of the finite-difference gradient check. The sweep
//! over a full model lives next to the model; this module pins the
//! error metric so every check agrees on what "relative error" means.

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub params_checked: usize,
    pub elements_checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_err <= tolerance
    }
}

/// `|a − n| / max(1, |a|, |n|)`: relative for large gradients, absolute
/// near zero where a ratio of rounding noise would be meaningless.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_err_behaves_at_both_scales() {
        assert_eq!(rel_err(2.0, 2.0), 0.0);
        assert!((rel_err(100.0, 101.0) - 1.0 / 101.0).abs() < 1e-15);
        // Near zero it degrades to an absolute difference.
        assert!((rel_err(1e-9, 3e-9) - 2e-9).abs() < 1e-18);
    }
}
