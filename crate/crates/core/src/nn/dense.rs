//! Fully connected layer, row-major weights (out_features × in_features).

use crate::error::{Error, Result};
use crate::nn::batch::Batch2;
use crate::nn::param::Param;

use crate::nn::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Param,
    pub b: Param,
    pub in_features: usize,
    pub out_features: usize,
}

impl Dense {
    pub fn zeros(name_prefix: &str, in_features: usize, out_features: usize) -> Self {
        Self {
            w: Param::zeros(format!("{name_prefix}.w"), vec![out_features, in_features]),
            b: Param::zeros(format!("{name_prefix}.b"), vec![out_features]),
            in_features,
            out_features,
        }
    }

    pub fn forward(&self, x: &Batch2) -> Result<Batch2> {
        if x.f != self.in_features {
            return Err(Error::ShapeError(format!(
                "dense {} expects {} features, got {}",
                self.w.name, self.in_features, x.f
            )));
        }
        let mut out = Batch2::zeros(x.n, self.out_features);
        for s in 0..x.n {
            let x_row = x.row(s);
            let o_row = out.row_mut(s);
            for (o, ov) in o_row.iter_mut().enumerate() {
                let w_row = &self.w.data[o * self.in_features..(o + 1) * self.in_features];
                *ov = self.b.data[o] + dot(w_row, x_row);
            }
        }
        Ok(out)
    }

    /// Accumulates weight/bias gradients and returns the input gradient.
    pub fn backward(&mut self, gout: &Batch2, x: &Batch2) -> Batch2 {
        debug_assert_eq!(gout.f, self.out_features);
        debug_assert_eq!(x.f, self.in_features);
        let mut gx = Batch2::zeros(x.n, self.in_features);
        for s in 0..x.n {
            let g_row = gout.row(s);
            let x_row = x.row(s);
            let gx_row = gx.row_mut(s);
            for (o, &g) in g_row.iter().enumerate() {
                self.b.grad[o] += g;
                let gw_row = &mut self.w.grad[o * self.in_features..(o + 1) * self.in_features];
                for (gw, &xv) in gw_row.iter_mut().zip(x_row) {
                    *gw += g * xv;
                }
                let w_row = &self.w.data[o * self.in_features..(o + 1) * self.in_features];
                for (gxv, &wv) in gx_row.iter_mut().zip(w_row) {
                    *gxv += g * wv;
                }
            }
        }
        gx
    }
}
