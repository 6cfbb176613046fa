//! 2×1 max pooling. Output length is floor(L/2); an odd trailing
//! element is dropped. Backward routes the gradient to the argmax,
//! first index on ties.

use crate::error::{Error, Result};
use crate::nn::batch::Batch3;

pub struct PoolCache {
    /// 0 or 1 per pooled output: which element of the pair won.
    pub argmax: Vec<u8>,
    pub in_len: usize,
}

pub fn forward(x: &Batch3) -> Result<(Batch3, PoolCache)> {
    if x.l < 2 {
        return Err(Error::ShapeError(format!("pooling needs length >= 2, got {}", x.l)));
    }
    let lo = x.l / 2;
    let mut out = Batch3::zeros(x.n, x.c, lo);
    let mut argmax = vec![0u8; x.n * x.c * lo];
    for s in 0..x.n {
        let xs = x.sample(s);
        let os = out.sample_mut(s);
        for c in 0..x.c {
            let x_row = &xs[c * x.l..(c + 1) * x.l];
            let o_row = &mut os[c * lo..(c + 1) * lo];
            let a_row = &mut argmax[(s * x.c + c) * lo..(s * x.c + c + 1) * lo];
            for i in 0..lo {
                let (a, b) = (x_row[2 * i], x_row[2 * i + 1]);
                if b > a {
                    o_row[i] = b;
                    a_row[i] = 1;
                } else {
                    o_row[i] = a;
                    a_row[i] = 0;
                }
            }
        }
    }
    Ok((out, PoolCache { argmax, in_len: x.l }))
}

pub fn backward(gout: &Batch3, cache: &PoolCache) -> Batch3 {
    let li = cache.in_len;
    let lo = gout.l;
    let mut gx = Batch3::zeros(gout.n, gout.c, li);
    for s in 0..gout.n {
        for c in 0..gout.c {
            let g_row = &gout.data[(s * gout.c + c) * lo..(s * gout.c + c + 1) * lo];
            let a_row = &cache.argmax[(s * gout.c + c) * lo..(s * gout.c + c + 1) * lo];
            let gx_row = &mut gx.data[(s * gout.c + c) * li..(s * gout.c + c + 1) * li];
            for i in 0..lo {
                gx_row[2 * i + a_row[i] as usize] += g_row[i];
            }
        }
    }
    gx
}
