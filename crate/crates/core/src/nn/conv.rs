//! Valid (no padding), stride-1 1-D convolution — the only variant that
//! reproduces the backbone's output-size arithmetic (L − k + 1).
//!
//! The kernels below are the training hot path; inner loops run over
//! contiguous slices so they vectorize.

use crate::error::{Error, Result};
use crate::nn::batch::Batch3;

pub fn out_len(li: usize, k: usize) -> Result<usize> {
    if li < k {
        return Err(Error::ShapeError(format!(
            "input length {li} shorter than kernel {k}"
        )));
    }
    Ok(li - k + 1)
}

/// Single-sample forward: `out[o][i] = b[o] + Σ_{c,j} w[o][c][j] · x[c][i+j]`.
///
/// `x` is ic×li, `w` is oc×ic×k, `out` must be oc×(li−k+1).
pub fn forward_into(
    x: &[f64],
    ic: usize,
    li: usize,
    w: &[f64],
    oc: usize,
    k: usize,
    b: &[f64],
    out: &mut [f64],
) {
    let lo = li - k + 1;
    debug_assert_eq!(x.len(), ic * li);
    debug_assert_eq!(w.len(), oc * ic * k);
    debug_assert_eq!(out.len(), oc * lo);
    for o in 0..oc {
        let out_row = &mut out[o * lo..(o + 1) * lo];
        out_row.fill(b[o]);
        for c in 0..ic {
            let x_row = &x[c * li..(c + 1) * li];
            let w_row = &w[(o * ic + c) * k..(o * ic + c) * k + k];
            for (j, &wj) in w_row.iter().enumerate() {
                let xs = &x_row[j..j + lo];
                for (ov, &xv) in out_row.iter_mut().zip(xs) {
                    *ov += wj * xv;
                }
            }
        }
    }
}

pub fn forward(x: &[f64], ic: usize, li: usize, w: &[f64], oc: usize, k: usize, b: &[f64]) -> Result<Vec<f64>> {
    let lo = out_len(li, k)?;
    if x.len() != ic * li || w.len() != oc * ic * k || b.len() != oc {
        return Err(Error::ShapeError(format!(
            "conv arguments inconsistent: x={} w={} b={} for ic={ic} li={li} oc={oc} k={k}",
            x.len(),
            w.len(),
            b.len()
        )));
    }
    let mut out = vec![0.0; oc * lo];
    forward_into(x, ic, li, w, oc, k, b, &mut out);
    Ok(out)
}

/// Single-sample backward. Accumulates into `gx` (ic×li), `gw`
/// (oc×ic×k) and `gb` (oc); callers zero them once per batch.
#[allow(clippy::too_many_arguments)]
pub fn backward_into(
    gout: &[f64],
    x: &[f64],
    ic: usize,
    li: usize,
    w: &[f64],
    oc: usize,
    k: usize,
    gx: &mut [f64],
    gw: &mut [f64],
    gb: &mut [f64],
) {
    let lo = li - k + 1;
    debug_assert_eq!(gout.len(), oc * lo);
    for o in 0..oc {
        let g_row = &gout[o * lo..(o + 1) * lo];
        gb[o] += g_row.iter().sum::<f64>();
        for c in 0..ic {
            let x_row = &x[c * li..(c + 1) * li];
            let gx_row = &mut gx[c * li..(c + 1) * li];
            let base = (o * ic + c) * k;
            for j in 0..k {
                gw[base + j] += crate::nn::dot(g_row, &x_row[j..j + lo]);

                let wj = w[base + j];
                let gxs = &mut gx_row[j..j + lo];
                for (gxv, g) in gxs.iter_mut().zip(g_row) {
                    *gxv += wj * g;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn backward(
    gout: &[f64],
    x: &[f64],
    ic: usize,
    li: usize,
    w: &[f64],
    oc: usize,
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let lo = out_len(li, k)?;
    if gout.len() != oc * lo || x.len() != ic * li || w.len() != oc * ic * k {
        return Err(Error::ShapeError(format!(
            "conv backward arguments inconsistent: gout={} x={} w={}",
            gout.len(),
            x.len(),
            w.len()
        )));
    }
    let mut gx = vec![0.0; ic * li];
    let mut gw = vec![0.0; oc * ic * k];
    let mut gb = vec![0.0; oc];
    backward_into(gout, x, ic, li, w, oc, k, &mut gx, &mut gw, &mut gb);
    Ok((gx, gw, gb))
}

/// Batched forward over independent samples.
pub fn forward_batch(x: &Batch3, w: &[f64], oc: usize, k: usize, b: &[f64]) -> Result<Batch3> {
    let lo = out_len(x.l, k)?;
    let mut out = Batch3::zeros(x.n, oc, lo);
    for s in 0..x.n {
        forward_into(x.sample(s), x.c, x.l, w, oc, k, b, out.sample_mut(s));
    }
    Ok(out)
}

/// Batched backward; weight/bias gradients are summed over samples in
/// sample order.
pub fn backward_batch(
    gout: &Batch3,
    x: &Batch3,
    w: &[f64],
    oc: usize,
    k: usize,
    gw: &mut [f64],
    gb: &mut [f64],
) -> Batch3 {
    let mut gx = Batch3::zeros(x.n, x.c, x.l);
    for s in 0..x.n {
        backward_into(gout.sample(s), x.sample(s), x.c, x.l, w, oc, k, gx.sample_mut(s), gw, gb);
    }
    gx
}
