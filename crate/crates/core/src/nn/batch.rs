//! Contiguous batched tensors: (batch, channels, length) for the
//! convolutional path and (batch, features) for the dense path.

/// A batch of channel×length planes, sample-major:
/// `data[(s * c + ch) * l + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch3 {
    pub n: usize,
    pub c: usize,
    pub l: usize,
    pub data: Vec<f64>,
}

impl Batch3 {
    pub fn zeros(n: usize, c: usize, l: usize) -> Self {
        Self { n, c, l, data: vec![0.0; n * c * l] }
    }

    pub fn from_samples(n: usize, c: usize, l: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * c * l, "batch payload size mismatch");
        Self { n, c, l, data }
    }

    pub fn plane(&self) -> usize {
        self.c * self.l
    }

    pub fn sample(&self, s: usize) -> &[f64] {
        let p = self.plane();
        &self.data[s * p..(s + 1) * p]
    }

    pub fn sample_mut(&mut self, s: usize) -> &mut [f64] {
        let p = self.plane();
        &mut self.data[s * p..(s + 1) * p]
    }

    /// Reinterprets as (batch, c·l) features without copying.
    pub fn into_flat(self) -> Batch2 {
        Batch2 { n: self.n, f: self.c * self.l, data: self.data }
    }
}

/// A batch of flat feature vectors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch2 {
    pub n: usize,
    pub f: usize,
    pub data: Vec<f64>,
}

impl Batch2 {
    pub fn zeros(n: usize, f: usize) -> Self {
        Self { n, f, data: vec![0.0; n * f] }
    }

    pub fn from_rows(n: usize, f: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * f, "batch payload size mismatch");
        Self { n, f, data }
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.data[s * self.f..(s + 1) * self.f]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.data[s * self.f..(s + 1) * self.f]
    }

    /// Reinterprets as (batch, c, l) planes without copying.
    pub fn into_planes(self, c: usize, l: usize) -> Batch3 {
        assert_eq!(self.f, c * l, "feature count does not factor as {c}x{l}");
        Batch3 { n: self.n, c, l, data: self.data }
    }
}
