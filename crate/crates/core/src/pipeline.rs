//! Input pipeline: raw 6-channel IMU streams to normalized fixed-size
//! network inputs.
//!
//! The stages run in a fixed order per window and channel: slice the
//! stream into windows of `duration_t` seconds, linearly resample each
//! channel to `target_len` records, smooth with a centered moving
//! average, then min-max scale into [0, 1]. All stages are pure and
//! deterministic.

use crate::error::{Error, Result};

/// Number of input channels: linear acceleration x/y/z then angular
/// velocity x/y/z, in the sensor's local frame.
pub const NUM_CHANNELS: usize = 6;

/// Fixed record count of a network input window.
pub const TARGET_LEN: usize = 200;

/// One time-aligned IMU sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Seconds, strictly increasing within a trial.
    pub t: f64,
    /// Linear acceleration, m/s², sensor local frame.
    pub lin_acc: [f64; 3],
    /// Angular velocity, rad/s, sensor local frame.
    pub ang_vel: [f64; 3],
}

impl ImuSample {
    pub fn channel(&self, ch: usize) -> f64 {
        match ch {
            0..=2 => self.lin_acc[ch],
            3..=5 => self.ang_vel[ch - 3],
            _ => panic!("channel index {ch} out of range"),
        }
    }
}

/// Windowing and refinement configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    /// Window duration in seconds (1.5, 1.6 and 1.7 are the augmentation set).
    pub duration_t: f64,
    /// Sampling rate in Hz.
    pub sample_rate: f64,
    /// Window start spacing in samples.
    pub stride: usize,
    /// Records per refined window.
    pub target_len: usize,
    /// Moving-average width in samples, odd.
    pub smooth_len: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            duration_t: 1.5,
            sample_rate: 50.0,
            stride: 1,
            target_len: TARGET_LEN,
            smooth_len: 5,
        }
    }
}

impl WindowConfig {
    pub fn with_duration(duration_t: f64) -> Self {
        Self { duration_t, ..Self::default() }
    }

    /// Raw window length in samples: round(duration_t × sample_rate).
    pub fn raw_len(&self) -> usize {
        (self.duration_t * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_t > 0.0) || !(self.sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duration_t and sample_rate must be positive, got {} s at {} Hz",
                self.duration_t, self.sample_rate
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be >= 1".into()));
        }
        if self.target_len < 2 {
            return Err(Error::InvalidConfig("target_len must be >= 2".into()));
        }
        if self.smooth_len % 2 == 0 || self.smooth_len == 0 || self.smooth_len > self.target_len {
            return Err(Error::InvalidConfig(format!(
                "smooth_len must be odd and in [1, {}], got {}",
                self.target_len, self.smooth_len
            )));
        }
        Ok(())
    }
}

/// A 6×N channel matrix extracted from an IMU stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Channels {
    pub rows: [Vec<f64>; 6],
}

impl Channels {
    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One raw (unrefined) window sliced out of a channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RawWindow {
    /// Start index into the source stream.
    pub start: usize,
    /// 6 channels × raw_len samples.
    pub rows: [Vec<f64>; 6],
}

impl RawWindow {
    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Normalized 6×200×1 network input. Values lie in [0, 1]; layout is
/// channel-major (`data[c * 200 + i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    data: Vec<f64>,
}

impl InputTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (NUM_CHANNELS, TARGET_LEN, 1)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel(&self, ch: usize) -> &[f64] {
        &self.data[ch * TARGET_LEN..(ch + 1) * TARGET_LEN]
    }

    fn from_rows(rows: [Vec<f64>; 6]) -> Self {
        let mut data = Vec::with_capacity(NUM_CHANNELS * TARGET_LEN);
        for row in &rows {
            debug_assert_eq!(row.len(), TARGET_LEN);
            data.extend_from_slice(row);
        }
        Self { data }
    }
}

/// Extracts the six orientation-free feature rows from an IMU stream.
///
/// Row order is fixed: lin_acc x, y, z then ang_vel x, y, z. Values are
/// copied unmodified.
pub fn select_features(samples: &[ImuSample]) -> Result<Channels> {
    if samples.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut rows: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::with_capacity(samples.len()));
    for s in samples {
        for (ch, row) in rows.iter_mut().enumerate() {
            row.push(s.channel(ch));
        }
    }
    Ok(Channels { rows })
}

/// Slices a channel matrix into contiguous raw windows of
/// `cfg.raw_len()` samples starting at 0, stride, 2·stride, …
pub fn stack_windows(channels: &Channels, cfg: &WindowConfig) -> Result<Vec<RawWindow>> {
    cfg.validate()?;
    let n = channels.len();
    let len = cfg.raw_len();
    if n < len {
        return Err(Error::InsufficientData(format!(
            "stream has {n} samples, window needs {len}"
        )));
    }
    let count = (n - len) / cfg.stride + 1;
    let mut windows = Vec::with_capacity(count);
    for w in 0..count {
        let start = w * cfg.stride;
        let rows: [Vec<f64>; 6] =
            std::array::from_fn(|ch| channels.rows[ch][start..start + len].to_vec());
        windows.push(RawWindow { start, rows });
    }
    Ok(windows)
}

/// Linearly resamples a channel to `target_len` records.
///
/// Output sample `i` interpolates the input at position
/// `i·(L−1)/(target_len−1)`; the endpoints are preserved exactly.
pub fn resample(channel: &[f64], target_len: usize) -> Result<Vec<f64>> {
    let len = channel.len();
    if len < 2 {
        return Err(Error::InsufficientData(format!(
            "resample needs at least 2 samples, got {len}"
        )));
    }
    let scale = (len - 1) as f64 / (target_len - 1) as f64;
    let out = (0..target_len)
        .map(|i| {
            let pos = i as f64 * scale;
            let idx = pos.floor() as usize;
            if idx >= len - 1 {
                channel[len - 1]
            } else {
                let frac = pos - idx as f64;
                channel[idx] + frac * (channel[idx + 1] - channel[idx])
            }
        })
        .collect();
    Ok(out)
}

/// Centered moving average of nominal width `smooth_len` (odd). At the
/// edges the window shrinks symmetrically to the available samples, so
/// no padding value is ever invented. Width 1 is the identity.
pub fn moving_average(channel: &[f64], smooth_len: usize) -> Result<Vec<f64>> {
    let n = channel.len();
    if smooth_len % 2 == 0 || smooth_len == 0 || smooth_len > n {
        return Err(Error::InvalidConfig(format!(
            "moving-average width must be odd and in [1, {n}], got {smooth_len}"
        )));
    }
    let half = smooth_len / 2;
    let out = (0..n)
        .map(|i| {
            let reach = half.min(i).min(n - 1 - i);
            let lo = i - reach;
            let hi = i + reach;
            channel[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    Ok(out)
}

/// Min-max scales a channel into [0, 1]. A constant channel maps to
/// the range midpoint 0.5.
pub fn minmax_scale(channel: &[f64]) -> Result<Vec<f64>> {
    if channel.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite value in channel".into()));
    }
    let min = channel.iter().copied().fold(f64::INFINITY, f64::min);
    let max = channel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(vec![0.5; channel.len()]);
    }
    // Plain division so the extremes land on exactly 0 and 1.
    let range = max - min;
    Ok(channel.iter().map(|v| (v - min) / range).collect())
}

/// Refines one raw window into a network input: per channel, resample
/// to 200 records, smooth, then min-max scale.
pub fn make_input(window: &RawWindow, cfg: &WindowConfig) -> Result<InputTensor> {
    cfg.validate()?;
    let mut rows: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::new());
    for (ch, row) in rows.iter_mut().enumerate() {
        let resampled = resample(&window.rows[ch], cfg.target_len)?;
        let smoothed = moving_average(&resampled, cfg.smooth_len)?;
        *row = minmax_scale(&smoothed)?;
    }
    Ok(InputTensor::from_rows(rows))
}
