//! Synthetic gait trials across the terrain × cadence condition grid.
//!
//! Each trial is a 50 Hz IMU + FSR recording of steady walking. The
//! thigh kinematics are sums of a few stride-frequency harmonics with
//! terrain-distinct coefficient sets, linear acceleration combines a
//! gravity projection of the oscillating thigh pitch with harmonic
//! motion, and a per-trial gain in [0.8, 1.25] emulates a twisted
//! sensor mount (the reason the pipeline min-max scales per window).
//! The FSR switches follow the four-section sequence with a stance
//! fraction near 0.6, shifted per terrain. Ground-truth foot-lift and
//! foot-step times are recorded alongside so the labeler can be checked
//! against the schedule that produced the data.
//!
//! The generator is a stand-in for human-subject recordings: it makes
//! the training protocol reproducible, not the original study's
//! absolute numbers.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::{self, FsrSample};
use crate::pipeline::{self, ImuSample, InputTensor, WindowConfig};

/// Walking surface class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    /// Level-ground walking.
    Lw,
    /// Stair ascent.
    Sa,
    /// Stair descent.
    Sd,
}

impl Terrain {
    pub const ALL: [Terrain; 3] = [Terrain::Lw, Terrain::Sa, Terrain::Sd];

    pub fn class_index(self) -> usize {
        match self {
            Terrain::Lw => 0,
            Terrain::Sa => 1,
            Terrain::Sd => 2,
        }
    }

    pub fn from_class_index(idx: usize) -> Result<Self> {
        match idx {
            0 => Ok(Terrain::Lw),
            1 => Ok(Terrain::Sa),
            2 => Ok(Terrain::Sd),
            _ => Err(Error::InvalidLabel(format!("terrain class {idx} out of range"))),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Terrain::Lw => "LW",
            Terrain::Sa => "SA",
            Terrain::Sd => "SD",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "LW" => Ok(Terrain::Lw),
            "SA" => Ok(Terrain::Sa),
            "SD" => Ok(Terrain::Sd),
            _ => Err(Error::InvalidData(format!("unknown terrain tag '{tag}'"))),
        }
    }
}

/// One generated trial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialCondition {
    pub terrain: Terrain,
    pub cadence_bpm: f64,
    pub duration: f64,
    pub seed: u64,
}

/// One stride-frequency harmonic: `amp · sin(k·θ + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub k: u32,
    pub amp: f64,
    pub phase: f64,
}

fn h(k: u32, amp: f64, phase: f64) -> Harmonic {
    Harmonic { k, amp, phase }
}

fn eval(harmonics: &[Harmonic], theta: f64) -> f64 {
    harmonics.iter().map(|h| h.amp * (h.k as f64 * theta + h.phase).sin()).sum()
}

/// Per-terrain signal shape and foot-switch schedule.
///
/// Percent marks below are in the trial's linear phase (0 at foot
/// lift); the labeler later re-anchors foot-step to 40 %, so terrains
/// with a different swing fraction get a warped but still deterministic
/// label scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainProfile {
    /// Fraction of the stride spent in swing; stance is the rest.
    pub swing_fraction: f64,
    /// Percent where mid-stance begins (front switch closes).
    pub full_contact_percent: f64,
    /// Percent where heel-off begins (back switch opens).
    pub heel_off_percent: f64,
    pub ang_vel: [Vec<Harmonic>; 3],
    pub lin_acc: [Vec<Harmonic>; 3],
    /// Thigh pitch: mean + amp · sin(θ + phase), radians.
    pub pitch_mean: f64,
    pub pitch_amp: f64,
    pub pitch_phase: f64,
}

/// Generator configuration: per-terrain profiles plus noise and mount
/// model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    pub lw: TerrainProfile,
    pub sa: TerrainProfile,
    pub sd: TerrainProfile,
    /// Additive Gaussian noise on every IMU channel, absolute units.
    pub noise_std: f64,
    /// Step-to-step variability: every stride cycle rescales each
    /// harmonic amplitude by 1 ± this fraction.
    pub cycle_amp_jitter: f64,
    /// Step-to-step variability: every stride cycle shifts each
    /// harmonic phase by up to ± this many radians.
    pub cycle_phase_jitter: f64,
    /// Per-trial mount-twist gain range.
    pub gain_lo: f64,
    pub gain_hi: f64,
    pub gravity: f64,
    pub sample_rate: f64,
    /// Trials start at a random percent inside this contact-phase range,
    /// so the first detected swing transition is a genuine foot lift.
    pub start_percent_lo: f64,
    pub start_percent_hi: f64,
}

impl GeneratorParams {
    pub fn profile(&self, terrain: Terrain) -> &TerrainProfile {
        match terrain {
            Terrain::Lw => &self.lw,
            Terrain::Sa => &self.sa,
            Terrain::Sd => &self.sd,
        }
    }
}

impl Default for GeneratorParams {
    fn default() -> Self {
        // The three terrains differ in harmonic mix (waveform shape),
        // not just amplitude — per-window min-max scaling erases scale,
        // so shape is what the models must separate.
        // A second harmonic at +π/2 relative to the fundamental sharpens
        // the troughs (high scaled mean); −π/2 sharpens the peaks (low
        // scaled mean). The vertical channel separates LW from SD that
        // way, while SA carries its own strong second-harmonic signature
        // on the pitch-rate channel.
        let lw = TerrainProfile {
            swing_fraction: 0.40,
            full_contact_percent: 55.0,
            heel_off_percent: 85.0,
            ang_vel: [
                vec![h(1, 0.50, 0.3), h(2, 0.12, 1.1)],
                vec![h(1, 2.20, 1.57), h(2, 0.60, 4.71)],
                vec![h(2, 0.30, 0.2)],
            ],
            lin_acc: [
                vec![h(1, 1.00, -0.5), h(2, 0.40, 0.57)],
                vec![h(1, 0.60, 0.9)],
                vec![h(1, 1.20, 0.0), h(2, 0.90, 1.57)],
            ],
            pitch_mean: 0.10,
            pitch_amp: 0.30,
            pitch_phase: 0.0,
        };
        let sa = TerrainProfile {
            swing_fraction: 0.35,
            full_contact_percent: 47.0,
            heel_off_percent: 78.0,
            ang_vel: [
                vec![h(1, 0.55, 0.5), h(2, 0.30, 2.0)],
                vec![h(1, 2.40, 1.57), h(2, 1.50, 0.9)],
                vec![h(1, 0.20, 0.0), h(2, 0.50, 1.3)],
            ],
            lin_acc: [
                vec![h(1, 1.30, 0.2), h(2, 0.80, 1.0)],
                vec![h(1, 0.50, 1.8), h(2, 0.40, -0.3)],
                vec![h(2, 2.60, 0.55)],
            ],
            pitch_mean: 0.32,
            pitch_amp: 0.42,
            pitch_phase: 0.35,
        };
        let sd = TerrainProfile {
            swing_fraction: 0.45,
            full_contact_percent: 63.0,
            heel_off_percent: 90.0,
            ang_vel: [
                vec![h(1, 0.45, 1.0), h(3, 0.15, 0.4)],
                vec![h(1, 1.80, 2.1), h(2, 0.90, -1.2)],
                vec![h(1, 0.35, 2.2)],
            ],
            lin_acc: [
                vec![h(1, 0.80, -1.2), h(2, 0.50, 2.31)],
                vec![h(1, 0.70, 0.1), h(3, 0.25, 1.5)],
                vec![h(1, 1.20, 0.0), h(2, 0.90, -1.57)],
            ],
            pitch_mean: -0.08,
            pitch_amp: 0.28,
            pitch_phase: -0.4,
        };
        Self {
            lw,
            sa,
            sd,
            noise_std: 0.05,
            cycle_amp_jitter: 0.30,
            cycle_phase_jitter: 0.40,
            gain_lo: 0.8,
            gain_hi: 1.25,
            gravity: 9.81,
            sample_rate: 50.0,
            start_percent_lo: 48.0,
            start_percent_hi: 92.0,
        }
    }
}

/// Ground truth recorded next to a generated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Foot-lift times (phase crossing 0) inside the trial.
    pub flp_times: Vec<f64>,
    /// Foot-step times (phase crossing the swing end).
    pub fsp_times: Vec<f64>,
    pub start_percent: f64,
    pub mount_gain: f64,
}

/// A generated trial: time-aligned IMU and FSR streams plus the
/// schedule that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrial {
    pub condition: TrialCondition,
    pub imu: Vec<ImuSample>,
    pub fsr: Vec<FsrSample>,
    pub truth: GroundTruth,
}

impl SensorTrial {
    /// Stride period in seconds (two steps per stride).
    pub fn stride_period(&self) -> f64 {
        120.0 / self.condition.cadence_bpm
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a tag.
pub fn subseed(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag.wrapping_add(1)))
}

/// Times in [0, duration] where the linear phase crosses `level`
/// percent, given the start percent and stride frequency.
fn crossing_times(start_percent: f64, rate_pct_per_s: f64, level: f64, duration: f64) -> Vec<f64> {
    let period = 100.0 / rate_pct_per_s;
    let mut first = (level - start_percent).rem_euclid(100.0) / rate_pct_per_s;
    if first == 0.0 {
        first = 0.0;
    }
    let mut out = Vec::new();
    let mut t = first;
    while t <= duration + 1e-12 {
        out.push(t);
        t += period;
    }
    out
}

/// Generates one trial at 50 Hz (or `params.sample_rate`).
pub fn generate_trial(cond: &TrialCondition, params: &GeneratorParams) -> SensorTrial {
    let profile = params.profile(cond.terrain);
    let stride_hz = cond.cadence_bpm / 120.0;
    let rate = params.sample_rate;
    let step_pct = 100.0 * stride_hz / rate; // percent advance per sample
    let n = (cond.duration * rate).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(cond.seed);
    let gain = rng.random_range(params.gain_lo..params.gain_hi);
    let start_percent = rng.random_range(params.start_percent_lo..params.start_percent_hi);
    let noise = Normal::new(0.0, params.noise_std.max(f64::MIN_POSITIVE)).unwrap();
    let noisy = params.noise_std > 0.0;

    let swing_end = 100.0 * profile.swing_fraction;
    let harmonic_count: usize =
        profile.ang_vel.iter().chain(profile.lin_acc.iter()).map(|h| h.len()).sum();
    let jittered = params.cycle_amp_jitter > 0.0 || params.cycle_phase_jitter > 0.0;
    let mut amp_scale = vec![1.0f64; harmonic_count];
    let mut phase_off = vec![0.0f64; harmonic_count];
    let mut current_cycle = u64::MAX;

    let mut imu = Vec::with_capacity(n);
    let mut fsr = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate;
        let raw_percent = start_percent + step_pct * i as f64;
        let percent = raw_percent.rem_euclid(100.0);
        let theta = percent * TAU / 100.0;

        // Step-to-step variability: redraw the harmonic perturbations
        // once per stride cycle, deterministically from the trial seed.
        let cycle = (raw_percent / 100.0).floor() as u64;
        if jittered && cycle != current_cycle {
            current_cycle = cycle;
            let mut jr = ChaCha8Rng::seed_from_u64(subseed(cond.seed ^ 0x5f5f_5f5f, cycle));
            for v in &mut amp_scale {
                *v = 1.0 + jr.random_range(-params.cycle_amp_jitter..=params.cycle_amp_jitter);
            }
            for v in &mut phase_off {
                *v = jr.random_range(-params.cycle_phase_jitter..=params.cycle_phase_jitter);
            }
        }
        let mut slot = 0usize;
        let mut eval_jittered = |harmonics: &[Harmonic]| -> f64 {
            let mut sum = 0.0;
            for h in harmonics {
                sum += h.amp
                    * amp_scale[slot]
                    * (h.k as f64 * theta + h.phase + phase_off[slot]).sin();
                slot += 1;
            }
            sum
        };

        let pitch = profile.pitch_mean + profile.pitch_amp * (theta + profile.pitch_phase).sin();
        let av = [
            eval_jittered(&profile.ang_vel[0]),
            eval_jittered(&profile.ang_vel[1]),
            eval_jittered(&profile.ang_vel[2]),
        ];
        let mut lin_acc = [
            params.gravity * pitch.sin() + eval_jittered(&profile.lin_acc[0]),
            eval_jittered(&profile.lin_acc[1]),
            params.gravity * pitch.cos() + eval_jittered(&profile.lin_acc[2]),
        ];
        let mut ang_vel = av;
        for v in lin_acc.iter_mut().chain(ang_vel.iter_mut()) {
            *v *= gain;
            if noisy {
                *v += noise.sample(&mut rng);
            }
        }
        imu.push(ImuSample { t, lin_acc, ang_vel });

        // Foot switches: back closes during [swing_end, heel_off),
        // front during [full_contact, 100).
        let back_on = percent >= swing_end && percent < profile.heel_off_percent;
        let front_on = percent >= profile.full_contact_percent;
        fsr.push(FsrSample {
            t,
            front: if front_on { 1.0 } else { 0.0 },
            back: if back_on { 1.0 } else { 0.0 },
        });
    }

    let rate_pct_per_s = 100.0 * stride_hz;
    let last_t = (n.saturating_sub(1)) as f64 / rate;
    SensorTrial {
        condition: *cond,
        imu,
        fsr,
        truth: GroundTruth {
            flp_times: crossing_times(start_percent, rate_pct_per_s, 0.0, last_t),
            fsp_times: crossing_times(start_percent, rate_pct_per_s, swing_end, last_t),
            start_percent,
            mount_gain: gain,
        },
    }
}

/// Dataset generation settings: the condition grid, the window
/// augmentation set, and the labeling threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub terrains: Vec<Terrain>,
    pub cadences_bpm: Vec<f64>,
    /// Trial length in seconds.
    pub trial_duration: f64,
    /// Window-duration augmentation set (seconds).
    pub durations_t: Vec<f64>,
    pub stride: usize,
    pub smooth_len: usize,
    pub fsr_threshold: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            terrains: Terrain::ALL.to_vec(),
            cadences_bpm: vec![70.0, 90.0, 110.0, 130.0],
            trial_duration: 6.0,
            durations_t: vec![1.5, 1.6, 1.7],
            stride: 2,
            smooth_len: 5,
            fsr_threshold: 0.5,
            seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn window_config(&self, duration_t: f64, sample_rate: f64) -> WindowConfig {
        WindowConfig {
            duration_t,
            sample_rate,
            stride: self.stride,
            smooth_len: self.smooth_len,
            ..WindowConfig::default()
        }
    }
}

/// One refined window with its targets and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub input: InputTensor,
    pub terrain: Terrain,
    /// Index into the manifest's trial list.
    pub trial: usize,
    /// Time of the window's last raw sample; targets anchor here.
    pub anchor_t: f64,
    /// Foot-lift cycle containing the anchor, if the anchor sits inside
    /// a complete cycle.
    pub cycle: Option<u32>,
    /// Gait percent at the anchor, present only when the whole window
    /// lies inside the labeled span.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub condition: TrialCondition,
    pub flp_times: Vec<f64>,
    pub fsp_times: Vec<f64>,
    /// Complete foot-lift cycles detected by the labeler.
    pub cycle_count: usize,
}

/// Provenance for a generated dataset: every trial, its seed, and its
/// detected cycle structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: DatasetConfig,
    pub params: GeneratorParams,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub windows: Vec<LabeledWindow>,
    pub manifest: DatasetManifest,
}

impl Dataset {
    /// Windows carrying a gait-percent target.
    pub fn gpr_indices(&self) -> Vec<usize> {
        (0..self.windows.len()).filter(|&i| self.windows[i].percent.is_some()).collect()
    }

    /// All windows (terrain class is always known).
    pub fn tc_indices(&self) -> Vec<usize> {
        (0..self.windows.len()).collect()
    }

    /// Distinct complete cycles per terrain, as (trial, cycle) keys.
    pub fn cycles_by_terrain(&self) -> [Vec<(usize, u32)>; 3] {
        let mut out: [Vec<(usize, u32)>; 3] = Default::default();
        for w in &self.windows {
            if let Some(c) = w.cycle {
                let bucket = &mut out[w.terrain.class_index()];
                if !bucket.contains(&(w.trial, c)) {
                    bucket.push((w.trial, c));
                }
            }
        }
        for bucket in &mut out {
            bucket.sort_unstable();
        }
        out
    }

    /// Fraction of TC windows per terrain class.
    pub fn terrain_fractions(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        for w in &self.windows {
            counts[w.terrain.class_index()] += 1;
        }
        let total = self.windows.len().max(1) as f64;
        counts.map(|c| c as f64 / total)
    }
}

/// Windows a labeled trial and attaches targets.
pub fn windows_from_trial(
    trial: &SensorTrial,
    trial_index: usize,
    cfg: &DatasetConfig,
    params: &GeneratorParams,
) -> Result<(Vec<LabeledWindow>, TrialRecord)> {
    let sections = labeler::contact_sections(&trial.fsr, cfg.fsr_threshold)?;
    let events = labeler::detect_events(&sections)?;
    let times: Vec<f64> = trial.imu.iter().map(|s| s.t).collect();
    let percents = labeler::assign_percent(&times, &events)?;
    let flps: Vec<f64> = events
        .iter()
        .filter(|e| e.kind == labeler::EventKind::Flp)
        .map(|e| e.t)
        .collect();
    let (span_start, span_end) = match (flps.first(), flps.last()) {
        (Some(&a), Some(&b)) if flps.len() >= 2 => (a, b),
        _ => {
            return Err(Error::LabelingError {
                at: 0.0,
                msg: format!("trial {trial_index} has no complete gait cycle"),
            })
        }
    };

    let channels = pipeline::select_features(&trial.imu)?;
    let mut out = Vec::new();
    for &duration_t in &cfg.durations_t {
        let wcfg = cfg.window_config(duration_t, params.sample_rate);
        for raw in pipeline::stack_windows(&channels, &wcfg)? {
            let anchor = raw.start + raw.len() - 1;
            let anchor_t = times[anchor];
            let start_t = times[raw.start];
            let cycle = if anchor_t >= span_start && anchor_t < span_end {
                Some((flps.partition_point(|&f| f <= anchor_t) - 1) as u32)
            } else {
                None
            };
            let percent = if start_t >= span_start { percents[anchor] } else { None };
            out.push(LabeledWindow {
                input: pipeline::make_input(&raw, &wcfg)?,
                terrain: trial.condition.terrain,
                trial: trial_index,
                anchor_t,
                cycle,
                percent,
            });
        }
    }
    let record = TrialRecord {
        condition: trial.condition,
        flp_times: trial.truth.flp_times.clone(),
        fsp_times: trial.truth.fsp_times.clone(),
        cycle_count: flps.len().saturating_sub(1),
    };
    Ok((out, record))
}

/// Generates the full condition grid and windows every trial.
pub fn generate_dataset(cfg: &DatasetConfig, params: &GeneratorParams) -> Result<Dataset> {
    let mut windows = Vec::new();
    let mut trials = Vec::new();
    let mut trial_index = 0usize;
    for &terrain in &cfg.terrains {
        for &cadence in &cfg.cadences_bpm {
            let cond = TrialCondition {
                terrain,
                cadence_bpm: cadence,
                duration: cfg.trial_duration,
                seed: subseed(cfg.seed, trial_index as u64),
            };
            let trial = generate_trial(&cond, params);
            let (mut ws, record) = windows_from_trial(&trial, trial_index, cfg, params)?;
            windows.append(&mut ws);
            trials.push(record);
            trial_index += 1;
        }
    }
    Ok(Dataset {
        windows,
        manifest: DatasetManifest { config: cfg.clone(), params: params.clone(), trials },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(terrain: Terrain, bpm: f64, duration: f64, seed: u64) -> TrialCondition {
        TrialCondition { terrain, cadence_bpm: bpm, duration, seed }
    }

    #[test]
    fn same_seed_same_bytes() {
        let params = GeneratorParams::default();
        for noise in [0.0, 0.05] {
            let p = GeneratorParams { noise_std: noise, ..params.clone() };
            let a = generate_trial(&cond(Terrain::Sa, 90.0, 4.0, 7), &p);
            let b = generate_trial(&cond(Terrain::Sa, 90.0, 4.0, 7), &p);
            assert_eq!(a, b);
        }
        let a = generate_trial(&cond(Terrain::Sa, 90.0, 4.0, 7), &params);
        let c = generate_trial(&cond(Terrain::Sa, 90.0, 4.0, 8), &params);
        assert_ne!(a.imu, c.imu);
    }

    #[test]
    fn cadence_120_gives_ten_cycles_in_ten_seconds() {
        let params = GeneratorParams::default();
        let trial = generate_trial(&cond(Terrain::Lw, 120.0, 10.0, 3), &params);
        assert_eq!(trial.stride_period(), 1.0);
        let n = trial.truth.flp_times.len();
        assert!((9..=11).contains(&n), "expected ~10 foot lifts, got {n}");
        for pair in trial.truth.flp_times.windows(2) {
            assert!((pair[1] - pair[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn labeler_events_match_generator_truth() {
        let params = GeneratorParams::default();
        for terrain in Terrain::ALL {
            for bpm in [70.0, 130.0] {
                let trial = generate_trial(&cond(terrain, bpm, 8.0, 11), &params);
                let sections = labeler::contact_sections(&trial.fsr, 0.5).unwrap();
                let events = labeler::detect_events(&sections).unwrap();
                let dt = 1.0 / params.sample_rate;
                for e in &events {
                    let truth = match e.kind {
                        labeler::EventKind::Flp => &trial.truth.flp_times,
                        labeler::EventKind::Fsp => &trial.truth.fsp_times,
                    };
                    let nearest = truth
                        .iter()
                        .map(|&t| (t - e.t).abs())
                        .fold(f64::INFINITY, f64::min);
                    assert!(
                        nearest <= dt + 1e-9,
                        "{terrain:?} {bpm} BPM: event at {} is {nearest}s from truth",
                        e.t
                    );
                }
                // Every detected foot lift pairs with a true one; counts
                // may differ by boundary partials only.
                let flp_count = events.iter().filter(|e| e.kind == labeler::EventKind::Flp).count();
                assert!(
                    (trial.truth.flp_times.len() as i64 - flp_count as i64).abs() <= 1,
                    "{terrain:?}: {flp_count} detected vs {} true",
                    trial.truth.flp_times.len()
                );
            }
        }
    }

    #[test]
    fn identical_phase_windows_are_identical_without_noise() {
        // 120 BPM at 50 Hz advances exactly 2 % per sample, so windows
        // 50 samples apart start at the same phase (all stochastic
        // perturbations off).
        let params = GeneratorParams {
            noise_std: 0.0,
            cycle_amp_jitter: 0.0,
            cycle_phase_jitter: 0.0,
            ..GeneratorParams::default()
        };
        let trial = generate_trial(&cond(Terrain::Lw, 120.0, 6.0, 5), &params);
        let channels = pipeline::select_features(&trial.imu).unwrap();
        let wcfg = WindowConfig { duration_t: 1.5, stride: 50, ..WindowConfig::default() };
        let windows = pipeline::stack_windows(&channels, &wcfg).unwrap();
        assert!(windows.len() >= 3);
        let a = pipeline::make_input(&windows[0], &wcfg).unwrap();
        let b = pipeline::make_input(&windows[1], &wcfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dataset_counts_and_exclusions() {
        let cfg = DatasetConfig {
            trial_duration: 5.0,
            durations_t: vec![1.5],
            stride: 5,
            seed: 9,
            ..DatasetConfig::default()
        };
        let params = GeneratorParams::default();
        let ds = generate_dataset(&cfg, &params).unwrap();
        assert_eq!(ds.manifest.trials.len(), 12);
        // Window arithmetic: (250 − 75)/5 + 1 per trial.
        assert_eq!(ds.windows.len(), 12 * 36);
        // Head-straddling windows stay in the TC set but lose the phase
        // target.
        let unlabeled = ds.windows.iter().filter(|w| w.percent.is_none()).count();
        assert!(unlabeled > 0, "expected some windows outside the labeled span");
        for w in &ds.windows {
            if let Some(p) = w.percent {
                assert!((0.0..100.0).contains(&p));
            }
        }
    }

    #[test]
    fn full_grid_yields_enough_gpr_windows_at_stride_one() {
        let cfg = DatasetConfig {
            trial_duration: 60.0,
            durations_t: vec![1.5],
            stride: 1,
            seed: 4,
            ..DatasetConfig::default()
        };
        let ds = generate_dataset(&cfg, &GeneratorParams::default()).unwrap();
        let labeled = ds.gpr_indices().len();
        assert!(labeled >= 10_000, "got {labeled} labeled windows");
        // Count formula: 12 trials × (3000 − 75 + 1) windows total.
        assert_eq!(ds.windows.len(), 12 * 2926);
    }

    #[test]
    fn class_balance_under_equal_durations() {
        let cfg = DatasetConfig { trial_duration: 5.0, durations_t: vec![1.5], stride: 4, seed: 2, ..DatasetConfig::default() };
        let ds = generate_dataset(&cfg, &GeneratorParams::default()).unwrap();
        for f in ds.terrain_fractions() {
            assert!(f >= 0.30, "terrain fraction {f} below 30%");
        }
    }

    #[test]
    fn enough_cycles_per_terrain_for_the_split() {
        let ds = generate_dataset(&DatasetConfig::default(), &GeneratorParams::default()).unwrap();
        for (i, cycles) in ds.cycles_by_terrain().iter().enumerate() {
            assert!(cycles.len() >= 5, "terrain {i} has only {} cycles", cycles.len());
        }
    }

    /// Greedy depth-2 decision tree on per-window channel means. Lives
    /// here as an oracle that the generated classes are separable at
    /// all (guards against degenerate data), not as a model.
    mod tree {
        pub fn fit_predict(features: &[[f64; 6]], labels: &[usize], test: &[[f64; 6]]) -> Vec<usize> {
            let root = best_split(features, labels);
            let (mut li, mut ri) = (Vec::new(), Vec::new());
            for (i, f) in features.iter().enumerate() {
                if f[root.0] <= root.1 {
                    li.push(i)
                } else {
                    ri.push(i)
                }
            }
            let pick = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| labels[i]).collect() };
            let (ll, rl) = (pick(&li), pick(&ri));
            let lf: Vec<[f64; 6]> = li.iter().map(|&i| features[i]).collect();
            let rf: Vec<[f64; 6]> = ri.iter().map(|&i| features[i]).collect();
            let ls = best_split(&lf, &ll);
            let rs = best_split(&rf, &rl);
            let leaf = |f: &[[f64; 6]], l: &[usize], s: (usize, f64)| -> (usize, usize) {
                let (mut a, mut b) = (vec![0usize; 3], vec![0usize; 3]);
                for (feat, &lab) in f.iter().zip(l) {
                    if feat[s.0] <= s.1 {
                        a[lab] += 1
                    } else {
                        b[lab] += 1
                    }
                }
                (argmax(&a), argmax(&b))
            };
            let (ll_lab, lr_lab) = leaf(&lf, &ll, ls);
            let (rl_lab, rr_lab) = leaf(&rf, &rl, rs);
            test.iter()
                .map(|f| {
                    if f[root.0] <= root.1 {
                        if f[ls.0] <= ls.1 {
                            ll_lab
                        } else {
                            lr_lab
                        }
                    } else if f[rs.0] <= rs.1 {
                        rl_lab
                    } else {
                        rr_lab
                    }
                })
                .collect()
        }

        fn argmax(counts: &[usize]) -> usize {
            counts.iter().enumerate().max_by_key(|&(_, &c)| c).map(|(i, _)| i).unwrap_or(0)
        }

        fn gini(counts: &[usize; 3]) -> f64 {
            let n: usize = counts.iter().sum();
            if n == 0 {
                return 0.0;
            }
            let n = n as f64;
            1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
        }

        fn best_split(features: &[[f64; 6]], labels: &[usize]) -> (usize, f64) {
            let mut best = (0usize, 0.0f64, f64::INFINITY);
            for ch in 0..6 {
                let mut vals: Vec<f64> = features.iter().map(|f| f[ch]).collect();
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                vals.dedup();
                for q in 1..16 {
                    if vals.is_empty() {
                        continue;
                    }
                    let thr = vals[(q * vals.len()) / 16];
                    let (mut lc, mut rc) = ([0usize; 3], [0usize; 3]);
                    for (f, &l) in features.iter().zip(labels) {
                        if f[ch] <= thr {
                            lc[l] += 1
                        } else {
                            rc[l] += 1
                        }
                    }
                    let ln: usize = lc.iter().sum();
                    let rn: usize = rc.iter().sum();
                    let score = (ln as f64 * gini(&lc) + rn as f64 * gini(&rc))
                        / (ln + rn).max(1) as f64;
                    if score < best.2 {
                        best = (ch, thr, score);
                    }
                }
            }
            (best.0, best.1)
        }
    }

    #[test]
    fn terrains_are_separable_by_a_shallow_tree() {
        let cfg = DatasetConfig { trial_duration: 6.0, durations_t: vec![1.5], stride: 4, seed: 13, ..DatasetConfig::default() };
        let ds = generate_dataset(&cfg, &GeneratorParams::default()).unwrap();
        let feats: Vec<[f64; 6]> = ds
            .windows
            .iter()
            .map(|w| {
                std::array::from_fn(|c| {
                    w.input.channel(c).iter().sum::<f64>() / w.input.channel(c).len() as f64
                })
            })
            .collect();
        let labels: Vec<usize> = ds.windows.iter().map(|w| w.terrain.class_index()).collect();
        // Fit on even windows, evaluate on odd ones.
        let (mut trf, mut trl, mut tef, mut tel) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for i in 0..feats.len() {
            if i % 2 == 0 {
                trf.push(feats[i]);
                trl.push(labels[i]);
            } else {
                tef.push(feats[i]);
                tel.push(labels[i]);
            }
        }
        let pred = tree::fit_predict(&trf, &trl, &tef);
        let correct = pred.iter().zip(&tel).filter(|(p, t)| p == t).count();
        let acc = correct as f64 / tel.len() as f64;
        assert!(acc > 0.90, "depth-2 tree accuracy {acc:.3} <= 0.90");
    }
}
