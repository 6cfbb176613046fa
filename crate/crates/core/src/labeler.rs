//! Gait-phase labeling from FSR foot-switch streams.
//!
//! A front/back foot-switch pair splits the gait cycle into four
//! sections (swing, heel strike, mid-stance, heel off). Foot lifting
//! points (FLP, transition into swing) are anchored at 0 %, foot
//! stepping points (FSP, transition out of swing) at 40 %, and every
//! sample in between is labeled linearly. The resulting percent is
//! mapped onto the unit circle so that 100 % and 0 % coincide.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Sections shorter than this many samples (40 ms at 50 Hz) are treated
/// as FSR chatter and merged into a neighbor.
const MIN_SECTION_SAMPLES: usize = 2;

/// One FSR sample: contact level of the front and back switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsrSample {
    pub t: f64,
    pub front: f64,
    pub back: f64,
}

/// The four gait-phase sections distinguishable from two foot switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectionKind {
    /// Neither switch closed: foot in the air.
    Swing,
    /// Back switch only: heel just touched down.
    HeelStrike,
    /// Both switches closed: full contact.
    MidStance,
    /// Front switch only: heel already lifted.
    HeelOff,
}

impl SectionKind {
    fn classify(front_on: bool, back_on: bool) -> Self {
        match (front_on, back_on) {
            (false, false) => SectionKind::Swing,
            (false, true) => SectionKind::HeelStrike,
            (true, true) => SectionKind::MidStance,
            (true, false) => SectionKind::HeelOff,
        }
    }
}

/// A maximal run of samples sharing one section kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSection {
    pub kind: SectionKind,
    pub start_t: f64,
    pub end_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Foot lifting point: the foot detaches from the ground (0 %).
    Flp,
    /// Foot stepping point: the foot touches the ground again (40 %).
    Fsp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitEvent {
    pub kind: EventKind,
    pub t: f64,
}

/// A continuous gait-phase label: percent in [0, 100) plus its
/// unit-circle encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitLabel {
    pub percent: f64,
    pub x: f64,
    pub y: f64,
}

impl GaitLabel {
    pub fn from_percent(percent: f64) -> Result<Self> {
        let (x, y) = to_phase_xy(percent)?;
        Ok(Self { percent: if percent >= 100.0 { 0.0 } else { percent }, x, y })
    }
}

/// Classifies an FSR stream into merged phase sections.
///
/// Each sample maps to a [`SectionKind`] by thresholding the two
/// contact levels; adjacent equal kinds merge into one section, and
/// sub-40 ms chatter is absorbed into its neighbor. A section's
/// `end_t` is the start of the next section (the last sample's time
/// for the final section).
pub fn contact_sections(fsr: &[FsrSample], threshold: f64) -> Result<Vec<PhaseSection>> {
    if fsr.is_empty() {
        return Err(Error::EmptyStream);
    }
    if fsr.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 FSR samples".into()));
    }

    // Run-length encode the per-sample classification.
    let kinds: Vec<SectionKind> =
        fsr.iter().map(|s| SectionKind::classify(s.front > threshold, s.back > threshold)).collect();
    let mut runs: Vec<(SectionKind, usize)> = Vec::new(); // (kind, length)
    for &k in &kinds {
        match runs.last_mut() {
            Some((last, len)) if *last == k => *len += 1,
            _ => runs.push((k, 1)),
        }
    }

    // Debounce: fold short runs into a neighbor until stable.
    loop {
        let Some(pos) = runs.iter().position(|&(_, len)| len < MIN_SECTION_SAMPLES) else {
            break;
        };
        if runs.len() == 1 {
            break;
        }
        let (_, len) = runs.remove(pos);
        if pos > 0 {
            runs[pos - 1].1 += len;
        } else {
            runs[0].1 += len;
        }
        // Re-coalesce around the removal point.
        let mut merged: Vec<(SectionKind, usize)> = Vec::with_capacity(runs.len());
        for (k, len) in runs {
            match merged.last_mut() {
                Some((last, l)) if *last == k => *l += len,
                _ => merged.push((k, len)),
            }
        }
        runs = merged;
    }

    let mut sections = Vec::with_capacity(runs.len());
    let mut idx = 0;
    for (i, &(kind, len)) in runs.iter().enumerate() {
        let start_t = fsr[idx].t;
        idx += len;
        let end_t = if i + 1 < runs.len() { fsr[idx].t } else { fsr[fsr.len() - 1].t };
        sections.push(PhaseSection { kind, start_t, end_t });
    }
    Ok(sections)
}

/// Extracts alternating FLP/FSP events from a section sequence.
///
/// An FLP is emitted at the start of every swing section (including a
/// swing section that opens the trial); an FSP at every transition
/// from swing into a contact section.
pub fn detect_events(sections: &[PhaseSection]) -> Result<Vec<GaitEvent>> {
    if sections.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut events = Vec::new();
    let mut prev: Option<SectionKind> = None;
    for s in sections {
        let entering_swing = s.kind == SectionKind::Swing;
        let leaving_swing = prev == Some(SectionKind::Swing) && !entering_swing;
        if entering_swing {
            if prev == Some(SectionKind::Swing) {
                return Err(Error::LabelingError {
                    at: s.start_t,
                    msg: "consecutive swing sections".into(),
                });
            }
            events.push(GaitEvent { kind: EventKind::Flp, t: s.start_t });
        } else if leaving_swing {
            events.push(GaitEvent { kind: EventKind::Fsp, t: s.start_t });
        }
        prev = Some(s.kind);
    }
    verify_alternation(&events)?;
    Ok(events)
}

fn verify_alternation(events: &[GaitEvent]) -> Result<()> {
    for (i, pair) in events.windows(2).enumerate() {
        if pair[0].kind == pair[1].kind || pair[1].t <= pair[0].t {
            return Err(Error::LabelingError {
                at: pair[1].t,
                msg: format!("events do not alternate at index {}", i + 1),
            });
        }
    }
    if let Some(first) = events.first() {
        if first.kind != EventKind::Flp {
            return Err(Error::LabelingError { at: first.t, msg: "first event is not an FLP".into() });
        }
    }
    Ok(())
}

/// Assigns a gait percent to each timestamp from alternating FLP/FSP
/// events. FLP anchors at 0 % (wrapping from 100 %), FSP at 40 %;
/// samples are linear in time between anchors. Timestamps before the
/// first FLP or after the last FLP get `None`.
pub fn assign_percent(timestamps: &[f64], events: &[GaitEvent]) -> Result<Vec<Option<f64>>> {
    verify_alternation(events)?;
    let flps: Vec<f64> =
        events.iter().filter(|e| e.kind == EventKind::Flp).map(|e| e.t).collect();
    let fsps: Vec<f64> =
        events.iter().filter(|e| e.kind == EventKind::Fsp).map(|e| e.t).collect();
    if flps.len() < 2 {
        return Err(Error::LabelingError {
            at: flps.first().copied().unwrap_or(0.0),
            msg: "events span less than one full FLP-to-FLP cycle".into(),
        });
    }
    for i in 0..flps.len() - 1 {
        if fsps[i] - flps[i] <= 0.0 || flps[i + 1] - fsps[i] <= 0.0 {
            return Err(Error::LabelingError {
                at: fsps[i],
                msg: "zero-duration labeling segment".into(),
            });
        }
    }

    let last_flp = *flps.last().unwrap();
    let labels = timestamps
        .iter()
        .map(|&t| {
            if t < flps[0] || t > last_flp {
                return None;
            }
            // Largest i with flps[i] <= t.
            let i = flps.partition_point(|&f| f <= t) - 1;
            if i == flps.len() - 1 {
                return Some(0.0); // exactly at the final FLP; 100 wraps to 0
            }
            let p = if t <= fsps[i] {
                40.0 * (t - flps[i]) / (fsps[i] - flps[i])
            } else {
                40.0 + 60.0 * (t - fsps[i]) / (flps[i + 1] - fsps[i])
            };
            Some(if p >= 100.0 { 0.0 } else { p })
        })
        .collect();
    Ok(labels)
}

/// Maps a gait percent in [0, 100] onto the unit circle; 0 and 100 both
/// land on (1, 0).
pub fn to_phase_xy(percent: f64) -> Result<(f64, f64)> {
    if !(0.0..=100.0).contains(&percent) {
        return Err(Error::InvalidLabel(format!("percent {percent} outside [0, 100]")));
    }
    let theta = percent * TAU / 100.0;
    Ok((theta.cos(), theta.sin()))
}

/// Recovers the gait percent in [0, 100) from phase coordinates. Only
/// the angle matters, so any positive scaling of (x, y) yields the same
/// percent.
pub fn from_phase_xy(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    let percent = y.atan2(x).rem_euclid(TAU) * (100.0 / TAU);
    Ok(if percent >= 100.0 { 0.0 } else { percent })
}

/// RMSE over the wraparound distance min(|Δ|, 100 − |Δ|) on the 0–100 %
/// circle.
pub fn circular_rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::InvalidData(format!(
            "length mismatch or empty input: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    let sum_sq: f64 = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| {
            let d = (p - t).rem_euclid(100.0);
            let d = d.min(100.0 - d);
            d * d
        })
        .sum();
    Ok((sum_sq / pred.len() as f64).sqrt())
}
