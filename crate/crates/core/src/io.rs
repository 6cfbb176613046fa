//! CSV interchange formats.
//!
//! Trial IMU: `t,lax,lay,laz,avx,avy,avz` (seconds, m/s², rad/s), one
//! row per 50 Hz tick. FSR: `t,front,back`. Labels: `t,percent,x,y`.
//! Floats are written in shortest round-trip form, so a write → read
//! cycle reproduces the exact bit pattern.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::FsrSample;
use crate::pipeline::ImuSample;

#[derive(Debug, Serialize, Deserialize)]
struct ImuRow {
    t: f64,
    lax: f64,
    lay: f64,
    laz: f64,
    avx: f64,
    avy: f64,
    avz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FsrRow {
    t: f64,
    front: f64,
    back: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    t: f64,
    percent: f64,
    x: f64,
    y: f64,
}

fn check_monotonic(ts: &[f64], what: &str) -> Result<()> {
    for pair in ts.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidData(format!(
                "{what}: timestamps not strictly increasing at t={}",
                pair[1]
            )));
        }
    }
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidData(format!("{what}: non-finite timestamp")));
    }
    Ok(())
}

pub fn write_imu_csv(samples: &[ImuSample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in samples {
        w.serialize(ImuRow {
            t: s.t,
            lax: s.lin_acc[0],
            lay: s.lin_acc[1],
            laz: s.lin_acc[2],
            avx: s.ang_vel[0],
            avy: s.ang_vel[1],
            avz: s.ang_vel[2],
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_imu_csv(path: &Path) -> Result<Vec<ImuSample>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: ImuRow = row?;
        let s = ImuSample {
            t: row.t,
            lin_acc: [row.lax, row.lay, row.laz],
            ang_vel: [row.avx, row.avy, row.avz],
        };
        if s.lin_acc.iter().chain(&s.ang_vel).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite IMU value at t={}", s.t)));
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(Error::EmptyStream);
    }
    check_monotonic(&out.iter().map(|s| s.t).collect::<Vec<_>>(), "imu csv")?;
    Ok(out)
}

pub fn write_fsr_csv(samples: &[FsrSample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in samples {
        w.serialize(FsrRow { t: s.t, front: s.front, back: s.back })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fsr_csv(path: &Path) -> Result<Vec<FsrSample>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: FsrRow = row?;
        if !row.front.is_finite() || !row.back.is_finite() {
            return Err(Error::InvalidData(format!("non-finite FSR value at t={}", row.t)));
        }
        out.push(FsrSample { t: row.t, front: row.front, back: row.back });
    }
    if out.is_empty() {
        return Err(Error::EmptyStream);
    }
    check_monotonic(&out.iter().map(|s| s.t).collect::<Vec<_>>(), "fsr csv")?;
    Ok(out)
}

/// Writes labeled samples; timestamps without a label are skipped.
pub fn write_labels_csv(
    times: &[f64],
    percents: &[Option<f64>],
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (&t, &p) in times.iter().zip(percents) {
        if let Some(percent) = p {
            let (x, y) = crate::labeler::to_phase_xy(percent)?;
            w.serialize(LabelRow { t, percent, x, y })?;
        }
    }
    w.flush()?;
    Ok(())
}
