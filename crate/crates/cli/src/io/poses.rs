//! Plain-text pose files, one rig per line:
//!
//! ```text
//! rig_id fx fy cx cy baseline r11 r12 r13 tx r21 r22 r23 ty r31 r32 r33 tz
//! ```
//!
//! The rotation/translation map world coordinates into the left camera.
//! `#` starts a comment line; floats are written in Rust's shortest
//! round-trip form, so read(write(x)) is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use depthvote_core::math::{Mat3, Vec3};
use depthvote_core::{CameraIntrinsics, StereoRig};

/// One pose line; combined with the image size this builds a [`StereoRig`].
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub rig_id: u64,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub baseline: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl PoseRecord {
    pub fn from_rig(rig_id: u64, rig: &StereoRig) -> Self {
        PoseRecord {
            rig_id,
            fx: rig.intrinsics.fx,
            fy: rig.intrinsics.fy,
            cx: rig.intrinsics.cx,
            cy: rig.intrinsics.cy,
            baseline: rig.baseline,
            rotation: rig.rotation,
            translation: rig.translation,
        }
    }

    pub fn into_rig(&self, width: usize, height: usize) -> Result<StereoRig> {
        let intrinsics = CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy, width, height);
        StereoRig::new(intrinsics, self.rotation, self.translation, self.baseline)
            .map_err(|e| anyhow::anyhow!("rig {}: {e}", self.rig_id))
    }
}

pub fn write_poses(path: &Path, records: &[PoseRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        "# rig_id fx fy cx cy baseline r11 r12 r13 tx r21 r22 r23 ty r31 r32 r33 tz"
    )?;
    for r in records {
        let m = &r.rotation.m;
        let t = r.translation;
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            r.rig_id,
            r.fx,
            r.fy,
            r.cx,
            r.cy,
            r.baseline,
            m[0][0],
            m[0][1],
            m[0][2],
            t.x,
            m[1][0],
            m[1][1],
            m[1][2],
            t.y,
            m[2][0],
            m[2][1],
            m[2][2],
            t.z,
        )?;
    }
    Ok(())
}

/// Reads and sorts pose records by rig id; ids must be unique.
pub fn read_poses(path: &Path) -> Result<Vec<PoseRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 18 {
            bail!(
                "{}:{}: expected 18 fields, found {}",
                path.display(),
                lineno + 1,
                tokens.len()
            );
        }
        let parse = |i: usize| -> Result<f64> {
            tokens[i]
                .parse::<f64>()
                .with_context(|| format!("{}:{}: field {}", path.display(), lineno + 1, i + 1))
        };
        let rig_id: u64 = tokens[0]
            .parse()
            .with_context(|| format!("{}:{}: rig id", path.display(), lineno + 1))?;
        records.push(PoseRecord {
            rig_id,
            fx: parse(1)?,
            fy: parse(2)?,
            cx: parse(3)?,
            cy: parse(4)?,
            baseline: parse(5)?,
            rotation: Mat3::from_rows(
                [parse(6)?, parse(7)?, parse(8)?],
                [parse(10)?, parse(11)?, parse(12)?],
                [parse(14)?, parse(15)?, parse(16)?],
            ),
            translation: Vec3::new(parse(9)?, parse(13)?, parse(17)?),
        });
    }
    records.sort_by_key(|r| r.rig_id);
    for pair in records.windows(2) {
        if pair[0].rig_id == pair[1].rig_id {
            bail!("{}: duplicate rig id {}", path.display(), pair[0].rig_id);
        }
    }
    Ok(records)
}
