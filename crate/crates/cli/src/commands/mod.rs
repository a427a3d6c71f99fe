//! Pipeline subcommands over the on-disk artifact layout.
//!
//! Frames are identified by the rig ids of the pose file; every per-frame
//! artifact is named `<prefix>_<id:04>.<ext>`. Commands process frames in
//! parallel over the configured worker pool but write independent files, so
//! outputs are byte-identical regardless of worker count.

pub mod evaluate;
pub mod features;
pub mod labelgen;
pub mod predict;
pub mod simulate;
pub mod sparsify;
pub mod stereo;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use depthvote_core::StereoRig;

use crate::io::PoseRecord;

pub fn frame_path(dir: &Path, prefix: &str, id: u64, ext: &str) -> PathBuf {
    dir.join(format!("{prefix}_{id:04}.{ext}"))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Builds the rigs of a dataset from pose records plus the image size.
pub fn rigs_from_records(records: &[PoseRecord], width: usize, height: usize) -> Result<Vec<StereoRig>> {
    records.iter().map(|r| r.into_rig(width, height)).collect()
}

/// Collects results of a parallel per-frame map in frame order, failing on
/// the first error.
pub fn run_frames<T: Send>(
    pool: &rayon::ThreadPool,
    n: usize,
    job: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    pool.install(|| (0..n).into_par_iter().map(|i| job(i)).collect())
}
