//! `stereo`: run the census query matcher over every frame.
//!
//! Reads `image_{left,right}_<id>.pgm` plus the pose file and writes
//! disparity maps for both views, the implied left depth map, and
//! (optionally) the cost volume the winner-take-all consumed.

use std::path::Path;

use anyhow::Result;
use depthvote_core::stereo::{
    census_cost_volume, disparity_to_depth, right_disparity, sgm_aggregate, wta_disparity,
};

use crate::commands::{ensure_dir, frame_path, rigs_from_records, run_frames};
use crate::config::PipelineConfig;
use crate::io::{read_pgm, read_poses, write_cvol, write_pfm};

pub fn run(config: &PipelineConfig, images: &Path, poses: &Path, out: &Path) -> Result<()> {
    let records = read_poses(poses)?;
    anyhow::ensure!(!records.is_empty(), "pose file has no rigs");
    let probe = read_pgm(&frame_path(images, "image_left", records[0].rig_id, "pgm"))?;
    let rigs = rigs_from_records(&records, probe.width(), probe.height())?;

    ensure_dir(out)?;
    for sub in ["disp", "depth", "cvol"] {
        ensure_dir(&out.join(sub))?;
    }

    let stereo = &config.stereo;
    let pool = config.thread_pool()?;
    run_frames(&pool, records.len(), |i| {
        let id = records[i].rig_id;
        let left = read_pgm(&frame_path(images, "image_left", id, "pgm"))?;
        let right = read_pgm(&frame_path(images, "image_right", id, "pgm"))?;

        let raw = census_cost_volume(&left, &right, stereo.d_max, stereo.census_window)?;
        let volume = if stereo.sgm {
            sgm_aggregate(&raw, stereo.sgm_p1, stereo.sgm_p2)
        } else {
            raw
        };
        let disp_left = wta_disparity(&volume);
        let sgm = stereo.sgm.then_some((stereo.sgm_p1, stereo.sgm_p2));
        let disp_right =
            right_disparity(&left, &right, stereo.d_max, stereo.census_window, sgm)?;
        let depth = disparity_to_depth(&disp_left, &rigs[i]);

        write_pfm(&frame_path(&out.join("disp"), "disp_left", id, "pfm"), &disp_left)?;
        write_pfm(&frame_path(&out.join("disp"), "disp_right", id, "pfm"), &disp_right)?;
        write_pfm(&frame_path(&out.join("depth"), "depth_left", id, "pfm"), &depth)?;
        if stereo.dump_volumes {
            write_cvol(&frame_path(&out.join("cvol"), "cost", id, "cvol"), &volume)?;
        }
        Ok(())
    })?;

    config.write_resolved(out)
}
