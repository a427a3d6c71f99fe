//! `simulate`: render a synthetic multi-view dataset with exact ground
//! truth, optionally corrupting the query depth maps with seeded error
//! blobs.
//!
//! Output layout under `--out`:
//!
//! ```text
//! poses.txt
//! images/image_{left,right}_<id>.pgm
//! gt/depth_{left,right}_<id>.pfm     exact ray-cast depth
//! query/depth_left_<id>.pfm          corrupted copy (or the ground truth)
//! masks/error_mask_<id>.pgm          present only when errors are injected
//! ```

use std::path::Path;

use anyhow::Result;
use depthvote_core::math::{derive_seed, Vec3};
use depthvote_core::scene::{inject_errors, make_arc_rigs, render_views};

use crate::commands::{ensure_dir, frame_path, run_frames};
use crate::config::PipelineConfig;
use crate::io::{write_pfm, write_pgm, write_poses, PoseRecord};

const ERROR_SEED_STREAM: u64 = 0x5eed_e440;

pub fn run(config: &PipelineConfig, out: &Path) -> Result<()> {
    let sim = &config.sim;
    let scene = sim.scene.build();
    let rigs = make_arc_rigs(
        Vec3::new(sim.center[0], sim.center[1], sim.center[2]),
        sim.radius,
        sim.arc_degrees,
        sim.n_rigs,
        sim.intrinsics(),
        sim.baseline,
    );

    ensure_dir(out)?;
    for sub in ["images", "gt", "query", "masks"] {
        ensure_dir(&out.join(sub))?;
    }
    let records: Vec<PoseRecord> = rigs
        .iter()
        .enumerate()
        .map(|(i, rig)| PoseRecord::from_rig(i as u64, rig))
        .collect();
    write_poses(&out.join("poses.txt"), &records)?;

    let pool = config.thread_pool()?;
    run_frames(&pool, rigs.len(), |i| {
        let id = i as u64;
        let views = render_views(&scene, &rigs[i]);
        write_pgm(&frame_path(&out.join("images"), "image_left", id, "pgm"), &views.image_left)?;
        write_pgm(
            &frame_path(&out.join("images"), "image_right", id, "pgm"),
            &views.image_right,
        )?;
        write_pfm(&frame_path(&out.join("gt"), "depth_left", id, "pfm"), &views.depth_left)?;
        write_pfm(
            &frame_path(&out.join("gt"), "depth_right", id, "pfm"),
            &views.depth_right,
        )?;

        let query = match &sim.error {
            Some(error) => {
                let spec = error.spec(derive_seed(config.seed ^ ERROR_SEED_STREAM, id));
                let (corrupted, mask) = inject_errors(&views.depth_left, &spec);
                write_pgm(
                    &frame_path(&out.join("masks"), "error_mask", id, "pgm"),
                    &mask.map(|&m| m as u8),
                )?;
                corrupted
            }
            None => views.depth_left.clone(),
        };
        write_pfm(&frame_path(&out.join("query"), "depth_left", id, "pfm"), &query)?;
        Ok(())
    })?;

    config.write_resolved(out)
}
