//! `labelgen`: the consistency pipeline over a set of depth maps.
//!
//! Reads `depth_left_<id>.pfm` from the depth directory plus the pose file,
//! labels every frame against all others, and writes `labels_<id>.pgm`
//! (0 = ignore, 1 = positive, 2 = negative) together with per-frame counts
//! in `stats.json`. Optional outputs: RGB PNG visualizations and PFM dumps
//! of the vote sums, support counts, and augmented depth maps.

use std::path::Path;

use anyhow::Result;
use depthvote_core::labelgen::{Label, LabelPipeline};
use depthvote_core::{DepthMap, Grid};
use serde::Serialize;

use crate::commands::{ensure_dir, frame_path, rigs_from_records, run_frames};
use crate::config::PipelineConfig;
use crate::io::{labels_to_image, read_pfm, read_poses, write_label_png, write_pfm, write_pgm};

#[derive(Debug, Serialize)]
struct FrameStats {
    frame: u64,
    positive: usize,
    negative: usize,
    ignore: usize,
    valid_depth: usize,
}

#[derive(Debug, Serialize)]
struct LabelStats {
    frames: Vec<FrameStats>,
    total_positive: usize,
    total_negative: usize,
    total_ignore: usize,
}

pub struct LabelgenOptions {
    pub viz: bool,
    pub dump_maps: bool,
}

pub fn run(
    config: &PipelineConfig,
    depths_dir: &Path,
    poses: &Path,
    out: &Path,
    options: &LabelgenOptions,
) -> Result<()> {
    let records = read_poses(poses)?;
    anyhow::ensure!(!records.is_empty(), "pose file has no rigs");
    let depths: Vec<DepthMap> = records
        .iter()
        .map(|r| read_pfm(&frame_path(depths_dir, "depth_left", r.rig_id, "pfm")))
        .collect::<Result<_>>()?;
    let rigs = rigs_from_records(&records, depths[0].width(), depths[0].height())?;

    ensure_dir(out)?;
    if options.dump_maps {
        ensure_dir(&out.join("debug"))?;
    }

    let pipeline = LabelPipeline::new(&rigs, &depths, config.label.params());
    let pool = config.thread_pool()?;
    let frames = run_frames(&pool, records.len(), |i| {
        let id = records[i].rig_id;
        let stage = pipeline.run(i);
        write_pgm(
            &frame_path(out, "labels", id, "pgm"),
            &labels_to_image(&stage.labels),
        )?;
        if options.viz {
            write_label_png(&frame_path(out, "labels", id, "png"), &stage.labels)?;
        }
        if options.dump_maps {
            let debug = out.join("debug");
            write_pfm(
                &frame_path(&debug, "votes", id, "pfm"),
                &Grid::from_fn(stage.votes.width(), stage.votes.height(), |x, y| {
                    stage.votes.at(x, y).vote_sum
                }),
            )?;
            write_pfm(
                &frame_path(&debug, "support", id, "pfm"),
                &pipeline
                    .support(i)
                    .map(|cell| cell.support as f64),
            )?;
            write_pfm(&frame_path(&debug, "augmented", id, "pfm"), &stage.augmented)?;
        }

        let mut stats = FrameStats {
            frame: id,
            positive: 0,
            negative: 0,
            ignore: 0,
            valid_depth: depths[i].count_valid(),
        };
        for label in stage.labels.data() {
            match label {
                Label::Positive => stats.positive += 1,
                Label::Negative => stats.negative += 1,
                Label::Ignore => stats.ignore += 1,
            }
        }
        Ok(stats)
    })?;

    let stats = LabelStats {
        total_positive: frames.iter().map(|f| f.positive).sum(),
        total_negative: frames.iter().map(|f| f.negative).sum(),
        total_ignore: frames.iter().map(|f| f.ignore).sum(),
        frames,
    };
    std::fs::write(
        out.join("stats.json"),
        serde_json::to_string_pretty(&stats)? + "\n",
    )?;
    config.write_resolved(out)
}
