//! JSON pipeline configuration.
//!
//! Every field has a default matching the reference parameter set
//! (α_min = 10°, σ_max = 2, forest of 20 trees with depth 20, leaf 100,
//! 2000 node samples, 500 thresholds per channel), so an empty `{}` config
//! is a valid starting point. Each command echoes the fully resolved
//! configuration next to its outputs.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use depthvote_core::confidence::ForestHyper;
use depthvote_core::labelgen::{BorderMode, LabelParams};
use depthvote_core::math::Vec3;
use depthvote_core::scene::{ErrorMode, ErrorSpec, Primitive, Scene, TextureSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sim: SimConfig,
    pub label: LabelConfig,
    pub stereo: StereoConfig,
    pub forest: ForestConfig,
    /// Root seed; per-frame and per-tree seeds derive from it.
    pub seed: u64,
    /// Worker threads for frame-level parallelism; 0 = all available cores.
    pub workers: usize,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Writes the fully resolved configuration beside the outputs.
    pub fn write_resolved(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("config.resolved.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    /// Builds the rayon pool implied by `workers`.
    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if self.workers > 0 {
            builder = builder.num_threads(self.workers);
        }
        builder.build().context("building worker pool")
    }
}

/// Synthetic dataset generation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    /// Principal point; `None` centers it at ((w−1)/2, (h−1)/2).
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    pub baseline: f64,
    /// Arc look-at target and radius.
    pub center: [f64; 3],
    pub radius: f64,
    pub arc_degrees: f64,
    pub n_rigs: usize,
    pub scene: SceneConfig,
    /// Optional corruption of the ground-truth depth maps into the query
    /// depth maps (per-frame seeds derive from the root seed).
    pub error: Option<ErrorConfig>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            width: 320,
            height: 240,
            fx: 320.0,
            fy: 320.0,
            cx: None,
            cy: None,
            baseline: 0.5,
            center: [0.0, 0.0, 4.0],
            radius: 4.0,
            arc_degrees: 70.0,
            n_rigs: 8,
            scene: SceneConfig::default(),
            error: None,
        }
    }
}

impl SimConfig {
    pub fn intrinsics(&self) -> depthvote_core::CameraIntrinsics {
        depthvote_core::CameraIntrinsics::new(
            self.fx,
            self.fy,
            self.cx.unwrap_or((self.width as f64 - 1.0) / 2.0),
            self.cy.unwrap_or((self.height as f64 - 1.0) / 2.0),
            self.width,
            self.height,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub primitives: Vec<PrimitiveConfig>,
    pub background: Option<PrimitiveConfig>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        // Composite demo scene: textured plane with a sphere and a box.
        SceneConfig {
            primitives: vec![
                PrimitiveConfig::Plane {
                    anchor: [0.0, 0.0, 5.0],
                    normal: [0.0, 0.0, -1.0],
                    half_extent: None,
                    seed: 7,
                    cell: 0.15,
                },
                PrimitiveConfig::Sphere {
                    center: [0.5, 0.1, 4.0],
                    radius: 0.5,
                    seed: 11,
                    cell: 0.15,
                },
                PrimitiveConfig::Box {
                    min: [-1.1, -0.6, 4.2],
                    max: [-0.3, 0.3, 5.0],
                    seed: 13,
                    cell: 0.15,
                },
            ],
            background: None,
        }
    }
}

impl SceneConfig {
    pub fn build(&self) -> Scene {
        let mut scene = Scene::new(self.primitives.iter().map(|p| p.build()).collect());
        if let Some(bg) = &self.background {
            scene = scene.with_background(bg.build());
        }
        scene
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveConfig {
    Plane {
        anchor: [f64; 3],
        normal: [f64; 3],
        #[serde(default)]
        half_extent: Option<f64>,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_cell")]
        cell: f64,
    },
    Sphere {
        center: [f64; 3],
        radius: f64,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_cell")]
        cell: f64,
    },
    Box {
        min: [f64; 3],
        max: [f64; 3],
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_cell")]
        cell: f64,
    },
}

fn default_seed() -> u64 {
    1
}

fn default_cell() -> f64 {
    0.25
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

impl PrimitiveConfig {
    pub fn build(&self) -> Primitive {
        match *self {
            PrimitiveConfig::Plane {
                anchor,
                normal,
                half_extent,
                seed,
                cell,
            } => Primitive::Plane {
                anchor: vec3(anchor),
                normal: vec3(normal),
                half_extent,
                texture: TextureSpec { seed, cell },
            },
            PrimitiveConfig::Sphere {
                center,
                radius,
                seed,
                cell,
            } => Primitive::Sphere {
                center: vec3(center),
                radius,
                texture: TextureSpec { seed, cell },
            },
            PrimitiveConfig::Box {
                min,
                max,
                seed,
                cell,
            } => Primitive::Box {
                min: vec3(min),
                max: vec3(max),
                texture: TextureSpec { seed, cell },
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ErrorConfig {
    pub blob_fraction: f64,
    pub blob_radius_px: u32,
    pub mode: ErrorModeConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModeConfig {
    ScaleDepth { factor: f64 },
    ConstantOffset { offset: f64 },
    RandomDepth { lo: f64, hi: f64 },
}

impl ErrorConfig {
    pub fn spec(&self, seed: u64) -> ErrorSpec {
        ErrorSpec {
            blob_fraction: self.blob_fraction,
            blob_radius_px: self.blob_radius_px,
            mode: match self.mode {
                ErrorModeConfig::ScaleDepth { factor } => ErrorMode::ScaleDepth(factor),
                ErrorModeConfig::ConstantOffset { offset } => ErrorMode::ConstantOffset(offset),
                ErrorModeConfig::RandomDepth { lo, hi } => ErrorMode::RandomDepth { lo, hi },
            },
            seed,
        }
    }
}

/// Labeling thresholds (defaults: α_min 10°, σ_max 2, σ_px 1, 3 votes).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    pub alpha_min: f64,
    pub sigma_max: f64,
    pub sigma_px: f64,
    pub min_augment_votes: u32,
    pub border_mode: BorderModeConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum BorderModeConfig {
    #[default]
    Distance,
    InverseLiteral,
}

impl Default for LabelConfig {
    fn default() -> Self {
        let p = LabelParams::default();
        LabelConfig {
            alpha_min: p.alpha_min,
            sigma_max: p.sigma_max,
            sigma_px: p.sigma_px,
            min_augment_votes: p.min_augment_votes,
            border_mode: BorderModeConfig::Distance,
        }
    }
}

impl LabelConfig {
    pub fn params(&self) -> LabelParams {
        LabelParams {
            alpha_min: self.alpha_min,
            sigma_max: self.sigma_max,
            sigma_px: self.sigma_px,
            min_augment_votes: self.min_augment_votes,
            border_mode: match self.border_mode {
                BorderModeConfig::Distance => BorderMode::Distance,
                BorderModeConfig::InverseLiteral => BorderMode::InverseLiteral,
            },
        }
    }
}

/// Query stereo matcher parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct StereoConfig {
    pub d_max: usize,
    pub census_window: usize,
    /// Semi-global aggregation before winner-take-all.
    pub sgm: bool,
    pub sgm_p1: f32,
    pub sgm_p2: f32,
    /// Dump per-frame cost volumes (`.cvol`) from the stereo command.
    pub dump_volumes: bool,
}

impl Default for StereoConfig {
    fn default() -> Self {
        StereoConfig {
            d_max: 64,
            census_window: 5,
            sgm: true,
            sgm_p1: 1.0,
            sgm_p2: 8.0,
            dump_volumes: true,
        }
    }
}

/// Forest hyperparameters (defaults match the reference setup).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub node_samples: usize,
    pub thresholds_per_feature: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        let h = ForestHyper::default();
        ForestConfig {
            n_trees: h.n_trees,
            max_depth: h.max_depth,
            min_leaf: h.min_leaf,
            node_samples: h.node_samples,
            thresholds_per_feature: h.thresholds_per_feature,
        }
    }
}

impl ForestConfig {
    pub fn hyper(&self) -> ForestHyper {
        ForestHyper {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            node_samples: self.node_samples,
            thresholds_per_feature: self.thresholds_per_feature,
        }
    }
}
