//! File formats, configuration, and pipeline orchestration around
//! [`depthvote_core`].
//!
//! Everything on disk is little-endian and bit-exact: PFM depth/disparity
//! maps, binary PGM images and label files, `CVOL` cost-volume dumps,
//! `FMAT` feature matrices, and `SCRF` forest models. The command layer
//! wires the core stages into reproducible subcommands.

pub mod commands;
pub mod config;
pub mod io;
