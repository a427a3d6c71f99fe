//! Readers and writers for every on-disk artifact.

mod cvol;
mod fmat;
mod model;
mod pfm;
mod pgm;
mod poses;
mod viz;

pub use cvol::{read_cvol, write_cvol};
pub use fmat::{read_fmat, write_fmat};
pub use model::{read_model, write_model};
pub use pfm::{read_pfm, write_pfm};
pub use pgm::{read_pgm, write_pgm};
pub use poses::{read_poses, write_poses, PoseRecord};
pub use viz::write_label_png;

use depthvote_core::labelgen::{Label, LabelImage};
use depthvote_core::Grid;

/// Label encoding in 8-bit PGM files: 0 = Ignore, 1 = Positive, 2 = Negative.
pub fn label_to_byte(label: Label) -> u8 {
    match label {
        Label::Ignore => 0,
        Label::Positive => 1,
        Label::Negative => 2,
    }
}

pub fn byte_to_label(byte: u8) -> anyhow::Result<Label> {
    match byte {
        0 => Ok(Label::Ignore),
        1 => Ok(Label::Positive),
        2 => Ok(Label::Negative),
        other => anyhow::bail!("invalid label byte {other}"),
    }
}

pub fn labels_to_image(labels: &LabelImage) -> Grid<u8> {
    labels.map(|&l| label_to_byte(l))
}

pub fn image_to_labels(image: &Grid<u8>) -> anyhow::Result<LabelImage> {
    let mut out = Grid::filled(image.width(), image.height(), Label::Ignore);
    for (x, y, b) in image.enumerate() {
        *out.at_mut(x, y) = byte_to_label(*b)?;
    }
    Ok(out)
}
