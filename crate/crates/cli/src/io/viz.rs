//! RGB visualization of label images: green = positive, red = negative,
//! blue = ignored.

use std::path::Path;

use anyhow::{Context, Result};
use depthvote_core::labelgen::{Label, LabelImage};
use image::{Rgb, RgbImage};

pub fn write_label_png(path: &Path, labels: &LabelImage) -> Result<()> {
    let mut img = RgbImage::new(labels.width() as u32, labels.height() as u32);
    for (x, y, label) in labels.enumerate() {
        let color = match label {
            Label::Positive => Rgb([0, 200, 0]),
            Label::Negative => Rgb([220, 0, 0]),
            Label::Ignore => Rgb([0, 0, 220]),
        };
        img.put_pixel(x as u32, y as u32, color);
    }
    img.save(path)
        .with_context(|| format!("writing {}", path.display()))
}
