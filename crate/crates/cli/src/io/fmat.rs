//! Feature-matrix blobs: magic `FMAT`, u32 rows, u32 cols, f32 data in
//! row-major order, then one length-prefixed UTF-8 name per column.
//!
//! The first two columns are always `x` and `y` (pixel coordinates of each
//! row); the remaining columns are feature channels. Frame association comes
//! from the file name, not the blob.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use depthvote_core::confidence::FeatureMatrix;

pub fn write_fmat(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    let rows = features.n_samples();
    let cols = features.n_features + 2;
    out.write_all(b"FMAT")?;
    out.write_u32::<LittleEndian>(rows as u32)?;
    out.write_u32::<LittleEndian>(cols as u32)?;
    for i in 0..rows {
        let (x, y) = features.pixels[i];
        out.write_f32::<LittleEndian>(x as f32)?;
        out.write_f32::<LittleEndian>(y as f32)?;
        for &v in features.row(i) {
            out.write_f32::<LittleEndian>(v)?;
        }
    }
    for name in ["x", "y"]
        .into_iter()
        .chain(features.names.iter().map(|s| s.as_str()))
    {
        out.write_u32::<LittleEndian>(name.len() as u32)?;
        out.write_all(name.as_bytes())?;
    }
    Ok(())
}

/// Reads a feature blob; `frame_id` tags every row, and `width`/`height`
/// restore the source frame dimensions the blob does not carry.
pub fn read_fmat(path: &Path, frame_id: u32, width: usize, height: usize) -> Result<FeatureMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != b"FMAT" {
        bail!("{}: bad feature matrix magic", path.display());
    }
    let rows = reader.read_u32::<LittleEndian>()? as usize;
    let cols = reader.read_u32::<LittleEndian>()? as usize;
    if cols < 3 {
        bail!("{}: feature matrix needs x, y and at least one channel", path.display());
    }
    let n_features = cols - 2;
    let mut values = Vec::with_capacity(rows * n_features);
    let mut pixels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let x = reader.read_f32::<LittleEndian>()?;
        let y = reader.read_f32::<LittleEndian>()?;
        pixels.push((x as u32, y as u32));
        for _ in 0..n_features {
            values.push(reader.read_f32::<LittleEndian>()?);
        }
    }
    let mut names = Vec::with_capacity(cols);
    for _ in 0..cols {
        let len = reader.read_u32::<LittleEndian>()? as usize;
        let mut buf = vec![0u8; len];
        reader.read_exact(&mut buf)?;
        names.push(String::from_utf8(buf)?);
    }
    if names[0] != "x" || names[1] != "y" {
        bail!("{}: first two columns must be x and y", path.display());
    }
    Ok(FeatureMatrix {
        names: names.split_off(2),
        width,
        height,
        n_features,
        values,
        pixels,
        frame_ids: vec![frame_id; rows],
    })
}
