//! Grayscale PFM ("Pf") float maps.
//!
//! Written with scale -1.0 (little-endian), rows bottom-to-top per the
//! format convention. Values are stored as f32; in-memory maps are f64.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use byteorder::{BigEndian, ByteOrder, LittleEndian, WriteBytesExt};
use depthvote_core::Grid;

pub fn write_pfm(path: &Path, map: &Grid<f64>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write!(out, "Pf\n{} {}\n-1.0\n", map.width(), map.height())?;
    for y in (0..map.height()).rev() {
        for x in 0..map.width() {
            out.write_f32::<LittleEndian>(*map.at(x, y) as f32)?;
        }
    }
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<Grid<f64>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);

    let magic = read_token(&mut reader)?;
    if magic != "Pf" {
        bail!("{}: not a grayscale PFM (magic {magic:?})", path.display());
    }
    let width: usize = read_token(&mut reader)?.parse().context("PFM width")?;
    let height: usize = read_token(&mut reader)?.parse().context("PFM height")?;
    let scale: f64 = read_token(&mut reader)?.parse().context("PFM scale")?;
    if width == 0 || height == 0 {
        bail!("{}: empty PFM", path.display());
    }

    let mut bytes = vec![0u8; width * height * 4];
    reader
        .read_exact(&mut bytes)
        .with_context(|| format!("{}: truncated PFM payload", path.display()))?;

    let little = scale < 0.0;
    let mut map = Grid::filled(width, height, 0.0f64);
    for row in 0..height {
        let y = height - 1 - row; // stored bottom-to-top
        for x in 0..width {
            let off = (row * width + x) * 4;
            let v = if little {
                LittleEndian::read_f32(&bytes[off..off + 4])
            } else {
                BigEndian::read_f32(&bytes[off..off + 4])
            };
            *map.at_mut(x, y) = v as f64;
        }
    }
    Ok(map)
}

/// Next whitespace-delimited token of the header.
fn read_token(reader: &mut impl BufRead) -> Result<String> {
    let mut token = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        reader.read_exact(&mut byte)?;
        if byte[0].is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(byte[0]);
    }
    Ok(String::from_utf8(token)?)
}
