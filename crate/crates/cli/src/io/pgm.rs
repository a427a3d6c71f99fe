//! Binary 8-bit PGM (P5) images.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use depthvote_core::Grid;

pub fn write_pgm(path: &Path, image: &Grid<u8>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write!(out, "P5\n{} {}\n255\n", image.width(), image.height())?;
    out.write_all(image.data())?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<Grid<u8>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let magic = read_token(&mut reader)?;
    if magic != "P5" {
        bail!("{}: not a binary PGM (magic {magic:?})", path.display());
    }
    let width: usize = read_token(&mut reader)?.parse().context("PGM width")?;
    let height: usize = read_token(&mut reader)?.parse().context("PGM height")?;
    let maxval: usize = read_token(&mut reader)?.parse().context("PGM maxval")?;
    if maxval == 0 || maxval > 255 {
        bail!("{}: unsupported maxval {maxval}", path.display());
    }
    let mut data = vec![0u8; width * height];
    reader
        .read_exact(&mut data)
        .with_context(|| format!("{}: truncated PGM payload", path.display()))?;
    Ok(Grid::from_vec(width, height, data))
}

/// Next header token, skipping whitespace and `#` comments.
fn read_token(reader: &mut impl BufRead) -> Result<String> {
    let mut token = Vec::new();
    let mut in_comment = false;
    loop {
        let mut byte = [0u8; 1];
        reader.read_exact(&mut byte)?;
        let b = byte[0];
        if in_comment {
            if b == b'\n' {
                in_comment = false;
            }
            continue;
        }
        if b == b'#' && token.is_empty() {
            in_comment = true;
            continue;
        }
        if b.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(b);
    }
    Ok(String::from_utf8(token)?)
}
