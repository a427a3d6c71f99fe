//! Binary cost-volume dumps: magic `CVOL`, u32 width/height/d_max, then
//! f32 costs in (y, x, d) order, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use depthvote_core::stereo::CostVolume;

pub fn write_cvol(path: &Path, volume: &CostVolume) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    out.write_all(b"CVOL")?;
    out.write_u32::<LittleEndian>(volume.width as u32)?;
    out.write_u32::<LittleEndian>(volume.height as u32)?;
    out.write_u32::<LittleEndian>(volume.d_max as u32)?;
    let mut bytes = Vec::with_capacity(volume.costs.len() * 4);
    for &c in &volume.costs {
        bytes.extend_from_slice(&c.to_le_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn read_cvol(path: &Path) -> Result<CostVolume> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != b"CVOL" {
        bail!("{}: bad cost volume magic", path.display());
    }
    let width = reader.read_u32::<LittleEndian>()? as usize;
    let height = reader.read_u32::<LittleEndian>()? as usize;
    let d_max = reader.read_u32::<LittleEndian>()? as usize;
    let mut volume = CostVolume::new(width, height, d_max);
    let mut bytes = vec![0u8; volume.costs.len() * 4];
    reader
        .read_exact(&mut bytes)
        .with_context(|| format!("{}: truncated cost volume", path.display()))?;
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        volume.costs[i] = f32::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok(volume)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.cvol");
        let mut vol = CostVolume::new(3, 2, 4);
        for (i, c) in vol.costs.iter_mut().enumerate() {
            *c = i as f32 * 0.5;
        }
        write_cvol(&path, &vol).unwrap();
        assert_eq!(read_cvol(&path).unwrap(), vol);
    }
}
