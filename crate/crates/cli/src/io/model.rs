//! Forest model serialization: magic `SCRF`, u32 format version 1, the
//! hyperparameters (five u32 fields, u64 seed, u32 feature count), then one
//! pre-order dump per tree. Every node record is
//! (u8 kind, u16 feature, f32 threshold, f32 leaf probability) with the
//! fields unused by the node kind set to zero; kind 0 is a split, kind 1 a
//! leaf. Little-endian throughout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use depthvote_core::confidence::{ForestHyper, ForestModel, Node, Tree};

const VERSION: u32 = 1;

pub fn write_model(path: &Path, model: &ForestModel) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    out.write_all(b"SCRF")?;
    out.write_u32::<LittleEndian>(VERSION)?;
    out.write_u32::<LittleEndian>(model.hyper.n_trees as u32)?;
    out.write_u32::<LittleEndian>(model.hyper.max_depth as u32)?;
    out.write_u32::<LittleEndian>(model.hyper.min_leaf as u32)?;
    out.write_u32::<LittleEndian>(model.hyper.node_samples as u32)?;
    out.write_u32::<LittleEndian>(model.hyper.thresholds_per_feature as u32)?;
    out.write_u64::<LittleEndian>(model.seed)?;
    out.write_u32::<LittleEndian>(model.n_features as u32)?;
    if model.trees.len() != model.hyper.n_trees {
        bail!("model holds {} trees, hyper says {}", model.trees.len(), model.hyper.n_trees);
    }
    for tree in &model.trees {
        write_preorder(&mut out, tree, 0)?;
    }
    Ok(())
}

fn write_preorder(out: &mut impl Write, tree: &Tree, at: usize) -> Result<()> {
    match tree.nodes[at] {
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.write_u8(0)?;
            out.write_u16::<LittleEndian>(feature)?;
            out.write_f32::<LittleEndian>(threshold)?;
            out.write_f32::<LittleEndian>(0.0)?;
            write_preorder(out, tree, left as usize)?;
            write_preorder(out, tree, right as usize)?;
        }
        Node::Leaf { prob } => {
            out.write_u8(1)?;
            out.write_u16::<LittleEndian>(0)?;
            out.write_f32::<LittleEndian>(0.0)?;
            out.write_f32::<LittleEndian>(prob)?;
        }
    }
    Ok(())
}

pub fn read_model(path: &Path) -> Result<ForestModel> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != b"SCRF" {
        bail!("{}: bad model magic", path.display());
    }
    let version = reader.read_u32::<LittleEndian>()?;
    if version != VERSION {
        bail!("{}: unsupported model version {version}", path.display());
    }
    let hyper = ForestHyper {
        n_trees: reader.read_u32::<LittleEndian>()? as usize,
        max_depth: reader.read_u32::<LittleEndian>()? as usize,
        min_leaf: reader.read_u32::<LittleEndian>()? as usize,
        node_samples: reader.read_u32::<LittleEndian>()? as usize,
        thresholds_per_feature: reader.read_u32::<LittleEndian>()? as usize,
    };
    let seed = reader.read_u64::<LittleEndian>()?;
    let n_features = reader.read_u32::<LittleEndian>()? as usize;
    let mut trees = Vec::with_capacity(hyper.n_trees);
    for _ in 0..hyper.n_trees {
        let mut tree = Tree::default();
        read_preorder(&mut reader, &mut tree)?;
        trees.push(tree);
    }
    Ok(ForestModel {
        hyper,
        seed,
        n_features,
        trees,
    })
}

fn read_preorder(reader: &mut impl Read, tree: &mut Tree) -> Result<u32> {
    let kind = reader.read_u8()?;
    let feature = reader.read_u16::<LittleEndian>()?;
    let threshold = reader.read_f32::<LittleEndian>()?;
    let prob = reader.read_f32::<LittleEndian>()?;
    let id = tree.nodes.len() as u32;
    match kind {
        1 => {
            tree.nodes.push(Node::Leaf { prob });
            Ok(id)
        }
        0 => {
            tree.nodes.push(Node::Leaf { prob: 0.0 }); // placeholder
            let left = read_preorder(reader, tree)?;
            let right = read_preorder(reader, tree)?;
            tree.nodes[id as usize] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            Ok(id)
        }
        other => bail!("invalid node kind {other}"),
    }
}
