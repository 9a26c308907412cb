//! Tree file layout: `"STMPTREE"`, u32 version, u64 dictionary fingerprint,
//! u32 L, L x u32 branching, then preorder node records. A record is a u8
//! leaf flag followed by a u64 atom index (leaf) or n x `f32` centroid and a
//! u32 child count (internal). The atom dimension n is not stored; it comes
//! from the dictionary the tree belongs to.

use std::path::Path;

use super::tree::{ClusterTree, InternalNode, TreeNode};
use crate::binio::{read_file, to_usize, write_file, Reader, Writer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"STMPTREE";
const VERSION: u32 = 1;

pub(crate) fn encode(t: &ClusterTree) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u64(t.fingerprint());
    w.u32(t.levels() as u32);
    for &k in t.branching() {
        w.u32(k as u32);
    }
    fn node(n: &InternalNode, w: &mut Writer) {
        w.u8(0);
        w.f32s(&n.centroid);
        w.u32(n.children.len() as u32);
        for c in &n.children {
            match c {
                TreeNode::Internal(i) => node(i, w),
                TreeNode::Leaf { atom } => {
                    w.u8(1);
                    w.u64(*atom as u64);
                }
            }
        }
    }
    node(t.root(), &mut w);
    w.buf
}

fn decode_node(r: &mut Reader, dim: usize, depth: usize, max_depth: usize) -> Result<TreeNode> {
    let at = r.offset();
    match r.u8()? {
        1 => {
            let at = r.offset();
            let atom = to_usize(r.u64()?, at, "atom index")?;
            Ok(TreeNode::Leaf { atom })
        }
        0 => {
            if depth > max_depth {
                return Err(Error::Format {
                    offset: at,
                    message: format!("internal node deeper than the declared {max_depth} levels"),
                });
            }
            let centroid = r.f32_vec(dim)?;
            let count = r.u32()? as usize;
            let mut children = Vec::with_capacity(count.min(1 << 16));
            let mut members = Vec::new();
            for _ in 0..count {
                let c = decode_node(r, dim, depth + 1, max_depth)?;
                match &c {
                    TreeNode::Leaf { atom } => members.push(*atom),
                    TreeNode::Internal(i) => members.extend_from_slice(&i.members),
                }
                children.push(c);
            }
            members.sort_unstable();
            Ok(TreeNode::Internal(InternalNode {
                centroid,
                children,
                members,
            }))
        }
        flag => Err(Error::Format {
            offset: at,
            message: format!("bad node flag {flag}"),
        }),
    }
}

pub(crate) fn decode(bytes: &[u8], dim: usize) -> Result<ClusterTree> {
    if dim == 0 {
        return Err(Error::invalid("atom dimension must be positive"));
    }
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    r.expect_version(VERSION)?;
    let fingerprint = r.u64()?;
    let levels = r.u32()? as usize;
    let mut branching = Vec::with_capacity(levels.min(64));
    for _ in 0..levels {
        branching.push(r.u32()? as usize);
    }
    let root_at = r.offset();
    let root = match decode_node(&mut r, dim, 0, levels)? {
        TreeNode::Internal(n) => n,
        TreeNode::Leaf { .. } => {
            return Err(Error::Format {
                offset: root_at,
                message: "root must be an internal node".into(),
            })
        }
    };
    r.finish()?;
    Ok(ClusterTree::from_parts(root, branching, fingerprint, dim))
}

pub fn save_tree(t: &ClusterTree, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode(t))
}

/// Reads a tree whose centroids have `dim` entries. The fingerprint is checked
/// when the tree is first used with a dictionary.
pub fn load_tree(path: impl AsRef<Path>, dim: usize) -> Result<ClusterTree> {
    decode(&read_file(path.as_ref())?, dim)
}
