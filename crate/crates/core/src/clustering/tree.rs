use rayon::prelude::*;

use super::balanced::{balanced_cluster, capacity, cluster_centroid};
use crate::dictionary::{Dictionary, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::seed::derive_seed;

/// Default shallow-tree branching: a wide first level, then two levels of ten.
pub const DEFAULT_BRANCHING: [usize; 3] = [100, 10, 10];

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal(InternalNode),
    /// A dictionary atom; its centroid is the atom itself.
    Leaf {
        atom: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InternalNode {
    /// Unit-norm mean of the member atoms.
    pub centroid: Vec<f32>,
    pub children: Vec<TreeNode>,
    /// Atom indices under this node, ascending.
    pub members: Vec<usize>,
}

impl TreeNode {
    pub fn member_count(&self) -> usize {
        match self {
            TreeNode::Internal(n) => n.members.len(),
            TreeNode::Leaf { .. } => 1,
        }
    }

    pub fn as_internal(&self) -> Option<&InternalNode> {
        match self {
            TreeNode::Internal(n) => Some(n),
            TreeNode::Leaf { .. } => None,
        }
    }

    /// Centroid used when scoring this node: the stored centroid, or the atom for leaves.
    pub fn centroid<'a>(&'a self, d: &'a Dictionary) -> &'a [f32] {
        match self {
            TreeNode::Internal(n) => &n.centroid,
            TreeNode::Leaf { atom } => d.atom(*atom),
        }
    }
}

impl InternalNode {
    /// True when the children are dictionary atoms.
    pub fn is_bottom(&self) -> bool {
        matches!(self.children.first(), Some(TreeNode::Leaf { .. }))
    }
}

/// Shallow balanced hierarchy over the atoms of one dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    root: InternalNode,
    branching: Vec<usize>,
    fingerprint: u64,
    dim: usize,
}

impl ClusterTree {
    pub(crate) fn from_parts(
        root: InternalNode,
        branching: Vec<usize>,
        fingerprint: u64,
        dim: usize,
    ) -> Self {
        Self {
            root,
            branching,
            fingerprint,
            dim,
        }
    }

    pub fn root(&self) -> &InternalNode {
        &self.root
    }

    /// Mutable access for building test fixtures; edits are not re-validated.
    pub fn root_mut(&mut self) -> &mut InternalNode {
        &mut self.root
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn levels(&self) -> usize {
        self.branching.len()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom_count(&self) -> usize {
        self.root.members.len()
    }

    /// Fails with [`Error::StaleTree`] unless the tree was built for `d`.
    pub fn ensure_matches(&self, d: &Dictionary) -> Result<()> {
        if self.fingerprint != d.fingerprint() || self.dim != d.dim() {
            return Err(Error::StaleTree {
                tree: self.fingerprint,
                dictionary: d.fingerprint(),
            });
        }
        Ok(())
    }

    /// Member counts of the internal nodes at each depth (root is depth 0).
    pub fn level_sizes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.levels() + 1];
        fn walk(n: &InternalNode, depth: usize, out: &mut Vec<Vec<usize>>) {
            out[depth].push(n.members.len());
            for c in &n.children {
                if let TreeNode::Internal(c) = c {
                    walk(c, depth + 1, out);
                }
            }
        }
        walk(&self.root, 0, &mut out);
        out
    }
}

/// Recursively splits the dictionary with balanced k-means: the root splits
/// into `branching[0]` groups, each of those into `branching[1]`, and so on;
/// below the last level every atom becomes a leaf of its group.
pub fn build_tree(d: &Dictionary, branching: &[usize], seed: u64) -> Result<ClusterTree> {
    if branching.is_empty() {
        return Err(Error::invalid("branching needs at least one level"));
    }
    if let Some(k) = branching.iter().find(|&&k| k < 2) {
        return Err(Error::invalid(format!(
            "branching factors must be at least 2, got {k}"
        )));
    }
    let atoms: Vec<&[f32]> = d.atoms().collect();
    let root = build_node(&atoms, (0..d.len()).collect(), 0, branching, seed, &[])?;
    Ok(ClusterTree {
        root,
        branching: branching.to_vec(),
        fingerprint: d.fingerprint(),
        dim: d.dim(),
    })
}

fn build_node(
    atoms: &[&[f32]],
    members: Vec<usize>,
    level: usize,
    branching: &[usize],
    seed: u64,
    path: &[u64],
) -> Result<InternalNode> {
    let centroid = cluster_centroid(atoms, &members);
    if level == branching.len() {
        return Ok(InternalNode {
            centroid,
            children: members
                .iter()
                .map(|&atom| TreeNode::Leaf { atom })
                .collect(),
            members,
        });
    }
    let local: Vec<&[f32]> = members.iter().map(|&i| atoms[i]).collect();
    let partition = balanced_cluster(&local, branching[level], derive_seed(seed, path))?;
    let children = partition
        .clusters
        .par_iter()
        .enumerate()
        .map(|(ci, cluster)| {
            let mut child_path = path.to_vec();
            child_path.push(ci as u64);
            let global: Vec<usize> = cluster.iter().map(|&l| members[l]).collect();
            build_node(atoms, global, level + 1, branching, seed, &child_path)
                .map(TreeNode::Internal)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InternalNode {
        centroid,
        children,
        members,
    })
}

/// First invariant a tree breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Coverage(String),
    Depth(String),
    Partition(String),
    Balance(String),
    LeafAtom(String),
    CentroidNorm(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks coverage, depth, partition, balance, leaf atoms and centroid norms,
/// reporting the first failure.
pub fn validate_tree(t: &ClusterTree, d: &Dictionary) -> Result<ValidationReport> {
    t.ensure_matches(d)?;
    let violation = check_coverage(t, d)
        .err()
        .or_else(|| check_node(&t.root, 0, t, d, &mut vec![]).err());
    Ok(ValidationReport { violation })
}

fn check_coverage(t: &ClusterTree, d: &Dictionary) -> std::result::Result<(), Violation> {
    let mut seen = vec![false; d.len()];
    let mut stack: Vec<&TreeNode> = t.root.children.iter().collect();
    while let Some(n) = stack.pop() {
        match n {
            TreeNode::Internal(i) => stack.extend(i.children.iter()),
            TreeNode::Leaf { atom } => {
                let slot = seen.get_mut(*atom).ok_or_else(|| {
                    Violation::LeafAtom(format!("leaf references atom {atom} of {}", d.len()))
                })?;
                if *slot {
                    return Err(Violation::Coverage(format!("atom {atom} appears twice")));
                }
                *slot = true;
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Violation::Coverage(format!("atom {missing} is not a leaf")));
    }
    Ok(())
}

fn check_node(
    n: &InternalNode,
    depth: usize,
    t: &ClusterTree,
    d: &Dictionary,
    path: &mut Vec<usize>,
) -> std::result::Result<(), Violation> {
    let levels = t.levels();
    let nrm = norm(&n.centroid);
    if n.centroid.len() != d.dim() || (nrm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Violation::CentroidNorm(format!(
            "node {path:?} centroid has norm {nrm} and length {}",
            n.centroid.len()
        )));
    }
    if n.children.is_empty() {
        return Err(Violation::Depth(format!(
            "internal node {path:?} has no children"
        )));
    }
    let want_leaves = depth == levels;
    let mut union = Vec::with_capacity(n.members.len());
    for c in &n.children {
        match (c, want_leaves) {
            (TreeNode::Leaf { atom }, true) => union.push(*atom),
            (TreeNode::Internal(i), false) => union.extend_from_slice(&i.members),
            _ => {
                return Err(Violation::Depth(format!(
                    "node {path:?} at depth {depth} has a child of the wrong kind"
                )))
            }
        }
    }
    union.sort_unstable();
    let mut members = n.members.clone();
    members.sort_unstable();
    if union != members {
        return Err(Violation::Partition(format!(
            "children of node {path:?} do not partition its {} members",
            n.members.len()
        )));
    }
    if want_leaves {
        return Ok(());
    }
    let k = t.branching[depth];
    let cap = capacity(n.members.len(), k);
    let off = n
        .children
        .iter()
        .filter(|c| c.member_count() != cap)
        .count();
    if n.children.len() > k || off > 1 || n.children.iter().any(|c| c.member_count() > cap) {
        return Err(Violation::Balance(format!(
            "node {path:?} splits {} atoms into sizes {:?} (k = {k}, capacity {cap})",
            n.members.len(),
            n.children
                .iter()
                .map(TreeNode::member_count)
                .collect::<Vec<_>>()
        )));
    }
    for (ci, c) in n.children.iter().enumerate() {
        if let TreeNode::Internal(c) = c {
            path.push(ci);
            check_node(c, depth + 1, t, d, path)?;
            path.pop();
        }
    }
    Ok(())
}
