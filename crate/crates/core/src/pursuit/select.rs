use std::cmp::Ordering;

use super::cost::retained_children;
use crate::clustering::{ClusterTree, InternalNode, TreeNode};
use crate::dictionary::{Dictionary, ScoreCounter};
use crate::error::{Error, Result};
use crate::linalg::dot;

/// Chosen atom and its signed inner product with the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub score: f32,
}

impl Selection {
    /// Larger magnitude wins; equal magnitudes go to the lower atom index.
    fn beats(&self, other: &Selection) -> bool {
        let (a, b) = (self.score.abs(), other.score.abs());
        a > b || (a == b && self.index < other.index)
    }
}

fn keep_best(best: &mut Option<Selection>, cand: Selection) {
    if best.as_ref().is_none_or(|b| cand.beats(b)) {
        *best = Some(cand);
    }
}

/// Picks the atom that best matches a residual.
pub trait AtomSelector: Sync {
    fn dictionary(&self) -> &Dictionary;
    fn select(&self, residual: &[f32], counter: &mut ScoreCounter) -> Result<Selection>;
}

fn check_dim(d: &Dictionary, r: &[f32]) -> Result<()> {
    if r.len() != d.dim() {
        return Err(Error::invalid(format!(
            "residual has length {}, dictionary dimension is {}",
            r.len(),
            d.dim()
        )));
    }
    Ok(())
}

fn usable(mask: Option<&[bool]>, i: usize) -> bool {
    mask.is_none_or(|m| m[i])
}

fn exact_masked(
    d: &Dictionary,
    r: &[f32],
    mask: Option<&[bool]>,
    counter: &mut ScoreCounter,
) -> Result<Selection> {
    check_dim(d, r)?;
    let mut best: Option<Selection> = None;
    let mut scored = 0u64;
    for (index, atom) in d.atoms().enumerate() {
        if !usable(mask, index) {
            continue;
        }
        scored += 1;
        keep_best(
            &mut best,
            Selection {
                index,
                score: dot(atom, r),
            },
        );
    }
    counter.atom += scored;
    best.ok_or_else(|| Error::Internal("no usable atom to select".into()))
}

/// Brute-force argmax of `|d_i . r|` over the whole dictionary.
pub fn exact_select(d: &Dictionary, r: &[f32], counter: &mut ScoreCounter) -> Result<Selection> {
    exact_masked(d, r, None, counter)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn descend(
    node: &InternalNode,
    d: &Dictionary,
    r: &[f32],
    alpha: f64,
    mask: Option<&[bool]>,
    counter: &mut ScoreCounter,
    best: &mut Option<Selection>,
) {
    if node.is_bottom() {
        for c in &node.children {
            if let TreeNode::Leaf { atom } = *c {
                if usable(mask, atom) {
                    counter.atom += 1;
                    keep_best(
                        best,
                        Selection {
                            index: atom,
                            score: dot(d.atom(atom), r),
                        },
                    );
                }
            }
        }
        return;
    }
    counter.centroid += node.children.len() as u64;
    let mut scored: Vec<(f32, usize)> = node
        .children
        .iter()
        .enumerate()
        .map(|(i, c)| (dot(c.centroid(d), r).abs(), i))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let keep = retained_children(alpha, node.children.len());
    for &(_, i) in &scored[..keep] {
        if let TreeNode::Internal(child) = &node.children[i] {
            descend(child, d, r, alpha, mask, counter, best);
        }
    }
}

fn stmp_masked(
    t: &ClusterTree,
    d: &Dictionary,
    r: &[f32],
    alpha: f64,
    mask: Option<&[bool]>,
    counter: &mut ScoreCounter,
) -> Result<Selection> {
    check_dim(d, r)?;
    let mut best = None;
    descend(t.root(), d, r, alpha, mask, counter, &mut best);
    best.ok_or_else(|| Error::Internal("tree descent reached no usable atom".into()))
}

/// Shallow-tree descent: at every internal level score the children's
/// centroids, keep the `ceil(alpha * k)` with the largest `|c . r|`, and
/// recurse into them; in the kept bottom-level nodes every atom is scored.
/// Returns the best atom seen across all explored branches.
pub fn stmp_select(
    t: &ClusterTree,
    d: &Dictionary,
    r: &[f32],
    alpha: f64,
    counter: &mut ScoreCounter,
) -> Result<Selection> {
    t.ensure_matches(d)?;
    check_alpha(alpha)?;
    stmp_masked(t, d, r, alpha, None, counter)
}

/// Brute-force selector, optionally restricted to usable atoms.
#[derive(Debug, Clone, Copy)]
pub struct ExactSelector<'a> {
    dict: &'a Dictionary,
    mask: Option<&'a [bool]>,
}

impl<'a> ExactSelector<'a> {
    pub fn new(dict: &'a Dictionary) -> Self {
        Self { dict, mask: None }
    }

    /// Never selects atoms whose flag is `false`.
    pub fn with_mask(mut self, mask: &'a [bool]) -> Self {
        self.mask = Some(mask);
        self
    }
}

impl AtomSelector for ExactSelector<'_> {
    fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    fn select(&self, residual: &[f32], counter: &mut ScoreCounter) -> Result<Selection> {
        exact_masked(self.dict, residual, self.mask, counter)
    }
}

/// Tree-guided selector; construction checks the tree belongs to the dictionary.
#[derive(Debug, Clone, Copy)]
pub struct StmpSelector<'a> {
    tree: &'a ClusterTree,
    dict: &'a Dictionary,
    alpha: f64,
    mask: Option<&'a [bool]>,
}

impl<'a> StmpSelector<'a> {
    pub fn new(tree: &'a ClusterTree, dict: &'a Dictionary, alpha: f64) -> Result<Self> {
        tree.ensure_matches(dict)?;
        check_alpha(alpha)?;
        Ok(Self {
            tree,
            dict,
            alpha,
            mask: None,
        })
    }

    pub fn with_mask(mut self, mask: &'a [bool]) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl AtomSelector for StmpSelector<'_> {
    fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    fn select(&self, residual: &[f32], counter: &mut ScoreCounter) -> Result<Selection> {
        stmp_masked(
            self.tree, self.dict, residual, self.alpha, self.mask, counter,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::build_tree;
    use crate::dictionary::normalize_columns;
    use crate::synthetic::{noisy_atom_queries, random_dictionary};

    #[test]
    fn identity_basis() {
        let d = normalize_columns(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let mut c = ScoreCounter::new();
        let s = exact_select(&d, &[0.0, 0.0, 5.0], &mut c).unwrap();
        assert_eq!((s.index, s.score), (2, 5.0));
        assert_eq!(c.atom, 3);
    }

    #[test]
    fn magnitude_decides() {
        let d = normalize_columns(&[vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        let s = exact_select(&d, &[1.0, 0.0], &mut ScoreCounter::new()).unwrap();
        assert_eq!((s.index, s.score), (0, 1.0));
        let s = exact_select(&d, &[0.0, -2.0], &mut ScoreCounter::new()).unwrap();
        assert_eq!(s.index, 1);
        assert!((s.score + 1.6).abs() < 1e-6);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let d = normalize_columns(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let s = exact_select(&d, &[2.0, 0.0], &mut ScoreCounter::new()).unwrap();
        assert_eq!(s.index, 0);
    }

    #[test]
    fn brute_force_oracle() {
        let d = random_dictionary(24, 500, 7);
        for (q, r) in noisy_atom_queries(&d, 100, 2.0, 8).iter().enumerate() {
            let mut want = (0usize, 0.0f64);
            for i in 0..d.len() {
                let s: f64 = d
                    .atom(i)
                    .iter()
                    .zip(r)
                    .map(|(&a, &b)| a as f64 * b as f64)
                    .sum();
                if s.abs() > want.1.abs() {
                    want = (i, s);
                }
            }
            let got = exact_select(&d, r, &mut ScoreCounter::new()).unwrap();
            assert_eq!(got.index, want.0, "query {q}");
            assert!((got.score as f64 - want.1).abs() < 1e-4);
        }
    }

    #[test]
    fn mask_excludes_atoms() {
        let d = normalize_columns(&[vec![1.0, 0.0], vec![0.8, 0.6]]).unwrap();
        let mask = [false, true];
        let mut c = ScoreCounter::new();
        let s = ExactSelector::new(&d)
            .with_mask(&mask)
            .select(&[1.0, 0.0], &mut c)
            .unwrap();
        assert_eq!(s.index, 1);
        assert_eq!(c.atom, 1);
    }

    #[test]
    fn stmp_full_retention_matches_exact() {
        let d = random_dictionary(12, 400, 3);
        let t = build_tree(&d, &[8, 5], 1).unwrap();
        for r in noisy_atom_queries(&d, 200, 1.0, 4) {
            let e = exact_select(&d, &r, &mut ScoreCounter::new()).unwrap();
            let mut c = ScoreCounter::new();
            let s = stmp_select(&t, &d, &r, 1.0, &mut c).unwrap();
            assert_eq!(s, e);
            assert_eq!(c.atom, 400);
        }
    }

    #[test]
    fn stmp_rejects_bad_inputs() {
        let d = random_dictionary(4, 40, 3);
        let other = random_dictionary(4, 40, 4);
        let t = build_tree(&d, &[4], 1).unwrap();
        let r = vec![1.0; 4];
        assert!(matches!(
            stmp_select(&t, &other, &r, 0.5, &mut ScoreCounter::new()),
            Err(Error::StaleTree { .. })
        ));
        assert!(stmp_select(&t, &d, &r, 0.0, &mut ScoreCounter::new()).is_err());
        assert!(stmp_select(&t, &d, &[1.0], 0.5, &mut ScoreCounter::new()).is_err());
        assert!(StmpSelector::new(&t, &other, 0.5).is_err());
    }
}
