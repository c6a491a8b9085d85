//! Max-tree (component tree) of the upper level sets and the interactive
//! segmentation that picks the set of nodes closest to a user region.
//!
//! A node is a connected component of some level set `X_v = {x | f(x) >= v}`;
//! its proper pixels are those at exactly its level. Nodes are only created
//! for levels actually present in the image.
//!
//! Construction follows the union-find immersion scheme: pixels are visited by
//! decreasing level, each one becomes the parent of the roots of its already
//! visited neighbours, and a final pass collapses equal-level chains onto one
//! canonical pixel per node.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lip::GreyScale;
use crate::raster::{Connectivity, GreyImage, RegionMask};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxTreeNode {
    pub level: u32,
    /// `None` for the root.
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Pixels at exactly `level`, in increasing linear index.
    pub proper_pixels: Vec<usize>,
    /// Number of pixels in the node including all descendants.
    pub area: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxTree {
    width: usize,
    height: usize,
    scale: GreyScale,
    connectivity: Connectivity,
    /// Sorted by level, then by first proper pixel; parents precede children.
    nodes: Vec<MaxTreeNode>,
    node_of_pixel: Vec<usize>,
}

impl MaxTree {
    pub fn nodes(&self) -> &[MaxTreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    /// The node owning `pixel` as a proper pixel.
    pub fn node_of(&self, pixel: usize) -> usize {
        self.node_of_pixel[pixel]
    }

    /// All pixels of the node: its proper pixels and those of its descendants.
    pub fn pixel_set(&self, node: usize) -> RegionMask {
        let mut mask = RegionMask::empty(self.width, self.height);
        self.paint_subtree(node, &mut mask);
        mask
    }

    fn paint_subtree(&self, node: usize, mask: &mut RegionMask) {
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            for &p in &self.nodes[n].proper_pixels {
                mask.set_index(p, true);
            }
            stack.extend_from_slice(&self.nodes[n].children);
        }
    }

    /// One line per node: `id parent level area proper_count`, parent `-` for the root.
    pub fn dump(&self) -> String {
        let mut out = String::from("# id parent level area proper\n");
        for (id, n) in self.nodes.iter().enumerate() {
            let parent = n.parent.map_or_else(|| "-".to_string(), |p| p.to_string());
            let _ = writeln!(
                out,
                "{id} {parent} {} {} {}",
                n.level,
                n.area,
                n.proper_pixels.len()
            );
        }
        out
    }
}

fn find(zpar: &mut [usize], mut p: usize) -> usize {
    let mut root = p;
    while zpar[root] != root {
        root = zpar[root];
    }
    while zpar[p] != root {
        let next = zpar[p];
        zpar[p] = root;
        p = next;
    }
    root
}

/// Builds the max-tree of an integer-valued image.
pub fn build_max_tree(img: &GreyImage, connectivity: Connectivity) -> Result<MaxTree> {
    if let Some(i) = img.first_non_integer() {
        return Err(Error::NotQuantized {
            x: i % img.width(),
            y: i / img.width(),
            value: img.pixels()[i],
        });
    }
    let (w, h) = img.dims();
    let n = w * h;
    let level: Vec<u32> = img.pixels().iter().map(|&v| v as u32).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| level[b].cmp(&level[a]).then(a.cmp(&b)));

    const UNSEEN: usize = usize::MAX;
    let mut parent = vec![UNSEEN; n];
    let mut zpar = vec![UNSEEN; n];
    for &p in &order {
        parent[p] = p;
        zpar[p] = p;
        connectivity.for_each_neighbour(p, w, h, |q| {
            if zpar[q] != UNSEEN {
                let r = find(&mut zpar, q);
                if r != p {
                    parent[r] = p;
                    zpar[r] = p;
                }
            }
        });
    }
    // collapse so every pixel points at the canonical pixel of its node or,
    // for canonical pixels, of the parent node
    for &p in order.iter().rev() {
        let q = parent[p];
        if level[parent[q]] == level[q] {
            parent[p] = parent[q];
        }
    }
    let is_canonical = |p: usize| parent[p] == p || level[parent[p]] != level[p];
    let canonical_of = |p: usize| if is_canonical(p) { p } else { parent[p] };

    // proper pixels per canonical pixel, in index order
    let mut proper: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        proper[canonical_of(p)].push(p);
    }
    let mut canon: Vec<usize> = (0..n).filter(|&p| is_canonical(p)).collect();
    canon.sort_by_key(|&c| (level[c], proper[c][0]));
    let mut index_of = vec![UNSEEN; n];
    for (i, &c) in canon.iter().enumerate() {
        index_of[c] = i;
    }

    let mut nodes: Vec<MaxTreeNode> = canon
        .iter()
        .map(|&c| MaxTreeNode {
            level: level[c],
            parent: (parent[c] != c).then(|| index_of[parent[c]]),
            children: Vec::new(),
            proper_pixels: std::mem::take(&mut proper[c]),
            area: 0,
        })
        .collect();
    let mut node_of_pixel = vec![0; n];
    for (i, node) in nodes.iter().enumerate() {
        for &p in &node.proper_pixels {
            node_of_pixel[p] = i;
        }
    }
    for i in (0..nodes.len()).rev() {
        nodes[i].area += nodes[i].proper_pixels.len();
        if let Some(p) = nodes[i].parent {
            nodes[p].area += nodes[i].area;
            nodes[p].children.push(i);
        }
    }
    for node in &mut nodes {
        node.children.reverse();
    }
    debug_assert!(nodes[0].parent.is_none());

    Ok(MaxTree {
        width: w,
        height: h,
        scale: img.scale(),
        connectivity,
        nodes,
        node_of_pixel,
    })
}

/// The image a tree was built from: each pixel takes its node's level.
pub fn reconstruct(tree: &MaxTree) -> GreyImage {
    let pixels = tree
        .node_of_pixel
        .iter()
        .map(|&n| tree.nodes[n].level as f64)
        .collect();
    GreyImage::from_parts(tree.width, tree.height, tree.scale, pixels)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    alpha: f64,
}

impl CostParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(CostParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// `α |X \ G| + (1 - α) |G \ X|`: false positives weighted by `α`, false
/// negatives by `1 - α`.
pub fn d_alpha(x: &RegionMask, g: &RegionMask, p: CostParams) -> Result<f64> {
    let fp = x.difference_count(g)?;
    let fn_ = g.difference_count(x)?;
    Ok(weighted(p.alpha, fp, fn_))
}

#[inline]
fn weighted(alpha: f64, fp: usize, fn_: usize) -> f64 {
    alpha * fp as f64 + (1.0 - alpha) * fn_ as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtSegmentation {
    pub mask: RegionMask,
    /// Maximal selected nodes (none is an ancestor of another).
    pub selected: Vec<usize>,
    pub cost: f64,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Finds a union of tree nodes minimising `d_alpha(union, g)` exactly.
///
/// Taking a node covers its whole subtree, so for each node the choice is
/// between taking it, at `α |pixels(n) \ G|`, and leaving its proper pixels
/// out, at `(1 - α) |G ∩ proper(n)|` plus the best cost of each child. On ties
/// the node is left out, which yields the smaller region.
pub fn segment_ct(tree: &MaxTree, g: &RegionMask, p: CostParams) -> Result<CtSegmentation> {
    if g.dims() != tree.dims() {
        return Err(Error::DimensionMismatch {
            expected: tree.dims(),
            actual: g.dims(),
        });
    }
    let alpha = p.alpha;
    let count = tree.nodes.len();
    let mut g_sub = vec![0usize; count];
    let mut best = vec![0.0f64; count];
    let mut take = vec![false; count];
    for n in (0..count).rev() {
        let node = &tree.nodes[n];
        let g_proper = node
            .proper_pixels
            .iter()
            .filter(|&&px| g.contains_index(px))
            .count();
        g_sub[n] += g_proper;
        let take_cost = alpha * (node.area - g_sub[n]) as f64;
        let skip_cost =
            node.children.iter().map(|&c| best[c]).sum::<f64>() + (1.0 - alpha) * g_proper as f64;
        if take_cost < skip_cost {
            best[n] = take_cost;
            take[n] = true;
        } else {
            best[n] = skip_cost;
        }
        if let Some(parent) = node.parent {
            g_sub[parent] += g_sub[n];
        }
    }

    let mut selected = Vec::new();
    let mut mask = RegionMask::empty(tree.width, tree.height);
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        if take[n] {
            selected.push(n);
            tree.paint_subtree(n, &mut mask);
        } else {
            stack.extend(tree.nodes[n].children.iter().rev());
        }
    }
    selected.sort_unstable();
    let false_positives = mask.difference_count(g)?;
    let false_negatives = g.difference_count(&mask)?;
    let cost = weighted(alpha, false_positives, false_negatives);
    debug_assert!((cost - best[tree.root()]).abs() <= 1e-9 * (1.0 + cost));
    Ok(CtSegmentation {
        mask,
        selected,
        cost,
        false_positives,
        false_negatives,
    })
}
