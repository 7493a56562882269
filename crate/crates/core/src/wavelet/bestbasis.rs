//! Best-basis search over the full packet tree (binary in 1-D, quadtree in
//! 2-D) with an admissibility predicate on packet nodes.

use super::tree::{split_block, Axes, Block, Node};
use super::{BasisKind, FilterPair, WaveletBasis};
use crate::error::{Error, Result};

/// Additive entropy cost −Σ y² ln y², with 0·ln 0 = 0.
pub fn entropy_cost(y: &[f64]) -> f64 {
    y.iter()
        .map(|&v| {
            let s = v * v;
            if s > 0.0 {
                -s * s.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Split direction of the packet tree for an array shape.
pub fn packet_axes(rows: usize) -> Axes {
    if rows == 1 {
        Axes::Horizontal
    } else {
        Axes::Both
    }
}

struct Search<'a, P> {
    filters: &'a FilterPair,
    axes: Axes,
    max_depth: usize,
    admissible: &'a P,
}

impl<P: Fn(&Block) -> bool> Search<'_, P> {
    /// `local` holds this node's coefficients as an `h x w` array.
    fn run(&self, block: &Block, local: Vec<f64>, depth: usize) -> (f64, Node) {
        let leaf_cost = if (self.admissible)(block) {
            entropy_cost(&local)
        } else {
            f64::INFINITY
        };
        if depth >= self.max_depth || !block.can_split(self.axes) {
            return (leaf_cost, Node::Leaf);
        }
        let mut data = local;
        let root = Block::root(block.h, block.w);
        split_block(self.filters, &mut data, block.w, &root, self.axes);
        let mut split_cost = 0.0;
        let mut children = Vec::new();
        for (lc, gc) in root.children(self.axes).iter().zip(block.children(self.axes)) {
            let sub = lc.gather(&data, block.w);
            let (c, node) = self.run(&gc, sub, depth + 1);
            split_cost += c;
            children.push(node);
        }
        // Ties keep the coarser node.
        if split_cost < leaf_cost {
            (
                split_cost,
                Node::Split {
                    axes: self.axes,
                    children,
                },
            )
        } else {
            (leaf_cost, Node::Leaf)
        }
    }
}

/// Returns the admissible packet basis minimizing [`entropy_cost`] of the
/// coefficients of `x` (a `rows x cols` array), together with that cost.
pub fn best_basis_select<P: Fn(&Block) -> bool>(
    filters: &FilterPair,
    x: &[f64],
    rows: usize,
    cols: usize,
    max_depth: Option<usize>,
    admissible: P,
) -> Result<(WaveletBasis, f64)> {
    if x.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            expected: rows * cols,
            found: x.len(),
        });
    }
    for v in [rows, cols] {
        if !v.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(v));
        }
    }
    let axes = packet_axes(rows);
    let search = Search {
        filters,
        axes,
        max_depth: max_depth.unwrap_or(usize::MAX),
        admissible: &admissible,
    };
    let (cost, tree) = search.run(&Block::root(rows, cols), x.to_vec(), 0);
    if !cost.is_finite() {
        return Err(Error::NoAdmissibleCover);
    }
    let basis = WaveletBasis::from_tree(filters.clone(), rows, cols, tree, BasisKind::Packet)?;
    Ok((basis, cost))
}
