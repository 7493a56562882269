//! Separable periodic packet trees.
//!
//! Coefficients live in place in a row-major `rows x cols` array. Splitting a
//! block along an axis writes the lowpass half first (left or top). A split
//! along both axes yields children ordered `[LL, LH, HL, HH]`, where the
//! first letter is the vertical filter and the second the horizontal one.

use serde::{Deserialize, Serialize};

use super::filters::FilterPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axes {
    /// Filter along each row (splits the width).
    Horizontal,
    /// Filter along each column (splits the height).
    Vertical,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Leaf,
    Split { axes: Axes, children: Vec<Node> },
}

impl Node {
    pub fn split(axes: Axes, children: Vec<Node>) -> Self {
        debug_assert_eq!(children.len(), if axes == Axes::Both { 4 } else { 2 });
        Node::Split { axes, children }
    }

    /// Full-depth 1-D DWT chain along one axis.
    pub fn dwt_chain(axes: Axes, depth: usize) -> Self {
        if depth == 0 {
            Node::Leaf
        } else {
            let high = Node::Leaf;
            let children = if axes == Axes::Both {
                vec![Node::dwt_chain(axes, depth - 1), Node::Leaf, Node::Leaf, high]
            } else {
                vec![Node::dwt_chain(axes, depth - 1), high]
            };
            Node::split(axes, children)
        }
    }

    /// Tensor product of a horizontal DWT of depth `hd` and a vertical DWT
    /// of depth `vd`.
    pub fn rect_dwt(hd: usize, vd: usize) -> Self {
        if hd == 0 {
            Node::dwt_chain(Axes::Vertical, vd)
        } else {
            Node::split(
                Axes::Horizontal,
                vec![Node::rect_dwt(hd - 1, vd), Node::dwt_chain(Axes::Vertical, vd)],
            )
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf => 1,
            Node::Split { children, .. } => children.iter().map(Node::leaf_count).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf => 0,
            Node::Split { children, .. } => 1 + children.iter().map(Node::depth).max().unwrap_or(0),
        }
    }
}

/// A rectangular coefficient block with the filter paths that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub r0: usize,
    pub c0: usize,
    pub h: usize,
    pub w: usize,
    /// Horizontal filter choices from the root (0 = low, 1 = high).
    pub xpath: Vec<u8>,
    /// Vertical filter choices from the root.
    pub ypath: Vec<u8>,
}

impl Block {
    pub fn root(rows: usize, cols: usize) -> Self {
        Self {
            r0: 0,
            c0: 0,
            h: rows,
            w: cols,
            xpath: Vec::new(),
            ypath: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn can_split(&self, axes: Axes) -> bool {
        match axes {
            Axes::Horizontal => self.w >= 2,
            Axes::Vertical => self.h >= 2,
            Axes::Both => self.w >= 2 && self.h >= 2,
        }
    }

    pub fn children(&self, axes: Axes) -> Vec<Block> {
        let hx = |b: &Block, bit: u8| {
            let mut c = b.clone();
            c.w /= 2;
            c.c0 += bit as usize * c.w;
            c.xpath.push(bit);
            c
        };
        let vy = |b: &Block, bit: u8| {
            let mut c = b.clone();
            c.h /= 2;
            c.r0 += bit as usize * c.h;
            c.ypath.push(bit);
            c
        };
        match axes {
            Axes::Horizontal => vec![hx(self, 0), hx(self, 1)],
            Axes::Vertical => vec![vy(self, 0), vy(self, 1)],
            Axes::Both => {
                let mut out = Vec::with_capacity(4);
                for v in 0..2u8 {
                    for h in 0..2u8 {
                        out.push(hx(&vy(self, v), h));
                    }
                }
                out
            }
        }
    }

    /// Row-major copy of the block's coefficients.
    pub fn gather(&self, data: &[f64], cols: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for r in self.r0..self.r0 + self.h {
            out.extend_from_slice(&data[r * cols + self.c0..r * cols + self.c0 + self.w]);
        }
        out
    }

    /// Flat indices of the block in the full array, row-major.
    pub fn indices(&self, cols: usize) -> impl Iterator<Item = usize> + '_ {
        (self.r0..self.r0 + self.h).flat_map(move |r| (self.c0..self.c0 + self.w).map(move |c| r * cols + c))
    }
}

/// Natural frequency index of a packet path (Gray-code reordering caused
/// by decimating highpass outputs).
pub fn path_frequency_index(path: &[u8]) -> usize {
    path.iter().fold(0usize, |f, &b| 2 * f + ((b as usize) ^ (f & 1)))
}

/// Nominal frequency band [lo, hi] in DFT-index units of a path on an axis
/// of length `n`; the full axis covers [0, n/2].
pub fn path_band(path: &[u8], n: usize) -> (f64, f64) {
    let width = (n as f64 / 2.0) / (1u64 << path.len()) as f64;
    let f = path_frequency_index(path) as f64;
    (f * width, (f + 1.0) * width)
}

/// One analysis step: `x` (length m) becomes `[a | d]`.
pub fn analysis_step(filters: &FilterPair, x: &[f64], out: &mut [f64]) {
    let m = x.len();
    let half = m / 2;
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (i, (&h, &g)) in filters.h.iter().zip(&filters.g).enumerate() {
            let v = x[(2 * k + i) % m];
            a += h * v;
            d += g * v;
        }
        out[k] = a;
        out[half + k] = d;
    }
}

/// Adjoint of [`analysis_step`].
pub fn synthesis_step(filters: &FilterPair, coeffs: &[f64], out: &mut [f64]) {
    let m = coeffs.len();
    let half = m / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let a = coeffs[k];
        let d = coeffs[half + k];
        for (i, (&h, &g)) in filters.h.iter().zip(&filters.g).enumerate() {
            out[(2 * k + i) % m] += h * a + g * d;
        }
    }
}

fn apply_axis(filters: &FilterPair, data: &mut [f64], cols: usize, b: &Block, axis: Axes, forward: bool) {
    let step = if forward { analysis_step } else { synthesis_step };
    match axis {
        Axes::Horizontal => {
            let mut out = vec![0.0; b.w];
            for r in b.r0..b.r0 + b.h {
                let row = &mut data[r * cols + b.c0..r * cols + b.c0 + b.w];
                step(filters, row, &mut out);
                row.copy_from_slice(&out);
            }
        }
        Axes::Vertical => {
            let mut col = vec![0.0; b.h];
            let mut out = vec![0.0; b.h];
            for c in b.c0..b.c0 + b.w {
                for (i, r) in (b.r0..b.r0 + b.h).enumerate() {
                    col[i] = data[r * cols + c];
                }
                step(filters, &col, &mut out);
                for (i, r) in (b.r0..b.r0 + b.h).enumerate() {
                    data[r * cols + c] = out[i];
                }
            }
        }
        Axes::Both => unreachable!("split into single-axis passes"),
    }
}

/// Transforms the block one level in place.
pub fn split_block(filters: &FilterPair, data: &mut [f64], cols: usize, b: &Block, axes: Axes) {
    match axes {
        Axes::Both => {
            apply_axis(filters, data, cols, b, Axes::Horizontal, true);
            apply_axis(filters, data, cols, b, Axes::Vertical, true);
        }
        a => apply_axis(filters, data, cols, b, a, true),
    }
}

/// Inverse of [`split_block`].
pub fn merge_block(filters: &FilterPair, data: &mut [f64], cols: usize, b: &Block, axes: Axes) {
    match axes {
        Axes::Both => {
            apply_axis(filters, data, cols, b, Axes::Vertical, false);
            apply_axis(filters, data, cols, b, Axes::Horizontal, false);
        }
        a => apply_axis(filters, data, cols, b, a, false),
    }
}

pub fn forward_tree(filters: &FilterPair, node: &Node, data: &mut [f64], cols: usize, b: &Block) {
    if let Node::Split { axes, children } = node {
        split_block(filters, data, cols, b, *axes);
        for (child, cb) in children.iter().zip(b.children(*axes)) {
            forward_tree(filters, child, data, cols, &cb);
        }
    }
}

pub fn inverse_tree(filters: &FilterPair, node: &Node, data: &mut [f64], cols: usize, b: &Block) {
    if let Node::Split { axes, children } = node {
        for (child, cb) in children.iter().zip(b.children(*axes)) {
            inverse_tree(filters, child, data, cols, &cb);
        }
        merge_block(filters, data, cols, b, *axes);
    }
}

/// Leaves in depth-first order.
pub fn leaves(node: &Node, b: &Block, out: &mut Vec<Block>) {
    match node {
        Node::Leaf => out.push(b.clone()),
        Node::Split { axes, children } => {
            for (child, cb) in children.iter().zip(b.children(*axes)) {
                leaves(child, &cb, out);
            }
        }
    }
}

/// Checks that a tree can be laid over a block of the given size.
pub fn tree_fits(node: &Node, b: &Block) -> bool {
    match node {
        Node::Leaf => true,
        Node::Split { axes, children } => {
            let want = if *axes == Axes::Both { 4 } else { 2 };
            b.can_split(*axes)
                && children.len() == want
                && children.iter().zip(b.children(*axes)).all(|(c, cb)| tree_fits(c, &cb))
        }
    }
}

/// Synthesizes the 1-D atom at position 0 of the packet reached by `path`
/// on an axis of length `n`.
pub fn path_atom(filters: &FilterPair, n: usize, path: &[u8]) -> Vec<f64> {
    let mut m = n >> path.len();
    let mut coeffs = vec![0.0; m.max(1)];
    coeffs[0] = 1.0;
    for &bit in path.iter().rev() {
        let mut full = vec![0.0; 2 * m];
        if bit == 0 {
            full[..m].copy_from_slice(&coeffs);
        } else {
            full[m..].copy_from_slice(&coeffs);
        }
        let mut out = vec![0.0; 2 * m];
        synthesis_step(filters, &full, &mut out);
        coeffs = out;
        m *= 2;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_ordering() {
        assert_eq!(path_frequency_index(&[0]), 0);
        assert_eq!(path_frequency_index(&[1]), 1);
        assert_eq!(path_frequency_index(&[1, 0]), 3);
        assert_eq!(path_frequency_index(&[1, 1]), 2);
        assert_eq!(path_frequency_index(&[1, 1, 0]), 4);
        assert_eq!(path_band(&[1, 0], 64), (24.0, 32.0));
    }

    #[test]
    fn step_round_trip() {
        let f = FilterPair::named("symmlet16").unwrap();
        // Filter longer than the signal still wraps correctly.
        for m in [2usize, 4, 8, 32] {
            let x: Vec<f64> = (0..m).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
            let mut c = vec![0.0; m];
            analysis_step(&f, &x, &mut c);
            let mut y = vec![0.0; m];
            synthesis_step(&f, &c, &mut y);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12, "m={m}");
            }
        }
    }

    #[test]
    fn path_atom_unit_norm() {
        let f = FilterPair::named("symmlet20").unwrap();
        for path in [vec![], vec![0], vec![1, 0, 1], vec![1, 1, 1, 1]] {
            let a = path_atom(&f, 64, &path);
            let e: f64 = a.iter().map(|v| v * v).sum();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }
}
