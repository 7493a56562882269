//! Periodic orthogonal wavelet transforms on dyadic lengths.
//!
//! Every basis is a separable packet tree over a `rows x cols` array (a 1-D
//! signal is one row). Full-depth DWT, Mallat 2-D DWT, mirror bases and
//! best-basis packet trees are all instances of [`WaveletBasis`].

mod bestbasis;
mod filters;
mod tree;

pub use bestbasis::{best_basis_select, entropy_cost, packet_axes};
pub use filters::{FilterPair, FILTER_NAMES};
pub use tree::{analysis_step, path_atom, path_band, path_frequency_index, synthesis_step, Axes, Block, Node};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    DwtFullDepth,
    Dwt,
    Mirror,
    Packet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletBasis {
    pub filters: FilterPair,
    pub kind: BasisKind,
    pub rows: usize,
    pub cols: usize,
    pub tree: Node,
}

fn log2_checked(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        Err(Error::NotPowerOfTwo(n))
    } else {
        Ok(n.trailing_zeros() as usize)
    }
}

impl WaveletBasis {
    pub fn from_tree(filters: FilterPair, rows: usize, cols: usize, tree: Node, kind: BasisKind) -> Result<Self> {
        log2_checked(rows)?;
        log2_checked(cols)?;
        if !tree::tree_fits(&tree, &Block::root(rows, cols)) {
            return Err(Error::InvalidArgument(format!(
                "packet tree does not fit a {rows}x{cols} array"
            )));
        }
        Ok(Self {
            filters,
            kind,
            rows,
            cols,
            tree,
        })
    }

    /// 1-D periodic DWT; `depth = None` means full depth (log2 n levels).
    pub fn dwt(filters: FilterPair, n: usize, depth: Option<usize>) -> Result<Self> {
        let full = log2_checked(n)?;
        let depth = depth.unwrap_or(full);
        if depth > full {
            return Err(Error::InvalidArgument(format!("depth {depth} exceeds log2({n})")));
        }
        let kind = if depth == full {
            BasisKind::DwtFullDepth
        } else {
            BasisKind::Dwt
        };
        Self::from_tree(filters, 1, n, Node::dwt_chain(Axes::Horizontal, depth), kind)
    }

    /// 2-D Mallat DWT (recursive splits of the LL block).
    pub fn dwt2(filters: FilterPair, rows: usize, cols: usize, depth: Option<usize>) -> Result<Self> {
        let full = log2_checked(rows)?.min(log2_checked(cols)?);
        let depth = depth.unwrap_or(full);
        if depth > full {
            return Err(Error::InvalidArgument(format!("depth {depth} exceeds {full}")));
        }
        let kind = if depth == full {
            BasisKind::DwtFullDepth
        } else {
            BasisKind::Dwt
        };
        Self::from_tree(filters, rows, cols, Node::dwt_chain(Axes::Both, depth), kind)
    }

    /// 1-D mirror wavelet basis: after the first split, the lowpass branch
    /// carries an ordinary DWT and the highpass branch a DWT whose lowpass
    /// chain walks toward the Nyquist frequency.
    pub fn mirror(filters: FilterPair, n: usize) -> Result<Self> {
        let j = log2_checked(n)?;
        if j < 1 {
            return Err(Error::InvalidArgument("mirror basis needs n >= 2".into()));
        }
        let tree = Node::split(
            Axes::Horizontal,
            vec![
                Node::dwt_chain(Axes::Horizontal, j - 1),
                Node::dwt_chain(Axes::Horizontal, j - 1),
            ],
        );
        Self::from_tree(filters, 1, n, tree, BasisKind::Mirror)
    }

    /// Separable 2-D mirror basis: Mallat DWT on the low square, a 1-D
    /// mirror refinement along the highpass axis of the two mixed blocks and
    /// the tensor product of mirror refinements on the diagonal block.
    pub fn mirror2(filters: FilterPair, rows: usize, cols: usize) -> Result<Self> {
        let jr = log2_checked(rows)?;
        let jc = log2_checked(cols)?;
        if jr < 1 || jc < 1 {
            return Err(Error::InvalidArgument("mirror basis needs both sides >= 2".into()));
        }
        let tree = Node::split(
            Axes::Both,
            vec![
                Node::dwt_chain(Axes::Both, jr.min(jc) - 1),
                Node::dwt_chain(Axes::Horizontal, jc - 1),
                Node::dwt_chain(Axes::Vertical, jr - 1),
                Node::rect_dwt(jc - 1, jr - 1),
            ],
        );
        Self::from_tree(filters, rows, cols, tree, BasisKind::Mirror)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_2d(&self) -> bool {
        self.rows > 1
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Analysis: coefficients Wᵀx laid out in place.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut data = x.to_vec();
        tree::forward_tree(
            &self.filters,
            &self.tree,
            &mut data,
            self.cols,
            &Block::root(self.rows, self.cols),
        );
        Ok(data)
    }

    /// Synthesis: Wc.
    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs)?;
        let mut data = coeffs.to_vec();
        tree::inverse_tree(
            &self.filters,
            &self.tree,
            &mut data,
            self.cols,
            &Block::root(self.rows, self.cols),
        );
        Ok(data)
    }

    /// Subbands (tree leaves) in depth-first order.
    pub fn leaves(&self) -> Vec<Block> {
        let mut out = Vec::new();
        tree::leaves(&self.tree, &Block::root(self.rows, self.cols), &mut out);
        out
    }

    /// Leaf id of every coefficient position.
    pub fn subband_map(&self) -> Vec<usize> {
        let mut map = vec![0usize; self.len()];
        for (id, leaf) in self.leaves().iter().enumerate() {
            for i in leaf.indices(self.cols) {
                map[i] = id;
            }
        }
        map
    }

    /// Synthesizes the atom with a unit coefficient at flat index `i`.
    pub fn atom(&self, i: usize) -> Result<Vec<f64>> {
        let mut c = vec![0.0; self.len()];
        if i >= c.len() {
            return Err(Error::InvalidArgument(format!("atom index {i} out of range")));
        }
        c[i] = 1.0;
        self.inverse(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 7919 % 113) as f64 - 56.0) / 17.0).collect()
    }

    #[test]
    fn haar_constant_has_no_detail() {
        let b = WaveletBasis::dwt(FilterPair::haar(), 64, None).unwrap();
        let c = b.forward(&[3.0; 64]).unwrap();
        assert!((c[0] - 3.0 * 8.0).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn impulse_is_isometric() {
        let b = WaveletBasis::dwt(FilterPair::named("symmlet20").unwrap(), 128, None).unwrap();
        let mut x = vec![0.0; 128];
        x[0] = 1.0;
        let c = b.forward(&x).unwrap();
        let e: f64 = c.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_all_kinds() {
        let f = FilterPair::named("symmlet16").unwrap();
        let x = signal(64);
        for b in [
            WaveletBasis::dwt(f.clone(), 64, None).unwrap(),
            WaveletBasis::dwt(f.clone(), 64, Some(3)).unwrap(),
            WaveletBasis::mirror(f.clone(), 64).unwrap(),
        ] {
            let y = b.inverse(&b.forward(&x).unwrap()).unwrap();
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{:?}", b.kind);
        }
        let img = signal(16 * 32);
        for b in [
            WaveletBasis::dwt2(f.clone(), 16, 32, None).unwrap(),
            WaveletBasis::mirror2(f.clone(), 16, 32).unwrap(),
        ] {
            let y = b.inverse(&b.forward(&img).unwrap()).unwrap();
            let err = img.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{:?}", b.kind);
        }
    }

    #[test]
    fn leaf_counts() {
        let f = FilterPair::haar();
        assert_eq!(WaveletBasis::dwt(f.clone(), 64, None).unwrap().leaves().len(), 7);
        assert_eq!(WaveletBasis::mirror(f.clone(), 64).unwrap().leaves().len(), 12);
        let m2 = WaveletBasis::mirror2(f, 16, 16).unwrap();
        let total: usize = m2.leaves().iter().map(|l| l.len()).sum();
        assert_eq!(total, 256);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(
            WaveletBasis::dwt(FilterPair::haar(), 48, None),
            Err(Error::NotPowerOfTwo(48))
        ));
        assert!(WaveletBasis::dwt(FilterPair::haar(), 16, Some(5)).is_err());
        let b = WaveletBasis::dwt(FilterPair::haar(), 16, None).unwrap();
        assert!(b.forward(&[0.0; 8]).is_err());
    }
}
