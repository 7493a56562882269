//! Transform suite: perfect reconstruction, Parseval, exhaustive best basis.

use mdlshrink::wavelet::{best_basis_select, entropy_cost, Axes, BasisKind, Node, FILTER_NAMES};
use mdlshrink::{FilterPair, NoiseRng, WaveletBasis};

use super::Check;

/// Random packet tree with split probability `p` at each splittable node.
pub fn random_tree(rng: &mut NoiseRng, axes: Axes, rows: usize, cols: usize, p: f64) -> Node {
    let can = match axes {
        Axes::Horizontal => cols >= 2,
        Axes::Vertical => rows >= 2,
        Axes::Both => rows >= 2 && cols >= 2,
    };
    if !can || rng.uniform() >= p {
        return Node::Leaf;
    }
    let (r, c) = match axes {
        Axes::Horizontal => (rows, cols / 2),
        Axes::Vertical => (rows / 2, cols),
        Axes::Both => (rows / 2, cols / 2),
    };
    let k = if axes == Axes::Both { 4 } else { 2 };
    Node::split(axes, (0..k).map(|_| random_tree(rng, axes, r, c, p)).collect())
}

/// (reconstruction error, relative energy error) for one basis and input.
pub fn round_trip(basis: &WaveletBasis, x: &[f64]) -> (f64, f64) {
    let c = basis.forward(x).unwrap();
    let back = basis.inverse(&c).unwrap();
    let pr = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ex: f64 = x.iter().map(|v| v * v).sum();
    let ec: f64 = c.iter().map(|v| v * v).sum();
    (pr, (ex - ec).abs() / ex)
}

/// Every filter with DWT, mirror and random packet bases, 1-D up to 512
/// samples and 2-D up to 512 x 512.
pub fn perfect_reconstruction() -> Check {
    let mut rng = NoiseRng::new(41);
    let mut worst = (0.0f64, 0.0f64, String::new());
    let mut count = 0;
    for name in FILTER_NAMES {
        let f = FilterPair::named(name).unwrap();
        let mut bases: Vec<(String, WaveletBasis, usize)> = Vec::new();
        for n in [2usize, 8, 32, 128, 512] {
            bases.push((format!("dwt {n}"), WaveletBasis::dwt(f.clone(), n, None).unwrap(), n));
            bases.push((format!("mirror {n}"), WaveletBasis::mirror(f.clone(), n).unwrap(), n));
            let t = random_tree(&mut rng, Axes::Horizontal, 1, n, 0.7);
            bases.push((
                format!("packet {n}"),
                WaveletBasis::from_tree(f.clone(), 1, n, t, BasisKind::Packet).unwrap(),
                n,
            ));
        }
        for (r, c) in [(8usize, 8usize), (32, 64), (128, 128), (512, 512)] {
            bases.push((
                format!("dwt2 {r}x{c}"),
                WaveletBasis::dwt2(f.clone(), r, c, None).unwrap(),
                r * c,
            ));
            bases.push((
                format!("mirror2 {r}x{c}"),
                WaveletBasis::mirror2(f.clone(), r, c).unwrap(),
                r * c,
            ));
            let t = random_tree(&mut rng, Axes::Both, r, c, 0.6);
            bases.push((
                format!("packet2 {r}x{c}"),
                WaveletBasis::from_tree(f.clone(), r, c, t, BasisKind::Packet).unwrap(),
                r * c,
            ));
        }
        for (label, basis, len) in bases {
            let x = rng.normal_vec(len, 1.0);
            let (pr, pa) = round_trip(&basis, &x);
            count += 1;
            if pr.max(pa) > worst.0.max(worst.1) {
                worst = (pr, pa, format!("{name} {label}"));
            }
        }
    }
    Check {
        name: "perfect reconstruction and Parseval",
        pass: worst.0 <= 1e-10 && worst.1 <= 1e-10,
        detail: format!(
            "{count} bases, worst reconstruction {:.1e}, energy {:.1e} ({})",
            worst.0, worst.1, worst.2
        ),
    }
}

/// Every packet tree of a `rows x cols` array.
pub fn all_trees(axes: Axes, rows: usize, cols: usize) -> Vec<Node> {
    let can = match axes {
        Axes::Horizontal => cols >= 2,
        _ => rows >= 2 && cols >= 2,
    };
    let mut out = vec![Node::Leaf];
    if !can {
        return out;
    }
    let (r, c, k) = match axes {
        Axes::Horizontal => (rows, cols / 2, 2),
        _ => (rows / 2, cols / 2, 4),
    };
    let sub = all_trees(axes, r, c);
    let mut combos: Vec<Vec<Node>> = vec![vec![]];
    for _ in 0..k {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                sub.iter().map(move |t| {
                    let mut p = prefix.clone();
                    p.push(t.clone());
                    p
                })
            })
            .collect();
    }
    out.extend(combos.into_iter().map(|ch| Node::split(axes, ch)));
    out
}

/// Minimum entropy cost over every packet basis, by enumeration.
pub fn exhaustive_best(f: &FilterPair, x: &[f64], rows: usize, cols: usize) -> f64 {
    let axes = if rows == 1 { Axes::Horizontal } else { Axes::Both };
    all_trees(axes, rows, cols)
        .into_iter()
        .map(|t| {
            let b = WaveletBasis::from_tree(f.clone(), rows, cols, t, BasisKind::Packet).unwrap();
            entropy_cost(&b.forward(x).unwrap())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Best-basis search against enumeration: 1-D up to 32 samples, 2-D 8 x 8.
pub fn best_basis_exhaustive() -> Check {
    let mut rng = NoiseRng::new(42);
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    let shapes: [(usize, usize); 5] = [(1, 4), (1, 8), (1, 16), (1, 32), (8, 8)];
    for name in FILTER_NAMES {
        let f = FilterPair::named(name).unwrap();
        for (rows, cols) in shapes {
            // n = 32 enumerates about 4.6e5 trees; one draw per filter.
            let draws = if cols * rows >= 32 { 1 } else { 3 };
            for _ in 0..draws {
                let x: Vec<f64> = (0..rows * cols)
                    .map(|i| (i as f64 * 0.9).sin() * 2.0 + rng.normal())
                    .collect();
                let (_, got) = best_basis_select(&f, &x, rows, cols, None, |_| true).unwrap();
                let want = exhaustive_best(&f, &x, rows, cols);
                let err = (got - want).abs() / want.abs().max(1.0);
                count += 1;
                if err >= worst.0 {
                    worst = (err, format!("{name} {rows}x{cols}: {got} vs {want}"));
                }
            }
        }
    }
    Check {
        name: "best basis equals exhaustive search",
        pass: worst.0 <= 1e-10,
        detail: format!("{count} searches, worst relative gap {:.1e} ({})", worst.0, worst.1),
    }
}

pub fn transform_suite() -> Check {
    let parts = [perfect_reconstruction(), best_basis_exhaustive()];
    Check {
        name: "transform suite",
        pass: parts.iter().all(|c| c.pass),
        detail: parts.iter().map(|c| c.line()).collect::<Vec<_>>().join("; "),
    }
}
