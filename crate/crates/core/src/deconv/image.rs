//! Synthetic piecewise-smooth test images on the 0..255 grey scale.

use crate::error::{Error, Result};
use crate::rng::NoiseRng;
use crate::signal::{Dataset, Shape};

pub const IMAGE_NAMES: [&str; 1] = ["cartoon"];

/// A random cartoon image: a gentle gradient background overlaid with
/// ellipses and rectangles of constant grey level. Edges are sharp and the
/// total variation is bounded, like a natural photograph's outline.
pub fn gen_test_image(name: &str, n: usize, seed: u64) -> Result<Dataset> {
    if name != "cartoon" {
        return Err(Error::Unknown {
            kind: "image",
            name: name.to_string(),
        });
    }
    if !n.is_power_of_two() || n < 4 {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut rng = NoiseRng::new(seed);
    let nf = n as f64;
    let (a, bx, by) = (60.0 + 40.0 * rng.uniform(), 40.0 * rng.uniform(), 40.0 * rng.uniform());
    let mut img: Vec<f64> = (0..n * n)
        .map(|i| a + bx * (i % n) as f64 / nf + by * (i / n) as f64 / nf)
        .collect();
    for _ in 0..12 {
        let (cx, cy) = (nf * rng.uniform(), nf * rng.uniform());
        let (rx, ry) = (nf * (0.05 + 0.25 * rng.uniform()), nf * (0.05 + 0.25 * rng.uniform()));
        let grey = 255.0 * rng.uniform();
        let ellipse = rng.uniform() < 0.5;
        for r in 0..n {
            for c in 0..n {
                let (dx, dy) = ((c as f64 - cx) / rx, (r as f64 - cy) / ry);
                let inside = if ellipse {
                    dx * dx + dy * dy <= 1.0
                } else {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                };
                if inside {
                    img[r * n + c] = grey;
                }
            }
        }
    }
    for v in &mut img {
        *v = v.clamp(0.0, 255.0);
    }
    let mut ds = Dataset::new(img.clone(), Shape::D2 { rows: n, cols: n })?;
    ds.truth = Some(img);
    Ok(ds)
}
