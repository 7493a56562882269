//! Deconvolution properties: whitening, mirror scale growth, the Q
//! constraint and the identity-kernel reduction.

use mdlshrink::deconv::*;
use mdlshrink::selection::{inmdl_iterate, InmdlConfig};
use mdlshrink::{FilterPair, NoiseRng, WaveletBasis};

use super::Check;

/// Per-subband variance of whitened deconvolved white noise (hyperbolic
/// p = 3 blur with the default cutoff, mirror basis).
pub fn whitened_unit_variance(n: usize, draws: usize, seed: u64) -> Check {
    let k = BlurKernel::parse("hyperbolic:p=3", 1, n).unwrap();
    let k_c = default_cutoff(&k);
    let basis = WaveletBasis::mirror(FilterPair::named("symmlet12").unwrap(), n).unwrap();
    let w = noise_weights(&basis, &k, k_c).unwrap();
    let leaves = basis.leaves();
    let mut acc = vec![0.0; leaves.len()];
    let mut rng = NoiseRng::new(seed);
    for _ in 0..draws {
        let e = rng.normal_vec(n, 1.0);
        let c = whiten(
            &basis.forward(&pseudo_inverse_deconvolve(&e, &k, k_c).unwrap()).unwrap(),
            &w,
        )
        .unwrap();
        for (j, leaf) in leaves.iter().enumerate() {
            acc[j] += leaf.indices(n).map(|i| c[i] * c[i]).sum::<f64>();
        }
    }
    let mut worst = (0.0f64, 1.0);
    let mut active = 0;
    for (j, leaf) in leaves.iter().enumerate() {
        if w.t_tilde_sq[leaf.c0] == 0.0 {
            continue;
        }
        active += 1;
        let v = acc[j] / (draws * leaf.len()) as f64;
        if (v - 1.0).abs() >= worst.0 {
            worst = ((v - 1.0).abs(), v);
        }
    }
    Check {
        name: "whitened noise variance",
        pass: active > 0 && worst.0 <= 0.25,
        detail: format!(
            "{active} active subbands, N {n}, {draws} draws, farthest variance {:.3}",
            worst.1
        ),
    }
}

/// Ratios of consecutive mirror-subband noise scales t̃² against 2^{2p},
/// away from both ends of the chain.
pub fn mirror_scale_growth(n: usize) -> Check {
    let p = 3.0;
    let k = BlurKernel::parse("hyperbolic:p=3", 1, n).unwrap();
    let basis = WaveletBasis::mirror(FilterPair::named("symmlet12").unwrap(), n).unwrap();
    let w = noise_weights(&basis, &k, None).unwrap();
    // Mirror detail leaves toward Nyquist: paths 1,0..0,1 of growing length.
    let mut mirror: Vec<(usize, f64)> = basis
        .leaves()
        .iter()
        .filter(|l| l.xpath[0] == 1 && l.xpath.last() == Some(&1) && l.xpath.len() > 1)
        .map(|l| (l.xpath.len(), w.t_tilde_sq[l.c0]))
        .collect();
    mirror.sort_by_key(|m| m.0);
    let target = 2f64.powf(2.0 * p);
    let ratios: Vec<f64> = mirror.windows(2).map(|m| m[1].1 / m[0].1).collect();
    let inner = if ratios.len() >= 3 {
        &ratios[1..ratios.len() - 1]
    } else {
        &ratios[..0]
    };
    Check {
        name: "mirror scale growth",
        pass: !inner.is_empty() && inner.iter().all(|r| *r >= target / 2.0 && *r <= 2.0 * target),
        detail: format!("target {target}, interior ratios {:.1?}", inner),
    }
}

/// Every leaf of the constrained best basis for a boxcar blur has band
/// ratio at most Q.
pub fn constrained_basis_q(n: usize, seed: u64) -> Check {
    let k = BlurKernel::parse("boxcar:9", n, n).unwrap();
    let mut rng = NoiseRng::new(seed);
    let x = rng.normal_vec(n * n, 1.0);
    let f = FilterPair::named("symmlet20").unwrap();
    let basis = constrained_best_basis(&f, &x, &k, DEFAULT_Q).unwrap();
    let worst = basis.leaves().iter().map(|l| band_ratio(&k, l)).fold(0.0, f64::max);
    Check {
        name: "constrained basis respects Q",
        pass: worst <= DEFAULT_Q,
        detail: format!(
            "{} leaves, largest band ratio {worst:.3} (Q = {DEFAULT_Q})",
            basis.leaves().len()
        ),
    }
}

/// INMDL restoration with the identity kernel against DWT + INMDL
/// denoising of the same data, compared bit for bit.
pub fn identity_reduces_to_denoising(n: usize, seed: u64) -> Check {
    let mut rng = NoiseRng::new(seed);
    let mut x = rng.normal_vec(n, 1.0);
    for i in 0..20 {
        x[(i * n / 20) % n] += 10.0 + i as f64;
    }
    let basis = WaveletBasis::dwt(FilterPair::named("symmlet12").unwrap(), n, None).unwrap();
    let k = BlurKernel::parse("identity", 1, n).unwrap();
    let cfg = DeconvConfig::new("symmlet12", &k);
    let r = inmdl_deconvolve(&x, &k, &cfg).unwrap();
    let state = inmdl_iterate(&basis.forward(&x).unwrap(), &InmdlConfig::default()).unwrap();
    let direct = basis.inverse(&state.theta_star).unwrap();
    let same_estimate = r.estimate == direct;
    let same_state = r.state.as_ref() == Some(&state);
    Check {
        name: "identity kernel equals denoising",
        pass: cfg.k_c.is_none() && same_estimate && same_state,
        detail: format!(
            "N {n}, d {}, estimate identical {same_estimate}, selection state identical {same_state}",
            state.d()
        ),
    }
}

pub fn deconvolution_properties() -> Check {
    let parts = [
        whitened_unit_variance(256, 200, 17),
        mirror_scale_growth(1024),
        constrained_basis_q(64, 2),
        identity_reduces_to_denoising(512, 9),
    ];
    Check {
        name: "deconvolution properties",
        pass: parts.iter().all(|c| c.pass),
        detail: parts.iter().map(|c| c.line()).collect::<Vec<_>>().join("; "),
    }
}
