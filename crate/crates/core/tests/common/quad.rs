//! Adaptive Gauss–Kronrod (7/15) quadrature used as an independent oracle.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
    let (v, e) = whole;
    if e <= tol || depth == 0 || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
        return v;
    }
    let m = 0.5 * (a + b);
    let l = gk15(f, a, m);
    let r = gk15(f, m, b);
    adapt(f, a, m, l, 0.5 * tol, depth - 1) + adapt(f, m, b, r, 0.5 * tol, depth - 1)
}

/// ∫_a^b f with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let whole = gk15(&f, a, b);
    adapt(&f, a, b, whole, tol, 40)
}

/// ∫ over consecutive breakpoints with a relative tolerance on the total.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], rel: f64) -> f64 {
    let rough: f64 = points.windows(2).map(|w| gk15(&f, w[0], w[1]).0.abs()).sum();
    let tol = rel * rough.max(1e-300) / points.len() as f64;
    points.windows(2).map(|w| integrate(&f, w[0], w[1], tol)).sum()
}
