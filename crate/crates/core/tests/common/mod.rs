//! Test-only oracles, independent of the library's numerical paths.
#![allow(dead_code)]

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
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

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod quadrature on a finite interval.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol, 40)
}

/// Integral over `(lo, ∞)` via `y = lo + t / (1 - t)`.
pub fn integrate_to_inf(f: impl Fn(f64) -> f64, lo: f64, tol: f64) -> f64 {
    let g = |t: f64| {
        let s = 1.0 - t;
        let y = lo + t / s;
        let v = f(y) / (s * s);
        if v.is_finite() { v } else { 0.0 }
    };
    // split so that the bulk near lo and the tail get their own panels
    let knots = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];
    knots.windows(2).map(|k| integrate(g, k[0], k[1], tol / 6.0)).sum()
}

/// Integral over `(0, ∞)` of a density that may be concentrated near zero,
/// done in log space: `∫ f(e^x) e^x dx`.
pub fn integrate_positive_log(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let g = |x: f64| {
        let y = x.exp();
        let v = f(y) * y;
        if v.is_finite() { v } else { 0.0 }
    };
    let knots: Vec<f64> = (-60..=60).map(|k| k as f64).collect();
    knots.windows(2).map(|k| integrate(g, k[0], k[1], tol / 120.0)).sum()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Monte Carlo standard error of the mean of a correlated trace by
/// non-overlapping batch means (`sqrt(n)` batches).
pub fn batch_means_se(x: &[f64]) -> f64 {
    let n = x.len();
    let batches = (n as f64).sqrt().floor() as usize;
    let size = n / batches;
    let means: Vec<f64> = (0..batches).map(|b| mean(&x[b * size..(b + 1) * size])).collect();
    (variance(&means) / batches as f64).sqrt()
}

/// Total variation between a histogram of `sample` over `edges` and the
/// bin probabilities `probs` (one per bin).
pub fn histogram_tv(sample: &[f64], edges: &[f64], probs: &[f64]) -> f64 {
    let mut counts = vec![0usize; probs.len()];
    let mut outside = 0usize;
    for &x in sample {
        let k = edges.partition_point(|&e| e <= x);
        if k == 0 || k == edges.len() {
            outside += 1;
        } else {
            counts[k - 1] += 1;
        }
    }
    let n = sample.len() as f64;
    let inside: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n - p).abs())
        .sum();
    let p_out = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    0.5 * (inside + (outside as f64 / n - p_out).abs())
}

/// Pearson χ² statistic and degrees of freedom for bin counts vs expected probabilities.
pub fn chi_square(sample: &[f64], edges: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, usize) {
    let n = sample.len() as f64;
    let mut counts = vec![0usize; edges.len() + 1];
    for &x in sample {
        counts[edges.partition_point(|&e| e <= x)] += 1;
    }
    let mut probs = Vec::with_capacity(counts.len());
    let mut prev = 0.0;
    for &e in edges {
        let c = cdf(e);
        probs.push(c - prev);
        prev = c;
    }
    probs.push(1.0 - prev);
    let stat = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| (c as f64 - n * p).powi(2) / (n * p))
        .sum();
    (stat, counts.len() - 1)
}

/// Upper 0.1% point of χ² with `df` degrees of freedom (Wilson–Hilferty).
pub fn chi_square_crit_0001(df: usize) -> f64 {
    let k = df as f64;
    let z = 3.090_232;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}
