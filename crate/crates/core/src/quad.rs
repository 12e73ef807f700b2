//! One-dimensional quadrature and root bracketing used by the Musielak layer.

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
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
    0.209_482_141_084_728_0,
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
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = h * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to relative
/// tolerance `rel_tol` (with a tiny absolute floor).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gk15(&f, a, b);
    let target = |v: f64| (rel_tol * v.abs()).max(1e-300);
    if err <= target(whole) {
        return whole;
    }
    // Interval stack with a global error budget.
    let mut pending = vec![(a, b, whole, err)];
    let mut total = whole;
    let mut total_err = err;
    let mut iterations = 0;
    while total_err > target(total) && iterations < 2000 {
        iterations += 1;
        let (idx, _) = pending
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v, e) = pending.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v;
        total_err += e1 + e2 - e;
        pending.push((lo, mid, v1, e1));
        pending.push((mid, hi, v2, e2));
    }
    // Re-sum in a canonical order so the result does not depend on stack layout.
    pending.sort_by(|x, y| x.0.total_cmp(&y.0));
    pending.iter().map(|p| p.2).sum()
}

/// Integral over `(0, b]` of an integrand with an integrable power-type
/// singularity at zero. Geometric splitting down to `b * 2^-levels`; the
/// remaining sliver is estimated from the local power law.
pub fn integrate_from_zero<F: Fn(f64) -> f64>(f: F, b: f64, rel_tol: f64, levels: u32) -> f64 {
    let mut total = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        total += integrate(&f, lo, hi, rel_tol);
        hi = lo;
    }
    // f(t) ~ C t^beta on (0, hi]
    let f1 = f(hi);
    let f2 = f(0.5 * hi);
    if f1 > 0.0 && f2 > 0.0 {
        let beta = (f1 / f2).ln() / std::f64::consts::LN_2;
        if beta > -1.0 {
            total += f1 * hi / (beta + 1.0);
        } else {
            return f64::INFINITY;
        }
    }
    total
}

/// Smallest `x` in `[lo, hi]` (to absolute/relative tolerance `tol`) with
/// `pred(x)` true, assuming `pred` is monotone false→true.
pub fn bisect<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Inverse of an increasing function `g` with `g(0) = 0` at level `y ≥ 0`:
/// the upper bracket is doubled until `g(hi) ≥ y`, then bisected.
pub fn invert_increasing<G: Fn(f64) -> f64>(g: G, y: f64, tol: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while g(hi) < y && guard < 2100 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = 0.5 * hi;
    guard = 0;
    while lo > 0.0 && g(lo) >= y && guard < 2100 {
        lo *= 0.5;
        guard += 1;
    }
    bisect(|t| g(t) >= y, lo, hi, tol)
}
