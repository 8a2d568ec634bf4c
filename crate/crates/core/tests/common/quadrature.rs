//! Adaptive Gauss-Kronrod (7/15) quadrature used as an independent oracle.

use nsto_dfo::sto::StoFunction;

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
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// ∫ₐᵇ f by global adaptive bisection of the worst interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    const ABS_FLOOR: f64 = 1e-16;
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..20_000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= (rel_tol * total.abs()).max(ABS_FLOOR) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// ∫₀^R g(r) dr through r = u^k, smoothing algebraic endpoint behaviour.
pub fn radial<F: Fn(f64) -> f64>(g: F, r_cut: f64, k: f64, rel_tol: f64) -> f64 {
    integrate(|u| if u == 0.0 { 0.0 } else { k * u.powf(k - 1.0) * g(u.powf(k)) }, 0.0, r_cut.powf(1.0 / k), rel_tol)
}

pub fn r_cut(fs: &[StoFunction]) -> f64 {
    60.0 / fs.iter().map(|f| f.zeta()).fold(f64::INFINITY, f64::min)
}

fn substitution_power(s: f64) -> f64 {
    // lowest integrand power s takes r^s -> u^{k(s+1)-1}; keep that exponent >= 2
    (3.0 / (s + 1.0)).max(1.0).ceil()
}

pub fn overlap(p: &StoFunction, q: &StoFunction) -> f64 {
    let k = substitution_power(p.n_star() + q.n_star());
    radial(|r| p.value(r) * q.value(r) * r * r, r_cut(&[*p, *q]), k, 1e-13)
}

pub fn nuclear(p: &StoFunction, q: &StoFunction, z: f64) -> f64 {
    let k = substitution_power(p.n_star() + q.n_star() - 1.0);
    radial(|r| -z * p.value(r) * q.value(r) * r, r_cut(&[*p, *q]), k, 1e-13)
}

/// −½ ∫ χ_p (χ_q″ + 2χ_q′/r) r² dr with the radial Laplacian applied analytically.
pub fn kinetic(p: &StoFunction, q: &StoFunction) -> f64 {
    let (n, z) = (q.n_star(), q.zeta());
    let lap = move |r: f64| {
        // χ = r^{n−1}e^{−ζr}/N; (r²χ′)′/r² over χ
        let a = n - 1.0;
        (a * (a + 1.0) / (r * r) - 2.0 * z * (a + 1.0) / r + z * z) * q.value(r)
    };
    let k = substitution_power(p.n_star() + q.n_star() - 2.0);
    -0.5 * radial(|r| p.value(r) * lap(r) * r * r, r_cut(&[*p, *q]), k, 1e-13)
}

/// Two-dimensional nested quadrature with the r_> split.
pub fn coulomb(p: &StoFunction, q: &StoFunction, r: &StoFunction, s: &StoFunction) -> f64 {
    let rc = r_cut(&[*p, *q, *r, *s]);
    let rho2 = |x: f64| r.value(x) * s.value(x) * x * x;
    let k_in = substitution_power(r.n_star() + s.n_star());
    let k_out = substitution_power(p.n_star() + q.n_star());
    let inner = |r1: f64| {
        let below = radial(rho2, r1, k_in, 1e-13) / r1;
        let above = integrate(|x| rho2(x) / x, r1, rc.max(r1), 1e-13);
        below + above
    };
    radial(|r1| p.value(r1) * q.value(r1) * r1 * r1 * inner(r1), rc, k_out, 1e-12)
}
