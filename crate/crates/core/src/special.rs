//! Gamma and incomplete gamma functions.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64))
}

/// Γ(x) for real x, not a non-positive integer.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else if x > 140.0 {
        ln_gamma(x).exp()
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
    }
}

const MAX_TERMS: usize = 10_000;

/// Lower incomplete gamma γ(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt for s > 0, x ≥ 0.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && x >= 0.0, "lower_incomplete_gamma needs s > 0 and x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        for k in 1..MAX_TERMS {
            term *= x / (s + k as f64);
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (s * x.ln() - x).exp() * sum
    } else {
        gamma(s) - upper_incomplete_gamma_cf(s, x)
    }
}

/// Γ(s, x) by the modified Lentz continued fraction, valid for x ≥ s + 1.
fn upper_incomplete_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (s * x.ln() - x).exp() * h
}
