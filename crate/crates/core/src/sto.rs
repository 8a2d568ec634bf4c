//! s-type Slater orbitals with noninteger principal quantum numbers.
//!
//! χ(r) = N r^{n*−1} e^{−ζr}; all integrals are one-centre and radial.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{jacobi_eigensymmetric, DEGENERACY_THRESHOLD};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoFunction {
    n_star: f64,
    zeta: f64,
}

impl StoFunction {
    pub fn new(n_star: f64, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(DfoError::InvalidArgument(format!("orbital exponent must be positive, got {zeta}")));
        }
        if !(n_star > 0.5 && n_star.is_finite()) {
            return Err(DfoError::InvalidArgument(format!("principal number must exceed 0.5, got {n_star}")));
        }
        Ok(Self { n_star, zeta })
    }

    pub fn n_star(&self) -> f64 {
        self.n_star
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn value(&self, r: f64) -> f64 {
        normalization(self) * r.powf(self.n_star - 1.0) * (-self.zeta * r).exp()
    }
}

/// N = (2ζ)^{n*+1/2} / √Γ(2n*+1).
pub fn normalization(f: &StoFunction) -> f64 {
    ((f.n_star + 0.5) * (2.0 * f.zeta).ln() - 0.5 * ln_gamma(2.0 * f.n_star + 1.0)).exp()
}

/// ∫₀^∞ r^{s} e^{−a r} dr · N_p N_q, evaluated in log space.
fn moment(p: &StoFunction, q: &StoFunction, s: f64) -> f64 {
    let a = p.zeta + q.zeta;
    let ln_norm = (p.n_star + 0.5) * (2.0 * p.zeta).ln() + (q.n_star + 0.5) * (2.0 * q.zeta).ln()
        - 0.5 * (ln_gamma(2.0 * p.n_star + 1.0) + ln_gamma(2.0 * q.n_star + 1.0));
    (ln_norm + ln_gamma(s + 1.0) - (s + 1.0) * a.ln()).exp()
}

pub fn overlap(p: &StoFunction, q: &StoFunction) -> f64 {
    moment(p, q, p.n_star + q.n_star)
}

/// Kinetic energy ½∫χ_p′χ_q′ r² dr, equal to ⟨p|−½∇²|q⟩ for s-functions.
pub fn kinetic(p: &StoFunction, q: &StoFunction) -> Result<f64> {
    let s = p.n_star + q.n_star;
    if s <= 1.0 {
        return Err(DfoError::DivergentIntegral(format!("kinetic integral needs n_p + n_q > 1, got {s}")));
    }
    let (np, nq) = (p.n_star - 1.0, q.n_star - 1.0);
    let mut t = p.zeta * q.zeta * moment(p, q, s) - (np * q.zeta + nq * p.zeta) * moment(p, q, s - 1.0);
    if np * nq != 0.0 {
        t += np * nq * moment(p, q, s - 2.0);
    }
    Ok(0.5 * t)
}

pub fn nuclear_attraction(p: &StoFunction, q: &StoFunction, z: f64) -> f64 {
    -z * moment(p, q, p.n_star + q.n_star - 1.0)
}

/// ∫₀^∞ r^p e^{−a r} ∫₀^r t^q e^{−b t} dt dr as a convergent hypergeometric series.
fn nested_radial(p: f64, a: f64, q: f64, b: f64) -> f64 {
    let c = a + b;
    let ratio = b / c;
    if ratio > 0.5 {
        let full = (ln_gamma(p + 1.0) - (p + 1.0) * a.ln() + ln_gamma(q + 1.0) - (q + 1.0) * b.ln()).exp();
        return full - nested_radial(q, b, p, a);
    }
    let e = p + q + 2.0;
    let mut term = (ln_gamma(e) - e * c.ln()).exp() / (q + 1.0);
    let mut sum = term;
    for k in 0..2000 {
        let k = k as f64;
        term *= ratio * (e + k) / (q + 2.0 + k);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Coulomb repulsion (pq|rs) = ∫∫ ρ_pq(r₁) ρ_rs(r₂) / r_> r₁² r₂² dr₁ dr₂.
pub fn coulomb_repulsion(p: &StoFunction, q: &StoFunction, r: &StoFunction, s: &StoFunction) -> Result<f64> {
    let big_a = p.n_star + q.n_star;
    let big_b = r.n_star + s.n_star;
    if big_a <= 0.0 || big_b <= 0.0 {
        return Err(DfoError::DivergentIntegral(format!(
            "repulsion integral needs positive charge-distribution powers, got {big_a} and {big_b}"
        )));
    }
    let alpha = p.zeta + q.zeta;
    let beta = r.zeta + s.zeta;
    let norm = normalization(p) * normalization(q) * normalization(r) * normalization(s);
    Ok(norm * (nested_radial(big_a - 1.0, alpha, big_b, beta) + nested_radial(big_b - 1.0, beta, big_a, alpha)))
}

/// Ordered list of functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    functions: Vec<StoFunction>,
    label: String,
}

impl BasisSet {
    pub fn new(functions: Vec<StoFunction>, label: impl Into<String>) -> Result<Self> {
        if functions.is_empty() {
            return Err(DfoError::InvalidArgument("basis set is empty".into()));
        }
        for (i, a) in functions.iter().enumerate() {
            for b in &functions[..i] {
                if (a.n_star - b.n_star).abs() <= 1e-12 && (a.zeta - b.zeta).abs() <= 1e-12 {
                    return Err(DfoError::DegenerateBasis(0.0));
                }
            }
        }
        Ok(Self { functions, label: label.into() })
    }

    pub fn functions(&self) -> &[StoFunction] {
        &self.functions
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Dense (pq|rs) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct EriTensor {
    m: usize,
    data: Vec<f64>,
}

impl EriTensor {
    fn zeros(m: usize) -> Self {
        Self { m, data: vec![0.0; m * m * m * m] }
    }

    fn index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.m + q) * self.m + r) * self.m + s
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.index(p, q, r, s)]
    }

    fn set_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.index(a, b, c, d);
            self.data[i] = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTables {
    pub overlap: DMatrix<f64>,
    pub core: DMatrix<f64>,
    pub eri: EriTensor,
}

/// Overlap, core Hamiltonian and repulsion tensor for nuclear charge `z`.
pub fn build_integral_tables(b: &BasisSet, z: f64) -> Result<IntegralTables> {
    let f = &b.functions;
    let m = f.len();
    let mut overlap = DMatrix::zeros(m, m);
    let mut core = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..=p {
            let s = overlap_value(&f[p], &f[q], p == q);
            let h = kinetic(&f[p], &f[q])? + nuclear_attraction(&f[p], &f[q], z);
            overlap[(p, q)] = s;
            overlap[(q, p)] = s;
            core[(p, q)] = h;
            core[(q, p)] = h;
        }
    }
    let (eig, _) = jacobi_eigensymmetric(&overlap);
    if !(eig[0] > DEGENERACY_THRESHOLD) {
        return Err(DfoError::DegenerateBasis(eig[0]));
    }
    let mut eri = EriTensor::zeros(m);
    for p in 0..m {
        for q in 0..=p {
            let pq = p * (p + 1) / 2 + q;
            for r in 0..m {
                for s in 0..=r {
                    if r * (r + 1) / 2 + s > pq {
                        continue;
                    }
                    let v = coulomb_repulsion(&f[p], &f[q], &f[r], &f[s])?;
                    if !v.is_finite() {
                        return Err(DfoError::DivergentIntegral(format!("non-finite ({p}{q}|{r}{s})")));
                    }
                    eri.set_symmetric(p, q, r, s, v);
                }
            }
        }
    }
    if core.iter().chain(overlap.iter()).any(|v| !v.is_finite()) {
        return Err(DfoError::DivergentIntegral("non-finite one-electron integral".into()));
    }
    Ok(IntegralTables { overlap, core, eri })
}

fn overlap_value(p: &StoFunction, q: &StoFunction, diagonal: bool) -> f64 {
    if diagonal {
        1.0
    } else {
        overlap(p, q)
    }
}
