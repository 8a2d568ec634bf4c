//! RBF surrogate minimizer working in normalized coordinates.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{DfoError, Result};
use crate::linalg::jacobi_eigensymmetric;
use crate::objective::{cache_key, CacheKey, ObjectiveHandle, OptResult, Termination, DEFAULT_CACHE_RESOLUTION};

/// Maps `x` into the unit cube of `dom`.
pub fn normalize(x: &[f64], dom: &Domain) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v - dom.lower()[i]) / dom.width(i))
        .collect()
}

pub fn denormalize(u: &[f64], dom: &Domain) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(i, &v)| (dom.lower()[i] + v * dom.width(i)).clamp(dom.lower()[i], dom.upper()[i]))
        .collect()
}

/// Evaluated points in native and normalized coordinates, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct SampleSet {
    points: Vec<Vec<f64>>,
    normalized: Vec<Vec<f64>>,
    values: Vec<f64>,
    keys: HashSet<CacheKey>,
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn normalized(&self) -> &[Vec<f64>] {
        &self.normalized
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        self.keys.contains(&cache_key(u, DEFAULT_CACHE_RESOLUTION))
    }

    /// Adds a sample; returns false and leaves the set unchanged if `u` is already present.
    pub fn push(&mut self, x: Vec<f64>, u: Vec<f64>, f: f64) -> bool {
        if !self.keys.insert(cache_key(&u, DEFAULT_CACHE_RESOLUTION)) {
            return false;
        }
        self.points.push(x);
        self.normalized.push(u);
        self.values.push(f);
        true
    }

    /// Index of the smallest value, earliest on ties.
    pub fn best_index(&self) -> Option<usize> {
        (0..self.len()).reduce(|b, i| if self.values[i] < self.values[b] { i } else { b })
    }
}

/// The `min(m_active, |s|)` samples with the smallest values, ties in insertion order.
pub fn select_active_subset(s: &SampleSet, m_active: usize) -> SampleSet {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s.values[a].total_cmp(&s.values[b]));
    let mut out = SampleSet::new();
    for &i in order.iter().take(m_active) {
        out.push(s.points[i].clone(), s.normalized[i].clone(), s.values[i]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    #[default]
    Gaussian,
    Multiquadric,
    Cubic,
}

impl Kernel {
    pub fn phi(self, r: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-r * r).exp(),
            Kernel::Multiquadric => (1.0 + r * r).sqrt(),
            Kernel::Cubic => r * r * r,
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = DfoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Kernel::Gaussian),
            "multiquadric" => Ok(Kernel::Multiquadric),
            "cubic" => Ok(Kernel::Cubic),
            other => Err(DfoError::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Multiquadric => "multiquadric",
            Kernel::Cubic => "cubic",
        })
    }
}

/// Diagonal regularization chosen from the condition number of the kernel matrix.
pub fn regularization_for(kappa: f64) -> f64 {
    if kappa > 1e6 {
        0.1
    } else if kappa > 1e4 {
        0.05
    } else if kappa > 1e3 {
        0.01
    } else {
        0.005
    }
}

const PINV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub centers: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub kernel: Kernel,
    pub shape: f64,
    pub value_bounds: (f64, f64),
    pub regularization: f64,
    pub kappa: f64,
    /// Constant added to the kernel expansion; the weights fit `f - offset`.
    pub offset: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Fits the surrogate. `eta_override` bypasses the regularization ladder.
pub fn build_surrogate(
    active: &SampleSet,
    kernel: Kernel,
    shape: f64,
    eta_override: Option<f64>,
    offset: ValueOffset,
) -> Result<Surrogate> {
    if active.is_empty() {
        return Err(DfoError::InvalidArgument("surrogate needs at least one sample".into()));
    }
    if !(shape > 0.0) {
        return Err(DfoError::InvalidArgument(format!("shape parameter must be positive, got {shape}")));
    }
    let m = active.len();
    let c = &active.normalized;
    let phi = DMatrix::from_fn(m, m, |i, j| kernel.phi(shape * distance(&c[i], &c[j])));
    let (eig, _) = jacobi_eigensymmetric(&phi);
    let sigma_max = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let sigma_min = eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let kappa = sigma_max / (sigma_min + 1e-20);
    let eta = eta_override.unwrap_or_else(|| regularization_for(kappa));

    let reg = &phi + DMatrix::identity(m, m) * eta;
    let (mu, v) = jacobi_eigensymmetric(&reg);
    let mu_max = mu.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let inv = mu.map(|x| if x.abs() > PINV_CUTOFF * mu_max { 1.0 / x } else { 0.0 });
    let fmin = active.values.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = match offset {
        ValueOffset::None => 0.0,
        ValueOffset::Min => fmin,
    };
    let f = DVector::from_iterator(m, active.values.iter().map(|v| v - offset));
    let lambda = &v * DMatrix::from_diagonal(&inv) * (v.transpose() * f);

    let fmax = active.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Surrogate {
        centers: c.clone(),
        lambda: lambda.iter().copied().collect(),
        kernel,
        shape,
        value_bounds: (fmin - 2.0 * (fmax - fmin), fmax),
        regularization: eta,
        kappa,
        offset,
    })
}

pub fn surrogate_eval(m: &Surrogate, u: &[f64], clipped: bool) -> f64 {
    let g = m.offset
        + m.centers
            .iter()
            .zip(&m.lambda)
            .map(|(c, l)| l * m.kernel.phi(m.shape * distance(u, c)))
            .sum::<f64>();
    if clipped {
        g.max(m.value_bounds.0).min(m.value_bounds.1)
    } else {
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegion {
    pub center: Vec<f64>,
    pub radius: f64,
}

const MAX_REJECTIONS: usize = 100;

/// Uniform draw from the ball around `tr.center`, clipped to the unit cube
/// when rejection sampling does not land inside it.
fn sample_in_region(tr: &TrustRegion, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = tr.center.len();
    let mut last = Vec::new();
    for _ in 0..MAX_REJECTIONS {
        let dir: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = tr.radius * rng.random::<f64>().powf(1.0 / d as f64);
        last = tr.center.iter().zip(&dir).map(|(c, v)| c + r * v / norm).collect();
        if last.iter().all(|v| (0.0..=1.0).contains(v)) {
            return last;
        }
    }
    if last.is_empty() {
        return tr.center.clone();
    }
    last.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Best of `n_cand` sampled points under the clipped surrogate, first index on ties.
pub fn propose_candidate(
    m: &Surrogate,
    tr: &TrustRegion,
    n_cand: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let candidates: Vec<Vec<f64>> = (0..n_cand.max(1)).map(|_| sample_in_region(tr, rng)).collect();
    let mut best = 0;
    let mut best_g = f64::INFINITY;
    for (i, u) in candidates.iter().enumerate() {
        let g = surrogate_eval(m, u, true);
        if g < best_g {
            best = i;
            best_g = g;
        }
    }
    candidates.into_iter().nth(best).expect("at least one candidate")
}

/// `n` Latin-hypercube points in the unit cube.
pub fn latin_hypercube(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, p) in pts.iter_mut().enumerate() {
            p[j] = (perm[i] as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

/// Length unit the shape parameter is applied in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelScale {
    /// Distances in the unit cube.
    Unit,
    /// Distances divided by `min(1, scale_factor * radius)`.
    #[default]
    TrustRegion,
}

impl std::str::FromStr for KernelScale {
    type Err = DfoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(KernelScale::Unit),
            "trust-region" => Ok(KernelScale::TrustRegion),
            other => Err(DfoError::InvalidArgument(format!("unknown kernel scale '{other}'"))),
        }
    }
}

impl std::fmt::Display for KernelScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelScale::Unit => "unit",
            KernelScale::TrustRegion => "trust-region",
        })
    }
}

/// Constant the surrogate is fitted around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueOffset {
    /// Fit the raw values.
    None,
    /// Fit values relative to the smallest active value.
    #[default]
    Min,
}

impl std::str::FromStr for ValueOffset {
    type Err = DfoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ValueOffset::None),
            "min" => Ok(ValueOffset::Min),
            other => Err(DfoError::InvalidArgument(format!("unknown value offset '{other}'"))),
        }
    }
}

impl std::fmt::Display for ValueOffset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ValueOffset::None => "none",
            ValueOffset::Min => "min",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfConfig {
    pub budget: usize,
    pub eps: f64,
    pub seed: u64,
    pub kernel: Kernel,
    pub shape: f64,
    pub kernel_scale: KernelScale,
    pub scale_factor: f64,
    pub value_offset: ValueOffset,
    /// Active subset size is `active_per_dim * D + active_offset`.
    pub active_per_dim: usize,
    pub active_offset: usize,
    pub candidates_per_dim: usize,
    pub initial_radius: f64,
    pub expand: f64,
    pub shrink: f64,
    pub radius_floor: f64,
    pub stall_window: usize,
    pub eta_override: Option<f64>,
}

impl Default for RbfConfig {
    fn default() -> Self {
        Self {
            budget: 600,
            eps: 1e-12,
            seed: 0,
            kernel: Kernel::Gaussian,
            shape: 1.5,
            kernel_scale: KernelScale::TrustRegion,
            value_offset: ValueOffset::Min,
            scale_factor: 8.0,
            active_per_dim: 5,
            active_offset: 10,
            candidates_per_dim: 50,
            initial_radius: 0.25,
            expand: 1.6,
            shrink: 0.5,
            radius_floor: 1e-6,
            stall_window: 20,
            eta_override: None,
        }
    }
}

impl RbfConfig {
    /// Shape parameter applied to unit-cube distances at trust-region `radius`.
    pub fn effective_shape(&self, radius: f64) -> f64 {
        match self.kernel_scale {
            KernelScale::Unit => self.shape,
            KernelScale::TrustRegion => self.shape / (self.scale_factor * radius).min(1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RbfOutcome {
    pub result: OptResult,
    pub samples: SampleSet,
    pub radii: Vec<f64>,
    pub regularizations: Vec<f64>,
}

pub fn rbf_run(h: &mut ObjectiveHandle, dom: &Domain, x0: &[f64], cfg: &RbfConfig) -> Result<RbfOutcome> {
    let d = dom.dim();
    if x0.len() != d {
        return Err(DfoError::DimensionMismatch { expected: d, got: x0.len() });
    }
    if cfg.budget < 2 * (d + 1) {
        return Err(DfoError::InvalidArgument(format!(
            "budget {} is below the initial design size {}",
            cfg.budget,
            2 * (d + 1)
        )));
    }
    let mark = h.mark();
    let start = h.eval_count();
    let used = |h: &ObjectiveHandle| h.eval_count() - start;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = SampleSet::new();

    let x0 = dom.clip(x0)?;
    let mut design = vec![normalize(&x0, dom)];
    design.extend(latin_hypercube(2 * d + 1, d, &mut rng));
    for u in design {
        if samples.contains(&u) {
            continue;
        }
        let x = denormalize(&u, dom);
        let f = h.evaluate(&x);
        samples.push(x, u, f);
    }

    let m_active = cfg.active_per_dim * d + cfg.active_offset;
    let n_cand = cfg.candidates_per_dim * d;
    let best = samples.best_index().expect("initial design is non-empty");
    let mut tr = TrustRegion { center: samples.normalized[best].clone(), radius: cfg.initial_radius };
    let mut best_f = samples.values[best];
    let mut reference = best_f;
    let mut since_progress = 0;
    let mut radii = Vec::new();
    let mut regularizations = Vec::new();
    let mut iterations = 0;
    let termination = loop {
        if used(h) >= cfg.budget || h.exhausted() {
            break Termination::Budget;
        }
        let active = select_active_subset(&samples, m_active);
        let model = build_surrogate(&active, cfg.kernel, cfg.effective_shape(tr.radius), cfg.eta_override, cfg.value_offset)?;
        regularizations.push(model.regularization);
        let u = propose_candidate(&model, &tr, n_cand, &mut rng);
        iterations += 1;
        let mut improved = false;
        if !samples.contains(&u) {
            let x = denormalize(&u, dom);
            let f = h.evaluate(&x);
            samples.push(x, u.clone(), f);
            if f < best_f {
                best_f = f;
                tr.center = u;
                improved = true;
            }
        }
        tr.radius = if improved {
            (cfg.expand * tr.radius).min(1.0)
        } else {
            (cfg.shrink * tr.radius).max(cfg.radius_floor)
        };
        radii.push(tr.radius);
        if reference - best_f >= cfg.eps {
            reference = best_f;
            since_progress = 0;
        } else {
            since_progress += 1;
        }
        if since_progress >= cfg.stall_window {
            break Termination::Stagnation;
        }
        if !improved && tr.radius <= cfg.radius_floor {
            break Termination::StepFloor;
        }
    };
    Ok(RbfOutcome {
        result: h.result_since(mark, iterations, termination)?,
        samples,
        radii,
        regularizations,
    })
}

pub fn rbf_minimize(h: &mut ObjectiveHandle, dom: &Domain, x0: &[f64], cfg: &RbfConfig) -> Result<OptResult> {
    rbf_run(h, dom, x0, cfg).map(|o| o.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_functions::{powell_singular, psf_standard_start};

    fn set_from(values: &[f64]) -> SampleSet {
        let mut s = SampleSet::new();
        for (i, &v) in values.iter().enumerate() {
            let u = vec![i as f64 / 10.0];
            s.push(u.clone(), u, v);
        }
        s
    }

    #[test]
    fn normalize_round_trip() {
        let dom = Domain::new(vec![-4.0, 1.0], vec![5.0, 3.0]).unwrap();
        assert_eq!(normalize(&[-4.0, 1.0], &dom), vec![0.0, 0.0]);
        assert_eq!(normalize(&[5.0, 3.0], &dom), vec![1.0, 1.0]);
        assert_eq!(normalize(&[0.5, 2.0], &dom), vec![0.5, 0.5]);
        let x = [1.234, 2.9];
        let back = denormalize(&normalize(&x, &dom), &dom);
        assert!(back.iter().zip(x).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn active_subset_rules() {
        assert_eq!(select_active_subset(&set_from(&[5.0, 4.0, 3.0, 2.0, 1.0]), 10).len(), 5);
        let s = select_active_subset(&set_from(&[3.0, 1.0, 2.0]), 2);
        assert_eq!(s.values(), &[1.0, 2.0]);
        let s = select_active_subset(&set_from(&[2.0, 1.0, 1.0]), 2);
        assert_eq!(s.normalized()[0], vec![0.1]);
        assert_eq!(s.normalized()[1], vec![0.2]);
    }

    #[test]
    fn duplicate_samples_rejected() {
        let mut s = SampleSet::new();
        assert!(s.push(vec![0.5], vec![0.5], 1.0));
        assert!(!s.push(vec![0.5], vec![0.5 + 1e-12], 2.0));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn ladder() {
        assert_eq!(regularization_for(1e7), 0.1);
        assert_eq!(regularization_for(5e4), 0.05);
        assert_eq!(regularization_for(5e3), 0.01);
        assert_eq!(regularization_for(500.0), 0.005);
        assert_eq!(regularization_for(1e6), 0.05);
    }

    #[test]
    fn single_point_surrogate() {
        let s = set_from(&[4.0]);
        let m = build_surrogate(&s, Kernel::Gaussian, 1.5, None, ValueOffset::None).unwrap();
        let g = surrogate_eval(&m, &[0.0], false);
        assert!((g - 4.0 / (1.0 + m.regularization)).abs() < 1e-14);
        let m = build_surrogate(&s, Kernel::Gaussian, 1.5, Some(0.0), ValueOffset::None).unwrap();
        assert!((surrogate_eval(&m, &[0.0], false) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn interpolates_without_regularization() {
        let mut s = SampleSet::new();
        for (i, &f) in [1.0, -2.0, 0.5, 3.0].iter().enumerate() {
            let u = vec![i as f64 / 3.0, (i % 2) as f64];
            s.push(u.clone(), u, f);
        }
        let m = build_surrogate(&s, Kernel::Gaussian, 1.5, Some(0.0), ValueOffset::None).unwrap();
        for (u, f) in s.normalized().iter().zip(s.values()) {
            assert!((surrogate_eval(&m, u, false) - f).abs() / (1.0 + f.abs()) < 1e-8);
        }
    }

    #[test]
    fn min_offset_commutes_with_shifts() {
        let mut a = SampleSet::new();
        let mut b = SampleSet::new();
        for (i, &f) in [1.0, -2.0, 0.5, 3.0, 0.25].iter().enumerate() {
            let u = vec![i as f64 / 4.0, ((i * 3) % 5) as f64 / 4.0];
            a.push(u.clone(), u.clone(), f);
            b.push(u.clone(), u, f - 100.0);
        }
        let ma = build_surrogate(&a, Kernel::Gaussian, 1.5, None, ValueOffset::Min).unwrap();
        let mb = build_surrogate(&b, Kernel::Gaussian, 1.5, None, ValueOffset::Min).unwrap();
        for u in [[0.1, 0.9], [0.5, 0.5], [0.0, 0.3]] {
            let d = surrogate_eval(&ma, &u, true) - surrogate_eval(&mb, &u, true);
            assert!((d - 100.0).abs() < 1e-10, "{d}");
        }
    }

    #[test]
    fn constant_values_give_constant_scale() {
        let s = set_from(&[2.0, 2.0, 2.0]);
        let m = build_surrogate(&s, Kernel::Gaussian, 1.5, None, ValueOffset::None).unwrap();
        assert_eq!(m.value_bounds, (2.0, 2.0));
        assert_eq!(surrogate_eval(&m, &[0.7], true), 2.0);
    }

    #[test]
    fn clipping() {
        let s = set_from(&[0.0, 1.0]);
        let mut m = build_surrogate(&s, Kernel::Gaussian, 1.5, None, ValueOffset::None).unwrap();
        assert_eq!(m.value_bounds, (-2.0, 1.0));
        m.lambda = vec![100.0, 100.0];
        assert_eq!(surrogate_eval(&m, &[0.05], true), 1.0);
        m.lambda = vec![0.25, 0.0];
        let g = surrogate_eval(&m, &[0.0], true);
        assert_eq!(g, 0.25);
    }

    #[test]
    fn proposal_ties_and_oracle() {
        let s = set_from(&[1.0, 1.0]);
        let m = build_surrogate(&s, Kernel::Gaussian, 1.5, None, ValueOffset::None).unwrap();
        // constant after clipping, so the first draw wins
        let tr = TrustRegion { center: vec![0.5], radius: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let first = sample_in_region(&tr, &mut rng.clone());
        assert_eq!(propose_candidate(&m, &tr, 20, &mut rng), first);

        // surrogate with a bowl minimum at 0.6
        let mut s = SampleSet::new();
        for i in 0..=20 {
            let u = vec![i as f64 / 20.0];
            let f = (u[0] - 0.6) * (u[0] - 0.6);
            s.push(u.clone(), u, f);
        }
        let m = build_surrogate(&s, Kernel::Gaussian, 1.5, Some(0.0), ValueOffset::None).unwrap();
        let tr = TrustRegion { center: vec![0.5], radius: 0.3 };
        let u = propose_candidate(&m, &tr, 2000, &mut rng);
        assert!((u[0] - 0.6).abs() < 0.01);
    }

    #[test]
    fn samples_stay_in_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tr = TrustRegion { center: vec![0.95, 0.05, 0.5], radius: 0.2 };
        for _ in 0..500 {
            let u = sample_in_region(&tr, &mut rng);
            assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(distance(&u, &tr.center) <= 0.2 + 1e-12);
        }
    }

    #[test]
    fn latin_hypercube_strata() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = latin_hypercube(7, 3, &mut rng);
        for j in 0..3 {
            let mut bins: Vec<usize> = pts.iter().map(|p| (p[j] * 7.0) as usize).collect();
            bins.sort_unstable();
            assert_eq!(bins, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sphere_2d() {
        let dom = Domain::cube(2, -1.0, 1.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, |x| x[0] * x[0] + x[1] * x[1]);
        let cfg = RbfConfig { budget: 100, ..Default::default() };
        let r = rbf_minimize(&mut h, &dom, &[0.7, -0.4], &cfg).unwrap();
        assert!(r.best_f < 1e-3, "best {}", r.best_f);
        assert!(r.n_evals <= 100);
    }

    #[test]
    fn budget_equal_to_design() {
        let dom = Domain::cube(2, -1.0, 1.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, |x| x[0] * x[0] + x[1] * x[1]);
        let cfg = RbfConfig { budget: 6, ..Default::default() };
        let r = rbf_minimize(&mut h, &dom, &[0.7, -0.4], &cfg).unwrap();
        assert_eq!(r.n_evals, 6);
        assert_eq!(r.termination, Termination::Budget);
        let cfg = RbfConfig { budget: 5, ..Default::default() };
        assert!(rbf_minimize(&mut h, &dom, &[0.7, -0.4], &cfg).is_err());
    }

    #[test]
    fn psf4_progress() {
        let dom = Domain::cube(4, -4.0, 5.0).unwrap();
        let mut best: Vec<f64> = (0..5)
            .map(|seed| {
                let mut h = ObjectiveHandle::new(4, powell_singular);
                let cfg = RbfConfig { budget: 600, seed, ..Default::default() };
                let r = rbf_minimize(&mut h, &dom, &psf_standard_start(4).unwrap(), &cfg).unwrap();
                assert!(r.n_evals <= 600);
                r.best_f
            })
            .collect();
        best.sort_by(f64::total_cmp);
        assert!(best[2] < 5e-2, "median {}", best[2]);
    }
}
