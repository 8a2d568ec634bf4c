//! Nelder-Mead simplex search with triangle-wave bound handling, combined
//! geometric/value convergence tests and anisotropic restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::Domain;
use crate::error::{DfoError, Result};
use crate::objective::{ObjectiveHandle, OptResult, Termination};

pub const REFLECTION: f64 = 1.0;
pub const EXPANSION: f64 = 2.0;
pub const CONTRACTION: f64 = 0.5;
pub const SHRINK: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Reflection,
    Expansion,
    OutsideContraction,
    InsideContraction,
    Shrink,
}

impl Simplex {
    /// Evaluates every vertex and ranks them.
    pub fn evaluate(vertices: Vec<Vec<f64>>, h: &mut ObjectiveHandle) -> Self {
        let values = vertices.iter().map(|v| h.evaluate(v)).collect();
        let mut s = Self { vertices, values };
        s.sort();
        s
    }

    pub fn from_parts(vertices: Vec<Vec<f64>>, values: Vec<f64>) -> Self {
        assert_eq!(vertices.len(), values.len());
        let mut s = Self { vertices, values };
        s.sort();
        s
    }

    /// Stable ranking by objective value; ties keep their current order.
    pub fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = idx.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    pub fn is_sorted(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.vertices[0], self.values[0])
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Centroid of all vertices except the worst.
    pub fn centroid(&self) -> Vec<f64> {
        let d = self.dim();
        let mut c = vec![0.0; d];
        for v in &self.vertices[..d] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        c.iter_mut().for_each(|ci| *ci /= d as f64);
        c
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(distance(a, b));
            }
        }
        best
    }

    /// Largest value gap to the best vertex.
    pub fn spread(&self) -> f64 {
        let f1 = self.values[0];
        self.values[1..]
            .iter()
            .map(|f| (f - f1).abs())
            .fold(0.0, f64::max)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// `x0` plus one offset of `step_fraction * width` per coordinate, kept inside the box.
pub fn init_simplex(x0: &[f64], dom: &Domain, step_fraction: f64) -> Result<Vec<Vec<f64>>> {
    if !(step_fraction > 0.0 && step_fraction <= 0.5) {
        return Err(DfoError::InvalidArgument(format!(
            "step fraction must lie in (0, 0.5], got {step_fraction}"
        )));
    }
    let steps: Vec<f64> = (0..dom.dim()).map(|i| step_fraction * dom.width(i)).collect();
    axis_simplex(x0, dom, &steps)
}

fn axis_simplex(x0: &[f64], dom: &Domain, steps: &[f64]) -> Result<Vec<Vec<f64>>> {
    let x0 = dom.reflect(x0)?;
    let mut vertices = vec![x0.clone()];
    for (i, &h) in steps.iter().enumerate() {
        let mut v = x0.clone();
        // a fold back onto x0[i] would flatten the simplex, so step the other way first
        v[i] = if x0[i] + h <= dom.upper()[i] || x0[i] - h < dom.lower()[i] {
            x0[i] + h
        } else {
            x0[i] - h
        };
        vertices.push(dom.reflect(&v)?);
    }
    Ok(vertices)
}

/// One reflection / expansion / contraction / shrink move. Keeps `s` ranked.
pub fn nm_step(s: &mut Simplex, h: &mut ObjectiveHandle, dom: &Domain) -> StepKind {
    debug_assert!(s.is_sorted());
    let d = s.dim();
    let centroid = s.centroid();
    let worst = s.vertices[d].clone();
    let (f_best, f_second, f_worst) = (s.values[0], s.values[d - 1], s.values[d]);

    let eval = |h: &mut ObjectiveHandle, p: Vec<f64>| {
        let p = dom.reflect(&p).expect("simplex dimension");
        let f = h.evaluate(&p);
        (p, f)
    };

    let (xr, fr) = eval(h, affine(&centroid, &worst, -REFLECTION));
    let kind = if fr < f_best {
        let (xe, fe) = eval(h, affine(&centroid, &xr, EXPANSION));
        if fe < fr {
            s.replace_worst(xe, fe);
            StepKind::Expansion
        } else {
            s.replace_worst(xr, fr);
            StepKind::Reflection
        }
    } else if fr < f_second {
        s.replace_worst(xr, fr);
        StepKind::Reflection
    } else {
        let outside = fr < f_worst;
        let t = if outside { CONTRACTION } else { -CONTRACTION };
        let (xc, fc) = eval(h, affine(&centroid, &xr, t));
        let accepted = if outside { fc <= fr } else { fc < f_worst };
        if accepted {
            s.replace_worst(xc, fc);
            if outside {
                StepKind::OutsideContraction
            } else {
                StepKind::InsideContraction
            }
        } else {
            let best = s.vertices[0].clone();
            for i in 1..=d {
                let (p, f) = eval(h, affine(&best, &s.vertices[i], SHRINK));
                s.vertices[i] = p;
                s.values[i] = f;
            }
            StepKind::Shrink
        }
    };
    s.sort();
    kind
}

impl Simplex {
    fn replace_worst(&mut self, x: Vec<f64>, f: f64) {
        let d = self.dim();
        self.vertices[d] = x;
        self.values[d] = f;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadConfig {
    /// Value-spread tolerance.
    pub eps: f64,
    pub diameter_tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    /// Iterations without `restart_improvement_factor * eps` progress that trigger a restart.
    pub restart_window: usize,
    pub restart_improvement_factor: f64,
    pub max_restarts: usize,
    pub restart_scale: f64,
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            eps: 1e-12,
            diameter_tol: 1e-8,
            max_iters: 20_000,
            step_fraction: 0.1,
            restart_window: 30,
            restart_improvement_factor: 10.0,
            max_restarts: 3,
            restart_scale: 0.5,
            perturbation: 1e-6,
            seed: 0,
        }
    }
}

/// Run record plus the kind of every step and the restart iterations.
#[derive(Debug, Clone)]
pub struct NelderMeadOutcome {
    pub result: OptResult,
    pub steps: Vec<StepKind>,
    pub restarts: Vec<usize>,
    pub final_simplex: Simplex,
}

fn restart_simplex(s: &Simplex, dom: &Domain, cfg: &NelderMeadConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let (best, _) = s.best();
    let d = s.dim();
    let steps: Vec<f64> = (0..d)
        .map(|i| {
            let edge = s
                .vertices
                .iter()
                .map(|v| (v[i] - best[i]).abs())
                .fold(0.0, f64::max);
            (cfg.restart_scale * edge).max(cfg.diameter_tol)
        })
        .collect();
    let mut vertices = axis_simplex(best, dom, &steps)?;
    for v in vertices.iter_mut().skip(1) {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += cfg.perturbation * dom.width(i) * rng.random_range(-1.0..=1.0);
        }
        *v = dom.reflect(v)?;
    }
    Ok(vertices)
}

pub fn nm_run(
    h: &mut ObjectiveHandle,
    dom: &Domain,
    x0: &[f64],
    cfg: &NelderMeadConfig,
) -> Result<NelderMeadOutcome> {
    let mark = h.mark();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Simplex::evaluate(init_simplex(x0, dom, cfg.step_fraction)?, h);
    let mut steps = Vec::new();
    let mut restarts = Vec::new();
    let mut reference = s.values[0];
    let mut last_progress = 0;
    let mut iter = 0;
    let termination = loop {
        if s.diameter() < cfg.diameter_tol || s.spread() < cfg.eps {
            break Termination::ToleranceMet;
        }
        if iter >= cfg.max_iters || h.exhausted() {
            break Termination::Budget;
        }
        steps.push(nm_step(&mut s, h, dom));
        iter += 1;
        if s.values[0] < reference - cfg.restart_improvement_factor * cfg.eps {
            reference = s.values[0];
            last_progress = iter;
        }
        if iter - last_progress >= cfg.restart_window {
            if restarts.len() >= cfg.max_restarts {
                break Termination::RestartExhausted;
            }
            let (best_x, best_f) = (s.vertices[0].clone(), s.values[0]);
            let mut vertices = restart_simplex(&s, dom, cfg, &mut rng)?;
            vertices.remove(0);
            let mut values: Vec<f64> = vertices.iter().map(|v| h.evaluate(v)).collect();
            vertices.insert(0, best_x);
            values.insert(0, best_f);
            s = Simplex::from_parts(vertices, values);
            restarts.push(iter);
            reference = s.values[0];
            last_progress = iter;
        }
    };
    Ok(NelderMeadOutcome {
        result: h.result_since(mark, iter, termination)?,
        steps,
        restarts,
        final_simplex: s,
    })
}

pub fn nm_minimize(h: &mut ObjectiveHandle, dom: &Domain, x0: &[f64], cfg: &NelderMeadConfig) -> Result<OptResult> {
    nm_run(h, dom, x0, cfg).map(|o| o.result)
}
