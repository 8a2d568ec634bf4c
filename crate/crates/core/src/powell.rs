//! Powell's conjugate-direction method with direction rotation, box-aware
//! line searches and early stopping.

use crate::domain::Domain;
use crate::error::{DfoError, Result};
use crate::line_search::{bracket_lambda_bounds, line_minimize, LineProblem, LineSearchKind};
use crate::objective::{ObjectiveHandle, OptResult, Termination};

const MIN_DIRECTION_NORM: f64 = 1e-14;

/// The working set of `D` search directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vec<f64>>,
}

impl DirectionSet {
    pub fn identity(dim: usize) -> Self {
        let directions = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self { directions }
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Drops the oldest direction and appends `d_new` scaled to unit length.
    ///
    /// A direction shorter than `1e-14` resets the set to the identity basis instead
    /// and the method returns `false`.
    pub fn rotate(&mut self, d_new: Vec<f64>) -> bool {
        if norm(&d_new) < MIN_DIRECTION_NORM {
            *self = Self::identity(self.len());
            return false;
        }
        let n = norm(&d_new);
        self.directions.remove(0);
        self.directions.push(d_new.into_iter().map(|v| v / n).collect());
        true
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowellConfig {
    /// Absolute change of the cycle-end objective that ends the run.
    pub eps: f64,
    pub max_cycles: usize,
    pub line_search: LineSearchKind,
    /// Cycles in a row with relative improvement below `early_stop_rel` before stopping.
    pub early_stop_patience: usize,
    pub early_stop_rel: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        Self {
            eps: 1e-12,
            max_cycles: 1000,
            line_search: LineSearchKind::Brent,
            early_stop_patience: 3,
            early_stop_rel: 1e-12,
        }
    }
}

impl PowellConfig {
    pub fn line_tolerance(&self) -> f64 {
        (self.eps / 10.0).max(1e-14)
    }
}

/// Run record plus the direction set at the end of every cycle.
#[derive(Debug, Clone)]
pub struct PowellOutcome {
    pub result: OptResult,
    pub direction_history: Vec<DirectionSet>,
}

fn search_along(
    h: &mut ObjectiveHandle,
    dom: &Domain,
    x: &mut Vec<f64>,
    fx: &mut f64,
    d: &[f64],
    cfg: &PowellConfig,
) {
    let (lambda_min, lambda_max) = bracket_lambda_bounds(x, d, dom);
    if lambda_max - lambda_min <= 0.0 {
        return;
    }
    let m = {
        let mut p = LineProblem {
            base: x,
            direction: d,
            lambda_min,
            lambda_max,
            domain: dom,
            f_base: Some(*fx),
            objective: h,
        };
        line_minimize(cfg.line_search, &mut p, cfg.line_tolerance())
    };
    if m.f < *fx {
        *x = m.point;
        *fx = m.f;
    }
}

pub fn powell_cd_run(
    h: &mut ObjectiveHandle,
    dom: &Domain,
    x0: &[f64],
    cfg: &PowellConfig,
) -> Result<PowellOutcome> {
    if !(cfg.eps > 0.0) || cfg.max_cycles == 0 {
        return Err(DfoError::InvalidArgument("powell: eps > 0 and max_cycles >= 1 required".into()));
    }
    let dim = dom.dim();
    let mark = h.mark();
    let mut x = dom.clip(x0)?;
    let mut fx = h.evaluate(&x);
    let mut dirs = DirectionSet::identity(dim);
    let mut history = Vec::new();
    let mut stagnant = 0;
    let mut cycles = 0;
    let termination = loop {
        if cycles >= cfg.max_cycles {
            break Termination::Budget;
        }
        if h.exhausted() {
            break Termination::Budget;
        }
        let f_prev = fx;
        let x_start = x.clone();
        let from_identity = dirs == DirectionSet::identity(dim);
        for i in 0..dim {
            let d = dirs.directions()[i].clone();
            search_along(h, dom, &mut x, &mut fx, &d, cfg);
        }
        let d_new: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        if dirs.rotate(d_new) {
            let d = dirs.directions()[dim - 1].clone();
            search_along(h, dom, &mut x, &mut fx, &d, cfg);
        }
        cycles += 1;
        history.push(dirs.clone());

        let change = (fx - f_prev).abs();
        if change <= cfg.eps {
            if from_identity {
                break Termination::ToleranceMet;
            }
            // accumulated directions may have lost rank; confirm on the coordinate basis
            dirs = DirectionSet::identity(dim);
            continue;
        }
        if change < cfg.early_stop_rel * fx.abs() {
            stagnant += 1;
            if stagnant >= cfg.early_stop_patience {
                break Termination::Stagnation;
            }
        } else {
            stagnant = 0;
        }
    };
    Ok(PowellOutcome {
        result: h.result_since(mark, cycles, termination)?,
        direction_history: history,
    })
}

pub fn powell_cd_minimize(
    h: &mut ObjectiveHandle,
    dom: &Domain,
    x0: &[f64],
    cfg: &PowellConfig,
) -> Result<OptResult> {
    powell_cd_run(h, dom, x0, cfg).map(|o| o.result)
}
