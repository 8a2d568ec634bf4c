//! Counted, cached, failure-tolerant objective wrapper and run records.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};

/// Value substituted for evaluations that fail or return a non-finite number.
pub const DEFAULT_PENALTY: f64 = 1.0e10;
/// Quantization step used for cache identifiers.
pub const DEFAULT_CACHE_RESOLUTION: f64 = 1e-10;

type Evaluator = Box<dyn Fn(&[f64]) -> Result<f64> + Send>;

/// Identifier of a point after rounding every coordinate to a multiple of the resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(Vec<i64>);

pub fn cache_key(x: &[f64], resolution: f64) -> CacheKey {
    debug_assert!(resolution > 0.0);
    CacheKey(x.iter().map(|&v| (v / resolution).round() as i64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ToleranceMet,
    StepFloor,
    Stagnation,
    Budget,
    RestartExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::ToleranceMet => "tolerance-met",
            Termination::StepFloor => "step-floor",
            Termination::Stagnation => "stagnation",
            Termination::Budget => "budget",
            Termination::RestartExhausted => "restart-exhausted",
        };
        f.write_str(s)
    }
}

/// One true evaluation of the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based index among the handle's true evaluations.
    pub eval_index: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub best_f: f64,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub n_evals: usize,
    pub n_iterations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

/// Position in a handle's history, used to slice out the evaluations of one run.
#[derive(Debug, Clone, Copy)]
pub struct Mark {
    trace_len: usize,
    evals: usize,
}

struct Cache {
    resolution: f64,
    values: HashMap<CacheKey, f64>,
}

pub struct ObjectiveHandle {
    dim: usize,
    evaluator: Evaluator,
    penalty: f64,
    eval_count: usize,
    cache_hits: usize,
    max_evals: Option<usize>,
    cache: Option<Cache>,
    trace: Vec<TraceEntry>,
}

impl fmt::Debug for ObjectiveHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveHandle")
            .field("dim", &self.dim)
            .field("penalty", &self.penalty)
            .field("eval_count", &self.eval_count)
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

impl ObjectiveHandle {
    pub fn new<F>(dim: usize, evaluator: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + 'static,
    {
        assert!(dim >= 1, "objective dimension must be positive");
        Self {
            dim,
            evaluator: Box::new(evaluator),
            penalty: DEFAULT_PENALTY,
            eval_count: 0,
            cache_hits: 0,
            max_evals: None,
            cache: None,
            trace: Vec::new(),
        }
    }

    /// Wraps an infallible function.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + 'static,
    {
        Self::new(dim, move |x| Ok(f(x)))
    }

    pub fn with_penalty(mut self, penalty: f64) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_cache(mut self, resolution: f64) -> Self {
        self.enable_cache(resolution);
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = Some(max_evals);
        self
    }

    pub fn enable_cache(&mut self, resolution: f64) {
        assert!(resolution > 0.0, "cache resolution must be positive");
        self.cache = Some(Cache {
            resolution,
            values: HashMap::new(),
        });
    }

    pub fn cache_enabled(&self) -> bool {
        self.cache.is_some()
    }

    pub fn disable_cache(&mut self) {
        self.cache = None;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn eval_count(&self) -> usize {
        self.eval_count
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    /// True once the evaluation budget, if any, is used up.
    pub fn exhausted(&self) -> bool {
        self.max_evals.is_some_and(|m| self.eval_count >= m)
    }

    pub fn remaining(&self) -> Option<usize> {
        self.max_evals.map(|m| m.saturating_sub(self.eval_count))
    }

    pub fn is_cached(&self, x: &[f64]) -> bool {
        self.cache
            .as_ref()
            .is_some_and(|c| c.values.contains_key(&cache_key(x, c.resolution)))
    }

    pub fn evaluate(&mut self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "point dimension does not match objective");
        let key = self.cache.as_ref().map(|c| cache_key(x, c.resolution));
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(&v) = cache.values.get(key) {
                self.cache_hits += 1;
                return v;
            }
        }
        let (value, failed) = match (self.evaluator)(x) {
            Ok(v) if v.is_finite() => (v, false),
            _ => (self.penalty, true),
        };
        self.eval_count += 1;
        let best_f = self
            .trace
            .last()
            .map_or(value, |e| e.best_f.min(value));
        self.trace.push(TraceEntry {
            eval_index: self.eval_count,
            x: x.to_vec(),
            f: value,
            best_f,
            failed,
        });
        if let (Some(cache), Some(key)) = (&mut self.cache, key) {
            cache.values.insert(key, value);
        }
        value
    }

    pub fn mark(&self) -> Mark {
        Mark {
            trace_len: self.trace.len(),
            evals: self.eval_count,
        }
    }

    /// Builds the result record of the evaluations performed since `mark`.
    pub fn result_since(
        &self,
        mark: Mark,
        n_iterations: usize,
        termination: Termination,
    ) -> Result<OptResult> {
        let trace = &self.trace[mark.trace_len..];
        let best = trace
            .iter()
            .fold(None::<&TraceEntry>, |acc, e| match acc {
                Some(b) if b.f <= e.f => Some(b),
                _ => Some(e),
            })
            .ok_or_else(|| DfoError::InvalidArgument("run performed no evaluations".into()))?;
        let mut running = f64::INFINITY;
        let trace = trace
            .iter()
            .map(|e| {
                running = running.min(e.f);
                TraceEntry {
                    best_f: running,
                    ..e.clone()
                }
            })
            .collect();
        Ok(OptResult {
            best_x: best.x.clone(),
            best_f: best.f,
            n_evals: self.eval_count - mark.evals,
            n_iterations,
            termination,
            trace,
        })
    }
}
