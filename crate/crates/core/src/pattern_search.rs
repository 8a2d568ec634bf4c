//! Coordinate / compass / star pattern search with opportunistic polling,
//! cached evaluations, step schedules, acceleration and a single restart.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::domain::Domain;
use crate::error::{DfoError, Result};
use crate::objective::{ObjectiveHandle, OptResult, Termination, DEFAULT_CACHE_RESOLUTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PatternKind {
    Coordinate,
    #[default]
    Compass,
    Star,
}

impl FromStr for PatternKind {
    type Err = DfoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coordinate" => Ok(Self::Coordinate),
            "compass" => Ok(Self::Compass),
            "star" => Ok(Self::Star),
            other => Err(DfoError::InvalidArgument(format!("unknown pattern '{other}'"))),
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Coordinate => "coordinate",
            Self::Compass => "compass",
            Self::Star => "star",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub kind: PatternKind,
    pub directions: Vec<Vec<f64>>,
}

fn unit(d: usize, i: usize, sign: f64) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = sign;
    e
}

pub fn make_pattern(kind: PatternKind, d: usize) -> Pattern {
    assert!(d >= 1);
    let mut directions = Vec::new();
    match kind {
        PatternKind::Coordinate => directions.extend((0..d).map(|i| unit(d, i, 1.0))),
        PatternKind::Compass | PatternKind::Star => {
            for i in 0..d {
                directions.push(unit(d, i, 1.0));
                directions.push(unit(d, i, -1.0));
            }
        }
    }
    if kind == PatternKind::Star {
        let s = 0.5f64.sqrt();
        for i in 0..d {
            for j in 0..i {
                for sign in [1.0, -1.0] {
                    let mut v = vec![0.0; d];
                    v[i] = s;
                    v[j] = sign * s;
                    directions.push(v);
                }
            }
        }
    }
    Pattern { kind, directions }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsState {
    pub current_x: Vec<f64>,
    pub current_f: f64,
    pub step: f64,
    pub consecutive_successes: usize,
    pub consecutive_failures: usize,
    pub last_success_direction: Option<usize>,
    pub accel_factor: f64,
    pub restart_used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollOutcome {
    pub improved: bool,
    pub x: Vec<f64>,
    pub f: f64,
    /// Index into the pattern of the accepted direction.
    pub direction: Option<usize>,
    pub trials: usize,
}

fn trial_point(x: &[f64], step: f64, d: &[f64], dom: &Domain) -> Vec<f64> {
    let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
    dom.clip(&y).expect("pattern dimension")
}

/// Polls the trial set around `state.current_x`.
///
/// The last successful direction goes first and short-circuits on success;
/// otherwise every remaining direction is tried and the best improving trial wins.
pub fn poll(state: &PsState, pattern: &Pattern, h: &mut ObjectiveHandle, dom: &Domain) -> PollOutcome {
    let mut trials = 0;
    if let Some(k) = state.last_success_direction {
        let y = trial_point(&state.current_x, state.step, &pattern.directions[k], dom);
        let fy = h.evaluate(&y);
        trials += 1;
        if fy < state.current_f {
            return PollOutcome {
                improved: true,
                x: y,
                f: fy,
                direction: Some(k),
                trials,
            };
        }
    }
    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for (k, d) in pattern.directions.iter().enumerate() {
        if Some(k) == state.last_success_direction {
            continue;
        }
        let y = trial_point(&state.current_x, state.step, d, dom);
        let fy = h.evaluate(&y);
        trials += 1;
        if fy < state.current_f && best.as_ref().is_none_or(|b| fy < b.2) {
            best = Some((k, y, fy));
        }
    }
    match best {
        Some((k, x, f)) => PollOutcome {
            improved: true,
            x,
            f,
            direction: Some(k),
            trials,
        },
        None => PollOutcome {
            improved: false,
            x: state.current_x.clone(),
            f: state.current_f,
            direction: None,
            trials,
        },
    }
}

pub const EXPAND_AFTER_STREAK: f64 = 5.0;
pub const EXPAND: f64 = 3.0;
pub const CONTRACT: [f64; 3] = [0.6, 0.3, 0.1];
pub const ACCEL_INIT: f64 = 3.0;
pub const ACCEL_GROW: f64 = 1.8;
pub const ACCEL_DECAY: f64 = 0.7;
pub const ACCEL_MIN: f64 = 2.5;
pub const ACCEL_MAX: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSearchConfig {
    pub pattern: PatternKind,
    /// Initial step; `None` means a quarter of the narrowest box width.
    pub step0: Option<f64>,
    pub eps: f64,
    pub eps_min: f64,
    pub max_iters: usize,
    pub max_accel_steps: usize,
    pub max_consecutive_failures: usize,
    pub max_iters_without_improvement: usize,
    pub progress_window: usize,
    /// Relative best-value decrease over the window below which progress has stalled.
    pub min_progress: f64,
    pub restart_step_fraction: f64,
    pub cache: bool,
}

impl Default for PatternSearchConfig {
    fn default() -> Self {
        Self {
            pattern: PatternKind::Compass,
            step0: None,
            eps: 1e-12,
            eps_min: 1e-10,
            max_iters: 100_000,
            max_accel_steps: 3,
            max_consecutive_failures: 4,
            max_iters_without_improvement: 10,
            progress_window: 25,
            min_progress: 1e-12,
            restart_step_fraction: 0.2,
            cache: true,
        }
    }
}

/// Every change applied to the step length, in order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepChange {
    Multiply(f64),
    Restart(f64),
}

#[derive(Debug, Clone)]
pub struct PatternSearchOutcome {
    pub result: OptResult,
    pub step_ledger: Vec<StepChange>,
    pub steps: Vec<f64>,
    pub polled_trials: usize,
    pub restarted_at: Option<usize>,
}

fn accelerate(
    state: &mut PsState,
    from: &[f64],
    h: &mut ObjectiveHandle,
    dom: &Domain,
    max_steps: usize,
) -> f64 {
    let d: Vec<f64> = state.current_x.iter().zip(from).map(|(a, b)| a - b).collect();
    let mut gained = 0.0;
    for _ in 0..max_steps {
        let z = trial_point(&state.current_x, state.accel_factor, &d, dom);
        let fz = h.evaluate(&z);
        if fz < state.current_f {
            gained += state.current_f - fz;
            state.current_x = z;
            state.current_f = fz;
            state.accel_factor = (state.accel_factor * ACCEL_GROW).clamp(ACCEL_MIN, ACCEL_MAX);
        } else {
            state.accel_factor = (state.accel_factor * ACCEL_DECAY).clamp(ACCEL_MIN, ACCEL_MAX);
            break;
        }
    }
    gained
}

pub fn ps_run(
    h: &mut ObjectiveHandle,
    dom: &Domain,
    x0: &[f64],
    cfg: &PatternSearchConfig,
) -> Result<PatternSearchOutcome> {
    let dim = dom.dim();
    let step0 = cfg
        .step0
        .unwrap_or_else(|| 0.25 * (0..dim).map(|i| dom.width(i)).fold(f64::INFINITY, f64::min));
    if !(step0 > 0.0) {
        return Err(DfoError::InvalidArgument("pattern search: step0 must be positive".into()));
    }
    if cfg.cache && !h.cache_enabled() {
        h.enable_cache(DEFAULT_CACHE_RESOLUTION);
    }
    let pattern = make_pattern(cfg.pattern, dim);
    let mark = h.mark();
    let x = dom.clip(x0)?;
    let fx = h.evaluate(&x);
    let mut state = PsState {
        current_x: x,
        current_f: fx,
        step: step0,
        consecutive_successes: 0,
        consecutive_failures: 0,
        last_success_direction: None,
        accel_factor: ACCEL_INIT,
        restart_used: false,
    };
    let mut ledger = Vec::new();
    let mut steps = vec![step0];
    let mut polled = 0;
    let mut recent_gains: VecDeque<f64> = VecDeque::new();
    let mut since_improvement = 0;
    let mut window_start_f = state.current_f;
    let mut restarted_at = None;
    let mut iter = 0;
    let termination = loop {
        if iter >= cfg.max_iters || h.exhausted() {
            break Termination::Budget;
        }
        if state.step < cfg.eps_min {
            break Termination::StepFloor;
        }
        let out = poll(&state, &pattern, h, dom);
        polled += out.trials;
        iter += 1;
        if out.improved {
            let from = std::mem::replace(&mut state.current_x, out.x);
            let mut gain = state.current_f - out.f;
            state.current_f = out.f;
            state.consecutive_successes += 1;
            state.consecutive_failures = 0;
            state.last_success_direction = out.direction;
            let gamma = if state.consecutive_successes >= 2 {
                EXPAND_AFTER_STREAK
            } else {
                EXPAND
            };
            state.step *= gamma;
            ledger.push(StepChange::Multiply(gamma));
            gain += accelerate(&mut state, &from, h, dom, cfg.max_accel_steps);
            since_improvement = 0;
            recent_gains.push_back(gain);
            if recent_gains.len() > 3 {
                recent_gains.pop_front();
            }
            if gain < 50.0 * cfg.eps {
                steps.push(state.step);
                break Termination::ToleranceMet;
            }
            if recent_gains.len() == 3 && recent_gains.iter().sum::<f64>() / 3.0 < 200.0 * cfg.eps {
                steps.push(state.step);
                break Termination::ToleranceMet;
            }
        } else {
            state.consecutive_failures += 1;
            state.consecutive_successes = 0;
            state.last_success_direction = None;
            let beta = CONTRACT[state.consecutive_failures.min(3) - 1];
            state.step *= beta;
            ledger.push(StepChange::Multiply(beta));
            since_improvement += 1;
        }
        steps.push(state.step);
        if state.consecutive_failures >= cfg.max_consecutive_failures
            || since_improvement >= cfg.max_iters_without_improvement
        {
            break Termination::Stagnation;
        }
        if iter % cfg.progress_window == 0 {
            let scale = window_start_f.abs().max(f64::MIN_POSITIVE);
            let stalled = (window_start_f - state.current_f) / scale < cfg.min_progress;
            window_start_f = state.current_f;
            if stalled {
                if state.restart_used {
                    break Termination::RestartExhausted;
                }
                state.restart_used = true;
                state.step = cfg.restart_step_fraction * step0;
                state.consecutive_failures = 0;
                state.consecutive_successes = 0;
                state.last_success_direction = None;
                since_improvement = 0;
                ledger.push(StepChange::Restart(state.step));
                steps.push(state.step);
                restarted_at = Some(iter);
            }
        }
    };
    Ok(PatternSearchOutcome {
        result: h.result_since(mark, iter, termination)?,
        step_ledger: ledger,
        steps,
        polled_trials: polled,
        restarted_at,
    })
}

pub fn ps_minimize(h: &mut ObjectiveHandle, dom: &Domain, x0: &[f64], cfg: &PatternSearchConfig) -> Result<OptResult> {
    ps_run(h, dom, x0, cfg).map(|o| o.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_functions::{powell_singular, psf_standard_start};

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn state(x: Vec<f64>, f: f64, step: f64) -> PsState {
        PsState {
            current_x: x,
            current_f: f,
            step,
            consecutive_successes: 0,
            consecutive_failures: 0,
            last_success_direction: None,
            accel_factor: ACCEL_INIT,
            restart_used: false,
        }
    }

    #[test]
    fn pattern_sizes() {
        assert_eq!(make_pattern(PatternKind::Coordinate, 2).directions, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let compass = make_pattern(PatternKind::Compass, 2).directions;
        assert_eq!(compass.len(), 4);
        assert!(compass.contains(&vec![-1.0, 0.0]) && compass.contains(&vec![0.0, -1.0]));
        let star = make_pattern(PatternKind::Star, 2).directions;
        assert_eq!(star.len(), 6);
        let s = 0.5f64.sqrt();
        assert!(star.contains(&vec![s, s]) && star.contains(&vec![-s, s]));
        for d in 1..6 {
            let star = make_pattern(PatternKind::Star, d);
            assert_eq!(star.directions.len(), 2 * d + d * (d - 1));
            assert!(star.directions.iter().all(|v| (v.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn poll_accepts_origin() {
        let dom = Domain::cube(2, -2.0, 2.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, sphere).with_cache(1e-10);
        let st = state(vec![1.0, 0.0], 1.0, 1.0);
        let out = poll(&st, &make_pattern(PatternKind::Compass, 2), &mut h, &dom);
        assert!(out.improved);
        assert_eq!(out.x, vec![0.0, 0.0]);
        let before = h.eval_count();
        poll(&st, &make_pattern(PatternKind::Compass, 2), &mut h, &dom);
        assert_eq!(h.eval_count(), before);
    }

    #[test]
    fn poll_without_improvement() {
        let dom = Domain::cube(2, -2.0, 2.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, sphere);
        let st = state(vec![0.0, 0.0], 0.0, 0.5);
        let out = poll(&st, &make_pattern(PatternKind::Compass, 2), &mut h, &dom);
        assert!(!out.improved);
        assert_eq!(out.x, vec![0.0, 0.0]);
        assert_eq!(out.trials, 4);
    }

    #[test]
    fn opportunistic_first_direction() {
        let dom = Domain::cube(2, -5.0, 5.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, |x| x[0]);
        let mut st = state(vec![0.0, 0.0], 0.0, 1.0);
        st.last_success_direction = Some(1);
        let out = poll(&st, &make_pattern(PatternKind::Compass, 2), &mut h, &dom);
        assert_eq!(out.trials, 1);
        assert_eq!(out.x, vec![-1.0, 0.0]);
    }

    #[test]
    fn first_failure_contracts_by_0_6() {
        let dom = Domain::cube(2, -2.0, 2.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, sphere);
        let cfg = PatternSearchConfig { step0: Some(1.0), ..Default::default() };
        let out = ps_run(&mut h, &dom, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(out.step_ledger[0], StepChange::Multiply(0.6));
        assert!((out.steps[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn sphere_converges_with_schedule() {
        let dom = Domain::cube(2, -2.0, 2.0).unwrap();
        let mut h = ObjectiveHandle::from_fn(2, sphere);
        let cfg = PatternSearchConfig { step0: Some(0.5), ..Default::default() };
        let out = ps_run(&mut h, &dom, &[1.0, 1.0], &cfg).unwrap();
        assert!(out.result.best_f < 1e-6, "{}", out.result.best_f);
        for c in &out.step_ledger {
            if let StepChange::Multiply(m) = c {
                assert!([5.0, 3.0, 0.6, 0.3, 0.1].contains(m));
            }
        }
        assert!(out.result.n_evals <= out.polled_trials + 1 + 3 * out.result.n_iterations);
    }

    #[test]
    fn psf4_band() {
        let dom = Domain::cube(4, -4.0, 5.0).unwrap();
        let mut h = ObjectiveHandle::new(4, powell_singular);
        let cfg = PatternSearchConfig { step0: Some(1.0), eps: 1e-8, ..Default::default() };
        let r = ps_minimize(&mut h, &dom, &psf_standard_start(4).unwrap(), &cfg).unwrap();
        assert!(r.best_f <= 5e-3, "{}", r.best_f);
        assert!(r.n_evals <= 5000);
    }
}
