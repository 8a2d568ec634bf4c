//! Run execution, reports and the table-reproduction suites.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::config::{
    BoundsSpec, ConfigError, MethodKind, MethodKnobs, ObjectiveSpec, RunConfig, StartSpec,
};
use crate::error::DfoError;
use crate::hfr::{hfr_handle, AtomSpec, BasisTemplate, ScfConfig};
use crate::nelder_mead::{nm_minimize, NelderMeadConfig};
use crate::objective::{ObjectiveHandle, OptResult, Termination, TraceEntry};
use crate::pattern_search::{ps_minimize, PatternSearchConfig};
use crate::powell::{powell_cd_minimize, PowellConfig};
use crate::rbf::{rbf_minimize, RbfConfig};
use crate::test_functions::powell_singular;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("objective construction failed: {0}")]
    Objective(DfoError),
    #[error("run failed: {0}")]
    Run(DfoError),
}

/// Builds the objective handle a config describes, with its budget applied.
pub fn build_objective(cfg: &RunConfig) -> Result<ObjectiveHandle, HarnessError> {
    let h = match &cfg.objective {
        ObjectiveSpec::Psf { dim } => ObjectiveHandle::new(*dim, powell_singular),
        ObjectiveSpec::Atom { z, electrons, basis } => {
            let atom = AtomSpec::new(*z, *electrons).map_err(HarnessError::Objective)?;
            hfr_handle(atom, basis.clone(), ScfConfig::default())
        }
    };
    Ok(match cfg.budget {
        Some(b) if cfg.method != MethodKind::Rbf => h.with_max_evals(b),
        _ => h,
    })
}

/// Runs the optimizer a config selects and returns its record.
pub fn solve(cfg: &RunConfig) -> Result<OptResult, HarnessError> {
    let dom = cfg.domain()?;
    let x0 = cfg.start_point(&dom)?;
    if let ObjectiveSpec::Atom { basis, .. } = &cfg.objective {
        basis.instantiate(&x0).map_err(HarnessError::Objective)?;
    }
    let mut h = build_objective(cfg)?;
    let k = &cfg.knobs;
    let r = match cfg.method {
        MethodKind::PowellCd => {
            let d = PowellConfig::default();
            let c = PowellConfig {
                eps: cfg.eps.unwrap_or(d.eps),
                max_cycles: k.max_cycles.unwrap_or(d.max_cycles),
                line_search: k.line_search.unwrap_or(d.line_search),
                ..d
            };
            powell_cd_minimize(&mut h, &dom, &x0, &c)
        }
        MethodKind::NelderMead => {
            let d = NelderMeadConfig::default();
            let c = NelderMeadConfig {
                eps: cfg.eps.unwrap_or(d.eps),
                max_iters: k.nm_max_iters.unwrap_or(d.max_iters),
                seed: cfg.seed,
                ..d
            };
            nm_minimize(&mut h, &dom, &x0, &c)
        }
        MethodKind::PatternSearch => {
            let d = PatternSearchConfig::default();
            let c = PatternSearchConfig {
                eps: cfg.eps.unwrap_or(d.eps),
                pattern: k.ps_pattern.unwrap_or(d.pattern),
                step0: k.ps_step0.or(d.step0),
                ..d
            };
            ps_minimize(&mut h, &dom, &x0, &c)
        }
        MethodKind::Rbf => {
            let d = RbfConfig::default();
            let c = RbfConfig {
                budget: cfg.budget.unwrap_or(d.budget),
                eps: cfg.eps.unwrap_or(d.eps),
                seed: cfg.seed,
                kernel: k.rbf_kernel.unwrap_or(d.kernel),
                shape: k.rbf_shape.unwrap_or(d.shape),
                kernel_scale: k.rbf_kernel_scale.unwrap_or(d.kernel_scale),
                scale_factor: k.rbf_scale_factor.unwrap_or(d.scale_factor),
                value_offset: k.rbf_value_offset.unwrap_or(d.value_offset),
                ..d
            };
            rbf_minimize(&mut h, &dom, &x0, &c)
        }
    };
    r.map_err(HarnessError::Run)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: BTreeMap<String, String>,
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub n_evals: usize,
    pub n_iterations: usize,
    pub termination: Termination,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<String>,
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
}

/// [`solve`] plus wall-clock timing, packaged as a report.
pub fn execute(cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    let t0 = Instant::now();
    let r = solve(cfg)?;
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.to_pairs(),
        best_x: r.best_x,
        best_f: r.best_f,
        n_evals: r.n_evals,
        n_iterations: r.n_iterations,
        termination: r.termination,
        wall_seconds: t0.elapsed().as_secs_f64(),
        trace_csv: None,
        trace: r.trace,
    })
}

/// Writes the trace as CSV: `eval_index, f, best_f, x_1 … x_D`, reals at 17 significant digits.
pub fn trace_csv(trace: &[TraceEntry], dim: usize) -> String {
    let mut s = String::from("eval_index,f,best_f");
    for i in 1..=dim {
        let _ = write!(s, ",x_{i}");
    }
    s.push('\n');
    for e in trace {
        let _ = write!(s, "{},{:.16e},{:.16e}", e.eval_index, e.f, e.best_f);
        for v in &e.x {
            let _ = write!(s, ",{v:.16e}");
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub system: String,
    pub config: RunConfig,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub name: &'static str,
    pub description: &'static str,
    pub rows: Vec<SuiteRow>,
}

pub const SUITE_NAMES: [&str; 6] = ["table1", "table2", "table3", "table4", "table5", "be8"];

/// Tabulated He-like optimum: (system, Z, n*, ζ, energy).
const HE_LIKE: [(&str, u32, f64, f64, f64); 5] = [
    ("He", 2, 0.9550573500, 1.6117248872, -2.854208497026550),
    ("Be2+", 4, 0.9784934043, 3.6082084680, -13.604334135332267),
    ("C4+", 6, 0.9858696336, 5.6071394357, -32.354371286985264),
    ("O6+", 8, 0.9894789476, 7.6066226672, -59.104389071493892),
    ("Ne8+", 10, 0.9916197334, 9.6063182238, -93.854399499965326),
];

/// Tabulated Be-like optimum: (system, Z, [n*, ζ₁, ζ₂], energy).
const BE_LIKE: [(&str, u32, [f64; 3], f64); 2] = [
    ("Be", 4, [0.9803063847, 3.6087056957, 0.9473972495], -14.562399517417480),
    ("C2+", 6, [0.9895707721, 5.6007251515, 1.8217449374], -36.374066486897977),
];

/// Extended Be-like basis (1s 1s 2s 2s 2s): tabulated exponents and energy.
const EXTENDED: [(&str, u32, [f64; 5], f64); 2] = [
    ("Be", 4, [3.4778022946, 6.3867400706, 1.3606507114, 2.8047191207, 0.8645023072], -14.5730203),
    ("C2+", 6, [5.4541209833, 9.7125564222, 2.9781320121, 4.3925525106, 1.9152191696], -36.40849161167),
];

/// Eight-exponent Be run: (ζ_min, ζ_max) per function, seven 1s and one 2s.
pub const BE8_BOUNDS: [(f64, f64); 8] = [
    (9.512626, 15.854376),
    (6.754939, 9.456915),
    (3.864417, 6.440695),
    (3.086637, 3.858296),
    (1.762318, 2.937196),
    (1.054822, 1.758036),
    (0.524315, 1.048631),
    (0.410810, 1.232430),
];
pub const BE8_REFERENCE: f64 = -14.573023164;

fn method_eps(method: MethodKind, table: &str) -> f64 {
    use MethodKind::*;
    match (table, method) {
        ("table1" | "table2", PatternSearch) => 1e-8,
        ("table1" | "table2", _) => 1e-12,
        ("table3" | "table4", NelderMead) => 1e-8,
        ("table5", PowellCd) => 1e-8,
        _ => 1e-15,
    }
}

fn row_config(
    table: &str,
    method: MethodKind,
    system: &str,
    objective: ObjectiveSpec,
    bounds: BoundsSpec,
    start: StartSpec,
) -> RunConfig {
    RunConfig {
        label: format!("{table}/{system}/{method}"),
        method,
        objective,
        bounds,
        start,
        eps: Some(method_eps(method, table)),
        budget: (method == MethodKind::Rbf).then_some(600),
        seed: 0,
        knobs: MethodKnobs {
            ps_step0: (method == MethodKind::PatternSearch).then_some(1.0),
            ..Default::default()
        },
    }
}

fn psf_rows(table: &str, dim: usize) -> Vec<SuiteRow> {
    MethodKind::ALL
        .into_iter()
        .map(|m| SuiteRow {
            system: format!("PSF-{dim}D"),
            config: row_config(
                table,
                m,
                &format!("psf{dim}"),
                ObjectiveSpec::Psf { dim },
                BoundsSpec::Explicit { lower: vec![-4.0; dim], upper: vec![5.0; dim] },
                StartSpec::Standard,
            ),
            reference: 0.0,
        })
        .collect()
}

pub fn suite(name: &str) -> Option<Suite> {
    use MethodKind::*;
    let (description, rows) = match name {
        "table1" => ("singular function, D = 4, all methods", psf_rows(name, 4)),
        "table2" => ("singular function, D = 8, all methods", psf_rows(name, 8)),
        "table3" => {
            let mut rows = Vec::new();
            for (sys, z, n, zeta, e) in HE_LIKE {
                for m in MethodKind::ALL {
                    rows.push(SuiteRow {
                        system: sys.into(),
                        config: row_config(
                            name,
                            m,
                            sys,
                            ObjectiveSpec::Atom { z, electrons: 2, basis: BasisTemplate::NonInteger { shells: 1 } },
                            BoundsSpec::Reference(vec![n, zeta]),
                            StartSpec::Lower,
                        ),
                        reference: e,
                    });
                }
            }
            ("He-like ions, minimal n*-STO basis", rows)
        }
        "table4" => {
            let mut rows = Vec::new();
            for (sys, z, c, e) in BE_LIKE {
                for m in [PowellCd, NelderMead, PatternSearch] {
                    let mut config = row_config(
                        name,
                        m,
                        sys,
                        ObjectiveSpec::Atom { z, electrons: 4, basis: BasisTemplate::NonInteger { shells: 2 } },
                        BoundsSpec::Reference(c.to_vec()),
                        StartSpec::Lower,
                    );
                    if m == PatternSearch && z == 6 {
                        config.knobs.ps_step0 = Some(0.6);
                    }
                    rows.push(SuiteRow { system: sys.into(), config, reference: e });
                }
            }
            ("Be-like ions, minimal n*-STO basis with shells n*, n*+1", rows)
        }
        "table5" => {
            let mut rows = Vec::new();
            for (sys, z, c, e) in EXTENDED {
                for m in [PowellCd, NelderMead] {
                    rows.push(SuiteRow {
                        system: sys.into(),
                        config: row_config(
                            name,
                            m,
                            sys,
                            ObjectiveSpec::Atom {
                                z,
                                electrons: 4,
                                basis: BasisTemplate::Integer { principal: vec![1, 1, 2, 2, 2] },
                            },
                            BoundsSpec::Reference(c.to_vec()),
                            StartSpec::Lower,
                        ),
                        reference: e,
                    });
                }
            }
            ("Be-like ions, extended integer basis 1s 1s 2s 2s 2s", rows)
        }
        "be8" => {
            let mut config = row_config(
                name,
                NelderMead,
                "Be",
                ObjectiveSpec::Atom {
                    z: 4,
                    electrons: 4,
                    basis: BasisTemplate::Integer { principal: vec![1, 1, 1, 1, 1, 1, 1, 2] },
                },
                BoundsSpec::Explicit {
                    lower: BE8_BOUNDS.iter().map(|b| b.0).collect(),
                    upper: BE8_BOUNDS.iter().map(|b| b.1).collect(),
                },
                StartSpec::Lower,
            );
            config.knobs.nm_max_iters = Some(200_000);
            ("Be, eight exponents (seven 1s, one 2s)", vec![SuiteRow { system: "Be".into(), config, reference: BE8_REFERENCE }])
        }
        _ => return None,
    };
    Some(Suite { name: SUITE_NAMES.into_iter().find(|s| *s == name)?, description, rows })
}

impl Suite {
    /// Keeps rows of one method and overrides every seed when asked.
    pub fn filtered(mut self, method: Option<MethodKind>, seed: Option<u64>) -> Self {
        if let Some(m) = method {
            self.rows.retain(|r| r.config.method == m);
        }
        if let Some(s) = seed {
            for r in &mut self.rows {
                r.config.seed = s;
            }
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub row: SuiteRow,
    pub report: Result<RunReport, HarnessError>,
}

impl SuiteOutcome {
    pub fn abs_error(&self) -> Option<f64> {
        self.report.as_ref().ok().map(|r| (r.best_f - self.row.reference).abs())
    }
}

/// Runs every row, up to `threads` at a time; outcomes keep row order.
pub fn run_suite(suite: &Suite, threads: usize) -> Vec<SuiteOutcome> {
    let threads = threads.max(1);
    let mut reports: Vec<Option<Result<RunReport, HarnessError>>> = vec![None; suite.rows.len()];
    for (chunk_rows, chunk_out) in suite.rows.chunks(threads).zip(reports.chunks_mut(threads)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_rows.iter().map(|r| s.spawn(|| execute(&r.config))).collect();
            for (slot, h) in chunk_out.iter_mut().zip(handles) {
                *slot = Some(h.join().unwrap_or_else(|_| {
                    Err(HarnessError::Run(DfoError::InvalidArgument("run panicked".into())))
                }));
            }
        });
    }
    suite
        .rows
        .iter()
        .cloned()
        .zip(reports)
        .map(|(row, report)| SuiteOutcome { row, report: report.expect("every row runs") })
        .collect()
}

/// Fixed-width comparison table: method, system, N_f, E, reference, |ΔE|.
pub fn comparison_table(outcomes: &[SuiteOutcome]) -> String {
    let mut s = format!(
        "{:<15} {:<8} {:>7} {:>20} {:>20} {:>10}\n",
        "method", "system", "N_f", "E", "reference", "|dE|"
    );
    for o in outcomes {
        let m = o.row.config.method.name();
        match &o.report {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "{:<15} {:<8} {:>7} {:>20.12} {:>20.12} {:>10.3e}",
                    m,
                    o.row.system,
                    r.n_evals,
                    r.best_f,
                    o.row.reference,
                    (r.best_f - o.row.reference).abs()
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{:<15} {:<8} error: {e}", m, o.row.system);
            }
        }
    }
    s
}
