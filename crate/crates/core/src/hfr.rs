//! Closed-shell Hartree-Fock-Roothaan SCF over s-type Slater bases.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{jacobi_eigensymmetric, lowdin_orthogonalization};
use crate::objective::{ObjectiveHandle, DEFAULT_PENALTY};
use crate::sto::{build_integral_tables, BasisSet, EriTensor, IntegralTables, StoFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSpec {
    z: u32,
    n_electrons: u32,
}

impl AtomSpec {
    pub fn new(z: u32, n_electrons: u32) -> Result<Self> {
        if z == 0 {
            return Err(DfoError::InvalidArgument("nuclear charge must be positive".into()));
        }
        if n_electrons == 0 || n_electrons % 2 != 0 {
            return Err(DfoError::InvalidArgument(format!(
                "closed shell needs a positive even electron count, got {n_electrons}"
            )));
        }
        Ok(Self { z, n_electrons })
    }

    pub fn z(&self) -> u32 {
        self.z
    }

    pub fn n_electrons(&self) -> u32 {
        self.n_electrons
    }

    pub fn n_occupied(&self) -> usize {
        (self.n_electrons / 2) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfConfig {
    pub max_iterations: usize,
    pub energy_tol: f64,
    pub density_tol: f64,
    pub damping: f64,
    /// Raise damping to `oscillation_damping` after the energy change flips sign this many times.
    pub oscillation_flips: usize,
    pub oscillation_damping: f64,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            energy_tol: 1e-12,
            density_tol: 1e-10,
            damping: 0.0,
            oscillation_flips: 3,
            oscillation_damping: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfState {
    pub coefficients: DMatrix<f64>,
    pub orbital_energies: Vec<f64>,
    pub density: DMatrix<f64>,
    pub energy: f64,
    pub iteration: usize,
    pub converged: bool,
    /// Largest difference between the quadruple-sum and trace energy forms seen.
    pub energy_form_gap: f64,
}

/// Coulomb and exchange matrices J[D]_pq = Σ D_rs (pq|rs), K[D]_pq = Σ D_rs (ps|rq).
pub fn coulomb_exchange(eri: &EriTensor, d: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = eri.dim();
    let mut j = DMatrix::zeros(m, m);
    let mut k = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            let (mut jv, mut kv) = (0.0, 0.0);
            for r in 0..m {
                for s in 0..m {
                    jv += d[(r, s)] * eri.get(p, q, r, s);
                    kv += d[(r, s)] * eri.get(p, s, r, q);
                }
            }
            j[(p, q)] = jv;
            k[(p, q)] = kv;
        }
    }
    (j, k)
}

/// E = Σ D_pq h_pq + ½ Σ D_pq D_rs [(pq|rs) − ½(ps|rq)].
pub fn energy_quadruple_sum(h: &DMatrix<f64>, eri: &EriTensor, d: &DMatrix<f64>) -> f64 {
    let m = eri.dim();
    let mut one = 0.0;
    let mut two = 0.0;
    for p in 0..m {
        for q in 0..m {
            one += d[(p, q)] * h[(p, q)];
            for r in 0..m {
                for s in 0..m {
                    two += d[(p, q)] * d[(r, s)] * (eri.get(p, q, r, s) - 0.5 * eri.get(p, s, r, q));
                }
            }
        }
    }
    one + 0.5 * two
}

/// E = Tr[D h] + ½ Tr[D (J − ½K)].
pub fn energy_trace(h: &DMatrix<f64>, j: &DMatrix<f64>, k: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let g = j - k * 0.5;
    (d * h).trace() + 0.5 * (d * g).trace()
}

fn occupied_density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    occ * occ.transpose() * 2.0
}

/// Orbitals of `f` in the orthogonal basis `x`, sorted by orbital energy.
fn diagonalize_fock(f: &DMatrix<f64>, x: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let fp = x.transpose() * f * x;
    let (eps, cp) = jacobi_eigensymmetric(&fp);
    (eps.iter().copied().collect(), x * cp)
}

pub fn scf_energy(atom: &AtomSpec, tables: &IntegralTables, cfg: &ScfConfig) -> Result<ScfState> {
    let m = tables.overlap.nrows();
    let n_occ = atom.n_occupied();
    if n_occ > m {
        return Err(DfoError::InvalidArgument(format!(
            "{n_occ} occupied orbitals exceed basis size {m}"
        )));
    }
    let x = lowdin_orthogonalization(&tables.overlap)?;
    let h = &tables.core;
    let (mut eps, mut c) = diagonalize_fock(h, &x);
    let mut d = occupied_density(&c, n_occ);
    let mut energy = f64::NAN;
    let mut last_delta = 0.0f64;
    let mut flips = 0;
    let mut damping = cfg.damping;
    let mut gap = 0.0f64;
    for iteration in 1..=cfg.max_iterations {
        let (j, k) = coulomb_exchange(&tables.eri, &d);
        let e_trace = energy_trace(h, &j, &k, &d);
        let e_sum = energy_quadruple_sum(h, &tables.eri, &d);
        gap = gap.max((e_trace - e_sum).abs());
        let delta = e_trace - energy;
        energy = e_trace;

        let f = h + &j - &k * 0.5;
        let (new_eps, new_c) = diagonalize_fock(&f, &x);
        let d_new = occupied_density(&new_c, n_occ);
        let d_next = if damping > 0.0 { &d_new * (1.0 - damping) + &d * damping } else { d_new };
        let d_change = (&d_next - &d).abs().max();
        eps = new_eps;
        c = new_c;
        d = d_next;

        if delta.is_finite() {
            if delta.abs() < cfg.energy_tol && d_change < cfg.density_tol {
                return Ok(ScfState {
                    coefficients: c,
                    orbital_energies: eps,
                    density: d,
                    energy,
                    iteration,
                    converged: true,
                    energy_form_gap: gap,
                });
            }
            if last_delta != 0.0 && delta != 0.0 && delta.signum() != last_delta.signum() {
                flips += 1;
                if flips >= cfg.oscillation_flips && damping < cfg.oscillation_damping {
                    damping = cfg.oscillation_damping;
                }
            }
            last_delta = delta;
        }
    }
    Ok(ScfState {
        coefficients: c,
        orbital_energies: eps,
        density: d,
        energy,
        iteration: cfg.max_iterations,
        converged: false,
        energy_form_gap: gap,
    })
}

/// How an optimization vector maps onto basis functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasisTemplate {
    /// x = (n*, ζ₁, …, ζ_k); function i has principal number n* + i.
    NonInteger { shells: usize },
    /// x = (ζ₁, …, ζ_k) with fixed principal numbers.
    Integer { principal: Vec<u32> },
}

impl BasisTemplate {
    pub fn dim(&self) -> usize {
        match self {
            BasisTemplate::NonInteger { shells } => shells + 1,
            BasisTemplate::Integer { principal } => principal.len(),
        }
    }

    pub fn instantiate(&self, x: &[f64]) -> Result<BasisSet> {
        if x.len() != self.dim() {
            return Err(DfoError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let functions = match self {
            BasisTemplate::NonInteger { .. } => x[1..]
                .iter()
                .enumerate()
                .map(|(i, &z)| StoFunction::new(x[0] + i as f64, z))
                .collect::<Result<Vec<_>>>()?,
            BasisTemplate::Integer { principal } => principal
                .iter()
                .zip(x)
                .map(|(&n, &z)| StoFunction::new(n as f64, z))
                .collect::<Result<Vec<_>>>()?,
        };
        BasisSet::new(functions, self.label())
    }

    pub fn label(&self) -> String {
        match self {
            BasisTemplate::NonInteger { shells } => format!("n*-sto x{shells}"),
            BasisTemplate::Integer { principal } => {
                principal.iter().map(|n| format!("{n}s")).collect::<Vec<_>>().join(" ")
            }
        }
    }
}

/// Full SCF for one parameter vector; errors on any failure, including non-convergence.
pub fn hfr_energy(atom: &AtomSpec, template: &BasisTemplate, x: &[f64], cfg: &ScfConfig) -> Result<ScfState> {
    let basis = template.instantiate(x)?;
    let tables = build_integral_tables(&basis, atom.z() as f64)?;
    let state = scf_energy(atom, &tables, cfg)?;
    if !state.converged {
        return Err(DfoError::ScfNotConverged(state.iteration));
    }
    Ok(state)
}

/// SCF energy at `x`, or the penalty value when anything fails.
pub fn hfr_objective(atom: &AtomSpec, template: &BasisTemplate, x: &[f64], cfg: &ScfConfig) -> f64 {
    match hfr_energy(atom, template, x, cfg) {
        Ok(s) if s.energy.is_finite() => s.energy,
        _ => DEFAULT_PENALTY,
    }
}

/// Objective handle evaluating the SCF energy; failures become the handle's penalty.
pub fn hfr_handle(atom: AtomSpec, template: BasisTemplate, cfg: ScfConfig) -> ObjectiveHandle {
    let dim = template.dim();
    ObjectiveHandle::new(dim, move |x| hfr_energy(&atom, &template, x, &cfg).map(|s| s.energy))
}
