//! Declarative run configuration in a flat `key = value` text format with dotted sections.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::domain::Domain;
use crate::hfr::BasisTemplate;
use crate::line_search::LineSearchKind;
use crate::pattern_search::PatternKind;
use crate::rbf::{Kernel, KernelScale, ValueOffset};
use crate::test_functions::psf_standard_start;

/// Smallest admissible lower bound for a noninteger principal number.
pub const N_STAR_FLOOR: f64 = 0.51;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        Self { key: key.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    PowellCd,
    NelderMead,
    PatternSearch,
    Rbf,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] =
        [MethodKind::PowellCd, MethodKind::NelderMead, MethodKind::PatternSearch, MethodKind::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::PowellCd => "powell-cd",
            MethodKind::NelderMead => "nelder-mead",
            MethodKind::PatternSearch => "pattern-search",
            MethodKind::Rbf => "rbf",
        }
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Psf { dim: usize },
    Atom { z: u32, electrons: u32, basis: BasisTemplate },
}

impl ObjectiveSpec {
    pub fn dim(&self) -> usize {
        match self {
            ObjectiveSpec::Psf { dim } => *dim,
            ObjectiveSpec::Atom { basis, .. } => basis.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsSpec {
    Explicit { lower: Vec<f64>, upper: Vec<f64> },
    /// Box `(c/2, 3c/2)` around tabulated parameters `c`.
    Reference(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    Lower,
    /// The repeated (3, -1, 0, 1) point of the singular function.
    Standard,
    Point(Vec<f64>),
}

/// Method knobs; `None` keeps the optimizer default.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MethodKnobs {
    pub line_search: Option<LineSearchKind>,
    pub max_cycles: Option<usize>,
    pub nm_max_iters: Option<usize>,
    pub ps_pattern: Option<PatternKind>,
    pub ps_step0: Option<f64>,
    pub rbf_kernel: Option<Kernel>,
    pub rbf_shape: Option<f64>,
    pub rbf_kernel_scale: Option<KernelScale>,
    pub rbf_scale_factor: Option<f64>,
    pub rbf_value_offset: Option<ValueOffset>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub label: String,
    pub method: MethodKind,
    pub objective: ObjectiveSpec,
    pub bounds: BoundsSpec,
    pub start: StartSpec,
    pub eps: Option<f64>,
    pub budget: Option<usize>,
    pub seed: u64,
    pub knobs: MethodKnobs,
}

/// Bounds `(c/2, 3c/2)` for each tabulated value; the n* slot of a noninteger
/// template has its lower bound raised to [`N_STAR_FLOOR`].
pub fn reference_bounds(centre: &[f64], basis: Option<&BasisTemplate>) -> (Vec<f64>, Vec<f64>) {
    let mut lower: Vec<f64> = centre.iter().map(|c| c / 2.0).collect();
    let upper = centre.iter().map(|c| 1.5 * c).collect();
    if let (Some(BasisTemplate::NonInteger { .. }), Some(l)) = (basis, lower.first_mut()) {
        *l = l.max(N_STAR_FLOOR);
    }
    (lower, upper)
}

fn line_search_name(k: LineSearchKind) -> &'static str {
    match k {
        LineSearchKind::Brent => "brent",
        LineSearchKind::GoldenSection => "golden-section",
    }
}

fn parse_line_search(s: &str) -> Result<LineSearchKind, String> {
    match s {
        "brent" => Ok(LineSearchKind::Brent),
        "golden-section" => Ok(LineSearchKind::GoldenSection),
        _ => Err(format!("unknown line search `{s}`")),
    }
}

fn fmt_list<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| ConfigError::new(key, format!("cannot parse `{raw}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Vec<&str> = raw.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::new(key, "empty list entry"));
    }
    items.into_iter().map(|s| parse_value(key, s)).collect()
}

struct Pairs {
    map: BTreeMap<String, String>,
}

impl Pairs {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::new(key, "missing"))
    }

    fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.take(key).map(|raw| parse_value(key, &raw)).transpose()
    }
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment; every key must be known.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::new(line, format!("line {} has no `=`", lineno + 1)));
            };
            let (k, v) = (k.trim(), v.trim());
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::new(k, "duplicate key"));
            }
        }
        Self::from_pairs(map)
    }

    pub fn from_pairs(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut p = Pairs { map };
        let label = p.take("run.label").unwrap_or_default();
        let method = parse_value::<MethodKind>("method.name", &p.required("method.name")?)?;
        let eps = p.opt::<f64>("method.eps")?;
        if let Some(e) = eps {
            if !(e > 0.0) {
                return Err(ConfigError::new("method.eps", "must be positive"));
            }
        }
        let budget = p.opt::<usize>("method.budget")?;
        let seed = p.opt::<u64>("method.seed")?.unwrap_or(0);

        let objective = match p.required("objective.kind")?.as_str() {
            "psf" => {
                let dim = parse_value::<usize>("psf.dim", &p.required("psf.dim")?)?;
                if dim == 0 || dim % 4 != 0 {
                    return Err(ConfigError::new("psf.dim", "must be a positive multiple of 4"));
                }
                ObjectiveSpec::Psf { dim }
            }
            "atom" => {
                let z = parse_value::<u32>("atom.z", &p.required("atom.z")?)?;
                let electrons = parse_value::<u32>("atom.electrons", &p.required("atom.electrons")?)?;
                let basis = match p.required("basis.kind")?.as_str() {
                    "noninteger" => {
                        let shells = parse_value::<usize>("basis.shells", &p.required("basis.shells")?)?;
                        if shells == 0 {
                            return Err(ConfigError::new("basis.shells", "must be at least 1"));
                        }
                        BasisTemplate::NonInteger { shells }
                    }
                    "integer" => {
                        let principal = parse_list::<u32>("basis.principal", &p.required("basis.principal")?)?;
                        if principal.contains(&0) {
                            return Err(ConfigError::new("basis.principal", "principal numbers start at 1"));
                        }
                        BasisTemplate::Integer { principal }
                    }
                    other => return Err(ConfigError::new("basis.kind", format!("unknown basis kind `{other}`"))),
                };
                ObjectiveSpec::Atom { z, electrons, basis }
            }
            other => return Err(ConfigError::new("objective.kind", format!("unknown objective `{other}`"))),
        };
        let dim = objective.dim();

        let reference = p.take("bounds.reference");
        let lower = p.take("bounds.lower");
        let upper = p.take("bounds.upper");
        let bounds = match (reference, lower, upper) {
            (Some(r), None, None) => {
                let c = parse_list::<f64>("bounds.reference", &r)?;
                check_len("bounds.reference", &c, dim)?;
                if c.iter().any(|v| !(*v > 0.0)) {
                    return Err(ConfigError::new("bounds.reference", "entries must be positive"));
                }
                BoundsSpec::Reference(c)
            }
            (None, Some(l), Some(u)) => {
                let lower = parse_list::<f64>("bounds.lower", &l)?;
                let upper = parse_list::<f64>("bounds.upper", &u)?;
                check_len("bounds.lower", &lower, dim)?;
                check_len("bounds.upper", &upper, dim)?;
                if let Some(i) = (0..dim).find(|&i| !(lower[i] < upper[i])) {
                    return Err(ConfigError::new("bounds.upper", format!("entry {} not above its lower bound", i + 1)));
                }
                BoundsSpec::Explicit { lower, upper }
            }
            (Some(_), _, _) => return Err(ConfigError::new("bounds.reference", "conflicts with bounds.lower/upper")),
            (None, None, _) => return Err(ConfigError::new("bounds.lower", "missing")),
            (None, Some(_), None) => return Err(ConfigError::new("bounds.upper", "missing")),
        };

        let start = match p.take("start").as_deref() {
            None | Some("lower") => StartSpec::Lower,
            Some("standard") => {
                if !matches!(objective, ObjectiveSpec::Psf { .. }) {
                    return Err(ConfigError::new("start", "`standard` applies to the psf objective only"));
                }
                StartSpec::Standard
            }
            Some(raw) => {
                let x = parse_list::<f64>("start", raw)?;
                check_len("start", &x, dim)?;
                StartSpec::Point(x)
            }
        };

        let knobs = MethodKnobs {
            line_search: p
                .take("powell.line_search")
                .map(|s| parse_line_search(&s).map_err(|e| ConfigError::new("powell.line_search", e)))
                .transpose()?,
            max_cycles: p.opt("powell.max_cycles")?,
            nm_max_iters: p.opt("nm.max_iters")?,
            ps_pattern: p.opt("ps.pattern")?,
            ps_step0: p.opt("ps.step0")?,
            rbf_kernel: p.opt("rbf.kernel")?,
            rbf_shape: p.opt("rbf.shape")?,
            rbf_kernel_scale: p.opt("rbf.kernel_scale")?,
            rbf_scale_factor: p.opt("rbf.scale_factor")?,
            rbf_value_offset: p.opt("rbf.value_offset")?,
        };
        if let Some(key) = p.map.keys().next() {
            return Err(ConfigError::new(key, "unknown key"));
        }
        Ok(Self { label, method, objective, bounds, start, eps, budget, seed, knobs })
    }

    /// Canonical key/value form; `from_pairs(to_pairs())` reproduces `self`.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        if !self.label.is_empty() {
            put("run.label", self.label.clone());
        }
        put("method.name", self.method.to_string());
        if let Some(e) = self.eps {
            put("method.eps", e.to_string());
        }
        if let Some(b) = self.budget {
            put("method.budget", b.to_string());
        }
        put("method.seed", self.seed.to_string());
        match &self.objective {
            ObjectiveSpec::Psf { dim } => {
                put("objective.kind", "psf".into());
                put("psf.dim", dim.to_string());
            }
            ObjectiveSpec::Atom { z, electrons, basis } => {
                put("objective.kind", "atom".into());
                put("atom.z", z.to_string());
                put("atom.electrons", electrons.to_string());
                match basis {
                    BasisTemplate::NonInteger { shells } => {
                        put("basis.kind", "noninteger".into());
                        put("basis.shells", shells.to_string());
                    }
                    BasisTemplate::Integer { principal } => {
                        put("basis.kind", "integer".into());
                        put("basis.principal", fmt_list(principal));
                    }
                }
            }
        }
        match &self.bounds {
            BoundsSpec::Explicit { lower, upper } => {
                put("bounds.lower", fmt_list(lower));
                put("bounds.upper", fmt_list(upper));
            }
            BoundsSpec::Reference(c) => put("bounds.reference", fmt_list(c)),
        }
        put(
            "start",
            match &self.start {
                StartSpec::Lower => "lower".into(),
                StartSpec::Standard => "standard".into(),
                StartSpec::Point(x) => fmt_list(x),
            },
        );
        let k = &self.knobs;
        if let Some(v) = k.line_search {
            put("powell.line_search", line_search_name(v).into());
        }
        if let Some(v) = k.max_cycles {
            put("powell.max_cycles", v.to_string());
        }
        if let Some(v) = k.nm_max_iters {
            put("nm.max_iters", v.to_string());
        }
        if let Some(v) = k.ps_pattern {
            put("ps.pattern", v.to_string());
        }
        if let Some(v) = k.ps_step0 {
            put("ps.step0", v.to_string());
        }
        if let Some(v) = k.rbf_kernel {
            put("rbf.kernel", v.to_string());
        }
        if let Some(v) = k.rbf_shape {
            put("rbf.shape", v.to_string());
        }
        if let Some(v) = k.rbf_kernel_scale {
            put("rbf.kernel_scale", v.to_string());
        }
        if let Some(v) = k.rbf_scale_factor {
            put("rbf.scale_factor", v.to_string());
        }
        if let Some(v) = k.rbf_value_offset {
            put("rbf.value_offset", v.to_string());
        }
        m
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        let (lower, upper) = match &self.bounds {
            BoundsSpec::Explicit { lower, upper } => (lower.clone(), upper.clone()),
            BoundsSpec::Reference(c) => {
                let basis = match &self.objective {
                    ObjectiveSpec::Atom { basis, .. } => Some(basis),
                    ObjectiveSpec::Psf { .. } => None,
                };
                reference_bounds(c, basis)
            }
        };
        Domain::new(lower, upper).map_err(|e| ConfigError::new("bounds", e.to_string()))
    }

    pub fn start_point(&self, dom: &Domain) -> Result<Vec<f64>, ConfigError> {
        match &self.start {
            StartSpec::Lower => Ok(dom.lower().to_vec()),
            StartSpec::Standard => {
                psf_standard_start(self.dim()).map_err(|e| ConfigError::new("start", e.to_string()))
            }
            StartSpec::Point(x) => {
                if !dom.contains(x) {
                    return Err(ConfigError::new("start", "point lies outside the bounds"));
                }
                Ok(x.clone())
            }
        }
    }
}

fn check_len<T>(key: &str, v: &[T], dim: usize) -> Result<(), ConfigError> {
    if v.len() != dim {
        return Err(ConfigError::new(key, format!("expected {dim} entries, got {}", v.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HE: &str = "
        # helium, minimal noninteger basis
        method.name = nelder-mead
        method.eps = 1e-8
        objective.kind = atom
        atom.z = 2
        atom.electrons = 2
        basis.kind = noninteger
        basis.shells = 1
        bounds.reference = 0.95505735, 1.6117248872
    ";

    #[test]
    fn parses_atom_config() {
        let c = RunConfig::parse(HE).unwrap();
        assert_eq!(c.method, MethodKind::NelderMead);
        assert_eq!(c.eps, Some(1e-8));
        assert_eq!(c.start, StartSpec::Lower);
        assert_eq!(c.dim(), 2);
        let dom = c.domain().unwrap();
        assert_eq!(dom.lower(), &[N_STAR_FLOOR, 1.6117248872 / 2.0]);
        assert_eq!(c.start_point(&dom).unwrap(), dom.lower());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::parse(HE).unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let psf = "method.name = rbf\nobjective.kind = psf\npsf.dim = 4\nbounds.lower = -4, -4, -4, -4\n\
                   bounds.upper = 5,5,5,5\nstart = standard\nrbf.kernel = cubic\nrbf.kernel_scale = unit\nrbf.value_offset = none\n\
                   method.budget = 600\nmethod.seed = 7\nps.step0 = 0.6\npowell.line_search = golden-section";
        let c = RunConfig::parse(psf).unwrap();
        assert_eq!(RunConfig::from_pairs(c.to_pairs()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            (HE.replace("nelder-mead", "simulated-annealing"), "method.name"),
            (HE.replace("atom.z = 2", "atom.z = two"), "atom.z"),
            (format!("{HE}\nnm.colour = red"), "nm.colour"),
            (HE.replace("1.6117248872", "1.6, 2.0"), "bounds.reference"),
            (HE.replace("basis.shells = 1", ""), "basis.shells"),
            (format!("{HE}\nmethod.eps = 1"), "method.eps"),
            (HE.replace("1e-8", "-1"), "method.eps"),
            (format!("{HE}\nstart = standard"), "start"),
        ];
        for (text, key) in cases {
            let e = RunConfig::parse(&text).unwrap_err();
            assert_eq!(e.key, key, "{e}");
            assert!(e.to_string().contains(key));
        }
    }

    #[test]
    fn explicit_bounds_must_be_ordered() {
        let t = "method.name = powell-cd\nobjective.kind = psf\npsf.dim = 4\nbounds.lower = 0,0,0,0\nbounds.upper = 1,1,0,1";
        assert_eq!(RunConfig::parse(t).unwrap_err().key, "bounds.upper");
    }

    #[test]
    fn start_outside_bounds() {
        let t = "method.name = powell-cd\nobjective.kind = psf\npsf.dim = 4\nbounds.lower = 0,0,0,0\n\
                 bounds.upper = 1,1,1,1\nstart = 3,-1,0,1";
        let c = RunConfig::parse(t).unwrap();
        assert_eq!(c.start_point(&c.domain().unwrap()).unwrap_err().key, "start");
    }

    proptest! {
        #[test]
        fn reference_bounds_rule(zetas in prop::collection::vec(0.05f64..20.0, 1..8)) {
            let basis = BasisTemplate::Integer { principal: vec![1; zetas.len()] };
            let (lo, hi) = reference_bounds(&zetas, Some(&basis));
            for i in 0..zetas.len() {
                prop_assert_eq!(lo[i], zetas[i] / 2.0);
                prop_assert_eq!(hi[i], 1.5 * zetas[i]);
            }
        }

        #[test]
        fn round_trip_explicit(lo in prop::collection::vec(-10.0f64..0.0, 4), w in 0.1f64..5.0, seed: u64) {
            let hi: Vec<f64> = lo.iter().map(|v| v + w).collect();
            let c = RunConfig {
                label: "p".into(),
                method: MethodKind::PatternSearch,
                objective: ObjectiveSpec::Psf { dim: 4 },
                bounds: BoundsSpec::Explicit { lower: lo, upper: hi },
                start: StartSpec::Lower,
                eps: Some(1e-9),
                budget: None,
                seed,
                knobs: MethodKnobs { ps_step0: Some(w / 3.0), ..Default::default() },
            };
            prop_assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        }
    }
}
