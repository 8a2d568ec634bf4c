//! One-dimensional minimization along a direction inside the step interval
//! allowed by the box.

use crate::domain::Domain;
use crate::objective::ObjectiveHandle;

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
pub const INV_PHI: f64 = 0.618_033_988_749_894_9;
const CGOLD: f64 = 1.0 - INV_PHI;
pub const MAX_LINE_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineSearchKind {
    #[default]
    Brent,
    GoldenSection,
}

/// Largest `[lambda_min, lambda_max]` with `x + lambda * d` inside `dom`.
pub fn bracket_lambda_bounds(x: &[f64], d: &[f64], dom: &Domain) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..x.len() {
        if d[i] == 0.0 {
            continue;
        }
        let a = (dom.lower()[i] - x[i]) / d[i];
        let b = (dom.upper()[i] - x[i]) / d[i];
        let (a, b) = if d[i] > 0.0 { (a, b) } else { (b, a) };
        lo = lo.max(a);
        hi = hi.min(b);
    }
    (lo.min(0.0), hi.max(0.0))
}

/// Restriction of the objective to the segment `base + lambda * direction`.
pub struct LineProblem<'a> {
    pub base: &'a [f64],
    pub direction: &'a [f64],
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub domain: &'a Domain,
    /// Known objective value at `lambda = 0`, if the caller has one.
    pub f_base: Option<f64>,
    pub objective: &'a mut ObjectiveHandle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineMin {
    pub lambda: f64,
    pub f: f64,
    pub point: Vec<f64>,
    pub evals: usize,
}

impl LineProblem<'_> {
    pub fn point(&self, lambda: f64) -> Vec<f64> {
        let raw: Vec<f64> = self
            .base
            .iter()
            .zip(self.direction)
            .map(|(b, d)| b + lambda * d)
            .collect();
        // roundoff can push a bound-touching step just outside the box
        self.domain.clip(&raw).expect("line problem dimension")
    }
}

/// Best-seen bookkeeping shared by both searches.
struct Probe<'p, 'a> {
    p: &'p mut LineProblem<'a>,
    best_lambda: f64,
    best_f: f64,
    evals: usize,
}

impl<'p, 'a> Probe<'p, 'a> {
    fn new(p: &'p mut LineProblem<'a>) -> Self {
        Self {
            p,
            best_lambda: f64::NAN,
            best_f: f64::INFINITY,
            evals: 0,
        }
    }

    fn note(&mut self, lambda: f64, f: f64) {
        if f < self.best_f || self.best_lambda.is_nan() {
            self.best_f = f;
            self.best_lambda = lambda;
        }
    }

    fn eval(&mut self, lambda: f64) -> f64 {
        let lambda = lambda.clamp(self.p.lambda_min, self.p.lambda_max);
        let x = self.p.point(lambda);
        let f = self.p.objective.evaluate(&x);
        self.evals += 1;
        self.note(lambda, f);
        f
    }

    /// Evaluates both endpoints and an interior anchor (0 when interior,
    /// else the midpoint) and returns `(a, fa, c, fc, b, fb)`.
    fn sweep(&mut self) -> (f64, f64, f64, f64, f64, f64) {
        let (a, b) = (self.p.lambda_min, self.p.lambda_max);
        let fa = self.eval(a);
        let fb = self.eval(b);
        let (c, fc) = if a < 0.0 && b > 0.0 {
            match self.p.f_base {
                Some(f0) => {
                    self.note(0.0, f0);
                    (0.0, f0)
                }
                None => (0.0, self.eval(0.0)),
            }
        } else {
            if let (Some(f0), true) = (self.p.f_base, a == 0.0 || b == 0.0) {
                self.note(0.0, f0);
            }
            let m = 0.5 * (a + b);
            (m, self.eval(m))
        };
        (a, fa, c, fc, b, fb)
    }

    fn finish(self) -> LineMin {
        let point = self.p.point(self.best_lambda);
        LineMin {
            lambda: self.best_lambda,
            f: self.best_f,
            point,
            evals: self.evals,
        }
    }
}

/// Golden-section refinement of the interval `[lambda_min, lambda_max]`.
///
/// Stops when the two interior values differ by less than `eps` or the
/// interval width falls below `eps * max(1, |a| + |b|)`.
pub fn golden_section(p: &mut LineProblem<'_>, eps: f64) -> LineMin {
    let mut probe = Probe::new(p);
    if probe.p.lambda_max <= probe.p.lambda_min {
        probe.eval(probe.p.lambda_min);
        return probe.finish();
    }
    probe.sweep();
    let (mut a, mut b) = (probe.p.lambda_min, probe.p.lambda_max);
    let mut x1 = a + (1.0 - INV_PHI) * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = probe.eval(x1);
    let mut f2 = probe.eval(x2);
    for _ in 0..MAX_LINE_ITERATIONS {
        if (f1 - f2).abs() < eps || (b - a) < eps * (a.abs() + b.abs()).max(1.0) {
            break;
        }
        if f2 > f1 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + (1.0 - INV_PHI) * (b - a);
            f1 = probe.eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = probe.eval(x2);
        }
    }
    probe.finish()
}

/// Brent's parabolic-interpolation / golden-section hybrid.
///
/// `eps` is the absolute floor of the abscissa tolerance; the relative part
/// is `sqrt(machine epsilon)`.
pub fn brent(p: &mut LineProblem<'_>, eps: f64) -> LineMin {
    let mut probe = Probe::new(p);
    if probe.p.lambda_max <= probe.p.lambda_min {
        probe.eval(probe.p.lambda_min);
        return probe.finish();
    }
    let (a, fa, c, fc, b, fb) = probe.sweep();
    let (lo, hi, x0, fx0) = if fc <= fa && fc <= fb {
        (a, b, c, fc)
    } else if fa < fb {
        let x = a + CGOLD * (c - a);
        (a, c, x, probe.eval(x))
    } else {
        let x = c + INV_PHI * (b - c);
        (c, b, x, probe.eval(x))
    };
    brent_core(&mut probe, lo, hi, x0, fx0, eps.max(f64::MIN_POSITIVE));
    probe.finish()
}

fn brent_core(probe: &mut Probe<'_, '_>, mut a: f64, mut b: f64, x0: f64, fx0: f64, atol: f64) {
    let rtol = f64::EPSILON.sqrt();
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..MAX_LINE_ITERATIONS {
        let xm = 0.5 * (a + b);
        let tol1 = rtol * x.abs() + atol;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut pp = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                pp = -pp;
            }
            q = q.abs();
            let etemp = e;
            if !(pp.abs() >= (0.5 * q * etemp).abs() || pp <= q * (a - x) || pp >= q * (b - x)) {
                e = d;
                d = pp / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = probe.eval(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
}

pub fn line_minimize(kind: LineSearchKind, p: &mut LineProblem<'_>, eps: f64) -> LineMin {
    match kind {
        LineSearchKind::Brent => brent(p, eps),
        LineSearchKind::GoldenSection => golden_section(p, eps),
    }
}
