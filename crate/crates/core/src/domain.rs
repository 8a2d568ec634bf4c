//! Box-constrained feasible sets and the two projection rules used by the
//! optimizers: clamping and triangle-wave reflection.

use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(DfoError::InvalidDomain("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(DfoError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(DfoError::InvalidDomain(format!("non-finite bound in coordinate {i}")));
            }
            if l == u {
                return Err(DfoError::ZeroWidth(i));
            }
            if l > u {
                return Err(DfoError::InvalidDomain(format!(
                    "lower bound {l} exceeds upper bound {u} in coordinate {i}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lower, upper]` in every coordinate.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(DfoError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn clip(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| v.max(l).min(u))
            .collect())
    }

    pub fn reflect(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| fold_triangle(v, l, u))
            .collect())
    }
}

/// Per-coordinate clamp into the box.
pub fn clip_to_bounds(x: &[f64], dom: &Domain) -> Result<Vec<f64>> {
    dom.clip(x)
}

/// Folds every coordinate into its interval with a period-`2(u - l)` triangle wave.
pub fn reflect_into_bounds(x: &[f64], dom: &Domain) -> Result<Vec<f64>> {
    dom.reflect(x)
}

fn fold_triangle(x: f64, l: f64, u: f64) -> f64 {
    if x >= l && x <= u {
        return x;
    }
    if !x.is_finite() {
        return if x > u { u } else { l };
    }
    let w = u - l;
    let period = 2.0 * w;
    let t = (x - l).rem_euclid(period);
    let folded = if t <= w { l + t } else { l + period - t };
    folded.max(l).min(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(d: usize) -> Domain {
        Domain::cube(d, 0.0, 1.0).unwrap()
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_to_bounds(&[0.5], &unit(1)).unwrap(), vec![0.5]);
        assert_eq!(clip_to_bounds(&[1.7], &unit(1)).unwrap(), vec![1.0]);
        assert_eq!(
            clip_to_bounds(&[-3.0, 0.2, 9.0], &unit(3)).unwrap(),
            vec![0.0, 0.2, 1.0]
        );
    }

    #[test]
    fn clip_dimension_mismatch() {
        assert!(matches!(
            clip_to_bounds(&[0.1, 0.2], &unit(1)),
            Err(DfoError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect_into_bounds(&[0.4], &unit(1)).unwrap(), vec![0.4]);
        assert!((reflect_into_bounds(&[1.25], &unit(1)).unwrap()[0] - 0.75).abs() < 1e-15);
        // -2.3 - 0 mod 2 = 1.7 > 1, so 0 + 2 - 1.7 = 0.3
        assert!((reflect_into_bounds(&[-2.3], &unit(1)).unwrap()[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn zero_width_rejected() {
        assert_eq!(Domain::new(vec![1.0], vec![1.0]), Err(DfoError::ZeroWidth(0)));
        assert!(Domain::new(vec![2.0], vec![1.0]).is_err());
        assert!(Domain::new(vec![f64::NAN], vec![1.0]).is_err());
        assert!(Domain::new(vec![], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn projections_idempotent(x in proptest::collection::vec(-50.0f64..50.0, 3),
                                  lo in -3.0f64..0.0, w in 0.1f64..4.0) {
            let dom = Domain::cube(3, lo, lo + w).unwrap();
            let c = dom.clip(&x).unwrap();
            prop_assert_eq!(dom.clip(&c).unwrap(), c.clone());
            let r = dom.reflect(&x).unwrap();
            prop_assert!(dom.contains(&r));
            prop_assert_eq!(dom.reflect(&r).unwrap(), r);
        }

        #[test]
        fn reflect_identity_inside(x in proptest::collection::vec(0.0f64..=1.0, 4)) {
            prop_assert_eq!(unit(4).reflect(&x).unwrap(), x);
        }
    }
}
