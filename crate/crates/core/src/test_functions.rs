//! Benchmark objectives.

use crate::error::{DfoError, Result};

fn check_psf_dim(d: usize) -> Result<()> {
    if d == 0 || d % 4 != 0 {
        return Err(DfoError::InvalidArgument(format!(
            "Powell singular function needs a positive multiple of 4 variables, got {d}"
        )));
    }
    Ok(())
}

/// Block-wise D-dimensional Powell singular function.
pub fn powell_singular(x: &[f64]) -> Result<f64> {
    check_psf_dim(x.len())?;
    Ok(x.chunks_exact(4)
        .map(|b| {
            let (x1, x2, x3, x4) = (b[0], b[1], b[2], b[3]);
            (x1 + 10.0 * x2).powi(2)
                + 5.0 * (x3 - x4).powi(2)
                + (x2 - x3).powi(4)
                + 10.0 * (x1 - x4).powi(4)
        })
        .sum())
}

/// `(3, -1, 0, 1)` repeated `d / 4` times.
pub fn psf_standard_start(d: usize) -> Result<Vec<f64>> {
    check_psf_dim(d)?;
    Ok([3.0, -1.0, 0.0, 1.0].repeat(d / 4))
}

pub const PSF_DEFAULT_LOWER: f64 = -4.0;
pub const PSF_DEFAULT_UPPER: f64 = 5.0;
