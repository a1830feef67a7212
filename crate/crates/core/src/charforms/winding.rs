//! Winding number of the determinant along a closed loop of invertible
//! matrices.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::CMat;

/// Largest allowed gap between the first and last sample of a loop.
pub const CLOSURE_TOL: f64 = 1e-9;
/// Determinants smaller than this are treated as zero.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindingError {
    #[error("a loop needs at least two samples")]
    TooShort,
    #[error("samples must be square matrices of one size (sample {index} is {rows}x{cols})")]
    Shape { index: usize, rows: usize, cols: usize },
    #[error("loop is not closed: first and last samples differ by {gap:.3e}")]
    NotClosed { gap: f64 },
    #[error("determinant vanishes at sample {index} (|det| = {modulus:.3e})")]
    Singular { index: usize, modulus: f64 },
    #[error("argument jumps by {jump:.3} rad between samples {index} and {next}; refine the sampling")]
    UnderSampled { index: usize, next: usize, jump: f64 },
}

/// Winding number of `det` along `samples`, whose last entry must repeat the
/// first. Consecutive samples must differ in argument by less than `π`.
pub fn winding_number(samples: &[CMat]) -> Result<i64, WindingError> {
    if samples.len() < 2 {
        return Err(WindingError::TooShort);
    }
    let n = samples[0].nrows();
    for (index, m) in samples.iter().enumerate() {
        if m.nrows() != n || m.ncols() != n || n == 0 {
            return Err(WindingError::Shape { index, rows: m.nrows(), cols: m.ncols() });
        }
    }
    let gap = (samples.last().expect("len ≥ 2") - &samples[0]).norm();
    if gap > CLOSURE_TOL {
        return Err(WindingError::NotClosed { gap });
    }
    let dets = samples
        .iter()
        .enumerate()
        .map(|(index, m)| {
            let d = m.determinant();
            if d.norm() < SINGULAR_TOL {
                Err(WindingError::Singular { index, modulus: d.norm() })
            } else {
                Ok(d)
            }
        })
        .collect::<Result<Vec<Complex64>, _>>()?;
    let mut total = 0.0;
    for (index, w) in dets.windows(2).enumerate() {
        let jump = (w[1] / w[0]).arg();
        if jump.abs() >= PI * (1.0 - 1e-9) {
            return Err(WindingError::UnderSampled { index, next: index + 1, jump });
        }
        total += jump;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Samples `f` at `t = k/n` for `k = 0..=n`, closing the loop exactly by
/// reusing the first sample at the end.
pub fn sample_loop(n: usize, f: impl Fn(f64) -> CMat) -> Vec<CMat> {
    let mut out: Vec<CMat> = (0..n).map(|k| f(k as f64 / n as f64)).collect();
    if let Some(first) = out.first().cloned() {
        out.push(first);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_diag;

    #[test]
    fn phase_loops() {
        for k in -3i64..=3 {
            let l = sample_loop(64, |t| phase_diag(&[k as f64 * t]));
            assert_eq!(winding_number(&l).unwrap(), k);
        }
        let l = sample_loop(64, |t| phase_diag(&[2.0 * t, 5.0 * t, -t]));
        assert_eq!(winding_number(&l).unwrap(), 6);
    }

    #[test]
    fn failure_modes() {
        assert_eq!(winding_number(&[]), Err(WindingError::TooShort));
        let open: Vec<CMat> = (0..=8).map(|k| phase_diag(&[k as f64 / 16.0])).collect();
        assert!(matches!(winding_number(&open), Err(WindingError::NotClosed { .. })));
        let z = CMat::zeros(1, 1);
        assert!(matches!(winding_number(&[z.clone(), z]), Err(WindingError::Singular { .. })));
        // half-turn steps are ambiguous
        let coarse = sample_loop(2, |t| phase_diag(&[t]));
        assert!(matches!(winding_number(&coarse), Err(WindingError::UnderSampled { .. })));
        let mixed = vec![CMat::identity(1, 1), CMat::identity(2, 2)];
        assert!(matches!(winding_number(&mixed), Err(WindingError::Shape { .. })));
    }
}
