//! Connections sampled on a closed cubical grid over `[0,1]^d` and their
//! lattice curvature.
//!
//! Nodes sit at `k/N` for `k = 0..=N` along each axis, so the grid includes
//! both ends of every interval. Curvature is evaluated per cell from the
//! four corners of the cell in the relevant coordinate plane.
//!
//! Sign convention: for axes `(a, b)` the reported curvature is the
//! commutator `[D_b, D_a]` of covariant derivatives, that is
//! `∂_b A_a − ∂_a A_b + [A_b, A_a]`. With this convention the Poincaré
//! connection below has curvature `+2πi` and the Chern number
//! `(i/2π)∫ tr F` over its plane is `−1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{trace, CMat};

/// Largest allowed distance of a lattice Chern number from an integer.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs dimension ≥ 1 and resolution ≥ 1 (got dimension {dim}, resolution {resolution})")]
    BadShape { dim: usize, resolution: usize },
    #[error("expected {expected} samples per axis, axis {axis} has {got}")]
    SampleCount { axis: usize, expected: usize, got: usize },
    #[error("sample {node} on axis {axis} is {rows}x{cols}, expected {fiber}x{fiber}")]
    SampleShape { axis: usize, node: usize, rows: usize, cols: usize, fiber: usize },
    #[error("axes ({a}, {b}) do not span a plane of a {dim}-dimensional grid")]
    BadAxes { a: usize, b: usize, dim: usize },
    #[error("lattice Chern number {value} is {residual:.3e} away from an integer (resolution too coarse?)")]
    NotIntegral { value: f64, residual: f64 },
}

/// Connection one-form sampled at grid nodes: one `fiber × fiber`
/// skew-Hermitian matrix per axis and node.
#[derive(Debug, Clone)]
pub struct GridConnection {
    dim: usize,
    resolution: usize,
    fiber: usize,
    samples: Vec<Vec<CMat>>,
}

impl GridConnection {
    pub fn new(dim: usize, resolution: usize, fiber: usize, samples: Vec<Vec<CMat>>) -> Result<Self, GridError> {
        if dim == 0 || resolution == 0 {
            return Err(GridError::BadShape { dim, resolution });
        }
        let nodes = (resolution + 1).pow(dim as u32);
        if samples.len() != dim {
            return Err(GridError::SampleCount { axis: samples.len(), expected: dim, got: samples.len() });
        }
        for (axis, per_axis) in samples.iter().enumerate() {
            if per_axis.len() != nodes {
                return Err(GridError::SampleCount { axis, expected: nodes, got: per_axis.len() });
            }
            for (node, m) in per_axis.iter().enumerate() {
                if m.nrows() != fiber || m.ncols() != fiber {
                    return Err(GridError::SampleShape { axis, node, rows: m.nrows(), cols: m.ncols(), fiber });
                }
            }
        }
        Ok(GridConnection { dim, resolution, fiber, samples })
    }

    /// Samples `a(axis, coords)` at every node.
    pub fn from_fn(
        dim: usize,
        resolution: usize,
        fiber: usize,
        a: impl Fn(usize, &[f64]) -> CMat,
    ) -> Result<Self, GridError> {
        if dim == 0 || resolution == 0 {
            return Err(GridError::BadShape { dim, resolution });
        }
        let nodes = (resolution + 1).pow(dim as u32);
        let mut samples = vec![Vec::with_capacity(nodes); dim];
        let mut coords = vec![0.0; dim];
        for node in 0..nodes {
            let idx = unflatten(node, dim, resolution + 1);
            for (c, &k) in coords.iter_mut().zip(&idx) {
                *c = k as f64 / resolution as f64;
            }
            for (axis, s) in samples.iter_mut().enumerate() {
                s.push(a(axis, &coords));
            }
        }
        Self::new(dim, resolution, fiber, samples)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    fn node(&self, idx: &[usize]) -> usize {
        flatten(idx, self.resolution + 1)
    }

    pub fn sample(&self, axis: usize, idx: &[usize]) -> &CMat {
        &self.samples[axis][self.node(idx)]
    }

    /// Curvature of the cell whose lowest corner is `cell`, in the `(a, b)`
    /// plane, using the convention described in the module docs.
    pub fn cell_curvature(&self, cell: &[usize], a: usize, b: usize) -> CMat {
        let h = self.spacing();
        let corner = |da: usize, db: usize| {
            let mut i = cell.to_vec();
            i[a] += da;
            i[b] += db;
            i
        };
        let (c00, c10, c01, c11) = (corner(0, 0), corner(1, 0), corner(0, 1), corner(1, 1));
        let aa = |i: &[usize]| self.sample(a, i).clone();
        let ab = |i: &[usize]| self.sample(b, i).clone();
        let quarter = Complex64::new(0.25, 0.0);
        let half_h = Complex64::new(0.5 / h, 0.0);
        let mean_a = (aa(&c00) + aa(&c10) + aa(&c01) + aa(&c11)) * quarter;
        let mean_b = (ab(&c00) + ab(&c10) + ab(&c01) + ab(&c11)) * quarter;
        let db_aa = ((aa(&c01) + aa(&c11)) - (aa(&c00) + aa(&c10))) * half_h;
        let da_ab = ((ab(&c10) + ab(&c11)) - (ab(&c00) + ab(&c01))) * half_h;
        let comm = &mean_b * &mean_a - &mean_a * &mean_b;
        db_aa - da_ab + comm
    }

    /// Lattice curvature for every coordinate plane and every cell.
    pub fn numerical_curvature(&self) -> Curvature {
        let cells = self.resolution.pow(self.dim as u32);
        let mut planes = Vec::new();
        for a in 0..self.dim {
            for b in (a + 1)..self.dim {
                let values =
                    (0..cells).map(|c| self.cell_curvature(&unflatten(c, self.dim, self.resolution), a, b)).collect();
                planes.push(PlaneCurvature { a, b, values });
            }
        }
        Curvature { dim: self.dim, resolution: self.resolution, planes }
    }

    /// `(i/2π) Σ tr F_{ab} · h²` over the `(a, b)` slice through the origin
    /// (other coordinates at node 0). Swapping `a` and `b` flips the sign.
    pub fn chern_number(&self, a: usize, b: usize) -> Result<ChernNumber, GridError> {
        if a == b || a >= self.dim || b >= self.dim {
            return Err(GridError::BadAxes { a, b, dim: self.dim });
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let h = self.spacing();
        let mut total = Complex64::new(0.0, 0.0);
        let mut cell = vec![0usize; self.dim];
        for i in 0..self.resolution {
            for j in 0..self.resolution {
                cell[lo] = i;
                cell[hi] = j;
                total += trace(&self.cell_curvature(&cell, lo, hi));
            }
        }
        let raw = (Complex64::new(0.0, 1.0) / (2.0 * PI) * total * h * h).re * sign;
        let rounded = raw.round();
        let residual = (raw - rounded).abs();
        if residual > INTEGRALITY_TOL {
            return Err(GridError::NotIntegral { value: raw, residual });
        }
        Ok(ChernNumber { value: rounded as i64, raw, residual })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernNumber {
    pub value: i64,
    pub raw: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct PlaneCurvature {
    pub a: usize,
    pub b: usize,
    /// One matrix per cell, cells ordered with axis 0 fastest.
    pub values: Vec<CMat>,
}

#[derive(Debug, Clone)]
pub struct Curvature {
    pub dim: usize,
    pub resolution: usize,
    pub planes: Vec<PlaneCurvature>,
}

impl Curvature {
    pub fn plane(&self, a: usize, b: usize) -> Option<&PlaneCurvature> {
        self.planes.iter().find(|p| p.a == a && p.b == b)
    }
}

fn flatten(idx: &[usize], side: usize) -> usize {
    idx.iter().rev().fold(0, |acc, &i| acc * side + i)
}

fn unflatten(mut n: usize, dim: usize, side: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(dim);
    for _ in 0..dim {
        out.push(n % side);
        n /= side;
    }
    out
}

/// The line-bundle connection `A_z = 0`, `A_x = −2πi z` on `[0,1]²` with
/// axis 0 the `z` direction and axis 1 the `x` direction.
pub fn poincare_connection(resolution: usize) -> Result<GridConnection, GridError> {
    if resolution < 2 {
        return Err(GridError::BadShape { dim: 2, resolution });
    }
    GridConnection::from_fn(2, resolution, 1, |axis, c| {
        let v = if axis == 1 { Complex64::new(0.0, -2.0 * PI * c[0]) } else { Complex64::new(0.0, 0.0) };
        CMat::from_element(1, 1, v)
    })
}

/// Connection on the determinant line of the bundle over `S¹ × S¹` built
/// from a loop of unitaries `u_0, …, u_{N−1}` (sampled at `x = k/N`,
/// periodic): `A_z = 0` and `A_x(z, x_k) = −i z Δφ_k / h` where `Δφ_k` is
/// the principal argument increment of `det u` from node `k` to `k + 1`.
///
/// The Chern number of this connection over the `(z, x)` plane equals the
/// winding number of `det u`, provided consecutive samples differ in
/// argument by less than `π`.
pub fn det_line_connection(loop_samples: &[CMat]) -> Result<GridConnection, GridError> {
    let n = loop_samples.len();
    if n == 0 {
        return Err(GridError::BadShape { dim: 2, resolution: 0 });
    }
    let dets: Vec<Complex64> = loop_samples.iter().map(|u| u.determinant()).collect();
    let incr: Vec<f64> = (0..n).map(|k| (dets[(k + 1) % n] / dets[k]).arg()).collect();
    let h = 1.0 / n as f64;
    GridConnection::from_fn(2, n, 1, |axis, c| {
        let v = if axis == 1 {
            let k = ((c[1] * n as f64).round() as usize) % n;
            Complex64::new(0.0, -c[0] * incr[k] / h)
        } else {
            Complex64::new(0.0, 0.0)
        };
        CMat::from_element(1, 1, v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_diag;

    #[test]
    fn poincare_curvature_and_chern_number() {
        let c = poincare_connection(32).unwrap();
        let curv = c.numerical_curvature();
        let p = curv.plane(0, 1).unwrap();
        for f in &p.values {
            assert!((f[(0, 0)] - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-9);
        }
        let ch = c.chern_number(0, 1).unwrap();
        assert_eq!(ch.value, -1);
        assert!(ch.residual < 1e-9);
        assert_eq!(c.chern_number(1, 0).unwrap().value, 1);
    }

    #[test]
    fn bad_axes_and_shapes() {
        let c = poincare_connection(4).unwrap();
        assert!(matches!(c.chern_number(0, 0), Err(GridError::BadAxes { .. })));
        assert!(matches!(c.chern_number(0, 2), Err(GridError::BadAxes { .. })));
        assert!(GridConnection::new(2, 2, 1, vec![vec![]; 2]).is_err());
        assert!(GridConnection::new(0, 2, 1, vec![]).is_err());
        assert!(poincare_connection(1).is_err());
        let c = poincare_connection(2).unwrap();
        assert_eq!(c.sample(1, &[0, 0])[(0, 0)], Complex64::new(0.0, 0.0));
        assert!((c.sample(1, &[1, 0])[(0, 0)] - Complex64::new(0.0, -PI)).norm() < 1e-15);
    }

    #[test]
    fn non_integral_total_is_reported() {
        // constant curvature of half a quantum
        let c = GridConnection::from_fn(2, 8, 1, |axis, x| {
            let v = if axis == 1 { Complex64::new(0.0, -PI * x[0]) } else { Complex64::new(0.0, 0.0) };
            CMat::from_element(1, 1, v)
        })
        .unwrap();
        assert!(matches!(c.chern_number(0, 1), Err(GridError::NotIntegral { .. })));
    }

    #[test]
    fn det_line_matches_winding() {
        let n = 24;
        let loop_samples: Vec<CMat> =
            (0..n).map(|k| phase_diag(&[3.0 * k as f64 / n as f64, -(k as f64) / n as f64])).collect();
        // det winds 3 − 1 = 2 times
        let c = det_line_connection(&loop_samples).unwrap();
        assert_eq!(c.chern_number(0, 1).unwrap().value, -2);
    }

    #[test]
    fn flat_abelian_connection_has_zero_curvature() {
        let c = GridConnection::from_fn(3, 5, 2, |axis, _| {
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(0.0, axis as f64),
                Complex64::new(0.0, -1.0),
            ]))
        })
        .unwrap();
        let curv = c.numerical_curvature();
        assert_eq!(curv.planes.len(), 3);
        for p in &curv.planes {
            for f in &p.values {
                assert!(f.norm() < 1e-12);
            }
        }
    }
}
