//! Points of the representation variety `Hom(Γ, U(n))`.
//!
//! A [`RepPoint`] assigns a unitary matrix to every generator. The relator
//! defect `Σ_r ‖ρ(r) − I‖²_F` vanishes exactly on homomorphisms, and
//! [`solve_representation`] drives it to zero by gradient descent on
//! `U(n)^m` with a polar retraction and Armijo backtracking.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{frobenius_sq, haar_unitary, identity, polar_unitary, unitarity_deviation, CMat};
use crate::presentation::{evaluate_word, GroupPresentation, Letter, PresentationError};

/// Maximum `‖U*U − I‖_F` accepted for any matrix of a [`RepPoint`].
pub const UNITARITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("matrix for generator {index} is {rows}x{cols}, expected {dim}x{dim}")]
    DimensionMismatch { index: usize, rows: usize, cols: usize, dim: usize },
    #[error("matrix for generator {index} is not unitary (deviation {deviation:.3e})")]
    NotUnitary { index: usize, deviation: f64 },
    #[error("point has {got} matrices but the presentation has {expected} generators")]
    GeneratorCount { got: usize, expected: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no convergence after {iterations} iterations (best defect {best_defect:.3e})")]
    NotConverged { iterations: usize, best_defect: f64 },
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// One unitary matrix per generator, all of the same size.
#[derive(Debug, Clone, PartialEq)]
pub struct RepPoint {
    dim: usize,
    matrices: Vec<CMat>,
}

impl RepPoint {
    /// Validates shapes and unitarity (to [`UNITARITY_TOL`]). At least one
    /// matrix is required to fix the dimension; see [`RepPoint::with_dim`].
    pub fn new(matrices: Vec<CMat>) -> Result<Self, RepError> {
        let dim = matrices.first().map(|m| m.nrows()).ok_or(RepError::ZeroDimension)?;
        Self::with_dim(dim, matrices)
    }

    pub fn with_dim(dim: usize, matrices: Vec<CMat>) -> Result<Self, RepError> {
        if dim == 0 {
            return Err(RepError::ZeroDimension);
        }
        for (index, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(RepError::DimensionMismatch { index, rows: m.nrows(), cols: m.ncols(), dim });
            }
            let deviation = unitarity_deviation(m);
            if deviation.is_nan() || deviation > UNITARITY_TOL {
                return Err(RepError::NotUnitary { index, deviation });
            }
        }
        Ok(RepPoint { dim, matrices })
    }

    /// All generators mapped to the identity.
    pub fn trivial(generators: usize, dim: usize) -> Self {
        RepPoint { dim, matrices: vec![identity(dim); generators] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<CMat> {
        self.matrices
    }

    pub fn generator_count(&self) -> usize {
        self.matrices.len()
    }

    /// Largest `‖U*U − I‖_F` over the generators.
    pub fn unitarity_deviation(&self) -> f64 {
        self.matrices.iter().map(unitarity_deviation).fold(0.0, f64::max)
    }

    /// Simultaneous conjugation `U ρ(g) U*`.
    pub fn conjugate(&self, u: &CMat) -> Result<Self, RepError> {
        Self::with_dim(self.dim, self.matrices.iter().map(|m| u * m * u.adjoint()).collect())
    }
}

/// Sum over relators of `‖ρ(r) − I‖²_F`.
pub fn relator_defect(p: &RepPoint, g: &GroupPresentation) -> Result<f64, RepError> {
    if p.generator_count() != g.rank() {
        return Err(RepError::GeneratorCount { got: p.generator_count(), expected: g.rank() });
    }
    let id = identity(p.dim());
    let mut total = 0.0;
    for r in g.relators() {
        let w = evaluate_word(r, p)?;
        total += frobenius_sq(&(w - &id));
    }
    Ok(total)
}

/// True iff both the relator defect and the unitarity deviation are `≤ tol`.
pub fn verify_homomorphism(p: &RepPoint, g: &GroupPresentation, tol: f64) -> bool {
    match relator_defect(p, g) {
        Ok(d) => d <= tol && p.unitarity_deviation() <= tol,
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Target relator defect.
    pub tolerance: f64,
    pub max_iter: usize,
    /// First trial step of every line search.
    pub initial_step: f64,
    /// Multiplicative step reduction during backtracking.
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Line search gives up below this step.
    pub min_step: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tolerance: 1e-10,
            max_iter: 20_000,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            min_step: 1e-16,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn new(tolerance: f64, max_iter: usize, seed: u64) -> Self {
        SolveConfig { tolerance, max_iter, seed, ..Default::default() }
    }

    // max_iter = 0 is accepted: the solver then only reports the defect of
    // its seeded starting point.
    fn validate(&self) -> Result<(), RepError> {
        if !(self.tolerance > 0.0) {
            return Err(RepError::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.initial_step > 0.0) || !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(RepError::InvalidConfig("step control requires initial_step > 0 and 0 < shrink < 1".into()));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(RepError::InvalidConfig("armijo constant must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Result of a solve: the best iterate and how it was reached.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub point: RepPoint,
    pub defect: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Defect after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
    /// Largest unitarity deviation seen across all iterates.
    pub max_unitarity_deviation: f64,
}

impl SolveOutcome {
    pub fn into_result(self) -> Result<RepPoint, RepError> {
        if self.converged {
            Ok(self.point)
        } else {
            Err(RepError::NotConverged { iterations: self.iterations, best_defect: self.defect })
        }
    }
}

/// Seeded Haar-random starting point.
pub fn random_point(generators: usize, n: usize, seed: u64) -> RepPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrices = (0..generators).map(|_| haar_unitary(n, &mut rng)).collect();
    RepPoint { dim: n, matrices }
}

/// Searches `Hom(Γ, U(n))` for a point with relator defect `≤ cfg.tolerance`.
///
/// Non-convergence is not an error: the best iterate is returned with
/// `converged == false`.
pub fn solve_representation(g: &GroupPresentation, n: usize, cfg: &SolveConfig) -> Result<SolveOutcome, RepError> {
    if n == 0 {
        return Err(RepError::ZeroDimension);
    }
    cfg.validate()?;
    let mut point = random_point(g.rank(), n, cfg.seed);
    let mut defect = relator_defect(&point, g)?;
    let mut history = vec![defect];
    let mut max_dev = point.unitarity_deviation();
    let mut iterations = 0;

    while defect > cfg.tolerance && iterations < cfg.max_iter {
        let grad = defect_gradient(&point, g);
        let grad_sq: f64 = grad.iter().map(frobenius_sq).sum();
        if grad_sq == 0.0 {
            break;
        }
        let mut step = cfg.initial_step;
        let mut accepted = None;
        while step >= cfg.min_step {
            let trial = retract(&point, &grad, step);
            let d = relator_defect(&trial, g)?;
            if d <= defect - cfg.armijo * step * grad_sq {
                accepted = Some((trial, d));
                break;
            }
            step *= cfg.shrink;
        }
        let Some((next, d)) = accepted else {
            break;
        };
        iterations += 1;
        max_dev = max_dev.max(next.unitarity_deviation());
        point = next;
        defect = d;
        history.push(defect);
    }

    Ok(SolveOutcome {
        converged: defect <= cfg.tolerance,
        point,
        defect,
        iterations,
        history,
        max_unitarity_deviation: max_dev,
    })
}

/// Riemannian gradient of the defect in right-trivialised coordinates:
/// perturbing `U_g ↦ U_g exp(εΩ_g)` with skew-Hermitian `Ω_g` changes the
/// defect by `ε Σ_g ⟨G_g, Ω_g⟩` to first order.
pub fn defect_gradient(p: &RepPoint, g: &GroupPresentation) -> Vec<CMat> {
    let n = p.dim();
    let mats = p.matrices();
    let mut grad = vec![CMat::zeros(n, n); mats.len()];
    let letter_mat = |l: &Letter| if l.inverse { mats[l.gen].adjoint() } else { mats[l.gen].clone() };
    for r in g.relators() {
        let letters = &r.letters;
        let m = letters.len();
        // prefixes[i] = L_0 … L_{i-1}; suffixes[i] = L_{i+1} … L_{m-1}
        let mut prefixes = Vec::with_capacity(m + 1);
        prefixes.push(identity(n));
        for l in letters {
            let next = prefixes.last().expect("nonempty") * letter_mat(l);
            prefixes.push(next);
        }
        let mut suffixes = vec![identity(n); m];
        for i in (0..m.saturating_sub(1)).rev() {
            suffixes[i] = letter_mat(&letters[i + 1]) * &suffixes[i + 1];
        }
        let resid_adj = (&prefixes[m] - identity(n)).adjoint();
        for (i, l) in letters.iter().enumerate() {
            let u = &mats[l.gen];
            let core = &suffixes[i] * &resid_adj * &prefixes[i];
            let mm = if l.inverse { -(u.adjoint() * core) } else { core * u };
            grad[l.gen] += mm.adjoint() - mm;
        }
    }
    grad
}

fn retract(p: &RepPoint, grad: &[CMat], step: f64) -> RepPoint {
    let n = p.dim();
    let scale = Complex64::new(step, 0.0);
    let matrices = p
        .matrices()
        .iter()
        .zip(grad)
        .map(|(u, gr)| polar_unitary(&(u * (identity(n) - gr * scale))))
        .collect();
    RepPoint { dim: n, matrices }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;

    fn pauli_pair() -> RepPoint {
        let o = Complex64::new(0.0, 0.0);
        let i = Complex64::new(1.0, 0.0);
        let x = CMat::from_row_slice(2, 2, &[o, i, i, o]);
        let z = CMat::from_row_slice(2, 2, &[i, o, o, -i]);
        RepPoint::new(vec![x, z]).unwrap()
    }

    #[test]
    fn trivial_point_has_zero_defect() {
        let g = GroupPresentation::surface(2);
        let p = RepPoint::trivial(4, 3);
        assert_eq!(relator_defect(&p, &g).unwrap(), 0.0);
        assert!(verify_homomorphism(&p, &g, 0.0));
    }

    #[test]
    fn anticommuting_pair_has_defect_eight() {
        let z2 = parse_presentation("gens: a b; rels: a b a^-1 b^-1;").unwrap();
        let d = relator_defect(&pauli_pair(), &z2).unwrap();
        assert!((d - 8.0).abs() < 1e-12);
        assert!(!verify_homomorphism(&pauli_pair(), &z2, 1e-6));
    }

    #[test]
    fn rejects_non_unitary_and_bad_shapes() {
        let mut m = identity(2);
        m[(0, 0)] = Complex64::new(2.0, 0.0);
        assert!(matches!(RepPoint::new(vec![m]), Err(RepError::NotUnitary { index: 0, .. })));
        assert!(matches!(
            RepPoint::new(vec![identity(2), identity(3)]),
            Err(RepError::DimensionMismatch { index: 1, .. })
        ));
        let g = GroupPresentation::free_abelian(2);
        assert!(matches!(relator_defect(&RepPoint::trivial(3, 1), &g), Err(RepError::GeneratorCount { .. })));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = parse_presentation("gens: a b; rels: a b a b^-1, a a b;").unwrap();
        let p = random_point(2, 2, 11);
        let grad = defect_gradient(&p, &g);
        let f0 = relator_defect(&p, &g).unwrap();
        let h = 1e-6;
        // Skew-Hermitian direction on generator 1.
        let mut omega = CMat::zeros(2, 2);
        omega[(0, 1)] = Complex64::new(0.3, 0.2);
        omega[(1, 0)] = Complex64::new(-0.3, 0.2);
        omega[(1, 1)] = Complex64::new(0.0, 0.7);
        let mut mats = p.matrices().to_vec();
        let exp = polar_unitary(&(identity(2) + &omega * Complex64::new(h, 0.0)));
        mats[1] = &mats[1] * exp;
        let p2 = RepPoint::new(mats).unwrap();
        let fd = (relator_defect(&p2, &g).unwrap() - f0) / h;
        let analytic = (grad[1].adjoint() * &omega).trace().re;
        assert!((fd - analytic).abs() < 1e-4, "fd {fd} vs analytic {analytic}");
    }

    #[test]
    fn free_group_needs_no_iterations() {
        let g = GroupPresentation::free_rank(3);
        let out = solve_representation(&g, 4, &SolveConfig::new(1e-8, 10, 5)).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn abelian_target_is_already_a_solution() {
        let g = GroupPresentation::surface(2);
        let out = solve_representation(&g, 1, &SolveConfig::new(1e-12, 100, 42)).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.defect < 1e-20);
    }

    #[test]
    fn z2_in_u2_converges_with_descent() {
        let g = GroupPresentation::free_abelian(2);
        let out = solve_representation(&g, 2, &SolveConfig::new(1e-8, 20_000, 3)).unwrap();
        assert!(out.converged, "defect {}", out.defect);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.max_unitarity_deviation <= 1e-10);
        assert!(verify_homomorphism(&out.point, &g, 1e-6));
    }

    #[test]
    fn zero_iterations_reports_non_convergence() {
        let g = GroupPresentation::free_abelian(2);
        let out = solve_representation(&g, 2, &SolveConfig::new(1e-8, 0, 9)).unwrap();
        assert!(!out.converged);
        assert!(matches!(out.into_result(), Err(RepError::NotConverged { iterations: 0, .. })));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let g = GroupPresentation::free_abelian(2);
        assert!(matches!(
            solve_representation(&g, 2, &SolveConfig::new(0.0, 10, 1)),
            Err(RepError::InvalidConfig(_))
        ));
        assert!(matches!(solve_representation(&g, 0, &SolveConfig::default()), Err(RepError::ZeroDimension)));
    }

    #[test]
    fn solves_are_deterministic_in_the_seed() {
        let g = parse_presentation("gens: a b; rels: a b a b^-1;").unwrap();
        let cfg = SolveConfig::new(1e-8, 5_000, 17);
        let a = solve_representation(&g, 2, &cfg).unwrap();
        let b = solve_representation(&g, 2, &cfg).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.iterations, b.iterations);
    }
}
