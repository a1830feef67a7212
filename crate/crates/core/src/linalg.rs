//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense complex matrix used for all unitary data.
pub type CMat = DMatrix<Complex64>;

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Kronecker product with `a` as the outer (block) factor.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Block-diagonal direct sum `a ⊕ b`.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `‖U*U − I‖_F`.
pub fn unitarity_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    (g - identity(n)).norm()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

/// `m^e` for a unitary `m`, using the adjoint for negative exponents.
pub fn unitary_pow(m: &CMat, e: i64) -> CMat {
    let base = if e < 0 { m.adjoint() } else { m.clone() };
    let mut acc = identity(m.nrows());
    for _ in 0..e.unsigned_abs() {
        acc *= &base;
    }
    acc
}

/// Nearest unitary matrix (the unitary polar factor), via the SVD.
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    u * v_t
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    // QR on its own loses a little orthogonality; snap back.
    polar_unitary(&q)
}

/// Diagonal matrix of phases `e^{2πi θ_j}`.
pub fn phase_diag(thetas: &[f64]) -> CMat {
    let n = thetas.len();
    let mut m = CMat::zeros(n, n);
    for (j, t) in thetas.iter().enumerate() {
        m[(j, j)] = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..5 {
            let u = haar_unitary(n, &mut rng);
            assert!(unitarity_deviation(&u) < 1e-13);
        }
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = haar_unitary(2, &mut rng);
        let b = haar_unitary(3, &mut rng);
        let k = kron(&a, &b);
        assert_eq!(k.nrows(), 6);
        assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn direct_sum_layout() {
        let a = phase_diag(&[0.25]);
        let b = identity(2);
        let s = direct_sum(&a, &b);
        assert_eq!(s.shape(), (3, 3));
        assert!((s[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(s[(2, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(s[(0, 2)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unitary_pow_negative_is_inverse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(3, &mut rng);
        let p = unitary_pow(&u, 3) * unitary_pow(&u, -3);
        assert!((p - identity(3)).norm() < 1e-12);
    }
}
