//! Small complex linear-algebra helpers shared across modules.
//!
//! Everything here operates on dynamically sized `nalgebra` matrices over
//! `Complex<f64>`. Linear systems are solved through factorizations
//! (Cholesky first, LU as fallback); explicit inverses are formed only where
//! an operator matrix is itself the required output.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Solves `a x = b` for Hermitian positive definite `a`.
///
/// Falls back to LU when the Cholesky factorization fails (callers pass
/// matrices that are PD by construction, so the fallback covers borderline
/// conditioning only). Returns `None` when the system is singular.
pub fn herm_solve_vec(a: &CMat, b: &CVec) -> Option<CVec> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(b));
    }
    a.clone().lu().solve(b)
}

/// Matrix right-hand-side variant of [`herm_solve_vec`].
pub fn herm_solve_mat(a: &CMat, b: &CMat) -> Option<CMat> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.solve(b));
    }
    a.clone().lu().solve(b)
}

/// Inverse of a Hermitian positive definite matrix.
///
/// Used only where the inverse itself is the quantity of interest (resolvent
/// matrices that enter later products entrywise).
pub fn herm_inverse(a: &CMat) -> Option<CMat> {
    if let Some(chol) = a.clone().cholesky() {
        return Some(chol.inverse());
    }
    a.clone().lu().try_inverse()
}

/// Symmetrizes numerically: `(a + a^H) / 2`.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

/// Hermitian square root with eigenvalue clamping.
///
/// Eigenvalues below zero (numerically possible for rank-deficient PSD
/// inputs) are clamped to zero before taking the square root, so the result
/// satisfies `s s^H ≈ a` for any PSD `a`.
pub fn psd_sqrt(a: &CMat) -> Option<CMat> {
    let eig = hermitize(a).symmetric_eigen();
    let n = a.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for c in 0..n {
        let v = eig.eigenvalues[c].max(0.0).sqrt();
        for r in 0..n {
            scaled[(r, c)] *= c64(v, 0.0);
        }
    }
    let out = &scaled * eig.eigenvectors.adjoint();
    if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Largest absolute deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let d = a - a.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitize(a)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `Tr(a b)` without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let n = a.nrows();
    let m = a.ncols();
    let mut acc = Complex64::default();
    for r in 0..n {
        for c in 0..m {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Spectral radius of a real square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Squared Euclidean norm of a complex vector.
#[inline]
pub fn norm_sq(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const EPS: f64 = 1e-10;

    fn random_cmat(n: usize, rng: &mut StdRng) -> CMat {
        CMat::from_fn(n, n, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    fn random_hpd(n: usize, rng: &mut StdRng) -> CMat {
        let a = random_cmat(n, rng);
        &a * a.adjoint() + CMat::identity(n, n) * c64(0.1, 0.0)
    }

    #[test]
    fn solve_matches_multiply_back() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_hpd(6, &mut rng);
            let b = CVec::from_fn(6, |_, _| c64(rng.gen(), rng.gen()));
            let x = herm_solve_vec(&a, &b).unwrap();
            let r = &a * &x - &b;
            assert!(r.iter().map(|z| z.norm()).fold(0.0, f64::max) < EPS);
        }
    }

    #[test]
    fn inverse_reconstructs_identity() {
        let mut rng = StdRng::seed_from_u64(8);
        let a = random_hpd(8, &mut rng);
        let inv = herm_inverse(&a).unwrap();
        let d = &a * &inv - CMat::identity(8, 8);
        assert!(d.iter().map(|z| z.norm()).fold(0.0, f64::max) < EPS);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = StdRng::seed_from_u64(9);
        let a = random_hpd(5, &mut rng);
        let s = psd_sqrt(&a).unwrap();
        let d = &s * s.adjoint() - &a;
        assert!(d.iter().map(|z| z.norm()).fold(0.0, f64::max) < EPS);
    }

    #[test]
    fn psd_sqrt_clamps_rank_deficient_input() {
        // Rank-1 PSD matrix with a tiny negative perturbation on the diagonal.
        let v = CVec::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(0.5, -0.5)]);
        let mut a = CMat::from_fn(3, 3, |r, c| v[r] * v[c].conj());
        for i in 0..3 {
            a[(i, i)] -= c64(1e-14, 0.0);
        }
        let s = psd_sqrt(&a).unwrap();
        let d = &s * s.adjoint() - &a;
        assert!(d.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn trace_prod_agrees_with_full_product() {
        let mut rng = StdRng::seed_from_u64(10);
        let a = random_cmat(7, &mut rng);
        let b = random_cmat(7, &mut rng);
        let direct = (&a * &b).trace();
        let fast = trace_prod(&a, &b);
        assert!((direct - fast).norm() < EPS);
    }

    #[test]
    fn spectral_radius_of_known_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.25, 0.0]);
        assert!((spectral_radius(&a) - 0.5).abs() < EPS);
    }
}
