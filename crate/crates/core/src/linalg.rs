//! Dense complex matrices and Hermitian spectral calculus.
//!
//! Every matrix function in the crate (log, exp, complex powers, inverses)
//! is evaluated through a Hermitian eigendecomposition. Tensor products use
//! the standard Kronecker flattening: the leftmost factor varies slowest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Asymmetry above `HERMITIAN_REJECT * ‖A‖` is rejected by [`PosDefMatrix::new`].
pub const HERMITIAN_REJECT: f64 = 1e-8;
/// Eigenvalues at or below `POSITIVITY_FLOOR * λ_max` are treated as non-positive.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// `(A + A†) / 2`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Frobenius norm of `A - A†`.
pub fn hermitian_residual(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.trace()
}

/// Entrywise complex conjugate in the standard basis.
pub fn conj(a: &ComplexMatrix) -> ComplexMatrix {
    a.map(|z| z.conj())
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Left-to-right Kronecker product of all factors. An empty list yields the 1×1 identity.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

/// Relative Frobenius distance `‖A - B‖ / max(‖A‖, ‖B‖)`; zero when both vanish.
pub fn rel_gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let scale = a.norm().max(b.norm());
    let diff = (a - b).norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn require_square(a: &ComplexMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

/// Eigenvalues in ascending order together with a unitary matrix of eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// Decomposes a matrix that is assumed Hermitian; only the Hermitian part is used.
    pub fn of_hermitian(a: &ComplexMatrix) -> Self {
        let eig = hermitize(a).symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let dim = order.len();
        let mut eigenvectors = ComplexMatrix::zeros(dim, dim);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self {
            eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `U diag(f(λ)) U†`.
    pub fn apply<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fj;
            }
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|l| c64(l, 0.0))
    }
}

/// `f(M)` for a Hermitian (not necessarily positive) matrix.
pub fn hermitian_fn<F>(m: &ComplexMatrix, f: F) -> ComplexMatrix
where
    F: Fn(f64) -> Complex64,
{
    SpectralDecomposition::of_hermitian(m).apply(f)
}

/// Matrix exponential of a Hermitian matrix.
pub fn expm_hermitian(m: &ComplexMatrix) -> ComplexMatrix {
    hermitian_fn(m, |l| c64(l.exp(), 0.0))
}

/// A Hermitian positive definite matrix with its spectral decomposition computed at construction.
#[derive(Debug, Clone)]
pub struct PosDefMatrix {
    matrix: ComplexMatrix,
    spectral: SpectralDecomposition,
}

impl PosDefMatrix {
    /// Hermitizes `a` and certifies positivity.
    ///
    /// Asymmetry up to `HERMITIAN_REJECT * ‖A‖` is symmetrized away; anything larger is an error.
    pub fn new(a: ComplexMatrix) -> Result<Self> {
        require_square(&a)?;
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        let residual = hermitian_residual(&a);
        let limit = HERMITIAN_REJECT * a.norm();
        if residual > limit {
            return Err(Error::NotHermitian { residual, limit });
        }
        let matrix = hermitize(&a);
        let spectral = SpectralDecomposition::of_hermitian(&matrix);
        let (min, max) = (spectral.min_eigenvalue(), spectral.max_eigenvalue());
        if max <= 0.0 || min <= POSITIVITY_FLOOR * max {
            return Err(Error::NonPositiveEigenvalue { min, max });
        }
        Ok(Self { matrix, spectral })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(identity(dim)).expect("identity is positive definite")
    }

    /// `U diag(λ) U†` from a real positive spectrum and a unitary basis.
    pub fn from_spectrum(eigenvectors: &ComplexMatrix, eigenvalues: &[f64]) -> Result<Self> {
        let diag = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            eigenvalues.len(),
            eigenvalues.iter().map(|&l| c64(l, 0.0)),
        ));
        Self::new(eigenvectors * diag * eigenvectors.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn apply<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        self.spectral.apply(f)
    }

    pub fn log(&self) -> ComplexMatrix {
        self.apply(|l| c64(l.ln(), 0.0))
    }

    /// `A^z` with `λ^z := exp(z log λ)`.
    pub fn power(&self, z: Complex64) -> ComplexMatrix {
        self.apply(|l| (z * l.ln()).exp())
    }

    pub fn inverse(&self) -> PosDefMatrix {
        let inv = self.apply(|l| c64(1.0 / l, 0.0));
        PosDefMatrix::new(inv).expect("inverse of a positive definite matrix")
    }

    /// Entrywise conjugate (equal to the transpose); still positive definite.
    pub fn conj(&self) -> PosDefMatrix {
        PosDefMatrix {
            matrix: conj(&self.matrix),
            spectral: SpectralDecomposition {
                eigenvalues: self.spectral.eigenvalues.clone(),
                eigenvectors: conj(&self.spectral.eigenvectors),
            },
        }
    }

    pub fn scaled(&self, c: f64) -> Result<PosDefMatrix> {
        PosDefMatrix::new(self.matrix.scale(c))
    }

    pub fn kron(&self, other: &PosDefMatrix) -> Result<PosDefMatrix> {
        PosDefMatrix::new(kron(&self.matrix, &other.matrix))
    }
}

/// `f(A)` through the cached eigendecomposition.
pub fn matrix_fn<F>(a: &PosDefMatrix, f: F) -> ComplexMatrix
where
    F: Fn(f64) -> Complex64,
{
    a.apply(f)
}

/// Exponent `(1 + i t) / 2`.
pub fn half_plus(t: f64) -> Complex64 {
    c64(0.5, 0.5 * t)
}

/// Exponent `(1 - i t) / 2`.
pub fn half_minus(t: f64) -> Complex64 {
    c64(0.5, -0.5 * t)
}

/// Relative residual of `conj(A^{(1+it)/2}) = conj(A)^{(1-it)/2}`.
pub fn conj_power(a: &PosDefMatrix, t: f64) -> f64 {
    let lhs = conj(&a.power(half_plus(t)));
    let rhs = a.conj().power(half_minus(t));
    rel_gap(&lhs, &rhs)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let qr = random_gaussian_matrix(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c64(1.0, 0.0)
        };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Random Hermitian matrix `(G + G†)/2` rescaled to unit spectral norm times `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> ComplexMatrix {
    let h = hermitize(&random_gaussian_matrix(rng, dim, dim));
    let spec = SpectralDecomposition::of_hermitian(&h);
    let norm = spec.max_eigenvalue().abs().max(spec.min_eigenvalue().abs());
    if norm == 0.0 {
        h
    } else {
        h.scale(scale / norm)
    }
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    let g = random_gaussian_matrix(rng, dim, 1);
    let v = ComplexVector::from_iterator(dim, g.iter().copied());
    let n = v.norm();
    v.unscale(n)
}

/// Log-uniform spectrum in `[min, max]`.
pub fn random_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    range: (f64, f64),
) -> Result<Vec<f64>> {
    let (min, max) = range;
    if !(min > 0.0) || !(max >= min) || !max.is_finite() {
        return Err(Error::InvalidRange { min, max });
    }
    if min == max {
        return Ok(vec![min; dim]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..dim)
        .map(|_| rng.random_range(lo..=hi).exp().clamp(min, max))
        .collect())
}

pub fn random_posdef_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    range: (f64, f64),
) -> Result<PosDefMatrix> {
    let spectrum = random_spectrum(rng, dim, range)?;
    let q = random_unitary(rng, dim);
    PosDefMatrix::from_spectrum(&q, &spectrum)
}

/// `Q Λ Q†` with Haar `Q` and log-uniform `Λ`; deterministic per seed.
pub fn random_posdef(dim: usize, seed: u64, range: (f64, f64)) -> Result<PosDefMatrix> {
    let mut rng = seeded_rng(seed);
    random_posdef_with(&mut rng, dim, range)
}

/// A family sharing one random eigenbasis, hence pairwise commuting.
pub fn random_commuting_family<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    dim: usize,
    range: (f64, f64),
) -> Result<Vec<PosDefMatrix>> {
    let q = random_unitary(rng, dim);
    (0..count)
        .map(|_| {
            let spectrum = random_spectrum(rng, dim, range)?;
            PosDefMatrix::from_spectrum(&q, &spectrum)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(a: &ComplexMatrix) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hermitize_examples() {
        let i2 = identity(2);
        assert_eq!(hermitize(&i2), i2);

        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, 2.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(0.0, 0.0)],
        );
        assert!(max_abs(&(hermitize(&a) - expected)) < 1e-15);

        let mut rng = seeded_rng(3);
        let g = random_gaussian_matrix(&mut rng, 4, 4);
        let h = hermitize(&g);
        assert!(max_abs(&(hermitize(&h) - &h)) < 1e-15);
    }

    #[test]
    fn log_of_identity_is_zero_and_sqrt_of_four() {
        let id = PosDefMatrix::identity(3);
        assert!(max_abs(&id.log()) < 1e-15);

        let four = PosDefMatrix::new(identity(3).scale(4.0)).unwrap();
        let root = matrix_fn(&four, |l| c64(l.sqrt(), 0.0));
        assert!(max_abs(&(root - identity(3).scale(2.0))) < 1e-14);
    }

    #[test]
    fn complex_powers_add() {
        let a = random_posdef(3, 11, (0.1, 10.0)).unwrap();
        let t = 0.7;
        let prod = a.power(half_plus(t)) * a.power(half_minus(t));
        assert!(rel_gap(&prod, a.matrix()) < 1e-12);
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let mut rng = seeded_rng(5);
        let [a, b, c, d] = [(); 4].map(|_| random_gaussian_matrix(&mut rng, 2, 2));
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(rel_gap(&lhs, &rhs) < 1e-14);
        let tr = trace(&kron(&a, &b)) - trace(&a) * trace(&b);
        assert!(tr.norm() < 1e-13);
    }

    #[test]
    fn kron_flattening_leftmost_slowest() {
        let e = |i: usize| {
            let mut m = ComplexMatrix::zeros(2, 2);
            m[(i, i)] = c64(1.0, 0.0);
            m
        };
        // |1><1| ⊗ |0><0| selects basis index 1*2 + 0 = 2.
        let k = kron(&e(1), &e(0));
        assert_eq!(k[(2, 2)], c64(1.0, 0.0));
        assert_eq!(k.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn conj_power_examples() {
        let mut rng = seeded_rng(17);
        let q = random_unitary(&mut rng, 3);
        assert!(conj_power(&random_posdef(3, 4, (0.2, 5.0)).unwrap(), 1.3) < 1e-12);
        assert!(conj_power(&PosDefMatrix::identity(2), 2.1) < 1e-15);

        // real symmetric: both sides A^{1/2}
        let real_q = q.map(|z| c64(z.re, 0.0)).qr().q();
        let a = PosDefMatrix::from_spectrum(&real_q, &[0.5, 1.0, 3.0]).unwrap();
        let root = a.power(c64(0.5, 0.0));
        assert!(rel_gap(&conj(&a.power(half_plus(0.0))), &root) < 1e-13);
        assert!(rel_gap(&a.conj().power(half_minus(0.0)), &root) < 1e-13);
    }

    #[test]
    fn random_posdef_examples() {
        let a = random_posdef(2, 42, (1.0, 1.0)).unwrap();
        assert!(max_abs(&(a.matrix() - identity(2))) < 1e-14);

        let b = random_posdef(3, 7, (0.1, 10.0)).unwrap();
        for &l in b.eigenvalues() {
            assert!((0.1 - 1e-12..=10.0 + 1e-12).contains(&l), "{l}");
        }

        let c = random_posdef(3, 7, (0.1, 10.0)).unwrap();
        assert_eq!(b.matrix(), c.matrix());
    }

    #[test]
    fn random_posdef_rejects_bad_range() {
        assert!(matches!(
            random_posdef(2, 1, (0.0, 1.0)),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            random_posdef(2, 1, (-1.0, 1.0)),
            Err(Error::InvalidRange { .. })
        ));
    }

    #[test]
    fn posdef_rejects_non_positive_and_asymmetric() {
        let singular =
            ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]));
        assert!(matches!(
            PosDefMatrix::new(singular),
            Err(Error::NonPositiveEigenvalue { .. })
        ));

        let tiny =
            ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c64(1.0, 0.0), c64(1e-13, 0.0)]));
        assert!(matches!(
            PosDefMatrix::new(tiny),
            Err(Error::NonPositiveEigenvalue { .. })
        ));

        let skew = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(0.1, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        assert!(matches!(
            PosDefMatrix::new(skew),
            Err(Error::NotHermitian { .. })
        ));

        // round-off level asymmetry is absorbed
        let nearly = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0, 0.0), c64(0.5, 1e-12), c64(0.5, 0.0), c64(1.0, 0.0)],
        );
        let p = PosDefMatrix::new(nearly).unwrap();
        assert_eq!(hermitian_residual(p.matrix()), 0.0);
    }

    #[test]
    fn spectral_decomposition_reconstructs() {
        let a = random_posdef(5, 99, (0.01, 1.0)).unwrap();
        let s = a.spectral();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let u = &s.eigenvectors;
        assert!(max_abs(&(u.adjoint() * u - identity(5))) < 1e-12);
        assert!((s.reconstruct() - a.matrix()).norm() <= 1e-12 * a.matrix().norm());
    }
}
