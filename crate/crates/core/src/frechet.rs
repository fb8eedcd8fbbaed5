//! The Fréchet derivative of the matrix logarithm,
//!
//! ```text
//! T_X(Y) = d/dr log(X + rY) |_{r=0} = ∫_0^∞ (X + τ)^{-1} Y (X + τ)^{-1} dτ,
//! ```
//!
//! evaluated three independent ways: divided differences in the eigenbasis of
//! `X`, half-line quadrature over resolvents, and a central difference of `log`.

use nalgebra::LU;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{half_minus, half_plus, identity, rel_gap, ComplexMatrix, PosDefMatrix};
use crate::quadrature::{integrate_beta_matrix, integrate_halfline, QuadratureRule};
use crate::report::{Tolerance, TrialReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TMethod {
    ClosedForm,
    HalfLineQuadrature,
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct TOperatorResult {
    pub value: ComplexMatrix,
    pub method: TMethod,
}

fn require_same_dim(x: &PosDefMatrix, y: &ComplexMatrix) -> Result<()> {
    if y.nrows() != x.dim() || y.ncols() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.nrows().max(y.ncols()),
        });
    }
    Ok(())
}

/// First divided difference of `log` at `a, b > 0`: `(log a - log b) / (a - b)`, and `1/a` when `a = b`.
///
/// Close arguments go through `2 atanh((a-b)/(a+b)) / (a-b)`, which has no cancellation.
pub fn log_divided_difference(a: f64, b: f64) -> f64 {
    if a == b {
        return 1.0 / a;
    }
    let diff = a - b;
    let x = diff / (a + b);
    if x.abs() < 0.5 {
        2.0 * x.atanh() / diff
    } else {
        (a.ln() - b.ln()) / diff
    }
}

/// `T_X(Y)` via `(U† T U)_{ij} = (U† Y U)_{ij} · φ(x_i, x_j)`.
pub fn t_closed_form(x: &PosDefMatrix, y: &ComplexMatrix) -> Result<TOperatorResult> {
    require_same_dim(x, y)?;
    let spec = x.spectral();
    let u = &spec.eigenvectors;
    let lambda = &spec.eigenvalues;
    let mut rotated = u.adjoint() * y * u;
    for j in 0..rotated.ncols() {
        for i in 0..rotated.nrows() {
            rotated[(i, j)] *= log_divided_difference(lambda[i], lambda[j]);
        }
    }
    Ok(TOperatorResult {
        value: u * rotated * u.adjoint(),
        method: TMethod::ClosedForm,
    })
}

/// `T_X(Y)` by integrating resolvent sandwiches; resolvents come from an LU solve, not the eigenbasis.
pub fn t_quadrature(
    x: &PosDefMatrix,
    y: &ComplexMatrix,
    rule: &QuadratureRule,
) -> Result<TOperatorResult> {
    require_same_dim(x, y)?;
    let dim = x.dim();
    let id = identity(dim);
    let value = integrate_halfline(
        |tau| {
            let shifted = x.matrix() + id.scale(tau);
            let r = LU::new(shifted)
                .try_inverse()
                .expect("X + τ is invertible for τ ≥ 0");
            &r * y * &r
        },
        rule,
    );
    Ok(TOperatorResult {
        value,
        method: TMethod::HalfLineQuadrature,
    })
}

/// Default central-difference step `1e-4 · ‖X‖ / ‖Y‖`.
pub fn default_step(x: &PosDefMatrix, y: &ComplexMatrix) -> f64 {
    let ny = y.norm();
    if ny == 0.0 {
        1e-4
    } else {
        1e-4 * x.matrix().norm() / ny
    }
}

/// `1e-4 · λ_min(X) / ‖Y‖`: the default step shrunk so the perturbation is small against the
/// smallest eigenvalue rather than the norm. Ill-conditioned `X` needs this for `1e-6` accuracy.
pub fn conditioned_step(x: &PosDefMatrix, y: &ComplexMatrix) -> f64 {
    let ny = y.norm();
    let scaled = if ny == 0.0 {
        1e-4
    } else {
        1e-4 * x.spectral().min_eigenvalue() / ny
    };
    scaled.min(default_step(x, y))
}

/// `(log(X + rY) - log(X - rY)) / 2r`.
pub fn t_finite_difference(x: &PosDefMatrix, y: &ComplexMatrix, r: f64) -> Result<TOperatorResult> {
    require_same_dim(x, y)?;
    let shifted = |sign: f64| {
        PosDefMatrix::new(x.matrix() + y.scale(sign * r)).map_err(|e| match e {
            Error::NonPositiveEigenvalue { .. } => Error::StepTooLarge { step: r },
            other => other,
        })
    };
    let plus = shifted(1.0)?;
    let minus = shifted(-1.0)?;
    Ok(TOperatorResult {
        value: (plus.log() - minus.log()).unscale(2.0 * r),
        method: TMethod::FiniteDifference,
    })
}

pub const T_TRIANGLE_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-6);

/// Closed form, half-line quadrature and central difference at step `r`, compared pairwise.
/// `abs_gap` is the largest pairwise Frobenius distance; `lhs`, `rhs` are the closed-form and quadrature norms.
pub fn t_operator_triangle_check(
    x: &PosDefMatrix,
    y: &ComplexMatrix,
    half_line: &QuadratureRule,
    r: f64,
) -> Result<TrialReport> {
    let closed = t_closed_form(x, y)?.value;
    let quad = t_quadrature(x, y, half_line)?.value;
    let fd = t_finite_difference(x, y, r)?.value;
    let gaps = [
        (&closed - &quad).norm(),
        (&closed - &fd).norm(),
        (&quad - &fd).norm(),
    ];
    let gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(TrialReport::with_gap(
        "t_operator_triangle",
        closed.norm(),
        quad.norm(),
        gap,
        T_TRIANGLE_TOLERANCE,
    )
    .param("dim", x.dim())
    .param("step", r)
    .param("closed_vs_quadrature", gaps[0])
    .param("closed_vs_difference", gaps[1]))
}

pub const BETA_SANDWICH_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-8);

/// `∫ A2^{(1+it)/2} A1 A2^{(1-it)/2} β(t) dt` by quadrature.
pub fn beta_sandwich(
    a1: &ComplexMatrix,
    a2: &PosDefMatrix,
    rule: &QuadratureRule,
) -> ComplexMatrix {
    integrate_beta_matrix(
        |t| a2.power(half_plus(t)) * a1 * a2.power(half_minus(t)),
        rule,
    )
}

/// Checks `∫ A2^{(1+it)/2} A1 A2^{(1-it)/2} β(t) dt = T_{A2^{-1}}(A1)` in relative Frobenius norm.
pub fn beta_sandwich_check(
    a1: &PosDefMatrix,
    a2: &PosDefMatrix,
    rule: &QuadratureRule,
) -> Result<TrialReport> {
    if a1.dim() != a2.dim() {
        return Err(Error::DimensionMismatch {
            expected: a2.dim(),
            got: a1.dim(),
        });
    }
    let lhs = beta_sandwich(a1.matrix(), a2, rule);
    let rhs = t_closed_form(&a2.inverse(), a1.matrix())?.value;
    let gap = (&lhs - &rhs).norm();
    Ok(TrialReport::with_gap(
        "beta_sandwich",
        lhs.norm(),
        rhs.norm(),
        gap,
        BETA_SANDWICH_TOLERANCE,
    )
    .param("dim", a1.dim())
    .param("rel_frobenius", rel_gap(&lhs, &rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, hermitize, random_gaussian_matrix, random_posdef, seeded_rng};
    use crate::quadrature::QuadratureConfig;
    use nalgebra::DVector;
    use std::f64::consts::E;

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| c64(v, 0.0)),
        ))
    }

    fn random_hermitian(seed: u64, dim: usize) -> ComplexMatrix {
        hermitize(&random_gaussian_matrix(&mut seeded_rng(seed), dim, dim))
    }

    #[test]
    fn divided_difference_matches_log_formula() {
        for &(a, b) in &[(1.0, 2.0), (0.1, 10.0), (3.0, 3.0 + 1e-6), (5.0, 4.0)] {
            let naive = if a == b {
                1.0 / a
            } else {
                (f64::ln(a) - f64::ln(b)) / (a - b)
            };
            assert!(
                (log_divided_difference(a, b) - naive).abs() <= 1e-9 * naive.abs(),
                "{a} {b}"
            );
        }
        assert_eq!(log_divided_difference(2.0, 2.0), 0.5);
        assert!((log_divided_difference(1.0, E) - 1.0 / (E - 1.0)).abs() < 1e-15);
        // no cancellation at nearly coincident eigenvalues
        let a = 1.0;
        let b = 1.0 + 1e-12;
        assert!((log_divided_difference(a, b) - 2.0 / (a + b)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let y = random_hermitian(1, 3);
        let t = t_closed_form(&PosDefMatrix::identity(3), &y).unwrap().value;
        assert!((t - &y).norm() < 1e-14);

        let x = PosDefMatrix::new(diag(&[1.0, E])).unwrap();
        let swap = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        );
        let t = t_closed_form(&x, &swap).unwrap().value;
        let off = 1.0 / (E - 1.0);
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.0, 0.0), c64(off, 0.0), c64(off, 0.0), c64(0.0, 0.0)],
        );
        assert!((t - expected).norm() < 1e-14);

        let x3 = PosDefMatrix::new(identity(2).scale(3.0)).unwrap();
        let y = random_hermitian(2, 2);
        let t = t_closed_form(&x3, &y).unwrap().value;
        assert!((t - y.unscale(3.0)).norm() < 1e-14);
    }

    #[test]
    fn quadrature_examples() {
        let rule = QuadratureConfig::default().half_line().unwrap();
        let t = t_quadrature(&PosDefMatrix::identity(2), &identity(2), &rule)
            .unwrap()
            .value;
        assert!((t - identity(2)).norm() < 1e-8);

        let x = random_posdef(3, 21, (0.1, 10.0)).unwrap();
        let y = random_hermitian(22, 3);
        let q = t_quadrature(&x, &y, &rule).unwrap().value;
        let c = t_closed_form(&x, &y).unwrap().value;
        assert!(rel_gap(&q, &c) < 1e-7);

        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(t_quadrature(&x, &zero, &rule).unwrap().value.norm(), 0.0);
    }

    #[test]
    fn finite_difference_examples() {
        let t = t_finite_difference(&PosDefMatrix::identity(2), &identity(2), 1e-4)
            .unwrap()
            .value;
        assert!((t - identity(2)).norm() < 1e-8);

        let x = random_posdef(4, 31, (0.1, 10.0)).unwrap();
        let y = random_hermitian(32, 4);
        let c = t_closed_form(&x, &y).unwrap().value;
        let r = default_step(&x, &y);
        let f = t_finite_difference(&x, &y, r).unwrap().value;
        assert!(rel_gap(&f, &c) < 1e-6);

        // O(r²): halving the step quarters the error (steps chosen well above round-off)
        let e1 = (t_finite_difference(&x, &y, 2e-2).unwrap().value - &c).norm();
        let e2 = (t_finite_difference(&x, &y, 1e-2).unwrap().value - &c).norm();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn triangle_agrees_with_conditioned_step() {
        let rule = QuadratureConfig::default().half_line().unwrap();
        let mut worst = 0.0f64;
        for seed in 0..20u64 {
            let mut rng = seeded_rng(1000 + seed);
            let x = crate::linalg::random_posdef_with(&mut rng, 4, (0.1, 10.0)).unwrap();
            let y = hermitize(&random_gaussian_matrix(&mut rng, 4, 4));
            let r = t_operator_triangle_check(&x, &y, &rule, conditioned_step(&x, &y)).unwrap();
            worst = worst.max(r.rel_gap);
        }
        assert!(worst <= 1e-7, "worst {worst:e}");
        let x = random_posdef(2, 51, (0.1, 10.0)).unwrap();
        let y = random_hermitian(52, 2);
        assert!(conditioned_step(&x, &y) <= default_step(&x, &y));
    }

    #[test]
    fn finite_difference_step_too_large() {
        let x = PosDefMatrix::identity(2);
        let y = identity(2);
        assert!(matches!(
            t_finite_difference(&x, &y, 2.0),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let x = PosDefMatrix::identity(2);
        assert!(matches!(
            t_closed_form(&x, &identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn beta_sandwich_examples() {
        let rule = QuadratureConfig::default().real_line().unwrap();
        let id = PosDefMatrix::identity(3);
        let r = beta_sandwich_check(&id, &id, &rule).unwrap();
        assert!(r.pass && (r.lhs - 3f64.sqrt()).abs() < 1e-12);

        let a1 = random_posdef(3, 41, (0.1, 10.0)).unwrap();
        let r = beta_sandwich_check(&a1, &id, &rule).unwrap();
        assert!(r.pass && (r.rhs - a1.matrix().norm()).abs() < 1e-12);

        let a2 = random_posdef(3, 42, (0.1, 10.0)).unwrap();
        let r = beta_sandwich_check(&a1, &a2, &rule).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.rel_gap <= 1e-8);
    }
}
