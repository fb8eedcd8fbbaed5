//! Both sides of every trace inequality and identity, plus the checks that
//! turn them into [`TrialReport`]s.
//!
//! For positive definite `A_1, …, A_n` the chain being verified is
//!
//! ```text
//! Tr exp(Σ log A_k) ≤ ∫ Tr[A_n A_{n-1}^{(1+it)/2} ⋯ A_2^{(1+it)/2} A_1 A_2^{(1-it)/2} ⋯ A_{n-1}^{(1-it)/2}] β(t) dt
//!                   = Tr[P_{2^{n'-1}} T_𝒜(ℬ)]          (after reordering A_2..A_{n-1} by π)
//! ```
//!
//! with `𝒜 = ⊗ C^{α_k} A_k^{-1} C^{α_k} ⊗ I^{⊗ρ}` and `ℬ = A_1 ⊗ conj(A_n) ⊗ ⊗_j P_{2^j}`.

use nalgebra::LU;
use num_complex::Complex64;

use crate::combinatorics::{build_permutation, MidPermutation};
use crate::entangle::{build_layout, EntangledState, FactorLayout};
use crate::error::{Error, Result};
use crate::frechet::{beta_sandwich, t_closed_form, t_quadrature};
use crate::linalg::{
    expm_hermitian, half_minus, half_plus, identity, ComplexMatrix, ComplexVector, PosDefMatrix,
};
use crate::quadrature::{integrate_beta, integrate_halfline, QuadratureConfig, QuadratureRule};
use crate::report::{Tolerance, TrialReport, INEQUALITY_TOLERANCE};

pub const TENSOR_IDENTITY_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-9);
pub const POWERS_RESOLVENT_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-7);
pub const POWERS_LIEB3_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-8);
pub const EQUALITY_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-8);
pub const LOG_DERIVATIVE_TOLERANCE: Tolerance = Tolerance::new(0.0, 1e-5);
/// Pairwise agreement of the four commutator expressions, relative to `‖A_1‖ ‖A_2‖`.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-6;
/// Required gap at the largest `t` of the limit check.
pub const PROJECTION_ABS_TOLERANCE: f64 = 1e-6;
/// Required ratio of the gap at the largest `t` to the gap at the smallest.
pub const PROJECTION_RATIO_TOLERANCE: f64 = 1e-3;

/// Imaginary parts above this fraction of `|z|` make a trace unacceptable as real.
const IMAGINARY_REJECT: f64 = 1e-8;

fn to_real(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_REJECT * z.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidue {
            real: z.re,
            imag: z.im,
        });
    }
    Ok(z.re)
}

fn common_dim(a: &[PosDefMatrix], min_len: usize) -> Result<usize> {
    if a.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_len} matrices, got {}",
            a.len()
        )));
    }
    let d = a[0].dim();
    for m in a {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: m.dim(),
            });
        }
    }
    Ok(d)
}

pub fn sum_of_logs(a: &[PosDefMatrix]) -> ComplexMatrix {
    let d = a.first().map_or(0, PosDefMatrix::dim);
    a.iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m.log())
}

/// `Tr exp(Σ_k log A_k)`.
pub fn lhs_exp_sum_log(a: &[PosDefMatrix]) -> Result<f64> {
    common_dim(a, 2)?;
    to_real(expm_hermitian(&sum_of_logs(a)).trace())
}

/// `Tr[A_1 A_2]`.
pub fn rhs_gt(a1: &PosDefMatrix, a2: &PosDefMatrix) -> Result<f64> {
    common_dim(&[a1.clone(), a2.clone()], 2)?;
    to_real((a1.matrix() * a2.matrix()).trace())
}

/// `Tr[A_3 T_{A_2^{-1}}(A_1)]`.
pub fn rhs_lieb3(a1: &PosDefMatrix, a2: &PosDefMatrix, a3: &PosDefMatrix) -> Result<f64> {
    common_dim(&[a1.clone(), a2.clone(), a3.clone()], 3)?;
    let t = t_closed_form(&a2.inverse(), a1.matrix())?.value;
    to_real((a3.matrix() * t).trace())
}

/// `Tr[X_n X_{n-1}^{(1+it)/2} ⋯ X_2^{(1+it)/2} X_1 X_2^{(1-it)/2} ⋯ X_{n-1}^{(1-it)/2}]`.
pub fn nested_power_trace(x: &[PosDefMatrix], t: f64) -> Complex64 {
    let n = x.len();
    let (plus, minus) = (half_plus(t), half_minus(t));
    let inner = x[1..n - 1].iter().fold(x[0].matrix().clone(), |acc, xk| {
        xk.power(plus) * acc * xk.power(minus)
    });
    (x[n - 1].matrix() * inner).trace()
}

/// `∫ Tr[A_n A_{n-1}^{(1+it)/2} ⋯ A_1 ⋯ A_{n-1}^{(1-it)/2}] β(t) dt`.
pub fn rhs_complex_powers(a: &[PosDefMatrix], rule: &QuadratureRule) -> Result<f64> {
    common_dim(a, 3)?;
    let integral = integrate_beta(|t| nested_power_trace(a, t), rule);
    to_real(integral.value)
}

/// Reorders the middle matrices so that `X_{π(k)} = A_k`; the ends stay put.
pub fn mid_reorder<T: Clone>(a: &[T], perm: &MidPermutation) -> Vec<T> {
    let n = a.len();
    assert_eq!(
        perm.n, n,
        "permutation built for n={}, got {n} matrices",
        perm.n
    );
    let inv = perm.inverse();
    (1..=n)
        .map(|k| {
            if k == 1 || k == n {
                a[k - 1].clone()
            } else {
                a[inv.apply(k) - 1].clone()
            }
        })
        .collect()
}

/// Operands of the resolvent form: layout, `𝒜` and `ℬ`.
pub struct ResolventOperands {
    pub layout: FactorLayout,
    pub resolvent_argument: PosDefMatrix,
    pub direction: ComplexMatrix,
    pub outer: EntangledState,
}

pub fn resolvent_operands(a: &[PosDefMatrix]) -> Result<ResolventOperands> {
    let d = common_dim(a, 3)?;
    let n = a.len();
    let layout = build_layout(n, d)?;
    let inverses: Vec<ComplexMatrix> = a.iter().map(|m| m.inverse().matrix().clone()).collect();
    let resolvent_argument = PosDefMatrix::new(layout.left_operand(|k| inverses[k - 1].clone()))?;
    let direction = layout.right_operand(a[0].matrix(), a[n - 1].matrix())?;
    let outer = layout.outer_state()?;
    Ok(ResolventOperands {
        layout,
        resolvent_argument,
        direction,
        outer,
    })
}

/// `Tr[P_{2^{n'-1}} T_𝒜(ℬ)]` with the closed-form `T`.
pub fn rhs_resolvent(a: &[PosDefMatrix]) -> Result<f64> {
    let ops = resolvent_operands(a)?;
    let t = t_closed_form(&ops.resolvent_argument, &ops.direction)?.value;
    to_real(ops.outer.expectation(&t))
}

/// `rhs_resolvent` with `T` integrated over resolvents; a slow independent cross-check.
pub fn rhs_resolvent_quadrature(a: &[PosDefMatrix], half_line: &QuadratureRule) -> Result<f64> {
    let ops = resolvent_operands(a)?;
    let t = t_quadrature(&ops.resolvent_argument, &ops.direction, half_line)?.value;
    to_real(ops.outer.expectation(&t))
}

/// Both sides of the pointwise-in-`t` identity behind the resolvent form:
/// the nested complex-power trace of `X`, and
/// `Tr[P (⊗ C^{α_k} X_{π(k)} C^{α_k} ⊗ I^{⊗ρ})^{(1+it)/2} ℬ_X (⋯)^{(1-it)/2}]`.
pub fn tensor_identity_sides(
    x: &[PosDefMatrix],
    t: f64,
    perm: &MidPermutation,
) -> Result<(Complex64, Complex64)> {
    let d = common_dim(x, 3)?;
    let n = x.len();
    let layout = build_layout(n, d)?;
    let lhs = nested_power_trace(x, t);

    let left = PosDefMatrix::new(layout.left_operand(|k| x[perm.apply(k) - 1].matrix().clone()))?;
    let direction = layout.right_operand(x[0].matrix(), x[n - 1].matrix())?;
    let sandwich = left.power(half_plus(t)) * direction * left.power(half_minus(t));
    let rhs = layout.outer_state()?.expectation(&sandwich);
    Ok((lhs, rhs))
}

pub fn tensor_identity_check(
    x: &[PosDefMatrix],
    t: f64,
    perm: &MidPermutation,
) -> Result<TrialReport> {
    let (lhs, rhs) = tensor_identity_sides(x, t, perm)?;
    Ok(TrialReport::with_gap(
        "tensor_identity",
        lhs.norm(),
        rhs.norm(),
        (lhs - rhs).norm(),
        TENSOR_IDENTITY_TOLERANCE,
    )
    .param("n", x.len())
    .param("t", t)
    .param("lhs_im", lhs.im)
    .param("rhs_im", rhs.im))
}

/// `rhs_complex_powers` of the reordered family against `rhs_resolvent` of the original.
pub fn powers_vs_resolvent_check(a: &[PosDefMatrix], rule: &QuadratureRule) -> Result<TrialReport> {
    let perm = build_permutation(a.len());
    let powers = rhs_complex_powers(&mid_reorder(a, &perm), rule)?;
    let main = rhs_resolvent(a)?;
    Ok(TrialReport::identity(
        "powers_vs_resolvent",
        powers,
        main,
        POWERS_RESOLVENT_TOLERANCE,
    )
    .param("n", a.len()))
}

pub fn powers_vs_lieb3_check(a: &[PosDefMatrix], rule: &QuadratureRule) -> Result<TrialReport> {
    if a.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "three matrices expected, got {}",
            a.len()
        )));
    }
    let powers = rhs_complex_powers(a, rule)?;
    let lieb = rhs_lieb3(&a[0], &a[1], &a[2])?;
    Ok(
        TrialReport::identity("powers_vs_lieb3", powers, lieb, POWERS_LIEB3_TOLERANCE)
            .param("n", 3),
    )
}

pub fn golden_thompson_check(a: &[PosDefMatrix]) -> Result<TrialReport> {
    let [a1, a2] = a else {
        return Err(Error::InvalidArgument(format!(
            "two matrices expected, got {}",
            a.len()
        )));
    };
    Ok(TrialReport::inequality(
        "golden_thompson",
        lhs_exp_sum_log(a)?,
        rhs_gt(a1, a2)?,
        INEQUALITY_TOLERANCE,
    )
    .param("n", 2))
}

pub fn lieb3_check(a: &[PosDefMatrix]) -> Result<TrialReport> {
    let [a1, a2, a3] = a else {
        return Err(Error::InvalidArgument(format!(
            "three matrices expected, got {}",
            a.len()
        )));
    };
    Ok(TrialReport::inequality(
        "lieb3",
        lhs_exp_sum_log(a)?,
        rhs_lieb3(a1, a2, a3)?,
        INEQUALITY_TOLERANCE,
    )
    .param("n", 3))
}

pub fn complex_powers_check(a: &[PosDefMatrix], rule: &QuadratureRule) -> Result<TrialReport> {
    Ok(TrialReport::inequality(
        "complex_powers",
        lhs_exp_sum_log(a)?,
        rhs_complex_powers(a, rule)?,
        INEQUALITY_TOLERANCE,
    )
    .param("n", a.len()))
}

pub fn resolvent_check(a: &[PosDefMatrix]) -> Result<TrialReport> {
    Ok(TrialReport::inequality(
        "resolvent",
        lhs_exp_sum_log(a)?,
        rhs_resolvent(a)?,
        INEQUALITY_TOLERANCE,
    )
    .param("n", a.len()))
}

/// Equality for a commuting family: Golden-Thompson at `n = 2`, Lieb's three-matrix form at `n = 3`,
/// the `β`-averaged form for `n ≥ 3`. One report per applicable form.
pub fn equality_case_checks(a: &[PosDefMatrix], rule: &QuadratureRule) -> Result<Vec<TrialReport>> {
    let n = a.len();
    let lhs = lhs_exp_sum_log(a)?;
    let mut out = Vec::new();
    if n == 2 {
        out.push(("equality_golden_thompson", rhs_gt(&a[0], &a[1])?));
    }
    if n == 3 {
        out.push(("equality_lieb3", rhs_lieb3(&a[0], &a[1], &a[2])?));
    }
    if n >= 3 {
        out.push(("equality_complex_powers", rhs_complex_powers(a, rule)?));
    }
    Ok(out
        .into_iter()
        .map(|(form, rhs)| {
            TrialReport::identity("equality_cases", lhs, rhs, EQUALITY_TOLERANCE)
                .param("form", form)
                .param("n", n)
        })
        .collect())
}

/// `d · exp(Tr[Σ log A_k] / d)`.
pub fn det_mean(a: &[PosDefMatrix]) -> Result<f64> {
    let d = common_dim(a, 1)? as f64;
    let tr = to_real(sum_of_logs(a).trace())?;
    Ok(d * (tr / d).exp())
}

/// `d · exp(Tr[Σ log A_k]/d) ≤ Tr[P_1 T_{(A_2 ⊗ conj A_3)^{-1}}(A_1 ⊗ conj A_4)]`.
pub fn det_bound_check(a: &[PosDefMatrix]) -> Result<TrialReport> {
    if a.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "four matrices expected, got {}",
            a.len()
        )));
    }
    Ok(TrialReport::inequality(
        "det_bound",
        det_mean(a)?,
        rhs_resolvent(a)?,
        INEQUALITY_TOLERANCE,
    )
    .param("n", 4))
}

/// `d · exp(Tr M / d) ≤ Tr exp M` for `M = Σ log A_k`.
pub fn jensen_check(a: &[PosDefMatrix]) -> Result<TrialReport> {
    Ok(TrialReport::inequality(
        "jensen",
        det_mean(a)?,
        lhs_exp_sum_log(a)?,
        INEQUALITY_TOLERANCE,
    )
    .param("n", a.len()))
}

/// The four equal expressions for `A_1 A_2 - ∫ A_2^{(1+it)/2} A_1 A_2^{(1-it)/2} β dt`,
/// with `R = (A_2^{-1} + τ)^{-1}`:
///
/// 0. the `β`-average itself,
/// 1. `∫ (A_1 R² - R A_1 R) dτ`,
/// 2. `∫ [A_1, R] R dτ`,
/// 3. `∫ R A_2^{-1} [A_1, A_2] A_2^{-1} R² dτ`.
pub fn commutator_chain(
    a1: &PosDefMatrix,
    a2: &PosDefMatrix,
    quad: &QuadratureConfig,
) -> Result<[ComplexMatrix; 4]> {
    common_dim(&[a1.clone(), a2.clone()], 2)?;
    let real_line = quad.real_line()?;
    let half_line = quad.half_line()?;
    let x1 = a1.matrix();
    let x2 = a2.matrix();
    let inv2 = a2.inverse().matrix().clone();
    let id = identity(a1.dim());
    let resolvent = |tau: f64| {
        LU::new(&inv2 + id.scale(tau))
            .try_inverse()
            .expect("A_2^{-1} + τ is invertible")
    };
    let commutator = x1 * x2 - x2 * x1;
    let sandwiched = &inv2 * &commutator * &inv2;

    let e0 = x1 * x2 - beta_sandwich(x1, a2, &real_line);
    let e1 = integrate_halfline(
        |tau| {
            let r = resolvent(tau);
            x1 * &r * &r - &r * x1 * &r
        },
        &half_line,
    );
    let e2 = integrate_halfline(
        |tau| {
            let r = resolvent(tau);
            (x1 * &r - &r * x1) * &r
        },
        &half_line,
    );
    let e3 = integrate_halfline(
        |tau| {
            let r = resolvent(tau);
            &r * &sandwiched * &r * &r
        },
        &half_line,
    );
    Ok([e0, e1, e2, e3])
}

pub fn commutator_chain_check(
    a1: &PosDefMatrix,
    a2: &PosDefMatrix,
    quad: &QuadratureConfig,
) -> Result<TrialReport> {
    let e = commutator_chain(a1, a2, quad)?;
    let mut gap = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            gap = gap.max((&e[i] - &e[j]).norm());
        }
    }
    let scale = a1.matrix().norm() * a2.matrix().norm();
    let largest = e.iter().map(|m| m.norm()).fold(0.0, f64::max);
    Ok(TrialReport::decided(
        "commutator_chain",
        e[0].norm(),
        e[3].norm(),
        gap,
        Tolerance::new(0.0, COMMUTATOR_TOLERANCE),
        gap <= COMMUTATOR_TOLERANCE * scale,
    )
    .param("scaled_gap", gap / scale)
    .param("scaled_max_norm", largest / scale))
}

/// `|Tr exp(A - tP) - exp⟨v, Av⟩|` along `t_grid`, with `P = I - vv†`.
pub fn projection_limit_gaps(
    a: &ComplexMatrix,
    v: &ComplexVector,
    t_grid: &[f64],
) -> Result<(f64, Vec<(f64, f64)>)> {
    let dim = a.nrows();
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    let p = identity(dim) - v * v.adjoint();
    let limit = (v.adjoint() * a * v)[(0, 0)].re.exp();
    let values = t_grid
        .iter()
        .map(|&t| {
            let value = to_real(expm_hermitian(&(a - p.scale(t))).trace())?;
            Ok((value, (value - limit).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((limit, values))
}

/// Passes when the gaps decrease along the grid, and the gap at the largest `t` is at most `1e-6`
/// and at most `1e-3` times the gap at the smallest `t`.
pub fn projection_limit_check(
    a: &ComplexMatrix,
    v: &ComplexVector,
    t_grid: &[f64],
) -> Result<TrialReport> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty t grid".into()));
    }
    let (limit, values) = projection_limit_gaps(a, v, t_grid)?;
    let gaps: Vec<f64> = values.iter().map(|&(_, g)| g).collect();
    let (last_value, last_gap) = *values.last().expect("non-empty");
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let ratio = if gaps[0] > 0.0 {
        last_gap / gaps[0]
    } else {
        0.0
    };
    Ok(TrialReport::decided(
        "projection_limit",
        last_value,
        limit,
        last_gap,
        Tolerance::new(PROJECTION_ABS_TOLERANCE, 0.0),
        decreasing && last_gap <= PROJECTION_ABS_TOLERANCE && ratio <= PROJECTION_RATIO_TOLERANCE,
    )
    .param("t_max", *t_grid.last().expect("non-empty"))
    .param("gaps", gaps)
    .param("ratio_last_first", ratio))
}

/// Default finite-difference step for the derivative check.
pub const LOG_DERIVATIVE_STEP: f64 = 1e-4;

/// `λ_min(𝒜) / ‖ℬ‖₂`: steps well below this keep `𝒜 ± rℬ` positive definite.
pub fn log_derivative_step_scale(ops: &ResolventOperands) -> f64 {
    let b_norm = crate::linalg::SpectralDecomposition::of_hermitian(&ops.direction)
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    ops.resolvent_argument.spectral().min_eigenvalue() / b_norm.max(f64::MIN_POSITIVE)
}

/// `LOG_DERIVATIVE_STEP`, shrunk when it would move `𝒜` by more than `1e-3` of its smallest eigenvalue.
pub fn log_derivative_default_step(ops: &ResolventOperands) -> f64 {
    LOG_DERIVATIVE_STEP.min(1e-3 * log_derivative_step_scale(ops))
}

/// Central difference in `r` of `Tr[P exp(-log 𝒜 + log(𝒜 + rℬ))]` at `r = 0`.
pub fn log_derivative_difference(ops: &ResolventOperands, r: f64) -> Result<f64> {
    let log_a = ops.resolvent_argument.log();
    let value = |s: f64| -> Result<f64> {
        let shifted = PosDefMatrix::new(ops.resolvent_argument.matrix() + ops.direction.scale(s))
            .map_err(|e| match e {
            Error::NonPositiveEigenvalue { .. } => Error::StepTooLarge { step: r },
            other => other,
        })?;
        let exponent = shifted.log() - &log_a;
        to_real(ops.outer.expectation(&expm_hermitian(&exponent)))
    };
    Ok((value(r)? - value(-r)?) / (2.0 * r))
}

/// Compares the finite-difference derivative against `rhs_resolvent`; `r = None` uses the default step.
pub fn log_derivative_check(a: &[PosDefMatrix], r: Option<f64>) -> Result<TrialReport> {
    let ops = resolvent_operands(a)?;
    let step = r.unwrap_or_else(|| log_derivative_default_step(&ops));
    let derivative = log_derivative_difference(&ops, step)?;
    let t = t_closed_form(&ops.resolvent_argument, &ops.direction)?.value;
    let main = to_real(ops.outer.expectation(&t))?;
    Ok(
        TrialReport::identity("log_derivative", derivative, main, LOG_DERIVATIVE_TOLERANCE)
            .param("n", a.len())
            .param("r", step),
    )
}

/// Ratio `err(r) / err(r/2)` of the finite-difference mismatch; about 4 for an `O(r²)` scheme.
/// The default `r` is `1e-2 · λ_min(𝒜)/‖ℬ‖₂`, where truncation error dominates round-off.
pub fn log_derivative_convergence(a: &[PosDefMatrix], r: Option<f64>) -> Result<f64> {
    let ops = resolvent_operands(a)?;
    let step = r.unwrap_or_else(|| 1e-2 * log_derivative_step_scale(&ops));
    let t = t_closed_form(&ops.resolvent_argument, &ops.direction)?.value;
    let main = to_real(ops.outer.expectation(&t))?;
    let e1 = (log_derivative_difference(&ops, step)? - main).abs();
    let e2 = (log_derivative_difference(&ops, 0.5 * step)? - main).abs();
    Ok(e1 / e2)
}

/// `Tr[P_1 (X ⊗ Y)]` helper used by tests of the three-matrix reduction.
pub fn entangled_trace(x: &ComplexMatrix, y: &ComplexMatrix, d: usize) -> Result<Complex64> {
    let omega = crate::entangle::omega(d, 1)?;
    Ok(omega.expectation(&crate::linalg::kron(x, y)))
}
