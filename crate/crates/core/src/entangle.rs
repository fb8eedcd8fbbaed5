//! Non-normalized maximally entangled vectors `Ω_m`, their projectors `P_m`,
//! and the tensor-factor layout used by the resolvent form of the n-matrix
//! inequality.
//!
//! `Ω_m = Σ |l_1 … l_m⟩ ⊗ |l_1 … l_m⟩` lives on `m + m` factors of dimension
//! `d`; factor `i` is paired with factor `m + i`. Conjugation and transpose are
//! taken in the standard basis.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::combinatorics::{shape_params, thue_morse};
use crate::error::{Error, Result};
use crate::linalg::{conj, identity, kron, kron_all, ComplexMatrix, ComplexVector};
use crate::report::{Tolerance, TrialReport};
use crate::DIMENSION_CAP;

/// `d^factors`, or `DimensionCap` above the cap.
pub fn checked_dim(d: usize, factors: usize) -> Result<usize> {
    let dim = u32::try_from(factors)
        .ok()
        .and_then(|f| d.checked_pow(f))
        .unwrap_or(usize::MAX);
    if dim > DIMENSION_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: DIMENSION_CAP,
        });
    }
    Ok(dim)
}

#[derive(Debug, Clone)]
pub struct EntangledState {
    pub d: usize,
    pub m: usize,
    pub vector: ComplexVector,
}

impl EntangledState {
    pub fn norm_squared(&self) -> f64 {
        self.vector.norm_squared()
    }

    pub fn projector(&self) -> EntangledProjector {
        EntangledProjector {
            d: self.d,
            m: self.m,
            matrix: &self.vector * self.vector.adjoint(),
        }
    }

    /// `⟨Ω| M |Ω⟩`, i.e. `Tr[P_m M]`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Complex64 {
        (self.vector.adjoint() * m * &self.vector)[(0, 0)]
    }
}

/// `Ω_m` on `(C^d)^{⊗2m}`.
pub fn omega(d: usize, m: usize) -> Result<EntangledState> {
    if d < 2 || m < 1 {
        return Err(Error::InvalidArgument(format!(
            "Ω_m needs d ≥ 2 and m ≥ 1, got d={d}, m={m}"
        )));
    }
    let half = checked_dim(d, m)?;
    let dim = checked_dim(d, 2 * m)?;
    let mut vector = ComplexVector::zeros(dim);
    for a in 0..half {
        vector[a * half + a] = Complex64::new(1.0, 0.0);
    }
    Ok(EntangledState { d, m, vector })
}

#[derive(Debug, Clone)]
pub struct EntangledProjector {
    pub d: usize,
    pub m: usize,
    pub matrix: ComplexMatrix,
}

/// `P_m = |Ω_m⟩⟨Ω_m|`, with `P_m² = d^m P_m`.
pub fn projector(d: usize, m: usize) -> Result<EntangledProjector> {
    Ok(omega(d, m)?.projector())
}

pub const PAIRING_TOLERANCE: f64 = 1e-12;

/// `Tr[XY] = Tr[P_m (X ⊗ Yᵀ)] = Tr[P_m (X ⊗ conj Y)]` for self-adjoint `X, Y` on `(C^d)^{⊗m}`.
///
/// The reported gap is the largest pairwise difference divided by `‖X‖_F ‖Y‖_F`.
pub fn pairing_identity_check(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    d: usize,
    m: usize,
) -> Result<TrialReport> {
    let p = projector(d, m)?;
    let local = checked_dim(d, m)?;
    for a in [x, y] {
        if a.nrows() != local || a.ncols() != local {
            return Err(Error::DimensionMismatch {
                expected: local,
                got: a.nrows(),
            });
        }
    }
    let direct = (x * y).trace();
    let via_transpose = (&p.matrix * kron(x, &y.transpose())).trace();
    let via_conj = (&p.matrix * kron(x, &conj(y))).trace();
    let gap = [
        (direct - via_transpose).norm(),
        (direct - via_conj).norm(),
        (via_transpose - via_conj).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let scale = x.norm() * y.norm();
    let unit_gap = if scale > 0.0 { gap / scale } else { gap };
    Ok(TrialReport::decided(
        "pairing_identity",
        direct.re,
        via_conj.re,
        gap,
        Tolerance::new(PAIRING_TOLERANCE, 0.0),
        unit_gap <= PAIRING_TOLERANCE,
    )
    .param("d", d)
    .param("m", m)
    .param("unit_gap", unit_gap))
}

/// What occupies one tensor slot of the left operand (the resolvent argument).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftSlot {
    /// Matrix number `k ∈ 2..=n-1`, conjugated when `α_k = 1`.
    Operand {
        k: usize,
        conjugate: bool,
    },
    Identity,
}

/// What occupies one tensor slot of the right operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightSlot {
    /// `A_1`.
    First,
    /// `conj(A_n)`.
    LastConjugated,
    /// Part of the `P_{2^j}` block; `position` counts from the block start.
    Projector { j: usize, position: usize },
}

/// A `P_{2^j}` block spanning `2^{j+1}` consecutive factors starting at `start` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectorBlock {
    pub j: usize,
    pub start: usize,
    pub len: usize,
}

/// Tensor layout of `Tr[P_{2^{n'-1}} T_𝒜(ℬ)]` with
/// `𝒜 = ⊗_{k=2}^{n-1} C^{α_k} X_k C^{α_k} ⊗ I^{⊗ρ}` and `ℬ = A_1 ⊗ conj(A_n) ⊗ ⊗_{j=0}^{n'-2} P_{2^j}`.
#[derive(Debug, Clone)]
pub struct FactorLayout {
    pub n: usize,
    pub d: usize,
    pub n_prime: u32,
    pub rho: usize,
    pub factor_count: usize,
    pub left: Vec<LeftSlot>,
    pub right: Vec<RightSlot>,
    pub blocks: Vec<ProjectorBlock>,
    /// Block size `m = 2^{n'-1}` of the outer projector pairing factor `i` with `m + i`.
    pub outer_m: usize,
}

pub fn build_layout(n: usize, d: usize) -> Result<FactorLayout> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "layout needs n ≥ 3, got {n}"
        )));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "layout needs d ≥ 2, got {d}"
        )));
    }
    let shape = shape_params(n);
    let factor_count = shape.factor_count();
    checked_dim(d, factor_count)?;

    let mut left: Vec<LeftSlot> = (2..n)
        .map(|k| LeftSlot::Operand {
            k,
            conjugate: thue_morse(k) == 1,
        })
        .collect();
    left.extend(std::iter::repeat_n(LeftSlot::Identity, shape.rho));

    let mut right = vec![RightSlot::First, RightSlot::LastConjugated];
    let mut blocks = Vec::new();
    for j in 0..shape.n_prime.saturating_sub(1) as usize {
        let len = 2usize << j;
        blocks.push(ProjectorBlock {
            j,
            start: right.len(),
            len,
        });
        right.extend((0..len).map(|position| RightSlot::Projector { j, position }));
    }
    debug_assert_eq!(left.len(), factor_count);
    debug_assert_eq!(right.len(), factor_count);

    Ok(FactorLayout {
        n,
        d,
        n_prime: shape.n_prime,
        rho: shape.rho,
        factor_count,
        left,
        right,
        blocks,
        outer_m: factor_count / 2,
    })
}

impl FactorLayout {
    pub fn total_dim(&self) -> usize {
        self.d.pow(self.factor_count as u32)
    }

    /// `⊗ C^{α_k} f(k) C^{α_k} ⊗ I^{⊗ρ}`, where `f(k)` supplies the matrix for slot `k`.
    pub fn left_operand<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(usize) -> ComplexMatrix,
    {
        let factors: Vec<ComplexMatrix> = self
            .left
            .iter()
            .map(|slot| match *slot {
                LeftSlot::Operand { k, conjugate: true } => conj(&f(k)),
                LeftSlot::Operand {
                    k,
                    conjugate: false,
                } => f(k),
                LeftSlot::Identity => identity(self.d),
            })
            .collect();
        kron_all(&factors)
    }

    /// `first ⊗ conj(last) ⊗ P_1 ⊗ P_2 ⊗ … ⊗ P_{2^{n'-2}}`.
    pub fn right_operand(
        &self,
        first: &ComplexMatrix,
        last: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        let mut out = kron(first, &conj(last));
        for block in &self.blocks {
            out = kron(&out, &projector(self.d, block.len / 2)?.matrix);
        }
        Ok(out)
    }

    /// `Ω_{2^{n'-1}}`, whose projector is applied outside the resolvent.
    pub fn outer_state(&self) -> Result<EntangledState> {
        omega(self.d, self.outer_m)
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "n = {}, d = {}, n' = {}, rho = {}, factors = {}, total dimension = {}",
            self.n,
            self.d,
            self.n_prime,
            self.rho,
            self.factor_count,
            self.total_dim()
        );
        let left: Vec<String> = self
            .left
            .iter()
            .map(|slot| match *slot {
                LeftSlot::Operand { k, conjugate: true } => format!("conj(X{k})"),
                LeftSlot::Operand {
                    k,
                    conjugate: false,
                } => format!("X{k}"),
                LeftSlot::Identity => "I".into(),
            })
            .collect();
        let _ = writeln!(s, "left  (resolvent argument): {}", left.join(" ⊗ "));
        let mut right = vec!["A1".to_string(), format!("conj(A{})", self.n)];
        for block in &self.blocks {
            right.push(format!(
                "P_{}[factors {}..={}]",
                1usize << block.j,
                block.start + 1,
                block.start + block.len
            ));
        }
        let _ = writeln!(s, "right (resolvent direction): {}", right.join(" ⊗ "));
        let _ = writeln!(
            s,
            "outer projector: P_{} pairing factors 1..={} with {}..={}",
            self.outer_m,
            self.outer_m,
            self.outer_m + 1,
            self.factor_count
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, hermitize, random_gaussian_matrix, seeded_rng};

    #[test]
    fn omega_examples() {
        let o = omega(2, 1).unwrap();
        let expected = [1.0, 0.0, 0.0, 1.0];
        for (z, e) in o.vector.iter().zip(expected) {
            assert_eq!(*z, c64(e, 0.0));
        }
        assert_eq!(omega(3, 1).unwrap().norm_squared(), 3.0);
        assert_eq!(omega(2, 2).unwrap().norm_squared(), 4.0);
        assert!(omega(1, 1).is_err());
        assert!(matches!(omega(2, 5), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn projector_algebra_is_exact() {
        for (d, m) in [(2, 1), (3, 1), (2, 2)] {
            let p = projector(d, m).unwrap().matrix;
            let dm = (d as f64).powi(m as i32);
            assert_eq!(&p * &p, p.scale(dm));
            assert_eq!(conj(&p), p);
            assert_eq!(p.adjoint(), p);
            assert_eq!(p.trace(), c64(dm, 0.0));
            assert!(p.iter().all(|z| *z == c64(0.0, 0.0) || *z == c64(1.0, 0.0)));
        }
    }

    #[test]
    fn projector_nesting() {
        // P_{2^j} on C^d equals P_{2^{j-1}} on C^{d²} when factor pairs are grouped
        assert_eq!(
            projector(2, 2).unwrap().matrix,
            projector(4, 1).unwrap().matrix
        );
        assert_eq!(
            projector(2, 4).unwrap().matrix,
            projector(4, 2).unwrap().matrix
        );
        assert_eq!(
            projector(3, 2).unwrap().matrix,
            projector(9, 1).unwrap().matrix
        );
    }

    #[test]
    fn pairing_identity_examples() {
        let id = identity(3);
        let r = pairing_identity_check(&id, &id, 3, 1).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, 3.0);

        let mut rng = seeded_rng(8);
        for (d, m) in [(2usize, 1usize), (2, 2)] {
            let dim = d.pow(m as u32);
            let x = hermitize(&random_gaussian_matrix(&mut rng, dim, dim));
            let y = hermitize(&random_gaussian_matrix(&mut rng, dim, dim));
            let r = pairing_identity_check(&x, &y, d, m).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn layout_small_cases() {
        let l3 = build_layout(3, 2).unwrap();
        assert_eq!(l3.factor_count, 2);
        assert_eq!(
            l3.left,
            vec![
                LeftSlot::Operand {
                    k: 2,
                    conjugate: false
                },
                LeftSlot::Identity
            ]
        );
        assert_eq!(l3.right, vec![RightSlot::First, RightSlot::LastConjugated]);
        assert_eq!(l3.outer_m, 1);

        let l4 = build_layout(4, 3).unwrap();
        assert_eq!(
            l4.left,
            vec![
                LeftSlot::Operand {
                    k: 2,
                    conjugate: false
                },
                LeftSlot::Operand {
                    k: 3,
                    conjugate: true
                }
            ]
        );
        assert!(l4.blocks.is_empty());

        let l6 = build_layout(6, 2).unwrap();
        assert_eq!(l6.factor_count, 4);
        assert_eq!(
            l6.blocks,
            vec![ProjectorBlock {
                j: 0,
                start: 2,
                len: 2
            }]
        );
        assert_eq!(l6.outer_m, 2);
        let conjugated: Vec<bool> = l6
            .left
            .iter()
            .map(|s| {
                matches!(
                    s,
                    LeftSlot::Operand {
                        conjugate: true,
                        ..
                    }
                )
            })
            .collect();
        assert_eq!(conjugated, vec![false, true, true, false]);

        let l5 = build_layout(5, 2).unwrap();
        assert_eq!(l5.rho, 1);
        assert_eq!(l5.left.last(), Some(&LeftSlot::Identity));
    }

    #[test]
    fn layout_operand_dimensions() {
        for n in 3..=10 {
            let layout = build_layout(n, 2).unwrap();
            let a = layout.left_operand(|_| identity(2));
            let b = layout.right_operand(&identity(2), &identity(2)).unwrap();
            assert_eq!(a.nrows(), layout.total_dim());
            assert_eq!(b.nrows(), layout.total_dim());
            assert_eq!(
                layout.outer_state().unwrap().vector.len(),
                layout.total_dim()
            );
        }
        assert!(matches!(
            build_layout(7, 3),
            Err(Error::DimensionCap { .. })
        ));
        assert!(build_layout(2, 2).is_err());
    }
}
