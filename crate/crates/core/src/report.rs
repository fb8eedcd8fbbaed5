use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub const fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }
}

/// Verdict rule for every inequality campaign: `lhs ≤ rhs + 1e-9 + 1e-8·|rhs|`.
pub const INEQUALITY_TOLERANCE: Tolerance = Tolerance::new(1e-9, 1e-8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `lhs ≤ rhs` up to tolerance.
    Inequality,
    /// `lhs = rhs` up to tolerance; matrix identities report Frobenius norms and distance.
    Identity,
}

/// One verification verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub check_id: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
}

fn relative(abs_gap: f64, lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale > 0.0 {
        abs_gap / scale
    } else {
        abs_gap
    }
}

impl TrialReport {
    fn build(
        check_id: &str,
        kind: CheckKind,
        lhs: f64,
        rhs: f64,
        abs_gap: f64,
        tolerance: Tolerance,
        pass: bool,
    ) -> Self {
        Self {
            check_id: check_id.to_owned(),
            kind,
            lhs,
            rhs,
            abs_gap,
            rel_gap: relative(abs_gap, lhs, rhs),
            tolerance,
            pass,
            seed: 0,
            params: BTreeMap::new(),
        }
    }

    pub fn inequality(check_id: &str, lhs: f64, rhs: f64, tolerance: Tolerance) -> Self {
        let pass = lhs <= rhs + tolerance.atol + tolerance.rtol * rhs.abs();
        Self::build(
            check_id,
            CheckKind::Inequality,
            lhs,
            rhs,
            (lhs - rhs).abs(),
            tolerance,
            pass,
        )
    }

    pub fn identity(check_id: &str, lhs: f64, rhs: f64, tolerance: Tolerance) -> Self {
        Self::with_gap(check_id, lhs, rhs, (lhs - rhs).abs(), tolerance)
    }

    /// Identity verdict with an externally measured distance, e.g. `‖L - R‖_F` with `lhs = ‖L‖_F`, `rhs = ‖R‖_F`.
    pub fn with_gap(
        check_id: &str,
        lhs: f64,
        rhs: f64,
        abs_gap: f64,
        tolerance: Tolerance,
    ) -> Self {
        let pass = abs_gap <= tolerance.atol + tolerance.rtol * lhs.abs().max(rhs.abs());
        Self::build(
            check_id,
            CheckKind::Identity,
            lhs,
            rhs,
            abs_gap,
            tolerance,
            pass,
        )
    }

    /// A verdict decided by the caller (convergence-rate and monotonicity checks).
    pub fn decided(
        check_id: &str,
        lhs: f64,
        rhs: f64,
        abs_gap: f64,
        tolerance: Tolerance,
        pass: bool,
    ) -> Self {
        Self::build(
            check_id,
            CheckKind::Identity,
            lhs,
            rhs,
            abs_gap,
            tolerance,
            pass,
        )
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    /// Fails the verdict without touching the recorded values.
    pub fn and(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }
}
