//! Gauss-Legendre rules for the `β(t)` average over the real line and for
//! integrals over `τ ∈ [0, ∞)`.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::report::{Tolerance, TrialReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Half-width `T` of the truncated real-line interval `[-T, T]`.
    pub real_line_half_width: f64,
    pub real_line_nodes: usize,
    pub half_line_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            real_line_half_width: 12.0,
            real_line_nodes: 400,
            half_line_nodes: 200,
        }
    }
}

impl QuadratureConfig {
    pub fn real_line(&self) -> Result<QuadratureRule> {
        QuadratureRule::real_line(self.real_line_half_width, self.real_line_nodes)
    }

    pub fn half_line(&self) -> Result<QuadratureRule> {
        QuadratureRule::half_line(self.half_line_nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Gauss-Legendre on `[-T, T]`.
    RealLine,
    /// Gauss-Legendre in `s ∈ (0, 1)` mapped through `τ = s / (1 - s)`.
    HalfLine,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Half-width `T` for real-line rules.
    pub truncation: Option<f64>,
    pub node_count: usize,
}

fn legendre(node_count: usize) -> Result<GaussLegendre> {
    GaussLegendre::new(node_count).map_err(|_| {
        Error::InvalidArgument(format!(
            "Gauss-Legendre needs at least 2 nodes, got {node_count}"
        ))
    })
}

impl QuadratureRule {
    pub fn real_line(half_width: f64, node_count: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let gl = legendre(node_count)?;
        let (nodes, weights) = gl
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (half_width * x, half_width * w))
            .unzip();
        Ok(Self {
            kind: RuleKind::RealLine,
            nodes,
            weights,
            truncation: Some(half_width),
            node_count,
        })
    }

    pub fn half_line(node_count: usize) -> Result<Self> {
        let gl = legendre(node_count)?;
        let (nodes, weights) = gl
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| {
                let s = 0.5 * (x + 1.0);
                let ws = 0.5 * w;
                let one_minus = 1.0 - s;
                (s / one_minus, ws / (one_minus * one_minus))
            })
            .unzip();
        Ok(Self {
            kind: RuleKind::HalfLine,
            nodes,
            weights,
            truncation: None,
            node_count,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `β(t) = (π/2) (1 + cosh πt)^{-1}`.
pub fn beta_density(t: f64) -> f64 {
    0.5 * PI / (1.0 + (PI * t).cosh())
}

/// Result of a truncated `β`-average.
#[derive(Debug, Clone, Copy)]
pub struct BetaIntegral {
    pub value: Complex64,
    /// `sup|f| · 2e^{-πT}`, with the sup taken over the nodes.
    pub tail_bound: f64,
}

fn require_kind(rule: &QuadratureRule, kind: RuleKind) {
    assert_eq!(rule.kind, kind, "quadrature rule of the wrong kind");
}

/// `∫ f(t) β(t) dt` over the real line.
pub fn integrate_beta<F>(f: F, rule: &QuadratureRule) -> BetaIntegral
where
    F: Fn(f64) -> Complex64,
{
    require_kind(rule, RuleKind::RealLine);
    let mut value = Complex64::new(0.0, 0.0);
    let mut sup = 0.0f64;
    for (t, w) in rule.iter() {
        let ft = f(t);
        sup = sup.max(ft.norm());
        value += ft * (w * beta_density(t));
    }
    let half_width = rule.truncation.unwrap_or(f64::INFINITY);
    BetaIntegral {
        value,
        tail_bound: sup * 2.0 * (-PI * half_width).exp(),
    }
}

/// Matrix-valued `∫ F(t) β(t) dt`.
pub fn integrate_beta_matrix<F>(f: F, rule: &QuadratureRule) -> ComplexMatrix
where
    F: Fn(f64) -> ComplexMatrix,
{
    require_kind(rule, RuleKind::RealLine);
    let mut iter = rule.iter();
    let (t0, w0) = iter.next().expect("rule has nodes");
    let mut acc = f(t0).scale(w0 * beta_density(t0));
    for (t, w) in iter {
        acc += f(t).scale(w * beta_density(t));
    }
    acc
}

/// Entrywise `∫_0^∞ g(τ) dτ` for an integrand decaying like `τ^{-2}`.
pub fn integrate_halfline<G>(g: G, rule: &QuadratureRule) -> ComplexMatrix
where
    G: Fn(f64) -> ComplexMatrix,
{
    require_kind(rule, RuleKind::HalfLine);
    let mut iter = rule.iter();
    let (t0, w0) = iter.next().expect("rule has nodes");
    let mut acc = g(t0).scale(w0);
    for (tau, w) in iter {
        acc += g(tau).scale(w);
    }
    acc
}

pub const BETA_NORMALIZATION_TOLERANCE: Tolerance = Tolerance::new(1e-10, 0.0);
pub const SCALAR_BETA_TOLERANCE: Tolerance = Tolerance::new(1e-8, 0.0);
pub const SCALAR_BETA_GRID: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

/// `∫ β = 1`.
pub fn beta_normalization_check(rule: &QuadratureRule) -> TrialReport {
    let v = integrate_beta(|_| Complex64::new(1.0, 0.0), rule);
    TrialReport::identity(
        "beta_normalization",
        v.value.re,
        1.0,
        BETA_NORMALIZATION_TOLERANCE,
    )
    .param("tail_bound", v.tail_bound)
    .param("nodes", rule.node_count)
}

/// `(xy)^{-1/2} ∫ (y/x)^{it/2} β(t) dt = log(y/x) / (y - x)` on a grid of positive `x, y`,
/// reporting the worst pair.
pub fn scalar_beta_grid_check(rule: &QuadratureRule, grid: &[f64]) -> TrialReport {
    let mut worst = (0.0, 1.0, 1.0, 0.0, 0.0);
    for &x in grid {
        for &y in grid {
            let quad = integrate_beta(|t| Complex64::new(0.0, 0.5 * t * (y / x).ln()).exp(), rule)
                .value
                / (x * y).sqrt();
            let exact = if x == y {
                1.0 / x
            } else {
                (y / x).ln() / (y - x)
            };
            let err = (quad - exact).norm();
            if err >= worst.0 {
                worst = (err, x, y, quad.re, exact);
            }
        }
    }
    let (err, x, y, quad, exact) = worst;
    TrialReport::with_gap("scalar_beta_grid", quad, exact, err, SCALAR_BETA_TOLERANCE)
        .param("x", x)
        .param("y", y)
        .param("grid_points", grid.len() * grid.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, identity, PosDefMatrix};
    use std::f64::consts::E;

    fn scalar(z: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, c64(z, 0.0))
    }

    #[test]
    fn beta_density_values() {
        assert!((beta_density(0.0) - PI / 4.0).abs() < 1e-15);
        // (π/2) / (1 + cosh π) evaluated independently
        let at_one = 0.5 * PI / (1.0 + 0.5 * (PI.exp() + (-PI).exp()));
        assert!((beta_density(1.0) - at_one).abs() < 1e-15);
        assert!((beta_density(1.0) - 0.124_746_041_573).abs() < 1e-12);
        assert_eq!(beta_density(-2.5), beta_density(2.5));
    }

    #[test]
    fn beta_integrals() {
        let rule = QuadratureConfig::default().real_line().unwrap();
        let one = integrate_beta(|_| c64(1.0, 0.0), &rule);
        assert!((one.value - 1.0).norm() < 1e-10);
        assert!(one.tail_bound < 1e-15);

        let odd = integrate_beta(|t| c64(t, 0.0), &rule);
        assert!(odd.value.norm() < 1e-10);

        // diagonal form of the β-sandwich identity: (xy)^{-1/2} ∫ (y/x)^{it/2} β = log(y/x)/(y-x)
        let (x, y) = (1.0f64, E);
        let powers = integrate_beta(
            |t| c64(0.0, 0.5 * t * (y / x).ln()).exp() / (x * y).sqrt(),
            &rule,
        );
        assert!((powers.value - 1.0 / (E - 1.0)).norm() < 1e-12);
        assert!((1.0 / (E - 1.0) - 0.581_976_7).abs() < 1e-7);
    }

    #[test]
    fn grid_checks() {
        let rule = QuadratureConfig::default().real_line().unwrap();
        assert!(beta_normalization_check(&rule).pass);
        let r = scalar_beta_grid_check(&rule, &SCALAR_BETA_GRID);
        assert!(r.pass, "{r:?}");
        let coarse = QuadratureRule::real_line(2.0, 8).unwrap();
        assert!(!beta_normalization_check(&coarse).pass);
    }

    #[test]
    fn halfline_integrals() {
        let rule = QuadratureConfig::default().half_line().unwrap();
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!(rule.nodes.iter().all(|&t| t > 0.0 && t.is_finite()));

        let v = integrate_halfline(|t| scalar((1.0 + t).powi(-2)), &rule);
        assert!((v[(0, 0)] - 1.0).norm() < 1e-8);

        let (x, y) = (1.0, E);
        let v = integrate_halfline(|t| scalar(1.0 / ((x + t) * (y + t))), &rule);
        assert!((v[(0, 0)] - 1.0 / (E - 1.0)).norm() < 1e-10);

        let x_mat = PosDefMatrix::identity(2);
        let v = integrate_halfline(
            |t| {
                let r = (x_mat.matrix() + identity(2).scale(t))
                    .try_inverse()
                    .unwrap();
                &r * &r
            },
            &rule,
        );
        assert!((v - identity(2)).norm() < 1e-8);
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::real_line(0.0, 10).is_err());
        assert!(QuadratureRule::real_line(1.0, 1).is_err());
        assert!(QuadratureRule::half_line(0).is_err());
        let r = QuadratureRule::real_line(3.0, 50).unwrap();
        assert_eq!(r.nodes.len(), 50);
        assert!(r.nodes.iter().all(|t| t.abs() < 3.0));
        assert!((r.weights.iter().sum::<f64>() - 6.0).abs() < 1e-12);
    }
}
