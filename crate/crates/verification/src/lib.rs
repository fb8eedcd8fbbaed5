//! Acceptance criteria for `multitrace`, each with a tolerance and a time budget.
//! The `acceptance` test target runs them all.

use std::time::Duration;

use multitrace::campaign::{run_trials, CampaignConfig};
use multitrace::combinatorics::build_permutation;
use multitrace::entangle::pairing_identity_check;
use multitrace::frechet::{conditioned_step, t_operator_triangle_check};
use multitrace::inequalities::{
    commutator_chain_check, equality_case_checks, log_derivative_check, log_derivative_convergence,
    powers_vs_lieb3_check, powers_vs_resolvent_check, projection_limit_gaps, rhs_complex_powers,
    rhs_lieb3, rhs_resolvent, tensor_identity_check,
};
use multitrace::linalg::{
    random_commuting_family, random_hermitian, random_posdef_with, random_unit_vector, seeded_rng,
    PosDefMatrix,
};
use multitrace::quadrature::{
    beta_normalization_check, integrate_beta, scalar_beta_grid_check, QuadratureConfig,
    SCALAR_BETA_GRID,
};
use num_complex::Complex64;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn family(seed: u64, n: usize, d: usize) -> Vec<PosDefMatrix> {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| random_posdef_with(&mut rng, d, (0.1, 10.0)).unwrap())
        .collect()
}

fn beta_normalization() -> Outcome {
    let rule = QuadratureConfig::default().real_line().unwrap();
    let r = beta_normalization_check(&rule);
    let err = (integrate_beta(|_| Complex64::new(1.0, 0.0), &rule).value - 1.0).norm();
    outcome(
        r.pass && err <= 1e-10,
        format!("|∫β - 1| = {err:.2e} (limit 1e-10)"),
    )
}

fn scalar_beta_grid() -> Outcome {
    let rule = QuadratureConfig::default().real_line().unwrap();
    let r = scalar_beta_grid_check(&rule, &SCALAR_BETA_GRID);
    outcome(
        r.pass && r.abs_gap <= 1e-8,
        format!("max error {:.2e} over 25 pairs (limit 1e-8)", r.abs_gap),
    )
}

fn t_triangle() -> Outcome {
    let rule = QuadratureConfig::default().half_line().unwrap();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let mut rng = seeded_rng(3_000 + seed);
        let x = random_posdef_with(&mut rng, 4, (0.1, 10.0)).unwrap();
        let y = random_hermitian(&mut rng, 4, 1.0);
        let r = t_operator_triangle_check(&x, &y, &rule, conditioned_step(&x, &y)).unwrap();
        worst = worst.max(r.abs_gap / r.lhs.max(r.rhs));
    }
    outcome(
        worst <= 1e-6,
        format!("worst relative disagreement {worst:.2e} on 100 4x4 instances (limit 1e-6)"),
    )
}

fn pairing() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (d, m) in [(2usize, 1usize), (3, 1), (2, 2)] {
        let local = d.pow(m as u32);
        let mut rng = seeded_rng(4_000 + (10 * d + m) as u64);
        for _ in 0..500 {
            let x = random_hermitian(&mut rng, local, 1.0);
            let y = random_hermitian(&mut rng, local, 1.0);
            let r = pairing_identity_check(&x, &y, d, m).unwrap();
            worst = worst.max(r.params["unit_gap"].as_f64().unwrap());
            failures += usize::from(!r.pass);
        }
    }
    outcome(
        failures == 0 && worst <= 1e-12,
        format!("worst gap {worst:.2e} on 1500 pairs (limit 1e-12)"),
    )
}

fn tensor_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 3..=6 {
        let perm = build_permutation(n);
        let dims: &[usize] = if n >= 5 { &[2] } else { &[2, 3] };
        for &d in dims {
            for seed in 0..50 {
                let x = family(5_000 + 100 * n as u64 + 10 * d as u64 + seed, n, d);
                for t in [0.0, 0.5, -0.5, 2.0, -2.0] {
                    let r = tensor_identity_check(&x, t, &perm).unwrap();
                    worst = worst.max(r.rel_gap);
                    count += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("worst relative gap {worst:.2e} over {count} evaluations (limit 1e-9)"),
    )
}

fn equivalence() -> Outcome {
    let rule = QuadratureConfig::default().real_line().unwrap();
    let mut worst_main = 0.0f64;
    let mut worst_lieb = 0.0f64;
    for seed in 0..200 {
        for n in 3..=6 {
            let a = family(6_000 + 10 * seed + n as u64, n, 2);
            worst_main = worst_main.max(powers_vs_resolvent_check(&a, &rule).unwrap().rel_gap);
        }
        let a = family(7_000 + seed, 3, 2);
        worst_lieb = worst_lieb.max(powers_vs_lieb3_check(&a, &rule).unwrap().rel_gap);
    }
    outcome(
        worst_main <= 1e-7 && worst_lieb <= 1e-8,
        format!("powers vs resolvent form {worst_main:.2e} (limit 1e-7), powers vs three-matrix form {worst_lieb:.2e} (limit 1e-8), 200 seeds"),
    )
}

fn inequality_campaigns() -> Outcome {
    let config = CampaignConfig {
        checks: [
            "golden_thompson",
            "lieb3",
            "complex_powers",
            "resolvent",
            "det_bound",
        ]
        .map(String::from)
        .to_vec(),
        n_values: vec![3, 4, 5, 6],
        d: 2,
        trials: 1000,
        seed: 7,
        ..CampaignConfig::default()
    };
    let out = run_trials(&config).unwrap();
    outcome(
        out.summary.all_passed(),
        format!(
            "{} trials, {} failures",
            out.summary.total(),
            out.summary.failures()
        ),
    )
}

fn equality_detection() -> Outcome {
    let rule = QuadratureConfig::default().real_line().unwrap();
    let mut rng = seeded_rng(8_000);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        for n in 2..=6 {
            let c = random_commuting_family(&mut rng, n, 2, (0.1, 10.0)).unwrap();
            for r in equality_case_checks(&c, &rule).unwrap() {
                worst = worst.max(r.rel_gap);
            }
        }
    }
    let id2 = vec![PosDefMatrix::identity(2); 4];
    let id3 = vec![PosDefMatrix::identity(3); 3];
    let main = rhs_resolvent(&id2).unwrap();
    let powers = rhs_complex_powers(&id3, &rule).unwrap();
    let lieb = rhs_lieb3(&id3[0], &id3[1], &id3[2]).unwrap();
    let exact =
        (main - 2.0).abs() <= 1e-12 && (powers - 3.0).abs() <= 1e-10 && (lieb - 3.0).abs() <= 1e-12;
    outcome(
        worst <= 1e-8 && exact,
        format!("commuting families worst {worst:.2e} (limit 1e-8); identities give {main:.12}, {powers:.12}, {lieb:.12}"),
    )
}

fn commutator_chain() -> Outcome {
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let a = family(9_000 + seed, 2, 2);
        let r = commutator_chain_check(&a[0], &a[1], &quad).unwrap();
        worst = worst.max(r.params["scaled_gap"].as_f64().unwrap());
    }
    let mut rng = seeded_rng(9_500);
    let mut commuting = 0.0f64;
    for _ in 0..20 {
        let c = random_commuting_family(&mut rng, 2, 2, (0.1, 10.0)).unwrap();
        let r = commutator_chain_check(&c[0], &c[1], &quad).unwrap();
        commuting = commuting.max(r.params["scaled_max_norm"].as_f64().unwrap());
    }
    outcome(
        worst <= 1e-6 && commuting <= 1e-12,
        format!("random pairs worst gap {worst:.2e} (limit 1e-6); commuting pairs largest value {commuting:.2e} (limit 1e-12)"),
    )
}

fn projection_limit() -> Outcome {
    let mut worst_ratio = 0.0f64;
    let mut worst_abs = 0.0f64;
    for seed in 0..20 {
        let mut rng = seeded_rng(10_000 + seed);
        let a = random_hermitian(&mut rng, 3, 1.0);
        let v = random_unit_vector(&mut rng, 3);
        let (_, values) = projection_limit_gaps(&a, &v, &[1e2, 1e4]).unwrap();
        let (g_low, g_high) = (values[0].1, values[1].1);
        worst_abs = worst_abs.max(g_high);
        if g_low > 0.0 {
            worst_ratio = worst_ratio.max(g_high / g_low);
        }
    }
    outcome(
        worst_ratio <= 1e-3 && worst_abs <= 1e-6,
        format!("gap(1e4)/gap(1e2) up to {worst_ratio:.2e} (limit 1e-3), gap(1e4) up to {worst_abs:.2e} (limit 1e-6)"),
    )
}

fn log_derivative() -> Outcome {
    let mut worst = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut failures = 0;
    for seed in 0..50 {
        let a = family(11_000 + seed, 4, 2);
        let r = log_derivative_check(&a, None).unwrap();
        worst = worst.max(r.rel_gap);
        failures += usize::from(!r.pass);
        let ratio = log_derivative_convergence(&a, None).unwrap();
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    outcome(
        failures == 0 && worst <= 1e-5 && lo >= 3.0 && hi <= 5.0,
        format!("worst mismatch {worst:.2e} (limit 1e-5); halving-step error ratios in [{lo:.3}, {hi:.3}]"),
    )
}

pub struct Criterion {
    pub name: &'static str,
    pub run: fn() -> Outcome,
    pub budget: Duration,
}

const fn criterion(name: &'static str, run: fn() -> Outcome, budget_secs: u64) -> Criterion {
    Criterion {
        name,
        run,
        budget: Duration::from_secs(budget_secs),
    }
}

/// All criteria, in order.
pub fn criteria() -> [Criterion; 11] {
    [
        criterion("beta normalization", beta_normalization, 1),
        criterion("scalar identity grid", scalar_beta_grid, 1),
        criterion("T-operator triangle", t_triangle, 10),
        criterion("pairing identity", pairing, 10),
        criterion("pointwise tensor identity", tensor_identity, 60),
        criterion("equivalence of formulations", equivalence, 120),
        criterion("inequality campaigns", inequality_campaigns, 600),
        criterion("equality detection", equality_detection, 10),
        criterion("commutator chain", commutator_chain, 30),
        criterion("projection limit", projection_limit, 5),
        criterion("log-derivative identity", log_derivative, 60),
    ]
}
