//! Self-checks run by `poik verify`: three independent pmf evaluations,
//! the integer-mean median and mode formulas, the median-zero threshold,
//! the boundary solver and the sampler.

use std::f64::consts::LN_2;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use poik::dist::{
    kappa, median, mode, pmf_table, support_bound, ClosedFormBranch, ClosedFormWeights,
    OrderKParams, SignFault,
};
use poik::oracle::{chi_squared_gof, pmf_by_convolution, sample};
use poik::solver::{solve_lambda_star, solve_lambda_star_by_cdf};
use poik::sweep::{base_median, mode_conjecture, rate_for_mean};
use poik::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Self::Quick => "quick",
            Self::Full => "full",
        }
    }
}

/// Deliberate defects for checking that the harness catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Flip the sign of the alternating block sum in the closed-form pmf.
    AlternatingSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub level: Level,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Scale {
    pmf_k: u64,
    pmf_n: u64,
    median_k: u64,
    mode_k: u64,
    solver_k: u64,
    draws: usize,
    sampler_cases: &'static [(u64, f64)],
}

const QUICK: Scale = Scale {
    pmf_k: 10,
    pmf_n: 120,
    median_k: 16,
    mode_k: 10,
    solver_k: 20,
    draws: 200_000,
    sampler_cases: &[(5, 2.0)],
};

const FULL: Scale = Scale {
    pmf_k: 20,
    pmf_n: 300,
    median_k: 40,
    mode_k: 25,
    solver_k: 50,
    draws: 1_000_000,
    sampler_cases: &[(2, 0.5), (5, 2.0), (20, 0.1)],
};

const PMF_TOLERANCE: f64 = 1e-10;
const SOLVER_TOLERANCE: f64 = 1e-10;
const SIGNIFICANCE: f64 = 1e-3;

pub fn run(level: Level, seed: u64, fault: Option<Fault>) -> Report {
    let scale = match level {
        Level::Quick => &QUICK,
        Level::Full => &FULL,
    };
    let sign = match fault {
        Some(Fault::AlternatingSign) => SignFault::FlipAlternatingSign,
        None => SignFault::None,
    };
    let mut checks = pmf_checks(scale, sign);
    checks.push(median_zero_check());
    checks.push(median_formula_check(scale.median_k));
    checks.push(mode_formula_check(scale.mode_k));
    checks.push(solver_check(scale.solver_k));
    checks.push(sampler_check(scale, seed));
    let pass = checks.iter().all(|c| c.pass);
    Report {
        level,
        seed,
        checks,
        pass,
    }
}

fn p(k: u64, lambda: f64) -> Params {
    OrderKParams::new(k, lambda).expect("valid parameters")
}

/// Worst pairwise difference of recurrence, closed form and convolution,
/// one check per closed-form branch.
fn pmf_checks(scale: &Scale, fault: SignFault) -> Vec<Check> {
    let branches = [
        ClosedFormBranch::Origin,
        ClosedFormBranch::Head,
        ClosedFormBranch::Alternating,
    ];
    let k_lambdas = [0.05, 1.0, 5.0, 12.0, 20.0];
    let per_k: Vec<[(f64, u64, u64); 3]> = (1..=scale.pmf_k)
        .into_par_iter()
        .map(|k| {
            // (diff, k, n); k = 0 marks an untouched slot
            let mut worst = [(0.0f64, 0u64, 0u64); 3];
            let weights: Vec<ClosedFormWeights> = (0..=scale.pmf_n)
                .map(|n| ClosedFormWeights::with_fault(k, n, fault))
                .collect();
            for kl in k_lambdas {
                let params = p(k, kl / k as f64);
                let table = pmf_table(&params, scale.pmf_n).expect("within cap");
                let oracle = pmf_by_convolution(&params, scale.pmf_n).expect("within guard");
                for (n, w) in weights.iter().enumerate() {
                    let n = n as u64;
                    let a = table.probability(n).expect("in range");
                    let b = w.evaluate(params.lambda());
                    let c = oracle.probability(n).expect("in range");
                    let diff = (a - b).abs().max((a - c).abs()).max((b - c).abs());
                    let slot = &mut worst[branch_index(ClosedFormBranch::of(k, n))];
                    if slot.1 == 0 || diff > slot.0 {
                        *slot = (diff, k, n);
                    }
                }
            }
            worst
        })
        .collect();

    branches
        .iter()
        .enumerate()
        .map(|(i, branch)| {
            let worst = per_k
                .iter()
                .map(|w| w[i])
                .filter(|w| w.1 > 0)
                .max_by(|a, b| a.0.total_cmp(&b.0));
            let (diff, at) = match worst {
                Some((d, k, n)) => (d, format!(" (at k={k}, n={n})")),
                None => (0.0, String::new()),
            };
            Check {
                name: format!("pmf three-way, branch {}", branch.name()),
                pass: diff <= PMF_TOLERANCE,
                detail: format!(
                    "k <= {}, n <= {}: max |diff| {diff:.2e}{at}",
                    scale.pmf_k, scale.pmf_n
                ),
            }
        })
        .collect()
}

fn branch_index(b: ClosedFormBranch) -> usize {
    match b {
        ClosedFormBranch::Origin => 0,
        ClosedFormBranch::Head => 1,
        ClosedFormBranch::Alternating => 2,
    }
}

fn median_zero_check() -> Check {
    let bad: Vec<u64> = (1..=100u64)
        .filter(|&k| {
            let t = LN_2 / k as f64;
            median(&p(k, t)) != 0 || median(&p(k, t + 1e-9)) != 1
        })
        .collect();
    Check {
        name: "median zero iff lambda <= ln2/k".into(),
        pass: bad.is_empty(),
        detail: format!("k in [1, 100], failures at {bad:?}"),
    }
}

fn median_formula_check(k_max: u64) -> Check {
    let bad: Vec<(u64, u64)> = (2..=k_max)
        .into_par_iter()
        .flat_map_iter(|k| {
            let c = kappa(k);
            (c..=4 * c).filter(move |&n| {
                median(&p(k, rate_for_mean(n, k))) as i64 != base_median(n, k)
            })
            .map(move |n| (k, n))
        })
        .collect();
    Check {
        name: "median n - floor((k+4)/8) for n in [kappa, 4 kappa]".into(),
        pass: bad.is_empty(),
        detail: format!("k in [2, {k_max}], {} mismatches {:?}", bad.len(), first(&bad)),
    }
}

fn mode_formula_check(k_max: u64) -> Check {
    let bad: Vec<(u64, u64)> = (2..=k_max)
        .into_par_iter()
        .flat_map_iter(|k| {
            let c = kappa(k);
            (2 * c..=5 * c)
                .filter(move |&n| {
                    let want = mode_conjecture(n, k).expect("n >= 2 kappa");
                    !mode(&p(k, rate_for_mean(n, k))).contains(want)
                })
                .map(move |n| (k, n))
        })
        .collect();
    Check {
        name: "mode n - floor((3k+5)/8) for n in [2 kappa, 5 kappa]".into(),
        pass: bad.is_empty(),
        detail: format!("k in [2, {k_max}], {} misses {:?}", bad.len(), first(&bad)),
    }
}

fn solver_check(k_max: u64) -> Check {
    let worst = (1..=k_max)
        .into_par_iter()
        .flat_map_iter(|k| (0..=k).map(move |nu| (k, nu)))
        .map(|(k, nu)| {
            let a = solve_lambda_star::<f64>(k, nu);
            let b = solve_lambda_star_by_cdf::<f64>(k, nu);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    (a.lambda_star - b.lambda_star).abs() / a.lambda_star.max(b.lambda_star)
                }
                _ => f64::INFINITY,
            }
        })
        .reduce(|| 0.0, f64::max);
    Check {
        name: "boundary rate: closed-form root vs cdf root".into(),
        pass: worst <= SOLVER_TOLERANCE,
        detail: format!("nu <= k <= {k_max}: max relative difference {worst:.2e}"),
    }
}

fn sampler_check(scale: &Scale, seed: u64) -> Check {
    let outcomes: Vec<(u64, f64, f64)> = scale
        .sampler_cases
        .iter()
        .enumerate()
        .map(|(i, &(k, lambda))| {
            let params = p(k, lambda);
            let table = pmf_table(&params, support_bound(&params)).expect("within cap");
            let batch = sample(&params, seed.wrapping_add(i as u64), scale.draws).expect("draws");
            (k, lambda, chi_squared_gof(&batch, &table).p_value)
        })
        .collect();
    let shown: Vec<String> = outcomes
        .iter()
        .map(|(k, lambda, pv)| format!("({k}, {lambda}) p={pv:.4}"))
        .collect();
    Check {
        name: "sampler chi-squared vs recurrence".into(),
        pass: outcomes.iter().all(|o| o.2 > SIGNIFICANCE),
        detail: format!("{} draws each: {}", scale.draws, shown.join(", ")),
    }
}

fn first<T: Copy>(v: &[T]) -> Vec<T> {
    v.iter().take(5).copied().collect()
}
