//! Sort-based ground truth and the suites that check every selection route
//! against it.
//!
//! Each case is a `(sequence, rank)` pair. For every case the naive, memo
//! and full-range recursions and the compiled min/max program must equal
//! the oracle exactly; the compiled arithmetic program must agree within
//! `plan.tolerance`. The median is checked once per sequence.
//!
//! Work is split across rayon workers per sequence and merged in
//! enumeration order, so reports do not depend on the thread count.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::close_rel;
use crate::error::{Error, Result};
use crate::expr::{build_selection_expr_with_budget, emit_slp, CompiledProgram, ExprForm};
use crate::select::{
    fullrange_call_bound, median_with, midpoint, naive_call_bound, select_fullrange_with_budget,
    select_memo_with_budget, select_naive_with_budget, Budget, EvalStats, Mode,
};
use crate::sequence::{Rank, RealSequence};

/// The `n`-th entry of a sorted copy.
pub fn oracle_select(n: Rank, seq: &RealSequence) -> Result<f64> {
    let rank = Rank::new(n.get(), seq.len())?.get();
    let mut sorted = seq.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[rank - 1])
}

/// Middle entry of a sorted copy, or the mean of the two middle entries.
pub fn oracle_median(seq: &RealSequence) -> f64 {
    let mut sorted = seq.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        midpoint(sorted[len / 2 - 1], sorted[len / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyPlan {
    pub max_n: usize,
    pub alphabet: Vec<f64>,
    pub random_trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    /// Upper limit on `(sequence, rank)` cases for the exhaustive suite.
    pub case_budget: u64,
    /// Recursion budget handed to each selector.
    pub budget: Budget,
    /// Random suite only: naive and full-range recursions are skipped for
    /// cases needing more base-case calls than this.
    pub naive_check_limit: u64,
    /// Failures kept in the report; the total is always counted.
    pub max_reported_failures: usize,
    /// Replaces the naive selector with one that answers rank `n + 1`.
    pub inject_fault: bool,
}

impl Default for VerifyPlan {
    fn default() -> Self {
        VerifyPlan {
            max_n: 7,
            alphabet: vec![0.0, 1.0, 2.0, 3.0],
            random_trials: 10_000,
            seed: 1,
            tolerance: 1e-9,
            case_budget: 5_000_000,
            budget: Budget::DEFAULT,
            naive_check_limit: 1 << 14,
            max_reported_failures: 100,
            inject_fault: false,
        }
    }
}

impl VerifyPlan {
    fn validate(&self) -> Result<()> {
        if self.max_n == 0 {
            return Err(Error::InvalidPlan("max_n must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidPlan(
                "tolerance must be a finite value >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Number of `(sequence, rank)` cases the exhaustive suite visits.
    pub fn exhaustive_cases(&self) -> u128 {
        let a = self.alphabet.len() as u128;
        (1..=self.max_n as u32)
            .map(|len| a.saturating_pow(len).saturating_mul(len as u128))
            .fold(0u128, u128::saturating_add)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub input: Vec<f64>,
    /// 0 for median checks.
    pub rank: usize,
    pub expected: f64,
    pub actual: Option<f64>,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cases_run: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
    /// Individual route checks left out because of budgets.
    pub skipped_checks: u64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    /// Appends `other`; associative, so shards can be merged in any grouping.
    pub fn merge(mut self, other: VerifyReport, keep: usize) -> VerifyReport {
        self.cases_run += other.cases_run;
        self.failure_count += other.failure_count;
        self.skipped_checks += other.skipped_checks;
        let room = keep.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        self
    }

    fn fail(&mut self, keep: usize, failure: Failure) {
        self.failure_count += 1;
        if self.failures.len() < keep {
            self.failures.push(failure);
        }
    }
}

/// Compiled programs per `(length, rank)`, shared by all workers.
struct Programs {
    table: HashMap<(usize, usize), (CompiledProgram, CompiledProgram)>,
}

impl Programs {
    fn new(max_n: usize, budget: Budget) -> Result<Programs> {
        let mut table = HashMap::new();
        for len in 1..=max_n {
            for n in 1..=len {
                let rank = Rank::new(n, len)?;
                let minmax =
                    match build_selection_expr_with_budget(len, rank, ExprForm::MinMax, budget) {
                        Ok(e) => e,
                        Err(Error::BudgetExceeded { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                let arith = crate::expr::lower_minmax_to_arith(&minmax);
                let (arith, _) = crate::expr::cse(&arith);
                table.insert(
                    (len, n),
                    (CompiledProgram::compile(&minmax), emit_slp(&arith)?),
                );
            }
        }
        Ok(Programs { table })
    }
}

struct Checker<'a> {
    plan: &'a VerifyPlan,
    programs: &'a Programs,
    /// Run naive/full-range only below this many base-case calls.
    recursion_limit: u128,
}

impl Checker<'_> {
    fn check(&self, values: Vec<f64>) -> VerifyReport {
        let keep = self.plan.max_reported_failures;
        let budget = self.plan.budget;
        let mut report = VerifyReport::default();
        let seq = match RealSequence::new(values.clone()) {
            Ok(s) => s,
            Err(e) => {
                report.fail(
                    keep,
                    Failure {
                        input: values,
                        rank: 0,
                        expected: f64::NAN,
                        actual: None,
                        mode: "input".into(),
                        error: Some(e.to_string()),
                    },
                );
                return report;
            }
        };
        let len = seq.len();
        let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut scratch = Vec::new();
        for n in 1..=len {
            report.cases_run += 1;
            let rank = Rank::new(n, len).expect("n in range");
            let expected = oracle_select(rank, &seq).expect("n in range");
            let outcome = |mode: &str, got: Result<f64>, exact: bool, report: &mut VerifyReport| {
                let ok = match &got {
                    Ok(v) if exact => *v == expected,
                    Ok(v) => close_rel(*v, expected, self.plan.tolerance, scale),
                    Err(_) => false,
                };
                if !ok {
                    report.fail(
                        keep,
                        Failure {
                            input: values.clone(),
                            rank: n,
                            expected,
                            actual: got.as_ref().ok().copied(),
                            mode: mode.into(),
                            error: got.err().map(|e| e.to_string()),
                        },
                    );
                }
            };
            let mut stats = EvalStats::default();

            if naive_call_bound(len, n) <= self.recursion_limit {
                let naive_rank = if self.plan.inject_fault {
                    Rank::new((n + 1).min(len), len).expect("clamped")
                } else {
                    rank
                };
                let got = select_naive_with_budget(naive_rank, &seq, budget, &mut stats);
                outcome("naive", got, true, &mut report);
            } else {
                report.skipped_checks += 1;
            }
            if fullrange_call_bound(len, n) <= self.recursion_limit {
                let got = select_fullrange_with_budget(rank, &seq, budget, &mut stats);
                outcome("fullrange", got, true, &mut report);
            } else {
                report.skipped_checks += 1;
            }
            let got = select_memo_with_budget(rank, &seq, budget, &mut stats);
            outcome("memo", got, true, &mut report);

            match self.programs.table.get(&(len, n)) {
                Some((minmax, arith)) => {
                    let got = minmax.interpret_into(seq.values(), &mut scratch);
                    outcome("expr-minmax", got, true, &mut report);
                    let got = arith.interpret_into(seq.values(), &mut scratch);
                    outcome("expr-arith", got, false, &mut report);
                }
                None => report.skipped_checks += 2,
            }
        }

        let expected = oracle_median(&seq);
        match median_with(&seq, Mode::Memo, budget, &mut EvalStats::default()) {
            Ok(v) if v == expected => {}
            got => report.fail(
                keep,
                Failure {
                    input: values,
                    rank: 0,
                    expected,
                    actual: got.as_ref().ok().copied(),
                    mode: "median".into(),
                    error: got.err().map(|e| e.to_string()),
                },
            ),
        }
        report
    }

    fn run(&self, inputs: impl IndexedParallelIterator<Item = Vec<f64>>) -> VerifyReport {
        let keep = self.plan.max_reported_failures;
        inputs
            .map(|values| self.check(values))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(VerifyReport::default(), |acc, r| acc.merge(r, keep))
    }
}

/// Every tuple over `plan.alphabet` of length `1..=plan.max_n`, every rank.
pub fn exhaustive_verify(plan: &VerifyPlan) -> Result<VerifyReport> {
    plan.validate()?;
    if plan.alphabet.is_empty() {
        return Err(Error::InvalidPlan("alphabet must not be empty".into()));
    }
    if let Some(bad) = plan.alphabet.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidPlan(format!(
            "alphabet value {bad} is not finite"
        )));
    }
    let cases = plan.exhaustive_cases();
    if cases > plan.case_budget as u128 {
        return Err(Error::InvalidPlan(format!(
            "{cases} cases exceed the case budget of {}",
            plan.case_budget
        )));
    }
    let worst = (1..=plan.max_n)
        .map(|n| fullrange_call_bound(plan.max_n, n))
        .max()
        .unwrap_or(1);
    if worst > plan.budget.0 as u128 {
        return Err(Error::BudgetExceeded {
            mode: "fullrange",
            len: plan.max_n,
            rank: plan.max_n,
            required: worst,
            budget: plan.budget.0,
        });
    }

    let programs = Programs::new(plan.max_n, plan.budget)?;
    let checker = Checker {
        plan,
        programs: &programs,
        recursion_limit: plan.budget.0 as u128,
    };
    let a = plan.alphabet.len();
    let keep = plan.max_reported_failures;
    let mut report = VerifyReport::default();
    for len in 1..=plan.max_n {
        let count = a.pow(len as u32);
        let inputs = (0..count).into_par_iter().map(|mut code| {
            let mut v = vec![0.0; len];
            for slot in v.iter_mut().rev() {
                *slot = plan.alphabet[code % a];
                code /= a;
            }
            v
        });
        report = report.merge(checker.run(inputs), keep);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pattern {
    Uniform,
    Integers,
    Sorted,
    ReverseSorted,
    AllEqual,
    NearEqualPairs,
}

const PATTERNS: [Pattern; 6] = [
    Pattern::Uniform,
    Pattern::Integers,
    Pattern::Sorted,
    Pattern::ReverseSorted,
    Pattern::AllEqual,
    Pattern::NearEqualPairs,
];

/// Seeded sequences of length `1..=max_n`: uniform reals in
/// `[-1e6, 1e6]`, small integers, sorted, reverse-sorted, constant, and
/// pairs one ulp apart.
pub fn random_sequences(plan: &VerifyPlan) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    (0..plan.random_trials)
        .map(|_| {
            let len = rng.random_range(1..=plan.max_n);
            let pattern = PATTERNS[rng.random_range(0..PATTERNS.len())];
            let uniform = |rng: &mut ChaCha8Rng| rng.random_range(-1e6..=1e6);
            let mut v: Vec<f64> = match pattern {
                Pattern::Integers => (0..len)
                    .map(|_| rng.random_range(-1000i32..=1000) as f64)
                    .collect(),
                Pattern::AllEqual => vec![uniform(&mut rng); len],
                Pattern::NearEqualPairs => {
                    let mut v = Vec::with_capacity(len);
                    while v.len() < len {
                        let x = uniform(&mut rng);
                        v.push(x);
                        if v.len() < len {
                            v.push(x.next_up());
                        }
                    }
                    // interleave so the pairs are not always adjacent
                    let k = rng.random_range(0..len);
                    v.rotate_left(k);
                    v
                }
                _ => (0..len).map(|_| uniform(&mut rng)).collect(),
            };
            match pattern {
                Pattern::Sorted => v.sort_by(f64::total_cmp),
                Pattern::ReverseSorted => v.sort_by(|a, b| b.total_cmp(a)),
                _ => {}
            }
            v
        })
        .collect()
}

/// Seeded random sequences through the same checks as [`exhaustive_verify`].
pub fn random_verify(plan: &VerifyPlan) -> Result<VerifyReport> {
    plan.validate()?;
    if plan.random_trials == 0 {
        return Err(Error::InvalidPlan(
            "random_trials must be at least 1".into(),
        ));
    }
    let programs = Programs::new(plan.max_n, plan.budget)?;
    let checker = Checker {
        plan,
        programs: &programs,
        recursion_limit: (plan.naive_check_limit as u128).min(plan.budget.0 as u128),
    };
    Ok(checker.run(random_sequences(plan).into_par_iter()))
}
