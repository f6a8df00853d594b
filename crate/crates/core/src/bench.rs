//! Call-count growth, expression size and wall-clock comparisons.
//!
//! Counts come from the instrumented recursion; the closed form
//! `(N-n+2)^(n-1)` is only compared against them, never substituted.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{build_selection_expr_with_budget, cse, emit_slp, ExprForm};
use crate::select::{
    naive_call_bound, select_memo_with_budget, select_naive_with_budget, Budget, EvalStats,
};
use crate::sequence::{Rank, RealSequence};
use crate::verify::oracle_select;

/// One measurement row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    #[serde(rename = "N")]
    pub len: usize,
    pub n: usize,
    pub mode: String,
    pub base_case_calls: u64,
    pub memo_hits: u64,
    pub tree_nodes: u64,
    pub dag_nodes: u64,
    pub wall_time_s: f64,
}

pub const CSV_HEADER: &str = "N,n,mode,base_case_calls,memo_hits,tree_nodes,dag_nodes,wall_time_s";

/// A fixed input of length `len`; counts do not depend on the values.
pub fn probe_sequence(len: usize) -> RealSequence {
    RealSequence::new((0..len).map(|k| ((k * 7 + 3) % 11) as f64).collect()).expect("len >= 1")
}

/// Base-case calls of one naive evaluation at length `len`, rank `n`.
pub fn count_calls(len: usize, n: usize, budget: Budget) -> Result<u64> {
    count_calls_on(&probe_sequence(len.max(1)), n, budget)
}

pub fn count_calls_on(seq: &RealSequence, n: usize, budget: Budget) -> Result<u64> {
    let mut stats = EvalStats::default();
    select_naive_with_budget(Rank::new(n, seq.len())?, seq, budget, &mut stats)?;
    Ok(stats.base_case_calls)
}

fn median_secs(mut samples: Vec<f64>) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

fn time_reps(reps: usize, mut f: impl FnMut()) -> f64 {
    median_secs(
        (0..reps)
            .map(|_| {
                let start = Instant::now();
                f();
                start.elapsed().as_secs_f64()
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub naive: BenchRecord,
    pub memo: BenchRecord,
    pub predicted_calls: u64,
    /// Counter equals `(N-n+2)^(n-1)`.
    pub law_holds: bool,
    /// Naive, memo and sort oracle returned the same value.
    pub outputs_agree: bool,
}

/// Every `(N, n)` with `1 <= n <= N <= max_len`.
///
/// `reps = 0` skips timing and leaves `wall_time_s` at zero, which makes
/// the table a pure function of its arguments.
pub fn growth_table(max_len: usize, reps: usize, budget: Budget) -> Result<Vec<GrowthRow>> {
    let mut rows = Vec::new();
    for len in 1..=max_len {
        let seq = probe_sequence(len);
        for n in 1..=len {
            let rank = Rank::new(n, len)?;

            let mut naive_stats = EvalStats::default();
            let naive_value = select_naive_with_budget(rank, &seq, budget, &mut naive_stats)?;
            let mut memo_stats = EvalStats::default();
            let memo_value = select_memo_with_budget(rank, &seq, budget, &mut memo_stats)?;
            let oracle = oracle_select(rank, &seq)?;

            let arith = build_selection_expr_with_budget(len, rank, ExprForm::Arithmetic, budget)?;
            let (_, metrics) = cse(&arith);

            let naive_time = time_reps(reps, || {
                select_naive_with_budget(rank, &seq, budget, &mut EvalStats::default()).unwrap();
            });
            let memo_time = time_reps(reps, || {
                select_memo_with_budget(rank, &seq, budget, &mut EvalStats::default()).unwrap();
            });

            let predicted = naive_call_bound(len, n).min(u64::MAX as u128) as u64;
            let record = |mode: &str, stats: EvalStats, wall: f64| BenchRecord {
                len,
                n,
                mode: mode.into(),
                base_case_calls: stats.base_case_calls,
                memo_hits: stats.memo_hits,
                tree_nodes: metrics.node_count_tree,
                dag_nodes: metrics.node_count_dag,
                wall_time_s: wall,
            };
            rows.push(GrowthRow {
                naive: record("naive", naive_stats, naive_time),
                memo: record("memo", memo_stats, memo_time),
                predicted_calls: predicted,
                law_holds: naive_stats.base_case_calls == predicted,
                outputs_agree: naive_value == oracle && memo_value == oracle,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub records: Vec<BenchRecord>,
    /// Trials where the modes did not all return the oracle's value.
    pub mismatches: u64,
}

/// Times memo selection, the compiled arithmetic program and the sort
/// oracle on the same seeded inputs, at the median rank.
///
/// Inputs are integers in `[-10^6, 10^6]`, on which all three are exact.
/// The expression mode is omitted when its build exceeds `budget`.
pub fn compare_wallclock(
    len: usize,
    trials: usize,
    seed: u64,
    budget: Budget,
) -> Result<Comparison> {
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    let rank = Rank::new(len.div_ceil(2), len)?;
    let inputs = seeded_inputs(len, trials, seed);

    let program = match build_selection_expr_with_budget(len, rank, ExprForm::Arithmetic, budget) {
        Ok(e) => {
            let (shared, metrics) = cse(&e);
            Some((emit_slp(&shared)?, metrics))
        }
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };

    let mut memo_stats = EvalStats::default();
    let mut times = [Vec::new(), Vec::new(), Vec::new()];
    let mut mismatches = 0;
    let mut scratch = Vec::new();
    for seq in &inputs {
        let mut stats = EvalStats::default();
        let start = Instant::now();
        let memo = select_memo_with_budget(rank, seq, budget, &mut stats)?;
        times[0].push(start.elapsed().as_secs_f64());
        memo_stats = stats;

        let expr = match &program {
            Some((p, _)) => {
                let start = Instant::now();
                let v = p.interpret_into(seq.values(), &mut scratch)?;
                times[1].push(start.elapsed().as_secs_f64());
                Some(v)
            }
            None => None,
        };

        let start = Instant::now();
        let oracle = oracle_select(rank, seq)?;
        times[2].push(start.elapsed().as_secs_f64());

        if memo != oracle || expr.is_some_and(|v| v != oracle) {
            mismatches += 1;
        }
    }

    let [memo_t, expr_t, oracle_t] = times;
    let base = |mode: &str, wall: f64| BenchRecord {
        len,
        n: rank.get(),
        mode: mode.into(),
        base_case_calls: 0,
        memo_hits: 0,
        tree_nodes: 0,
        dag_nodes: 0,
        wall_time_s: wall,
    };
    let mut records = vec![BenchRecord {
        base_case_calls: memo_stats.base_case_calls,
        memo_hits: memo_stats.memo_hits,
        ..base("memo", median_secs(memo_t))
    }];
    if let Some((_, metrics)) = program {
        records.push(BenchRecord {
            tree_nodes: metrics.node_count_tree,
            dag_nodes: metrics.node_count_dag,
            ..base("expr", median_secs(expr_t))
        });
    }
    records.push(base("oracle", median_secs(oracle_t)));
    Ok(Comparison {
        records,
        mismatches,
    })
}

/// `trials` integer-valued sequences of length `len` from `seed`.
pub fn seeded_inputs(len: usize, trials: usize, seed: u64) -> Vec<RealSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let v = (0..len)
                .map(|_| rng.random_range(-1_000_000i32..=1_000_000) as f64)
                .collect();
            RealSequence::new(v).expect("finite, non-empty")
        })
        .collect()
}
