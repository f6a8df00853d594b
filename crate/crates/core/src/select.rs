//! The elimination recursion for the n-th smallest term.
//!
//! ```text
//! T(1, x)  = min{x1, ..., xN}
//! T(n, x)  = max over j = 1..=N-n+2 of T(n-1, x with its j-th term removed)
//! ```
//!
//! Min and max are taken with ordinary comparisons here so the result is
//! always one of the inputs, bit for bit. The branchless arithmetic forms
//! live in [`crate::arith`] and the expression backend.

use std::collections::HashMap;
use std::env;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{IndexSubset, Rank, RealSequence, SortWitness};

/// Call counters for one or more evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalStats {
    /// Every invocation of `T`, including base cases and memo hits.
    pub recursive_calls: u64,
    /// Invocations with `n = 1` that actually computed a minimum.
    pub base_case_calls: u64,
    pub memo_hits: u64,
}

impl AddAssign for EvalStats {
    fn add_assign(&mut self, rhs: EvalStats) {
        self.recursive_calls += rhs.recursive_calls;
        self.base_case_calls += rhs.base_case_calls;
        self.memo_hits += rhs.memo_hits;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    Memo,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Naive => "naive",
            Mode::Memo => "memo",
        }
    }
}

/// Maximum number of calls an evaluation may need before it is refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(1 << 24);
    pub const ENV_VAR: &'static str = "ORDSTAT_BUDGET";

    /// Reads `ORDSTAT_BUDGET`, falling back to [`Budget::DEFAULT`].
    pub fn from_env() -> Result<Budget> {
        match env::var(Self::ENV_VAR) {
            Ok(raw) => raw.trim().parse().map(Budget).map_err(|_| Error::Parse {
                offset: 0,
                message: format!(
                    "{} must be a non-negative integer, got {raw:?}",
                    Self::ENV_VAR
                ),
            }),
            Err(_) => Ok(Self::DEFAULT),
        }
    }

    fn check(self, mode: &'static str, len: usize, rank: usize, required: u128) -> Result<()> {
        if required > self.0 as u128 {
            return Err(Error::BudgetExceeded {
                mode,
                len,
                rank,
                required,
                budget: self.0,
            });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Base-case calls of the truncated recursion, `(N-n+2)^(n-1)`.
///
/// Only used as a guard; [`select_naive`] counts its calls independently.
pub fn naive_call_bound(len: usize, rank: usize) -> u128 {
    let width = (len + 2 - rank) as u128;
    (1..rank).fold(1u128, |acc, _| acc.saturating_mul(width))
}

/// Base-case calls when the union runs over all `j = 1..=N`: `N!/(N-n+1)!`.
pub fn fullrange_call_bound(len: usize, rank: usize) -> u128 {
    (0..rank - 1).fold(1u128, |acc, t| acc.saturating_mul((len - t) as u128))
}

/// Upper bound on distinct subproblems in memo mode, `C(N+1, n-1)`.
///
/// Every eliminated index lies in the leading `N-n+2` positions of its
/// current subsequence, so after `t` removals all removed originals sit in
/// `1..=N-n+1+t`; summing those binomials telescopes to this value.
pub fn memo_subproblem_bound(len: usize, rank: usize) -> u128 {
    let k = (rank - 1) as u128;
    let top = (len + 1) as u128;
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(top - i) / (i + 1))
}

fn check_rank(n: Rank, seq: &RealSequence) -> Result<usize> {
    Rank::new(n.get(), seq.len()).map(Rank::get)
}

#[inline]
fn cmp_min(values: &[f64]) -> f64 {
    values[1..]
        .iter()
        .fold(values[0], |acc, &x| if x < acc { x } else { acc })
}

#[inline]
fn cmp_max(acc: f64, x: f64) -> f64 {
    if x > acc {
        x
    } else {
        acc
    }
}

#[derive(Clone, Copy)]
enum Span {
    Truncated,
    Full,
}

/// Plain recursion over value slices; `scratch[d]` holds the subsequence
/// at depth `d` so nothing is allocated per call.
fn recurse(
    values: &[f64],
    rank: usize,
    span: Span,
    scratch: &mut [Vec<f64>],
    stats: &mut EvalStats,
) -> f64 {
    stats.recursive_calls += 1;
    if rank == 1 {
        stats.base_case_calls += 1;
        return cmp_min(values);
    }
    let width = match span {
        Span::Truncated => values.len() + 2 - rank,
        Span::Full => values.len(),
    };
    let (buf, deeper) = scratch.split_first_mut().expect("scratch depth");
    let mut best = f64::NEG_INFINITY;
    for j in 0..width {
        buf.clear();
        buf.extend_from_slice(&values[..j]);
        buf.extend_from_slice(&values[j + 1..]);
        let v = recurse(buf, rank - 1, span, deeper, stats);
        best = if j == 0 { v } else { cmp_max(best, v) };
    }
    best
}

fn run_plain(rank: usize, seq: &RealSequence, span: Span, stats: &mut EvalStats) -> f64 {
    let len = seq.len();
    let mut scratch: Vec<Vec<f64>> = (1..rank).map(|d| Vec::with_capacity(len - d)).collect();
    recurse(seq.values(), rank, span, &mut scratch, stats)
}

/// The n-th smallest term by the truncated elimination recursion.
pub fn select_naive(n: Rank, seq: &RealSequence, stats: &mut EvalStats) -> Result<f64> {
    select_naive_with_budget(n, seq, Budget::DEFAULT, stats)
}

pub fn select_naive_with_budget(
    n: Rank,
    seq: &RealSequence,
    budget: Budget,
    stats: &mut EvalStats,
) -> Result<f64> {
    let rank = check_rank(n, seq)?;
    budget.check("naive", seq.len(), rank, naive_call_bound(seq.len(), rank))?;
    Ok(run_plain(rank, seq, Span::Truncated, stats))
}

/// Same recursion with the union extended to every `j = 1..=N`.
///
/// Always agrees with [`select_naive`]: eliminations past `N-n+2` never
/// change the maximum.
pub fn select_fullrange(n: Rank, seq: &RealSequence, stats: &mut EvalStats) -> Result<f64> {
    select_fullrange_with_budget(n, seq, Budget::DEFAULT, stats)
}

pub fn select_fullrange_with_budget(
    n: Rank,
    seq: &RealSequence,
    budget: Budget,
    stats: &mut EvalStats,
) -> Result<f64> {
    let rank = check_rank(n, seq)?;
    budget.check(
        "fullrange",
        seq.len(),
        rank,
        fullrange_call_bound(seq.len(), rank),
    )?;
    Ok(run_plain(rank, seq, Span::Full, stats))
}

struct Memo<'a> {
    values: &'a [f64],
    table: HashMap<IndexSubset, f64>,
    scratch: Vec<f64>,
}

impl Memo<'_> {
    fn eval(&mut self, subset: &IndexSubset, rank: usize, stats: &mut EvalStats) -> f64 {
        stats.recursive_calls += 1;
        if let Some(&v) = self.table.get(subset) {
            stats.memo_hits += 1;
            return v;
        }
        let v = if rank == 1 {
            stats.base_case_calls += 1;
            self.scratch.clear();
            self.scratch
                .extend(subset.iter().map(|i| self.values[i - 1]));
            cmp_min(&self.scratch)
        } else {
            let width = subset.len() + 2 - rank;
            let mut best = f64::NEG_INFINITY;
            for j in 1..=width {
                let child = subset.eliminate(j).expect("j within subset");
                let v = self.eval(&child, rank - 1, stats);
                best = if j == 1 { v } else { cmp_max(best, v) };
            }
            best
        };
        self.table.insert(subset.clone(), v);
        v
    }
}

/// The truncated recursion with results cached per surviving index set.
///
/// Distinct elimination orders that leave the same terms denote the same
/// subsequence, and the rank at a given subsequence length is fixed, so the
/// subset alone is the key. Output is bit-identical to [`select_naive`].
pub fn select_memo(n: Rank, seq: &RealSequence, stats: &mut EvalStats) -> Result<f64> {
    select_memo_with_budget(n, seq, Budget::DEFAULT, stats)
}

pub fn select_memo_with_budget(
    n: Rank,
    seq: &RealSequence,
    budget: Budget,
    stats: &mut EvalStats,
) -> Result<f64> {
    let rank = check_rank(n, seq)?;
    budget.check(
        "memo",
        seq.len(),
        rank,
        memo_subproblem_bound(seq.len(), rank),
    )?;
    let mut memo = Memo {
        values: seq.values(),
        table: HashMap::new(),
        scratch: Vec::with_capacity(seq.len()),
    };
    let full = IndexSubset::full(seq.len())?;
    Ok(memo.eval(&full, rank, stats))
}

pub fn select(
    mode: Mode,
    n: Rank,
    seq: &RealSequence,
    budget: Budget,
    stats: &mut EvalStats,
) -> Result<f64> {
    match mode {
        Mode::Naive => select_naive_with_budget(n, seq, budget, stats),
        Mode::Memo => select_memo_with_budget(n, seq, budget, stats),
    }
}

/// Average of two values without overflowing for large magnitudes.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = (a + b) / 2.0;
    if m.is_finite() {
        m
    } else {
        a / 2.0 + b / 2.0
    }
}

/// Median via the recursion in memo mode.
pub fn median(seq: &RealSequence) -> Result<f64> {
    median_with(seq, Mode::Memo, Budget::DEFAULT, &mut EvalStats::default())
}

/// Odd length: `T((N+1)/2)`. Even length: mean of `T(N/2)` and `T(N/2+1)`.
pub fn median_with(
    seq: &RealSequence,
    mode: Mode,
    budget: Budget,
    stats: &mut EvalStats,
) -> Result<f64> {
    let len = seq.len();
    let at = |k: usize, stats: &mut EvalStats| select(mode, Rank::new(k, len)?, seq, budget, stats);
    if len % 2 == 1 {
        at(len.div_ceil(2), stats)
    } else {
        let lo = at(len / 2, stats)?;
        let hi = at(len / 2 + 1, stats)?;
        Ok(midpoint(lo, hi))
    }
}

pub fn sort_witness(seq: &RealSequence) -> SortWitness {
    SortWitness::of(seq)
}
