//! Symbolic formulas for the n-th smallest term.
//!
//! [`build_selection_expr`] unrolls the elimination recursion into a
//! min/max expression over variables `x1..xN`. [`lower_minmax_to_arith`]
//! rewrites it with only `+`, `-`, `|.|` and halving, [`cse`] shares
//! repeated subtrees, and the result can be printed ([`text`]) or flattened
//! into a straight-line program ([`slp`]).
//!
//! Nodes are reference counted, so a single [`ExprRef`] may already be a
//! DAG. Traversals memoize on node address to stay linear in the number of
//! distinct nodes.

pub mod cse;
pub mod slp;
pub mod text;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::select::{naive_call_bound, Budget};
use crate::sequence::{IndexSubset, Rank};

pub use cse::{cse, ExprMetrics};
pub use slp::{emit_slp, CompiledProgram, Instruction, OpCode, Operand};
pub use text::{emit_text, parse_infix, parse_sexpr, parse_text, Syntax};

pub type ExprRef = Arc<Expr>;

#[derive(Debug, Clone)]
pub enum Expr {
    /// 1-based input variable `x_i`.
    Var(usize),
    Const(f64),
    Add(ExprRef, ExprRef),
    Sub(ExprRef, ExprRef),
    Abs(ExprRef),
    Halve(ExprRef),
    Min(ExprRef, ExprRef),
    Max(ExprRef, ExprRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExprForm {
    MinMax,
    Arithmetic,
}

impl Expr {
    pub fn var(i: usize) -> ExprRef {
        Arc::new(Expr::Var(i))
    }

    pub fn constant(c: f64) -> ExprRef {
        Arc::new(Expr::Const(c))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: ExprRef, b: ExprRef) -> ExprRef {
        Arc::new(Expr::Add(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: ExprRef, b: ExprRef) -> ExprRef {
        Arc::new(Expr::Sub(a, b))
    }

    pub fn abs(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Abs(a))
    }

    pub fn halve(a: ExprRef) -> ExprRef {
        Arc::new(Expr::Halve(a))
    }

    pub fn min(a: ExprRef, b: ExprRef) -> ExprRef {
        Arc::new(Expr::Min(a, b))
    }

    pub fn max(a: ExprRef, b: ExprRef) -> ExprRef {
        Arc::new(Expr::Max(a, b))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Expr::Var(_) => "var",
            Expr::Const(_) => "const",
            Expr::Add(..) => "add",
            Expr::Sub(..) => "sub",
            Expr::Abs(_) => "abs",
            Expr::Halve(_) => "halve",
            Expr::Min(..) => "min",
            Expr::Max(..) => "max",
        }
    }

    pub fn children(&self) -> Vec<&ExprRef> {
        match self {
            Expr::Var(_) | Expr::Const(_) => vec![],
            Expr::Abs(a) | Expr::Halve(a) => vec![a],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => vec![a, b],
        }
    }
}

/// Structural equality; constants compare by bit pattern.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        fn same(a: &ExprRef, b: &ExprRef) -> bool {
            Arc::ptr_eq(a, b) || **a == **b
        }
        match (self, other) {
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Const(a), Expr::Const(b)) => a.to_bits() == b.to_bits(),
            (Expr::Abs(a), Expr::Abs(b)) | (Expr::Halve(a), Expr::Halve(b)) => same(a, b),
            (Expr::Add(a, b), Expr::Add(c, d))
            | (Expr::Sub(a, b), Expr::Sub(c, d))
            | (Expr::Min(a, b), Expr::Min(c, d))
            | (Expr::Max(a, b), Expr::Max(c, d)) => same(a, c) && same(b, d),
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::render_infix(self))
    }
}

fn addr(e: &ExprRef) -> usize {
    Arc::as_ptr(e) as usize
}

/// Unrolls `T(n, x1..xN)` into an expression.
///
/// Min chains and the max over eliminations are folded left, with the
/// eliminations visited in order `j = 1, 2, ..., N-n+2`. Subsequences
/// reached by different elimination orders share one node.
pub fn build_selection_expr(len: usize, n: Rank, form: ExprForm) -> Result<ExprRef> {
    build_selection_expr_with_budget(len, n, form, Budget::DEFAULT)
}

pub fn build_selection_expr_with_budget(
    len: usize,
    n: Rank,
    form: ExprForm,
    budget: Budget,
) -> Result<ExprRef> {
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    let rank = Rank::new(n.get(), len)?.get();
    let required = naive_call_bound(len, rank);
    if required > budget.0 as u128 {
        return Err(Error::BudgetExceeded {
            mode: "expression",
            len,
            rank,
            required,
            budget: budget.0,
        });
    }
    let mut interned = HashMap::new();
    let minmax = unroll(&IndexSubset::full(len)?, rank, &mut interned);
    Ok(match form {
        ExprForm::MinMax => minmax,
        ExprForm::Arithmetic => lower_minmax_to_arith(&minmax),
    })
}

fn unroll(
    subset: &IndexSubset,
    rank: usize,
    interned: &mut HashMap<IndexSubset, ExprRef>,
) -> ExprRef {
    if let Some(e) = interned.get(subset) {
        return e.clone();
    }
    let e = if rank == 1 {
        subset
            .iter()
            .map(Expr::var)
            .reduce(Expr::min)
            .expect("non-empty subset")
    } else {
        let width = subset.len() + 2 - rank;
        (1..=width)
            .map(|j| {
                let child = subset.eliminate(j).expect("j within subset");
                unroll(&child, rank - 1, interned)
            })
            .reduce(Expr::max)
            .expect("width >= 2")
    };
    interned.insert(subset.clone(), e.clone());
    e
}

/// Rewrites `min(a, b)` as `(a + b - |a - b|)/2` and `max(a, b)` as
/// `(a + b + |a - b|)/2`. Expressions without min/max come back unchanged.
pub fn lower_minmax_to_arith(expr: &ExprRef) -> ExprRef {
    fn go(e: &ExprRef, done: &mut HashMap<usize, ExprRef>) -> ExprRef {
        if let Some(r) = done.get(&addr(e)) {
            return r.clone();
        }
        let out = match &**e {
            Expr::Var(_) | Expr::Const(_) => e.clone(),
            Expr::Abs(a) => rebuild1(e, a, go(a, done), Expr::abs),
            Expr::Halve(a) => rebuild1(e, a, go(a, done), Expr::halve),
            Expr::Add(a, b) => rebuild2(e, (a, b), (go(a, done), go(b, done)), Expr::add),
            Expr::Sub(a, b) => rebuild2(e, (a, b), (go(a, done), go(b, done)), Expr::sub),
            Expr::Min(a, b) => {
                let (a, b) = (go(a, done), go(b, done));
                let spread = Expr::abs(Expr::sub(a.clone(), b.clone()));
                Expr::halve(Expr::sub(Expr::add(a, b), spread))
            }
            Expr::Max(a, b) => {
                let (a, b) = (go(a, done), go(b, done));
                let spread = Expr::abs(Expr::sub(a.clone(), b.clone()));
                Expr::halve(Expr::add(Expr::add(a, b), spread))
            }
        };
        done.insert(addr(e), out.clone());
        out
    }
    go(expr, &mut HashMap::new())
}

fn rebuild1(orig: &ExprRef, a: &ExprRef, a2: ExprRef, f: fn(ExprRef) -> ExprRef) -> ExprRef {
    if Arc::ptr_eq(a, &a2) {
        orig.clone()
    } else {
        f(a2)
    }
}

fn rebuild2(
    orig: &ExprRef,
    (a, b): (&ExprRef, &ExprRef),
    (a2, b2): (ExprRef, ExprRef),
    f: fn(ExprRef, ExprRef) -> ExprRef,
) -> ExprRef {
    if Arc::ptr_eq(a, &a2) && Arc::ptr_eq(b, &b2) {
        orig.clone()
    } else {
        f(a2, b2)
    }
}

/// Which form an expression is in, or `None` if it mixes min/max with
/// `|.|` or halving.
pub fn form_of(expr: &ExprRef) -> Option<ExprForm> {
    let (mut minmax, mut arith) = (false, false);
    visit(expr, &mut |e| match e {
        Expr::Min(..) | Expr::Max(..) => minmax = true,
        Expr::Abs(_) | Expr::Halve(_) => arith = true,
        _ => {}
    });
    match (minmax, arith) {
        (true, true) => None,
        (true, false) => Some(ExprForm::MinMax),
        (false, _) => Some(ExprForm::Arithmetic),
    }
}

/// Calls `f` once per distinct node, children before parents.
pub(crate) fn visit(expr: &ExprRef, f: &mut dyn FnMut(&Expr)) {
    fn go(e: &ExprRef, seen: &mut std::collections::HashSet<usize>, f: &mut dyn FnMut(&Expr)) {
        if !seen.insert(addr(e)) {
            return;
        }
        for c in e.children() {
            go(c, seen, f);
        }
        f(e);
    }
    go(expr, &mut Default::default(), f)
}

/// Largest variable index referenced, 0 if none.
pub fn max_var(expr: &ExprRef) -> usize {
    let mut top = 0;
    visit(expr, &mut |e| {
        if let Expr::Var(i) = e {
            top = top.max(*i);
        }
    });
    top
}

#[inline]
pub(crate) fn min_cmp(a: f64, b: f64) -> f64 {
    if b < a {
        b
    } else {
        a
    }
}

#[inline]
pub(crate) fn max_cmp(a: f64, b: f64) -> f64 {
    if b > a {
        b
    } else {
        a
    }
}

/// Bottom-up evaluation with `assignment[i - 1]` bound to `x_i`.
///
/// Min and max use comparisons, so a min/max-form expression reproduces
/// the recursion's output exactly.
pub fn eval_expr(expr: &ExprRef, assignment: &[f64]) -> Result<f64> {
    fn go(e: &ExprRef, xs: &[f64], memo: &mut HashMap<usize, f64>) -> Result<f64> {
        if let Some(&v) = memo.get(&addr(e)) {
            return Ok(v);
        }
        let v = match &**e {
            Expr::Var(i) => *i
                .checked_sub(1)
                .and_then(|k| xs.get(k))
                .ok_or(Error::MissingVariable(*i))?,
            Expr::Const(c) => *c,
            Expr::Add(a, b) => go(a, xs, memo)? + go(b, xs, memo)?,
            Expr::Sub(a, b) => go(a, xs, memo)? - go(b, xs, memo)?,
            Expr::Abs(a) => go(a, xs, memo)?.abs(),
            Expr::Halve(a) => go(a, xs, memo)? / 2.0,
            Expr::Min(a, b) => min_cmp(go(a, xs, memo)?, go(b, xs, memo)?),
            Expr::Max(a, b) => max_cmp(go(a, xs, memo)?, go(b, xs, memo)?),
        };
        if !v.is_finite() {
            let mut node = text::render_infix(e);
            if node.len() > 120 {
                node.truncate(117);
                node.push_str("...");
            }
            return Err(Error::NonFiniteIntermediate { node });
        }
        memo.insert(addr(e), v);
        Ok(v)
    }
    go(expr, assignment, &mut HashMap::new())
}
