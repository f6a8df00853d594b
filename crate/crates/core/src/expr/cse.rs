//! Common-subexpression elimination by hash-consing.
//!
//! Each node is keyed by its kind plus the ids of its already-interned
//! children. Operand order is part of the key: `x1 + x2` and `x2 + x1` stay
//! distinct so rendered formulas keep their original shape.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{addr, Expr, ExprRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExprMetrics {
    /// Nodes in the fully unfolded tree (saturating).
    pub node_count_tree: u64,
    /// Structurally distinct nodes.
    pub node_count_dag: u64,
    pub depth: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Var(usize),
    Const(u64),
    Add(usize, usize),
    Sub(usize, usize),
    Abs(usize),
    Halve(usize),
    Min(usize, usize),
    Max(usize, usize),
}

/// Intern table mapping structural keys to shared nodes.
#[derive(Default)]
pub(crate) struct Interner {
    ids: HashMap<Key, usize>,
    pub(crate) nodes: Vec<ExprRef>,
    by_addr: HashMap<usize, usize>,
}

impl Interner {
    /// Returns the id of the canonical node structurally equal to `e`.
    pub(crate) fn intern(&mut self, e: &ExprRef) -> usize {
        if let Some(&id) = self.by_addr.get(&addr(e)) {
            return id;
        }
        let key = match &**e {
            Expr::Var(i) => Key::Var(*i),
            Expr::Const(c) => Key::Const(c.to_bits()),
            Expr::Add(a, b) => Key::Add(self.intern(a), self.intern(b)),
            Expr::Sub(a, b) => Key::Sub(self.intern(a), self.intern(b)),
            Expr::Abs(a) => Key::Abs(self.intern(a)),
            Expr::Halve(a) => Key::Halve(self.intern(a)),
            Expr::Min(a, b) => Key::Min(self.intern(a), self.intern(b)),
            Expr::Max(a, b) => Key::Max(self.intern(a), self.intern(b)),
        };
        let id = match self.ids.get(&key) {
            Some(&id) => id,
            None => {
                let n = |i: usize| self.nodes[i].clone();
                let node = match key {
                    Key::Var(_) | Key::Const(_) => e.clone(),
                    Key::Add(a, b) => Expr::add(n(a), n(b)),
                    Key::Sub(a, b) => Expr::sub(n(a), n(b)),
                    Key::Abs(a) => Expr::abs(n(a)),
                    Key::Halve(a) => Expr::halve(n(a)),
                    Key::Min(a, b) => Expr::min(n(a), n(b)),
                    Key::Max(a, b) => Expr::max(n(a), n(b)),
                };
                let id = self.nodes.len();
                self.by_addr.insert(addr(&node), id);
                self.nodes.push(node);
                self.ids.insert(key, id);
                id
            }
        };
        self.by_addr.insert(addr(e), id);
        id
    }

    pub(crate) fn id_of(&self, e: &ExprRef) -> Option<usize> {
        self.by_addr.get(&addr(e)).copied()
    }
}

/// Shares structurally identical subtrees and reports tree vs DAG sizes.
pub fn cse(expr: &ExprRef) -> (ExprRef, ExprMetrics) {
    let mut interner = Interner::default();
    let root = interner.intern(expr);
    let shared = interner.nodes[root].clone();
    let metrics = ExprMetrics {
        node_count_tree: tree_size(&shared),
        node_count_dag: interner.nodes.len() as u64,
        depth: depth(&shared),
    };
    (shared, metrics)
}

/// Metrics without rebuilding the expression.
pub fn metrics(expr: &ExprRef) -> ExprMetrics {
    cse(expr).1
}

/// Node count of the unfolded tree, saturating at `u64::MAX`.
pub fn tree_size(expr: &ExprRef) -> u64 {
    fn go(e: &ExprRef, memo: &mut HashMap<usize, u64>) -> u64 {
        if let Some(&n) = memo.get(&addr(e)) {
            return n;
        }
        let n = e
            .children()
            .into_iter()
            .fold(1u64, |acc, c| acc.saturating_add(go(c, memo)));
        memo.insert(addr(e), n);
        n
    }
    go(expr, &mut HashMap::new())
}

pub fn depth(expr: &ExprRef) -> u64 {
    fn go(e: &ExprRef, memo: &mut HashMap<usize, u64>) -> u64 {
        if let Some(&n) = memo.get(&addr(e)) {
            return n;
        }
        let n = 1 + e
            .children()
            .into_iter()
            .map(|c| go(c, memo))
            .max()
            .unwrap_or(0);
        memo.insert(addr(e), n);
        n
    }
    go(expr, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{build_selection_expr, eval_expr, ExprForm};
    use crate::sequence::Rank;
    use std::sync::Arc;

    fn x(i: usize) -> ExprRef {
        Expr::var(i)
    }

    /// Unshared copy of `e`, so every node is its own allocation.
    fn deep_copy(e: &ExprRef) -> ExprRef {
        match &**e {
            Expr::Var(_) | Expr::Const(_) => Arc::new((**e).clone()),
            Expr::Add(a, b) => Expr::add(deep_copy(a), deep_copy(b)),
            Expr::Sub(a, b) => Expr::sub(deep_copy(a), deep_copy(b)),
            Expr::Abs(a) => Expr::abs(deep_copy(a)),
            Expr::Halve(a) => Expr::halve(deep_copy(a)),
            Expr::Min(a, b) => Expr::min(deep_copy(a), deep_copy(b)),
            Expr::Max(a, b) => Expr::max(deep_copy(a), deep_copy(b)),
        }
    }

    fn distinct_allocations(e: &ExprRef) -> usize {
        let mut n = 0;
        crate::expr::visit(e, &mut |_| n += 1);
        n
    }

    #[test]
    fn variable_is_unchanged() {
        let (e, m) = cse(&x(1));
        assert_eq!(*e, Expr::Var(1));
        assert_eq!(
            m,
            ExprMetrics {
                node_count_tree: 1,
                node_count_dag: 1,
                depth: 1
            }
        );
    }

    #[test]
    fn min_of_three_shares_spread() {
        let e = build_selection_expr(3, Rank::new(1, 3).unwrap(), ExprForm::Arithmetic).unwrap();
        let (shared, m) = cse(&deep_copy(&e));
        assert!(m.node_count_dag < m.node_count_tree);
        // min2 = halve(sub(add(x1,x2), abs(sub(x1,x2)))) is 9 tree nodes, 7
        // distinct. min3 = halve(sub(add(m,x3), abs(sub(m,x3)))) holds two
        // copies of it and adds 6 distinct nodes.
        assert_eq!(m.node_count_tree, 1 + 1 + 1 + 9 + 1 + 1 + 1 + 9 + 1);
        assert_eq!(m.node_count_dag, 7 + 6);
        assert_eq!(distinct_allocations(&shared) as u64, m.node_count_dag);
    }

    #[test]
    fn idempotent() {
        let e = build_selection_expr(4, Rank::new(3, 4).unwrap(), ExprForm::Arithmetic).unwrap();
        let (once, m1) = cse(&e);
        let (twice, m2) = cse(&once);
        assert_eq!(m1, m2);
        assert_eq!(once, twice);
    }

    #[test]
    fn operand_order_is_significant() {
        let e = Expr::sub(Expr::add(x(1), x(2)), Expr::add(x(2), x(1)));
        let (_, m) = cse(&e);
        assert_eq!(m.node_count_dag, 5);
        assert_eq!(m.node_count_tree, 7);
    }

    #[test]
    fn preserves_value() {
        let e = build_selection_expr(5, Rank::new(3, 5).unwrap(), ExprForm::Arithmetic).unwrap();
        let (shared, m) = cse(&deep_copy(&e));
        assert!(m.node_count_dag <= m.node_count_tree);
        let xs = [0.25, -3.0, 7.5, 1.0, 2.0];
        assert_eq!(eval_expr(&e, &xs), eval_expr(&shared, &xs));
    }

    #[test]
    fn constants_intern_by_bits() {
        let e = Expr::add(Expr::constant(0.0), Expr::constant(-0.0));
        let (_, m) = cse(&e);
        assert_eq!(m.node_count_dag, 3);
        let e = Expr::add(Expr::constant(1.5), Expr::constant(1.5));
        let (_, m) = cse(&e);
        assert_eq!(m.node_count_dag, 2);
    }

    #[test]
    fn tree_size_saturates() {
        let mut e = x(1);
        for _ in 0..70 {
            e = Expr::add(e.clone(), e);
        }
        assert_eq!(tree_size(&e), u64::MAX);
        assert_eq!(depth(&e), 71);
        assert_eq!(cse(&e).1.node_count_dag, 71);
    }
}
