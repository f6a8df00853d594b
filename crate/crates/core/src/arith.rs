//! Branchless min/max built from `+`, `-`, `|.|` and halving.
//!
//! `min(a, b) = (a + b - |a - b|) / 2` and `max(a, b) = (a + b + |a - b|) / 2`.
//! Both are exact on integers up to 2^50 in magnitude; for general floats
//! the error is a few ulps of `max(|a|, |b|)`.

use crate::error::{Error, Result};
use crate::sequence::RealSequence;

fn check_finite(a: f64, b: f64) -> Result<()> {
    for (position, value) in [(1, a), (2, b)] {
        if !value.is_finite() {
            return Err(Error::NonFinite { position, value });
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn min_arith_unchecked(a: f64, b: f64) -> f64 {
    (a + b - (a - b).abs()) / 2.0
}

#[inline]
pub(crate) fn max_arith_unchecked(a: f64, b: f64) -> f64 {
    (a + b + (a - b).abs()) / 2.0
}

pub fn pairwise_min_arith(a: f64, b: f64) -> Result<f64> {
    check_finite(a, b)?;
    Ok(min_arith_unchecked(a, b))
}

pub fn pairwise_max_arith(a: f64, b: f64) -> Result<f64> {
    check_finite(a, b)?;
    Ok(max_arith_unchecked(a, b))
}

/// `min{min{x1..x(N-1)}, xN}` folded left with the arithmetic identity.
pub fn min_chain(seq: &RealSequence) -> f64 {
    let (first, rest) = seq.values().split_first().expect("non-empty");
    rest.iter()
        .fold(*first, |acc, &x| min_arith_unchecked(acc, x))
}

/// `max{max{x1..x(N-1)}, xN}` folded left with the arithmetic identity.
pub fn max_chain(seq: &RealSequence) -> f64 {
    let (first, rest) = seq.values().split_first().expect("non-empty");
    rest.iter()
        .fold(*first, |acc, &x| max_arith_unchecked(acc, x))
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
///
/// The arithmetic identities lose precision relative to the operands, not
/// the result, so the scale is taken over the operands as well.
pub fn close_rel(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.abs().max(a.abs()).max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> RealSequence {
        RealSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(pairwise_min_arith(1.0, 2.0), Ok(1.0));
        assert_eq!(pairwise_max_arith(1.0, 2.0), Ok(2.0));
        assert_eq!(pairwise_min_arith(-3.0, 7.0), Ok(-3.0));
        assert_eq!(pairwise_max_arith(-3.0, 7.0), Ok(7.0));
        for a in [0.0, -4.5, 1e300, 0.1] {
            assert_eq!(pairwise_min_arith(a, a), Ok(a));
            assert_eq!(pairwise_max_arith(a, a), Ok(a));
        }
    }

    #[test]
    fn pairwise_rejects_non_finite() {
        assert!(pairwise_min_arith(f64::NAN, 1.0).is_err());
        assert!(matches!(
            pairwise_max_arith(1.0, f64::INFINITY),
            Err(Error::NonFinite { position: 2, .. })
        ));
    }

    #[test]
    fn exact_on_large_integers() {
        let big = (1u64 << 50) as f64;
        let pairs = [
            (big, -big),
            (big, big - 1.0),
            (-big, -big + 3.0),
            (0.0, big),
        ];
        for (a, b) in pairs {
            assert_eq!(pairwise_min_arith(a, b).unwrap(), a.min(b));
            assert_eq!(pairwise_max_arith(a, b).unwrap(), a.max(b));
        }
    }

    #[test]
    fn chains() {
        assert_eq!(min_chain(&seq(&[5.0])), 5.0);
        assert_eq!(min_chain(&seq(&[5.0, 1.0, 9.0])), 1.0);
        assert_eq!(min_chain(&seq(&[2.0, 2.0, 2.0])), 2.0);
        assert_eq!(max_chain(&seq(&[5.0])), 5.0);
        assert_eq!(max_chain(&seq(&[5.0, 1.0, 9.0])), 9.0);
        assert_eq!(max_chain(&seq(&[-1.0, -1.0])), -1.0);
    }

    #[test]
    fn close_rel_scales_by_operands() {
        assert!(close_rel(1e6, 1e6 + 1e-7, 1e-12, 0.0));
        assert!(!close_rel(1.0, 1.001, 1e-9, 0.0));
        assert!(close_rel(1e-3, 1e-3 + 1e-10, 1e-12, 1e6));
    }
}
