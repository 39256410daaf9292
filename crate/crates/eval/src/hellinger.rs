//! Hellinger distance between discrete distributions.

use scd_core::WordVector;

use crate::error::{EvalError, Result};

/// Allowed deviation of a distribution's sum from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

fn check(values: impl Iterator<Item = f64>, name: &str) -> Result<()> {
    let mut sum = 0.0;
    for x in values {
        if !x.is_finite() || x < 0.0 {
            return Err(EvalError::NotADistribution(format!("{name} has entry {x}")));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(EvalError::NotADistribution(format!("{name} sums to {sum}")));
    }
    Ok(())
}

/// `sqrt(sum_j (sqrt p_j - sqrt q_j)^2 / 2)`, in `[0, 1]`. Disjoint
/// supports give exactly 1, which the rounded sum can miss by an ulp.
pub fn hellinger_row(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(EvalError::NotADistribution(format!(
            "lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check(p.iter().copied(), "p")?;
    check(q.iter().copied(), "q")?;
    if p.iter().zip(q).all(|(a, b)| *a == 0.0 || *b == 0.0) {
        return Ok(1.0);
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok((0.5 * s).sqrt().clamp(0.0, 1.0))
}

/// Same distance for sparse rows; absent entries are zero.
pub fn hellinger_sparse(p: &WordVector, q: &WordVector) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(EvalError::NotADistribution(format!(
            "dimensions differ: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    check(p.iter().map(|(_, x)| x), "p")?;
    check(q.iter().map(|(_, x)| x), "q")?;
    if p.iter().all(|(w, x)| x == 0.0 || q.get(w) == 0.0) {
        return Ok(1.0);
    }
    let (mut a, mut b) = (p.iter().peekable(), q.iter().peekable());
    let mut s = 0.0;
    loop {
        let d = match (a.peek(), b.peek()) {
            (Some(&(wa, x)), Some(&(wb, y))) => {
                if wa == wb {
                    a.next();
                    b.next();
                    x.sqrt() - y.sqrt()
                } else if wa < wb {
                    a.next();
                    x.sqrt()
                } else {
                    b.next();
                    y.sqrt()
                }
            }
            (Some(&(_, x)), None) => {
                a.next();
                x.sqrt()
            }
            (None, Some(&(_, y))) => {
                b.next();
                y.sqrt()
            }
            (None, None) => break,
        };
        s += d * d;
    }
    Ok((0.5 * s).sqrt().clamp(0.0, 1.0))
}
