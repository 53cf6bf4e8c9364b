//! Fraction-free (Bareiss) elimination over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::{self, Rational};

/// Row echelon data from a fraction-free elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub rank: usize,
    /// `(original row, column)` of each pivot, in elimination order.
    pub pivots: Vec<(usize, usize)>,
}

/// Each row is scaled by the lcm of its denominators, which preserves rank.
fn integer_rows(rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            let l = rational::common_denominator(row.iter());
            row.iter()
                .map(|q| (q * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect()
}

pub fn echelon(rows: &[Vec<Rational>], cols: usize) -> Echelon {
    let mut a = integer_rows(rows);
    debug_assert!(a.iter().all(|r| r.len() == cols));
    let mut order: Vec<usize> = (0..a.len()).collect();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        order.swap(r, p);
        let (head, tail) = a.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            for j in (c + 1)..cols {
                let num = &pivot_row[c] * &row[j] - &row[c] * &pivot_row[j];
                let (q, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                row[j] = q;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot_row[c].clone();
        pivots.push((order[r], c));
        r += 1;
    }
    Echelon { rank: r, pivots }
}

pub fn rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    echelon(rows, cols).rank
}
