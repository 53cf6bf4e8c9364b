use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use super::{LpModel, Sense};
use crate::rational::Rational;

fn term(out: &mut String, first: bool, coef: &Rational, name: &str) {
    if coef.is_negative() {
        out.push_str(" -");
    } else if !first {
        out.push_str(" +");
    }
    let mag = coef.abs();
    if mag.is_one() {
        let _ = write!(out, " {name}");
    } else {
        let _ = write!(out, " {mag} {name}");
    }
}

/// CPLEX-style LP text with exact `p/q` coefficients.
pub fn dump_lp(model: &LpModel) -> String {
    let names: Vec<String> = model.vars().iter().map(ToString::to_string).collect();
    let mut out = String::from("\\ capvc relaxation\nMinimize\n obj:");
    let mut first = true;
    for (j, c) in model.objective().iter().enumerate() {
        if !c.is_zero() {
            term(&mut out, first, c, &names[j]);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for row in model.rows() {
        let _ = write!(out, " {}:", row.id);
        let mut first = true;
        for (j, a) in &row.coeffs {
            if !a.is_zero() {
                term(&mut out, first, a, &names[*j]);
                first = false;
            }
        }
        if first {
            out.push_str(" 0");
        }
        let op = match row.sense {
            Sense::Eq => "=",
            Sense::Le => "<=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        match &model.upper()[j] {
            Some(u) => {
                let _ = writeln!(out, " {} <= {name} <= {u}", model.lower()[j]);
            }
            None => {
                let _ = writeln!(out, " {name} >= {}", model.lower()[j]);
            }
        }
    }
    out.push_str("End\n");
    out
}
