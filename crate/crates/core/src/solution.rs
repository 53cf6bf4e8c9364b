//! Integral solution `(x*, h*)` and its JSON file format.
//!
//! ```json
//! {"x": {"1": 1, "2": 0}, "h": [[1, 1, "1"], [1, 2, "0"]],
//!  "objective": 1, "lp_root_objective": "1", "ratio": "1"}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::{EdgeId, VertexId};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Indexed by vertex position.
    pub x: Vec<u64>,
    /// Over the original edge set.
    pub h: BTreeMap<(EdgeId, VertexId), Rational>,
    pub objective: u64,
    pub lp_root_objective: Rational,
    pub ratio: Rational,
}

#[derive(Debug, thiserror::Error)]
pub enum SolutionFileError {
    #[error("malformed solution JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error("vertex ids must be 1..=n without gaps, found {0}")]
    VertexIds(usize),
    #[error("duplicate assignment entry for (e{0}, v{1})")]
    DuplicateEntry(usize, usize),
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    x: BTreeMap<usize, u64>,
    h: Vec<(usize, usize, String)>,
    objective: u64,
    lp_root_objective: String,
    ratio: String,
}

/// `Σx* / lp_root`, with `0/0` read as 1. `None` when only the root is zero.
pub fn ratio(objective: u64, lp_root: &Rational) -> Option<Rational> {
    use num_traits::Zero;
    if lp_root.is_zero() {
        (objective == 0).then(rational::one)
    } else {
        Some(Rational::from_integer(objective.into()) / lp_root)
    }
}

impl Solution {
    pub fn to_json(&self) -> String {
        let file = SolutionFile {
            x: self.x.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect(),
            h: self
                .h
                .iter()
                .map(|((e, v), q)| (e.0, v.0, rational::render(q)))
                .collect(),
            objective: self.objective,
            lp_root_objective: rational::render(&self.lp_root_objective),
            ratio: rational::render(&self.ratio),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("solution serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionFileError> {
        let file: SolutionFile = serde_json::from_str(text)?;
        let parse = |s: &str| rational::parse_rational(s).ok_or_else(|| SolutionFileError::Rational(s.to_string()));
        let mut x = Vec::with_capacity(file.x.len());
        for (pos, (&id, &value)) in file.x.iter().enumerate() {
            if id != pos + 1 {
                return Err(SolutionFileError::VertexIds(id));
            }
            x.push(value);
        }
        let mut h = BTreeMap::new();
        for (e, v, q) in &file.h {
            if h.insert((EdgeId(*e), VertexId(*v)), parse(q)?).is_some() {
                return Err(SolutionFileError::DuplicateEntry(*e, *v));
            }
        }
        Ok(Solution {
            x,
            h,
            objective: file.objective,
            lp_root_objective: parse(&file.lp_root_objective)?,
            ratio: parse(&file.ratio)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn sample() -> Solution {
        let mut h = BTreeMap::new();
        h.insert((EdgeId(1), VertexId(1)), int(1));
        h.insert((EdgeId(1), VertexId(2)), int(0));
        h.insert((EdgeId(2), VertexId(2)), frac(1, 3));
        Solution {
            x: vec![1, 0],
            h,
            objective: 1,
            lp_root_objective: frac(3, 4),
            ratio: frac(4, 3),
        }
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let text = s.to_json();
        assert!(text.contains("\"lp_root_objective\": \"3/4\""));
        assert!(text.contains("\"1\": 1"));
        assert_eq!(Solution::from_json(&text).unwrap(), s);
    }

    #[test]
    fn rejects_bad_rationals_and_ids() {
        let bad = r#"{"x": {"1": 1}, "h": [[1, 1, "1/0"]], "objective": 1, "lp_root_objective": "1", "ratio": "1"}"#;
        assert!(matches!(Solution::from_json(bad), Err(SolutionFileError::Rational(_))));
        let gap = r#"{"x": {"2": 1}, "h": [], "objective": 1, "lp_root_objective": "1", "ratio": "1"}"#;
        assert!(matches!(Solution::from_json(gap), Err(SolutionFileError::VertexIds(2))));
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0, &int(0)), Some(int(1)));
        assert_eq!(ratio(1, &int(0)), None);
        assert_eq!(ratio(3, &frac(3, 2)), Some(int(2)));
    }
}
