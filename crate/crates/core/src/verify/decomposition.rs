use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use super::SeparationCertificate;
use crate::instance::VertexId;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecompositionError {
    #[error("cells of {u} and {v} share {vertex}")]
    CellOverlap { u: VertexId, v: VertexId, vertex: VertexId },
    #[error("cell of {owner} rounds up to {rounded}, above f times its mass, {bound}")]
    CellBound {
        owner: VertexId,
        #[serde(serialize_with = "rational::int_as_string")]
        rounded: BigInt,
        #[serde(with = "rational::as_string")]
        bound: Rational,
    },
    #[error("{vertex} outside every cell rounds up to {rounded}, above {bound}")]
    ResidualBound {
        vertex: VertexId,
        #[serde(serialize_with = "rational::int_as_string")]
        rounded: BigInt,
        #[serde(with = "rational::as_string")]
        bound: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub cells: usize,
    #[serde(serialize_with = "rational::int_as_string")]
    pub rounded_total: BigInt,
    #[serde(with = "rational::as_string")]
    pub bound_total: Rational,
}

/// Checks that the cells are disjoint, that each cell `C` satisfies
/// `Σ_C ⌈x⌉ <= f Σ_C x`, and that every positive vertex outside the cells
/// satisfies `⌈x_u⌉ <= f x_u`.
pub fn check_rounding_decomposition(
    x: &[Rational],
    cert: &SeparationCertificate,
    f: usize,
) -> Result<DecompositionReport, DecompositionError> {
    let f = Rational::from_integer(BigInt::from(f));
    let mut owner: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut rounded_total = BigInt::from(0);
    let mut bound_total = Rational::from_integer(BigInt::from(0));
    for (v, cell) in &cert.cells {
        for &u in cell {
            if let Some(&w) = owner.get(&u) {
                return Err(DecompositionError::CellOverlap { u: w, v: *v, vertex: u });
            }
            owner.insert(u, *v);
        }
        let rounded: BigInt = cell.iter().map(|u| rational::ceil(&x[u.index()])).sum();
        let bound = &f * cell.iter().map(|u| &x[u.index()]).sum::<Rational>();
        if Rational::from_integer(rounded.clone()) > bound {
            return Err(DecompositionError::CellBound {
                owner: *v,
                rounded,
                bound,
            });
        }
        rounded_total += rounded;
        bound_total += bound;
    }
    for (i, xu) in x.iter().enumerate() {
        let u = VertexId::from_index(i);
        if owner.contains_key(&u) || !xu.is_positive() {
            continue;
        }
        let rounded = rational::ceil(xu);
        let bound = &f * xu;
        if Rational::from_integer(rounded.clone()) > bound {
            return Err(DecompositionError::ResidualBound { vertex: u, rounded, bound });
        }
        rounded_total += rounded;
        bound_total += bound;
    }
    Ok(DecompositionReport {
        cells: cert.cells.len(),
        rounded_total,
        bound_total,
    })
}
