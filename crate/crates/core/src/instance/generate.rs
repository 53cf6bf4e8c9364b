use num_traits::Zero;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Instance, Vertex, VertexId};
use crate::flow::{check_feasibility, CutWitness, Feasibility};
use crate::rational::int;

/// Bounds for [`generate_instance`]. Demands, capacities and multiplicities
/// are drawn uniformly from `1..=max_demand`, `1..=max_capacity` and
/// `0..=max_multiplicity` (a zero maximum pins the quantity to zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    pub vertices: usize,
    pub edges: usize,
    pub max_edge_size: usize,
    pub max_demand: u64,
    pub max_capacity: u64,
    pub max_multiplicity: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            vertices: 5,
            edges: 6,
            max_edge_size: 3,
            max_demand: 5,
            max_capacity: 5,
            max_multiplicity: 3,
        }
    }
}

const FRESH_ATTEMPTS: usize = 32;

fn draw(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    if hi < lo {
        hi
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn draw_instance(rng: &mut ChaCha8Rng, p: &GeneratorParams) -> (Vec<Vertex>, Vec<Edge>) {
    let vertices = (0..p.vertices)
        .map(|_| Vertex {
            capacity: int(draw(rng, 1, p.max_capacity) as i64),
            multiplicity: draw(rng, 0, p.max_multiplicity),
        })
        .collect();
    let widest = p.max_edge_size.min(p.vertices).max(1);
    let edges = (0..p.edges)
        .map(|_| {
            let size = rng.gen_range(1..=widest);
            let mut members: Vec<VertexId> = sample(rng, p.vertices, size)
                .into_iter()
                .map(VertexId::from_index)
                .collect();
            members.sort_unstable();
            Edge {
                demand: int(draw(rng, 1, p.max_demand) as i64),
                vertices: members,
            }
        })
        .collect();
    (vertices, edges)
}

/// Deterministic for a fixed seed; the result always admits a feasible
/// assignment. Fresh draws are retried first, then multiplicities on a
/// violated cut are raised until the flow check passes.
///
/// # Panics
/// If `params.vertices == 0` or `params.max_edge_size == 0`.
pub fn generate_instance(seed: u64, params: &GeneratorParams) -> Instance {
    assert!(params.vertices >= 1, "need at least one vertex");
    assert!(params.max_edge_size >= 1, "edges need at least one vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut last = None;
    for _ in 0..FRESH_ATTEMPTS {
        let (vertices, edges) = draw_instance(&mut rng, params);
        let inst = Instance::new(vertices, edges).expect("generator output is well-formed");
        if check_feasibility(&inst).outcome.is_feasible() {
            return inst;
        }
        last = Some(inst);
    }

    let inst = last.expect("at least one attempt");
    let mut vertices = inst.vertices().to_vec();
    let edges = inst.edges().to_vec();
    loop {
        let inst = Instance::new(vertices.clone(), edges.clone()).expect("well-formed");
        let witness = match check_feasibility(&inst).outcome {
            Feasibility::Feasible(_) => return inst,
            Feasibility::Infeasible(w) => w,
        };
        let touched: Vec<VertexId> = match &witness {
            CutWitness::DemandExceedsBudget { edges: cut, .. } => {
                let mut vs: Vec<VertexId> = cut
                    .iter()
                    .flat_map(|&e| inst.edge(e).vertices.iter().copied())
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                vs
            }
            CutWitness::UncoverableZeroDemandEdge { edge } => inst.edge(*edge).vertices.clone(),
        };
        if touched.iter().all(|v| vertices[v.index()].capacity.is_zero()) {
            for v in &touched {
                vertices[v.index()].capacity = int(draw(&mut rng, 1, params.max_capacity.max(1)) as i64);
            }
        } else {
            for v in &touched {
                let vx = &mut vertices[v.index()];
                if !vx.capacity.is_zero() || matches!(witness, CutWitness::UncoverableZeroDemandEdge { .. }) {
                    vx.multiplicity += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = GeneratorParams::default();
        assert_eq!(generate_instance(7, &p), generate_instance(7, &p));
        assert_ne!(generate_instance(7, &p), generate_instance(8, &p));
    }

    #[test]
    fn outputs_are_feasible_and_shaped() {
        let p = GeneratorParams {
            vertices: 6,
            edges: 9,
            max_edge_size: 3,
            max_demand: 5,
            max_capacity: 2,
            max_multiplicity: 1,
        };
        for seed in 0..50 {
            let inst = generate_instance(seed, &p);
            assert!(check_feasibility(&inst).outcome.is_feasible(), "seed {seed}");
            assert_eq!(inst.num_vertices(), 6);
            assert_eq!(inst.num_edges(), 9);
            assert!(inst.edges().iter().all(|e| (1..=3).contains(&e.vertices.len())));
        }
    }

    #[test]
    fn singleton_shape() {
        let p = GeneratorParams {
            vertices: 1,
            edges: 1,
            max_edge_size: 1,
            max_demand: 1,
            max_capacity: 1,
            max_multiplicity: 1,
        };
        let inst = generate_instance(7, &p);
        assert_eq!(inst.num_vertices(), 1);
        assert_eq!(inst.num_edges(), 1);
        assert_eq!(inst.f(), 1);
        assert_eq!(inst.demand(crate::instance::EdgeId(1)), &int(1));
        assert_eq!(inst.capacity(VertexId(1)), &int(1));
        assert_eq!(inst.multiplicity(VertexId(1)), 1);
    }
}
