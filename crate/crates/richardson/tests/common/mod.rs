//! Shared helpers for the integration suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use richardson::engine::{CompetitionOutcome, InfectionType, InitialConfig, WeightAssignment};
use richardson::graph::{Graph, GraphBuilder, VertexId};

/// Random connected simple graph: a random spanning tree plus a few extra
/// edges, between 2 and `max_vertices` vertices.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, max_vertices: usize) -> Graph {
    let v = rng.random_range(2..=max_vertices);
    let mut b = GraphBuilder::new();
    b.add_vertex(None);
    for i in 1..v {
        let parent = rng.random_range(0..i) as u32;
        let newv = b.add_vertex(None);
        b.add_edge(VertexId(parent), newv).unwrap();
    }
    let extra = rng.random_range(0..=v);
    for _ in 0..extra {
        let x = rng.random_range(0..v) as u32;
        let y = rng.random_range(0..v) as u32;
        if x != y {
            // duplicates are rejected; that's fine
            let _ = b.add_edge(VertexId(x), VertexId(y));
        }
    }
    b.freeze()
}

/// Two distinct random sources, type 1 and type 2.
pub fn random_two_sources(rng: &mut ChaCha8Rng, g: &Graph) -> InitialConfig {
    let v = g.vertex_count();
    let s1 = rng.random_range(0..v) as u32;
    let mut s2 = rng.random_range(0..v) as u32;
    while s2 == s1 {
        s2 = rng.random_range(0..v) as u32;
    }
    InitialConfig::two_sources(VertexId(s1), VertexId(s2)).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Post-hoc checks every run must satisfy: each non-source claim arrived
/// through an edge from an earlier claim of the same type, with the additive
/// passage-time identity.
#[allow(dead_code)] // not every test target exercises it
pub fn assert_outcome_invariants(
    g: &Graph,
    w: &WeightAssignment,
    lambda: f64,
    out: &CompetitionOutcome,
) {
    for v in g.vertices() {
        let Some(claim) = out.claim(v) else { continue };
        let Some(parent_edge) = claim.parent else {
            assert_eq!(claim.time, 0.0, "source with nonzero time");
            continue;
        };
        let (a, b) = g.endpoints(parent_edge);
        let parent = if a == v { b } else { a };
        let pc = out
            .claim(parent)
            .expect("parent of a claimed vertex is claimed");
        assert_eq!(pc.which, claim.which, "type flip along parent chain");
        assert!(pc.time < claim.time, "claim times not increasing");
        let rate = match claim.which {
            InfectionType::One => 1.0,
            InfectionType::Two => lambda,
        };
        assert_eq!(
            claim.time,
            pc.time + w.weight(parent_edge) / rate,
            "additive passage-time identity violated"
        );
    }
}
