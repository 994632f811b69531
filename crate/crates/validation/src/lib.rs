//! Instance corpora shared by the integration and acceptance suites, and a
//! per-process cache of solved relaxations.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use qmaxcut::graph::{fixtures, WeightedGraph};
use qmaxcut::lasserre::{build_sdp, solve_sdp, SdpSolution};
use qmaxcut::Kind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub name: String,
    pub graph: WeightedGraph,
}

/// Erdos-Renyi graph with uniform weights in `[0.1, 1]`, normalised.
/// Redraws until at least one edge exists.
pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> WeightedGraph {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    edges.push((i, j, rng.gen_range(0.1..1.0)));
                }
            }
        }
        if !edges.is_empty() {
            return WeightedGraph::new(n, edges).unwrap().normalized().unwrap();
        }
    }
}

/// Random bipartite graph between `a` and `b` vertices (first `a` on one
/// side), weights in `[0.1, 1]`.
pub fn random_bipartite(a: usize, b: usize, p: f64, rng: &mut ChaCha8Rng) -> WeightedGraph {
    loop {
        let mut edges = Vec::new();
        for i in 0..a {
            for j in a..a + b {
                if rng.gen_bool(p) {
                    edges.push((i, j, rng.gen_range(0.1..1.0)));
                }
            }
        }
        if !edges.is_empty() {
            return WeightedGraph::new(a + b, edges).unwrap().normalized().unwrap();
        }
    }
}

/// Stars `K_{1,1..6}`, paths and cycles on 3..8 vertices, complete graphs
/// on 3..8 vertices and eight random weighted graphs on 4..8 vertices.
pub fn corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut add = |name: String, graph: WeightedGraph| out.push(Instance { name, graph });
    for m in 1..=6 {
        add(format!("star{m}"), fixtures::star(m));
    }
    for n in 3..=8 {
        add(format!("path{n}"), fixtures::path(n));
        add(format!("cycle{n}"), fixtures::cycle(n));
        add(format!("complete{n}"), fixtures::complete(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for k in 0..8 {
        let n = 4 + k % 5;
        add(format!("random{k}_n{n}"), random_graph(n, 0.5, &mut rng));
    }
    out
}

/// Ten bipartite instances: even cycles, paths, a star and random ones.
pub fn bipartite_corpus() -> Vec<Instance> {
    let mut out = vec![
        Instance { name: "path4".into(), graph: fixtures::path(4) },
        Instance { name: "path5".into(), graph: fixtures::path(5) },
        Instance { name: "cycle4".into(), graph: fixtures::cycle(4) },
        Instance { name: "cycle6".into(), graph: fixtures::cycle(6) },
        Instance { name: "star4".into(), graph: fixtures::star(4) },
        Instance { name: "matching3".into(), graph: fixtures::matching(3) },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (k, (a, b)) in [(2, 3), (3, 3), (3, 4), (4, 4)].into_iter().enumerate() {
        out.push(Instance { name: format!("bipartite{k}_{a}x{b}"), graph: random_bipartite(a, b, 0.6, &mut rng) });
    }
    out
}

type Cache = Mutex<HashMap<(String, Kind), SdpSolution>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Solves (once per test binary) the relaxation of a named instance.
pub fn solved(inst: &Instance, kind: Kind) -> SdpSolution {
    let key = (inst.name.clone(), kind);
    if let Some(s) = cache().lock().unwrap().get(&key) {
        return s.clone();
    }
    let s = solve_sdp(&build_sdp(&inst.graph, kind).unwrap(), 1e-7).unwrap();
    cache().lock().unwrap().insert(key, s.clone());
    s
}
