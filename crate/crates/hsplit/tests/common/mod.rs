#![allow(dead_code)]

use hsplit::oracle::SamplingRegion;
use hsplit::spaces::{MetricTree, Point, Space, TreePosition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Arc length of t -> geodesic(x, y, t) under the hyperbolic metric,
/// integrated as a fine polyline with Simpson weights on the conformal
/// factor. Independent of the closed-form distance.
pub fn poincare_arc_length(space: &Space, x: &Point, y: &Point, steps: usize) -> f64 {
    let factor = |v: &[f64]| 2.0 / (1.0 - v.iter().map(|c| c * c).sum::<f64>());
    let mut total = 0.0;
    let mut prev = x.clone();
    for k in 1..=steps {
        let lam = k as f64 / steps as f64;
        let next = space.geodesic_point(x, y, lam).unwrap();
        let a = prev.as_vector().unwrap();
        let b = next.as_vector().unwrap();
        let chord: f64 = a
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let mid: Vec<f64> = a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
        total += chord * (factor(a) + 4.0 * factor(&mid) + factor(b)) / 6.0;
        prev = next;
    }
    total
}

/// Shortest-path distance between two tree positions computed on an
/// explicit graph: every edge is subdivided, the two query positions are
/// inserted as nodes of their own, and plain O(n^2) Dijkstra runs on the
/// result. Shares no code with the tree's own distance.
pub fn tree_distance_dijkstra(
    tree: &MetricTree,
    p: &TreePosition,
    q: &TreePosition,
    subdiv: usize,
) -> f64 {
    // Station = (node id, offset) on one edge; consecutive stations connect.
    let n_vertices = tree.vertex_count();
    let mut n_nodes = n_vertices;
    let mut new_node = || {
        let id = n_nodes;
        n_nodes += 1;
        id
    };
    let mut queries = [usize::MAX; 2];
    let mut arcs: Vec<(usize, usize, f64)> = Vec::new();
    for idx in 0..tree.edge_count() {
        let e = tree.edge(idx);
        let mut stations: Vec<(usize, f64)> = vec![(e.u, 0.0)];
        for k in 1..=subdiv {
            stations.push((new_node(), e.len * k as f64 / (subdiv + 1) as f64));
        }
        stations.push((e.v, e.len));
        for (slot, pos) in [(0, p), (1, q)] {
            if let TreePosition::OnEdge { edge, offset } = *pos {
                if edge == idx {
                    let id = new_node();
                    queries[slot] = id;
                    stations.push((id, offset));
                }
            }
        }
        stations.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for w in stations.windows(2) {
            arcs.push((w[0].0, w[1].0, w[1].1 - w[0].1));
        }
    }
    for (slot, pos) in [(0, p), (1, q)] {
        if let TreePosition::Vertex(v) = *pos {
            queries[slot] = v;
        }
    }

    let mut adj = vec![Vec::new(); n_nodes];
    for (a, b, w) in arcs {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let mut dist = vec![f64::INFINITY; n_nodes];
    let mut done = vec![false; n_nodes];
    dist[queries[0]] = 0.0;
    loop {
        let mut cur = usize::MAX;
        let mut best = f64::INFINITY;
        for (i, &d) in dist.iter().enumerate() {
            if !done[i] && d < best {
                best = d;
                cur = i;
            }
        }
        if cur == usize::MAX {
            break;
        }
        done[cur] = true;
        for &(next, w) in &adj[cur] {
            if dist[cur] + w < dist[next] {
                dist[next] = dist[cur] + w;
            }
        }
    }
    dist[queries[1]]
}

/// Uniformly random valid point of a space, from its default region.
pub fn random_point(space: &Space, rng: &mut ChaCha8Rng) -> Point {
    SamplingRegion::default_for(space)
        .sample(space, rng)
        .unwrap()
}

/// Random tree with 2..=2+max_extra vertices, random topology, and edge
/// lengths in [0.2, 2.0).
pub fn random_tree(rng: &mut ChaCha8Rng, max_extra: usize) -> MetricTree {
    let n = 2 + rng.gen_range(0..=max_extra);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edges.push((names[parent].clone(), names[i].clone(), 0.2 + 1.8 * rng.gen::<f64>()));
    }
    MetricTree::new(&names, &edges).unwrap()
}

/// The three-leg star used in several fixed scenarios.
pub fn y_tree() -> MetricTree {
    MetricTree::new(
        &["O", "A", "B", "C"],
        &[("O", "A", 1.0), ("O", "B", 1.0), ("O", "C", 1.0)],
    )
    .unwrap()
}
