//! Finite weighted metric trees.
//!
//! A tree is a connected acyclic graph with positive edge lengths. Points
//! live on vertices or strictly inside edges; the unique simple path between
//! two points realizes their distance, and geodesics walk that path at
//! constant speed.
//!
//! Positions are canonical: an offset of zero or a full edge length is
//! stored as the corresponding vertex, so every point has exactly one
//! representation and float comparisons stay honest.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

/// A location on a tree: a vertex id, or an interior point of an edge at a
/// given arc-length offset from the edge's `u` endpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum TreePosition {
    Vertex(usize),
    OnEdge { edge: usize, offset: f64 },
}

#[derive(Clone, Debug)]
pub struct MetricTree {
    names: Vec<String>,
    edges: Vec<TreeEdge>,
    adj: Vec<Vec<(usize, usize)>>, // (neighbor vertex, edge index)
    dist: Vec<Vec<f64>>,
    // toward[root][w] = the neighbor of w on the unique path from w to root.
    toward: Vec<Vec<usize>>,
    total_len: f64,
}

impl MetricTree {
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, f64)]) -> Result<Self> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::InvalidInput("tree needs at least one vertex".into()));
        }
        let names: Vec<String> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidInput(format!("duplicate vertex name {a:?}")));
            }
        }
        let id = |name: &str| -> Result<usize> {
            names
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| Error::InvalidInput(format!("edge references unknown vertex {name:?}")))
        };
        let mut es = Vec::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        for (a, b, len) in edges {
            let (u, v) = (id(a.as_ref())?, id(b.as_ref())?);
            if u == v {
                return Err(Error::InvalidInput(format!("self loop at {:?}", names[u])));
            }
            if !len.is_finite() || *len <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "edge {:?}-{:?} has non-positive length {len}",
                    names[u], names[v]
                )));
            }
            if adj[u].iter().any(|&(w, _)| w == v) {
                return Err(Error::InvalidInput(format!(
                    "duplicate edge {:?}-{:?}",
                    names[u], names[v]
                )));
            }
            let e = es.len();
            es.push(TreeEdge { u, v, len: *len });
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        if es.len() + 1 != n {
            return Err(Error::InvalidInput(format!(
                "a tree on {n} vertices needs {} edges, got {}",
                n - 1,
                es.len()
            )));
        }

        // Connectivity plus the edge count above makes the graph a tree.
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        let mut toward = vec![vec![usize::MAX; n]; n];
        for root in 0..n {
            dist[root][root] = 0.0;
            toward[root][root] = root;
            let mut stack = vec![root];
            while let Some(cur) = stack.pop() {
                for &(nbr, e) in &adj[cur] {
                    if toward[root][nbr] == usize::MAX {
                        toward[root][nbr] = cur;
                        dist[root][nbr] = dist[root][cur] + es[e].len;
                        stack.push(nbr);
                    }
                }
            }
            if dist[root].iter().any(|d| !d.is_finite()) {
                return Err(Error::InvalidInput("tree is not connected".into()));
            }
        }
        let total_len = es.iter().map(|e| e.len).sum();
        Ok(Self { names, edges: es, adj, dist, toward, total_len })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, idx: usize) -> &TreeEdge {
        &self.edges[idx]
    }

    pub fn vertex_name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|x| x == name)
    }

    pub fn total_length(&self) -> f64 {
        self.total_len
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    /// Validates a position and folds edge endpoints onto vertices.
    pub fn canonical(&self, pos: &TreePosition) -> Result<TreePosition> {
        match *pos {
            TreePosition::Vertex(v) => {
                if v >= self.names.len() {
                    return Err(Error::NotInSpace(format!("vertex id {v} out of range")));
                }
                Ok(TreePosition::Vertex(v))
            }
            TreePosition::OnEdge { edge, offset } => {
                if edge >= self.edges.len() {
                    return Err(Error::NotInSpace(format!("edge id {edge} out of range")));
                }
                let e = &self.edges[edge];
                let snap = 1e-12 * (1.0 + e.len);
                if !offset.is_finite() || offset < -snap || offset > e.len + snap {
                    return Err(Error::NotInSpace(format!(
                        "offset {offset} outside edge of length {}",
                        e.len
                    )));
                }
                if offset <= snap {
                    Ok(TreePosition::Vertex(e.u))
                } else if offset >= e.len - snap {
                    Ok(TreePosition::Vertex(e.v))
                } else {
                    Ok(TreePosition::OnEdge { edge, offset })
                }
            }
        }
    }

    // Anchor vertices of a canonical position with their arc distances.
    fn anchors(&self, pos: &TreePosition) -> ([(usize, f64); 2], usize) {
        match *pos {
            TreePosition::Vertex(v) => ([(v, 0.0), (v, 0.0)], 1),
            TreePosition::OnEdge { edge, offset } => {
                let e = &self.edges[edge];
                ([(e.u, offset), (e.v, e.len - offset)], 2)
            }
        }
    }

    pub fn distance(&self, p: &TreePosition, q: &TreePosition) -> f64 {
        if let (
            &TreePosition::OnEdge { edge: e1, offset: t },
            &TreePosition::OnEdge { edge: e2, offset: s },
        ) = (p, q)
        {
            if e1 == e2 {
                return (t - s).abs();
            }
        }
        let (pa, np) = self.anchors(p);
        let (qa, nq) = self.anchors(q);
        let mut best = f64::INFINITY;
        for &(a, da) in &pa[..np] {
            for &(b, db) in &qa[..nq] {
                let d = da + self.dist[a][b] + db;
                if d < best {
                    best = d;
                }
            }
        }
        best
    }

    /// The point at fraction `lambda` along the unique path from `p` to `q`.
    pub fn geodesic(&self, p: &TreePosition, q: &TreePosition, lambda: f64) -> Result<TreePosition> {
        if lambda == 0.0 {
            return Ok(p.clone());
        }
        if lambda == 1.0 {
            return Ok(q.clone());
        }
        let total = self.distance(p, q);
        if total == 0.0 {
            return Ok(p.clone());
        }

        if let (
            &TreePosition::OnEdge { edge: e1, offset: t },
            &TreePosition::OnEdge { edge: e2, offset: s },
        ) = (p, q)
        {
            if e1 == e2 {
                return self.canonical(&TreePosition::OnEdge { edge: e1, offset: t + lambda * (s - t) });
            }
        }

        let (pa, np) = self.anchors(p);
        let (qa, nq) = self.anchors(q);
        let (mut exit, mut entry, mut best) = ((0usize, 0.0f64), (0usize, 0.0f64), f64::INFINITY);
        for &(a, da) in &pa[..np] {
            for &(b, db) in &qa[..nq] {
                let d = da + self.dist[a][b] + db;
                if d < best {
                    best = d;
                    exit = (a, da);
                    entry = (b, db);
                }
            }
        }

        let mut s = lambda * total;
        let (a, da) = exit;
        let (b, db) = entry;

        if s <= da {
            // Still on p's edge, moving toward anchor a.
            if let &TreePosition::OnEdge { edge, offset } = p {
                let e = &self.edges[edge];
                let off = if a == e.u { offset - s } else { offset + s };
                return self.canonical(&TreePosition::OnEdge { edge, offset: off });
            }
            unreachable!("vertex anchors have zero arc distance");
        }
        s -= da;

        let mut cur = a;
        while cur != b {
            let nxt = self.toward[b][cur];
            let (_, eidx) = *self.adj[cur]
                .iter()
                .find(|&&(w, _)| w == nxt)
                .expect("toward pointer follows an edge");
            let e = &self.edges[eidx];
            if s <= e.len {
                let off = if cur == e.u { s } else { e.len - s };
                return self.canonical(&TreePosition::OnEdge { edge: eidx, offset: off });
            }
            s -= e.len;
            cur = nxt;
        }

        // Inside q's edge, moving from the entry anchor toward q.
        match *q {
            TreePosition::Vertex(v) => Ok(TreePosition::Vertex(v)),
            TreePosition::OnEdge { edge, .. } => {
                let e = &self.edges[edge];
                let s = s.min(db);
                let off = if b == e.u { s } else { e.len - s };
                self.canonical(&TreePosition::OnEdge { edge, offset: off })
            }
        }
    }

    pub fn describe(&self, pos: &TreePosition) -> String {
        match *pos {
            TreePosition::Vertex(v) => format!("vertex {:?}", self.names[v]),
            TreePosition::OnEdge { edge, offset } => {
                let e = &self.edges[edge];
                format!(
                    "edge {:?}-{:?} at offset {offset}",
                    self.names[e.u], self.names[e.v]
                )
            }
        }
    }
}
