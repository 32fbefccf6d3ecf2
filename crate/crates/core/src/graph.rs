//! Finite simplicial graphs with the unit-edge path metric.
//!
//! Every other module works on [`MetricGraph`]. Adjacency is stored in CSR
//! form with sorted neighbor lists, so "smallest next vertex id" tie-breaks
//! fall out of plain iteration order.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Distance value for vertices not reached by a search.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    labels: BTreeMap<Vertex, String>,
}

impl MetricGraph {
    /// Builds a graph and rejects self-loops, parallel edges, out-of-range ids
    /// and disconnected input.
    pub fn new(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let g = Self::build(n, edges)?;
        let components = g.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    /// Same validation as [`MetricGraph::new`] minus the connectivity check.
    /// Used for derived spaces (quasi-trees, induced subgraphs) whose
    /// connectivity is reported rather than required.
    pub(crate) fn build(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("graph has no vertices"));
        }
        if n > Vertex::MAX as usize {
            return Err(Error::input(format!("{n} vertices exceed the id range")));
        }
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(Error::UnknownVertex(u));
            }
            if v as usize >= n {
                return Err(Error::UnknownVertex(v));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {u}")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0; offsets[n]];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for u in 0..n {
            let nb = &mut targets[offsets[u]..offsets[u + 1]];
            nb.sort_unstable();
            if let Some(w) = nb.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::input(format!("parallel edge {u}-{}", w[0])));
            }
        }
        Ok(MetricGraph {
            offsets,
            targets,
            labels: BTreeMap::new(),
        })
    }

    pub fn with_labels(mut self, labels: BTreeMap<Vertex, String>) -> Result<Self> {
        for &v in labels.keys() {
            self.check_vertex(v)?;
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn labels(&self) -> &BTreeMap<Vertex, String> {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        (u as usize) < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        0..self.n() as Vertex
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if (v as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn bfs(&self, src: Vertex) -> Vec<u32> {
        self.bfs_from_set(std::slice::from_ref(&src))
    }

    /// Multi-source BFS: distance from every vertex to the nearest source.
    pub fn bfs_from_set(&self, sources: &[Vertex]) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = VecDeque::with_capacity(self.n());
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in self.neighbors(u) {
                if dist[w as usize] == UNREACHABLE {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// BFS from `src` that stops once every vertex of `targets` has been
    /// reached. Returns the largest distance to a target.
    pub(crate) fn eccentricity_within(&self, src: Vertex, targets: &[Vertex]) -> u32 {
        let mut wanted = vec![false; self.n()];
        let mut remaining = 0usize;
        for &t in targets {
            if !wanted[t as usize] {
                wanted[t as usize] = true;
                remaining += 1;
            }
        }
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        let mut ecc = 0;
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if wanted[u as usize] {
                ecc = du;
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            for &w in self.neighbors(u) {
                if dist[w as usize] == UNREACHABLE {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        if remaining > 0 {
            UNREACHABLE
        } else {
            ecc
        }
    }

    /// Diameter of a vertex set measured in this graph's metric.
    pub fn set_diameter(&self, set: &[Vertex]) -> u32 {
        set.par_iter()
            .map(|&v| self.eccentricity_within(v, set))
            .max()
            .unwrap_or(0)
    }

    pub fn shortest_distance(&self, u: Vertex, v: Vertex) -> Result<u32> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.bfs(u)[v as usize])
    }

    /// Canonical geodesic: from `u`, always step to the smallest-id neighbor
    /// that is one closer to `v`.
    pub fn geodesic(&self, u: Vertex, v: Vertex) -> Result<PathWalk> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let to_v = self.bfs(v);
        self.geodesic_along(u, &to_v)
            .ok_or_else(|| Error::input(format!("no path from {u} to {v}")))
    }

    /// Canonical geodesic from `u` given the BFS distances to the target.
    pub fn geodesic_along(&self, u: Vertex, dist_to_target: &[u32]) -> Option<PathWalk> {
        let mut d = dist_to_target[u as usize];
        if d == UNREACHABLE {
            return None;
        }
        let mut path = Vec::with_capacity(d as usize + 1);
        let mut cur = u;
        path.push(cur);
        while d > 0 {
            cur = *self
                .neighbors(cur)
                .iter()
                .find(|&&w| dist_to_target[w as usize] == d - 1)?;
            d -= 1;
            path.push(cur);
        }
        Some(PathWalk { vertices: path })
    }

    /// All vertices within distance `r` of `u`, sorted.
    pub fn ball(&self, u: Vertex, r: u32) -> Result<Vec<Vertex>> {
        self.check_vertex(u)?;
        Ok(self.ball_unchecked(u, r))
    }

    pub(crate) fn ball_unchecked(&self, u: Vertex, r: u32) -> Vec<Vertex> {
        let mut seen = BTreeMap::new();
        let mut queue = VecDeque::new();
        seen.insert(u, 0u32);
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            let dx = seen[&x];
            if dx == r {
                continue;
            }
            for &w in self.neighbors(x) {
                if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(w) {
                    e.insert(dx + 1);
                    queue.push_back(w);
                }
            }
        }
        seen.into_keys().collect()
    }

    pub fn component_count(&self) -> usize {
        let mut comp = vec![false; self.n()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n() {
            if comp[s] {
                continue;
            }
            count += 1;
            comp[s] = true;
            stack.push(s as Vertex);
            while let Some(u) = stack.pop() {
                for &w in self.neighbors(u) {
                    if !comp[w as usize] {
                        comp[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Subgraph induced on `vertices` (sorted and deduplicated first).
    pub fn induced(&self, vertices: &[Vertex]) -> Result<Subgraph> {
        let mut global = vertices.to_vec();
        global.sort_unstable();
        global.dedup();
        if global.is_empty() {
            return Err(Error::input("empty vertex set"));
        }
        for &v in &global {
            self.check_vertex(v)?;
        }
        let mut edges = Vec::new();
        for (i, &u) in global.iter().enumerate() {
            for &w in self.neighbors(u) {
                if w > u {
                    if let Ok(j) = global.binary_search(&w) {
                        edges.push((i as Vertex, j as Vertex));
                    }
                }
            }
        }
        let graph = MetricGraph::build(global.len(), &edges)?;
        Ok(Subgraph { graph, global })
    }

    /// Cartesian product; vertex `(x, y)` gets id `x * other.n() + y`.
    pub fn cartesian_product(&self, other: &MetricGraph) -> Result<MetricGraph> {
        let m = other.n() as u64;
        if self.n() as u64 * m > Vertex::MAX as u64 {
            return Err(Error::input("product graph too large"));
        }
        let id = |x: Vertex, y: Vertex| (x as u64 * m + y as u64) as Vertex;
        let mut edges = Vec::new();
        for x in self.vertices() {
            for (y1, y2) in other.edges() {
                edges.push((id(x, y1), id(x, y2)));
            }
        }
        for (x1, x2) in self.edges() {
            for y in other.vertices() {
                edges.push((id(x1, y), id(x2, y)));
            }
        }
        MetricGraph::new(self.n() * other.n(), &edges)
    }

    /// Exact all-pairs distances by one BFS per source.
    pub fn all_pairs(&self) -> DistanceMatrix {
        let n = self.n();
        let rows: Vec<Vec<u32>> = (0..n as Vertex).into_par_iter().map(|s| self.bfs(s)).collect();
        DistanceMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diameter(&self) -> u32 {
        self.vertices()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&s| self.bfs(s).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            edges: self.edges().map(|(u, v)| vec![u as u64, v as u64]).collect(),
            labels: if self.labels.is_empty() {
                None
            } else {
                Some(self.labels.clone())
            },
            generator: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        raw.into_graph()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in self.vertices() {
            match self.label(v) {
                Some(l) => out.push_str(&format!("  {v} [label=\"{}\"];\n", l.replace('"', "\\\""))),
                None => out.push_str(&format!("  {v};\n")),
            }
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("  {u} -- {v};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// On-disk graph format: `{"n": int, "edges": [[u,v],...], "labels": {id: string}?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<Vertex, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<crate::generators::GeneratorSpec>,
}

impl GraphJson {
    pub(crate) fn edge_pairs(&self) -> Result<Vec<(Vertex, Vertex)>> {
        self.edges
            .iter()
            .map(|e| match e.as_slice() {
                [u, v] => {
                    let conv = |x: u64| {
                        Vertex::try_from(x).map_err(|_| Error::input(format!("vertex id {x} out of range")))
                    };
                    Ok((conv(*u)?, conv(*v)?))
                }
                [_, _, _] => Err(Error::input("weighted edges are not supported; edges have unit length")),
                other => Err(Error::input(format!("edge must be a pair, got {other:?}"))),
            })
            .collect()
    }

    pub fn into_graph(self) -> Result<MetricGraph> {
        let edges = self.edge_pairs()?;
        let g = MetricGraph::new(self.n, &edges)?;
        g.with_labels(self.labels.unwrap_or_default())
    }
}

/// Row-major all-pairs distance table.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, u: Vertex, v: Vertex) -> u32 {
        self.data[u as usize * self.n + v as usize]
    }

    pub fn row(&self, u: Vertex) -> &[u32] {
        &self.data[u as usize * self.n..(u as usize + 1) * self.n]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Induced subgraph with local ids `0..k` mapped to sorted global ids.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: MetricGraph,
    pub global: Vec<Vertex>,
}

impl Subgraph {
    pub fn local(&self, v: Vertex) -> Option<Vertex> {
        self.global.binary_search(&v).ok().map(|i| i as Vertex)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.global.binary_search(&v).is_ok()
    }

    pub fn to_global(&self, local: Vertex) -> Vertex {
        self.global[local as usize]
    }
}

/// A simplicial path: consecutive vertices are adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathWalk {
    vertices: Vec<Vertex>,
}

impl PathWalk {
    pub fn new(g: &MetricGraph, vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::input("empty path"));
        }
        for &v in &vertices {
            g.check_vertex(v)?;
        }
        if let Some(w) = vertices.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
            return Err(Error::input(format!("{} and {} are not adjacent", w[0], w[1])));
        }
        Ok(PathWalk { vertices })
    }

    pub(crate) fn from_trusted(vertices: Vec<Vertex>) -> Self {
        debug_assert!(!vertices.is_empty());
        PathWalk { vertices }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn first(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn path_and_cycle_distances() {
        let p5 = generators::path(5).unwrap();
        assert_eq!(p5.shortest_distance(0, 4).unwrap(), 4);
        let c8 = generators::cycle(8).unwrap();
        assert_eq!(c8.shortest_distance(0, 4).unwrap(), 4);
        assert_eq!(c8.shortest_distance(4, 0).unwrap(), 4);
    }

    #[test]
    fn unknown_vertex_is_an_input_error() {
        let p5 = generators::path(5).unwrap();
        assert!(matches!(p5.shortest_distance(0, 9), Err(Error::UnknownVertex(9))));
        assert!(p5.geodesic(7, 0).is_err());
        assert!(p5.ball(5, 1).is_err());
    }

    #[test]
    fn geodesic_trivial_and_tree() {
        let t = generators::tree(3, 3).unwrap();
        let g = t.geodesic(5, 5).unwrap();
        assert_eq!(g.vertices(), &[5]);
        assert_eq!(g.len(), 0);
        // 4 and 5 are children of vertex 1 in the BFS layout.
        let g = t.geodesic(4, 7).unwrap();
        assert_eq!(g.len() as u32, t.shortest_distance(4, 7).unwrap());
        assert!(PathWalk::new(&t, g.into_vertices()).is_ok());
    }

    #[test]
    fn cycle_antipodal_geodesic_is_id_minimal_arc() {
        let c8 = generators::cycle(8).unwrap();
        // Both arcs 0-1-2-3-4 and 0-7-6-5-4 have length 4; the first step 1 < 7.
        let g = c8.geodesic(0, 4).unwrap();
        assert_eq!(g.vertices(), &[0, 1, 2, 3, 4]);
        let again = c8.geodesic(0, 4).unwrap();
        assert_eq!(g, again);
        // From 4 to 0 the candidates are 3 and 5.
        assert_eq!(c8.geodesic(4, 0).unwrap().vertices(), &[4, 3, 2, 1, 0]);
    }

    #[test]
    fn balls() {
        let t = generators::tree(2, 3).unwrap();
        assert_eq!(t.ball(0, 0).unwrap(), vec![0]);
        assert_eq!(t.ball(0, 2).unwrap().len(), 10);
        let grid = generators::grid(9, 9).unwrap();
        let center = 4 * 9 + 4;
        assert_eq!(grid.ball(center, 3).unwrap().len(), 25);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(matches!(MetricGraph::new(3, &[(0, 1)]), Err(Error::Disconnected { components: 2 })));
        assert!(MetricGraph::new(2, &[(0, 0)]).is_err());
        assert!(MetricGraph::new(2, &[(0, 1), (1, 0)]).is_err());
        assert!(MetricGraph::new(2, &[(0, 2)]).is_err());
        assert!(MetricGraph::from_json(r#"{"n":2,"edges":[[0,1,3]]}"#).is_err());
    }

    #[test]
    fn json_round_trip_with_labels() {
        let g = generators::farey_ball(2).unwrap();
        let back = MetricGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert!(g.to_dot().contains("label=\"1/0\""));
    }

    #[test]
    fn induced_and_product() {
        let grid = generators::grid(3, 3).unwrap();
        let row = grid.induced(&[0, 1, 2]).unwrap();
        assert_eq!(row.graph.edge_count(), 2);
        assert_eq!(row.local(2), Some(2));
        let p = generators::path(3).unwrap();
        let prod = p.cartesian_product(&p).unwrap();
        assert_eq!(prod.n(), 9);
        assert_eq!(prod.edge_count(), grid.edge_count());
    }
}
