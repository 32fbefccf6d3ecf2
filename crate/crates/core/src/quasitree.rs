//! The quasi-tree of metric spaces built from a peripheral family: a
//! disjoint union of the peripherals joined by unit cross-edges between
//! mutually nearest points.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::electrify::{electrify, ElectrifiedGraph, PeripheralMetrics, SubgraphFamily};
use crate::error::{Error, Result};
use crate::graph::{GraphJson, MetricGraph, PathWalk, Vertex, UNREACHABLE};
use crate::projections::ProjectionTable;

/// A vertex of `H_c`, tagged with `c` so overlapping peripherals stay
/// disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tagged {
    pub peripheral: usize,
    pub vertex: Vertex,
}

impl std::fmt::Display for Tagged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.peripheral, self.vertex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRule {
    /// Join `x_{c,d}` and `x_{d,c}` unless some third peripheral `a` has
    /// `d_a(c, d) >= 2θ`.
    Projection,
    /// Join them if some geodesic of the electrification between them has no
    /// wide cone visit.
    Widepoint,
}

impl std::str::FromStr for EdgeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(EdgeRule::Projection),
            "widepoint" => Ok(EdgeRule::Widepoint),
            other => Err(Error::input(format!("unknown edge rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossEdge {
    pub c: usize,
    pub d: usize,
    pub x_cd: Vertex,
    pub x_dc: Vertex,
    pub rule: EdgeRule,
}

#[derive(Debug, Clone)]
pub struct QuasiTreeSpace {
    /// Vertex `offsets[c] + i` is the `i`-th smallest member of `H_c`.
    pub graph: MetricGraph,
    offsets: Vec<usize>,
    family: SubgraphFamily,
    pub cross_edges: Vec<CrossEdge>,
    pub theta: u32,
    pub rule: EdgeRule,
}

impl QuasiTreeSpace {
    pub fn family(&self) -> &SubgraphFamily {
        &self.family
    }

    pub fn id_of(&self, t: Tagged) -> Result<Vertex> {
        if t.peripheral >= self.family.len() {
            return Err(Error::input(format!("unknown tagged vertex {t}")));
        }
        let i = self
            .family
            .member(t.peripheral)
            .binary_search(&t.vertex)
            .map_err(|_| Error::input(format!("unknown tagged vertex {t}")))?;
        Ok((self.offsets[t.peripheral] + i) as Vertex)
    }

    pub fn tag_of(&self, id: Vertex) -> Tagged {
        let c = self.offsets.partition_point(|&o| o <= id as usize) - 1;
        Tagged { peripheral: c, vertex: self.family.member(c)[id as usize - self.offsets[c]] }
    }

    pub fn is_connected(&self) -> bool {
        self.graph.is_connected()
    }

    /// BFS distances in `Y` from a tagged vertex, indexed by `Y` ids.
    pub fn distances_from(&self, p: Tagged) -> Result<Vec<u32>> {
        Ok(self.graph.bfs(self.id_of(p)?))
    }

    pub fn to_json(&self) -> String {
        let g = self.graph.to_json_value();
        let labels = (0..self.graph.n() as Vertex).map(|i| (i, self.tag_of(i).to_string())).collect();
        let file = QuasiTreeJson {
            n: g.n,
            edges: g.edges,
            labels: Some(labels),
            provenance: Provenance {
                theta: self.theta,
                rule: self.rule,
                peripherals: (0..self.family.len()).map(|c| self.family.member(c).to_vec()).collect(),
                cross_edges: self.cross_edges.clone(),
            },
        };
        serde_json::to_string_pretty(&file).expect("quasi-tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: QuasiTreeJson = serde_json::from_str(text)?;
        let family = SubgraphFamily::new(raw.provenance.peripherals);
        let offsets = offsets_of(&family);
        if *offsets.last().unwrap() != raw.n {
            return Err(Error::format("tagged vertex count does not match n"));
        }
        let edges = GraphJson { n: raw.n, edges: raw.edges, labels: None, generator: None }.edge_pairs()?;
        let mut graph = MetricGraph::build(raw.n, &edges)?;
        if let Some(l) = raw.labels {
            graph = graph.with_labels(l)?;
        }
        let y = QuasiTreeSpace {
            graph,
            offsets,
            family,
            cross_edges: raw.provenance.cross_edges,
            theta: raw.provenance.theta,
            rule: raw.provenance.rule,
        };
        for e in &y.cross_edges {
            let (p, q) = (
                y.id_of(Tagged { peripheral: e.c, vertex: e.x_cd })?,
                y.id_of(Tagged { peripheral: e.d, vertex: e.x_dc })?,
            );
            if !y.graph.has_edge(p, q) {
                return Err(Error::format(format!("cross-edge {}-{} missing from the edge list", e.c, e.d)));
            }
        }
        Ok(y)
    }
}

/// Standard graph JSON plus the provenance side-table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiTreeJson {
    pub n: usize,
    pub edges: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<Vertex, String>>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub theta: u32,
    pub rule: EdgeRule,
    pub peripherals: Vec<Vec<Vertex>>,
    pub cross_edges: Vec<CrossEdge>,
}

fn offsets_of(fam: &SubgraphFamily) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(fam.len() + 1);
    offsets.push(0);
    for m in fam.iter() {
        offsets.push(offsets.last().unwrap() + m.len());
    }
    offsets
}

/// Builds `Y` with the chosen cross-edge rule. `x_{c,d}` is the smallest-id
/// vertex of `H_c` at minimal distance from `H_d`.
pub fn build_quasitree(g: &MetricGraph, fam: &SubgraphFamily, theta: u32, rule: EdgeRule) -> Result<QuasiTreeSpace> {
    if fam.is_empty() {
        return Err(Error::input("quasi-tree needs at least one peripheral"));
    }
    if theta == 0 {
        return Err(Error::input("theta must be > 0"));
    }
    fam.validate(g)?;
    let m = fam.len();
    let table = ProjectionTable::build(g, fam);
    let nearest = |c: usize, d: usize| -> Vertex {
        let to_d = table.dist_to_member(d);
        *fam.member(c).iter().min_by_key(|&&h| (to_d[h as usize], h)).unwrap()
    };
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|c| (c + 1..m).map(move |d| (c, d))).collect();

    let eg_parts = match rule {
        EdgeRule::Projection => None,
        EdgeRule::Widepoint => {
            let eg = electrify(g, fam)?;
            let metrics = PeripheralMetrics::new(g, fam)?;
            Some((eg, metrics))
        }
    };
    let cross_edges: Vec<CrossEdge> = pairs
        .par_iter()
        .filter_map(|&(c, d)| {
            let (x_cd, x_dc) = (nearest(c, d), nearest(d, c));
            let keep = match &eg_parts {
                None => !(0..m).any(|a| a != c && a != d && table.triple(a, c, d) >= 2 * theta),
                Some((eg, metrics)) => has_geodesic_without_wide_points(eg, metrics, x_cd, x_dc, theta),
            };
            keep.then_some(CrossEdge { c, d, x_cd, x_dc, rule })
        })
        .collect();

    let offsets = offsets_of(fam);
    let mut edges = Vec::new();
    for (c, members) in fam.iter().enumerate() {
        let sub = g.induced(members)?;
        edges.extend(
            sub.graph
                .edges()
                .map(|(u, v)| ((offsets[c] + u as usize) as Vertex, (offsets[c] + v as usize) as Vertex)),
        );
    }
    let mut y = QuasiTreeSpace {
        graph: MetricGraph::build(1, &[])?,
        offsets,
        family: fam.clone(),
        cross_edges,
        theta,
        rule,
    };
    for e in &y.cross_edges {
        edges.push((
            y.id_of(Tagged { peripheral: e.c, vertex: e.x_cd })?,
            y.id_of(Tagged { peripheral: e.d, vertex: e.x_dc })?,
        ));
    }
    y.graph = MetricGraph::build(*y.offsets.last().unwrap(), &edges)?;
    Ok(y)
}

/// Search over the geodesic DAG of the electrification from `s` toward `t`,
/// refusing to pass through a cone whose entry and exit are at intrinsic
/// distance `>= theta`.
fn has_geodesic_without_wide_points(
    eg: &ElectrifiedGraph,
    metrics: &PeripheralMetrics,
    s: Vertex,
    t: Vertex,
    theta: u32,
) -> bool {
    if s == t {
        return true;
    }
    let dist = eg.graph.bfs(t);
    let mut seen = vec![false; eg.graph.n()];
    let mut stack = vec![s];
    seen[s as usize] = true;
    while let Some(u) = stack.pop() {
        if u == t {
            return true;
        }
        let du = dist[u as usize];
        for &w in eg.graph.neighbors(u) {
            if dist[w as usize] + 1 != du {
                continue;
            }
            match eg.cone_index(w) {
                None => {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
                Some(c) => {
                    for &q in eg.graph.neighbors(w) {
                        if dist[q as usize] + 2 == du
                            && !seen[q as usize]
                            && metrics.dist(c, u, q).is_some_and(|d| d < theta)
                        {
                            seen[q as usize] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
    }
    false
}

/// Graph distance in `Y` between two tagged vertices.
pub fn y_distance(y: &QuasiTreeSpace, p: Tagged, q: Tagged) -> Result<u32> {
    let d = y.distances_from(p)?[y.id_of(q)? as usize];
    if d == UNREACHABLE {
        return Err(Error::input(format!("{p} and {q} lie in different components of Y")));
    }
    Ok(d)
}

/// Cone visits along an efficient path whose entry and exit are at
/// intrinsic distance at least `theta`, as `(position, peripheral)`.
pub fn wide_points(eg: &ElectrifiedGraph, path: &PathWalk, theta: u32) -> Result<Vec<(usize, usize)>> {
    let fam = eg.family();
    let metrics = PeripheralMetrics::new(&eg.graph, &fam)?;
    wide_points_with(eg, &metrics, path, theta)
}

pub(crate) fn wide_points_with(
    eg: &ElectrifiedGraph,
    metrics: &PeripheralMetrics,
    path: &PathWalk,
    theta: u32,
) -> Result<Vec<(usize, usize)>> {
    if !crate::electrify::is_efficient(path, eg) {
        return Err(Error::input("path is not efficient"));
    }
    let vs = path.vertices();
    let mut out = Vec::new();
    for k in 1..vs.len().saturating_sub(1) {
        if let Some(c) = eg.cone_index(vs[k]) {
            let d = metrics.dist(c, vs[k - 1], vs[k + 1]).expect("efficient path flanks cones by members");
            if d >= theta {
                out.push((k, c));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDiff {
    pub kind: String,
    pub theta: u32,
    pub common: usize,
    pub only_projection: Vec<(usize, usize)>,
    pub only_widepoint: Vec<(usize, usize)>,
    pub same_vertex_set: bool,
}

/// Compares the cross-edge sets produced by the two rules.
pub fn rule_diff(projection: &QuasiTreeSpace, widepoint: &QuasiTreeSpace) -> RuleDiff {
    let key = |y: &QuasiTreeSpace| y.cross_edges.iter().map(|e| (e.c, e.d)).collect::<std::collections::BTreeSet<_>>();
    let (a, b) = (key(projection), key(widepoint));
    RuleDiff {
        kind: "rule_diff".into(),
        theta: projection.theta,
        common: a.intersection(&b).count(),
        only_projection: a.difference(&b).copied().collect(),
        only_widepoint: b.difference(&a).copied().collect(),
        same_vertex_set: projection.family == widepoint.family && projection.graph.n() == widepoint.graph.n(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn single_peripheral_is_itself() {
        let g = generators::cycle(6).unwrap();
        let fam = SubgraphFamily::new(vec![(0..6).collect()]);
        let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
        assert!(y.cross_edges.is_empty());
        assert_eq!(y.graph.n(), 6);
        assert_eq!(y.graph.edge_count(), 6);
        let p = Tagged { peripheral: 0, vertex: 0 };
        let q = Tagged { peripheral: 0, vertex: 3 };
        assert_eq!(y_distance(&y, p, q).unwrap(), 3);
        assert!(y_distance(&y, p, Tagged { peripheral: 1, vertex: 0 }).is_err());
        assert!(build_quasitree(&g, &SubgraphFamily::empty(), 3, EdgeRule::Projection).is_err());
    }

    #[test]
    fn two_far_rings_get_one_cross_edge() {
        // ring 0..6 and ring 10..16 joined by the path 3-6-7-8-9-10
        let mut edges: Vec<(Vertex, Vertex)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend((0..6).map(|i| (10 + i, 10 + (i + 1) % 6)));
        edges.extend([(3, 6), (6, 7), (7, 8), (8, 9), (9, 10)]);
        let g = MetricGraph::new(16, &edges).unwrap();
        let fam = SubgraphFamily::new(vec![(0..6).collect(), (10..16).collect()]);
        for rule in [EdgeRule::Projection, EdgeRule::Widepoint] {
            let y = build_quasitree(&g, &fam, 100, rule).unwrap();
            assert_eq!(y.cross_edges.len(), 1);
            let e = &y.cross_edges[0];
            assert_eq!((e.x_cd, e.x_dc), (3, 10));
            let a = Tagged { peripheral: 0, vertex: 3 };
            let b = Tagged { peripheral: 1, vertex: 10 };
            assert_eq!(y_distance(&y, a, b).unwrap(), 1);
        }
    }

    #[test]
    fn cross_edge_endpoints_lie_in_projections() {
        let (g, fam) = generators::tree_of_rings(2, 3, 12).unwrap();
        let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
        let table = ProjectionTable::build(&g, &fam);
        for e in &y.cross_edges {
            assert!(table.projection(e.c, e.d).contains(&e.x_cd));
            assert!(table.projection(e.d, e.c).contains(&e.x_dc));
            for a in 0..fam.len() {
                if a != e.c && a != e.d {
                    assert!(table.triple(a, e.c, e.d) < 2 * y.theta);
                }
            }
        }
        assert!(y.is_connected());
    }

    #[test]
    fn json_round_trip() {
        let (g, fam) = generators::tree_of_rings(1, 2, 6).unwrap();
        let y = build_quasitree(&g, &fam, 2, EdgeRule::Projection).unwrap();
        let back = QuasiTreeSpace::from_json(&y.to_json()).unwrap();
        assert_eq!(back.graph.edges().collect::<Vec<_>>(), y.graph.edges().collect::<Vec<_>>());
        assert_eq!(back.cross_edges, y.cross_edges);
        assert_eq!(back.to_json(), y.to_json());
    }

    #[test]
    fn wide_points_on_a_ring_crossing() {
        // C_12 (0..12) with tails 0-12 and 6-13; cross through the cone.
        let mut edges: Vec<(Vertex, Vertex)> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
        edges.extend([(0, 12), (6, 13)]);
        let g = MetricGraph::new(14, &edges).unwrap();
        let fam = SubgraphFamily::new(vec![(0..12).collect()]);
        let eg = electrify(&g, &fam).unwrap();
        let cone = eg.cone_of[0];
        let path = PathWalk::new(&eg.graph, vec![12, 0, cone, 6, 13]).unwrap();
        assert_eq!(wide_points(&eg, &path, 5).unwrap(), vec![(2, 0)]);
        assert!(wide_points(&eg, &path, 7).unwrap().is_empty());
        let plain = PathWalk::new(&eg.graph, vec![12, 0, 1]).unwrap();
        assert!(wide_points(&eg, &plain, 1).unwrap().is_empty());
        let bad = PathWalk::new(&eg.graph, vec![0, cone, 1, cone, 2]).unwrap();
        assert!(wide_points(&eg, &bad, 1).is_err());
    }
}
