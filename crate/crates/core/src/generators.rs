//! Deterministic graph families used as the experiment corpus.
//!
//! Vertex ids are assigned in a fixed order for every generator, so equal
//! parameters always give byte-identical JSON.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::electrify::SubgraphFamily;
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex};

/// Generator kind plus parameters, stored alongside every generated graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: String,
    pub params: BTreeMap<String, u64>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: &str, params: &[(&str, u64)]) -> Self {
        GeneratorSpec {
            kind: kind.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            seed: 0,
        }
    }

    fn param(&self, key: &str) -> Result<u64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::input(format!("generator `{}` needs parameter `{key}`", self.kind)))
    }

    fn usize_param(&self, key: &str) -> Result<usize> {
        usize::try_from(self.param(key)?).map_err(|_| Error::domain(format!("{key} too large")))
    }

    /// Builds the instance(s) described by this spec. Every generator except
    /// `tower` yields exactly one instance.
    pub fn generate(&self) -> Result<Vec<Instance>> {
        let plain = |graph| vec![Instance { graph, family: SubgraphFamily::empty() }];
        Ok(match self.kind.as_str() {
            "path" => plain(path(self.usize_param("n")?)?),
            "cycle" => plain(cycle(self.usize_param("n")?)?),
            "grid" => plain(grid(self.usize_param("width")?, self.usize_param("height")?)?),
            "tree" => plain(tree(self.usize_param("depth")?, self.usize_param("valence")?)?),
            "farey" => plain(farey_ball(self.usize_param("radius")?)?),
            "tree-of-rings" => {
                let (graph, family) = tree_of_rings(
                    self.usize_param("depth")?,
                    self.usize_param("valence")?,
                    self.usize_param("ring_len")?,
                )?;
                vec![Instance { graph, family }]
            }
            "tower" => hierarchy_tower(
                self.usize_param("levels")?,
                self.usize_param("depth")?,
                self.usize_param("valence")?,
                self.usize_param("ring_len")?,
            )?
            .into_iter()
            .map(|(graph, family)| Instance { graph, family })
            .collect(),
            other => return Err(Error::input(format!("unknown generator `{other}`"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: MetricGraph,
    pub family: SubgraphFamily,
}

pub fn path(n: usize) -> Result<MetricGraph> {
    if n < 1 {
        return Err(Error::domain("path needs n >= 1"));
    }
    let edges: Vec<_> = (1..n as Vertex).map(|v| (v - 1, v)).collect();
    MetricGraph::new(n, &edges)
}

pub fn cycle(n: usize) -> Result<MetricGraph> {
    if n < 3 {
        return Err(Error::domain("cycle needs n >= 3"));
    }
    let n32 = n as Vertex;
    let edges: Vec<_> = (0..n32).map(|v| (v, (v + 1) % n32)).collect();
    MetricGraph::new(n, &edges)
}

/// `width × height` grid, row-major ids (`y * width + x`), labels `"x,y"`.
pub fn grid(width: usize, height: usize) -> Result<MetricGraph> {
    if width < 1 || height < 1 {
        return Err(Error::domain("grid needs width, height >= 1"));
    }
    let id = |x: usize, y: usize| (y * width + x) as Vertex;
    let mut edges = Vec::new();
    let mut labels = BTreeMap::new();
    for y in 0..height {
        for x in 0..width {
            labels.insert(id(x, y), format!("{x},{y}"));
            if x + 1 < width {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < height {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    MetricGraph::new(width * height, &edges)?.with_labels(labels)
}

/// Ball of radius `depth` around a vertex of the `valence`-regular tree, BFS
/// order: the root has `valence` children, every other internal vertex
/// `valence - 1`.
pub fn tree(depth: usize, valence: usize) -> Result<MetricGraph> {
    if valence < 2 {
        return Err(Error::domain("tree needs valence >= 2"));
    }
    grow_tree(depth, |level| if level == 0 { valence } else { valence - 1 })
}

/// Rooted tree in which every internal vertex has `arity` children.
pub fn kary_tree(depth: usize, arity: usize) -> Result<MetricGraph> {
    if arity < 1 {
        return Err(Error::domain("arity must be >= 1"));
    }
    grow_tree(depth, |_| arity)
}

fn grow_tree(depth: usize, children: impl Fn(usize) -> usize) -> Result<MetricGraph> {
    let mut edges = Vec::new();
    let mut frontier = vec![0 as Vertex];
    let mut next_id: Vertex = 1;
    for level in 0..depth {
        let mut next = Vec::new();
        for &p in &frontier {
            for _ in 0..children(level) {
                edges.push((p, next_id));
                next.push(next_id);
                next_id = next_id
                    .checked_add(1)
                    .ok_or_else(|| Error::domain("tree too large"))?;
            }
        }
        frontier = next;
    }
    MetricGraph::new(next_id as usize, &edges)
}

/// Replaces every edge `u-v` of `base` by a cycle of length `ring_len` in
/// which `u` and `v` sit at antipodal positions `0` and `ring_len / 2`.
/// Original vertices keep their ids; ring interiors follow, edge by edge in
/// lexicographic edge order. The family lists the rings in the same order.
pub fn ringify(base: &MetricGraph, ring_len: usize) -> Result<(MetricGraph, SubgraphFamily)> {
    if ring_len < 3 {
        return Err(Error::domain("ring_len must be >= 3"));
    }
    let half = ring_len / 2;
    let n0 = base.n();
    let base_edges: Vec<_> = base.edges().collect();
    let total = n0 + base_edges.len() * (ring_len - 2);
    if total > Vertex::MAX as usize {
        return Err(Error::domain("ringified graph too large"));
    }
    let mut edges = Vec::with_capacity(base_edges.len() * ring_len);
    let mut rings = Vec::with_capacity(base_edges.len());
    for (e, &(u, v)) in base_edges.iter().enumerate() {
        let first_interior = n0 + e * (ring_len - 2);
        let at = |pos: usize| -> Vertex {
            match pos {
                0 => u,
                p if p == half => v,
                p if p < half => (first_interior + p - 1) as Vertex,
                p => (first_interior + p - 2) as Vertex,
            }
        };
        let ring: Vec<Vertex> = (0..ring_len).map(at).collect();
        for pos in 0..ring_len {
            edges.push((ring[pos], ring[(pos + 1) % ring_len]));
        }
        rings.push(ring);
    }
    let graph = MetricGraph::new(total, &edges)?;
    let family = SubgraphFamily::new(rings);
    Ok((graph, family))
}

/// A rooted `valence`-ary tree of the given depth with every edge replaced by
/// a ring; the family is the set of rings.
pub fn tree_of_rings(depth: usize, valence: usize, ring_len: usize) -> Result<(MetricGraph, SubgraphFamily)> {
    if ring_len < 3 {
        return Err(Error::domain("ring_len must be >= 3"));
    }
    let t = kary_tree(depth, valence)?;
    if t.edge_count() == 0 {
        return Err(Error::domain("tree_of_rings needs depth >= 1"));
    }
    ringify(&t, ring_len)
}

/// Chain of graphs where level 1 is a plain `valence`-ary tree and level
/// `i + 1` is level `i` with each edge replaced by a ring. Coning off the
/// rings of level `i + 1` and collapsing each ring to its attachment edge
/// gives back level `i`.
pub fn hierarchy_tower(
    levels: usize,
    depth: usize,
    valence: usize,
    ring_len: usize,
) -> Result<Vec<(MetricGraph, SubgraphFamily)>> {
    if levels < 1 {
        return Err(Error::domain("levels must be >= 1"));
    }
    if depth < 1 {
        return Err(Error::domain("tower needs depth >= 1"));
    }
    if ring_len < 3 {
        return Err(Error::domain("ring_len must be >= 3"));
    }
    let mut out = vec![(kary_tree(depth, valence)?, SubgraphFamily::empty())];
    for _ in 1..levels {
        let next = ringify(&out.last().unwrap().0, ring_len)?;
        out.push(next);
    }
    Ok(out)
}

/// Checks that collapsing every peripheral of `upper` onto its two
/// attachment vertices (the members with id below `lower.n()`) reproduces
/// the edge set of `lower` exactly, one peripheral per edge.
pub fn audit_tower_step(upper: &(MetricGraph, SubgraphFamily), lower: &MetricGraph) -> Result<()> {
    let (graph, family) = upper;
    let n0 = lower.n() as Vertex;
    if graph.n() < lower.n() {
        return Err(Error::format("upper level is smaller than lower level"));
    }
    let mut seen = Vec::with_capacity(family.len());
    for (c, members) in family.iter().enumerate() {
        let attach: Vec<Vertex> = members.iter().copied().filter(|&v| v < n0).collect();
        if attach.len() != 2 {
            return Err(Error::format(format!(
                "peripheral {c} has {} attachment vertices",
                attach.len()
            )));
        }
        if !lower.has_edge(attach[0], attach[1]) {
            return Err(Error::format(format!(
                "peripheral {c} collapses to {}-{}, not an edge below",
                attach[0], attach[1]
            )));
        }
        seen.push((attach[0], attach[1]));
    }
    seen.sort_unstable();
    let expected: Vec<_> = lower.edges().collect();
    if seen != expected {
        return Err(Error::format("collapsed peripherals do not match the lower edge set"));
    }
    Ok(())
}

/// A reduced fraction `p/q` with `q >= 0`; `1/0` is the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction {
    pub p: i64,
    pub q: i64,
}

impl Fraction {
    pub fn new(p: i64, q: i64) -> Self {
        if q == 0 {
            return Fraction { p: 1, q: 0 };
        }
        let g = gcd(p.abs(), q.abs());
        let s = if q < 0 { -1 } else { 1 };
        Fraction { p: s * p / g, q: s * q / g }
    }

    pub fn mediant(self, other: Fraction) -> Fraction {
        Fraction::new(self.p + other.p, self.q + other.q)
    }

    /// Farey adjacency: `|ps - qr| = 1`.
    pub fn farey_adjacent(self, other: Fraction) -> bool {
        (self.p as i128 * other.q as i128 - self.q as i128 * other.p as i128).abs() == 1
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Finite piece of the Farey graph: start from the edge `0/1 - 1/0` and
/// insert mediants between consecutive fractions `radius` times on both
/// arcs of the projective line. Yields `2^(radius+1)` vertices; edges are the
/// pairs with `|ps - qr| = 1`. Ids follow BFS order from `0/1`, ties broken
/// by `(q, p)`.
pub fn farey_ball(radius: usize) -> Result<MetricGraph> {
    if radius < 1 {
        return Err(Error::domain("farey radius must be >= 1"));
    }
    if radius > 16 {
        return Err(Error::domain("farey radius above 16 is not supported"));
    }
    // Positive arc from 0/1 to 1/0; the negative arc is its mirror image.
    let mut arc = vec![Fraction { p: 0, q: 1 }, Fraction { p: 1, q: 0 }];
    for _ in 0..radius {
        let mut next = Vec::with_capacity(arc.len() * 2 - 1);
        for w in arc.windows(2) {
            next.push(w[0]);
            next.push(Fraction { p: w[0].p + w[1].p, q: w[0].q + w[1].q });
        }
        next.push(*arc.last().unwrap());
        arc = next;
    }
    let mut fracs: Vec<Fraction> = arc.iter().map(|f| Fraction::new(f.p, f.q)).collect();
    fracs.extend(arc.iter().map(|f| Fraction::new(-f.p, f.q)));
    fracs.sort_by_key(|f| (f.q, f.p));
    fracs.dedup();

    let k = fracs.len();
    let mut adj = vec![Vec::new(); k];
    for i in 0..k {
        for j in i + 1..k {
            if fracs[i].farey_adjacent(fracs[j]) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    // BFS relabelling from 0/1; `fracs` is already sorted by (q, p).
    let start = fracs.iter().position(|f| *f == Fraction { p: 0, q: 1 }).unwrap();
    let mut order = Vec::with_capacity(k);
    let mut new_id = vec![usize::MAX; k];
    let mut queue = VecDeque::from([start]);
    new_id[start] = 0;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let mut nb = adj[u].clone();
        nb.sort_by_key(|&j| (fracs[j].q, fracs[j].p));
        for j in nb {
            if new_id[j] == usize::MAX {
                new_id[j] = order.len() + queue.len();
                queue.push_back(j);
            }
        }
    }
    let mut edges = Vec::new();
    for (i, nb) in adj.iter().enumerate() {
        for &j in nb {
            if i < j {
                edges.push((new_id[i] as Vertex, new_id[j] as Vertex));
            }
        }
    }
    let labels = (0..k).map(|i| (new_id[i] as Vertex, fracs[i].to_string())).collect();
    MetricGraph::new(k, &edges)?.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_sizes() {
        assert_eq!(tree(2, 3).unwrap().n(), 10);
        let c = cycle(8).unwrap();
        assert_eq!((c.n(), c.edge_count()), (8, 8));
        let g = grid(4, 5).unwrap();
        assert_eq!((g.n(), g.edge_count()), (20, 31));
        assert!(tree(2, 1).is_err());
        assert!(cycle(2).is_err());
        assert!(grid(0, 3).is_err());
    }

    #[test]
    fn tree_of_rings_counts() {
        let (g, fam) = tree_of_rings(1, 1, 12).unwrap();
        assert_eq!(g.n(), 12);
        assert_eq!(fam.len(), 1);
        let (_, fam) = tree_of_rings(2, 3, 12).unwrap();
        assert_eq!(fam.len(), 12);
        let (g, fam) = tree_of_rings(3, 3, 12).unwrap();
        assert_eq!(fam.len(), 39);
        assert_eq!(g.n(), 40 + 39 * 10);
        assert!(tree_of_rings(2, 3, 2).is_err());
    }

    #[test]
    fn rings_attach_at_antipodes() {
        let (g, fam) = tree_of_rings(1, 2, 12).unwrap();
        for ring in fam.iter() {
            let sub = g.induced(ring).unwrap();
            assert_eq!(sub.graph.edge_count(), 12);
            let attach: Vec<_> = ring.iter().copied().filter(|&v| v < 3).collect();
            assert_eq!(attach.len(), 2);
            let la = sub.local(attach[0]).unwrap();
            let lb = sub.local(attach[1]).unwrap();
            assert_eq!(sub.graph.shortest_distance(la, lb).unwrap(), 6);
        }
    }

    #[test]
    fn electrified_tree_of_rings_diameter() {
        for depth in 1..=3 {
            let (g, fam) = tree_of_rings(depth, 2, 12).unwrap();
            let eg = crate::electrify::electrify(&g, &fam).unwrap();
            assert!(eg.graph.diameter() as usize <= 4 * depth + 2);
        }
    }

    #[test]
    fn tower_levels() {
        let t = hierarchy_tower(1, 2, 2, 4).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].1.is_empty());
        let t = hierarchy_tower(3, 2, 2, 4).unwrap();
        let (g2, f2) = tree_of_rings(2, 2, 4).unwrap();
        assert_eq!(t[1].0, g2);
        assert_eq!(t[1].1, f2);
        assert_eq!(t[2].1.len(), f2.len() * 4);
        audit_tower_step(&t[1], &t[0].0).unwrap();
        audit_tower_step(&t[2], &t[1].0).unwrap();
        assert!(audit_tower_step(&t[2], &t[0].0).is_err());
    }

    #[test]
    fn farey_base_triangle_and_neighbors() {
        let g = farey_ball(1).unwrap();
        let id = |s: &str| g.vertices().find(|&v| g.label(v) == Some(s)).unwrap();
        let (zero, inf, one) = (id("0/1"), id("1/0"), id("1/1"));
        assert!(g.has_edge(zero, inf) && g.has_edge(zero, one) && g.has_edge(inf, one));
        let nb: Vec<_> = g.neighbors(zero).iter().map(|&v| g.label(v).unwrap()).collect();
        let mut nb = nb.clone();
        nb.sort();
        assert_eq!(nb, vec!["-1/1", "1/0", "1/1"]);
    }

    #[test]
    fn farey_edges_match_determinant_oracle() {
        let g = farey_ball(4).unwrap();
        assert_eq!(g.n(), 32);
        let parse = |s: &str| {
            let (p, q) = s.split_once('/').unwrap();
            (p.parse::<i64>().unwrap(), q.parse::<i64>().unwrap())
        };
        for u in g.vertices() {
            for v in g.vertices() {
                if u < v {
                    let (p, q) = parse(g.label(u).unwrap());
                    let (r, s) = parse(g.label(v).unwrap());
                    assert_eq!(g.has_edge(u, v), (p * s - q * r).abs() == 1);
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = GeneratorSpec::new("tree-of-rings", &[("depth", 2), ("valence", 3), ("ring_len", 12)]);
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        assert_eq!(a[0].graph.to_json(), b[0].graph.to_json());
        assert_eq!(a[0].family, b[0].family);
    }
}
