//! Coning off a family of peripheral subgraphs, efficient paths, and an
//! empirical probe of bounded penetration.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, GraphJson, MetricGraph, PathWalk, Subgraph, Vertex, UNREACHABLE};

/// Indexed family `{H_c}` of vertex sets. Each member is kept sorted and
/// deduplicated so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubgraphFamily {
    members: Vec<Vec<Vertex>>,
}

impl SubgraphFamily {
    pub fn new(members: Vec<Vec<Vertex>>) -> Self {
        let members = members
            .into_iter()
            .map(|mut m| {
                m.sort_unstable();
                m.dedup();
                m
            })
            .collect();
        SubgraphFamily { members }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, c: usize) -> &[Vertex] {
        &self.members[c]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Vertex]> {
        self.members.iter().map(Vec::as_slice)
    }

    pub fn contains(&self, c: usize, v: Vertex) -> bool {
        self.members[c].binary_search(&v).is_ok()
    }

    pub fn check_index(&self, c: usize) -> Result<()> {
        if c < self.len() {
            Ok(())
        } else {
            Err(Error::input(format!("peripheral index {c} out of range (family has {})", self.len())))
        }
    }

    /// Members are nonempty, in range, induce connected subgraphs, and no
    /// vertex set is listed twice.
    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        let mut seen: HashMap<&[Vertex], usize> = HashMap::new();
        for (c, m) in self.members.iter().enumerate() {
            if m.is_empty() {
                return Err(Error::input(format!("peripheral {c} is empty")));
            }
            let sub = g.induced(m)?;
            if !sub.graph.is_connected() {
                return Err(Error::input(format!("peripheral {c} does not induce a connected subgraph")));
            }
            if let Some(prev) = seen.insert(m.as_slice(), c) {
                return Err(Error::input(format!(
                    "peripherals {prev} and {c} are the same vertex set; it is already coned"
                )));
            }
        }
        Ok(())
    }

    /// Unordered pairs `(c, d)`, `c < d`, whose vertex sets intersect.
    pub fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        let mut by_vertex: HashMap<Vertex, Vec<usize>> = HashMap::new();
        for (c, m) in self.members.iter().enumerate() {
            for &v in m {
                by_vertex.entry(v).or_default().push(c);
            }
        }
        let mut pairs: Vec<(usize, usize)> = by_vertex
            .values()
            .flat_map(|cs| {
                cs.iter()
                    .enumerate()
                    .flat_map(move |(i, &c)| cs[i + 1..].iter().map(move |&d| (c, d)))
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Indices of all members containing `v`.
    pub fn peripherals_of(&self, v: Vertex) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.contains(c, v)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FamilyJson { peripherals: self.members.clone() }).expect("family serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FamilyJson = serde_json::from_str(text)?;
        Ok(Self::new(raw.peripherals))
    }
}

/// `{"peripherals": [[v,...],...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub peripherals: Vec<Vec<Vertex>>,
}

/// A base graph plus one cone vertex per peripheral. Base vertices keep
/// their ids; the cone of peripheral `c` is `base_size + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectrifiedGraph {
    pub graph: MetricGraph,
    pub base_size: usize,
    pub cone_of: Vec<Vertex>,
}

impl ElectrifiedGraph {
    pub fn is_cone(&self, v: Vertex) -> bool {
        v as usize >= self.base_size
    }

    pub fn cone_index(&self, v: Vertex) -> Option<usize> {
        self.is_cone(v).then(|| v as usize - self.base_size)
    }

    /// Vertex set of peripheral `c`, read off the cone's neighborhood.
    pub fn peripheral(&self, c: usize) -> &[Vertex] {
        self.graph.neighbors(self.cone_of[c])
    }

    pub fn family(&self) -> SubgraphFamily {
        SubgraphFamily::new((0..self.cone_of.len()).map(|c| self.peripheral(c).to_vec()).collect())
    }

    pub fn to_json(&self) -> String {
        let g = self.graph.to_json_value();
        let file = EgJson {
            n: g.n,
            edges: g.edges,
            labels: g.labels,
            base_size: self.base_size,
            cones: self.cone_of.clone(),
        };
        serde_json::to_string_pretty(&file).expect("electrified graph serializes")
    }

    /// Loads and checks the cone structure; see [`de_electrify`].
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: EgJson = serde_json::from_str(text)?;
        let edges = GraphJson { n: raw.n, edges: raw.edges, labels: None, generator: None }.edge_pairs()?;
        let eg = ElectrifiedGraph {
            graph: MetricGraph::new(raw.n, &edges)?.with_labels(raw.labels.unwrap_or_default())?,
            base_size: raw.base_size,
            cone_of: raw.cones,
        };
        de_electrify(&eg)?;
        Ok(eg)
    }
}

/// `{"n", "edges", "base_size", "cones"}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EgJson {
    pub n: usize,
    pub edges: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<std::collections::BTreeMap<Vertex, String>>,
    pub base_size: usize,
    pub cones: Vec<Vertex>,
}

pub fn electrify(g: &MetricGraph, fam: &SubgraphFamily) -> Result<ElectrifiedGraph> {
    fam.validate(g)?;
    let base = g.n();
    let mut edges: Vec<(Vertex, Vertex)> = g.edges().collect();
    let mut cone_of = Vec::with_capacity(fam.len());
    for (c, members) in fam.iter().enumerate() {
        let cone = (base + c) as Vertex;
        cone_of.push(cone);
        edges.extend(members.iter().map(|&h| (h, cone)));
    }
    let graph = MetricGraph::new(base + fam.len(), &edges)?.with_labels(g.labels().clone())?;
    Ok(ElectrifiedGraph { graph, base_size: base, cone_of })
}

/// Inverse of [`electrify`]: strips the cones and reads each peripheral
/// off its cone's neighborhood.
pub fn de_electrify(eg: &ElectrifiedGraph) -> Result<(MetricGraph, SubgraphFamily)> {
    let n = eg.graph.n();
    if eg.base_size == 0 || eg.base_size > n {
        return Err(Error::format(format!("base_size {} incompatible with {n} vertices", eg.base_size)));
    }
    if eg.base_size + eg.cone_of.len() != n {
        return Err(Error::format("cone count does not match the non-base vertices"));
    }
    for (c, &v) in eg.cone_of.iter().enumerate() {
        if v as usize != eg.base_size + c {
            return Err(Error::format(format!("cone {c} should be vertex {}, found {v}", eg.base_size + c)));
        }
        let nb = eg.graph.neighbors(v);
        if nb.is_empty() {
            return Err(Error::format(format!("cone {c} has no neighbors")));
        }
        if let Some(&w) = nb.iter().find(|&&w| eg.is_cone(w)) {
            return Err(Error::format(format!("cones {v} and {w} are adjacent")));
        }
    }
    let base_edges: Vec<_> = eg
        .graph
        .edges()
        .filter(|&(u, v)| !eg.is_cone(u) && !eg.is_cone(v))
        .collect();
    let labels = eg
        .graph
        .labels()
        .iter()
        .filter(|(&v, _)| !eg.is_cone(v))
        .map(|(&v, l)| (v, l.clone()))
        .collect();
    let base = MetricGraph::new(eg.base_size, &base_edges)
        .map_err(|e| Error::format(format!("base graph invalid: {e}")))?
        .with_labels(labels)?;
    let fam = eg.family();
    fam.validate(&base).map_err(|e| Error::format(format!("cone structure invalid: {e}")))?;
    Ok((base, fam))
}

/// Each cone vertex appears at most once, and every interior cone visit is
/// flanked by members of its peripheral.
pub fn is_efficient(path: &PathWalk, eg: &ElectrifiedGraph) -> bool {
    let vs = path.vertices();
    let mut seen = vec![false; eg.cone_of.len()];
    for (k, &v) in vs.iter().enumerate() {
        let Some(c) = eg.cone_index(v) else { continue };
        if c >= seen.len() || seen[c] {
            return false;
        }
        seen[c] = true;
        let members = eg.peripheral(c);
        let flanked = |i: Option<usize>| i.and_then(|i| vs.get(i)).is_none_or(|w| members.binary_search(w).is_ok());
        if !flanked(k.checked_sub(1)) || !flanked(Some(k + 1)) {
            return false;
        }
    }
    true
}

/// Intrinsic path metrics of the peripherals, computed lazily per member.
pub struct PeripheralMetrics {
    subs: Vec<Subgraph>,
    tables: Vec<OnceLock<DistanceMatrix>>,
}

impl PeripheralMetrics {
    /// `g` may be the base graph or its electrification; the induced
    /// subgraphs agree because cones are never members.
    pub fn new(g: &MetricGraph, fam: &SubgraphFamily) -> Result<Self> {
        let subs = fam.iter().map(|m| g.induced(m)).collect::<Result<Vec<_>>>()?;
        let tables = subs.iter().map(|_| OnceLock::new()).collect();
        Ok(PeripheralMetrics { subs, tables })
    }

    pub fn subgraph(&self, c: usize) -> &Subgraph {
        &self.subs[c]
    }

    fn table(&self, c: usize) -> &DistanceMatrix {
        self.tables[c].get_or_init(|| self.subs[c].graph.all_pairs())
    }

    /// Distance in the intrinsic metric of `H_c`; `None` if either vertex is
    /// not a member.
    pub fn dist(&self, c: usize, u: Vertex, v: Vertex) -> Option<u32> {
        let s = &self.subs[c];
        let (lu, lv) = (s.local(u)?, s.local(v)?);
        Some(self.table(c).get(lu, lv))
    }

    /// Canonical intrinsic geodesic in `H_c`, in global ids.
    pub fn geodesic(&self, c: usize, u: Vertex, v: Vertex) -> Option<Vec<Vertex>> {
        let s = &self.subs[c];
        let (lu, lv) = (s.local(u)?, s.local(v)?);
        let walk = s.graph.geodesic_along(lu, self.table(c).row(lv))?;
        Some(walk.vertices().iter().map(|&l| s.to_global(l)).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenetrationOptions {
    /// Quasi-geodesic quality `L >= 1`.
    pub l: f64,
    /// Number of endpoint pairs.
    pub samples: usize,
    pub seed: u64,
    /// Minimum intrinsic entry/exit distance for a crossing to be compared.
    pub depth_threshold: u32,
    /// Perturbed re-routings attempted per endpoint pair.
    pub paths_per_pair: usize,
}

impl Default for PenetrationOptions {
    fn default() -> Self {
        PenetrationOptions { l: 2.0, samples: 500, seed: 7, depth_threshold: 4, paths_per_pair: 8 }
    }
}

/// One deep cone crossing of one accepted path, compared against every other
/// accepted path with the same endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub pair: usize,
    pub endpoints: (Vertex, Vertex),
    pub path: usize,
    pub peripheral: usize,
    /// Intrinsic distance between entry and exit in `H_c`.
    pub depth: u32,
    pub entry_spread: u32,
    pub exit_spread: u32,
    /// Every comparison path also visits this cone.
    pub all_cross: bool,
    /// `max(entry_spread, exit_spread)`, or `depth + 1` when some comparison
    /// path avoids the cone (the threshold must then exceed this depth).
    pub divergence: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenetrationReport {
    pub kind: String,
    pub l: f64,
    pub p_estimate: u32,
    pub depth_threshold: u32,
    pub samples: usize,
    pub seed: u64,
    pub paths_per_pair: usize,
    pub accepted_paths: usize,
    pub rejected_paths: usize,
    pub misses: usize,
    pub overlapping_peripherals: usize,
    pub records: Vec<CrossingRecord>,
}

/// Probes the bounded penetration property. For each sampled endpoint pair
/// the canonical geodesic plus `paths_per_pair` shortest paths under random
/// edge weights in `[1, L]` are collected; a path is kept when it is
/// efficient and its length is at most `L·d + L`. Deep crossings of each kept
/// path are compared against all other kept paths.
pub fn penetration_profile(eg: &ElectrifiedGraph, opts: &PenetrationOptions) -> Result<PenetrationReport> {
    if !(opts.l >= 1.0) || !opts.l.is_finite() {
        return Err(Error::input("quasi-geodesic quality L must be >= 1"));
    }
    if opts.samples == 0 {
        return Err(Error::input("sampling budget must be >= 1"));
    }
    if eg.base_size < 2 {
        return Err(Error::input("need at least two base vertices"));
    }
    let fam = eg.family();
    let metrics = PeripheralMetrics::new(&eg.graph, &fam)?;
    let n = eg.graph.n();
    // With L = 1 a tiny spread keeps every re-routing a true geodesic while
    // still breaking ties randomly.
    let spread = (opts.l - 1.0).max(1.0 / (2.0 * n as f64 + 2.0));

    let per_pair: Vec<(Vec<CrossingRecord>, usize, usize)> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let x = rng.gen_range(0..eg.base_size) as Vertex;
            let mut y = rng.gen_range(0..eg.base_size - 1) as Vertex;
            if y >= x {
                y += 1;
            }
            let to_y = eg.graph.bfs(y);
            let d = to_y[x as usize] as f64;
            let mut paths = vec![eg.graph.geodesic_along(x, &to_y).expect("connected").into_vertices()];
            let (mut accepted, mut rejected) = (1usize, 0usize);
            for _ in 0..opts.paths_per_pair {
                let salt: u64 = rng.gen();
                let p = perturbed_shortest_path(&eg.graph, x, y, salt, spread);
                let walk = PathWalk::from_trusted(p.clone());
                let ok = is_efficient(&walk, eg) && (walk.len() as f64) <= opts.l * d + opts.l;
                if !ok {
                    rejected += 1;
                } else if !paths.contains(&p) {
                    accepted += 1;
                    paths.push(p);
                }
            }
            (compare_crossings(eg, &metrics, &paths, i, (x, y), opts.depth_threshold), accepted, rejected)
        })
        .collect();

    let mut records = Vec::new();
    let (mut accepted_paths, mut rejected_paths) = (0, 0);
    for (r, a, rj) in per_pair {
        records.extend(r);
        accepted_paths += a;
        rejected_paths += rj;
    }
    let p_estimate = records.iter().map(|r| r.divergence).max().unwrap_or(0);
    let misses = records.iter().filter(|r| !r.all_cross).count();
    Ok(PenetrationReport {
        kind: "penetration".into(),
        l: opts.l,
        p_estimate,
        depth_threshold: opts.depth_threshold,
        samples: opts.samples,
        seed: opts.seed,
        paths_per_pair: opts.paths_per_pair,
        accepted_paths,
        rejected_paths,
        misses,
        overlapping_peripherals: fam.overlapping_pairs().len(),
        records,
    })
}

fn compare_crossings(
    eg: &ElectrifiedGraph,
    metrics: &PeripheralMetrics,
    paths: &[Vec<Vertex>],
    pair: usize,
    endpoints: (Vertex, Vertex),
    threshold: u32,
) -> Vec<CrossingRecord> {
    let mut out = Vec::new();
    for (pi, path) in paths.iter().enumerate() {
        for k in 1..path.len().saturating_sub(1) {
            let Some(c) = eg.cone_index(path[k]) else { continue };
            let (entry, exit) = (path[k - 1], path[k + 1]);
            let depth = metrics.dist(c, entry, exit).unwrap_or(UNREACHABLE);
            if depth < threshold {
                continue;
            }
            let mut rec = CrossingRecord {
                pair,
                endpoints,
                path: pi,
                peripheral: c,
                depth,
                entry_spread: 0,
                exit_spread: 0,
                all_cross: true,
                divergence: 0,
            };
            for (qi, other) in paths.iter().enumerate() {
                if qi == pi {
                    continue;
                }
                match other.iter().position(|&v| v == path[k]) {
                    Some(j) if j > 0 && j + 1 < other.len() => {
                        let e = metrics.dist(c, entry, other[j - 1]).unwrap_or(UNREACHABLE);
                        let x = metrics.dist(c, exit, other[j + 1]).unwrap_or(UNREACHABLE);
                        rec.entry_spread = rec.entry_spread.max(e);
                        rec.exit_spread = rec.exit_spread.max(x);
                    }
                    _ => rec.all_cross = false,
                }
            }
            rec.divergence = if rec.all_cross {
                rec.entry_spread.max(rec.exit_spread)
            } else {
                depth.saturating_add(1)
            };
            out.push(rec);
        }
    }
    out
}

/// Symmetric pseudo-random edge weight in `[1, 1 + spread]`.
fn edge_weight(salt: u64, u: Vertex, v: Vertex, spread: f64) -> f64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    let mut z = salt ^ ((a as u64) << 32 | b as u64);
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    1.0 + spread * ((z >> 11) as f64 / (1u64 << 53) as f64)
}

fn perturbed_shortest_path(g: &MetricGraph, src: Vertex, dst: Vertex, salt: u64, spread: f64) -> Vec<Vertex> {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![Vertex::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = 0.0;
    // Nonnegative finite f64 values order the same as their bit patterns.
    heap.push(Reverse((0f64.to_bits(), src)));
    while let Some(Reverse((bits, u))) = heap.pop() {
        let du = f64::from_bits(bits);
        if du > dist[u as usize] {
            continue;
        }
        if u == dst {
            break;
        }
        for &w in g.neighbors(u) {
            let nd = du + edge_weight(salt, u, w, spread);
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                pred[w as usize] = u;
                heap.push(Reverse((nd.to_bits(), w)));
            }
        }
    }
    let mut path = vec![dst];
    let mut cur = dst;
    while cur != src {
        cur = pred[cur as usize];
        path.push(cur);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn empty_family_is_identity() {
        let g = generators::grid(3, 3).unwrap();
        let eg = electrify(&g, &SubgraphFamily::empty()).unwrap();
        assert_eq!(eg.graph, g);
        let (back, fam) = de_electrify(&eg).unwrap();
        assert_eq!(back, g);
        assert!(fam.is_empty());
    }

    #[test]
    fn rings_collapse_to_distance_two() {
        let (g, fam) = generators::tree_of_rings(2, 3, 12).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        assert_eq!(eg.graph.n(), g.n() + fam.len());
        for c in 0..fam.len() {
            let m = fam.member(c);
            let row = eg.graph.bfs(m[0]);
            for &v in m {
                assert!(row[v as usize] <= 2);
            }
            // attachment vertices sit six apart in the ring, two apart via the cone
            let attach: Vec<_> = m.iter().copied().filter(|&v| v < 13).collect();
            assert_eq!(eg.graph.shortest_distance(attach[0], attach[1]).unwrap(), 2);
        }
    }

    #[test]
    fn round_trip_grid_with_peripheral_row() {
        let g = generators::grid(5, 4).unwrap();
        let fam = SubgraphFamily::new(vec![vec![4, 3, 2, 1, 0]]);
        let eg = electrify(&g, &fam).unwrap();
        let (back, back_fam) = de_electrify(&eg).unwrap();
        assert_eq!(back, g);
        assert_eq!(back_fam, fam);
        let reloaded = ElectrifiedGraph::from_json(&eg.to_json()).unwrap();
        assert_eq!(reloaded.graph.edges().collect::<Vec<_>>(), eg.graph.edges().collect::<Vec<_>>());
    }

    #[test]
    fn corrupted_cone_structure_is_rejected() {
        let (g, fam) = generators::tree_of_rings(1, 2, 6).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        let mut edges: Vec<_> = eg.graph.edges().collect();
        edges.push((eg.cone_of[0], eg.cone_of[1]));
        let bad = ElectrifiedGraph { graph: MetricGraph::new(eg.graph.n(), &edges).unwrap(), ..eg.clone() };
        assert!(matches!(de_electrify(&bad), Err(Error::Format(_))));

        let mut shifted = eg.clone();
        shifted.cone_of.swap(0, 1);
        assert!(matches!(de_electrify(&shifted), Err(Error::Format(_))));
    }

    #[test]
    fn invalid_families() {
        let g = generators::path(6).unwrap();
        assert!(electrify(&g, &SubgraphFamily::new(vec![vec![0, 2]])).is_err());
        assert!(electrify(&g, &SubgraphFamily::new(vec![vec![0, 9]])).is_err());
        assert!(electrify(&g, &SubgraphFamily::new(vec![vec![]])).is_err());
        let dup = SubgraphFamily::new(vec![vec![0, 1], vec![1, 0]]);
        assert!(electrify(&g, &dup).is_err());
    }

    #[test]
    fn efficiency() {
        let (g, fam) = generators::tree_of_rings(1, 2, 6).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        let plain = PathWalk::new(&eg.graph, vec![0, 3, 4]).unwrap();
        assert!(is_efficient(&plain, &eg));
        let cone = eg.cone_of[0];
        let m = fam.member(0);
        let twice = PathWalk::new(&eg.graph, vec![m[0], cone, m[1], cone, m[2]]).unwrap();
        assert!(!is_efficient(&twice, &eg));
        let once = PathWalk::new(&eg.graph, vec![m[0], cone, m[2]]).unwrap();
        assert!(is_efficient(&once, &eg));
    }

    #[test]
    fn canonical_geodesics_are_efficient() {
        let (g, fam) = generators::tree_of_rings(2, 2, 8).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        for u in 0..eg.base_size as Vertex {
            let row = eg.graph.bfs(u);
            for v in 0..eg.base_size as Vertex {
                let p = eg.graph.geodesic_along(v, &row).unwrap();
                assert!(is_efficient(&p, &eg));
            }
        }
    }

    #[test]
    fn penetration_empty_family_and_errors() {
        let g = generators::tree(3, 3).unwrap();
        let eg = electrify(&g, &SubgraphFamily::empty()).unwrap();
        let r = penetration_profile(&eg, &PenetrationOptions { samples: 20, ..Default::default() }).unwrap();
        assert_eq!(r.p_estimate, 0);
        assert!(r.records.is_empty());
        assert!(penetration_profile(&eg, &PenetrationOptions { samples: 0, ..Default::default() }).is_err());
        assert!(penetration_profile(&eg, &PenetrationOptions { l: 0.5, ..Default::default() }).is_err());
    }

    #[test]
    fn penetration_is_deterministic_and_consistent() {
        let (g, fam) = generators::tree_of_rings(2, 2, 12).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        let opts = PenetrationOptions { samples: 60, ..Default::default() };
        let a = penetration_profile(&eg, &opts).unwrap();
        let b = penetration_profile(&eg, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_estimate, a.records.iter().map(|r| r.divergence).max().unwrap_or(0));
    }

    #[test]
    fn perturbed_paths_with_unit_spread_stay_geodesic() {
        let g = generators::grid(6, 6).unwrap();
        let d = g.shortest_distance(0, 35).unwrap() as usize;
        for salt in 0..20 {
            let p = perturbed_shortest_path(&g, 0, 35, salt, 1.0 / 80.0);
            assert_eq!(p.len() - 1, d);
            assert!(PathWalk::new(&g, p).is_ok());
        }
    }
}
