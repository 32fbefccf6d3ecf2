//! Four-point hyperbolicity and quasiconvexity measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex, UNREACHABLE};

/// Default vertex limit for exhaustive 4-tuple enumeration.
pub const EXACT_LIMIT: usize = 300;

/// A nonnegative multiple of 1/2, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(u32);

impl HalfInt {
    pub fn from_twice(twice: u32) -> Self {
        HalfInt(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        let t = x * 2.0;
        if t < 0.0 || t.fract() != 0.0 || t > u32::MAX as f64 {
            return Err(serde::de::Error::custom(format!("{x} is not a nonnegative half-integer")));
        }
        Ok(HalfInt(t as u32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaOptions {
    pub mode: DeltaMode,
    pub samples: usize,
    pub seed: u64,
    pub exact_limit: usize,
}

impl DeltaOptions {
    pub fn exact() -> Self {
        DeltaOptions { mode: DeltaMode::Exact, samples: 0, seed: 0, exact_limit: EXACT_LIMIT }
    }

    pub fn sampled(samples: usize, seed: u64) -> Self {
        DeltaOptions { mode: DeltaMode::Sampled, samples, seed, exact_limit: EXACT_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub kind: String,
    pub delta: HalfInt,
    pub mode: DeltaMode,
    /// Number of 4-tuples examined.
    pub samples: u64,
    pub seed: Option<u64>,
    /// Lexicographically first tuple (exact) or first sample (sampled)
    /// attaining `delta`; absent when there are fewer than four vertices.
    pub witness: Option<[Vertex; 4]>,
}

/// Twice the four-point defect of `(w, x, y, z)`: the gap between the two
/// largest of the three pairwise distance sums.
#[inline]
pub fn four_point_defect(dwx: u32, dyz: u32, dwy: u32, dxz: u32, dwz: u32, dxy: u32) -> u32 {
    let mut s = [dwx + dyz, dwy + dxz, dwz + dxy];
    s.sort_unstable();
    s[2] - s[1]
}

pub fn four_point_delta(g: &MetricGraph, opts: &DeltaOptions) -> Result<DeltaReport> {
    match opts.mode {
        DeltaMode::Exact => exact_delta(g, opts.exact_limit),
        DeltaMode::Sampled => sampled_delta(g, opts.samples, opts.seed),
    }
}

fn exact_delta(g: &MetricGraph, limit: usize) -> Result<DeltaReport> {
    let n = g.n();
    if n > limit {
        return Err(Error::SizeGuard { what: "exact delta vertex count", size: n, limit });
    }
    let d = g.all_pairs();
    // Per first index: best defect and the first tuple reaching it.
    let best = (0..n as Vertex)
        .into_par_iter()
        .map(|w| {
            let mut best: Option<(u32, [Vertex; 4])> = None;
            let rw = d.row(w);
            for x in w + 1..n as Vertex {
                let rx = d.row(x);
                for y in x + 1..n as Vertex {
                    let ry = d.row(y);
                    let (dwx, dwy, dxy) = (rw[x as usize], rw[y as usize], rx[y as usize]);
                    for z in y + 1..n as Vertex {
                        let z_ = z as usize;
                        let t = four_point_defect(dwx, ry[z_], dwy, rx[z_], rw[z_], dxy);
                        if best.is_none_or(|(b, _)| t > b) {
                            best = Some((t, [w, x, y, z]));
                        }
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(u32, [Vertex; 4])>, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        });
    let nn = n as u64;
    let tuples = if n >= 4 { nn * (nn - 1) * (nn - 2) * (nn - 3) / 24 } else { 0 };
    Ok(DeltaReport {
        kind: "delta".into(),
        delta: HalfInt(best.map_or(0, |b| b.0)),
        mode: DeltaMode::Exact,
        samples: tuples,
        seed: None,
        witness: best.map(|b| b.1),
    })
}

fn sampled_delta(g: &MetricGraph, samples: usize, seed: u64) -> Result<DeltaReport> {
    if samples == 0 {
        return Err(Error::input("sampled mode needs samples >= 1"));
    }
    let n = g.n();
    let results: Vec<(u32, [Vertex; 4])> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let t: [Vertex; 4] = std::array::from_fn(|_| rng.gen_range(0..n) as Vertex);
            let (dw, dx, dy) = (g.bfs(t[0]), g.bfs(t[1]), g.bfs(t[2]));
            let [_, x, y, z] = t.map(|v| v as usize);
            let defect = four_point_defect(dw[x], dy[z], dw[y], dx[z], dw[z], dx[y]);
            (defect, t)
        })
        .collect();
    let mut best = results[0];
    for &r in &results[1..] {
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(DeltaReport {
        kind: "delta".into(),
        delta: HalfInt(best.0),
        mode: DeltaMode::Sampled,
        samples: samples as u64,
        seed: Some(seed),
        witness: Some(best.1),
    })
}

/// Pairs `(x, y)`, `x < y`, from a vertex set: all of them when they fit in
/// the budget, otherwise `budget` seeded draws.
pub(crate) fn pairs_within(set: &[Vertex], budget: usize, seed: u64) -> Vec<(Vertex, Vertex)> {
    let k = set.len();
    let total = k * k.saturating_sub(1) / 2;
    if total <= budget {
        let mut out = Vec::with_capacity(total);
        for i in 0..k {
            for j in i + 1..k {
                out.push((set[i], set[j]));
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| {
            let i = rng.gen_range(0..k);
            let mut j = rng.gen_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            (set[i.min(j)], set[i.max(j)])
        })
        .collect()
}

fn connected_subset(g: &MetricGraph, h: &[Vertex]) -> Result<crate::graph::Subgraph> {
    let sub = g.induced(h)?;
    if !sub.graph.is_connected() {
        return Err(Error::input("vertex set does not induce a connected subgraph"));
    }
    Ok(sub)
}

/// Largest distance from `H` of a vertex on the canonical geodesic between
/// two members of `H`, over the tested pairs. Zero means every tested
/// geodesic stays inside `H`.
pub fn quasiconvexity_constant(g: &MetricGraph, h: &[Vertex], pair_budget: usize, seed: u64) -> Result<u32> {
    if pair_budget == 0 {
        return Err(Error::input("pair budget must be >= 1"));
    }
    let sub = connected_subset(g, h)?;
    let to_h = g.bfs_from_set(&sub.global);
    let pairs = pairs_within(&sub.global, pair_budget, seed);
    Ok(pairs
        .par_iter()
        .map(|&(x, y)| {
            let row = g.bfs(y);
            let walk = g.geodesic_along(x, &row).expect("connected");
            walk.vertices().iter().map(|&z| to_h[z as usize]).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// Worst `d_H(x,y) / d_G(x,y)` over tested pairs (1 when none).
    pub max_ratio: f64,
    pub witness: Option<(Vertex, Vertex)>,
    pub pairs: usize,
}

/// Compares the intrinsic path metric of the induced subgraph on `H` with
/// the ambient metric.
pub fn intrinsic_vs_extrinsic(g: &MetricGraph, h: &[Vertex], pair_budget: usize, seed: u64) -> Result<DistortionReport> {
    if pair_budget == 0 {
        return Err(Error::input("pair budget must be >= 1"));
    }
    let sub = connected_subset(g, h)?;
    let pairs = pairs_within(&sub.global, pair_budget, seed);
    let ratios: Vec<(u32, u32, (Vertex, Vertex))> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let dg = g.bfs(x)[y as usize];
            let lx = sub.local(x).unwrap();
            let dh = sub.graph.bfs(lx)[sub.local(y).unwrap() as usize];
            (dh, dg, (x, y))
        })
        .collect();
    let mut best: Option<(u32, u32, (Vertex, Vertex))> = None;
    for r in ratios {
        debug_assert!(r.0 != UNREACHABLE && r.1 > 0);
        // compare dh/dg exactly by cross-multiplication
        if best.is_none_or(|b| (r.0 as u64) * (b.1 as u64) > (b.0 as u64) * (r.1 as u64)) {
            best = Some(r);
        }
    }
    Ok(DistortionReport {
        max_ratio: best.map_or(1.0, |b| b.0 as f64 / b.1 as f64),
        witness: best.map(|b| b.2),
        pairs: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn brute_delta(g: &MetricGraph) -> u32 {
        let d = g.all_pairs();
        let n = g.n() as Vertex;
        let mut best = 0;
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        // Gromov-product form: (x|y)_w >= min((x|z)_w, (y|z)_w) - delta
                        let gp = |a: Vertex, b: Vertex| d.get(w, a) as i64 + d.get(w, b) as i64 - d.get(a, b) as i64;
                        let defect = gp(x, z).min(gp(y, z)) - gp(x, y);
                        best = best.max(defect);
                    }
                }
            }
        }
        // Gromov products carry a factor 2 here, matching twice-delta units.
        best as u32
    }

    #[test]
    fn trees_are_zero_hyperbolic() {
        for (d, v) in [(1, 2), (3, 2), (2, 3), (3, 3), (2, 5)] {
            let t = generators::tree(d, v).unwrap();
            assert_eq!(four_point_delta(&t, &DeltaOptions::exact()).unwrap().delta, HalfInt(0));
        }
    }

    #[test]
    fn cycle_eight_matches_exhaustive_oracle() {
        let c8 = generators::cycle(8).unwrap();
        let r = four_point_delta(&c8, &DeltaOptions::exact()).unwrap();
        assert_eq!(r.delta.twice(), brute_delta(&c8));
        // four equally spaced points: sums 4, 4, 8
        assert_eq!(r.delta, HalfInt::from_twice(4));
        assert_eq!(r.samples, 70);
    }

    #[test]
    fn larger_grids_are_less_hyperbolic() {
        let small = four_point_delta(&generators::grid(4, 4).unwrap(), &DeltaOptions::exact()).unwrap();
        let big = four_point_delta(&generators::grid(8, 8).unwrap(), &DeltaOptions::exact()).unwrap();
        assert!(big.delta > small.delta, "{} vs {}", big.delta, small.delta);
    }

    #[test]
    fn size_guard_and_sampling() {
        let p = generators::path(301).unwrap();
        assert!(matches!(
            four_point_delta(&p, &DeltaOptions::exact()),
            Err(Error::SizeGuard { .. })
        ));
        let g = generators::grid(6, 6).unwrap();
        let exact = four_point_delta(&g, &DeltaOptions::exact()).unwrap();
        let a = four_point_delta(&g, &DeltaOptions::sampled(200, 9)).unwrap();
        let b = four_point_delta(&g, &DeltaOptions::sampled(200, 9)).unwrap();
        assert_eq!(a, b);
        assert!(a.delta <= exact.delta);
        assert!(four_point_delta(&g, &DeltaOptions::sampled(0, 9)).is_err());
    }

    #[test]
    fn half_int_serde() {
        let x = HalfInt::from_twice(3);
        assert_eq!(serde_json::to_string(&x).unwrap(), "1.5");
        assert_eq!(serde_json::from_str::<HalfInt>("1.5").unwrap(), x);
        assert!(serde_json::from_str::<HalfInt>("1.25").is_err());
        assert_eq!(x.to_string(), "1.5");
    }

    #[test]
    fn quasiconvexity() {
        let t = generators::tree(3, 3).unwrap();
        // root, one child and that child's subtree form a subtree
        let sub: Vec<Vertex> = vec![0, 1, 4, 5];
        assert_eq!(quasiconvexity_constant(&t, &sub, 100, 1).unwrap(), 0);
        let all: Vec<Vertex> = t.vertices().collect();
        assert_eq!(quasiconvexity_constant(&t, &all, 50, 1).unwrap(), 0);
        assert!(quasiconvexity_constant(&t, &[4, 7], 10, 1).is_err());
    }

    #[test]
    fn ring_on_tree_has_no_shortcut() {
        // C_12 on vertices 0..12, plus a path hanging off vertex 0.
        let mut edges: Vec<(Vertex, Vertex)> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
        edges.extend([(0, 12), (12, 13), (13, 14)]);
        let g = MetricGraph::new(15, &edges).unwrap();
        let ring: Vec<Vertex> = (0..12).collect();
        let r = intrinsic_vs_extrinsic(&g, &ring, 1000, 0).unwrap();
        assert_eq!(r.max_ratio, 1.0);
        assert_eq!(quasiconvexity_constant(&g, &ring, 1000, 0).unwrap(), 0);
    }

    #[test]
    fn two_rings_joined_by_two_paths() {
        // Rings A = 0..6 and B = 6..12 joined 0-12-6 and 3-13-14-9: the two
        // connectors create shortcuts between the rings' far sides.
        let mut edges: Vec<(Vertex, Vertex)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend((0..6).map(|i| (6 + i, 6 + (i + 1) % 6)));
        edges.extend([(0, 12), (12, 6), (3, 13), (13, 14), (14, 9)]);
        let g = MetricGraph::new(15, &edges).unwrap();
        let h: Vec<Vertex> = (0..12).chain([12]).collect();
        let r = intrinsic_vs_extrinsic(&g, &h, 10_000, 0).unwrap();
        // oracle: Floyd–Warshall on G and on the induced subgraph
        let fw = |n: usize, es: &[(Vertex, Vertex)]| {
            let mut d = vec![vec![u32::MAX / 4; n]; n];
            for (i, row) in d.iter_mut().enumerate() {
                row[i] = 0;
            }
            for &(u, v) in es {
                d[u as usize][v as usize] = 1;
                d[v as usize][u as usize] = 1;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                    }
                }
            }
            d
        };
        let dg = fw(15, &edges);
        let inner: Vec<_> = edges.iter().copied().filter(|&(u, v)| u < 13 && v < 13).collect();
        let dh = fw(13, &inner);
        let mut expect: f64 = 1.0;
        for x in 0..13 {
            for y in x + 1..13 {
                expect = expect.max(dh[x][y] as f64 / dg[x][y] as f64);
            }
        }
        assert!(expect > 1.0);
        assert_eq!(r.max_ratio, expect);
    }
}
