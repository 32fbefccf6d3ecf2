//! The map `Λ(y) = (y, Ψ(y))` from the base graph into the product of the
//! electrification and the quasi-tree, geodesic enlargements, and empirical
//! quasi-isometry constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::electrify::{de_electrify, ElectrifiedGraph, PeripheralMetrics, SubgraphFamily};
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, PathWalk, Vertex, UNREACHABLE};
use crate::hyperbolicity::pairs_within;
use crate::quasitree::{QuasiTreeSpace, Tagged};

/// Default bottleneck threshold for calling a space a quasi-tree at desk
/// scale.
pub const BOTTLENECK_THRESHOLD: u32 = 3;

fn check_inputs(eg: &ElectrifiedGraph, fam: &SubgraphFamily, y: &QuasiTreeSpace, theta: u32) -> Result<()> {
    if theta != y.theta {
        return Err(Error::input(format!("theta {theta} differs from the quasi-tree's theta {}", y.theta)));
    }
    if *fam != eg.family() || fam != y.family() {
        return Err(Error::input("family does not match the electrification or the quasi-tree"));
    }
    Ok(())
}

fn home_peripheral(fam: &SubgraphFamily, basepoint: Vertex) -> Result<usize> {
    fam.peripherals_of(basepoint)
        .first()
        .copied()
        .ok_or_else(|| Error::input(format!("basepoint {basepoint} lies in no peripheral")))
}

/// Exit point after the last cone on a walk, or `None` when the walk meets
/// no cone.
fn last_exit(eg: &ElectrifiedGraph, walk: &[Vertex]) -> Option<Tagged> {
    (1..walk.len().saturating_sub(1))
        .rev()
        .find_map(|k| eg.cone_index(walk[k]).map(|c| Tagged { peripheral: c, vertex: walk[k + 1] }))
}

fn check_base(eg: &ElectrifiedGraph, v: Vertex) -> Result<()> {
    if (v as usize) >= eg.base_size {
        return Err(Error::input(format!("{v} is not a base vertex")));
    }
    Ok(())
}

/// `Ψ(y)`: the exit vertex after the last cone on the canonical geodesic
/// from the basepoint to `y`, or the basepoint itself when that geodesic
/// meets no cone.
pub fn psi(
    eg: &ElectrifiedGraph,
    fam: &SubgraphFamily,
    y: &QuasiTreeSpace,
    basepoint: Vertex,
    v: Vertex,
    theta: u32,
) -> Result<Tagged> {
    check_inputs(eg, fam, y, theta)?;
    check_base(eg, basepoint)?;
    check_base(eg, v)?;
    let c0 = home_peripheral(fam, basepoint)?;
    let walk = eg.graph.geodesic(basepoint, v)?;
    Ok(last_exit(eg, walk.vertices()).unwrap_or(Tagged { peripheral: c0, vertex: basepoint }))
}

pub fn lambda(
    eg: &ElectrifiedGraph,
    fam: &SubgraphFamily,
    y: &QuasiTreeSpace,
    basepoint: Vertex,
    v: Vertex,
    theta: u32,
) -> Result<(Vertex, Tagged)> {
    Ok((v, psi(eg, fam, y, basepoint, v, theta)?))
}

/// `Λ` tabulated on every base vertex.
#[derive(Debug, Clone)]
pub struct LambdaMap {
    pub basepoint: Vertex,
    pub home: usize,
    psi: Vec<Tagged>,
}

impl LambdaMap {
    pub fn new(
        eg: &ElectrifiedGraph,
        fam: &SubgraphFamily,
        y: &QuasiTreeSpace,
        basepoint: Vertex,
        theta: u32,
    ) -> Result<Self> {
        check_inputs(eg, fam, y, theta)?;
        check_base(eg, basepoint)?;
        let home = home_peripheral(fam, basepoint)?;
        let fallback = Tagged { peripheral: home, vertex: basepoint };
        let psi = (0..eg.base_size as Vertex)
            .into_par_iter()
            .map(|v| {
                let row = eg.graph.bfs(v);
                let walk = eg.graph.geodesic_along(basepoint, &row).expect("electrification is connected");
                last_exit(eg, walk.vertices()).unwrap_or(fallback)
            })
            .collect();
        Ok(LambdaMap { basepoint, home, psi })
    }

    pub fn psi(&self, v: Vertex) -> Tagged {
        self.psi[v as usize]
    }
}

/// Replaces every cone excursion `γ[k-1, k+1]` by the canonical intrinsic
/// geodesic of that peripheral.
pub fn enlargement(eg: &ElectrifiedGraph, fam: &SubgraphFamily, path: &PathWalk) -> Result<PathWalk> {
    if *fam != eg.family() {
        return Err(Error::input("family does not match the electrification"));
    }
    let (g, _) = de_electrify(eg)?;
    let metrics = PeripheralMetrics::new(&g, fam)?;
    enlargement_with(eg, &metrics, path)
}

pub fn enlargement_with(eg: &ElectrifiedGraph, metrics: &PeripheralMetrics, path: &PathWalk) -> Result<PathWalk> {
    if eg.is_cone(path.first()) || eg.is_cone(path.last()) {
        return Err(Error::input("enlargement endpoints must be base vertices"));
    }
    let vs = path.vertices();
    let mut out = vec![vs[0]];
    let mut k = 1;
    while k < vs.len() {
        match eg.cone_index(vs[k]) {
            Some(c) => {
                let seg = metrics
                    .geodesic(c, vs[k - 1], vs[k + 1])
                    .ok_or_else(|| Error::input("cone excursion does not join two members"))?;
                out.extend_from_slice(&seg[1..]);
                k += 2;
            }
            None => {
                out.push(vs[k]);
                k += 1;
            }
        }
    }
    PathWalk::new(&eg.graph, out)
}

/// Smallest `r` such that removing the `r`-ball about the midpoint of the
/// canonical geodesic separates its endpoints, maximized over tested pairs.
/// Bounded values across scales are the finite shadow of Manning's
/// bottleneck criterion.
pub fn bottleneck_constant(g: &MetricGraph, pair_budget: usize, seed: u64) -> u32 {
    let all: Vec<Vertex> = g.vertices().collect();
    let pairs = pairs_within(&all, pair_budget, seed);
    pairs
        .par_iter()
        .map(|&(x, z)| {
            let row = g.bfs(z);
            if row[x as usize] == UNREACHABLE {
                return 0;
            }
            let walk = g.geodesic_along(x, &row).expect("reachable");
            let m = walk.vertices()[walk.len() / 2];
            let from_m = g.bfs(m);
            let mut r = 0;
            while separates(g, &from_m, r, x, z).is_none() {
                r += 1;
            }
            r
        })
        .max()
        .unwrap_or(0)
}

/// `Some(())` when `x` cannot reach `z` outside the `r`-ball.
fn separates(g: &MetricGraph, from_m: &[u32], r: u32, x: Vertex, z: Vertex) -> Option<()> {
    let inside = |v: Vertex| from_m[v as usize] <= r;
    if inside(x) || inside(z) {
        return Some(());
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![x];
    seen[x as usize] = true;
    while let Some(u) = stack.pop() {
        if u == z {
            return None;
        }
        for &w in g.neighbors(u) {
            if !seen[w as usize] && !inside(w) {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    Some(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub y: Vertex,
    pub z: Vertex,
    pub d_g: u32,
    pub d_eg: u32,
    pub d_y: u32,
    pub d_product: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub kind: String,
    pub basepoint: Vertex,
    pub basepoint_peripheral: usize,
    pub theta: u32,
    pub seed: u64,
    pub pairs: usize,
    #[serde(rename = "L_fit")]
    pub l_fit: f64,
    #[serde(rename = "C_fit")]
    pub c_fit: f64,
    pub violations: usize,
    /// Largest product distance between images of adjacent vertices; only
    /// measured on graphs with at most 2000 vertices.
    pub edge_lipschitz: Option<u32>,
    pub bottleneck_threshold: u32,
    pub eg_bottleneck: u32,
    pub peripheral_bottlenecks: Vec<u32>,
    pub eg_quasi_tree: bool,
    pub peripherals_quasi_tree: bool,
    pub product_of_quasi_trees: bool,
    pub records: Vec<PairRecord>,
}

const EDGE_LIPSCHITZ_LIMIT: usize = 2000;
const BOTTLENECK_PAIRS: usize = 64;

/// Smallest `L` with `d_g/L - L <= d_p <= L*d_g + L`.
pub fn pair_constant(d_g: u32, d_p: u32) -> f64 {
    let (g, p) = (d_g as f64, d_p as f64);
    let upper = p / (g + 1.0);
    let lower = (-p + (p * p + 4.0 * g).sqrt()) / 2.0;
    upper.max(lower).max(1.0)
}

/// Whether a record satisfies the two-sided bound with multiplicative `l`
/// and additive `c`, up to float rounding.
pub fn within_bounds(d_g: u32, d_p: u32, l: f64, c: f64) -> bool {
    const EPS: f64 = 1e-9;
    let (g, p) = (d_g as f64, d_p as f64);
    g / l - c <= p + EPS && p <= l * g + c + EPS
}

/// Samples base-vertex pairs and fits the smallest `L >= 1` with
/// `d_G/L - L <= d_EG + d_Y(Ψ, Ψ) <= L*d_G + L` on every sample.
pub fn qi_fit(
    eg: &ElectrifiedGraph,
    fam: &SubgraphFamily,
    y: &QuasiTreeSpace,
    basepoint: Vertex,
    theta: u32,
    pair_budget: usize,
    seed: u64,
) -> Result<EmbeddingReport> {
    if pair_budget == 0 {
        return Err(Error::input("pair budget must be >= 1"));
    }
    let map = LambdaMap::new(eg, fam, y, basepoint, theta)?;
    let (g, _) = de_electrify(eg)?;
    let base: Vec<Vertex> = g.vertices().collect();
    let mut pairs = pairs_within(&base, pair_budget, seed);
    pairs.sort_unstable();

    let product = |u: Vertex, v: Vertex, eg_row: &[u32]| -> Result<(u32, u32)> {
        let d_eg = eg_row[v as usize];
        let row_y = y.distances_from(map.psi(u))?;
        let d_y = row_y[y.id_of(map.psi(v))? as usize];
        if d_y == UNREACHABLE {
            return Err(Error::input("quasi-tree is disconnected between two images"));
        }
        Ok((d_eg, d_y))
    };

    let records: Vec<PairRecord> = pairs
        .par_iter()
        .map(|&(u, v)| {
            let d_g = g.bfs(u)[v as usize];
            let (d_eg, d_y) = product(u, v, &eg.graph.bfs(u))?;
            Ok(PairRecord { y: u, z: v, d_g, d_eg, d_y, d_product: d_eg + d_y })
        })
        .collect::<Result<_>>()?;

    let l_fit = records.iter().map(|r| pair_constant(r.d_g, r.d_product)).fold(1.0, f64::max);
    let violations = records.iter().filter(|r| !within_bounds(r.d_g, r.d_product, l_fit, l_fit)).count();

    let edge_lipschitz = if g.n() <= EDGE_LIPSCHITZ_LIMIT {
        let edges: Vec<(Vertex, Vertex)> = g.edges().collect();
        let worst = edges
            .par_iter()
            .map(|&(u, v)| {
                // adjacent base vertices are adjacent in the electrification
                let row_y = y.distances_from(map.psi(u))?;
                Ok(1 + row_y[y.id_of(map.psi(v))? as usize])
            })
            .collect::<Result<Vec<u32>>>()?;
        Some(worst.into_iter().max().unwrap_or(0))
    } else {
        None
    };

    let eg_bottleneck = bottleneck_constant(&eg.graph, BOTTLENECK_PAIRS, seed);
    let peripheral_bottlenecks: Vec<u32> = fam
        .iter()
        .map(|m| Ok(bottleneck_constant(&g.induced(m)?.graph, BOTTLENECK_PAIRS, seed)))
        .collect::<Result<_>>()?;
    let eg_quasi_tree = eg_bottleneck <= BOTTLENECK_THRESHOLD;
    let peripherals_quasi_tree = peripheral_bottlenecks.iter().all(|&b| b <= BOTTLENECK_THRESHOLD);

    Ok(EmbeddingReport {
        kind: "embed".into(),
        basepoint,
        basepoint_peripheral: map.home,
        theta,
        seed,
        pairs: records.len(),
        l_fit,
        c_fit: l_fit,
        violations,
        edge_lipschitz,
        bottleneck_threshold: BOTTLENECK_THRESHOLD,
        eg_bottleneck,
        peripheral_bottlenecks,
        eg_quasi_tree,
        peripherals_quasi_tree,
        product_of_quasi_trees: eg_quasi_tree && peripherals_quasi_tree,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrify::electrify;
    use crate::generators;
    use crate::quasitree::{build_quasitree, EdgeRule};

    fn ring_with_tails() -> (MetricGraph, SubgraphFamily) {
        // C_12 on 0..12, tails 0-12 and 6-13
        let mut edges: Vec<(Vertex, Vertex)> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
        edges.extend([(0, 12), (6, 13)]);
        (MetricGraph::new(14, &edges).unwrap(), SubgraphFamily::new(vec![(0..12).collect()]))
    }

    #[test]
    fn enlargement_over_an_antipodal_crossing() {
        let (g, fam) = ring_with_tails();
        let eg = electrify(&g, &fam).unwrap();
        let geo = eg.graph.geodesic(12, 13).unwrap();
        assert_eq!(geo.len(), 4);
        let big = enlargement(&eg, &fam, &geo).unwrap();
        assert_eq!(big.len(), 8);
        assert_eq!((big.first(), big.last()), (12, 13));
        assert!(big.vertices().iter().all(|&v| !eg.is_cone(v)));

        let plain = eg.graph.geodesic(12, 1).unwrap();
        assert_eq!(enlargement(&eg, &fam, &plain).unwrap(), plain);
        let from_cone = eg.graph.geodesic(eg.cone_of[0], 13).unwrap();
        assert!(enlargement(&eg, &fam, &from_cone).is_err());
    }

    #[test]
    fn psi_traces_the_last_cone() {
        let (g, fam) = ring_with_tails();
        let eg = electrify(&g, &fam).unwrap();
        let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
        let home = Tagged { peripheral: 0, vertex: 0 };
        assert_eq!(psi(&eg, &fam, &y, 0, 0, 3).unwrap(), home);
        // 0 -> cone -> 6 -> 13
        assert_eq!(psi(&eg, &fam, &y, 0, 13, 3).unwrap(), Tagged { peripheral: 0, vertex: 6 });
        // 0 -> 1 meets no cone
        assert_eq!(psi(&eg, &fam, &y, 0, 1, 3).unwrap(), home);
        assert_eq!(lambda(&eg, &fam, &y, 0, 12, 3).unwrap(), (12, home));
        assert!(psi(&eg, &fam, &y, 12, 1, 3).is_err());
        assert!(psi(&eg, &fam, &y, 0, 1, 4).is_err());
    }

    #[test]
    fn psi_lies_in_its_peripheral() {
        let (g, fam) = generators::tree_of_rings(2, 3, 12).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
        let map = LambdaMap::new(&eg, &fam, &y, 0, 3).unwrap();
        for v in g.vertices() {
            let t = map.psi(v);
            assert!(fam.contains(t.peripheral, t.vertex));
            assert_eq!(t, psi(&eg, &fam, &y, 0, v, 3).unwrap());
        }
    }

    #[test]
    fn pair_constant_is_tight() {
        assert_eq!(pair_constant(0, 0), 1.0);
        assert_eq!(pair_constant(5, 5), 1.0);
        // 10/L - L <= 1 needs L >= (-1 + sqrt 41)/2
        let l = pair_constant(10, 1);
        assert!((l - (-1.0 + 41f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(within_bounds(10, 1, l, l));
        assert!(!within_bounds(10, 1, l - 1e-3, l - 1e-3));
        assert_eq!(pair_constant(1, 9), 4.5);
    }

    #[test]
    fn fit_is_deterministic_and_tight() {
        let (g, fam) = generators::tree_of_rings(2, 2, 12).unwrap();
        let eg = electrify(&g, &fam).unwrap();
        let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
        let a = qi_fit(&eg, &fam, &y, 0, 3, 300, 11).unwrap();
        let b = qi_fit(&eg, &fam, &y, 0, 3, 300, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        assert!(a.l_fit >= 1.0);
        assert!(a.records.iter().all(|r| r.d_eg <= r.d_g));
        assert!(a.edge_lipschitz.is_some());
        assert!(qi_fit(&eg, &fam, &y, 0, 3, 0, 11).is_err());
        assert!(qi_fit(&eg, &fam, &y, 0, 4, 10, 11).is_err());
    }

    #[test]
    fn bottleneck_of_trees_and_cycles() {
        let t = generators::tree(3, 3).unwrap();
        assert_eq!(bottleneck_constant(&t, 1000, 1), 0);
        let c = generators::cycle(24).unwrap();
        assert!(bottleneck_constant(&c, 1000, 1) >= 5);
    }
}
