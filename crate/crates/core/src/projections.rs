//! Nearest-point projections onto peripherals, triple distances
//! `d_a(b, c)`, and the three projection axioms.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::electrify::SubgraphFamily;
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex};

/// Full argmin set of `d(x, h)` over `h ∈ H`, sorted.
pub fn project(g: &MetricGraph, h: &[Vertex], x: Vertex) -> Result<Vec<Vertex>> {
    if h.is_empty() {
        return Err(Error::input("cannot project onto an empty set"));
    }
    g.check_vertex(x)?;
    for &v in h {
        g.check_vertex(v)?;
    }
    Ok(argmin_set(&g.bfs(x), h))
}

fn argmin_set(row: &[u32], h: &[Vertex]) -> Vec<Vertex> {
    let best = h.iter().map(|&v| row[v as usize]).min().unwrap_or(u32::MAX);
    let mut out: Vec<Vertex> = h.iter().copied().filter(|&v| row[v as usize] == best).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `Π_{H_c}(H_d)`: union of the projections of every vertex of `H_d`.
pub fn projection_of_set(g: &MetricGraph, onto: &[Vertex], from: &[Vertex]) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = from
        .par_iter()
        .flat_map_iter(|&y| argmin_set(&g.bfs(y), onto))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Diameter of `Π_{H_c}(H_d)` in the metric of `g`.
pub fn proj_set_diameter(g: &MetricGraph, fam: &SubgraphFamily, c: usize, d: usize) -> Result<u32> {
    fam.check_index(c)?;
    fam.check_index(d)?;
    if c == d {
        return Err(Error::input("projection diameter needs two distinct peripherals"));
    }
    Ok(g.set_diameter(&projection_of_set(g, fam.member(c), fam.member(d))))
}

/// `d_a(b, c) = diam(Π_a(H_b) ∪ Π_a(H_c))`.
pub fn triple_distance(g: &MetricGraph, fam: &SubgraphFamily, a: usize, b: usize, c: usize) -> Result<u32> {
    for i in [a, b, c] {
        fam.check_index(i)?;
    }
    if a == b || b == c || a == c {
        return Err(Error::input("triple distance needs three distinct peripherals"));
    }
    let mut u = projection_of_set(g, fam.member(a), fam.member(b));
    u.extend(projection_of_set(g, fam.member(a), fam.member(c)));
    u.sort_unstable();
    u.dedup();
    Ok(g.set_diameter(&u))
}

/// All projections `Π_a(H_b)` of a family, plus distance rows for every
/// vertex that occurs in one of them, so triple distances are table
/// lookups.
pub struct ProjectionTable {
    m: usize,
    proj: Vec<Vec<Vertex>>,
    rows: HashMap<Vertex, Vec<u32>>,
    dist_to: Vec<Vec<u32>>,
}

impl ProjectionTable {
    pub fn build(g: &MetricGraph, fam: &SubgraphFamily) -> Self {
        let m = fam.len();
        // every vertex of every member projects onto every member
        let mut sources: Vec<Vertex> = fam.iter().flatten().copied().collect();
        sources.sort_unstable();
        sources.dedup();
        let owners: HashMap<Vertex, Vec<usize>> = {
            let mut o: HashMap<Vertex, Vec<usize>> = HashMap::new();
            for (b, mem) in fam.iter().enumerate() {
                for &v in mem {
                    o.entry(v).or_default().push(b);
                }
            }
            o
        };
        let per_source: Vec<(Vertex, Vec<Vec<Vertex>>)> = sources
            .par_iter()
            .map(|&y| {
                let row = g.bfs(y);
                (y, fam.iter().map(|h| argmin_set(&row, h)).collect())
            })
            .collect();
        let mut proj = vec![Vec::new(); m * m];
        for (y, onto) in per_source {
            for &b in &owners[&y] {
                for (a, set) in onto.iter().enumerate() {
                    if a != b {
                        proj[a * m + b].extend_from_slice(set);
                    }
                }
            }
        }
        for p in &mut proj {
            p.sort_unstable();
            p.dedup();
        }
        let mut needed: Vec<Vertex> = proj.iter().flatten().copied().collect();
        needed.sort_unstable();
        needed.dedup();
        let rows = needed.par_iter().map(|&v| (v, g.bfs(v))).collect();
        let dist_to = fam.iter().collect::<Vec<_>>().par_iter().map(|h| g.bfs_from_set(h)).collect();
        ProjectionTable { m, proj, rows, dist_to }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `Π_a(H_b)`; empty when `a == b`.
    pub fn projection(&self, a: usize, b: usize) -> &[Vertex] {
        &self.proj[a * self.m + b]
    }

    /// Distance from every vertex to `H_b`.
    pub fn dist_to_member(&self, b: usize) -> &[u32] {
        &self.dist_to[b]
    }

    fn diameter_of(&self, sets: &[&[Vertex]]) -> u32 {
        let all: Vec<Vertex> = sets.iter().flat_map(|s| s.iter().copied()).collect();
        let mut best = 0;
        for &u in &all {
            let row = &self.rows[&u];
            for &v in &all {
                best = best.max(row[v as usize]);
            }
        }
        best
    }

    pub fn proj_diameter(&self, c: usize, d: usize) -> u32 {
        self.diameter_of(&[self.projection(c, d)])
    }

    pub fn triple(&self, a: usize, b: usize, c: usize) -> u32 {
        self.diameter_of(&[self.projection(a, b), self.projection(a, c)])
    }

    /// Max over ordered pairs `c != d` of `diam Π_c(H_d)`.
    pub fn r_measured(&self) -> u32 {
        (0..self.m)
            .flat_map(|c| (0..self.m).filter(move |&d| d != c).map(move |d| (c, d)))
            .map(|(c, d)| self.proj_diameter(c, d))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theta {
    Auto,
    Fixed(u32),
}

impl std::str::FromStr for Theta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Theta::Auto);
        }
        s.parse::<u32>()
            .map(Theta::Fixed)
            .map_err(|_| Error::input(format!("theta must be `auto` or a positive integer, got `{s}`")))
    }
}

impl Theta {
    /// `3·R + 3` for `Auto`.
    pub fn resolve(self, r_measured: u32) -> Result<u32> {
        match self {
            Theta::Auto => Ok(3 * r_measured + 3),
            Theta::Fixed(0) => Err(Error::input("theta must be > 0")),
            Theta::Fixed(t) => Ok(t),
        }
    }
}

pub const AUTO_THETA_NOTE: &str =
    "auto theta = 3*R_measured + 3 is a heuristic; no explicit constant is available for this threshold";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    /// `d_a(b,c)`, `d_b(a,c)`, `d_c(a,b)`
    pub values: [u32; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom3Count {
    pub a: usize,
    pub b: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub kind: String,
    #[serde(rename = "R_measured")]
    pub r_measured: u32,
    pub theta: u32,
    pub theta_auto: bool,
    pub theta_note: String,
    pub peripherals: usize,
    pub triples_tested: usize,
    pub triples_exhaustive: bool,
    pub axiom2_violations: Vec<TripleRecord>,
    /// Worst single value among tested triples, for context.
    pub max_triple_distance: u32,
    pub axiom3_counts: Vec<Axiom3Count>,
    pub axiom3_max: usize,
    pub axiom3_mean: f64,
    /// Largest Hausdorff distance between projections of adjacent vertices
    /// (measured additive constant of coarse Lipschitz behavior).
    pub projection_lipschitz: Option<u32>,
    pub overlapping_peripherals: usize,
    pub seed: u64,
    /// Constants the proof uses internally but which are not estimated here.
    pub unmeasured: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomOptions {
    pub theta: Theta,
    pub triple_budget: usize,
    pub seed: u64,
    /// Skip the edge-by-edge Lipschitz scan above this many vertices.
    pub lipschitz_limit: usize,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        AxiomOptions { theta: Theta::Auto, triple_budget: 5000, seed: 3, lipschitz_limit: 5000 }
    }
}

fn choose3(m: usize) -> usize {
    if m < 3 {
        0
    } else {
        m * (m - 1) * (m - 2) / 6
    }
}

pub fn axiom_check(g: &MetricGraph, fam: &SubgraphFamily, opts: &AxiomOptions) -> Result<AxiomReport> {
    if let Theta::Fixed(0) = opts.theta {
        return Err(Error::input("theta must be > 0"));
    }
    fam.validate(g)?;
    let m = fam.len();
    let table = ProjectionTable::build(g, fam);
    let r_measured = table.r_measured();
    let theta = opts.theta.resolve(r_measured)?;

    let total = choose3(m);
    let exhaustive = total <= opts.triple_budget;
    let triples: Vec<(usize, usize, usize)> = if exhaustive {
        let mut t = Vec::with_capacity(total);
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    t.push((a, b, c));
                }
            }
        }
        t
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.triple_budget)
            .map(|_| {
                let mut s = rand::seq::index::sample(&mut rng, m, 3).into_vec();
                s.sort_unstable();
                (s[0], s[1], s[2])
            })
            .collect()
    };
    let records: Vec<TripleRecord> = triples
        .par_iter()
        .map(|&(a, b, c)| TripleRecord {
            a,
            b,
            c,
            values: [table.triple(a, b, c), table.triple(b, a, c), table.triple(c, a, b)],
        })
        .collect();
    let max_triple_distance = records.iter().flat_map(|r| r.values).max().unwrap_or(0);
    let axiom2_violations: Vec<TripleRecord> = records
        .into_iter()
        .filter(|r| r.values.iter().filter(|&&v| v > theta).count() >= 2)
        .collect();

    let pair_total = m * m.saturating_sub(1) / 2;
    let pairs: Vec<(usize, usize)> = if pair_total <= opts.triple_budget {
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xA5A5);
        (0..opts.triple_budget)
            .map(|_| {
                let a = rng.gen_range(0..m);
                let mut b = rng.gen_range(0..m - 1);
                if b >= a {
                    b += 1;
                }
                (a.min(b), a.max(b))
            })
            .collect()
    };
    let axiom3_counts: Vec<Axiom3Count> = pairs
        .par_iter()
        .map(|&(a, b)| Axiom3Count {
            a,
            b,
            count: (0..m).filter(|&c| c != a && c != b && table.triple(c, a, b) > theta).count(),
        })
        .collect();
    let axiom3_max = axiom3_counts.iter().map(|x| x.count).max().unwrap_or(0);
    let axiom3_mean = if axiom3_counts.is_empty() {
        0.0
    } else {
        axiom3_counts.iter().map(|x| x.count as f64).sum::<f64>() / axiom3_counts.len() as f64
    };
    let projection_lipschitz = (g.n() <= opts.lipschitz_limit).then(|| projection_lipschitz(g, fam));

    Ok(AxiomReport {
        kind: "axioms".into(),
        r_measured,
        theta,
        theta_auto: opts.theta == Theta::Auto,
        theta_note: if opts.theta == Theta::Auto { AUTO_THETA_NOTE.into() } else { "theta fixed by caller".into() },
        peripherals: m,
        triples_tested: triples.len(),
        triples_exhaustive: exhaustive,
        axiom2_violations,
        max_triple_distance,
        axiom3_counts,
        axiom3_max,
        axiom3_mean,
        projection_lipschitz,
        overlapping_peripherals: fam.overlapping_pairs().len(),
        seed: opts.seed,
        unmeasured: vec!["R'".into(), "R''".into(), "D".into()],
    })
}

/// Max over peripherals `H_c` and edges `x-y` of the Hausdorff distance
/// between `Π_c(x)` and `Π_c(y)`.
pub fn projection_lipschitz(g: &MetricGraph, fam: &SubgraphFamily) -> u32 {
    if fam.is_empty() {
        return 0;
    }
    // projections of every vertex onto every member
    let proj: Vec<Vec<Vec<Vertex>>> = g
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            let row = g.bfs(x);
            fam.iter().map(|h| argmin_set(&row, h)).collect()
        })
        .collect();
    let mut needed: Vec<Vertex> = proj.iter().flatten().flatten().copied().collect();
    needed.sort_unstable();
    needed.dedup();
    let rows: HashMap<Vertex, Vec<u32>> = needed.par_iter().map(|&v| (v, g.bfs(v))).collect();
    let hausdorff = |p: &[Vertex], q: &[Vertex]| -> u32 {
        let one_side = |a: &[Vertex], b: &[Vertex]| {
            a.iter()
                .map(|u| b.iter().map(|&v| rows[u][v as usize]).min().unwrap_or(0))
                .max()
                .unwrap_or(0)
        };
        one_side(p, q).max(one_side(q, p))
    };
    g.edges()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(x, y)| {
            (0..fam.len())
                .map(|c| hausdorff(&proj[x as usize][c], &proj[y as usize][c]))
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn projection_basics() {
        let t = generators::tree(3, 3).unwrap();
        assert_eq!(project(&t, &[1, 4, 5], 4).unwrap(), vec![4]);
        // subtree {1,4,5,10}; vertex 2 projects to the gate 1 only
        assert_eq!(project(&t, &[1, 4, 5, 10], 2).unwrap(), vec![1]);
        assert!(project(&t, &[], 2).is_err());
    }

    #[test]
    fn grid_column_projection_matches_scan() {
        let g = generators::grid(7, 7).unwrap();
        let col: Vec<Vertex> = (0..7).map(|y| y * 7).collect();
        let corner = 6; // (6, 0)
        let got = project(&g, &col, corner).unwrap();
        let d = g.bfs(corner);
        let best = col.iter().map(|&v| d[v as usize]).min().unwrap();
        let expect: Vec<Vertex> = col.iter().copied().filter(|&v| d[v as usize] == best).collect();
        assert_eq!(got, expect);
        assert_eq!(got, vec![0]);
        let opposite = 48; // (6, 6)
        assert_eq!(project(&g, &col, opposite).unwrap(), vec![42]);
    }

    #[test]
    fn overlapping_intervals() {
        let p = generators::path(12).unwrap();
        let fam = SubgraphFamily::new(vec![(0..=6).collect(), (2..=8).collect(), (4..=10).collect()]);
        assert_eq!(proj_set_diameter(&p, &fam, 0, 1).unwrap(), 4);
        assert_eq!(proj_set_diameter(&p, &fam, 0, 2).unwrap(), 2);
        assert!(proj_set_diameter(&p, &fam, 1, 1).is_err());
        assert!(triple_distance(&p, &fam, 0, 0, 1).is_err());
        let report = axiom_check(&p, &fam, &AxiomOptions { theta: Theta::Fixed(1), ..Default::default() }).unwrap();
        assert!(!report.axiom2_violations.is_empty());
    }

    #[test]
    fn far_subtrees_have_point_gates() {
        let t = generators::tree(4, 3).unwrap();
        // three depth-2 subtrees under different children of the root
        let fam = SubgraphFamily::new(vec![vec![4, 10, 11], vec![6, 14, 15], vec![8, 18, 19]]);
        let report = axiom_check(&t, &fam, &AxiomOptions { theta: Theta::Fixed(1), ..Default::default() }).unwrap();
        assert_eq!(report.r_measured, 0);
        assert!(report.axiom2_violations.is_empty());
        assert!(axiom_check(&t, &fam, &AxiomOptions { theta: Theta::Fixed(0), ..Default::default() }).is_err());
    }

    #[test]
    fn table_matches_direct_computation() {
        let (g, fam) = generators::tree_of_rings(2, 2, 8).unwrap();
        let table = ProjectionTable::build(&g, &fam);
        for a in 0..fam.len() {
            for b in 0..fam.len() {
                if a == b {
                    continue;
                }
                assert_eq!(table.proj_diameter(a, b), proj_set_diameter(&g, &fam, a, b).unwrap());
                for c in 0..fam.len() {
                    if c != a && c != b {
                        let t = triple_distance(&g, &fam, a, b, c).unwrap();
                        assert_eq!(table.triple(a, b, c), t);
                        assert_eq!(t, triple_distance(&g, &fam, a, c, b).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn theta_parsing() {
        assert_eq!("auto".parse::<Theta>().unwrap(), Theta::Auto);
        assert_eq!("7".parse::<Theta>().unwrap(), Theta::Fixed(7));
        assert!("x".parse::<Theta>().is_err());
        assert_eq!(Theta::Auto.resolve(2).unwrap(), 9);
    }
}
