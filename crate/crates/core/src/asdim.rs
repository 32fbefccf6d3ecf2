//! Bounded covers at a fixed scale, their multiplicity, and the closed-form
//! dimension bounds for surface complexes.

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Vertex, UNREACHABLE};

pub const CAVEAT: &str =
    "desk-scale estimate: multiplicity - 1 achieved at tested scales with D/R ratio <= 8, not the asymptotic invariant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Interval,
    Brick,
    NetVoronoi,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Strategy::Interval),
            "brick" => Ok(Strategy::Brick),
            "net_voronoi" => Ok(Strategy::NetVoronoi),
            other => Err(Error::input(format!("unknown cover strategy `{other}`"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Interval => "interval",
            Strategy::Brick => "brick",
            Strategy::NetVoronoi => "net_voronoi",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    #[serde(rename = "R")]
    pub r: u32,
    pub blocks: Vec<Vec<Vertex>>,
    /// Largest block diameter measured in the ambient graph.
    #[serde(rename = "D")]
    pub diameter: u32,
    pub multiplicity: usize,
    pub witness: Vertex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    /// Colour of each block in the net_voronoi construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<Vec<usize>>,
    #[serde(default)]
    pub caveat: String,
}

#[derive(Deserialize)]
struct CoverFile {
    #[serde(rename = "R")]
    r: u32,
    blocks: Vec<Vec<Vertex>>,
}

impl Cover {
    /// Builds a cover from raw blocks, recomputing diameter and
    /// multiplicity.
    pub fn from_blocks(g: &MetricGraph, r: u32, mut blocks: Vec<Vec<Vertex>>) -> Result<Self> {
        for b in &mut blocks {
            b.sort_unstable();
            b.dedup();
            for &v in b.iter() {
                g.check_vertex(v)?;
            }
        }
        blocks.retain(|b| !b.is_empty());
        let (multiplicity, witness) = multiplicity_of(g, &blocks, r)?;
        let diameter = blocks.par_iter().map(|b| g.set_diameter(b)).max().unwrap_or(0);
        Ok(Cover {
            r,
            blocks,
            diameter,
            multiplicity,
            witness,
            strategy: None,
            colors: None,
            caveat: CAVEAT.into(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cover serializes")
    }

    /// Reads `R` and `blocks` only; everything else is recomputed.
    pub fn from_json(g: &MetricGraph, text: &str) -> Result<Self> {
        let raw: CoverFile = serde_json::from_str(text)?;
        Cover::from_blocks(g, raw.r, raw.blocks)
    }

    pub fn asdim_estimate(&self) -> usize {
        self.multiplicity.saturating_sub(1)
    }
}

/// Exhaustive check: for every vertex, counts the blocks meeting its
/// `r`-ball. Returns the maximum and the smallest vertex attaining it.
pub fn multiplicity_check(g: &MetricGraph, cover: &Cover, r: u32) -> Result<(usize, Vertex)> {
    multiplicity_of(g, &cover.blocks, r)
}

fn multiplicity_of(g: &MetricGraph, blocks: &[Vec<Vertex>], r: u32) -> Result<(usize, Vertex)> {
    let n = g.n();
    let mut owners: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, b) in blocks.iter().enumerate() {
        for &v in b {
            g.check_vertex(v)?;
            if owners[v as usize].last() != Some(&(i as u32)) {
                owners[v as usize].push(i as u32);
            }
        }
    }
    let uncovered: Vec<Vertex> = (0..n as Vertex).filter(|&v| owners[v as usize].is_empty()).collect();
    if !uncovered.is_empty() {
        return Err(Error::Uncovered(uncovered));
    }
    let counts: Vec<usize> = (0..n as Vertex)
        .into_par_iter()
        .map_init(
            || (Ball::new(n), vec![false; blocks.len()], Vec::new()),
            |(ball, seen, touched), v| {
                ball.visit(g, v, r, |u| {
                    for &b in &owners[u as usize] {
                        if !seen[b as usize] {
                            seen[b as usize] = true;
                            touched.push(b);
                        }
                    }
                });
                let count = touched.len();
                for b in touched.drain(..) {
                    seen[b as usize] = false;
                }
                count
            },
        )
        .collect();
    let best = counts.iter().copied().max().unwrap_or(0);
    let witness = counts.iter().position(|&c| c == best).unwrap_or(0) as Vertex;
    Ok((best, witness))
}

/// Reusable bounded-BFS buffers.
struct Ball {
    dist: Vec<u32>,
    touched: Vec<Vertex>,
}

impl Ball {
    fn new(n: usize) -> Self {
        Ball { dist: vec![UNREACHABLE; n], touched: Vec::new() }
    }

    fn visit(&mut self, g: &MetricGraph, v: Vertex, r: u32, mut visit: impl FnMut(Vertex)) {
        self.dist[v as usize] = 0;
        self.touched.push(v);
        let mut head = 0;
        while head < self.touched.len() {
            let u = self.touched[head];
            head += 1;
            visit(u);
            let du = self.dist[u as usize];
            if du == r {
                continue;
            }
            for &w in g.neighbors(u) {
                if self.dist[w as usize] == UNREACHABLE {
                    self.dist[w as usize] = du + 1;
                    self.touched.push(w);
                }
            }
        }
        for u in self.touched.drain(..) {
            self.dist[u as usize] = UNREACHABLE;
        }
    }
}

/// Cover parameters that only some strategies read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverParams {
    /// Net separation for net_voronoi, in multiples of `R`.
    pub net_factor: u32,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams { net_factor: 2 }
    }
}

pub fn cover_at_scale(g: &MetricGraph, r: u32, strategy: Strategy, params: &CoverParams) -> Result<Cover> {
    if r < 1 {
        return Err(Error::input("scale R must be >= 1"));
    }
    let (blocks, colors) = match strategy {
        Strategy::Interval => (interval_blocks(g, r), None),
        Strategy::Brick => (brick_blocks(g, r)?, None),
        Strategy::NetVoronoi => {
            if params.net_factor < 1 {
                return Err(Error::input("net factor must be >= 1"));
            }
            let (b, c) = net_voronoi_blocks(g, r, params.net_factor);
            (b, Some(c))
        }
    };
    let mut cover = Cover::from_blocks(g, r, blocks)?;
    cover.strategy = Some(strategy);
    cover.colors = colors;
    Ok(cover)
}

/// Distance bands of width `2R` from the smallest vertex of each component.
fn interval_blocks(g: &MetricGraph, r: u32) -> Vec<Vec<Vertex>> {
    let width = 2 * r;
    let mut band_of: BTreeMap<(Vertex, u32), Vec<Vertex>> = BTreeMap::new();
    let mut done = vec![false; g.n()];
    for root in g.vertices() {
        if done[root as usize] {
            continue;
        }
        let row = g.bfs(root);
        for v in g.vertices() {
            if row[v as usize] != UNREACHABLE {
                done[v as usize] = true;
                band_of.entry((root, row[v as usize] / width)).or_default().push(v);
            }
        }
    }
    band_of.into_values().collect()
}

fn grid_coords(g: &MetricGraph) -> Result<Vec<(u32, u32)>> {
    g.vertices()
        .map(|v| {
            let parsed = g.label(v).and_then(|l| {
                let (x, y) = l.split_once(',')?;
                Some((x.trim().parse().ok()?, y.trim().parse().ok()?))
            });
            parsed.ok_or_else(|| Error::input(format!("brick strategy needs an `x,y` label on vertex {v}")))
        })
        .collect()
}

/// Staggered bricks `4R` wide and `2R` tall; odd rows shift by `2R`.
fn brick_blocks(g: &MetricGraph, r: u32) -> Result<Vec<Vec<Vertex>>> {
    let (w, h) = (4 * r, 2 * r);
    let mut bricks: BTreeMap<(u32, u32), Vec<Vertex>> = BTreeMap::new();
    for (v, (x, y)) in grid_coords(g)?.into_iter().enumerate() {
        let row = y / h;
        let shift = if row % 2 == 1 { 2 * r } else { 0 };
        bricks.entry((row, (x + shift) / w)).or_default().push(v as Vertex);
    }
    Ok(bricks.into_values().collect())
}

/// Greedy net in id order with separation `> factor*R`, Voronoi cells with
/// id tie-break, and a greedy colouring of cells lying within `2R` of each
/// other.
fn net_voronoi_blocks(g: &MetricGraph, r: u32, factor: u32) -> (Vec<Vec<Vertex>>, Vec<usize>) {
    let sep = factor * r;
    let n = g.n();
    // nearest net point so far, as (distance, net id)
    let mut near: Vec<(u32, Vertex)> = vec![(UNREACHABLE, Vertex::MAX); n];
    let mut net = Vec::new();
    for v in g.vertices() {
        if near[v as usize].0 <= sep {
            continue;
        }
        net.push(v);
        let row = g.bfs(v);
        for u in 0..n {
            let d = row[u];
            if d != UNREACHABLE && (d, v) < near[u] {
                near[u] = (d, v);
            }
        }
    }
    let index: BTreeMap<Vertex, usize> = net.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut cells: Vec<Vec<Vertex>> = vec![Vec::new(); net.len()];
    let mut cell_of = vec![0usize; n];
    for v in 0..n {
        let c = index[&near[v].1];
        cells[c].push(v as Vertex);
        cell_of[v] = c;
    }

    // cell i and j conflict when some pair of their vertices is within 2R
    let conflicts: Vec<Vec<usize>> = cells
        .par_iter()
        .map_init(
            || Ball::new(n),
            |ball, cell| {
                let mut near_cells = std::collections::BTreeSet::new();
                for &v in cell {
                    ball.visit(g, v, 2 * r, |u| {
                        near_cells.insert(cell_of[u as usize]);
                    });
                }
                near_cells.into_iter().collect()
            },
        )
        .collect();
    let mut colors = vec![usize::MAX; cells.len()];
    for i in 0..cells.len() {
        let used: std::collections::BTreeSet<usize> =
            conflicts[i].iter().filter(|&&j| j != i).map(|&j| colors[j]).collect();
        colors[i] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    (cells, colors)
}

/// Pairwise products of blocks on `gx × gy` (vertex `x*|gy| + y`), rechecked
/// on the product graph.
pub fn product_cover(gx: &MetricGraph, cx: &Cover, gy: &MetricGraph, cy: &Cover, r: u32) -> Result<Cover> {
    if cx.r != r || cy.r != r {
        return Err(Error::input(format!("covers have scales {} and {}, expected {r}", cx.r, cy.r)));
    }
    let m = gy.n() as Vertex;
    let product = gx.cartesian_product(gy)?;
    let mut blocks = Vec::with_capacity(cx.blocks.len() * cy.blocks.len());
    for bx in &cx.blocks {
        for by in &cy.blocks {
            blocks.push(bx.iter().flat_map(|&x| by.iter().map(move |&y| x * m + y)).collect());
        }
    }
    Cover::from_blocks(&product, r, blocks)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    #[serde(rename = "R")]
    pub r: u32,
    #[serde(rename = "D")]
    pub diameter: u32,
    pub multiplicity: usize,
    pub asdim_estimate: usize,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimProfile {
    pub kind: String,
    pub graph: String,
    pub rows: Vec<ProfileRow>,
    pub caveat: String,
}

impl DimProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,D,multiplicity,asdim_estimate,strategy\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", row.r, row.diameter, row.multiplicity, row.asdim_estimate, row.strategy));
        }
        out
    }
}

pub fn dim_profile(g: &MetricGraph, graph_id: &str, scales: &[u32], strategy: Strategy, params: &CoverParams) -> Result<DimProfile> {
    if scales.is_empty() {
        return Err(Error::input("scales must be nonempty"));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("scales must be strictly increasing"));
    }
    let rows = scales
        .iter()
        .map(|&r| {
            let c = cover_at_scale(g, r, strategy, params)?;
            Ok(ProfileRow { r, diameter: c.diameter, multiplicity: c.multiplicity, asdim_estimate: c.asdim_estimate(), strategy })
        })
        .collect::<Result<_>>()?;
    Ok(DimProfile { kind: "profile".into(), graph: graph_id.into(), rows, caveat: CAVEAT.into() })
}

/// `base + Σ (n_i + 1)`: one application of the relative product bound per
/// hierarchy level.
pub fn hierarchy_bound(base: i64, peripheral_dims: &[i64]) -> Result<u64> {
    if base < 0 || peripheral_dims.iter().any(|&d| d < 0) {
        return Err(Error::input("dimensions must be >= 0"));
    }
    Ok(base as u64 + peripheral_dims.iter().map(|&d| d as u64 + 1).sum::<u64>())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub kind: String,
    pub genus: u64,
    pub punctures: u64,
    pub chi: i64,
    pub bound_curvegraph: u64,
    #[serde(rename = "bound_Egamma")]
    pub bound_egamma: u64,
    pub bound_edg: u64,
    pub peripheral_bound: u64,
    pub bound_diskgraph: u64,
    /// `bound_edg` plus `3g-3` levels each adding `2g+2`.
    pub hierarchy_total: u64,
}

pub fn paper_bounds(g: i64, p: i64) -> Result<BoundsRecord> {
    if g < 2 {
        return Err(Error::domain(format!("genus must be >= 2, got {g}")));
    }
    if p < 0 {
        return Err(Error::input("punctures must be >= 0"));
    }
    let chi = 2 - 2 * g - p;
    let abs = chi.unsigned_abs();
    let (gu, pu) = (g as u64, p as u64);
    let bound_edg = abs + 3;
    let levels = vec![2 * g + 1; (3 * g - 3) as usize];
    Ok(BoundsRecord {
        kind: "bounds".into(),
        genus: gu,
        punctures: pu,
        chi,
        bound_curvegraph: 2 * abs,
        bound_egamma: abs + 2,
        bound_edg,
        peripheral_bound: 2 * gu + 1,
        bound_diskgraph: (3 * gu - 3) * (2 * gu + 2),
        hierarchy_total: hierarchy_bound(bound_edg as i64, &levels)?,
    })
}
