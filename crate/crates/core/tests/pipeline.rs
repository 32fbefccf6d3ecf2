use relhyp::asdim::{cover_at_scale, dim_profile, CoverParams, Strategy};
use relhyp::embedding::{enlargement_with, qi_fit, LambdaMap};
use relhyp::electrify::PeripheralMetrics;
use relhyp::generators;
use relhyp::hyperbolicity::{four_point_delta, DeltaOptions};
use relhyp::projections::{axiom_check, AxiomOptions, ProjectionTable, Theta};
use relhyp::quasitree::{rule_diff, y_distance, wide_points};
use relhyp::{build_quasitree, electrify, EdgeRule, MetricGraph, SubgraphFamily, Tagged, Vertex};

fn rings(depth: usize, valence: usize, len: usize) -> (MetricGraph, SubgraphFamily) {
    generators::tree_of_rings(depth, valence, len).unwrap()
}

#[test]
fn projection_rule_edges_reverified() {
    let (g, fam) = rings(2, 3, 12);
    let table = ProjectionTable::build(&g, &fam);
    for theta in [1, 3, 4] {
        let y = build_quasitree(&g, &fam, theta, EdgeRule::Projection).unwrap();
        let present: std::collections::BTreeSet<(usize, usize)> = y.cross_edges.iter().map(|e| (e.c, e.d)).collect();
        for c in 0..fam.len() {
            for d in c + 1..fam.len() {
                let blocked = (0..fam.len()).any(|a| a != c && a != d && table.triple(a, c, d) >= 2 * theta);
                assert_eq!(present.contains(&(c, d)), !blocked, "theta {theta} pair {c},{d}");
            }
        }
    }
}

#[test]
fn y_distance_matches_floyd_warshall() {
    let (g, fam) = rings(2, 2, 8);
    let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
    assert!(y.is_connected());
    let n = y.graph.n();
    let mut d = vec![vec![u32::MAX / 4; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (u, v) in y.graph.edges() {
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
    for p in 0..n as Vertex {
        for q in (0..n as Vertex).step_by(3) {
            assert_eq!(y_distance(&y, y.tag_of(p), y.tag_of(q)).unwrap(), d[p as usize][q as usize]);
        }
    }
    for e in &y.cross_edges {
        let a = Tagged { peripheral: e.c, vertex: e.x_cd };
        let b = Tagged { peripheral: e.d, vertex: e.x_dc };
        assert_eq!(y_distance(&y, a, b).unwrap(), 1);
    }
}

#[test]
fn both_rules_share_vertices() {
    let (g, fam) = rings(3, 3, 12);
    let axioms = axiom_check(&g, &fam, &AxiomOptions { theta: Theta::Auto, triple_budget: 10_000, ..Default::default() }).unwrap();
    let a = build_quasitree(&g, &fam, axioms.theta, EdgeRule::Projection).unwrap();
    let b = build_quasitree(&g, &fam, axioms.theta, EdgeRule::Widepoint).unwrap();
    let diff = rule_diff(&a, &b);
    assert!(diff.same_vertex_set);
    assert_eq!(diff.common + diff.only_projection.len(), a.cross_edges.len());
    assert_eq!(diff.common + diff.only_widepoint.len(), b.cross_edges.len());
    assert!(a.is_connected() && b.is_connected());
}

#[test]
fn small_peripherals_give_a_near_tree() {
    // triangles hung on a tree
    let (g, fam) = rings(2, 2, 3);
    assert!(fam.iter().all(|m| m.len() <= 3));
    let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
    let delta = four_point_delta(&y.graph, &DeltaOptions::exact()).unwrap().delta;
    assert!(delta.as_f64() <= 2.0, "delta {delta}");
}

#[test]
fn canonical_geodesics_enlarge_boundedly() {
    let (g, fam) = rings(2, 2, 12);
    let eg = electrify(&g, &fam).unwrap();
    let metrics = PeripheralMetrics::new(&g, &fam).unwrap();
    for u in g.vertices().step_by(3) {
        let dg = g.bfs(u);
        for v in g.vertices() {
            let row = eg.graph.bfs(v);
            let geo = eg.graph.geodesic_along(u, &row).unwrap();
            let big = enlargement_with(&eg, &metrics, &geo).unwrap();
            assert_eq!((big.first(), big.last()), (u, v));
            assert!(big.vertices().iter().all(|&w| (w as usize) < eg.base_size));
            assert!(big.len() as u32 >= dg[v as usize]);
            assert!(big.len() as u32 <= 4 * dg[v as usize] + 8);
            // at theta 1 every cone visit counts as wide
            let wide = wide_points(&eg, &geo, 1).unwrap();
            assert_eq!(wide.len(), geo.vertices().iter().filter(|&&w| eg.is_cone(w)).count());
        }
    }
}

#[test]
fn embedding_invariants() {
    let (g, fam) = rings(2, 3, 12);
    let eg = electrify(&g, &fam).unwrap();
    let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
    let map = LambdaMap::new(&eg, &fam, &y, 0, 3).unwrap();
    assert_eq!(map.psi(0), Tagged { peripheral: 0, vertex: 0 });
    let rep = qi_fit(&eg, &fam, &y, 0, 3, 500, 11).unwrap();
    assert_eq!(rep.violations, 0);
    for r in &rep.records {
        assert_eq!(r.d_eg, eg.graph.bfs(r.y)[r.z as usize]);
        assert_eq!(r.d_product, r.d_eg + r.d_y);
    }
    // pairs inside one ring: the quasi-tree term recovers the ring metric
    let ring = fam.member(4);
    let sub = g.induced(ring).unwrap();
    for &a in ring {
        for &b in ring {
            let (pa, pb) = (map.psi(a), map.psi(b));
            let dy = y_distance(&y, pa, pb).unwrap() as i64;
            let intrinsic = sub.graph.bfs(sub.local(a).unwrap())[sub.local(b).unwrap() as usize] as i64;
            assert!((dy - intrinsic).abs() <= 4, "{a} {b}: {dy} vs {intrinsic}");
        }
    }
}

#[test]
fn tree_with_an_edge_peripheral_fits_exactly() {
    // coning a single edge adds no shortcut, so Ψ is constant and the
    // product distance is the tree distance
    let g = generators::tree(3, 3).unwrap();
    let fam = SubgraphFamily::new(vec![vec![0, 1]]);
    let eg = electrify(&g, &fam).unwrap();
    let y = build_quasitree(&g, &fam, 2, EdgeRule::Projection).unwrap();
    let rep = qi_fit(&eg, &fam, &y, 0, 2, 400, 5).unwrap();
    assert_eq!(rep.l_fit, 1.0);
    assert!(rep.records.iter().all(|r| r.d_y == 0 && r.d_product == r.d_g));
    assert_eq!(rep.violations, 0);
}

#[test]
fn profiles_of_y_and_trees() {
    let (g, fam) = rings(2, 3, 12);
    let y = build_quasitree(&g, &fam, 3, EdgeRule::Projection).unwrap();
    let prof = dim_profile(&y.graph, "Y", &[1, 2, 4], Strategy::NetVoronoi, &CoverParams::default()).unwrap();
    assert_eq!(prof.rows.len(), 3);
    assert!(prof.caveat.contains("desk-scale"));
    let t = generators::tree(6, 3).unwrap();
    for r in [1, 2, 4] {
        let c = cover_at_scale(&t, r, Strategy::NetVoronoi, &CoverParams::default()).unwrap();
        assert!(c.blocks.iter().all(|b| !b.is_empty()));
    }
}
