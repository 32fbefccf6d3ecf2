use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use relhyp::asdim::{self, CoverParams, Strategy};
use relhyp::electrify::{penetration_profile, PeripheralMetrics, PenetrationOptions};
use relhyp::embedding::{enlargement_with, qi_fit};
use relhyp::generators::GeneratorSpec;
use relhyp::hyperbolicity::{four_point_delta, DeltaOptions};
use relhyp::projections::{axiom_check, AxiomOptions, ProjectionTable, Theta};
use relhyp::quasitree::{rule_diff, QuasiTreeSpace};
use relhyp::{build_quasitree, electrify, EdgeRule, ElectrifiedGraph, MetricGraph, SubgraphFamily, Vertex};

use crate::output::{sidecar, CliError, CliResult, Run};
use crate::*;

pub fn run(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Electrify(a) => electrify_cmd(a),
        Command::Delta(a) => delta(a),
        Command::Axioms(a) => axioms(a),
        Command::Quasitree(a) => quasitree(a),
        Command::Embed(a) => embed(a),
        Command::Enlarge(a) => enlarge(a),
        Command::Cover(a) => cover(a),
        Command::Profile(a) => profile(a),
        Command::Penetration(a) => penetration(a),
        Command::Bounds(a) => bounds(a),
        Command::Report(a) => report(a),
    }
}

fn load_graph(run: &mut Run, path: &Path) -> CliResult<MetricGraph> {
    Ok(MetricGraph::from_json(&run.read(path)?)?)
}

fn load_family(run: &mut Run, g: &MetricGraph, path: &Path) -> CliResult<SubgraphFamily> {
    let fam = SubgraphFamily::from_json(&run.read(path)?)?;
    fam.validate(g)?;
    Ok(fam)
}

fn parse<T: std::str::FromStr<Err = relhyp::Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse()?)
}

fn resolve_theta(g: &MetricGraph, fam: &SubgraphFamily, theta: &str) -> CliResult<u32> {
    let theta: Theta = parse(theta)?;
    let r = match theta {
        Theta::Auto => ProjectionTable::build(g, fam).r_measured(),
        Theta::Fixed(_) => 0,
    };
    Ok(theta.resolve(r)?)
}

fn gen(a: &GenArgs) -> CliResult<()> {
    let mut run = Run::new("gen", a, &[]);
    let mut params: Vec<(&str, u64)> = Vec::new();
    let or = |v: Option<u64>, d: u64| v.unwrap_or(d);
    match a.kind.as_str() {
        "path" => params.push(("n", or(a.n, 100))),
        "cycle" => params.push(("n", or(a.n, 12))),
        "grid" => {
            let w = or(a.width, 8);
            params.extend([("width", w), ("height", or(a.height, w))]);
        }
        "tree" => params.extend([("depth", or(a.depth, 8)), ("valence", or(a.valence, 3))]),
        "tree-of-rings" => params.extend([
            ("depth", or(a.depth, 3)),
            ("valence", or(a.valence, 3)),
            ("ring_len", or(a.ring_len, 12)),
        ]),
        "farey" => params.push(("radius", or(a.radius, 5))),
        "tower" => params.extend([
            ("levels", or(a.levels, 3)),
            ("depth", or(a.depth, 2)),
            ("valence", or(a.valence, 2)),
            ("ring_len", or(a.ring_len, 6)),
        ]),
        other => return Err(CliError::Invalid(format!("unknown generator `{other}`"))),
    }
    let spec = GeneratorSpec::new(&a.kind, &params);
    let instances = spec.generate()?;
    let count = instances.len();
    for (i, inst) in instances.iter().enumerate() {
        let graph_path = if count == 1 || i + 1 == count {
            a.out.clone()
        } else {
            sidecar(&a.out, &format!("level{}.json", i + 1))
        };
        let mut json = inst.graph.to_json_value();
        json.generator = Some(spec.clone());
        run.write(&graph_path, &serde_json::to_string_pretty(&json).map_err(|e| CliError::Internal(e.to_string()))?)?;
        if !inst.family.is_empty() {
            run.write(&sidecar(&graph_path, "family.json"), &inst.family.to_json())?;
        }
        if a.dot {
            run.write(&sidecar(&graph_path, "dot"), &inst.graph.to_dot())?;
        }
        println!(
            "{} level {}: {} vertices, {} edges, {} peripherals",
            a.kind,
            i + 1,
            inst.graph.n(),
            inst.graph.edge_count(),
            inst.family.len()
        );
    }
    run.finish()
}

fn electrify_cmd(a: &ElectrifyArgs) -> CliResult<()> {
    let mut run = Run::new("electrify", a, &[]);
    let g = load_graph(&mut run, &a.graph)?;
    let fam = load_family(&mut run, &g, &a.family)?;
    let eg = electrify(&g, &fam)?;
    println!(
        "electrified: {} base vertices, {} cones, {} edges, diameter {}",
        eg.base_size,
        eg.cone_of.len(),
        eg.graph.edge_count(),
        eg.graph.diameter()
    );
    if let Some(out) = &a.out {
        run.write(out, &eg.to_json())?;
    }
    run.finish()
}

fn delta(a: &DeltaArgs) -> CliResult<()> {
    let mut run = Run::new("delta", a, &[a.seed]);
    let g = load_graph(&mut run, &a.graph)?;
    let opts = match a.mode.as_str() {
        "exact" => DeltaOptions::exact(),
        "sampled" => DeltaOptions::sampled(a.samples, a.seed),
        other => return Err(CliError::Invalid(format!("unknown delta mode `{other}`"))),
    };
    let rep = four_point_delta(&g, &opts)?;
    println!("delta = {} ({} mode, {} tuples)", rep.delta, a.mode, rep.samples);
    run.write_json(a.out.as_deref(), &rep)?;
    run.finish()
}

fn axioms(a: &AxiomsArgs) -> CliResult<()> {
    let mut run = Run::new("axioms", a, &[a.seed]);
    let g = load_graph(&mut run, &a.graph)?;
    let fam = load_family(&mut run, &g, &a.family)?;
    let opts = AxiomOptions { theta: parse(&a.theta)?, triple_budget: a.triples, seed: a.seed, ..Default::default() };
    let rep = axiom_check(&g, &fam, &opts)?;
    println!(
        "R_measured = {}, theta = {}{}, axiom-2 violations = {} over {} triples ({}), axiom-3 max = {}",
        rep.r_measured,
        rep.theta,
        if rep.theta_auto { " (auto)" } else { "" },
        rep.axiom2_violations.len(),
        rep.triples_tested,
        if rep.triples_exhaustive { "exhaustive" } else { "sampled" },
        rep.axiom3_max
    );
    run.write_json(a.out.as_deref(), &rep)?;
    run.finish()
}

fn quasitree(a: &QuasitreeArgs) -> CliResult<()> {
    let mut run = Run::new("quasitree", a, &[]);
    let g = load_graph(&mut run, &a.graph)?;
    let fam = load_family(&mut run, &g, &a.family)?;
    let theta = resolve_theta(&g, &fam, &a.theta)?;
    let rule: EdgeRule = parse(&a.rule)?;
    let other = match rule {
        EdgeRule::Projection => EdgeRule::Widepoint,
        EdgeRule::Widepoint => EdgeRule::Projection,
    };
    let (y, alt) = rayon::join(|| build_quasitree(&g, &fam, theta, rule), || build_quasitree(&g, &fam, theta, other));
    let (y, alt) = (y?, alt?);
    let diff = match rule {
        EdgeRule::Projection => rule_diff(&y, &alt),
        EdgeRule::Widepoint => rule_diff(&alt, &y),
    };
    println!(
        "quasi-tree ({:?} rule, theta {theta}): {} vertices, {} cross-edges, connected = {}; rule diff: {} common, {} projection-only, {} widepoint-only",
        rule,
        y.graph.n(),
        y.cross_edges.len(),
        y.is_connected(),
        diff.common,
        diff.only_projection.len(),
        diff.only_widepoint.len()
    );
    if let Some(out) = &a.out {
        run.write(out, &y.to_json())?;
        let diff_path = a.diff.clone().unwrap_or_else(|| sidecar(out, "diff.json"));
        run.write_json(Some(&diff_path), &diff)?;
    } else if let Some(d) = &a.diff {
        run.write_json(Some(d), &diff)?;
    }
    run.finish()
}

fn embed(a: &EmbedArgs) -> CliResult<()> {
    let mut run = Run::new("embed", a, &[a.seed]);
    let g = load_graph(&mut run, &a.graph)?;
    let fam = load_family(&mut run, &g, &a.family)?;
    let theta = resolve_theta(&g, &fam, &a.theta)?;
    let eg = electrify(&g, &fam)?;
    let y = match &a.y {
        Some(p) => QuasiTreeSpace::from_json(&run.read(p)?)?,
        None => build_quasitree(&g, &fam, theta, parse(&a.rule)?)?,
    };
    let rep = qi_fit(&eg, &fam, &y, a.basepoint, theta, a.pairs, a.seed)?;
    println!(
        "L_fit = C_fit = {:.4} over {} pairs, violations = {}, edge Lipschitz = {}, product of quasi-trees = {}",
        rep.l_fit,
        rep.pairs,
        rep.violations,
        rep.edge_lipschitz.map_or("not measured".into(), |l| l.to_string()),
        rep.product_of_quasi_trees
    );
    run.write_json(a.out.as_deref(), &rep)?;
    run.finish()
}

#[derive(Serialize)]
struct SingleEnlargement {
    kind: &'static str,
    from: Vertex,
    to: Vertex,
    d_g: u32,
    eg_path: Vec<Vertex>,
    path: Vec<Vertex>,
}

#[derive(Serialize)]
struct EnlargementSweep {
    kind: &'static str,
    pairs: usize,
    bound_slope: u32,
    bound_intercept: u32,
    over_bound: usize,
    max_ratio: f64,
    max_excess: u32,
    worst: Option<(Vertex, Vertex)>,
}

const SWEEP_LIMIT: usize = 2000;

fn enlarge(a: &EnlargeArgs) -> CliResult<()> {
    let mut run = Run::new("enlarge", a, &[]);
    let g = load_graph(&mut run, &a.graph)?;
    let fam = load_family(&mut run, &g, &a.family)?;
    let eg = electrify(&g, &fam)?;
    let metrics = PeripheralMetrics::new(&g, &fam)?;
    if let (Some(u), Some(v)) = (a.from, a.to) {
        g.check_vertex(u)?;
        g.check_vertex(v)?;
        let geo = eg.graph.geodesic(u, v)?;
        let big = enlargement_with(&eg, &metrics, &geo)?;
        let d_g = g.shortest_distance(u, v)?;
        println!("{u} -> {v}: electrified length {}, enlarged length {}, d_G = {d_g}", geo.len(), big.len());
        let rep = SingleEnlargement {
            kind: "enlarge",
            from: u,
            to: v,
            d_g,
            eg_path: geo.into_vertices(),
            path: big.into_vertices(),
        };
        run.write_json(a.out.as_deref(), &rep)?;
        return run.finish();
    }
    if g.n() > SWEEP_LIMIT {
        return Err(relhyp::Error::SizeGuard { what: "enlargement sweep vertices", size: g.n(), limit: SWEEP_LIMIT }.into());
    }
    let rep = enlargement_sweep(&g, &eg, &metrics)?;
    println!(
        "{} pairs: max length/d_G = {:.3}, max excess = {}, {} over 4d+8",
        rep.pairs, rep.max_ratio, rep.max_excess, rep.over_bound
    );
    run.write_json(a.out.as_deref(), &rep)?;
    run.finish()
}

fn enlargement_sweep(g: &MetricGraph, eg: &ElectrifiedGraph, metrics: &PeripheralMetrics) -> CliResult<EnlargementSweep> {
    // (length, d_G, u, v) per ordered pair u != v
    let rows: Vec<Vec<(u32, u32, Vertex, Vertex)>> = g
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&v| {
            let to_v = eg.graph.bfs(v);
            let dg = g.bfs(v);
            g.vertices()
                .filter(|&u| u != v)
                .map(|u| {
                    let geo = eg.graph.geodesic_along(u, &to_v).expect("electrification is connected");
                    let big = enlargement_with(eg, metrics, &geo)?;
                    Ok((big.len() as u32, dg[u as usize], u, v))
                })
                .collect::<relhyp::Result<Vec<_>>>()
        })
        .collect::<relhyp::Result<_>>()?;
    let mut sweep = EnlargementSweep {
        kind: "enlarge",
        pairs: 0,
        bound_slope: 4,
        bound_intercept: 8,
        over_bound: 0,
        max_ratio: 1.0,
        max_excess: 0,
        worst: None,
    };
    for &(len, d, u, v) in rows.iter().flatten() {
        sweep.pairs += 1;
        if len > 4 * d + 8 {
            sweep.over_bound += 1;
        }
        let ratio = len as f64 / d as f64;
        if ratio > sweep.max_ratio {
            sweep.max_ratio = ratio;
            sweep.worst = Some((u, v));
        }
        sweep.max_excess = sweep.max_excess.max(len - d);
    }
    Ok(sweep)
}

fn cover_params(net_factor: u32) -> CoverParams {
    CoverParams { net_factor }
}

fn cover(a: &CoverArgs) -> CliResult<()> {
    let mut run = Run::new("cover", a, &[]);
    let g = load_graph(&mut run, &a.graph)?;
    let c = match &a.check {
        Some(path) => asdim::Cover::from_json(&g, &run.read(path)?)?,
        None => asdim::cover_at_scale(&g, a.scale, parse::<Strategy>(&a.strategy)?, &cover_params(a.net_factor))?,
    };
    println!(
        "R = {}: {} blocks, D = {}, multiplicity = {} (witness vertex {}), asdim estimate {}",
        c.r,
        c.blocks.len(),
        c.diameter,
        c.multiplicity,
        c.witness,
        c.asdim_estimate()
    );
    if let Some(out) = &a.out {
        run.write(out, &c.to_json())?;
    }
    run.finish()
}

fn profile(a: &ProfileArgs) -> CliResult<()> {
    let mut run = Run::new("profile", a, &[]);
    let text = run.read(&a.graph)?;
    let g = MetricGraph::from_json(&text)?;
    let id = crate::output::hash_hex(text.as_bytes())[..16].to_string();
    let prof = asdim::dim_profile(&g, &id, &a.scales, parse(&a.strategy)?, &cover_params(a.net_factor))?;
    for row in &prof.rows {
        println!("R = {:>3}  D = {:>4}  multiplicity = {}", row.r, row.diameter, row.multiplicity);
    }
    println!("({})", prof.caveat);
    run.write_json(a.out.as_deref(), &prof)?;
    if let Some(csv) = &a.csv {
        run.write(csv, &prof.to_csv())?;
    }
    run.finish()
}

fn penetration(a: &PenetrationArgs) -> CliResult<()> {
    let mut run = Run::new("penetration", a, &[a.seed]);
    let eg = ElectrifiedGraph::from_json(&run.read(&a.eg)?)?;
    let opts = PenetrationOptions {
        l: a.l,
        samples: a.samples,
        seed: a.seed,
        depth_threshold: a.depth_threshold,
        ..Default::default()
    };
    let rep = penetration_profile(&eg, &opts)?;
    println!(
        "p({}) estimate = {} ({} accepted paths, {} deep-crossing misses, {} records)",
        rep.l,
        rep.p_estimate,
        rep.accepted_paths,
        rep.misses,
        rep.records.len()
    );
    run.write_json(a.out.as_deref(), &rep)?;
    run.finish()
}

fn bounds(a: &BoundsArgs) -> CliResult<()> {
    let mut run = Run::new("bounds", a, &[]);
    let b = asdim::paper_bounds(a.genus, a.punctures)?;
    println!("genus = {}", b.genus);
    println!("punctures = {}", b.punctures);
    println!("chi = {}", b.chi);
    println!("bound_curvegraph = {}", b.bound_curvegraph);
    println!("bound_Egamma = {}", b.bound_egamma);
    println!("bound_edg = {}", b.bound_edg);
    println!("peripheral_bound = {}", b.peripheral_bound);
    println!("bound_diskgraph = {}", b.bound_diskgraph);
    println!("hierarchy_total = {}", b.hierarchy_total);
    run.write_json(a.out.as_deref(), &b)?;
    run.finish()
}

fn summarize(v: &Value) -> (String, String) {
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("unknown").to_string();
    let f = |key: &str| v.get(key).map(|x| x.to_string()).unwrap_or_else(|| "?".into());
    let len = |key: &str| v.get(key).and_then(Value::as_array).map_or(0, Vec::len);
    let summary = match kind.as_str() {
        "delta" => format!("delta = {} ({})", f("delta"), v["mode"].as_str().unwrap_or("?")),
        "axioms" => format!(
            "R = {}, theta = {}, axiom-2 violations = {}, triples = {}",
            f("R_measured"),
            f("theta"),
            len("axiom2_violations"),
            f("triples_tested")
        ),
        "embed" => format!("L_fit = {}, violations = {}, pairs = {}", f("L_fit"), f("violations"), f("pairs")),
        "penetration" => format!("p estimate = {} at L = {}", f("p_estimate"), f("l")),
        "enlarge" => match v.get("pairs") {
            Some(_) => format!("max ratio = {}, over 4d+8 = {}", f("max_ratio"), f("over_bound")),
            None => format!("{} -> {}, length {}", f("from"), f("to"), len("path").saturating_sub(1)),
        },
        "profile" => v["rows"]
            .as_array()
            .map(|rows| {
                rows.iter()
                    .map(|r| format!("R{}: m={}", r["R"], r["multiplicity"]))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_default(),
        "bounds" => format!(
            "g = {}, chi = {}, diskgraph = {}, edg = {}",
            f("genus"),
            f("chi"),
            f("bound_diskgraph"),
            f("bound_edg")
        ),
        "rule_diff" => format!(
            "{} common, {} projection-only, {} widepoint-only",
            f("common"),
            len("only_projection"),
            len("only_widepoint")
        ),
        _ if v.get("blocks").is_some() => {
            return ("cover".into(), format!("R = {}, D = {}, multiplicity = {}", f("R"), f("D"), f("multiplicity")))
        }
        _ => "no summary for this kind".into(),
    };
    (kind, summary)
}

fn report(a: &ReportArgs) -> CliResult<()> {
    let mut run = Run::new("report", a, &[]);
    let mut table = String::from("| report | kind | summary |\n|---|---|---|\n");
    for path in &a.reports {
        let v: Value = serde_json::from_str(&run.read(path)?).map_err(|e| CliError::Core(e.into()))?;
        let (kind, summary) = summarize(&v);
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        table.push_str(&format!("| {name} | {kind} | {summary} |\n"));
    }
    print!("{table}");
    if let Some(out) = &a.out {
        run.write(out, &table)?;
    }
    run.finish()
}
