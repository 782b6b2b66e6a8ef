use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use toricmono::curves::{harnack_params, triangle_nodes, TriangleParam};
use toricmono::hypotheses::{check_hypotheses, ell_min, verify_theorem_combinatorics, Wedge};
use toricmono::lattice::detect_kite;
use toricmono::monodromy::{discriminant_loop, kite_monodromy, track_roots, LoopPath, ParamLoop, StepSettings};
use toricmono::obstruction::{nonsurjectivity_certificate, psi_boundary};
use toricmono::patchwork::{patch_loop, track_degeneration_nodes, DegenerationFamily};
use toricmono::{Error, LatticePoint, LatticePolygon, VERSION};

#[derive(Parser, Debug)]
#[command(name = "toricmono", version, about = "Node monodromy of rational curves on toric surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalOpts {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest interior-point domain for group computations.
    #[arg(long, global = true, default_value_t = 1000)]
    max_domain: usize,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
enum Command {
    /// Lattice data and boundary labelling of a polygon.
    Analyze { polygon: PathBuf },
    /// Nodes of a triangle curve through its node polynomials.
    TriangleNodes {
        #[command(flatten)]
        triangle: TriangleOpts,
    },
    /// Monodromy of the roots of one node polynomial along a loop.
    Trace {
        #[command(flatten)]
        triangle: TriangleOpts,
        #[arg(long)]
        k: i64,
        /// `discriminant`, `scale`, or `circle:slot=I,center=RE,IM,radius=R`.
        #[arg(long = "loop", default_value = "discriminant")]
        loop_spec: String,
        #[arg(long, default_value_t = 256)]
        steps: usize,
    },
    /// Degenerate along a wedge and classify the limits of the nodes.
    Patchwork {
        polygon: PathBuf,
        /// `J:VX,VY` with the apex in input coordinates, optionally `:FROM,TO`
        /// to keep edge points FROM..=TO only.
        #[arg(long)]
        wedge: String,
        #[arg(long, default_value_t = 1e-4)]
        zmin: f64,
        /// Loop on the triangle parameters, in the syntax of `trace --loop`, with
        /// `discriminant:K` for a loop around the discriminant of class K.
        #[arg(long)]
        inner_loop: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
    },
    /// Assumptions (A), (B), (C) and the constant ℓ.
    CheckHypotheses {
        polygon: PathBuf,
        /// Entry bound for the unimodular search behind `ell_min`.
        #[arg(long, default_value_t = 10)]
        box_bound: i64,
    },
    /// Compare the group generated by wedge groups with the full deck group.
    TheoremCheck { polygon: PathBuf },
    /// Decoration and sampled monodromy of a kite curve with Harnack parameters.
    Kite {
        polygon: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long, default_value_t = 256)]
        steps: usize,
    },
    /// The triangle conv{(0,0),(5,0),(7,6)} with all parameters equal to 1.
    DemoFigure1,
}

#[derive(Args, Debug, Clone, Serialize)]
struct TriangleOpts {
    #[arg(long)]
    ell: i64,
    #[arg(long)]
    p: i64,
    #[arg(long)]
    q: i64,
    /// Parameter `RE,IM`, repeated `ell` times. Defaults to all ones.
    #[arg(long = "a", allow_hyphen_values = true)]
    a: Vec<String>,
    /// Draw the parameters from the seeded generator instead.
    #[arg(long)]
    random_a: bool,
}

#[derive(Deserialize)]
struct PolygonFile {
    vertices: Vec<[i64; 2]>,
}

/// Failure kinds, mapped to exit codes.
enum Failure {
    Unmet(Value),
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e.to_string())
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn read_polygon(path: &Path) -> std::result::Result<(LatticePolygon, Vec<[i64; 2]>), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))?;
    let file: PolygonFile = serde_json::from_str(&text).map_err(|e| {
        Failure::Error(format!("{}: parse error at line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    let coords: Vec<(i64, i64)> = file.vertices.iter().map(|v| (v[0], v[1])).collect();
    let poly = LatticePolygon::from_coords(&coords)?;
    Ok((poly, file.vertices))
}

fn original(poly: &LatticePolygon, pts: &[LatticePoint]) -> Vec<LatticePoint> {
    pts.iter().map(|&p| poly.to_original(p)).collect()
}

fn parse_complex(s: &str) -> std::result::Result<C64, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| Failure::Error(format!("bad number {x:?} in {s:?}")));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(Failure::Error(format!("expected RE,IM, got {s:?}"))),
    }
}

fn triangle_from(opts: &TriangleOpts, seed: u64) -> std::result::Result<TriangleParam, Failure> {
    let n = opts.ell.max(0) as usize;
    let a = if opts.random_a {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU))).collect()
    } else if opts.a.is_empty() {
        vec![C64::new(1.0, 0.0); n]
    } else {
        opts.a.iter().map(|s| parse_complex(s)).collect::<std::result::Result<Vec<_>, _>>()?
    };
    Ok(TriangleParam::new(opts.ell, opts.p, opts.q, a)?)
}

/// Splits `key=v1,v2,key2=v3` into keys with their comma-joined values.
fn parse_keyed(body: &str) -> BTreeMap<String, String> {
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    let mut last: Option<String> = None;
    for tok in body.split(',').filter(|t| !t.is_empty()) {
        match tok.split_once('=') {
            Some((k, v)) => {
                out.insert(k.trim().to_string(), v.trim().to_string());
                last = Some(k.trim().to_string());
            }
            None => {
                if let Some(k) = &last {
                    let v = out.get_mut(k).unwrap();
                    v.push(',');
                    v.push_str(tok.trim());
                }
            }
        }
    }
    out
}

fn parse_loop(spec: &str, tri: &TriangleParam, k: Option<i64>, steps: usize) -> std::result::Result<ParamLoop, Failure> {
    let settings = StepSettings { steps, ..StepSettings::default() };
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let lp = match kind {
        "discriminant" => {
            let k = if body.is_empty() { k } else { body.parse().ok() };
            let k = k.ok_or_else(|| Failure::Error("discriminant loop needs a class k".into()))?;
            discriminant_loop(tri, k)?
        }
        "scale" => ParamLoop::new(tri.a.clone(), LoopPath::Scale)?,
        "constant" => ParamLoop::constant(tri.a.clone()),
        "circle" => {
            let kv = parse_keyed(body);
            let get = |key: &str| kv.get(key).ok_or_else(|| Failure::Error(format!("circle loop needs {key}=")));
            let slot = get("slot").map(|s| s.parse::<usize>().map_err(|_| Failure::Error("bad slot".into()))).unwrap_or(Ok(0))?;
            let center = parse_complex(get("center")?)?;
            let radius = get("radius")?.parse::<f64>().map_err(|_| Failure::Error("bad radius".into()))?;
            ParamLoop::new(tri.a.clone(), LoopPath::Lasso { slot, center, radius })?
        }
        other => return Err(Failure::Error(format!("unknown loop kind {other:?}"))),
    };
    Ok(lp.with_settings(settings))
}

fn analyze(path: &Path) -> Outcome {
    let (poly, input) = read_polygon(path)?;
    let psi = psi_boundary(&poly)?;
    let fibers: BTreeMap<String, Vec<LatticePoint>> =
        psi.fibers().into_iter().map(|(c, pts)| (psi.quotient.label_name(c), original(&poly, &pts))).collect();
    let edges: Vec<Value> = poly
        .edges()
        .iter()
        .map(|e| json!({"start": poly.to_original(e.start), "end": poly.to_original(e.end), "primitive": e.primitive, "length": e.length}))
        .collect();
    Ok(json!({
        "input_vertices": input,
        "vertices": poly.original_vertices(),
        "edges": edges,
        "interior_count": poly.node_count(),
        "boundary_count": poly.boundary_count(),
        "index": psi.quotient.index,
        "invariant_factors": psi.quotient.invariant_factors,
        "classes": psi.quotient.class_count(),
        "fibers": fibers,
        "aut_order": psi.aut_order().to_string(),
        "nonsurjective": nonsurjectivity_certificate(&poly)?,
        "kite": detect_kite(&poly).is_some(),
    }))
}

fn nodes_report(tri: &TriangleParam, tol: f64) -> Outcome {
    let nodes = triangle_nodes(tri, tol)?;
    let classes: BTreeMap<String, Value> = nodes
        .classes
        .iter()
        .map(|(k, c)| {
            (
                k.to_string(),
                json!({
                    "roots": c.roots,
                    "expected": c.expected,
                    "found": c.found,
                    "residual_max": c.residual_max,
                    "node_residual_max": c.node_residual_max,
                    "node_parameters": c.pairs,
                }),
            )
        })
        .collect();
    Ok(json!({
        "triangle": {"ell": tri.ell, "p": tri.p, "q": tri.q, "a": tri.a},
        "classes": classes,
        "total": nodes.total,
        "interior_count": tri.polygon().node_count(),
    }))
}

fn demo_figure1(tol: f64) -> Outcome {
    let tri = TriangleParam::new(5, 7, 6, vec![C64::new(1.0, 0.0); 5])?;
    let mut report = nodes_report(&tri, tol)?;
    let nodes = triangle_nodes(&tri, tol)?;
    let mut lines = BTreeMap::new();
    for (k, c) in &nodes.classes {
        let dir = C64::from_polar(1.0, -std::f64::consts::PI * (tri.p * k) as f64 / tri.q as f64);
        let off = c.roots.iter().map(|r| (r * dir.conj()).im.abs()).fold(0.0, f64::max);
        lines.insert(k.to_string(), json!({"direction": dir, "max_distance": off}));
    }
    report["fiber_sizes"] = json!(tri.fiber_sizes().values().collect::<Vec<_>>());
    report["root_lines"] = json!(lines);
    Ok(report)
}

fn trace(opts: &TriangleOpts, k: i64, spec: &str, steps: usize, g: &GlobalOpts) -> Outcome {
    let tri = triangle_from(opts, g.seed)?;
    let lp = parse_loop(spec, &tri, Some(k), steps)?;
    let r = track_roots(&tri, &lp, k, g.tol)?;
    Ok(json!({
        "k": k,
        "loop": lp.path,
        "permutation": r.permutation.images(),
        "residual": r.residual,
        "max_step_distance": r.max_step_distance,
        "steps_used": r.steps_used,
        "start_roots": r.start_roots,
    }))
}

fn parse_wedge(poly: &LatticePolygon, spec: &str) -> std::result::Result<Wedge, Failure> {
    let bad = || Failure::Error(format!("expected J:VX,VY[:FROM,TO], got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let j: usize = parts[0].trim().parse().map_err(|_| bad())?;
    if j >= poly.num_vertices() {
        return Err(Failure::Error(format!("edge {j} out of range")));
    }
    let ints = |s: &str| -> std::result::Result<Vec<i64>, Failure> {
        s.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect()
    };
    let v = ints(parts[1])?;
    if v.len() != 2 {
        return Err(bad());
    }
    let apex = poly.from_original(LatticePoint::new(v[0], v[1]));
    let mut points = poly.edge(j).lattice_points();
    if let Some(range) = parts.get(2) {
        let r = ints(range)?;
        if r.len() != 2 || r[0] < 0 || r[1] < r[0] || r[1] as usize >= points.len() {
            return Err(Failure::Error(format!("edge point range {range:?} out of bounds")));
        }
        points = points[r[0] as usize..=r[1] as usize].to_vec();
    }
    Ok(Wedge::new(poly, j, points, apex)?)
}

fn patchwork(path: &Path, wedge: &str, zmin: f64, inner: Option<&str>, spacing: f64, tol: f64) -> Outcome {
    let (poly, _) = read_polygon(path)?;
    let w = parse_wedge(&poly, wedge)?;
    let fam = DegenerationFamily::harnack(&poly, &w, spacing)?;
    let sub = &fam.subdivision;
    let mut report = json!({
        "wedge": {"edge": w.edge, "points": original(&poly, &w.points), "apex": poly.to_original(w.apex)},
        "normalized": {"ell": sub.nu.ell, "p": sub.nu.p, "q": sub.nu.q, "m": sub.m},
        "limit_distance": {
            "z_1e-3": fam.limit_distance(1e-3, 1.0 + spacing * sub.slot_parts.len() as f64 / 2.0, 20),
            "z_1e-4": fam.limit_distance(1e-4, 1.0 + spacing * sub.slot_parts.len() as f64 / 2.0, 20),
        },
    });
    match inner {
        None => {
            let deg = track_degeneration_nodes(&fam, zmin, tol)?;
            report["degeneration"] = serde_json::to_value(&deg).expect("serializable");
        }
        Some(spec) => {
            let tri = fam.limit_components().triangle;
            let lp = parse_loop(spec, &tri, None, StepSettings::default().steps)?;
            let pl = patch_loop(&fam, &lp, zmin, tol)?;
            report["patch_loop"] = serde_json::to_value(&pl).expect("serializable");
        }
    }
    Ok(report)
}

fn check(path: &Path, box_bound: i64) -> Outcome {
    let (poly, _) = read_polygon(path)?;
    let rep = check_hypotheses(&poly)?;
    let (best, matrix) = ell_min(&poly, box_bound);
    let value = json!({"hypotheses": rep, "all_hold": rep.all_hold(), "ell_min": best, "ell_min_matrix": matrix});
    if rep.all_hold() {
        Ok(value)
    } else {
        Err(Failure::Unmet(value))
    }
}

fn theorem(path: &Path, max_domain: usize) -> Outcome {
    let (poly, _) = read_polygon(path)?;
    let r = verify_theorem_combinatorics(&poly, max_domain)?;
    let value = serde_json::to_value(&r).expect("serializable");
    if !r.hypotheses_met {
        Err(Failure::Unmet(value))
    } else if !r.equal {
        Err(Failure::Error(format!("generated order {} differs from deck order {}", r.generated_order, r.deck_order)))
    } else {
        Ok(value)
    }
}

fn kite(path: &Path, spacing: f64, steps: usize, tol: f64) -> Outcome {
    let (poly, _) = read_polygon(path)?;
    let param = harnack_params(&poly, spacing)?;
    let settings = StepSettings { steps, ..StepSettings::default() };
    let r = kite_monodromy(&param, settings, tol)?;
    Ok(serde_json::to_value(&r).expect("serializable"))
}

fn dispatch(cmd: &Command, g: &GlobalOpts) -> Outcome {
    match cmd {
        Command::Analyze { polygon } => analyze(polygon),
        Command::TriangleNodes { triangle } => nodes_report(&triangle_from(triangle, g.seed)?, g.tol),
        Command::Trace { triangle, k, loop_spec, steps } => trace(triangle, *k, loop_spec, *steps, g),
        Command::Patchwork { polygon, wedge, zmin, inner_loop, spacing } => {
            patchwork(polygon, wedge, *zmin, inner_loop.as_deref(), *spacing, g.tol)
        }
        Command::CheckHypotheses { polygon, box_bound } => check(polygon, *box_bound),
        Command::TheoremCheck { polygon } => theorem(polygon, g.max_domain),
        Command::Kite { polygon, spacing, steps } => kite(polygon, *spacing, *steps, g.tol),
        Command::DemoFigure1 => demo_figure1(g.tol),
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(x, indent + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for (i, item) in items.iter().enumerate() {
                            out.push_str(&format!("{pad}  [{i}]\n"));
                            render_text(item, indent + 2, out);
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {x}\n")),
                }
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}

fn emit(value: &Value, g: &GlobalOpts) -> std::io::Result<()> {
    let text = match g.format {
        Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
        Format::Text => {
            let mut s = String::new();
            render_text(value, 0, &mut s);
            s
        }
    };
    match &g.out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if !(cli.global.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(1);
    }
    let config = json!({"command": cli.command, "options": cli.global});
    let (status, code, report) = match dispatch(&cli.command, &cli.global) {
        Ok(r) => ("ok", 0, r),
        Err(Failure::Unmet(r)) => ("hypotheses_unmet", 2, r),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ("error", 1, json!({"message": msg}))
        }
    };
    let envelope = json!({"version": VERSION, "config": config, "status": status, "report": report});
    if let Err(e) = emit(&envelope, &cli.global) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
