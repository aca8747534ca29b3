use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use knotforge::curves::{sample_polygon, CurveError, ParametricKnot, PolygonalKnot, SampleMode};
use knotforge::diagram::{self, extract_diagram_with, project_along_secant, strands_through_disk};
use knotforge::directional::{
    bridge_count_polygonal_with, bridge_count_smooth, milnor_average_check, sphere_search, total_curvature,
    Direction, SearchMode, SearchOptions, SmoothProfile,
};
use knotforge::invariants::{self, parse_pd_list, KnotTable};
use knotforge::secants::{common_axis_roots, nontriviality_screen, quadrisecants_with};
use knotforge::workbench::{self, BoundRuleInput, CrossingBudget};
use knotforge::{fixtures, Error, Tolerances};

#[derive(Parser)]
#[command(name = "knotforge", version, about = "Bridge counts, quadrisecants, diagrams and superbridge bounds")]
struct Cli {
    /// TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Directory for relative output paths.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    eps_level: Option<f64>,
    #[arg(long, global = true)]
    theta_min: Option<f64>,
    #[arg(long, global = true)]
    dedup_angle: Option<f64>,
    #[arg(long, global = true)]
    dedup_moment: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Number of local maxima of the height function in one direction.
    Bridge {
        curve: String,
        #[arg(long, value_parser = parse_dir, allow_hyphen_values = true)]
        dir: [f64; 3],
        #[command(flatten)]
        s: Sampling,
    },
    /// Extremal bridge count over a Fibonacci lattice of directions.
    Sphere {
        curve: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        samples: Option<usize>,
        /// Re-sample around the best direction.
        #[arg(long)]
        refine: bool,
        #[command(flatten)]
        s: Sampling,
    },
    /// Total curvature of the polygon.
    Curvature {
        curve: String,
        #[command(flatten)]
        s: Sampling,
    },
    /// Lines meeting the polygon in four or more points.
    Quadrisecants {
        curve: String,
        /// Vertices when sampling a parametric curve.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Projected diagram along a direction or a quadrisecant.
    Project {
        curve: String,
        #[arg(long, value_parser = parse_dir, allow_hyphen_values = true, conflicts_with = "secant_index", required_unless_present = "secant_index")]
        dir: Option<[f64; 3]>,
        #[arg(long)]
        secant_index: Option<usize>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        s: Sampling,
    },
    /// Alexander polynomial and table candidates for PD codes.
    Identify {
        pdfile: PathBuf,
        /// Knot table CSV; the built-in table by default.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Enumerates workbench templates and classifies every realization.
    Census {
        /// `default` or a TOML file with budget fields.
        #[arg(long, default_value = "default")]
        budget: String,
        /// Restrict to these patterns, e.g. `1,3,17`.
        #[arg(long, value_delimiter = ',')]
        patterns: Option<Vec<u8>>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Superbridge ranges from the bound rules, checked against the table.
    Table {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Average bridge count over random directions against total curvature.
    Milnor {
        curve: String,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        s: Sampling,
    },
}

#[derive(Args, Clone, Copy)]
struct Sampling {
    /// Vertices when sampling a parametric curve into a polygon.
    #[arg(long)]
    vertices: Option<usize>,
    /// Grid for smooth height profiles.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Min,
    Max,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    seed: u64,
    n_samples: usize,
    grid: usize,
    vertices: usize,
    tolerances: Tolerances,
    output_dir: PathBuf,
    format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            n_samples: 20000,
            grid: 4096,
            vertices: 400,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("."),
            format: Format::Json,
        }
    }
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

macro_rules! domain {
    ($e:expr) => {
        $e.map_err(|e| Failure::from(Error::from(e)))
    };
}

fn parse_dir(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("{p:?} is not a number")))
        .collect::<Result<_, _>>()?;
    let v: [f64; 3] = parts.try_into().map_err(|_| "direction needs three components x,y,z".to_string())?;
    if v.iter().any(|c| !c.is_finite()) || v.iter().all(|&c| c == 0.0) {
        return Err("direction must be a finite nonzero vector".into());
    }
    Ok(v)
}

enum Loaded {
    Smooth(ParametricKnot<f64>),
    Polygon(PolygonalKnot<f64>),
}

const BUILTIN_CURVES: &[&str] = &[
    "fig8_trig",
    "fig8_trautwein",
    "fig8_poly",
    "unit_circle",
    "torus_2_3",
    "torus_2_5",
    "torus_3_4",
    "torus_3_5",
    "trefoil_polygon",
    "figure_eight_polygon",
    "square",
];

/// A curve file (parametric JSON or `{"vertices": [...]}`) or a built-in name.
fn load_curve(spec: &str) -> Result<Loaded, Failure> {
    let builtin = match spec {
        "fig8_trig" => Some(Loaded::Smooth(fixtures::fig8_trig())),
        "fig8_trautwein" => Some(Loaded::Smooth(fixtures::fig8_trautwein())),
        "fig8_poly" => Some(Loaded::Smooth(fixtures::fig8_poly())),
        "unit_circle" => Some(Loaded::Smooth(fixtures::unit_circle())),
        "trefoil_polygon" => Some(Loaded::Polygon(fixtures::trefoil_polygon())),
        "figure_eight_polygon" => Some(Loaded::Polygon(fixtures::figure_eight_polygon())),
        "square" => Some(Loaded::Polygon(fixtures::square())),
        _ => spec
            .strip_prefix("torus_")
            .and_then(|pq| pq.split_once('_'))
            .and_then(|(p, q)| Some((p.parse().ok()?, q.parse().ok()?)))
            .and_then(|(p, q)| fixtures::torus(p, q))
            .map(Loaded::Smooth),
    };
    if let Some(c) = builtin {
        return Ok(c);
    }
    if !Path::new(spec).exists() {
        return Err(Failure::Usage(format!(
            "curve {spec:?} is neither a file nor a built-in ({})",
            BUILTIN_CURVES.join(", ")
        )));
    }
    let text = domain!(fs::read_to_string(spec).map_err(|e| CurveError::Io(format!("{spec}: {e}"))))?;
    let value: Value =
        domain!(serde_json::from_str(&text).map_err(|e| CurveError::InvalidCurve(format!("{spec}: {e}"))))?;
    if let Some(vs) = value.get("vertices") {
        let pts: Vec<[f64; 3]> =
            domain!(serde_json::from_value(vs.clone()).map_err(|e| CurveError::InvalidCurve(e.to_string())))?;
        return Ok(Loaded::Polygon(domain!(PolygonalKnot::from_f64(&pts))?));
    }
    Ok(Loaded::Smooth(domain!(ParametricKnot::from_json_str(&text))?))
}

fn polygon(c: &Loaded, vertices: usize) -> Result<PolygonalKnot<f64>, Failure> {
    match c {
        Loaded::Polygon(p) => Ok(p.clone()),
        Loaded::Smooth(k) => domain!(sample_polygon(k, vertices, SampleMode::Arclength)),
    }
}

fn direction(v: [f64; 3]) -> Result<Direction<f64>, Failure> {
    Direction::from_f64(v[0], v[1], v[2]).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_table(path: &Option<PathBuf>) -> Result<KnotTable, Failure> {
    match path {
        Some(p) => domain!(KnotTable::load(p)),
        None => Ok(KnotTable::builtin()),
    }
}

fn settings(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("config {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    let t = &mut cfg.tolerances;
    for (slot, flag) in [
        (&mut t.eps_level, cli.eps_level),
        (&mut t.theta_min, cli.theta_min),
        (&mut t.dedup_angle, cli.dedup_angle),
        (&mut t.dedup_moment, cli.dedup_moment),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    cfg.tolerances.validate().map_err(Failure::Usage)?;
    if cfg.n_samples == 0 || cfg.grid == 0 || cfg.vertices < 3 {
        return Err(Failure::Usage("n_samples and grid must be positive, vertices at least 3".into()));
    }
    Ok(cfg)
}

// Write errors (a closed pipe) end output quietly.
fn emit(v: &Value) {
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn emit_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let _ = w.write_record(header);
    for r in rows {
        if w.write_record(&r).is_err() {
            return;
        }
    }
    let _ = w.flush();
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = settings(&cli)?;
    let tol = cfg.tolerances;
    match cli.command {
        Command::Bridge { curve, dir, s } => {
            let v = direction(dir)?;
            let c = load_curve(&curve)?;
            let count = match &c {
                Loaded::Smooth(k) => domain!(bridge_count_smooth(k, &v, s.grid.unwrap_or(cfg.grid)))?,
                Loaded::Polygon(p) => domain!(bridge_count_polygonal_with(p, &v, tol.eps_level))?,
            };
            emit(&json!({ "curve": curve, "b_v": count.value, "count": count }));
        }
        Command::Sphere { curve, mode, samples, refine, s } => {
            let mode = match mode {
                Mode::Min => SearchMode::Min,
                Mode::Max => SearchMode::Max,
            };
            let n = samples.unwrap_or(cfg.n_samples);
            let opts = SearchOptions { refine };
            let report = match load_curve(&curve)? {
                Loaded::Smooth(k) => {
                    let profile = domain!(SmoothProfile::new(&k, s.grid.unwrap_or(cfg.grid)))?;
                    domain!(sphere_search(&profile, mode, n, cfg.seed, opts))?
                }
                Loaded::Polygon(p) => domain!(sphere_search(&p, mode, n, cfg.seed, opts))?,
            };
            if cfg.format == Format::Csv {
                emit_csv(&["b_v", "directions"], report.histogram.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]));
            } else {
                emit(&json!({ "curve": curve, "best_value": report.best_value, "report": report }));
            }
        }
        Command::Curvature { curve, s } => {
            let p = polygon(&load_curve(&curve)?, s.vertices.unwrap_or(cfg.vertices))?;
            let k = domain!(total_curvature(&p))?;
            emit(&json!({
                "curve": curve,
                "vertices": p.len(),
                "total_curvature": k,
                "over_2pi": k / std::f64::consts::TAU,
            }));
        }
        Command::Quadrisecants { curve, n } => {
            let c = load_curve(&curve)?;
            let p = polygon(&c, n.unwrap_or(cfg.vertices))?;
            let report = quadrisecants_with(&p, &tol);
            let secants: Vec<Value> = report
                .secants
                .iter()
                .map(|sl| {
                    let screen = nontriviality_screen(&p, sl).ok().map(|c| json!({ "verdict": c.verdict, "evidence": c.evidence }));
                    json!({
                        "direction": sl.line.d,
                        "point": sl.line.closest_to_origin(),
                        "hits": sl.hits,
                        "merged": sl.dedup_group_size,
                        "screen": screen,
                    })
                })
                .collect();
            let mut out = json!({
                "curve": curve,
                "vertices": p.len(),
                "count": secants.len(),
                "secants": secants,
                "tuples_tested": report.tuples_tested,
                "degenerate_tuples": report.degenerate_tuples,
            });
            if let Loaded::Smooth(k) = &c {
                if let Ok(roots) = common_axis_roots(k) {
                    out["z_axis_roots"] = json!(roots.iter().map(|r| r.to_f64()).collect::<Vec<_>>());
                }
            }
            emit(&out);
        }
        Command::Project { curve, dir, secant_index, svg, s } => {
            let p = polygon(&load_curve(&curve)?, s.vertices.unwrap_or(cfg.vertices))?;
            let (proj, pd, mut out) = if let Some(d) = dir {
                let v = direction(d)?;
                let (pd, used) = domain!(diagram::extract_with(&p, &v, cfg.seed, &tol))?;
                let proj = diagram::project(&p, &used);
                let d = &pd.diagram;
                let alex = domain!(invariants::alexander_polynomial::<i64>(d))?;
                let out = json!({
                    "direction": used,
                    "crossings": d.n_crossings(),
                    "writhe": d.writhe(),
                    "pd": d.pd_text(),
                    "gauss": d.gauss_text(),
                    "alexander": alex.to_string(),
                    "determinant": domain!(invariants::determinant(d))?,
                });
                (proj, pd, out)
            } else {
                let k = secant_index.expect("clap requires one of dir and secant_index");
                let report = quadrisecants_with(&p, &tol);
                let sl = report.secants.get(k).ok_or_else(|| {
                    Failure::Usage(format!("secant index {k} out of range: {} quadrisecants", report.secants.len()))
                })?;
                let sp = domain!(project_along_secant(&p, sl))?;
                let pd = domain!(extract_diagram_with(&sp.proj, &tol))?;
                let r = sp.proj.quad_point.map(|(_, r)| r).unwrap_or(0.0);
                let out = json!({
                    "direction": sl.line.d,
                    "quad_point": sp.quad_point,
                    "strands_through_quad_point": strands_through_disk(&sp.proj, sp.quad_point, r),
                    "crossings_outside_quad_point": pd.diagram.n_crossings(),
                    "suppressed": pd.suppressed,
                });
                (sp.proj, pd, out)
            };
            if let Some(path) = svg {
                let path = if path.is_relative() { cfg.output_dir.join(path) } else { path };
                let mut f = domain!(fs::File::create(&path)
                    .map_err(|e| diagram::DiagramError::Io(format!("{}: {e}", path.display()))))?;
                domain!(diagram::write_svg(&proj, Some(&pd), &mut f))?;
                out["svg"] = json!(path);
            }
            out["curve"] = json!(curve);
            emit(&out);
        }
        Command::Identify { pdfile, table } => {
            let table = load_table(&table)?;
            let text = domain!(fs::read_to_string(&pdfile)
                .map_err(|e| diagram::DiagramError::Io(format!("{}: {e}", pdfile.display()))))?;
            let mut rows = Vec::new();
            for (name, d) in domain!(parse_pd_list(&text))? {
                let alex = domain!(invariants::alexander_polynomial::<i64>(&d))?;
                let cands: Vec<&str> = table.identify_polynomial(&alex).iter().map(|e| e.name.as_str()).collect();
                rows.push((name, d.n_crossings(), alex.to_string(), domain!(invariants::determinant(&d))?, cands));
            }
            if cfg.format == Format::Csv {
                emit_csv(
                    &["label", "crossings", "alexander", "determinant", "candidates"],
                    rows.into_iter().map(|(name, n, a, det, c)| vec![name, n.to_string(), a, det.to_string(), c.join("|")]),
                );
            } else {
                let rows: Vec<Value> = rows
                    .into_iter()
                    .map(|(name, n, a, det, c)| {
                        json!({ "label": name, "crossings": n, "alexander": a, "determinant": det, "candidates": c })
                    })
                    .collect();
                emit(&json!(rows));
            }
        }
        Command::Census { budget, patterns, table } => {
            let budget = if budget == "default" {
                CrossingBudget::default()
            } else {
                let text = fs::read_to_string(&budget).map_err(|e| Failure::Usage(format!("budget {budget}: {e}")))?;
                toml::from_str(&text).map_err(|e| Failure::Usage(format!("budget {budget}: {e}")))?
            };
            let patterns = patterns.unwrap_or_else(|| (1..=18).collect());
            if let Some(p) = patterns.iter().find(|p| !(1..=18).contains(*p)) {
                return Err(Failure::Usage(format!("pattern {p} outside 1..=18")));
            }
            let table = load_table(&table)?;
            let report = workbench::census_for(&budget, &table, &patterns);
            if cfg.format == Format::Csv {
                emit_csv(&["type", "count"], report.types.iter().map(|(k, v)| vec![k.clone(), v.to_string()]));
            } else {
                emit(&json!({ "budget": budget, "identified": report.identified_names(), "report": report }));
            }
        }
        Command::Table { input } => {
            let table = domain!(KnotTable::load(&input))?;
            let inputs: Vec<BoundRuleInput> = table.entries().iter().map(BoundRuleInput::from).collect();
            let rows = domain!(workbench::table_bounds(&inputs))?;
            let mut mismatched = Vec::new();
            let joined: Vec<(workbench::BoundRow, bool)> = rows
                .into_iter()
                .zip(table.entries())
                .map(|(r, e)| {
                    let ok = (r.lo, r.hi) == (e.table_range.lo, e.table_range.hi);
                    if !ok {
                        mismatched.push(r.name.clone());
                    }
                    (r, ok)
                })
                .collect();
            if cfg.format == Format::Csv {
                emit_csv(
                    &["name", "lo", "hi", "exact", "matches_table"],
                    joined.iter().map(|(r, ok)| {
                        let exact = r.exact.map(|x| x.to_string()).unwrap_or_default();
                        vec![r.name.clone(), r.lo.to_string(), r.hi.to_string(), exact, ok.to_string()]
                    }),
                );
            } else {
                let list: Vec<Value> = joined
                    .iter()
                    .map(|(r, ok)| json!({ "name": r.name, "lo": r.lo, "hi": r.hi, "exact": r.exact, "matches_table": ok }))
                    .collect();
                emit(&json!({
                    "rows": list.len(),
                    "all_matching": mismatched.is_empty(),
                    "mismatched": mismatched,
                    "bounds": list,
                }));
            }
            if !mismatched.is_empty() {
                return Err(Failure::Domain(format!("TableMismatch: rows {}", mismatched.join(", "))));
            }
        }
        Command::Milnor { curve, samples, s } => {
            let p = polygon(&load_curve(&curve)?, s.vertices.unwrap_or(cfg.vertices))?;
            let n = samples.unwrap_or(cfg.n_samples);
            let check = domain!(milnor_average_check(&p, n, cfg.seed))?;
            emit(&json!({ "curve": curve, "vertices": p.len(), "check": check }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = std::env::var("KNOTFORGE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
