use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use torsion_lab::counting::{
    counting_table, counts_csv, default_primes, enumerate_rational_points, orbit_degree_lower_bound, orbits_csv, product_orbit_bound,
    OrbitBoundRecord,
};
use torsion_lab::lattice::{complex_closure, fc_closure, full_closure, subspace_classify, subspace_span, ComplexStructure, Frame};
use torsion_lab::pipeline::{detect_torus_cosets, emit_report, run_pipeline, OutputFormat, ScenarioConfig};
use torsion_lab::puiseux::{convergence_radius, linear_branch_direction, newton_polygon_at_infinity, puiseux_expand, ExactBivariate, PuiseuxBranch};
use torsion_lab::uniformization::{membership_detail, ode_residual, CurveModel, ProductTorus, RationalTorusPoint, TorusSpec, VarietyDescriptor};
use torsion_lab::{Error, Lattice, QuadScalar, Rational, Result};

#[derive(Parser)]
#[command(name = "torsion-lab", version, about = "Torsion points on products of elliptic curves via periodic analytic sets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed overriding the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json, csv or both.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Full, complex and fc closures of a subspace of a lattice.
    Closure,
    /// Puiseux branches at infinity of a plane curve G(x, y) = 0.
    Puiseux {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Weierstrass coordinates of a torus point given in lattice coordinates.
    Uniformize {
        /// Comma-separated rationals, e.g. `1/3,0,1/2,1/4`.
        #[arg(long)]
        point: String,
    },
    /// Rational points of denominator dividing T on the periodic set.
    Count {
        /// A single T instead of the configured range.
        #[arg(long)]
        t: Option<u64>,
        /// Grid index range `START..END` (requires --t).
        #[arg(long)]
        shard: Option<String>,
    },
    /// Galois-orbit degree lower bounds for torsion points.
    Orbits {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[arg(long, default_value_t = 12)]
        t_max: u64,
        /// Comma-separated primes; a default list when absent.
        #[arg(long)]
        primes: Option<String>,
    },
    /// Bounded search for torus cosets in the variety.
    DetectCosets,
    /// The full counting-versus-orbit comparison with report artifacts.
    Pipeline,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn scenario(g: &Global) -> Result<ScenarioConfig> {
    let path = g.config.as_ref().ok_or_else(|| Error::Validation("this command needs --config <scenario.json>".into()))?;
    let mut c = ScenarioConfig::load(path)?;
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(f) = g.format {
        c.output.format = f;
    }
    Ok(c)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Validation(format!("serialization: {e}")))
}

/// Writes `<name>.json` and/or `<name>.csv` under `--out`, or prints to stdout.
fn output(g: &Global, name: &str, value: &Value, csv: Option<String>) -> Result<()> {
    let format = g.format.unwrap_or(OutputFormat::Json);
    let pretty = serde_json::to_string_pretty(value).map_err(|e| Error::Validation(format!("serialization: {e}")))? + "\n";
    match &g.out {
        None => {
            match (&csv, format) {
                (Some(c), OutputFormat::Csv) => print!("{c}"),
                _ => print!("{pretty}"),
            }
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
            let mut files = Vec::new();
            if format.json() || csv.is_none() {
                files.push((dir.join(format!("{name}.json")), pretty));
            }
            if let (Some(c), true) = (csv, format.csv()) {
                files.push((dir.join(format!("{name}.csv")), c));
            }
            for (path, body) in files {
                std::fs::write(&path, body).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosureConfig {
    lattice: Vec<Vec<QuadScalar>>,
    subspace: Vec<Vec<QuadScalar>>,
    #[serde(default = "ambient")]
    frame: Frame,
    #[serde(default)]
    complex_structure: Option<Vec<Vec<QuadScalar>>>,
}

fn ambient() -> Frame {
    Frame::Ambient
}

fn q(s: &str) -> QuadScalar {
    s.parse().expect("literal")
}

/// Z(1,0) + Z(i,1) + Z(1,i) + Z(1,√2) in C², with H = R(1,0).
fn default_closure_config() -> ClosureConfig {
    let v = |xs: [&str; 4]| xs.iter().map(|s| q(s)).collect::<Vec<_>>();
    ClosureConfig {
        lattice: vec![v(["1", "0", "0", "0"]), v(["0", "1", "1", "0"]), v(["1", "0", "0", "1"]), v(["1", "0", "sqrt(2)", "0"])],
        subspace: vec![v(["1", "0", "0", "0"])],
        frame: Frame::Ambient,
        complex_structure: None,
    }
}

fn cmd_closure(g: &Global) -> Result<()> {
    let cfg = match &g.config {
        Some(p) => serde_json::from_str::<ClosureConfig>(&read_text(p)?).map_err(|e| Error::Validation(format!("closure config: {e}")))?,
        None => default_closure_config(),
    };
    let lattice = Lattice::new(cfg.lattice)?;
    let j = match cfg.complex_structure {
        Some(m) => ComplexStructure::new(m, &lattice)?,
        None => ComplexStructure::standard(&lattice)?,
    };
    let h = subspace_span(cfg.frame, lattice.dim(), &cfg.subspace)?;
    let f = full_closure(&h, &lattice)?;
    let c = complex_closure(&h, &j)?;
    let fc = fc_closure(&h, &lattice, &j)?;
    let cf = complex_closure(&f, &j)?;
    let value = json!({
        "subspace": to_json(&h)?,
        "full": to_json(&f)?,
        "complex": to_json(&c)?,
        "fc": to_json(&fc)?,
        "complex_of_full": to_json(&cf)?,
        "classify": {
            "subspace": to_json(&subspace_classify(&h, &lattice, &j)?)?,
            "complex": to_json(&subspace_classify(&c, &lattice, &j)?)?,
            "fc": to_json(&subspace_classify(&fc, &lattice, &j)?)?,
        },
        "fc_strictly_contains_complex_of_full": cf.is_subspace_of(&fc) && cf != fc,
    });
    output(g, "closure", &value, None)
}

fn cmd_puiseux(g: &Global, poly: Option<String>, terms: usize) -> Result<()> {
    let text = match (poly, &g.config) {
        (Some(p), _) => p,
        (None, Some(path)) => {
            let v: Value = serde_json::from_str(&read_text(path)?).map_err(|e| Error::Validation(format!("puiseux config: {e}")))?;
            v.get("poly").and_then(Value::as_str).map(str::to_string).ok_or_else(|| Error::Validation("puiseux config needs a \"poly\" string".into()))?
        }
        (None, None) => return Err(Error::Validation("puiseux needs --poly or --config".into())),
    };
    let g_poly = ExactBivariate::parse(&text)?;
    let branches = puiseux_expand(&g_poly, terms)?;
    let directions: Vec<Value> = branches
        .iter()
        .map(|b| {
            let space = [PuiseuxBranch::identity(b.base), b.clone()];
            to_json(&linear_branch_direction(&space))
        })
        .collect::<Result<_>>()?;
    let value = json!({
        "poly": g_poly.to_string(),
        "radius": convergence_radius(&g_poly),
        "newton_polygon": to_json(&newton_polygon_at_infinity(&g_poly)?)?,
        "branches": to_json(&branches)?,
        "directions": directions,
    });
    output(g, "puiseux", &value, None)
}

fn parse_point(s: &str) -> Result<RationalTorusPoint> {
    let coords = s.split(',').map(|p| torsion_lab::quad::parse_ratio(p.trim())).collect::<Result<Vec<Rational>>>()?;
    Ok(RationalTorusPoint::new(coords))
}

fn cmd_uniformize(g: &Global, point: &str) -> Result<()> {
    let path = g.config.as_ref().ok_or_else(|| Error::Validation("uniformize needs --config with a torus or scenario".into()))?;
    let text = read_text(path)?;
    let (spec, variety) = match serde_json::from_str::<TorusSpec>(&text) {
        Ok(t) => (t, None),
        Err(_) => {
            let c = ScenarioConfig::from_json(&text)?;
            (c.torus.clone(), Some((c.variety.clone(), c.tol)))
        }
    };
    let torus = ProductTorus::new(&spec)?;
    let r = parse_point(point)?;
    if r.dim() != 2 * torus.genus() {
        return Err(Error::DimensionMismatch { expected: 2 * torus.genus(), found: r.dim() });
    }
    let z = r.to_complex(&torus);
    let mut factors = Vec::new();
    for (k, f) in torus.factors.iter().enumerate() {
        let value = match f.wp_rational::<f64>(&r.coords()[2 * k], &r.coords()[2 * k + 1]) {
            Ok(None) => json!("identity"),
            Ok(Some((p, dp))) => json!({
                "wp": to_json(&p)?,
                "wp_prime": to_json(&dp)?,
                "ode_residual": ode_residual(&p, &dp, &f.g2, &f.g3),
            }),
            Err(Error::Pole) => json!("near_pole"),
            Err(e) => return Err(e),
        };
        factors.push(json!({
            "label": f.label,
            "z": to_json(&z[k])?,
            "g2": to_json(&f.g2)?,
            "g3": to_json(&f.g3)?,
            "value": value,
        }));
    }
    let mut out = json!({ "point": to_json(&r)?, "factors": factors });
    if let Some((vspec, tol)) = variety {
        let x = VarietyDescriptor::from_spec(&vspec, torus.genus())?;
        out["membership"] = to_json(&membership_detail(&x, &r, &torus, tol)?)?;
    }
    output(g, "uniformize", &out, None)
}

fn parse_range(s: &str) -> Result<std::ops::Range<u64>> {
    let (a, b) = s.split_once("..").ok_or_else(|| Error::Validation(format!("shard '{s}' is not START..END")))?;
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|_| Error::Validation(format!("bad shard bound '{x}'")));
    Ok(parse(a)?..parse(b)?)
}

fn cmd_count(g: &Global, t: Option<u64>, shard: Option<String>) -> Result<()> {
    let c = scenario(g)?;
    let (torus, x) = c.build()?;
    match (t, shard) {
        (Some(t), shard) => {
            let range = shard.as_deref().map(parse_range).transpose()?;
            let rec = enumerate_rational_points(&x, &torus, t, c.tol, range)?;
            output(g, &format!("count_T{t}"), &to_json(&rec)?, Some(counts_csv(std::slice::from_ref(&rec))))
        }
        (None, Some(_)) => Err(Error::Validation("--shard needs --t".into())),
        (None, None) => {
            let table = counting_table(&x, &torus, &c.t_range.values(), c.tol)?;
            output(g, "counts", &to_json(&table)?, Some(counts_csv(&table.records)))
        }
    }
}

fn cmd_orbits(g: &Global, a: Option<String>, b: Option<String>, t_max: u64, primes: Option<String>) -> Result<()> {
    let primes = match primes {
        Some(p) => p
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Validation(format!("bad prime '{x}'"))))
            .collect::<Result<Vec<_>>>()?,
        None => default_primes(),
    };
    let records: Vec<OrbitBoundRecord> = match (a, b) {
        (Some(a), Some(b)) => {
            let parse = |s: &str| torsion_lab::quad::parse_ratio(s);
            let curve = CurveModel::new(parse(&a)?, parse(&b)?)?;
            (1..=t_max).map(|t| orbit_degree_lower_bound(&curve, t, &primes)).collect::<Result<_>>()?
        }
        (None, None) => {
            let c = scenario(g)?;
            let torus = ProductTorus::new(&c.torus)?;
            let models = torus
                .factors
                .iter()
                .map(|f| f.spec.model.clone().ok_or_else(|| Error::Validation(format!("factor {} has no curve model", f.label))))
                .collect::<Result<Vec<_>>>()?;
            c.t_range.values().into_iter().map(|t| product_orbit_bound(&models, t, &primes)).collect::<Result<_>>()?
        }
        _ => return Err(Error::Validation("give both --a and --b, or a scenario --config".into())),
    };
    output(g, "orbits", &to_json(&records)?, Some(orbits_csv(&records)))
}

fn cmd_detect(g: &Global) -> Result<()> {
    let c = scenario(g)?;
    let (torus, x) = c.build()?;
    let found = detect_torus_cosets(&x, &torus, &c.coset_search, c.tol, c.seed)?;
    output(g, "cosets", &to_json(&found)?, None)
}

fn cmd_pipeline(g: &Global) -> Result<()> {
    let c = scenario(g)?;
    let report = run_pipeline(&c)?;
    let dir = g.out.clone().or_else(|| c.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    for p in emit_report(&report, &dir, c.output.format)? {
        eprintln!("wrote {}", p.display());
    }
    match report.crossover {
        Some(t) => eprintln!("crossover T* = {t}"),
        None => eprintln!("no crossover in the tested range"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Closure => cmd_closure(g),
        Command::Puiseux { poly, terms } => cmd_puiseux(g, poly, terms),
        Command::Uniformize { point } => cmd_uniformize(g, &point),
        Command::Count { t, shard } => cmd_count(g, t, shard),
        Command::Orbits { a, b, t_max, primes } => cmd_orbits(g, a, b, t_max, primes),
        Command::DetectCosets => cmd_detect(g),
        Command::Pipeline => cmd_pipeline(g),
    }
}

/// 2 for malformed input, 3 for a failing stage.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Stage { .. } => 3,
        Error::Io { .. } => 2,
        e if e.is_validation() => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
