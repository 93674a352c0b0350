//! The `lpfree` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a verification fails, 2 on
//! bad input or configuration. Output depends only on the arguments.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::besov::{besov_seminorm_p, boundary_extension, ep_seminorm_p, properness_table, CayleyBall, GroupFunction};
use crate::error::{Error, Result};
use crate::group::{BoundaryPoint, Rank, Word};
use crate::measure::{cocycle_lp_norm_p, cocycle_lp_norm_p_approx, norm_brackets, s_sum_approx, LevelSetTable};
use crate::mobius::{
    alpha_bound_check, check_chain_rule, check_mean_value, cocycle_bound_check, derivative_table, is_mobius, kappa,
    lipschitz_bound_check, read_map, read_space, within_tolerance, AnySpace, BoundReport, FiniteMetricSpace,
    MetricScalar, MobiusOptions, PointMap,
};
use crate::sample::{
    action_map, boundary_space, extend_by_images, orbit_closure, random_boundary_points, DEFAULT_CLOSURE_CAP,
};
use crate::verify::{self, VerifyConfig};

/// Relative tolerance of the floating-point path for non-integer `p`.
const APPROX_RTOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "lpfree",
    version,
    about = "Exact boundary calculus and cocycle norms for free groups"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Rank n of the free group (q = 2n - 1).
    #[arg(long, global = true, default_value_t = 2)]
    pub rank: usize,
    /// Exponent p. Integers are exact; other values use a flagged
    /// floating-point path where one exists.
    #[arg(long, global = true, default_value = "2")]
    pub p: String,
    /// Depth N: level-set rows, sample preperiods, boundary-extension depth.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Cayley ball radius R.
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    /// Largest word length.
    #[arg(long, global = true)]
    pub length_max: Option<usize>,
    /// Random instances or sample points.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Allowed deviation in Möbius checks; 0 demands exact equality.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Inject a fault into the verification suite.
    #[arg(long, global = true)]
    pub perturb: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the randomized exact-identity suites.
    Verify,
    /// Masses of the level sets K_n and their partial sums.
    Levelsets,
    /// Cocycle norms of random elements against their brackets.
    NormTable,
    /// Properness table of Busemann functions, or the seminorms of a given
    /// group function.
    Besov {
        /// Comma-separated elements; random ones when absent.
        #[arg(long, value_delimiter = ',')]
        elements: Vec<String>,
        /// JSON map from vertices to values.
        #[arg(long)]
        function: Option<PathBuf>,
    },
    /// Möbius report for a map on a finite metric space.
    MobiusCheck { space: PathBuf, map: PathBuf },
    /// The covering constant kappa of a finite metric space.
    Kappa { space: PathBuf },
    /// Write a boundary sample as a metric space with one map per element.
    ExportSample {
        /// Comma-separated elements.
        #[arg(long, value_delimiter = ',')]
        elements: Vec<String>,
        /// Comma-separated boundary points used instead of random ones.
        #[arg(long, value_delimiter = ',')]
        points: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Close the sample under the elements instead of adjoining one
        /// image of it per element.
        #[arg(long)]
        closed: bool,
    },
}

/// An exponent: exact when integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Int(u32),
    Real(f64),
}

pub fn parse_exponent(s: &str) -> Result<Exponent> {
    let bad = |reason: &str| Error::Parse {
        what: "exponent",
        input: s.into(),
        reason: reason.into(),
    };
    let p = if let Ok(k) = s.trim().parse::<u32>() {
        Exponent::Int(k)
    } else {
        let x: f64 = s.trim().parse().map_err(|_| bad("not a number"))?;
        if !x.is_finite() {
            return Err(bad("not finite"));
        }
        if x.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&x) {
            Exponent::Int(x as u32)
        } else {
            Exponent::Real(x)
        }
    };
    let below = match p {
        Exponent::Int(k) => k < 1,
        Exponent::Real(x) => x < 1.0,
    };
    if below {
        return Err(Error::OutOfRange(format!("p must be at least 1, got {s}")));
    }
    Ok(p)
}

fn integer_p(opts: &Options) -> Result<u32> {
    match parse_exponent(&opts.p)? {
        Exponent::Int(k) => Ok(k),
        Exponent::Real(x) => Err(Error::Precondition(format!(
            "this command is exact and needs an integer p, got {x}"
        ))),
    }
}

/// Runs a parsed command, writing to `out`. `Ok(false)` is a failed
/// verification.
pub fn execute(cli: &Cli, out: &mut String) -> Result<bool> {
    let opts = &cli.opts;
    let rank = Rank::new(opts.rank)?;
    if let Some(t) = opts.tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "tolerance must be finite and nonnegative, got {t}"
            )));
        }
    }
    match &cli.command {
        Command::Verify => cmd_verify(rank, opts, out),
        Command::Levelsets => cmd_levelsets(rank, opts, out),
        Command::NormTable => cmd_norm_table(rank, opts, out),
        Command::Besov { elements, function } => cmd_besov(rank, opts, elements, function.as_deref(), out),
        Command::MobiusCheck { space, map } => cmd_mobius_check(opts, space, map, out),
        Command::Kappa { space } => cmd_kappa(space, out),
        Command::ExportSample {
            elements,
            points,
            out: dir,
            closed,
        } => cmd_export_sample(rank, opts, elements, points, dir, *closed, out),
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = String::new();
    let result = execute(&cli, &mut out);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_verify(rank: Rank, opts: &Options, out: &mut String) -> Result<bool> {
    let defaults = VerifyConfig::new(rank);
    let cfg = VerifyConfig {
        rank,
        p: integer_p(opts)?,
        depth: opts.depth.unwrap_or(defaults.depth),
        length_max: opts.length_max.unwrap_or(defaults.length_max),
        count: opts.count.unwrap_or(defaults.count),
        seed: opts.seed,
        perturb: opts.perturb,
    };
    if cfg.depth == 0 || cfg.length_max == 0 || cfg.count == 0 {
        return Err(Error::OutOfRange("depth, length-max and count must be positive".into()));
    }
    let report = verify::run(&cfg)?;
    match opts.format.unwrap_or(Format::Text) {
        Format::Json => out.push_str(&report.to_json()),
        _ => out.push_str(&report.to_text()),
    }
    Ok(report.passed())
}

fn cmd_levelsets(rank: Rank, opts: &Options, out: &mut String) -> Result<bool> {
    let n = opts.depth.unwrap_or(10);
    let table = LevelSetTable::new(rank, n);
    let sums = table.partial_sums();
    match opts.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let rows: Vec<Value> = table
                .entries
                .iter()
                .zip(&sums)
                .map(|((n, m), s)| json!({"n": n, "nu": m, "partial_sum": s}))
                .collect();
            let v = json!({"rank": rank.n(), "q": rank.q(), "rows": rows});
            out.push_str(&(serde_json::to_string_pretty(&v)? + "\n"));
        }
        _ => {
            out.push_str("n,nu,partial_sum\n");
            for ((n, m), s) in table.entries.iter().zip(&sums) {
                let _ = writeln!(out, "{n},{m},{s}");
            }
        }
    }
    Ok(true)
}

fn cmd_norm_table(rank: Rank, opts: &Options, out: &mut String) -> Result<bool> {
    let len_max = opts.length_max.unwrap_or(20);
    let json = opts.format == Some(Format::Json);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut ok = true;
    let mut rows = Vec::new();
    match parse_exponent(&opts.p)? {
        Exponent::Int(p) => {
            if !json {
                out.push_str("length,norm_p,s_n,lower_bracket,upper_bracket,ratio,within\n");
            }
            for len in 1..=len_max {
                let g = rank.random_word(len, &mut rng);
                let norm = cocycle_lp_norm_p(rank, &g, p)?;
                let b = norm_brackets(rank, len, p);
                let rate = &norm / &crate::ExactScalar::integer(len as i64);
                let within = b.lower <= norm && norm <= b.upper && b.rate_lower <= rate && rate <= b.rate_upper;
                ok &= within;
                let ratio = rate.to_f64();
                if json {
                    rows.push(json!({
                        "length": len, "element": g.to_string(), "norm_p": norm, "s_n": b.s,
                        "lower_bracket": b.lower, "upper_bracket": b.upper, "ratio": ratio, "within": within,
                    }));
                } else {
                    let _ = writeln!(
                        out,
                        "{len},{norm},{},{},{},{ratio:.12e},{within}",
                        b.s, b.lower, b.upper
                    );
                }
            }
        }
        Exponent::Real(p) => {
            eprintln!(
                "note: p = {p} is not an integer; values are floating point with relative tolerance {APPROX_RTOL:e}"
            );
            let q = rank.q() as f64;
            let e2 = (q / (q + 1.0)).powi(2);
            let m2 = ((q - 1.0) / (q + 1.0)).powi(2);
            if !json {
                out.push_str(
                    "length,norm_p_approx,s_n_approx,lower_bracket_approx,upper_bracket_approx,ratio,within\n",
                );
            }
            for len in 1..=len_max {
                let norm = cocycle_lp_norm_p_approx(rank.q(), len, p);
                let s = s_sum_approx(len, p, rank.q());
                let (lo, hi) = (m2 * s, e2 * s);
                let within = norm >= lo * (1.0 - APPROX_RTOL) && norm <= hi * (1.0 + APPROX_RTOL);
                ok &= within;
                let ratio = norm / len as f64;
                if json {
                    rows.push(json!({
                        "length": len, "norm_p_approx": norm, "s_n_approx": s,
                        "lower_bracket_approx": lo, "upper_bracket_approx": hi, "ratio": ratio, "within": within,
                    }));
                } else {
                    let _ = writeln!(
                        out,
                        "{len},{norm:.12e},{s:.12e},{lo:.12e},{hi:.12e},{ratio:.12e},{within}"
                    );
                }
            }
        }
    }
    if json {
        let exact = matches!(parse_exponent(&opts.p)?, Exponent::Int(_));
        let v = json!({
            "rank": rank.n(), "q": rank.q(), "p": opts.p, "seed": opts.seed,
            "mode": if exact { "exact" } else { "approximate" }, "rows": rows,
        });
        out.push_str(&(serde_json::to_string_pretty(&v)? + "\n"));
    }
    Ok(ok)
}

fn parse_elements(rank: Rank, list: &[String]) -> Result<Vec<Word>> {
    list.iter().map(|s| rank.parse_word(s.trim())).collect()
}

fn cmd_besov(
    rank: Rank,
    opts: &Options,
    elements: &[String],
    function: Option<&Path>,
    out: &mut String,
) -> Result<bool> {
    let p = integer_p(opts)?;
    if p <= 1 {
        return Err(Error::Precondition(format!(
            "seminorm comparison needs p > 1, the boundary dimension; got p = {p}"
        )));
    }
    let json = opts.format == Some(Format::Json);
    if let Some(path) = function {
        let phi = GroupFunction::from_json(rank, &std::fs::read_to_string(path)?)?;
        let deepest = phi.marks().keys().map(Word::len).max().unwrap_or(0);
        let depth = opts.depth.unwrap_or(deepest);
        let ball = CayleyBall::new(rank, opts.radius.unwrap_or(depth.max(deepest) + 1));
        let ep = ep_seminorm_p(&phi, &ball, p);
        let besov = besov_seminorm_p(&boundary_extension(&phi, &ball, depth)?, p);
        if json {
            let v = json!({"radius": ball.radius, "depth": depth, "p": p, "ep_p": ep, "besov_p": besov});
            out.push_str(&(serde_json::to_string_pretty(&v)? + "\n"));
        } else {
            let _ = writeln!(out, "radius,depth,ep_p,besov_p\n{},{depth},{ep},{besov}", ball.radius);
        }
        return Ok(true);
    }
    let words = if elements.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let per = opts.count.unwrap_or(1);
        (1..=opts.length_max.unwrap_or(8))
            .flat_map(|len| (0..per).map(move |_| len))
            .map(|len| rank.random_word(len, &mut rng))
            .collect()
    } else {
        parse_elements(rank, elements)?
    };
    let rows = properness_table(rank, &words, p)?;
    let ok = rows
        .iter()
        .all(|r| r.within_brackets() && r.ep_p == crate::ExactScalar::integer(r.length as i64));
    if json {
        let rows: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "element": r.element.to_string(), "length": r.length, "ep_p": r.ep_p,
                    "besov_p": r.besov_p, "lower_bracket": r.lower_bracket, "upper_bracket": r.upper_bracket,
                })
            })
            .collect();
        out.push_str(&(serde_json::to_string_pretty(&json!({"p": p, "rows": rows}))? + "\n"));
    } else {
        out.push_str("length,ep_p,besov_p,lower_bracket,upper_bracket\n");
        for r in &rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.length, r.ep_p, r.besov_p, r.lower_bracket, r.upper_bracket
            );
        }
    }
    Ok(ok)
}

fn bound_json(r: &BoundReport) -> Value {
    json!({
        "holds": r.holds,
        "worst_ratio": if r.worst_ratio.is_finite() { json!(r.worst_ratio) } else { Value::Null },
        "worst_pair": r.worst_pair.map(|(x, y)| [x, y]),
        "pairs": r.pairs,
    })
}

fn mobius_report<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    opts: &Options,
) -> Result<(Value, bool)> {
    let tol = opts.tolerance.unwrap_or(if T::EXACT { 0.0 } else { APPROX_RTOL });
    let mopts = MobiusOptions {
        tolerance: tol,
        seed: opts.seed,
        ..MobiusOptions::default()
    };
    let mob = is_mobius(space, map, &mopts)?;
    let mut ok = mob.holds;
    let labels = space.labels();
    let mut v = Map::new();
    v.insert("mode".into(), json!(if T::EXACT { "exact" } else { "approximate" }));
    v.insert("points".into(), json!(space.len()));
    v.insert("domain".into(), json!(map.domain().len()));
    v.insert("tolerance".into(), json!(tol));
    v.insert(
        "is_mobius".into(),
        json!({
            "holds": mob.holds,
            "max_deviation": mob.max_deviation.to_json(),
            "witness": mob.witness,
            "quadruples": mob.quadruples,
            "exhaustive": mob.exhaustive,
        }),
    );
    if map.domain().len() < 3 {
        v.insert("derivative".into(), Value::Null);
        v.insert(
            "note".into(),
            json!("derivative checks need at least three domain points"),
        );
        return Ok((Value::Object(v), ok));
    }
    let table = derivative_table(space, map)?;
    let deriv: Map<String, Value> = labels
        .iter()
        .zip(&table)
        .map(|(l, d)| (l.clone(), d.as_ref().map_or(Value::Null, MetricScalar::to_json)))
        .collect();
    v.insert("derivative".into(), Value::Object(deriv));

    let mv = check_mean_value(space, map, &table)?;
    let mv_ok = within_tolerance(&mv.max, tol);
    ok &= mv_ok;
    v.insert(
        "mean_value".into(),
        json!({"holds": mv_ok, "residual": mv.max.to_json(), "witness": mv.witness, "pairs": mv.checked}),
    );

    let square = map.compose(map);
    if square.domain().len() >= 3 {
        let cr = check_chain_rule(space, map, map)?;
        let cr_ok = within_tolerance(&cr.max, tol);
        ok &= cr_ok;
        v.insert(
            "chain_rule".into(),
            json!({"holds": cr_ok, "residual": cr.max.to_json(), "witness": cr.witness, "points": cr.checked}),
        );
    } else {
        v.insert("chain_rule".into(), Value::Null);
    }

    let lip = lipschitz_bound_check(space, map, &table)?;
    let coc = cocycle_bound_check(space, map, &table)?;
    ok &= lip.holds && coc.holds;
    v.insert("lipschitz".into(), bound_json(&lip));
    v.insert("cocycle_bound".into(), bound_json(&coc));

    let alpha = alpha_bound_check(space, map)?;
    ok &= alpha.holds;
    v.insert(
        "alpha_bound".into(),
        json!({
            "applicable": alpha.applicable,
            "holds": alpha.holds,
            "displacement": alpha.displacement.to_json(),
            "kappa": alpha.kappa.to_json(),
            "witness": alpha.witness,
        }),
    );
    v.insert("passed".into(), json!(ok));
    Ok((Value::Object(v), ok))
}

/// The JSON report of `mobius-check` and whether every check passed. A
/// missing tolerance means exact equality for exact spaces.
pub fn mobius_check_report(
    space: &AnySpace,
    map: &PointMap,
    tolerance: Option<f64>,
    seed: u64,
) -> Result<(Value, bool)> {
    let opts = Options {
        rank: 2,
        p: "2".into(),
        depth: None,
        radius: None,
        length_max: None,
        count: None,
        seed,
        format: None,
        tolerance,
        perturb: false,
    };
    match space {
        AnySpace::Exact(s) => mobius_report(s, map, &opts),
        AnySpace::Approx(s) => mobius_report(s, map, &opts),
    }
}

fn cmd_mobius_check(opts: &Options, space: &Path, map: &Path, out: &mut String) -> Result<bool> {
    let space = read_space(space)?;
    let map = read_map(map)?;
    let (v, ok) = mobius_check_report(&space, &map, opts.tolerance, opts.seed)?;
    out.push_str(&(serde_json::to_string_pretty(&v)? + "\n"));
    Ok(ok)
}

fn kappa_json<T: MetricScalar>(space: &FiniteMetricSpace<T>) -> Result<Value> {
    let all: Vec<usize> = (0..space.len()).collect();
    let k = kappa(space, &all)?;
    let l = space.labels();
    Ok(json!({
        "points": space.len(),
        "kappa": k.value.to_json(),
        "centers": [l[k.centers.0], l[k.centers.1]],
    }))
}

/// The `kappa` report for a parsed space.
pub fn kappa_report(space: &AnySpace) -> Result<Value> {
    match space {
        AnySpace::Exact(s) => kappa_json(s),
        AnySpace::Approx(s) => kappa_json(s),
    }
}

fn cmd_kappa(space: &Path, out: &mut String) -> Result<bool> {
    let v = kappa_report(&read_space(space)?)?;
    out.push_str(&(serde_json::to_string_pretty(&v)? + "\n"));
    Ok(true)
}

fn cmd_export_sample(
    rank: Rank,
    opts: &Options,
    elements: &[String],
    points: &[String],
    dir: &Path,
    closed: bool,
    out: &mut String,
) -> Result<bool> {
    let words = parse_elements(rank, elements)?;
    let base: Vec<BoundaryPoint> = if points.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        random_boundary_points(rank, opts.count.unwrap_or(50), opts.depth.unwrap_or(3), 2, &mut rng)
    } else {
        points
            .iter()
            .map(|s| rank.parse_boundary(s.trim()))
            .collect::<Result<_>>()?
    };
    let pts = if closed {
        orbit_closure(&base, &words, DEFAULT_CLOSURE_CAP)?
    } else {
        extend_by_images(&base, &words)
    };
    let space = boundary_space(rank, &pts)?;
    let dist: Vec<Vec<Value>> = space
        .matrix()
        .iter()
        .map(|r| r.iter().map(MetricScalar::to_json).collect())
        .collect();
    std::fs::create_dir_all(dir)?;
    let space_path = dir.join("space.json");
    let v = json!({"points": space.labels(), "dist": dist});
    std::fs::write(&space_path, serde_json::to_string(&v)? + "\n")?;
    let _ = writeln!(out, "{} points -> {}", pts.len(), space_path.display());
    for (k, g) in words.iter().enumerate() {
        let map = action_map(&pts, g);
        let path = dir.join(format!("map_{k}.json"));
        let v = json!({"element": g.to_string(), "permutation": map.images()});
        std::fs::write(&path, serde_json::to_string(&v)? + "\n")?;
        let _ = writeln!(
            out,
            "{g}: domain {} of {} -> {}",
            map.domain().len(),
            pts.len(),
            path.display()
        );
    }
    Ok(true)
}
