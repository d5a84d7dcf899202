use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use schottky::groups::validate_classical_sampled;
use schottky::hexagon::inequality_suite;
use schottky::measures::{bounds_report, dimension_bracket, pressure_exponent, sector_measures};
use schottky::moebius::loxodromic_data;
use schottky::periods::{default_probe, period_matrix, tail_certificate};
use schottky::words::words_up_to;
use schottky::{ComplexPoint, Error, H3Point, SchottkyGroupSpec};

#[derive(Parser)]
#[command(name = "schottky", version, about = "Schottky group computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a group file and run the classical checks
    Validate(GroupArgs),
    /// Attracting fixed points of all words up to length N, as CSV
    LimitSet(LimitSetArgs),
    /// Dimension bracket from the transfer matrices
    Dimension(GroupArgs),
    /// Dimension bracket together with the three upper bounds
    Bounds(GroupArgs),
    /// Truncated period matrix with its tail certificate
    PeriodMatrix(GroupArgs),
    /// Numeric checks of the pants inequalities, as CSV
    InequalitySuite(SuiteArgs),
}

#[derive(Args, Serialize)]
struct GroupArgs {
    /// Group-spec JSON file
    #[arg(long)]
    input: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Maximum word length
    #[arg(short = 'N', long = "max-word-len", default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=16))]
    #[serde(rename = "N")]
    n: u32,
    /// Nielsen search depth
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=4))]
    depth: u32,
    /// Added to the orbit exponent before summing
    #[arg(long = "s-margin", default_value_t = 0.05)]
    s_margin: f64,
    /// Probe point `re,im` for the tail certificate
    #[arg(long, value_parser = parse_point)]
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<[f64; 2]>,
    /// Seed for sampled checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LimitSetArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Emit sector-measure atoms (re,im,weight,word) instead of fixed points
    #[arg(long)]
    atoms: bool,
}

#[derive(Args, Serialize)]
struct SuiteArgs {
    #[arg(long = "g-min", default_value_t = 2)]
    g_min: usize,
    #[arg(long = "g-max", default_value_t = 100)]
    g_max: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("probe must be finite".into());
    }
    Ok([re, im])
}

#[derive(Serialize)]
struct RunReport {
    subcommand: &'static str,
    input_sha256: Option<String>,
    parameters: Value,
    result: Value,
    wall_time: f64,
}

struct Loaded {
    spec: SchottkyGroupSpec,
    sha256: String,
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let spec = SchottkyGroupSpec::from_json_str(text)?;
    Ok(Loaded { spec, sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn emit(report: RunReport, out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn group_report(name: &'static str, args: &GroupArgs, f: impl FnOnce(&SchottkyGroupSpec) -> anyhow::Result<Value>) -> anyhow::Result<()> {
    let start = Instant::now();
    let loaded = load(&args.input)?;
    let result = f(&loaded.spec)?;
    let report = RunReport {
        subcommand: name,
        input_sha256: Some(loaded.sha256),
        parameters: serde_json::to_value(args)?,
        result,
        wall_time: start.elapsed().as_secs_f64(),
    };
    emit(report, args.out.as_deref())
}

fn validate(spec: &SchottkyGroupSpec, seed: u64) -> anyhow::Result<Value> {
    let loxodromic = spec.loxodromic_data()?;
    let classical = match spec.pairings() {
        Some(_) => Some(validate_classical_sampled(spec, 256, seed)?),
        None => None,
    };
    Ok(json!({
        "genus": spec.genus(),
        "classical_verified": spec.classical_verified(),
        "generators": spec.generators(),
        "loxodromic": loxodromic,
        "validation": classical,
    }))
}

fn period(spec: &SchottkyGroupSpec, args: &GroupArgs) -> anyhow::Result<Value> {
    let p = period_matrix(spec, args.n as usize)?;
    let mut v = p.to_json();
    if let Some([re, im]) = args.probe {
        let cert = tail_certificate(spec, ComplexPoint::new(re, im)?, args.n as usize)?;
        v["tail_bound"] = json!(cert.bound);
        v["certificate"] = serde_json::to_value(cert)?;
    } else {
        v["probe"] = json!(default_probe(spec)?);
    }
    Ok(v)
}

fn point_field(z: ComplexPoint) -> (String, String) {
    match z {
        ComplexPoint::Finite(w) => (format!("{:.17e}", w.re), format!("{:.17e}", w.im)),
        ComplexPoint::Infinity => ("inf".into(), "inf".into()),
    }
}

fn limit_set(args: &LimitSetArgs) -> anyhow::Result<()> {
    let g = &args.group;
    let loaded = load(&g.input)?;
    let spec = &loaded.spec;
    let n = g.n as usize;
    let mut csv = csv::Writer::from_writer(sink(g.out.as_deref())?);
    let mut rows = 0usize;
    if args.atoms {
        let x = H3Point::origin();
        let s = pressure_exponent(spec, &x, n)?.exponent + g.s_margin;
        let measures = sector_measures(spec, &x, s, n)?;
        csv.write_record(["re", "im", "weight", "word"])?;
        for (re, im, weight, word) in measures.rows() {
            csv.write_record([format!("{re:.17e}"), format!("{im:.17e}"), format!("{weight:.17e}"), word])?;
            rows += 1;
        }
    } else {
        csv.write_record(["re", "im", "word"])?;
        for w in words_up_to(spec.genus(), n).filter(|w| !w.is_empty()) {
            let fixed = loxodromic_data(&spec.evaluate(&w)?)?.fixed_plus;
            let (re, im) = point_field(fixed);
            csv.write_record([re, im, w.to_string()])?;
            rows += 1;
        }
    }
    csv.flush()?;
    eprintln!("{rows} rows");
    Ok(())
}

fn suite(args: &SuiteArgs) -> anyhow::Result<()> {
    let report = inequality_suite(args.g_min, args.g_max)?;
    let mut csv = csv::Writer::from_writer(sink(args.out.as_deref())?);
    csv.write_record(["g", "check_id", "lhs", "rhs", "margin", "pass"])?;
    for r in &report.rows {
        csv.write_record([r.g.to_string(), r.check_id.to_string(), format!("{:.17e}", r.lhs), format!("{:.17e}", r.rhs), format!("{:.17e}", r.margin), r.pass.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Validate(a) => group_report("validate", a, |spec| validate(spec, a.seed)),
        Command::LimitSet(a) => limit_set(a),
        Command::Dimension(a) => group_report("dimension", a, |spec| Ok(serde_json::to_value(dimension_bracket(spec, a.n as usize)?)?)),
        Command::Bounds(a) => group_report("bounds", a, |spec| {
            Ok(serde_json::to_value(bounds_report(spec, a.n as usize, a.depth as usize, a.s_margin)?)?)
        }),
        Command::PeriodMatrix(a) => group_report("period-matrix", a, |spec| period(spec, a)),
        Command::InequalitySuite(a) => suite(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::ConvergenceGateFailed(_)) => 3,
        Some(Error::Io(_)) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("SCHOTTKY_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("SCHOTTKY_THREADS={v:?}"))?;
    if n == 0 {
        return Err(anyhow!("SCHOTTKY_THREADS must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
