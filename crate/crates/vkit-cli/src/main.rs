//! Command-line surface for the vkit library.
//!
//! Exit codes: 0 ok, 2 validation error, 3 resource budget exceeded,
//! 4 internal invariant violation. Timing goes to stderr so that primary
//! output is byte-identical across cold and warm cache runs.

use clap::{Args, Parser, Subcommand};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use vkit::cache::{Cache, CacheKey};
use vkit::diagrams::{enumerate_chord_diagrams, enumerate_jacobi_diagrams, JacobiDiagram};
use vkit::spaces::{dim_space, stu_expand, Variant};
use vkit::weights::{weight_oracle, weight_poly, weight_span_rank, Algebra, Probe};

/// Format version for cache payloads produced by this binary.
const CACHE_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "vkit", version, about = "finite-type invariant toolkit")]
struct Cli {
    /// Worker threads (default: logical cores). Outputs are independent of
    /// the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for randomized property probes (reserved; outputs here are
    /// deterministic).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Cache directory (also VKIT_CACHE; default .vkit-cache).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Print wall-clock timings to stderr.
    #[arg(long, global = true)]
    time: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Quotient dimensions dim A_m / dim A^r_m.
    Dims(DimsArgs),
    /// List canonical chord or Jacobi diagrams.
    Enumerate(EnumerateArgs),
    /// STU-expand a Jacobi diagram to a chord-diagram vector.
    StuExpand(StuExpandArgs),
    /// Evaluate a Lie-algebra weight system.
    Weight(WeightArgs),
    /// Rank of the gl/so weight-system span against dim A_m.
    WeightRank(WeightRankArgs),
    /// Solve the pentagon/hexagon equations and export the associator.
    Assoc(AssocArgs),
    /// Evaluate the universal invariant on an event presentation.
    Tangle(TangleArgs),
    /// Boundary-complex report: kernel, image and residual dimensions.
    Hutchings(HutchingsArgs),
    /// Inspect or clear the result cache.
    Cache(CacheArgs),
}

#[derive(Args)]
struct DimsArgs {
    /// Compute degrees 0..=TO.
    #[arg(long)]
    to: usize,
    /// framed | reduced | both.
    #[arg(long, default_value = "both")]
    variant: String,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    degree: usize,
    /// Enumerate Jacobi diagrams instead of chord diagrams.
    #[arg(long)]
    jacobi: bool,
    /// Internal-vertex bound for Jacobi enumeration.
    #[arg(long, default_value_t = 0)]
    max_internal: usize,
}

#[derive(Args)]
struct StuExpandArgs {
    /// Jacobi diagram text file (defaults to stdin).
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct WeightArgs {
    /// Chord code, e.g. "1 2 1 2"; empty string for the empty diagram.
    #[arg(long, conflicts_with = "file")]
    diagram: Option<String>,
    /// Jacobi diagram text file.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    algebra: String,
    /// Evaluate the literal contraction oracle at this N instead of the
    /// symbolic polynomial.
    #[arg(long)]
    oracle_n: Option<u32>,
}

#[derive(Args)]
struct WeightRankArgs {
    /// Compute ranks for degrees 0..=TO.
    #[arg(long)]
    to: usize,
    /// Probe spec, e.g. "gl:2,3,4;so:3,4,5".
    #[arg(long, default_value = "gl:2,3,4,5;so:3,4,5,6")]
    probes: String,
    /// Write the table as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AssocArgs {
    /// Truncation degree.
    #[arg(long, default_value_t = 4)]
    degree: usize,
    /// Write the associator export here (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TangleArgs {
    /// Bundled presentation name or a path to an event file.
    #[arg(long)]
    events: String,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Use the framed quotient (4T only) instead of 4T+FI.
    #[arg(long)]
    framed: bool,
    /// raw | corrected | singular (default: corrected, or singular when
    /// the presentation has singular events).
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct HutchingsArgs {
    /// Report degrees 1..=DEGREE.
    #[arg(long)]
    degree: usize,
    /// Degree bound guard.
    #[arg(long, default_value_t = vkit::hutchings::REPORT_DEGREE_BOUND)]
    bound: usize,
}

#[derive(Args)]
struct CacheArgs {
    #[command(subcommand)]
    action: CacheAction,
}

#[derive(Subcommand)]
enum CacheAction {
    Inspect,
    Clear,
}

fn main() {
    // die quietly when stdout is closed early (e.g. piped into head)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e.downcast_ref::<vkit::Error>() {
                Some(vkit::Error::Invalid(_)) | Some(vkit::Error::Unsupported(_)) => 2,
                Some(vkit::Error::Budget(_)) => 3,
                _ => 4,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cache = Cache::open(&Cache::resolve_dir(cli.cache_dir.clone()))?;
    match &cli.cmd {
        Cmd::Dims(a) => cmd_dims(cli, a, &cache),
        Cmd::Enumerate(a) => cmd_enumerate(cli, a),
        Cmd::StuExpand(a) => cmd_stu_expand(cli, a),
        Cmd::Weight(a) => cmd_weight(cli, a),
        Cmd::WeightRank(a) => cmd_weight_rank(cli, a),
        Cmd::Assoc(a) => cmd_assoc(cli, a, &cache),
        Cmd::Tangle(a) => cmd_tangle(cli, a, &cache),
        Cmd::Hutchings(a) => cmd_hutchings(cli, a),
        Cmd::Cache(a) => cmd_cache(a, &cache),
    }
}

fn variants_of(spec: &str) -> anyhow::Result<Vec<Variant>> {
    Ok(match spec {
        "both" => vec![Variant::Reduced, Variant::Framed],
        other => vec![other.parse::<Variant>()?],
    })
}

fn cached_dim(cache: &Cache, m: usize, variant: Variant) -> anyhow::Result<usize> {
    let key = CacheKey::new(
        "dims",
        &format!("m={m} variant={}", variant.name()),
        CACHE_VERSION,
    );
    if let Some(payload) = cache.get(&key)? {
        if let Ok(s) = String::from_utf8(payload) {
            if let Ok(v) = s.trim().parse() {
                return Ok(v);
            }
        }
    }
    let v = dim_space(m, variant);
    cache.put(&key, v.to_string().as_bytes())?;
    Ok(v)
}

fn cmd_dims(cli: &Cli, a: &DimsArgs, cache: &Cache) -> anyhow::Result<()> {
    let variants = variants_of(&a.variant)?;
    let mut rows = Vec::new();
    for m in 0..=a.to {
        let t0 = Instant::now();
        let mut row = serde_json::Map::new();
        row.insert("m".into(), m.into());
        for v in &variants {
            let d = cached_dim(cache, m, *v)?;
            row.insert(v.name().into(), d.into());
        }
        if cli.time {
            eprintln!("m={m}: {:.3?}", t0.elapsed());
        }
        rows.push(serde_json::Value::Object(row));
    }
    if cli.json {
        println!("{}", serde_json::json!({ "dims": rows }));
    } else {
        let names: Vec<&str> = variants.iter().map(|v| v.name()).collect();
        println!("m\t{}", names.join("\t"));
        for row in &rows {
            let m = row["m"].as_u64().unwrap();
            let cells: Vec<String> = names.iter().map(|n| row[*n].to_string()).collect();
            println!("{m}\t{}", cells.join("\t"));
        }
    }
    Ok(())
}

fn cmd_enumerate(cli: &Cli, a: &EnumerateArgs) -> anyhow::Result<()> {
    if a.jacobi {
        let list = enumerate_jacobi_diagrams(a.degree, a.max_internal)?;
        if cli.json {
            let items: Vec<String> = list.iter().map(|d| d.to_string()).collect();
            println!(
                "{}",
                serde_json::json!({ "degree": a.degree, "count": list.len(), "diagrams": items })
            );
        } else {
            println!("count {}", list.len());
            for d in &list {
                println!("--");
                print!("{d}");
            }
        }
    } else {
        let list = enumerate_chord_diagrams(a.degree);
        if cli.json {
            let items: Vec<String> = list.iter().map(|d| d.to_string()).collect();
            println!(
                "{}",
                serde_json::json!({ "degree": a.degree, "count": list.len(), "diagrams": items })
            );
        } else {
            println!("count {}", list.len());
            for d in &list {
                println!("{d}");
            }
        }
    }
    Ok(())
}

fn read_input(file: &Option<PathBuf>) -> anyhow::Result<String> {
    Ok(match file {
        Some(p) => std::fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    })
}

fn cmd_stu_expand(_cli: &Cli, a: &StuExpandArgs) -> anyhow::Result<()> {
    let text = read_input(&a.file)?;
    let j: JacobiDiagram = text.parse()?;
    let v = stu_expand(&j)?;
    print!("{v}");
    Ok(())
}

fn cmd_weight(cli: &Cli, a: &WeightArgs) -> anyhow::Result<()> {
    let algebra: Algebra = a.algebra.parse()?;
    let j = match (&a.diagram, &a.file) {
        (Some(code), _) => {
            JacobiDiagram::from_chord(&code.parse::<vkit::diagrams::ChordDiagram>()?)
        }
        (None, Some(_)) => read_input(&a.file)?.parse()?,
        (None, None) => anyhow::bail!(vkit::Error::Invalid(
            "weight requires --diagram or --file".into()
        )),
    };
    if let Some(n) = a.oracle_n {
        let v = weight_oracle(&j, algebra, n)?;
        if cli.json {
            println!(
                "{}",
                serde_json::json!({
                    "algebra": algebra.name(),
                    "n": n,
                    "value": vkit::qlinalg::fmt_rat(&v)
                })
            );
        } else {
            println!("{}", vkit::qlinalg::fmt_rat(&v));
        }
    } else {
        let p = weight_poly(&j, algebra)?;
        if cli.json {
            println!(
                "{}",
                serde_json::json!({ "algebra": algebra.name(), "polynomial": p.to_string() })
            );
        } else {
            println!("{p}");
        }
    }
    Ok(())
}

fn parse_probes(spec: &str) -> anyhow::Result<Vec<Probe>> {
    let mut probes = Vec::new();
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let (alg, ns) = part
            .split_once(':')
            .ok_or_else(|| vkit::Error::Invalid(format!("bad probe spec {part:?}")))?;
        let algebra: Algebra = alg.trim().parse()?;
        let n_values: Vec<u32> = ns
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| vkit::Error::Invalid(format!("bad probe N {x:?}")))
            })
            .collect::<vkit::Result<_>>()?;
        probes.push(Probe { algebra, n_values });
    }
    Ok(probes)
}

fn cmd_weight_rank(cli: &Cli, a: &WeightRankArgs) -> anyhow::Result<()> {
    let probes = parse_probes(&a.probes)?;
    let mut rows = Vec::new();
    for m in 0..=a.to {
        let t0 = Instant::now();
        let rank = weight_span_rank(m, &probes);
        let dim = dim_space(m, Variant::Framed);
        if cli.time {
            eprintln!("m={m}: {:.3?}", t0.elapsed());
        }
        rows.push((m, rank, dim));
    }
    if let Some(path) = &a.csv {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "m,weight_span_rank,dim_A_m")?;
        for (m, r, d) in &rows {
            writeln!(f, "{m},{r},{d}")?;
        }
    }
    if cli.json {
        let items: Vec<serde_json::Value> = rows
            .iter()
            .map(|(m, r, d)| serde_json::json!({ "m": m, "rank": r, "dim": d }))
            .collect();
        println!("{}", serde_json::json!({ "weight_rank": items }));
    } else {
        println!("m\trank\tdim A_m");
        for (m, r, d) in &rows {
            println!("{m}\t{r}\t{d}");
        }
    }
    Ok(())
}

fn cmd_assoc(cli: &Cli, a: &AssocArgs, cache: &Cache) -> anyhow::Result<()> {
    let key = CacheKey::new("assoc", &format!("D={}", a.degree), CACHE_VERSION);
    let export = match cache.get(&key)? {
        Some(payload) => String::from_utf8(payload)
            .map_err(|_| vkit::Error::Cache("associator cache not UTF-8".into()))?,
        None => {
            let assoc = vkit::assoc::solve_associator(a.degree)?;
            let export = assoc.phi.export();
            cache.put(&key, export.as_bytes())?;
            export
        }
    };
    // verify independently of the cache and print the residuals
    let tower = vkit::assoc::Tower::new(a.degree);
    let phi = vkit::assoc::TangleElement::parse(3, a.degree, &export)?;
    let r = vkit::assoc::r_element(a.degree);
    let (p, hp, hm) = vkit::assoc::verify_axioms(&tower, &r, &phi)?;
    let norm = |t: &vkit::assoc::TangleElement| if t.is_zero() { "0" } else { "NONZERO" };
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "degree": a.degree,
                "pentagon_residual": norm(&p),
                "hexagon_plus_residual": norm(&hp),
                "hexagon_minus_residual": norm(&hm),
                "phi": export,
            })
        );
    } else {
        println!("pentagon residual: {}", norm(&p));
        println!("hexagon+ residual: {}", norm(&hp));
        println!("hexagon- residual: {}", norm(&hm));
    }
    match &a.out {
        Some(path) => std::fs::write(path, export.as_bytes())?,
        None => {
            if !cli.json {
                print!("{export}");
            }
        }
    }
    Ok(())
}

fn cmd_tangle(cli: &Cli, a: &TangleArgs, cache: &Cache) -> anyhow::Result<()> {
    let text = match vkit::tangle::preset(&a.events) {
        Some(t) => t.to_string(),
        None => std::fs::read_to_string(&a.events).map_err(|e| {
            vkit::Error::Invalid(format!(
                "{:?} is neither a bundled presentation nor a readable file ({e})",
                a.events
            ))
        })?,
    };
    let seq = vkit::tangle::EventSequence::parse(&text)?;
    let variant = if a.framed {
        Variant::Framed
    } else {
        Variant::Reduced
    };
    // the associator is the expensive part; share it through the cache
    let d = a.degree.max(2);
    let key = CacheKey::new("assoc", &format!("D={d}"), CACHE_VERSION);
    let phi = match cache.get(&key)? {
        Some(payload) => {
            let text = String::from_utf8(payload)
                .map_err(|_| vkit::Error::Cache("associator cache not UTF-8".into()))?;
            vkit::assoc::TangleElement::parse(3, d, &text)?
        }
        None => {
            let assoc = vkit::assoc::solve_associator(d)?;
            cache.put(&key, assoc.phi.export().as_bytes())?;
            assoc.phi
        }
    };
    let ctx = vkit::tangle::TangleCtx::with_phi(a.degree, variant, phi)?;
    let mode = match &a.mode {
        Some(m) => m.clone(),
        None => {
            if seq.singular_count() > 0 {
                "singular".to_string()
            } else {
                "corrected".to_string()
            }
        }
    };
    let value = match mode.as_str() {
        "raw" => vkit::tangle::evaluate_raw(&ctx, &seq)?,
        "corrected" => vkit::tangle::evaluate_corrected(&ctx, &seq)?,
        "singular" => vkit::tangle::evaluate_singular(&ctx, &seq)?,
        other => anyhow::bail!(vkit::Error::Invalid(format!("unknown mode {other:?}"))),
    };
    let report = vkit::tangle::validate(&seq)?;
    if cli.json {
        let comps: Vec<String> = (0..=a.degree)
            .map(|m| value.component(m).to_string())
            .collect();
        println!(
            "{}",
            serde_json::json!({
                "events": a.events,
                "degree": a.degree,
                "variant": variant.name(),
                "mode": mode,
                "critical_points": report.critical_points,
                "components": comps,
            })
        );
    } else {
        println!(
            "strands {} critical points {} mode {mode} variant {}",
            report.strands,
            report.critical_points,
            variant.name()
        );
        print!("{value}");
    }
    Ok(())
}

fn cmd_hutchings(cli: &Cli, a: &HutchingsArgs) -> anyhow::Result<()> {
    let mut reports = Vec::new();
    for m in 1..=a.degree {
        let t0 = Instant::now();
        reports.push(vkit::hutchings::hutchings_report_with_bound(m, a.bound)?);
        if cli.time {
            eprintln!("m={m}: {:.3?}", t0.elapsed());
        }
    }
    if cli.json {
        let items: Vec<serde_json::Value> = reports
            .iter()
            .map(|r| {
                serde_json::json!({
                    "m": r.m,
                    "d1_generators": r.d1_generators,
                    "dim_ker_upper": r.dim_ker_upper,
                    "dim_im_3T8T": r.dim_im_3t8t,
                    "residual_upper": r.residual_upper,
                })
            })
            .collect();
        println!("{}", serde_json::json!({ "hutchings": items }));
    } else {
        println!("m, dim_ker_upper, dim_im_3T8T, residual_upper");
        for r in &reports {
            println!("{r}");
        }
    }
    Ok(())
}

fn cmd_cache(a: &CacheArgs, cache: &Cache) -> anyhow::Result<()> {
    match a.action {
        CacheAction::Inspect => {
            let entries = cache.entries()?;
            println!("{} entries in {}", entries.len(), cache.dir().display());
            for e in entries {
                println!(
                    "{} {} v{} ({} bytes)",
                    e.module, e.params, e.version, e.payload_len
                );
            }
        }
        CacheAction::Clear => {
            let n = cache.clear()?;
            println!("removed {n} entries");
        }
    }
    Ok(())
}
