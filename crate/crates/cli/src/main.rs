use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use q4dec::decomposition::{decompose_with, Quasi4Options};
use q4dec::defined::nd_structure_exhaustive;
use q4dec::fuzz::{run_instance, Coverage, FuzzConfig, InstanceOutcome};
use q4dec::generators::by_name;
use q4dec::io::{parse_dimacs, to_dot, to_json, to_text, write_dimacs};
use q4dec::oracle::{enumerate_tangles, find_blocks};
use q4dec::quasi4::{region_of_tangle, tangle_of_region};
use q4dec::validate::validate_decomposition;
use q4dec::{Error, Graph};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "q4", version, about = "Quasi-4-connected components and order-4 tangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tree decomposition down to blocks, triconnected pieces or
    /// quasi-4-connected components.
    Decompose(DecomposeArgs),
    /// Enumerate tangles with the brute-force oracle.
    Tangles(TanglesArgs),
    /// Random invariant battery on small 3-connected graphs.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Named generator: kN, cN, cube, hex2, hex3, th3, tr3, th4:MASK, th4:full, glued-k5, truncated-cube, fig1.
    #[arg(long = "gen", value_name = "NAME")]
    generator: Option<String>,
    /// DIMACS-style graph file, or `-` for stdin.
    #[arg(long = "in", value_name = "PATH")]
    path: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: Input,
    /// 2: blocks, 3: triconnected pieces, 4: quasi-4-connected components.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(2..=4))]
    level: u8,
    /// Run the validator and exit with status 2 on any violation.
    #[arg(long)]
    validate: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Mark split-vertex bags as components when their region extends to a
    /// non-exceptional quasi-4-connected graph.
    #[arg(long)]
    absorb_th4: bool,
    /// Run every region computation through the checked contraction pipeline.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct TanglesArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..=4))]
    order: u8,
    /// For order 4, compute each tangle's region and check it gives the tangle back.
    #[arg(long)]
    check_correspondence: bool,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(5..=64))]
    max_n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-check the oracle against the unreduced triple axiom.
    #[arg(long)]
    raw_t2: bool,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Where failing instances are written as DIMACS files.
    #[arg(long, default_value = "fuzz-repro")]
    repro_dir: PathBuf,
    /// Break the separation meet on purpose, to check the battery notices.
    #[arg(long)]
    inject_meet_fault: bool,
}

/// Process exit status with a message for stderr.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Failure { code, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Precondition(_) | Error::VertexOutOfRange { .. } | Error::SelfLoop(_) => 1,
            Error::SizeCap { .. } => 4,
            _ => 3,
        };
        Failure::new(code, e.to_string())
    }
}

fn read_input(input: &Input) -> Result<Graph, Failure> {
    if let Some(name) = &input.generator {
        return Ok(by_name(name)?);
    }
    let path = input.path.as_ref().expect("clap requires one input");
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map_err(|e| Failure::new(1, format!("reading stdin: {e}")))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| Failure::new(1, format!("reading {}: {e}", path.display())))?;
    }
    Ok(parse_dimacs(&text)?)
}

fn emit(out: &str) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| Failure::new(1, format!("writing output: {e}")))
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<(), Failure> {
    let g = Arc::new(read_input(&a.input)?);
    let opts = Quasi4Options { absorb_extended_regions: a.absorb_th4, audit: a.audit };
    let td = decompose_with(&g, a.level, opts)?;
    let mut out = match a.format {
        Format::Json => to_json(&td) + "\n",
        Format::Dot => to_dot(&td),
        Format::Text => to_text(&td),
    };
    let mut failed = None;
    if a.validate {
        let report = validate_decomposition(&g, &td, a.level);
        if !report.is_ok() {
            let lines: Vec<String> = report.violations.iter().map(|v| format!("violation: {v}")).collect();
            failed = Some(Failure::new(2, lines.join("\n")));
        } else if matches!(a.format, Format::Text) {
            out.push_str("validation ok\n");
        }
    }
    emit(&out)?;
    failed.map_or(Ok(()), Err)
}

fn list(s: &q4dec::VertexSet) -> String {
    let v: Vec<String> = s.iter().map(|x| (x + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn cmd_tangles(a: &TanglesArgs) -> Result<(), Failure> {
    let g = Arc::new(read_input(&a.input)?);
    let k = usize::from(a.order);
    let tangles = enumerate_tangles(&g, k)?;
    let mut out = format!("tangles of order {k}: {}\n", tangles.len());
    if k <= 3 {
        let blocks = find_blocks(&g, k - 1)?;
        let matching = blocks.iter().filter(|b| k < 3 || b.proper).count();
        let kind = if k == 3 { "proper " } else { "" };
        out.push_str(&format!("{kind}{}-blocks: {matching}\n", k - 1));
    }
    let mut failed = false;
    for (i, t) in tangles.iter().enumerate() {
        out.push_str(&format!("tangle {i}\n"));
        if k == 4 {
            let nd = nd_structure_exhaustive(t)?;
            for m in &nd.t_min {
                let tag = if nd.t_nd.contains(m) { "" } else { " degenerate" };
                out.push_str(&format!("  minimal Y={} S={}{tag}\n", list(m.y()), list(m.s())));
            }
            let edges: Vec<String> = nd.edges().iter().map(|&(u, v)| format!("{}-{}", u + 1, v + 1)).collect();
            out.push_str(&format!("  crossedges [{}]\n", edges.join(", ")));
        } else {
            for m in t.minimal_separations()? {
                out.push_str(&format!("  minimal Y={} S={}\n", list(m.y()), list(m.s())));
            }
        }
        if a.check_correspondence && k == 4 {
            let region = region_of_tangle(t)?;
            let ok = tangle_of_region(&region)?.same_choices(t)?;
            failed |= !ok;
            out.push_str(&format!("  region {} correspondence {}\n", list(region.vertices()), if ok { "OK" } else { "FAILED" }));
        }
    }
    if a.check_correspondence && k != 4 {
        out.push_str("correspondence is checked for order 4 only\n");
    }
    emit(&out)?;
    if failed {
        return Err(Failure::new(2, "tangle/region correspondence failed"));
    }
    Ok(())
}

fn cmd_fuzz(a: &FuzzArgs) -> Result<(), Failure> {
    let cfg = FuzzConfig {
        count: a.count,
        max_n: a.max_n as usize,
        seed: a.seed,
        raw_t2: a.raw_t2,
        faulty_meet: a.inject_meet_fault,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Failure::new(3, format!("thread pool: {e}")))?;
    let outcomes: Vec<InstanceOutcome> = pool.install(|| (0..cfg.count).into_par_iter().map(|i| run_instance(&cfg, i)).collect());
    let mut coverage = Coverage::default();
    let mut out = String::new();
    let mut failing = 0;
    for o in &outcomes {
        coverage.add(&o.coverage);
        if o.findings.is_empty() {
            continue;
        }
        failing += 1;
        let file = a.repro_dir.join(format!("seed{}-instance{}.dimacs", cfg.seed, o.index));
        let mut text = String::new();
        for f in &o.findings {
            out.push_str(&format!("instance {} n={} [{}] {}\n", o.index, o.graph.n(), f.check, f.detail));
            text.push_str(&format!("c [{}] {}\n", f.check, f.detail.replace('\n', " ")));
        }
        text.push_str(&write_dimacs(&o.graph));
        fs::create_dir_all(&a.repro_dir)
            .and_then(|_| fs::write(&file, text))
            .map_err(|e| Failure::new(3, format!("writing {}: {e}", file.display())))?;
        out.push_str(&format!("repro written to {}\n", file.display()));
    }
    out.push_str(&format!(
        "instances {} failing {failing} tangles {} torso-models {} degenerate-refusals {} crossing-tangles {} contractions {}\n",
        cfg.count,
        coverage.tangles,
        coverage.torso_models,
        coverage.degenerate_refusals,
        coverage.crossing_tangles,
        coverage.contractions
    ));
    emit(&out)?;
    if failing > 0 {
        return Err(Failure::new(2, format!("{failing} of {} instances violated an invariant", cfg.count)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Tangles(a) => cmd_tangles(a),
        Command::Fuzz(a) => cmd_fuzz(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("q4: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
