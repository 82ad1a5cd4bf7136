use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fixedbitset::FixedBitSet;
use rainbow_hc::absorber::{find_absorber, AbsorberSearchBudget};
use rainbow_hc::graph::{read_graph_file, verify_rainbow_hamilton_cycle, write_graph, ColouredDigraph, Vertex};
use rainbow_hc::harness::{emit_results, write_csv, write_json, ExperimentConfig, OutputFormat};
use rainbow_hc::models::{complete_bipartite_graph, complete_graph, sample_gamma, sample_model, ModelParams, SeedKind};
use rainbow_hc::pipeline::{assemble_hamilton_cycle, PipelineError, PipelineParams};
use rainbow_hc::rmbg::{build_rmbg, certify_robust_matchability, CertifyMode, RmbgTemplate};
use rainbow_hc::search::{brute_force_rainbow_hc, exact_rainbow_hc, rainbow_dfs_path};
use rainbow_hc::RngStream;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "rhc", version, about = "Rainbow Hamilton cycles in randomly perturbed coloured digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a coloured digraph and write it in the graph file format.
    Generate(GenerateArgs),
    /// Search a graph file for a rainbow Hamilton cycle or long rainbow path.
    Solve(SolveArgs),
    /// Run the full absorption pipeline.
    Pipeline(PipelineArgs),
    /// Search for a (v, c)-absorber.
    Absorber(AbsorberArgs),
    /// Build or certify robustly matchable bipartite templates.
    #[command(subcommand)]
    Rmbg(RmbgCommand),
    /// Run a Monte-Carlo experiment from a JSON config.
    Experiment(ExperimentArgs),
    /// Check a cycle against a graph file.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long = "C", default_value_t = 0.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// complete-bidirected, complete-bipartite-bidirected, random-semidegree
    /// or from-file:<path>.
    #[arg(long, default_value = "complete-bidirected")]
    seed_kind: SeedKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        ModelParams { n: self.n, delta: self.delta, c: self.c, q: self.q, seed_kind: self.seed_kind.clone() }
    }

    fn sample(&self) -> Result<ColouredDigraph> {
        let mut rng = RngStream::root(self.seed, "generate").rng();
        Ok(sample_model(&self.params(), &mut rng)?)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sample the i-th digraph of the interpolating chain instead; the seed
    /// kind then names the undirected base graph.
    #[arg(long)]
    chain_index: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMode {
    Exact,
    Brute,
    Dfs,
}

#[derive(Args)]
struct SolveArgs {
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: SolveMode,
    /// Node budget for the exact solver.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Graph file; without it a complete bidirected host is coloured at random.
    #[arg(long, conflicts_with = "n")]
    graph: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Pipeline parameters as JSON; the flags below override single fields.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AbsorberArgs {
    graph: PathBuf,
    #[arg(long)]
    v: Vertex,
    #[arg(long)]
    c: u32,
    #[arg(long, value_delimiter = ',')]
    exclude_vertices: Vec<Vertex>,
    #[arg(long, value_delimiter = ',')]
    exclude_colours: Vec<u32>,
    #[arg(long)]
    max_candidates: Option<u64>,
    #[arg(long)]
    max_restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum RmbgCommand {
    /// Sample a template as the union of d random perfect matchings.
    Build {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check every admissible deletion, or a random sample of them.
    Certify {
        template: PathBuf,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: CertifyArg,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CertifyArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Overrides the config's output path.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    /// Whitespace-separated vertices, a JSON array, or a JSON object with a
    /// `cycle` field.
    cycle: PathBuf,
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn load_graph(path: &Path) -> Result<ColouredDigraph> {
    read_graph_file(path).with_context(|| format!("reading graph {}", path.display()))
}

fn generate(a: GenerateArgs) -> Result<()> {
    let d = match a.chain_index {
        None => a.model.sample()?,
        Some(i) => {
            let m = a.model.params();
            m.validate()?;
            let g0 = match &m.seed_kind {
                SeedKind::CompleteBidirected => complete_graph(m.n)?,
                SeedKind::CompleteBipartiteBidirected => {
                    complete_bipartite_graph((m.delta * m.n as f64).floor() as usize, m.n)?
                }
                SeedKind::FromFile(p) => load_graph(p)?,
                SeedKind::RandomSemidegree => bail!("the chain needs an undirected base graph"),
            };
            let mut rng = RngStream::root(a.model.seed, "generate").rng();
            sample_gamma(&g0, i, m.c, m.kappa(), &mut rng)?
        }
    };
    write_text(a.out.as_deref(), &write_graph(&d))
}

fn solve(a: SolveArgs) -> Result<bool> {
    let d = load_graph(&a.graph)?;
    match a.mode {
        SolveMode::Exact => {
            let o = exact_rainbow_hc(&d, a.budget)?;
            print_json(&o)?;
            Ok(o.found())
        }
        SolveMode::Brute => {
            let o = brute_force_rainbow_hc(&d)?;
            print_json(&o)?;
            Ok(o.found())
        }
        SolveMode::Dfs => {
            let p = rainbow_dfs_path(&d)?;
            print_json(&json!({ "length": p.len(), "path": p.vertices() }))?;
            Ok(true)
        }
    }
}

fn pipeline(a: PipelineArgs) -> Result<bool> {
    let mut params: PipelineParams = match &a.params {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => PipelineParams::default(),
    };
    if let Some(mu) = a.mu {
        params.mu = mu;
    }
    if let Some(d) = a.d {
        params.d = d;
    }
    if a.k.is_some() {
        params.k = a.k;
    }
    let d = match (&a.graph, a.n) {
        (Some(p), _) => load_graph(p)?,
        (None, Some(n)) => {
            let model = ModelArgs { n, delta: 1.0, c: 0.0, q: 1.0, seed_kind: SeedKind::CompleteBidirected, seed: a.seed };
            model.sample()?
        }
        (None, None) => bail!("give --graph or --n"),
    };
    let stream = RngStream::root(a.seed, "pipeline");
    let report = match assemble_hamilton_cycle(&d, &params, &stream) {
        Ok(asm) => {
            let verdict = verify_rainbow_hamilton_cycle(&d, &asm.cycle);
            if !verdict.accepted {
                bail!("assembled cycle rejected by the verifier: {:?}", verdict.violation);
            }
            json!({
                "status": "found",
                "cycle": asm.cycle,
                "params": params,
                "seed": a.seed,
                "timings": asm.timings,
                "leftover": asm.leftover,
                "certification": asm.certification,
            })
        }
        Err(PipelineError::Failure(f)) => json!({
            "status": "failed",
            "stage": f.stage,
            "detail": f.detail,
            "witness": f.witness,
            "params": params,
            "seed": a.seed,
        }),
        Err(e @ PipelineError::Input(_)) => return Err(e.into()),
    };
    let ok = report["status"] == "found";
    print_json(&report)?;
    Ok(ok)
}

fn absorber(a: AbsorberArgs) -> Result<bool> {
    let d = load_graph(&a.graph)?;
    let mut allowed_v = FixedBitSet::with_capacity(d.n());
    allowed_v.insert_range(..);
    for &x in &a.exclude_vertices {
        allowed_v.set(x as usize, false);
    }
    let mut allowed_c = FixedBitSet::with_capacity(d.kappa());
    allowed_c.insert_range(..);
    for &x in &a.exclude_colours {
        allowed_c.set(x as usize, false);
    }
    let mut budget = AbsorberSearchBudget::default();
    if let Some(x) = a.max_candidates {
        budget.max_candidates = x;
    }
    if let Some(x) = a.max_restarts {
        budget.max_restarts = x;
    }
    let mut rng = RngStream::root(a.seed, "absorber").rng();
    match find_absorber(&d, a.v, a.c, &allowed_v, &allowed_c, &budget, &mut rng) {
        Ok(abs) => {
            let edges: Vec<_> = abs.roles.gadget_edges().iter().zip(&abs.edge_colours).map(|(&(u, v), &c)| [u, v, c]).collect();
            print_json(&json!({ "status": "found", "roles": abs.roles, "edges": edges, "absorber": abs }))?;
            Ok(true)
        }
        Err(f) => {
            print_json(&json!({ "status": "failed", "stage": f.stage, "detail": f.detail }))?;
            Ok(false)
        }
    }
}

fn rmbg(cmd: RmbgCommand) -> Result<bool> {
    match cmd {
        RmbgCommand::Build { m, d, seed, out } => {
            let t = build_rmbg(m, d, &mut RngStream::root(seed, "rmbg").rng())?;
            write_text(out.as_deref(), &(serde_json::to_string_pretty(&t)? + "\n"))?;
            Ok(true)
        }
        RmbgCommand::Certify { template, mode, trials, seed } => {
            let text = fs::read_to_string(&template).with_context(|| format!("reading {}", template.display()))?;
            let t: RmbgTemplate = serde_json::from_str(&text).context("parsing template")?;
            let mode = match mode {
                CertifyArg::Exhaustive => CertifyMode::Exhaustive,
                CertifyArg::Sampled => CertifyMode::Sampled { trials, seed },
            };
            let report = certify_robust_matchability(&t, mode)?;
            print_json(&report)?;
            Ok(report.pass)
        }
    }
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let table = rainbow_hc::harness::run_experiment(&cfg)?;
    let format = match a.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    match a.out.or(cfg.output) {
        Some(p) => emit_results(&table, format, &p).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let out = io::stdout().lock();
            match format {
                OutputFormat::Csv => write_csv(&table, out)?,
                OutputFormat::Json => write_json(&table, out)?,
            }
        }
    }
    Ok(())
}

fn parse_cycle(text: &str) -> Result<Vec<Vertex>> {
    let t = text.trim_start();
    if t.starts_with('[') || t.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(t).context("parsing cycle JSON")?;
        let arr = if v.is_object() { v.get("cycle").cloned().unwrap_or_default() } else { v };
        return serde_json::from_value(arr).context("cycle must be an array of vertex ids");
    }
    t.split_whitespace().map(|w| w.parse::<Vertex>().with_context(|| format!("bad vertex `{w}`"))).collect()
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let d = load_graph(&a.graph)?;
    let seq = parse_cycle(&fs::read_to_string(&a.cycle).with_context(|| format!("reading {}", a.cycle.display()))?)?;
    let verdict = verify_rainbow_hamilton_cycle(&d, &seq);
    print_json(&verdict)?;
    Ok(verdict.accepted)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Solve(a) => solve(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Absorber(a) => absorber(a),
        Command::Rmbg(c) => rmbg(c),
        Command::Experiment(a) => experiment(a).map(|_| true),
        Command::Verify(a) => verify(a),
    }
}

/// Exit status 0 on success, 1 when the requested object was not found or
/// was rejected, 2 on errors.
fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
