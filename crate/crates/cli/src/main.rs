use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pmchaos::distributional::{compare, exact_df, spectrum_estimate, Comparison, SamplerConfig};
use pmchaos::graph::{
    adjacency_list, build_covering_graph, component_cycle, component_entropy, components_csv, entropy_lower_bound,
    f_star_periodic_sets, irreducible_components,
};
use pmchaos::map_model::{catalog, spec_file::parse_map};
use pmchaos::symbolic::{
    generator_diagnostic, markov_check, nonempty_cylinders, Approach, GeneratorConfig, GeneratorVerdict,
    DEFAULT_CYLINDER_CAP,
};
use pmchaos::{Rat, RatMap, RatStep, Scalar};

const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_REFUSED: u8 = 3;

/// Distributional chaos analysis of piecewise monotonic Markov maps.
#[derive(Parser)]
#[command(name = "pmchaos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Markov condition and generator diagnostic.
    Check {
        spec: PathBuf,
        #[command(flatten)]
        config: AnalysisConfig,
    },
    /// Covering graph, irreducible components and entropy.
    Graph {
        spec: PathBuf,
        #[command(flatten)]
        config: AnalysisConfig,
    },
    /// Minimal lower distributional functions over sampled pairs.
    Spectrum {
        spec: PathBuf,
        #[command(flatten)]
        config: AnalysisConfig,
        /// Explicit pair `x,y`, evaluated without filtering. Repeatable.
        #[arg(long = "pair", value_name = "X,Y", value_parser = parse_pair)]
        pairs_explicit: Vec<(Rat, Rat)>,
        /// Sample proximal pairs with this threshold (weak spectrum).
        #[arg(long, value_name = "EPS", value_parser = parse_rat)]
        weak: Option<Rat>,
        /// Skip the pointwise-infimum candidate of each sampled group.
        #[arg(long)]
        no_envelope: bool,
    },
    /// Flip-cycle family (x_n, f(x_n)) evaluated exactly for n = 1..=K.
    Counterexample {
        /// Family size K.
        #[arg(long, default_value = "10")]
        count: NonZeroUsize,
        /// Additional members of the family. Repeatable.
        #[arg(long = "member", value_name = "N")]
        members: Vec<NonZeroUsize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct AnalysisConfig {
    /// Orbit length N for empirical functions.
    #[arg(long, default_value = "100000")]
    horizon: NonZeroUsize,
    /// Tail window W over which the empirical min/max is taken.
    #[arg(long, default_value = "10000")]
    window: NonZeroUsize,
    /// Size of the uniform t-grid.
    #[arg(long, default_value = "512")]
    grid: NonZeroUsize,
    /// Random pairs per sampled group.
    #[arg(long, default_value = "200")]
    pairs: NonZeroUsize,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Maximal cylinder depth for the generator diagnostic.
    #[arg(long, default_value = "12")]
    depth: NonZeroUsize,
    /// Depths without diameter decrease before the diagnostic reports a stall.
    #[arg(long, default_value = "3")]
    stall_window: NonZeroUsize,
    /// Run the spectrum even when the generator diagnostic stalls.
    #[arg(long)]
    force: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_rat(text: &str) -> Result<Rat, String> {
    Rat::parse(text.trim()).map_err(|e| e.to_string())
}

fn parse_pair(text: &str) -> Result<(Rat, Rat), String> {
    let (x, y) = text.split_once(',').ok_or("expected X,Y")?;
    Ok((parse_rat(x)?, parse_rat(y)?))
}

fn load(path: &Path) -> Result<RatMap> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_map(&text).with_context(|| format!("{}", path.display()))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Prints the Markov verdict; `false` when the condition fails.
fn report_markov(map: &RatMap) -> bool {
    let report = markov_check(map);
    if report.passed() {
        println!("markov: pass");
        return true;
    }
    println!("markov: FAIL");
    for v in &report.violations {
        let side = match v.approach {
            Approach::FromLeft => "from the left",
            Approach::FromRight => "from the right",
        };
        println!(
            "  branch {} at {} {side}: limit {} is not a partition point",
            v.piece + 1,
            v.critical_point,
            v.limit
        );
    }
    false
}

/// Prints the per-depth table; `false` when the diameters stall.
fn report_generator(map: &RatMap, config: &AnalysisConfig) -> Result<bool> {
    let cfg = GeneratorConfig {
        stall_window: config.stall_window.get(),
        cylinder_cap: DEFAULT_CYLINDER_CAP,
    };
    let diag = generator_diagnostic(map, config.depth.get(), &cfg)?;
    println!("depth;cylinders;max_diameter");
    for (d, (count, diam)) in diag.cylinder_counts.iter().zip(&diag.diameters).enumerate() {
        println!("{};{count};{}", d + 1, diam.to_text());
    }
    match &diag.verdict {
        GeneratorVerdict::Shrinking => println!("generator: shrinking"),
        GeneratorVerdict::Stalled { diameter, first_stall_depth } => {
            println!("generator: stalled at diameter {diameter} from depth {first_stall_depth}")
        }
    }
    Ok(diag.is_shrinking())
}

fn cmd_check(spec: &Path, config: &AnalysisConfig) -> Result<u8> {
    let map = load(spec)?;
    println!("map: {}", spec.display());
    println!("pieces: {}", map.len());
    let markov = report_markov(&map);
    let shrinking = report_generator(&map, config)?;
    if markov && shrinking {
        let cylinders = nonempty_cylinders(&map, config.depth.get(), DEFAULT_CYLINDER_CAP)?;
        println!("cylinders at depth {}: {}", config.depth, cylinders.len());
        Ok(0)
    } else {
        Ok(EXIT_HYPOTHESIS)
    }
}

fn cmd_graph(spec: &Path, config: &AnalysisConfig) -> Result<u8> {
    let map = load(spec)?;
    if !report_markov(&map) {
        return Ok(EXIT_HYPOTHESIS);
    }
    let graph = build_covering_graph(&map)?;
    let components = irreducible_components(&graph);
    println!("nodes: {}, edges: {}", graph.n_nodes(), graph.edge_count());
    for c in &components {
        let nodes: Vec<String> = c.nodes.iter().map(|n| (n + 1).to_string()).collect();
        let cycle = component_cycle(&graph, c);
        let classes: Vec<String> = cycle
            .sets
            .iter()
            .map(|s| format!("{{{}}}", s.iter().map(|n| (n + 1).to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        println!(
            "component {}: nodes {{{}}} basic={} entropy>={:.12} cycle {}",
            c.id + 1,
            nodes.join(","),
            c.is_basic,
            component_entropy(&graph, c),
            classes.join(" -> ")
        );
    }
    let fstar = f_star_periodic_sets(&map)?;
    println!("f*-periodic cycle: period {}", fstar.period);
    println!("entropy lower bound: {:.12}", entropy_lower_bound(&graph));
    write(&config.out_dir, "adjacency.txt", &adjacency_list(&graph))?;
    write(&config.out_dir, "components.csv", &components_csv(&graph, &components))?;
    Ok(0)
}

fn cmd_spectrum(
    spec: &Path,
    config: &AnalysisConfig,
    extra_pairs: Vec<(Rat, Rat)>,
    weak: Option<Rat>,
    envelope: bool,
) -> Result<u8> {
    if config.window >= config.horizon {
        bail!("--window ({}) must be smaller than --horizon ({})", config.window, config.horizon);
    }
    let map = load(spec)?;
    if !report_markov(&map) {
        return Ok(EXIT_HYPOTHESIS);
    }
    if !report_generator(&map, config)? {
        if !config.force {
            eprintln!("refusing to estimate the spectrum without a generator; pass --force to run anyway");
            return Ok(EXIT_REFUSED);
        }
        println!("warning: no generator, finiteness is not guaranteed");
    }
    let graph = build_covering_graph(&map)?;
    let components = irreducible_components(&graph);
    let cfg = SamplerConfig {
        pair_count: config.pairs.get(),
        seed: config.seed,
        horizon: config.horizon.get(),
        window: config.window.get(),
        grid: config.grid.get(),
        envelope,
        weak_epsilon: weak,
        extra_pairs,
        ..SamplerConfig::default()
    };
    let report = spectrum_estimate(&map, &graph, &components, &cfg)?;
    for reason in &report.skipped {
        println!("skipped: {reason}");
    }
    println!("candidates: {}", report.candidates.len());
    println!("minimal elements: {}", report.minimal.len());
    if let Some(eps) = report.largest_zero_interval() {
        println!("largest zero interval: [0, {eps}]");
    }
    let mut json = serde_json::to_string_pretty(&report.to_json())?;
    json.push('\n');
    write(&config.out_dir, "spectrum.json", &json)?;
    remove_stale_curves(&config.out_dir)?;
    for (rank, f) in report.minimal_functions().enumerate() {
        write(&config.out_dir, &format!("minimal_{}.csv", rank + 1), &f.to_csv())?;
    }
    Ok(0)
}

/// Drops `minimal_*.csv` left by an earlier run with more minimal elements.
fn remove_stale_curves(dir: &Path) -> Result<()> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Ok(());
    };
    for entry in entries {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("minimal_") && name.ends_with(".csv") {
            fs::remove_file(&path).with_context(|| format!("cannot remove {}", path.display()))?;
        }
    }
    Ok(())
}

fn comparison_symbol(c: &Comparison<Rat>) -> &'static str {
    match c {
        Comparison::Equal => "=",
        Comparison::Less => "<",
        Comparison::Greater => ">",
        Comparison::Incomparable { .. } => "||",
    }
}

fn cmd_counterexample(count: usize, members: &[NonZeroUsize], out_dir: &Path) -> Result<u8> {
    let map = catalog::flip_cycle::<Rat>();
    let mut ns: Vec<usize> = (1..=count).chain(members.iter().map(|m| m.get())).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut table = String::from("n;x;y;breakpoints;levels\n");
    let mut functions: Vec<RatStep> = Vec::with_capacity(ns.len());
    for &n in &ns {
        let x: Rat = catalog::flip_cycle_seed(n as i64);
        let y = map.eval(&x)?;
        let df = exact_df(&map, &x, &y, 64)?.context("flip-cycle orbits are periodic")?;
        let join = |v: &[Rat]| v.iter().map(Scalar::to_text).collect::<Vec<_>>().join(",");
        let row = format!(
            "{n};{};{};{};{}",
            x.to_text(),
            y.to_text(),
            join(df.lower.breakpoints()),
            join(df.lower.levels())
        );
        println!("{row}");
        table.push_str(&row);
        table.push('\n');
        functions.push(df.lower);
    }
    let mut matrix = String::from("n");
    for n in &ns {
        matrix.push_str(&format!(";{n}"));
    }
    matrix.push('\n');
    for (i, n) in ns.iter().enumerate() {
        matrix.push_str(&n.to_string());
        for g in &functions {
            matrix.push(';');
            matrix.push_str(comparison_symbol(&compare(&functions[i], g)));
        }
        matrix.push('\n');
    }
    write(out_dir, "counterexample.csv", &table)?;
    write(out_dir, "comparison.csv", &matrix)?;
    Ok(0)
}

fn init_threads() -> Result<()> {
    if let Ok(value) = std::env::var("PMCHAOS_THREADS") {
        let n: usize = value.parse().with_context(|| format!("PMCHAOS_THREADS={value:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    init_threads()?;
    match cli.command {
        Command::Check { spec, config } => cmd_check(&spec, &config),
        Command::Graph { spec, config } => cmd_graph(&spec, &config),
        Command::Spectrum {
            spec,
            config,
            pairs_explicit,
            weak,
            no_envelope,
        } => cmd_spectrum(&spec, &config, pairs_explicit, weak, !no_envelope),
        Command::Counterexample { count, members, out_dir } => cmd_counterexample(count.get(), &members, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
