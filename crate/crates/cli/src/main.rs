//! Experiment runner: trace targets, generate levels with the three
//! generators, evaluate level groups, and validate corpora.
//!
//! Every command is a pure function of its inputs and the master seed;
//! re-running a command with the same inputs reproduces its outputs
//! byte for byte. The run manifest written by `generate` echoes the full
//! configuration and can be fed back via `--config`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use scenestitch::agent::{evaluate_n_runs, plan_and_play};
use scenestitch::baselines::{generate_until_playable, greedy_level, random_level, BaselineError};
use scenestitch::corpus::synthetic::{build_synthetic_corpus, SyntheticConfig};
use scenestitch::corpus::{load_corpus, write_corpus, Corpus};
use scenestitch::evolve::{run_evolution, EvolveConfig, GenerationStats};
use scenestitch::fitness::{select_scoring_trace, MechanicSequence};
use scenestitch::level::{assemble_level, parse_level_text, serialize_level_text, Chromosome, MechanicSet, TileGrid};
use scenestitch::metrics::{
    mechanic_match_stats, playability, vs_target_diversity, within_group_diversity,
};
use scenestitch::seeds;

#[derive(Parser)]
#[command(name = "scenestitch", version, about = "Scene-stitching level generation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the agent once on a level and write its mechanic sequence.
    Trace(TraceArgs),
    /// Generate playable levels with a generator and write them plus reports.
    Generate(GenerateArgs),
    /// Evaluate a directory of levels against a target.
    Evaluate(EvaluateArgs),
    /// Validate a corpus: parse every scene and verify labels via play.
    CorpusCheck(CorpusCheckArgs),
    /// Build the synthetic scene corpus and write it to disk.
    CorpusSynth(CorpusSynthArgs),
}

/// Everything a generation run needs; the manifest echoes this struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ExperimentConfig {
    corpus: Option<PathBuf>,
    /// Target as a mechanic-sequence file (one name per line).
    target: Option<PathBuf>,
    /// Target as a level file; it is traced once to obtain the sequence.
    target_level: Option<PathBuf>,
    generator: Generator,
    levels_to_generate: usize,
    master_seed: u64,
    output: Option<PathBuf>,
    /// Generation attempts allowed across the whole run.
    max_attempts: usize,
    /// Agent runs per level during evaluation.
    eval_runs: usize,
    pattern_window: (usize, usize),
    kl_epsilon: f64,
    /// All evolution hyperparameters, including fitness weights and the
    /// simulator and agent configurations shared by every command.
    evolve: EvolveConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: None,
            target: None,
            target_level: None,
            generator: Generator::Evolve,
            levels_to_generate: 20,
            master_seed: 0,
            output: None,
            max_attempts: 2000,
            eval_runs: 20,
            pattern_window: (3, 3),
            kl_epsilon: 1e-5,
            evolve: EvolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
enum Generator {
    #[default]
    Evolve,
    Greedy,
    Random,
}

#[derive(Args)]
struct TraceArgs {
    /// Level file to trace.
    level: PathBuf,
    /// Master seed for the agent run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output mechanic-sequence file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the raw `tick,kind,x` event dump here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON config file (a previous run manifest also works).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Target mechanic-sequence file.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Target level file (traced once to get the sequence).
    #[arg(long)]
    target_level: Option<PathBuf>,
    #[arg(long, value_enum)]
    generator: Option<Generator>,
    /// Playable levels to produce.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    max_attempts: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory containing `.lvl` files.
    #[arg(long)]
    levels: PathBuf,
    /// Target mechanic-sequence file.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Target level file; enables vs-target diversity (traced for the
    /// sequence when --target is absent).
    #[arg(long)]
    target_level: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report output directory (defaults to the level directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusCheckArgs {
    /// Corpus manifest path.
    #[arg(long)]
    corpus: PathBuf,
    /// Agent runs per scene.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CorpusSynthArgs {
    /// Output directory for the manifest and scene files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed-jittered variants per scene family.
    #[arg(long, default_value_t = 2)]
    variants: usize,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Trace(args) => cmd_trace(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::CorpusCheck(args) => cmd_corpus_check(args),
        Command::CorpusSynth(args) => cmd_corpus_synth(args),
    }
}

fn read_level(path: &Path) -> Result<TileGrid> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_level_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn sequence_summary(seq: &MechanicSequence) -> String {
    use std::collections::BTreeMap;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in &seq.0 {
        *counts.entry(m.name()).or_default() += 1;
    }
    let most = counts.iter().max_by_key(|(_, &c)| c);
    let least = counts.iter().min_by_key(|(_, &c)| c);
    let mut out = String::new();
    out.push_str(&format!("total: {}\n", seq.len()));
    out.push_str(&format!("unique: {}\n", counts.len()));
    if let (Some((mk, mc)), Some((lk, lc))) = (most, least) {
        out.push_str(&format!("most frequent: {mk} ({mc})\n"));
        out.push_str(&format!("least frequent: {lk} ({lc})\n"));
    }
    out
}

fn cmd_trace(args: TraceArgs) -> Result<()> {
    let grid = read_level(&args.level)?;
    let config = ExperimentConfig::default();
    let mut agent = config.evolve.agent.clone();
    agent.noise_seed = seeds::split(args.seed, seeds::STREAM_TRACE_AGENT);
    let trace = plan_and_play(&grid, &config.evolve.sim, &agent)?;
    if !trace.won {
        eprintln!(
            "warning: agent did not win this level; writing the best attempt \
             (distance {:.1} of {} tiles)",
            trace.distance,
            grid.width()
        );
    }
    let seq = MechanicSequence::from_trace(&trace);
    print!("{}", sequence_summary(&seq));
    if !trace.won {
        println!("non-winning: true");
    }
    if let Some(out) = &args.out {
        fs::write(out, seq.to_text()).with_context(|| format!("writing {}", out.display()))?;
        println!("wrote {}", out.display());
    }
    if let Some(dump) = &args.dump {
        fs::write(dump, trace.dump()).with_context(|| format!("writing {}", dump.display()))?;
    }
    Ok(())
}

fn load_corpus_checked(path: &Path) -> Result<Corpus> {
    let loaded = load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    println!("loaded {} scenes from {}", loaded.corpus.len(), path.display());
    Ok(loaded.corpus)
}

/// Resolves the target sequence from a sequence file or by tracing a level.
fn resolve_target(
    target: Option<&Path>,
    target_level: Option<&Path>,
    config: &ExperimentConfig,
) -> Result<MechanicSequence> {
    if let Some(path) = target {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return MechanicSequence::from_text(&text)
            .with_context(|| format!("parsing {}", path.display()));
    }
    if let Some(path) = target_level {
        let grid = read_level(path)?;
        let mut agent = config.evolve.agent.clone();
        agent.noise_seed = seeds::split(config.master_seed, seeds::STREAM_TRACE_AGENT);
        let trace = plan_and_play(&grid, &config.evolve.sim, &agent)?;
        if !trace.won {
            eprintln!("warning: target level was not won; using the best attempt as target");
        }
        return Ok(MechanicSequence::from_trace(&trace));
    }
    bail!("a target is required: pass --target <sequence file> or --target-level <level file>")
}

#[derive(Serialize)]
struct RunManifest<'c> {
    #[serde(flatten)]
    config: &'c ExperimentConfig,
    levels: Vec<LevelRecord>,
    attempts: usize,
    wall_clock_secs: f64,
}

#[derive(Serialize)]
struct LevelRecord {
    file: String,
    seed: u64,
    scenes: usize,
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut config: ExperimentConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.corpus {
        config.corpus = Some(v);
    }
    if let Some(v) = args.target {
        config.target = Some(v);
    }
    if let Some(v) = args.target_level {
        config.target_level = Some(v);
    }
    if let Some(v) = args.generator {
        config.generator = v;
    }
    if let Some(v) = args.count {
        config.levels_to_generate = v;
    }
    if let Some(v) = args.seed {
        config.master_seed = v;
    }
    if let Some(v) = args.out {
        config.output = Some(v);
    }
    if let Some(v) = args.population {
        config.evolve.population_size = v;
    }
    if let Some(v) = args.generations {
        config.evolve.generations = v;
    }
    if let Some(v) = args.max_attempts {
        config.max_attempts = v;
    }

    let corpus_path = config.corpus.clone().context("--corpus is required")?;
    let corpus = load_corpus_checked(&corpus_path)?;
    // The random generator ignores any target, so it needs none.
    let target = if config.generator == Generator::Random
        && config.target.is_none()
        && config.target_level.is_none()
    {
        MechanicSequence::default()
    } else {
        resolve_target(config.target.as_deref(), config.target_level.as_deref(), &config)?
    };
    let out_dir = config.output.clone().context("--out is required")?;
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    println!(
        "generating {} playable {} levels (target: {} mechanics, seed {})",
        config.levels_to_generate,
        match config.generator {
            Generator::Evolve => "evolved",
            Generator::Greedy => "greedy",
            Generator::Random => "random",
        },
        target.len(),
        config.master_seed
    );

    let started = Instant::now();
    let result = match config.generator {
        Generator::Evolve => generate_evolved(&config, &corpus, &target, &out_dir),
        Generator::Greedy | Generator::Random => {
            generate_baseline(&config, &corpus, &target, &out_dir)
        }
    };
    let (records, attempts, partial) = match result {
        Ok((records, attempts)) => (records, attempts, false),
        Err(GenerateOutcome::Partial(records, attempts)) => (records, attempts, true),
        Err(GenerateOutcome::Fatal(err)) => return Err(err),
    };

    let manifest = RunManifest {
        config: &config,
        levels: records,
        attempts,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out_dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    println!(
        "kept {} levels in {} attempts; manifest at {}",
        manifest.levels.len(),
        attempts,
        manifest_path.display()
    );
    if partial {
        bail!(
            "generation budget exhausted: {} of {} levels generated",
            manifest.levels.len(),
            config.levels_to_generate
        );
    }
    Ok(())
}

enum GenerateOutcome {
    Partial(Vec<LevelRecord>, usize),
    Fatal(anyhow::Error),
}

fn write_level(
    out_dir: &Path,
    index: usize,
    chromosome: &Chromosome,
    corpus: &Corpus,
) -> Result<(String, TileGrid)> {
    let grid = assemble_level(chromosome, corpus)?;
    let name = format!("level_{index:02}.lvl");
    let path = out_dir.join(&name);
    fs::write(&path, serialize_level_text(&grid) + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok((name, grid))
}

fn generate_evolved(
    config: &ExperimentConfig,
    corpus: &Corpus,
    target: &MechanicSequence,
    out_dir: &Path,
) -> std::result::Result<(Vec<LevelRecord>, usize), GenerateOutcome> {
    let mut records = Vec::new();
    let mut attempts = 0;
    let mut run_index = 0u64;
    while records.len() < config.levels_to_generate {
        if attempts >= config.max_attempts {
            return Err(GenerateOutcome::Partial(records, attempts));
        }
        attempts += 1;
        let mut evolve_config = config.evolve.clone();
        evolve_config.seed = seeds::indexed(config.master_seed, seeds::STREAM_EVOLVE_INIT, run_index);
        run_index += 1;
        let (best, stats) = run_evolution(target, corpus, &evolve_config);
        // Playable-at-creation gate: one agent run must win.
        let grid = match assemble_level(&best.chromosome, corpus) {
            Ok(grid) => grid,
            Err(err) => return Err(GenerateOutcome::Fatal(err.into())),
        };
        let mut agent = evolve_config.agent.clone();
        agent.noise_seed = seeds::indexed(config.master_seed, seeds::STREAM_BASELINE, run_index);
        let won = match plan_and_play(&grid, &evolve_config.sim, &agent) {
            Ok(trace) => trace.won,
            Err(err) => return Err(GenerateOutcome::Fatal(err.into())),
        };
        if !won {
            println!("run {} produced an unplayable best; retrying", run_index - 1);
            continue;
        }
        let index = records.len();
        let (file, _) = match write_level(out_dir, index, &best.chromosome, corpus) {
            Ok(v) => v,
            Err(err) => return Err(GenerateOutcome::Fatal(err)),
        };
        let stats_path = out_dir.join(format!("stats_{index:02}.csv"));
        let mut csv = String::from(GenerationStats::CSV_HEADER);
        csv.push('\n');
        for row in &stats {
            csv.push_str(&row.csv_row());
            csv.push('\n');
        }
        if let Err(err) = fs::write(&stats_path, csv) {
            return Err(GenerateOutcome::Fatal(err.into()));
        }
        records.push(LevelRecord {
            file,
            seed: evolve_config.seed,
            scenes: best.chromosome.len(),
        });
    }
    Ok((records, attempts))
}

fn generate_baseline(
    config: &ExperimentConfig,
    corpus: &Corpus,
    target: &MechanicSequence,
    out_dir: &Path,
) -> std::result::Result<(Vec<LevelRecord>, usize), GenerateOutcome> {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seeds::split(
        config.master_seed,
        seeds::STREAM_BASELINE,
    ));
    let scene_range = (config.evolve.min_scenes, config.evolve.max_scenes);
    let generator = |rng: &mut rand_chacha::ChaCha8Rng| match config.generator {
        Generator::Greedy => greedy_level(target, corpus, scene_range, rng),
        _ => random_level(corpus, scene_range, rng),
    };
    let outcome = generate_until_playable(
        generator,
        corpus,
        config.levels_to_generate,
        config.max_attempts,
        &config.evolve.sim,
        &config.evolve.agent,
        &mut rng,
    );
    let (chromosomes, attempts, partial) = match outcome {
        Ok(batch) => (batch.chromosomes, batch.attempts, false),
        Err(BaselineError::AttemptsExhausted { kept, attempts }) => (kept, attempts, true),
        Err(err) => return Err(GenerateOutcome::Fatal(err.into())),
    };
    let mut records = Vec::new();
    for (index, chromosome) in chromosomes.iter().enumerate() {
        let (file, _) = match write_level(out_dir, index, chromosome, corpus) {
            Ok(v) => v,
            Err(err) => return Err(GenerateOutcome::Fatal(err)),
        };
        records.push(LevelRecord { file, seed: config.master_seed, scenes: chromosome.len() });
    }
    if partial {
        Err(GenerateOutcome::Partial(records, attempts))
    } else {
        Ok((records, attempts))
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let config = ExperimentConfig::default();
    let mut entries: Vec<PathBuf> = fs::read_dir(&args.levels)
        .with_context(|| format!("reading {}", args.levels.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "lvl"))
        .collect();
    entries.sort();
    if entries.is_empty() {
        bail!("no .lvl files in {}", args.levels.display());
    }
    let target = resolve_target(args.target.as_deref(), args.target_level.as_deref(), &config)?;
    let target_grid = match &args.target_level {
        Some(path) => Some(read_level(path)?),
        None => None,
    };

    let mut names = Vec::new();
    let mut grids = Vec::new();
    for path in &entries {
        match read_level(path) {
            Ok(grid) => {
                names.push(path.file_name().unwrap().to_string_lossy().into_owned());
                grids.push(grid);
            }
            Err(err) => eprintln!("skipping {}: {err:#}", path.display()),
        }
    }
    if grids.is_empty() {
        bail!("no parseable levels");
    }

    let sim = &config.evolve.sim;
    let agent = &config.evolve.agent;
    let mut report = String::new();
    report.push_str(&format!(
        "{:<16} {:>12} {:>8} {:>8} {:>12} {:>12}\n",
        "level", "playability", "matched", "extras", "norm_matched", "norm_extras"
    ));
    let mut results_csv =
        String::from("level,playability,matched,extras,norm_matched,norm_extras\n");
    let mut playabilities = Vec::new();
    for (i, grid) in grids.iter().enumerate() {
        let seed = seeds::indexed(args.seed, seeds::STREAM_EVALUATE, i as u64);
        let p = playability(grid, args.runs, sim, agent, seed)?;
        playabilities.push(p);
        let traces = evaluate_n_runs(grid, args.runs, sim, agent, seed)?;
        let scoring = select_scoring_trace(&traces).unwrap_or(&traces[0]);
        let stats = mechanic_match_stats(scoring, &target);
        let (nm, ne) = stats.normalized.unwrap_or((f64::NAN, f64::NAN));
        report.push_str(&format!(
            "{:<16} {:>12.3} {:>8} {:>8} {:>12.3} {:>12.3}\n",
            names[i], p, stats.matched, stats.extras, nm, ne
        ));
        results_csv.push_str(&format!(
            "{},{:.4},{},{},{:.4},{:.4}\n",
            names[i], p, stats.matched, stats.extras, nm, ne
        ));
    }
    let mean_playability = playabilities.iter().sum::<f64>() / playabilities.len() as f64;
    report.push_str(&format!("\ngroup mean playability: {mean_playability:.3}\n"));

    let mut diversity_csv = String::from("level_id,min_div\n");
    if grids.len() >= 2 {
        let group =
            within_group_diversity(&grids, config.pattern_window, config.kl_epsilon)?;
        for (name, v) in names.iter().zip(&group.per_level) {
            diversity_csv.push_str(&format!("{name},{v:.6}\n"));
        }
        diversity_csv.push_str(&format!("group_mean,{:.6}\n", group.mean));
        report.push_str(&format!(
            "within-group TPKLDiv: {:.3} +/- {:.3}\n",
            group.mean, group.std
        ));
    }
    if let Some(target_grid) = &target_grid {
        let vs = vs_target_diversity(&grids, target_grid, config.pattern_window, config.kl_epsilon)?;
        report.push_str(&format!(
            "vs-target TPKLDiv: {:.3} +/- {:.3}\n",
            vs.mean, vs.std
        ));
    }

    print!("{report}");
    let out_dir = args.out.unwrap_or_else(|| args.levels.clone());
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("report.txt"), &report)?;
    fs::write(out_dir.join("results.csv"), &results_csv)?;
    fs::write(out_dir.join("diversity.csv"), &diversity_csv)?;
    println!("reports written to {}", out_dir.display());
    Ok(())
}

fn cmd_corpus_check(args: CorpusCheckArgs) -> Result<()> {
    let corpus = load_corpus_checked(&args.corpus)?;
    let config = ExperimentConfig::default();
    let mut failures = 0;
    for scene in corpus.scenes() {
        let chromosome = Chromosome::new(vec![scene.id]);
        let grid = assemble_level(&chromosome, &corpus)?;
        let mut fired = MechanicSet::EMPTY;
        let mut wins = 0;
        for run in 0..args.runs {
            let mut agent = config.evolve.agent.clone();
            agent.noise_seed =
                seeds::indexed(args.seed, seeds::STREAM_CORPUS, (scene.id.0 as u64) << 8 | run as u64);
            let trace = plan_and_play(&grid, &config.evolve.sim, &agent)?;
            if trace.won {
                wins += 1;
                for event in &trace.events {
                    fired.insert(event.kind);
                }
            }
        }
        let labels_ok = scene.mechanics.is_subset_of(fired);
        if wins == 0 || !labels_ok {
            failures += 1;
            println!(
                "FAIL {}: wins {}/{}, labels {}, fired {}",
                scene.name, wins, args.runs, scene.mechanics, fired
            );
        }
    }
    println!(
        "{} of {} scenes verified ({} failures)",
        corpus.len() - failures,
        corpus.len(),
        failures
    );
    if failures > 0 {
        bail!("{failures} scenes failed verification");
    }
    Ok(())
}

fn cmd_corpus_synth(args: CorpusSynthArgs) -> Result<()> {
    let corpus = build_synthetic_corpus(&SyntheticConfig {
        seed: args.seed,
        variants_per_family: args.variants,
        ..SyntheticConfig::default()
    });
    fs::create_dir_all(&args.out)?;
    let manifest = write_corpus(&corpus, &args.out)?;
    println!("wrote {} scenes; manifest at {}", corpus.len(), manifest.display());
    Ok(())
}
