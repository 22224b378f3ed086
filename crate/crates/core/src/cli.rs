//! Command-line front end. Exit codes: 0 success, 1 verification mismatch,
//! 2 usage, configuration, or I/O error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::cnf::{parse_dimacs, render_image, Palette, ParseMode};
use crate::oracle::{brute_force_sat, MAX_BRUTE_FORCE_VARS};
use crate::pipeline::config::GeneratorOption;
use crate::pipeline::export::{read_dataset, read_labels, LABELS_FILE};
use crate::pipeline::mix::for_each_record;
use crate::pipeline::{
    benchmark_throughput, ExportCaps, Exporter, Format, GeneratorMixConfig, Manifest, MixSampler, StoredRecord,
};
use crate::rand_dist::{DistributionSpec, RngState};
use crate::sat_gen::{generate_sat, SatGenConfig};
use crate::unsat_gen::{generate_unsat, UnsatGenConfig};
use crate::{GenError, Label};

/// Problems generated per parallel batch by `gen-sat`/`gen-unsat`.
const CHUNK: usize = 1024;

#[derive(Parser, Debug)]
#[command(name = "satforge", version, about = "Generate, verify, and export labeled CNF problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Satisfiable problems with a hidden assignment.
    GenSat(GenArgs),
    /// Unsatisfiable problems grown by inverse resolution.
    GenUnsat {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, value_enum, default_value_t = Preset::Shallow)]
        preset: Preset,
    },
    /// Labeled problems drawn from the configured generator mix.
    GenMix {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's largest variable count.
        #[arg(long)]
        max_vars: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Packed)]
        format: Format,
    },
    /// Check a dataset's labels against exhaustive search.
    Verify {
        dir: PathBuf,
        /// Problems with more variables than this are skipped.
        #[arg(long, default_value_t = 20)]
        max_vars: usize,
    },
    /// Measure generation throughput at a fixed shape.
    Bench {
        #[arg(long, default_value_t = 15)]
        n: usize,
        /// Defaults to round(4.27 * n).
        #[arg(long)]
        m: Option<usize>,
        /// Seconds.
        #[arg(long, default_value_t = 5.0)]
        duration: f64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Draw a DIMACS file as a PPM image.
    Render {
        input: PathBuf,
        /// Defaults to the input path with a .ppm extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long)]
        lenient: bool,
    },
    /// Convert a dataset between formats, optionally dropping oversize records.
    Export {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        max_vars: Option<usize>,
        #[arg(long)]
        max_clauses: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    /// Defaults to round(4.27 * n).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::DimacsDir)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Shallow,
    Deep,
}

enum Failure {
    Mismatch,
    Error(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Error(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Mismatch) => 1,
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<GeneratorMixConfig, Failure> {
    Ok(match path {
        Some(p) => GeneratorMixConfig::load(p)?,
        None => GeneratorMixConfig::default(),
    })
}

fn default_m(n: usize) -> usize {
    ((4.27 * n as f64).round() as usize).max(1)
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::GenSat(g) => {
            let cfg = load_config(g.config.as_deref())?;
            let b = &cfg.base;
            let sat = SatGenConfig {
                n: g.n,
                m: g.m.unwrap_or_else(|| default_m(g.n)),
                vars: b.vars.clone(),
                lits_clause: b.lits_clause.clone(),
                polarities: b.polarities.clone(),
                polarity_bias: b.polarity_bias.clone(),
            };
            sat.validate()?;
            gen_simple(&g, &cfg, GeneratorOption::UniformBias, |rng| generate_sat(&sat, rng))
        }
        Command::GenUnsat { gen: g, preset } => {
            let cfg = load_config(g.config.as_deref())?;
            let m = g.m.unwrap_or_else(|| default_m(g.n));
            let (p, option) = match preset {
                Preset::Shallow => (&cfg.shallow, GeneratorOption::ShallowBloom),
                Preset::Deep => (&cfg.deep, GeneratorOption::DeepBloom),
            };
            let b = &cfg.base;
            let unsat = UnsatGenConfig {
                n: g.n,
                m,
                init_size: cfg.init_size,
                depth: p.depth,
                down_clause: DistributionSpec::Bernoulli { p: p.down_clause },
                vars: b.vars.clone(),
                lits_clause: b.lits_clause.clone(),
                polarities: b.polarities.clone(),
                bloom: b.bloom.clone(),
                record_trace: false,
            };
            unsat.validate()?;
            gen_simple(&g, &cfg, option, |rng| generate_unsat(&unsat, rng))
        }
        Command::GenMix { seed, config, max_vars, count, out, format } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(v) = max_vars {
                cfg.max_vars = v;
            }
            let mix = MixSampler::new(&cfg)?;
            let mut ex = Exporter::create(&out, format, ExportCaps::default())?
                .with_provenance(Some(cfg.seed), Some(cfg.hash()));
            for_each_record(&mix, cfg.seed, count, |r| ex.push(&StoredRecord::from(&r)).map_err(Failure::from))?;
            report(&ex.finish()?, &out);
            Ok(())
        }
        Command::Verify { dir, max_vars } => verify(&dir, max_vars.min(MAX_BRUTE_FORCE_VARS)),
        Command::Bench { n, m, duration, workers, seed, config, json } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if !(duration.is_finite() && duration >= 0.0) {
                return Err(Failure::Error("duration must be a non-negative number of seconds".into()));
            }
            let workers = workers.unwrap_or_else(rayon::current_num_threads);
            let r = benchmark_throughput(
                &cfg,
                n,
                m.unwrap_or_else(|| default_m(n)),
                Duration::from_secs_f64(duration),
                workers,
            )?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{r}");
            }
            Ok(())
        }
        Command::Render { input, out, scale, lenient } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
            let cnf = parse_dimacs(&text, mode).map_err(|e| format!("{}: {e}", input.display()))?;
            let raster = render_image(&cnf.to_dense(), &Palette::default(), scale)?;
            let out = out.unwrap_or_else(|| input.with_extension("ppm"));
            fs::write(&out, raster.to_ppm_bytes()).map_err(|e| format!("{}: {e}", out.display()))?;
            println!("wrote {}x{} image to {}", raster.width, raster.height, out.display());
            Ok(())
        }
        Command::Export { input, out, format, max_vars, max_clauses } => {
            let records = read_dataset(&input)?;
            let source = if input.is_dir() { Manifest::read(&input).ok() } else { None };
            let mut ex = Exporter::create(&out, format, ExportCaps { max_vars, max_clauses })?;
            if let Some(m) = source {
                ex = ex.with_provenance(m.seed, m.config_hash);
            }
            for r in &records {
                ex.push(r)?;
            }
            report(&ex.finish()?, &out);
            Ok(())
        }
    }
}

fn report(m: &Manifest, out: &Path) {
    println!(
        "wrote {} records ({} SAT, {} UNSAT, {} skipped) to {} as {}",
        m.records,
        m.sat,
        m.unsat,
        m.skipped,
        out.display(),
        m.format.name()
    );
}

/// Problem `i` of a run uses stream `i` of the seed, as in the mix.
fn gen_simple<F>(g: &GenArgs, cfg: &GeneratorMixConfig, option: GeneratorOption, make: F) -> Result<(), Failure>
where
    F: Fn(&mut RngState) -> Result<crate::LabeledProblem, GenError> + Sync,
{
    let seed = g.seed.unwrap_or(cfg.seed);
    let mut ex =
        Exporter::create(&g.out, g.format, ExportCaps::default())?.with_provenance(Some(seed), Some(cfg.hash()));
    let mut start = 0;
    while start < g.count {
        let end = (start + CHUNK).min(g.count);
        let chunk: Result<Vec<StoredRecord>, GenError> = (start..end)
            .into_par_iter()
            .map(|i| {
                let p = make(&mut RngState::new(seed, i as u64))?;
                Ok(StoredRecord { encoding: p.cnf.to_dense(), label: p.label, option_id: option.id() })
            })
            .collect();
        for r in chunk? {
            ex.push(&r)?;
        }
        start = end;
    }
    report(&ex.finish()?, &g.out);
    Ok(())
}

fn verify(path: &Path, cap: usize) -> Result<(), Failure> {
    let records = read_dataset(path)?;
    let names: Vec<String> = if path.join(LABELS_FILE).is_file() {
        read_labels(path)?.into_iter().map(|e| e.file).collect()
    } else {
        (0..records.len()).map(|i| format!("record {i}")).collect()
    };
    let outcome: Vec<Option<bool>> = records
        .par_iter()
        .map(|r| {
            (r.n() <= cap).then(|| {
                let sat = brute_force_sat(&r.to_cnf()).expect("n is under the cap").is_sat();
                sat == (r.label == Label::Sat)
            })
        })
        .collect();
    let checked = outcome.iter().filter(|o| o.is_some()).count();
    let skipped = records.len() - checked;
    let mut mismatches = 0;
    for (name, o) in names.iter().zip(&outcome) {
        if *o == Some(false) {
            mismatches += 1;
            eprintln!("mismatch: {name}");
        }
    }
    if checked == 0 {
        println!("nothing to verify ({skipped} skipped over {cap} variables)");
        return Ok(());
    }
    let pct = 100.0 * (checked - mismatches) as f64 / checked as f64;
    let pct = if mismatches == 0 { "100".to_string() } else { format!("{pct:.2}") };
    println!("verified {checked} problems ({skipped} skipped over {cap} variables): {pct}% agreement");
    if mismatches > 0 {
        Err(Failure::Mismatch)
    } else {
        Ok(())
    }
}
