//! Command-line front door for packing-lab.
//!
//! Every run is reproducible from its command line: randomized paths take
//! an explicit `--seed` (default 0), and JSON output has a fixed key
//! order with timing isolated in a `meta` field so payloads can be
//! compared byte for byte.
//!
//! Exit codes: 0 success, 2 input error, 3 size-guard refusal,
//! 4 certificate or verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;

use packing_lab::constructions::{
    build_levels, make_schedule_limited, perfect_tree_generator, sigma_sets, union_demo,
    TerminalMode,
};
use packing_lab::correlation::{covers, cross_correlation, difference_set, Method};
use packing_lab::group::{DenseSet, Group, Norm, DEFAULT_ELEMENT_LIMIT};
use packing_lab::packing::{
    packing_index_exact, packing_index_lower, spectrum_scan, SpectrumReport, DEFAULT_EXACT_LIMIT,
};
use packing_lab::setfile::{load_set, parse_group, save_set};
use packing_lab::{Error, Result};

const SCHEMA: &str = "packing-lab/1";

#[derive(Parser)]
#[command(name = "packing-lab", version, about = "Packing indices of subsets in finite Abelian metric groups")]
struct Cli {
    /// Refuse groups with more elements than this.
    #[arg(long, global = true, default_value_t = DEFAULT_ELEMENT_LIMIT)]
    size_limit: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Packing index of a set at threshold t, exact or heuristic.
    #[command(group(ArgGroup::new("input").required(true).args(["set", "infile"])))]
    #[command(group(ArgGroup::new("mode").args(["exact", "heuristic"])))]
    Index {
        /// Group string (Z:6, Z:9x9, Z2^4); required with --set.
        #[arg(long)]
        group: Option<String>,
        /// Comma-separated canonical element indices.
        #[arg(long)]
        set: Option<String>,
        /// Set file as an alternative to --group/--set.
        #[arg(long = "in")]
        infile: Option<PathBuf>,
        /// Intersection threshold: pairs of translates may share ≤ t points.
        #[arg(long, default_value_t = 0)]
        t: u64,
        /// Force the exact branch-and-bound solver.
        #[arg(long)]
        exact: bool,
        /// Force the greedy heuristic with randomized restarts.
        #[arg(long)]
        heuristic: bool,
        /// Restart count for the heuristic.
        #[arg(long, default_value_t = 4)]
        effort: u32,
        /// RNG seed for heuristic restarts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exhaustive sharp-index spectrum of a small group (CSV).
    Spectrum {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 0)]
        t: u64,
        /// Only scan subsets containing 0 (sharp indices are translation
        /// invariant); raises the size limit from 16 to 20.
        #[arg(long)]
        reduce_symmetry: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Difference set A − A written as a set file.
    Diffset {
        #[arg(long = "in")]
        infile: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlation table g ↦ |A ∩ (g+B)| as CSV, with a JSON summary.
    Corr {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "auto")]
        method: String,
        /// CSV destination; without it the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the Σ₀/Σ₁ scale sets, verify certificates, report densities.
    ConstructSigma {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value = "sparse")]
        terminal: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for a.json, b.json, c.json and the level sets.
        #[arg(long)]
        export_sets: Option<PathBuf>,
    },
    /// Binary-product generator of pairwise disjoint translates.
    ConstructTree {
        #[arg(long = "in")]
        infile: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        /// Set file for the generated witness S.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-δ coverage: does A + ball(δ) reach every element?
    Cover {
        #[arg(long = "in")]
        infile: PathBuf,
        #[arg(long, default_value_t = 0)]
        delta: u64,
    },
    /// Full union pipeline: Σ sets, witnesses, coverage, θ.
    DemoUnion {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value = "dense")]
        terminal: String,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    schema: &'static str,
    command: &'static str,
    report: T,
    meta: Meta,
}

#[derive(Serialize)]
struct Meta {
    elapsed_ms: u128,
}

fn emit<T: Serialize>(command: &'static str, report: T, started: Instant, out: Option<&Path>) -> Result<()> {
    let env = Envelope { schema: SCHEMA, command, report, meta: Meta { elapsed_ms: started.elapsed().as_millis() } };
    let text = serde_json::to_string_pretty(&env).expect("report serializes");
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_indices(group: &Group, s: &str) -> Result<DenseSet> {
    let mut set = DenseSet::empty(group.clone());
    for part in s.split(',') {
        let i: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad element index `{part}`")))?;
        if i >= group.size() {
            return Err(Error::Input(format!("element index {i} outside |G| = {}", group.size())));
        }
        set.insert_index(i);
    }
    Ok(set)
}

fn load_input(
    group: &Option<String>,
    set: &Option<String>,
    infile: &Option<PathBuf>,
    limit: usize,
) -> Result<(Group, DenseSet)> {
    if let Some(path) = infile {
        return load_set(path, limit);
    }
    let gs = group
        .as_ref()
        .ok_or_else(|| Error::Input("--set needs --group".into()))?;
    let g = Group::with_element_limit(parse_group(gs)?, limit)?;
    let s = parse_indices(&g, set.as_ref().expect("clap guarantees --set here"))?;
    Ok((g, s))
}

fn write_corr_csv(w: &mut impl std::io::Write, table: &packing_lab::correlation::CorrTable) -> std::io::Result<()> {
    writeln!(w, "index,g_coords,value")?;
    let group = table.group();
    for (i, &v) in table.values().iter().enumerate() {
        let coords = group
            .elem_at(i)
            .coords
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("x");
        writeln!(w, "{i},{coords},{v}")?;
    }
    Ok(())
}

fn write_spectrum_csv(w: &mut impl std::io::Write, r: &SpectrumReport) -> std::io::Result<()> {
    writeln!(w, "# group={} t={} reduce_symmetry={}", r.group, r.threshold, r.reduce_symmetry)?;
    writeln!(
        w,
        "# torsion: |[G]_2|={} |[G]_3|={} |G/[G]_2|={} G_eq_[G]_3={}",
        r.torsion.order2_subgroup, r.torsion.order3_subgroup, r.torsion.quotient2, r.torsion.all_order3
    )?;
    let absent: Vec<String> = r.expected_absent.iter().map(|v| v.to_string()).collect();
    writeln!(w, "# expected_absent_sharp: {}", if absent.is_empty() { "none".into() } else { absent.join(";") })?;
    let hits: Vec<String> = r.counterexamples.iter().map(|v| v.to_string()).collect();
    writeln!(w, "# observed_counterexamples: {}", if hits.is_empty() { "none".into() } else { hits.join(";") })?;
    writeln!(w, "sharp_value,count,example_subset")?;
    for (value, entry) in &r.histogram {
        let example: Vec<String> = entry.example.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{value},{},{}", entry.count, example.join(";"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let limit = cli.size_limit;
    match cli.command {
        Command::Index { group, set, infile, t, exact, heuristic, effort, seed } => {
            let (g, a) = load_input(&group, &set, &infile, limit)?;
            let use_exact = if exact {
                true
            } else if heuristic {
                false
            } else {
                g.size() <= DEFAULT_EXACT_LIMIT
            };
            let report = if use_exact {
                packing_index_exact(&a, t)?
            } else {
                packing_index_lower(&a, t, effort, seed)?
            };
            emit("index", report, started, None)
        }
        Command::Spectrum { group, t, reduce_symmetry, out } => {
            let g = Group::with_element_limit(parse_group(&group)?, limit)?;
            let report = spectrum_scan(&g, t, reduce_symmetry)?;
            let mut buf = Vec::new();
            write_spectrum_csv(&mut buf, &report).expect("in-memory write");
            match out {
                Some(path) => std::fs::write(&path, buf)
                    .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{}", String::from_utf8(buf).expect("csv is utf8"));
                    Ok(())
                }
            }
        }
        Command::Diffset { infile, out } => {
            let (_, a) = load_set(&infile, limit)?;
            let d = difference_set(&a)?;
            save_set(&out, &d)?;
            #[derive(Serialize)]
            struct DiffsetReport {
                cardinality: u64,
                density: f64,
                covers_group: bool,
            }
            emit(
                "diffset",
                DiffsetReport {
                    cardinality: d.cardinality() as u64,
                    density: d.density(),
                    covers_group: d.is_full(),
                },
                started,
                None,
            )
        }
        Command::Corr { a, b, method, out } => {
            let (ga, sa) = load_set(&a, limit)?;
            let (gb, sb) = load_set(&b, limit)?;
            if ga != gb {
                return Err(Error::Input("correlation inputs live in different groups".into()));
            }
            let table = cross_correlation(&sa, &sb, method.parse::<Method>()?)?;
            match out {
                Some(path) => {
                    let mut file = std::io::BufWriter::new(std::fs::File::create(&path).map_err(
                        |e| Error::Input(format!("cannot write {}: {e}", path.display())),
                    )?);
                    write_corr_csv(&mut file, &table)
                        .map_err(|e| Error::Input(format!("cannot write CSV: {e}")))?;
                    emit("corr", table.summary(), started, None)
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    write_corr_csv(&mut stdout, &table)
                        .map_err(|e| Error::Input(format!("cannot write CSV: {e}")))?;
                    Ok(())
                }
            }
        }
        Command::ConstructSigma { dim, levels, terminal, out, export_sets } => {
            let sched = make_schedule_limited(dim, levels, terminal.parse::<TerminalMode>()?, limit)?;
            let level_sets = build_levels(&sched)?;
            let pair = sigma_sets(&sched, &level_sets)?;
            if let Some(dir) = export_sets {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| Error::Input(format!("cannot create {}: {e}", dir.display())))?;
                save_set(&dir.join("a.json"), &pair.a)?;
                save_set(&dir.join("b.json"), &pair.b)?;
                save_set(&dir.join("c.json"), &pair.c)?;
                for (n, set) in pair.levels.sets.iter().enumerate() {
                    save_set(&dir.join(format!("h{n}.json")), set)?;
                }
            }
            #[derive(Serialize)]
            struct SigmaReport {
                schedule: packing_lab::constructions::ScaleSchedule,
                level_sizes: Vec<u64>,
                a_count: u64,
                b_count: u64,
                c_count: u64,
                a_density: f64,
                b_density: f64,
                c_density: f64,
                even_product: u64,
                odd_product: u64,
                certificates: Vec<packing_lab::constructions::Certificate>,
            }
            let report = SigmaReport {
                level_sizes: pair.levels.sets.iter().map(|s| s.cardinality() as u64).collect(),
                a_count: pair.a.cardinality() as u64,
                b_count: pair.b.cardinality() as u64,
                c_count: pair.c.cardinality() as u64,
                a_density: pair.a.density(),
                b_density: pair.b.density(),
                c_density: pair.c.density(),
                even_product: pair.even_product,
                odd_product: pair.odd_product,
                certificates: pair.certificates.clone(),
                schedule: pair.schedule,
            };
            emit("construct-sigma", report, started, out.as_deref())
        }
        Command::ConstructTree { infile, max_depth, out } => {
            let (_, a) = load_set(&infile, limit)?;
            let tree = perfect_tree_generator(&a, max_depth)?;
            if let Some(path) = &out {
                save_set(path, &tree.s)?;
            }
            #[derive(Serialize)]
            struct TreeReport {
                depth: usize,
                branch_points: Vec<packing_lab::Elem>,
                radii: Vec<(u64, u64)>,
                witness_size: u64,
                pairs_verified: usize,
                verified: bool,
            }
            emit(
                "construct-tree",
                TreeReport {
                    depth: tree.depth(),
                    branch_points: tree.branch_points.clone(),
                    radii: tree.radii.clone(),
                    witness_size: tree.s.cardinality() as u64,
                    pairs_verified: tree.pairs_verified,
                    verified: true,
                },
                started,
                None,
            )
        }
        Command::Cover { infile, delta } => {
            let (_, a) = load_set(&infile, limit)?;
            #[derive(Serialize)]
            struct CoverReport {
                ok: bool,
                delta: u64,
            }
            emit("cover", CoverReport { ok: covers(&a, Norm(delta)), delta }, started, None)
        }
        Command::DemoUnion { dim, levels, terminal, max_depth, out } => {
            let sched = make_schedule_limited(dim, levels, terminal.parse::<TerminalMode>()?, limit)?;
            let report = union_demo(&sched, max_depth)?;
            emit("demo-union", report, started, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PACKING_LAB_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("thread pool initializes once");
            }
            _ => {
                eprintln!("input error: PACKING_LAB_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            let code = match e {
                Error::Input(_) => 2,
                Error::SizeGuard(_) => 3,
                Error::Verification(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}
