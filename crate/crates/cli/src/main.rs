use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use toral_core::algebra::{LiePosetAlgebra, DEFAULT_TRIALS};
use toral_core::scan::{self, ScanConfig, ScanRecord};
use toral_core::spectral::{principal_general, spectrum, SpectrumReport};
use toral_core::topology::{betti_numbers, order_complex};
use toral_core::toral::{
    build_sequence, catalog, index_by_formula, predict_index_by_rules, verify_toral_pair_seeded, ConstructionSequence,
    Family, ToralPairId, ToralPairReport,
};
use toral_core::{Error, Functional, Poset};

#[derive(Parser)]
#[command(name = "toral", version, about = "Index, spectra and toral posets of type-A Lie poset algebras")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for every randomized step.
    #[arg(long, global = true, env = "TORAL_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generic-rank index of g_A(P).
    Index {
        poset: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Spectrum of the principal element of a Frobenius functional.
    Spectrum { poset: PathBuf, functional: PathBuf },
    /// Toral-pair checks for a catalog family (`P4 7`) or a pair of files.
    VerifyPair { target: String, second: Option<String> },
    /// Run a construction sequence.
    Build {
        sequence: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::All)]
        emit: Emit,
    },
    /// Betti numbers of the order complex.
    Homology {
        poset: PathBuf,
        /// Defaults to the height of the poset (at least 1).
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Binary-spectrum scan over all posets up to isomorphism.
    Scan {
        /// Largest element count (at most 7).
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        min_n: usize,
        /// Largest height.
        #[arg(long)]
        height: Option<usize>,
        /// Include disconnected posets.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// JSON-lines record file.
        #[arg(long, conflicts_with = "resume")]
        out: Option<PathBuf>,
        /// Continue an interrupted record file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Print a catalog pair, or write it to a directory with `--emit`.
    Catalog {
        family: String,
        n: Option<usize>,
        #[arg(long, num_args = 0..=1, default_missing_value = ".")]
        emit: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Poset,
    Functional,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(clap::error::ErrorKind::InvalidValue, msg).exit()
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).unwrap());
}

fn run(cli: &Cli) -> toral_core::Result<ExitCode> {
    match &cli.command {
        Command::Index { poset, trials } => index(cli, poset, *trials),
        Command::Spectrum { poset, functional } => spectrum_cmd(cli, poset, functional),
        Command::VerifyPair { target, second } => verify_pair(cli, target, second.as_deref()),
        Command::Build { sequence, emit } => build(cli, sequence, *emit),
        Command::Homology { poset, max_dim } => homology(cli, poset, *max_dim),
        Command::Scan { n, min_n, height, all, trials, out, resume } => {
            let config = ScanConfig {
                n_min: *min_n,
                n_max: *n,
                height_max: *height,
                connected_only: !all,
                seed: cli.seed,
                trials: *trials,
            };
            scan_cmd(cli, config, out.as_deref(), resume.as_deref())
        }
        Command::Catalog { family, n, emit } => catalog_cmd(cli, family, *n, emit.as_deref()),
    }
}

fn index(cli: &Cli, path: &Path, trials: usize) -> toral_core::Result<ExitCode> {
    if trials == 0 {
        usage_error("--trials must be at least 1");
    }
    let p = Poset::load(path)?;
    let g = LiePosetAlgebra::build(&p)?;
    let index = g.index(trials, cli.seed);
    if cli.json {
        print_json(&json!({ "seed": cli.seed, "trials": trials, "dim": g.dim(), "index": index }));
    } else {
        println!("# seed {} trials {}", cli.seed, trials);
        println!("dim    {}", g.dim());
        println!("index  {index}");
    }
    Ok(ExitCode::SUCCESS)
}

fn print_spectrum(s: &SpectrumReport) {
    let poly: Vec<String> = s.char_poly.coeffs_high_to_low().iter().map(ToString::to_string).collect();
    println!("dim        {}", s.dim);
    println!("char poly  [{}]", poly.join(", "));
    println!("{:>12}  mult", "eigenvalue");
    for (v, m) in &s.eigenvalues {
        println!("{:>12}  {m}", v.to_string());
    }
    if !s.eigenvalues_complete {
        println!("(some roots are not rational)");
    }
    println!("binary     {}", s.binary);
}

fn spectrum_cmd(cli: &Cli, poset: &Path, functional: &Path) -> toral_core::Result<ExitCode> {
    let p = Poset::load(poset)?;
    let f = Functional::load(functional, &p)?;
    let g = LiePosetAlgebra::build(&p)?;
    let s = spectrum(&g, &principal_general(&g, &f)?);
    if cli.json {
        print_json(&serde_json::to_value(&s)?);
    } else {
        print_spectrum(&s);
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_pair(cli: &Cli, target: &str, second: Option<&str>) -> toral_core::Result<ExitCode> {
    let (label, p, f) = match target.parse::<Family>() {
        Ok(family) => {
            let n = match second.map(str::parse::<usize>) {
                None => None,
                Some(Ok(n)) => Some(n),
                Some(Err(_)) => usage_error(&format!("size parameter `{}` is not a number", second.unwrap())),
            };
            let id = ToralPairId::new(family, n).unwrap_or_else(|e| usage_error(&e.to_string()));
            let c = catalog(id)?;
            (id.to_string(), c.poset, c.functional)
        }
        Err(_) => {
            let Some(fpath) = second else {
                usage_error(&format!("`{target}` is not a family; expected <poset.json> <functional.json>"))
            };
            let p = Poset::load(target)?;
            let f = Functional::load(fpath, &p)?;
            (target.to_string(), p, f)
        }
    };
    let report = verify_toral_pair_seeded(&p, &f, cli.seed);
    print_report(cli, &label, &report)?;
    Ok(if report.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn print_report(cli: &Cli, label: &str, r: &ToralPairReport) -> toral_core::Result<()> {
    if cli.json {
        let mut v = serde_json::to_value(r)?;
        v["pair"] = json!(label);
        v["seed"] = json!(cli.seed);
        v["all_ok"] = json!(r.all_ok());
        print_json(&v);
    } else {
        println!("# {label} seed {}", cli.seed);
        for (name, ok) in r.fields() {
            println!("{name:<13} {ok}");
        }
        println!("{:<13} {}", "all_ok", r.all_ok());
    }
    Ok(())
}

fn build(cli: &Cli, path: &Path, emit: Emit) -> toral_core::Result<ExitCode> {
    let seq: ConstructionSequence = std::fs::read_to_string(path)?.parse()?;
    let built = build_sequence(&seq)?;
    let p = built.poset();
    match emit {
        Emit::Poset => println!("{}", p.to_json()),
        Emit::Functional => println!("{}", built.functional()?.to_json(p)),
        Emit::All => {
            let ext = p.extremal_data();
            let functional = built.functional().ok();
            let frobenius = functional.map(|f| LiePosetAlgebra::build(p).is_ok_and(|g| g.is_frobenius_functional(f)));
            if cli.json {
                print_json(&json!({
                    "poset": p.to_json(),
                    "functional": functional.map(|f| f.to_json(p)),
                    "frobenius": frobenius,
                    "ext": ext.ext.len(),
                    "rel_ext": ext.rel_ext.len(),
                    "index_by_formula": index_by_formula(p),
                    "index_by_rules": predict_index_by_rules(&seq),
                    "undefined_at": built.undefined_at.map(|(step, rule)| json!({"step": step, "rule": rule.name()})),
                }));
            } else {
                println!("elements          {}", p.len());
                println!("|Ext| / |Rel_E|   {} / {}", ext.ext.len(), ext.rel_ext.len());
                println!("index (formula)   {}", index_by_formula(p));
                println!("index (rules)     {}", predict_index_by_rules(&seq));
                match (functional, built.undefined_at) {
                    (Some(f), _) => {
                        println!("functional        {} terms, Frobenius {}", f.support().len(), frobenius.unwrap());
                        for (a, b) in f.support() {
                            println!("  {} {} {}", p.name(a), p.name(b), f.coeff(a, b));
                        }
                    }
                    (None, Some((step, rule))) => println!("functional        undefined (step {step}, rule {rule})"),
                    (None, None) => {}
                }
                println!("poset");
                println!("{}", serde_json::to_string(&p.to_json())?);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn homology(cli: &Cli, path: &Path, max_dim: Option<usize>) -> toral_core::Result<ExitCode> {
    let p = Poset::load(path)?;
    let max_dim = max_dim.unwrap_or_else(|| p.height().max(1));
    let report = betti_numbers(&order_complex(&p), max_dim);
    if cli.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("betti  {:?}", report.betti);
        println!("euler  {}", report.euler);
        println!("faces  {:?}", report.faces);
    }
    Ok(ExitCode::SUCCESS)
}

fn scan_cmd(cli: &Cli, config: ScanConfig, out: Option<&Path>, resume: Option<&Path>) -> toral_core::Result<ExitCode> {
    if let Err(e) = config.validate() {
        usage_error(&e.to_string());
    }
    let mut records: Vec<ScanRecord> = Vec::new();
    let mut writer: Option<BufWriter<File>> = None;
    if let Some(path) = resume {
        let (old, done) = scan::read_jsonl(path)?;
        if old != config {
            return Err(Error::Param(format!("{} was written with a different configuration", path.display())));
        }
        // rewrite without a possibly truncated tail
        let mut w = BufWriter::new(File::create(path)?);
        scan::write_header(&mut w, &config)?;
        for r in &done {
            scan::write_record(&mut w, r)?;
        }
        w.flush()?;
        eprintln!("resuming: {} records already in {}", done.len(), path.display());
        records = done;
        writer = Some(BufWriter::new(OpenOptions::new().append(true).open(path)?));
    } else if let Some(path) = out {
        let mut w = BufWriter::new(File::create(path)?);
        scan::write_header(&mut w, &config)?;
        writer = Some(w);
    }
    let skip: HashSet<_> = records.iter().map(|r| r.canonical_form.clone()).collect();
    let total = scan::enumerate_posets(&config)?.len();
    let mut seen = skip.len();
    scan::scan_streaming(&config, &skip, |r| {
        if let Some(w) = writer.as_mut() {
            scan::write_record(w, r)?;
        }
        seen += 1;
        if seen % 64 == 0 || seen == total {
            if let Some(w) = writer.as_mut() {
                w.flush()?;
            }
            eprintln!("scanned {seen}/{total}");
        }
        records.push(r.clone());
        Ok(())
    })?;
    if let Some(w) = writer.as_mut() {
        w.flush()?;
    }

    let bad = scan::counterexamples(&records);
    let mut by_n: BTreeMap<usize, [usize; 4]> = BTreeMap::new();
    for r in &records {
        let e = by_n.entry(r.n).or_default();
        e[0] += 1;
        e[1] += r.frobenius as usize;
        e[2] += (r.binary == Some(true)) as usize;
        e[3] += r.note.is_some() as usize;
    }
    if cli.json {
        let rows: Vec<Value> = by_n
            .iter()
            .map(|(n, c)| json!({"n": n, "posets": c[0], "frobenius": c[1], "binary": c[2], "search_failed": c[3]}))
            .collect();
        let cx: Vec<String> = bad.iter().map(|r| r.canonical_form.to_string()).collect();
        print_json(&json!({ "config": config, "by_size": rows, "counterexamples": cx }));
    } else {
        println!("# seed {} trials {}", config.seed, config.trials);
        println!("{:>3} {:>8} {:>10} {:>8} {:>14}", "n", "posets", "frobenius", "binary", "search failed");
        for (n, c) in &by_n {
            println!("{n:>3} {:>8} {:>10} {:>8} {:>14}", c[0], c[1], c[2], c[3]);
        }
    }
    if !bad.is_empty() {
        eprintln!("!!! {} FROBENIUS POSETS WITHOUT BINARY SPECTRUM !!!", bad.len());
        for r in &bad {
            eprintln!("!!!   {} (n = {}, height {})", r.canonical_form, r.n, r.height);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn file_stem(id: ToralPairId) -> String {
    let fam = id.family.name().replace('*', "star");
    match id.n {
        Some(n) => format!("{fam}_{n}"),
        None => fam,
    }
}

fn catalog_cmd(cli: &Cli, family: &str, n: Option<usize>, emit: Option<&Path>) -> toral_core::Result<ExitCode> {
    let family: Family = family.parse().unwrap_or_else(|e: Error| usage_error(&e.to_string()));
    let id = ToralPairId::new(family, n).unwrap_or_else(|e| usage_error(&e.to_string()));
    let c = catalog(id)?;
    let poset = c.poset.to_json();
    let functional = c.functional.to_json(&c.poset);
    match emit {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let stem = file_stem(id);
            let pp = dir.join(format!("{stem}.poset.json"));
            let fp = dir.join(format!("{stem}.functional.json"));
            std::fs::write(&pp, format!("{poset}\n"))?;
            std::fs::write(&fp, format!("{functional}\n"))?;
            if cli.json {
                print_json(&json!({ "pair": id.to_string(), "poset": pp, "functional": fp }));
            } else {
                println!("{}", pp.display());
                println!("{}", fp.display());
            }
        }
        None => print_json(&json!({ "pair": id.to_string(), "poset": poset, "functional": functional })),
    }
    Ok(ExitCode::SUCCESS)
}
