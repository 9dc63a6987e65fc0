use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use g2cert::catalog::{
    builtin, family_var, find_builtin, load_catalog, validate_all, AlgebraEntry,
};
use g2cert::certify::{
    certify_lambda_sign, run_catalog, run_pipeline, CertificateKind, LambdaOutcome, PipelineConfig,
    Report,
};
use g2cert::derivations::{extend, solve_derivations, strongly_unimodular_constraints};
use g2cert::exact_arith::{Rational, Var};

#[derive(Parser)]
#[command(
    name = "g2cert",
    version,
    about = "Exact obstruction certificates for exact G2-structures on Lie algebras"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Catalog file used to look up algebras instead of the shipped data.
    #[arg(long, global = true, value_name = "CATALOG")]
    from: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a catalog and check the Jacobi identity of every entry.
    Validate { catalog: String },
    /// λ(d̂α) for the generic exact 3-form.
    Lambda {
        algebra: String,
        /// Check the shipped nonnegativity witness.
        #[arg(long)]
        witness: bool,
    },
    /// Derivation algebra and strong-unimodularity constraints.
    Derivations {
        algebra: String,
        /// Family parameter values, e.g. `p=0,q=1/2`.
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
    /// Full pipeline for one algebra.
    Su3 {
        algebra: String,
        /// Also run gauge steps (slow).
        #[arg(long)]
        gauge: bool,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = PipelineConfig::default().seed)]
        seed: u64,
    },
    /// Certify every entry of a catalog and write the report.
    RunAll {
        catalog: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        md: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = PipelineConfig::default().seed)]
        seed: u64,
    },
}

/// A catalog path, or the name of a shipped dataset (`table1`, `all`, ...).
fn open_catalog(src: &str) -> Result<Vec<AlgebraEntry>> {
    if std::path::Path::new(src).exists() {
        return load_catalog(src).with_context(|| format!("loading {src}"));
    }
    builtin(src).with_context(|| format!("{src} is neither a file nor a shipped dataset"))
}

fn lookup(cli: &Cli, key: &str) -> Result<AlgebraEntry> {
    match &cli.from {
        Some(path) => load_catalog(path)?
            .into_iter()
            .find(|e| e.id == key || e.name == key)
            .with_context(|| format!("{key} not found in {}", path.display())),
        None => Ok(find_builtin(key)?),
    }
}

fn parse_params(kv: &[String]) -> Result<HashMap<Var, Rational>> {
    let mut out = HashMap::new();
    for item in kv {
        let Some((k, v)) = item.split_once('=') else {
            bail!("expected k=v, got {item}");
        };
        let value: Rational = v.parse()?;
        out.insert(family_var(k.trim()), value);
    }
    Ok(out)
}

fn set_threads(n: usize) {
    #[cfg(feature = "parallel")]
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

fn validate(src: &str) -> Result<bool> {
    let entries = open_catalog(src)?;
    validate_all(&entries)?;
    let stubs = entries.iter().filter(|e| e.is_stub()).count();
    println!(
        "{} entries valid ({} stubs without structure equations)",
        entries.len(),
        stubs
    );
    Ok(true)
}

fn lambda(cli: &Cli, key: &str, witness: bool) -> Result<bool> {
    let entry = lookup(cli, key)?;
    let l = entry.algebra()?;
    let w = if witness {
        match &entry.lambda_witness {
            Some(v) => Some(entry.witness(v)?),
            None => bail!("{} ships no λ witness", entry.id),
        }
    } else {
        None
    };
    let out = certify_lambda_sign(
        &entry.id,
        &l,
        w.as_ref(),
        &entry.atoms()?,
        PipelineConfig::default().seed,
    )?;
    match out {
        LambdaOutcome::Certified(c) => {
            match &c.kind {
                CertificateKind::LambdaNonNegative { lambda, .. } => {
                    println!("λ = {lambda}");
                    println!("certified λ ≥ 0 by the shipped witness");
                }
                _ => println!("λ ≡ 0"),
            }
            Ok(true)
        }
        LambdaOutcome::NoObstruction { lambda, sample } => {
            println!("λ = {lambda}");
            let pts: Vec<String> = sample.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("λ < 0 at {}", pts.join(", "));
            Ok(true)
        }
        LambdaOutcome::Undecided { lambda } => {
            println!("λ = {lambda}");
            println!("sign undecided");
            Ok(true)
        }
    }
}

fn derivations(cli: &Cli, key: &str, params: &[String]) -> Result<bool> {
    let entry = lookup(cli, key)?;
    let values = parse_params(params)?;
    let l = entry.algebra()?.partial_eval(&values);
    let family = if l.parameters().is_empty() {
        solve_derivations(&l)?
    } else {
        match entry.derivation_family()? {
            Some(d) => {
                println!("(shipped family; pass --params to solve at numeric values)");
                d.partial_eval(&values)
            }
            None => bail!("{} has free parameters; pass --params", entry.id),
        }
    };
    println!("D =");
    print!("{family}");
    if let Some(nil) = entry.nilradical_subspace() {
        let su = strongly_unimodular_constraints(&extend(&l, &family)?, &nil)?;
        for c in &su.derivation {
            println!("strong unimodularity: {c} = 0");
        }
        for c in &su.inner {
            println!("inner trace: {c} = 0");
        }
    }
    Ok(true)
}

fn su3(cli: &Cli, key: &str, gauge: bool, samples: u64, seed: u64) -> Result<bool> {
    let entry = lookup(cli, key)?;
    let config = PipelineConfig {
        samples,
        seed,
        gauge,
        ..PipelineConfig::default()
    };
    let rep = run_pipeline(&entry, &config)?;
    let mut report = Report::new(seed, samples);
    let ok = rep.all_verified();
    report.entries.push(rep);
    print!("{}", report.to_markdown());
    Ok(ok)
}

fn run_all(
    src: &str,
    out: &PathBuf,
    md: Option<&PathBuf>,
    samples: u64,
    seed: u64,
) -> Result<bool> {
    let entries = open_catalog(src)?;
    let config = PipelineConfig {
        samples,
        seed,
        ..PipelineConfig::default()
    };
    let report = run_catalog(&entries, &config);
    fs::write(out, report.to_json()).with_context(|| format!("writing {}", out.display()))?;
    if let Some(md) = md {
        fs::write(md, report.to_markdown()).with_context(|| format!("writing {}", md.display()))?;
    }
    let mut tally: HashMap<&str, usize> = HashMap::new();
    for e in &report.entries {
        *tally.entry(e.outcome.label()).or_default() += 1;
    }
    let mut tally: Vec<_> = tally.into_iter().collect();
    tally.sort();
    for (label, n) in tally {
        println!("{n:>4} {label}");
    }
    Ok(report.all_verified())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_threads(cli.threads);
    let res = match &cli.command {
        Command::Validate { catalog } => validate(catalog),
        Command::Lambda { algebra, witness } => lambda(&cli, algebra, *witness),
        Command::Derivations { algebra, params } => derivations(&cli, algebra, params),
        Command::Su3 {
            algebra,
            gauge,
            samples,
            seed,
        } => su3(&cli, algebra, *gauge, *samples, *seed),
        Command::RunAll {
            catalog,
            out,
            md,
            samples,
            seed,
        } => run_all(catalog, out, md.as_ref(), *samples, *seed),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
