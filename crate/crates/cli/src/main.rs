//! `beatty` — one binary tying the library together for batch experiments:
//! sequence generation, parameter recovery, identity verification, moment
//! dumps, and the collision census. JSON is the machine interface (written
//! to `--out` or standard output); short human summaries accompany file
//! output. All subcommands are deterministic for a fixed configuration,
//! independent of the worker-thread count.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use beatty_core::genpoly::{self, ClassicalPoly};
use beatty_core::identity::{self, Verdict};
use beatty_core::primality::PrimalityConfig;
use beatty_core::seqgen::{self, IntegerSequence, ParameterVector};
use beatty_core::symmetric::{SymmetricForm, SymmetricRecoveryOptions};
use beatty_core::{jump, nested, product, symmetric};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "beatty",
    version,
    about = "Generate Beatty-type generalized polynomial sequences and recover their hidden real parameters"
)]
struct Cli {
    /// Worker threads (0 = one per core). Outputs never depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sequence for a parameter family and write it as text.
    Generate(GenerateArgs),
    /// Read a sequence file and recover the parameters that produced it.
    Recover(RecoverArgs),
    /// Check two expressions for equality at every integer of a range.
    Verify(VerifyArgs),
    /// Census of distinct rational parameter pairs with equal sequences.
    SearchCollisions(SearchArgs),
    /// Dump the empirical deficit-moment table of a nested-floor sequence.
    Moments(MomentsArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Family: linear | nested | product | symmetric.
    #[arg(long)]
    family: String,
    /// Comma-separated real constants, e.g. "sqrt(2),1+sqrt(3),7/3".
    #[arg(long, allow_hyphen_values = true)]
    alphas: String,
    /// Shifts for the linear family (same length as --alphas, default 0).
    #[arg(long, allow_hyphen_values = true)]
    gammas: Option<String>,
    /// Symmetric form: product:<d> | powersum:<d>:<r> | quadratic:<d>.
    #[arg(long)]
    form: Option<String>,
    /// Lower-order polynomial in x1..xd added to the symmetric form.
    #[arg(long, allow_hyphen_values = true)]
    r_poly: Option<String>,
    /// Number of values to generate (a_1 … a_N).
    #[arg(long)]
    n: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bit cap for certified floor evaluation.
    #[arg(long, default_value_t = beatty_core::DEFAULT_PRECISION_CAP)]
    precision_cap: u32,
}

#[derive(Args)]
struct RecoverArgs {
    /// Family hypothesis: linear | nested | product | symmetric.
    #[arg(long)]
    family: String,
    /// Number of hidden multipliers.
    #[arg(long)]
    d: usize,
    /// Sequence file to read (one integer per line, `#` headers allowed).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Nested family only: moments | jumps.
    #[arg(long, default_value = "jumps")]
    method: String,
    /// Symmetric family: the form that generated the data.
    #[arg(long)]
    form: Option<String>,
    /// Linear family: known multipliers for the shift-recovery pass.
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    /// Linear family: attempt to recover the shifts γ as well.
    #[arg(long)]
    recover_gammas: bool,
    /// Symmetric family: index window lo:hi for the normalized differences.
    #[arg(long)]
    window: Option<String>,
    /// Symmetric family: explicit adjacent-gap clustering threshold.
    #[arg(long)]
    cluster_gap: Option<f64>,
    /// Bit cap for certified floor evaluation.
    #[arg(long, default_value_t = beatty_core::DEFAULT_PRECISION_CAP)]
    precision_cap: u32,
    /// Product family: Miller–Rabin rounds for the prime detector.
    #[arg(long, default_value_t = 40)]
    mr_rounds: u32,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Left expression, e.g. "floor(floor(n*3/7)*2/9)".
    #[arg(long, allow_hyphen_values = true)]
    lhs: String,
    /// Right expression.
    #[arg(long, allow_hyphen_values = true)]
    rhs: String,
    /// Inclusive integer range "lo:hi", e.g. "-100000:100000".
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    /// Bit cap for certified floor evaluation.
    #[arg(long, default_value_t = beatty_core::DEFAULT_PRECISION_CAP)]
    precision_cap: u32,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Largest denominator to enumerate.
    #[arg(long)]
    max_den: u32,
    /// Census path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    /// Sequence file to read.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Nesting depth hypothesis (2 or 3).
    #[arg(long)]
    d: usize,
    /// Comma-separated moment orders k (default "1" for d=2, "1,2,3" for d=3).
    #[arg(long)]
    ks: Option<String>,
    /// Table path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Ignore a second initialization (e.g. under test harnesses).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Recover(a) => recover(a),
        Command::Verify(a) => verify(a),
        Command::SearchCollisions(a) => search_collisions(a),
        Command::Moments(a) => moments(a),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn parse_reals(label: &str, src: &str) -> Result<Vec<beatty_core::RealExpr>> {
    genpoly::parse_real_list(src).with_context(|| format!("parsing --{label} {src:?}"))
}

fn parse_range(src: &str) -> Result<(i64, i64)> {
    let (lo, hi) = src
        .rsplit_once(':')
        .with_context(|| format!("--range must be \"lo:hi\", got {src:?}"))?;
    let lo: i64 = lo.trim().parse().context("range start")?;
    let hi: i64 = hi.trim().parse().context("range end")?;
    if lo > hi {
        bail!("empty range {lo}:{hi}");
    }
    Ok((lo, hi))
}

fn parse_window(src: &str) -> Result<(u64, u64)> {
    let (lo, hi) = src
        .split_once(':')
        .with_context(|| format!("--window must be \"lo:hi\", got {src:?}"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

/// Write a line to stdout, treating a closed pipe as an orderly stop
/// (standard behavior under `head`-style consumers).
fn print_line(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        r => Ok(r?),
    }
}

/// Write pretty JSON to `--out` (with a human summary line on stdout) or to
/// stdout alone, so stdout stays machine-parseable in pipe mode.
fn emit_json(out: &Option<PathBuf>, value: &serde_json::Value, summary: &str) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            print_line(summary)?;
            print_line(&format!("report: {}", path.display()))?;
        }
        None => print_line(&text)?,
    }
    Ok(())
}

fn product_poly(d: usize) -> ClassicalPoly {
    let mut k = ClassicalPoly::var(d, 1);
    for i in 2..=d {
        k = k.mul(&ClassicalPoly::var(d, i));
    }
    k
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    if a.n < 1 {
        bail!("--n must be at least 1");
    }
    let alphas = parse_reals("alphas", &a.alphas)?;
    let d = alphas.len();
    let max_p = a.precision_cap;

    let mut seq = match a.family.as_str() {
        "linear" => {
            let gammas = a
                .gammas
                .as_deref()
                .map(|g| parse_reals("gammas", g))
                .transpose()?;
            let p = ParameterVector::new(alphas, gammas)?;
            seqgen::gen_linear_sum(&p, a.n, max_p)?
        }
        "nested" => seqgen::gen_nested(&alphas, a.n, max_p)?,
        "product" => seqgen::gen_poly_of_floors(&product_poly(d), &alphas, a.n, max_p)?,
        "symmetric" => {
            let form_src = a
                .form
                .as_deref()
                .context("--family symmetric requires --form")?;
            let form = SymmetricForm::parse(form_src)?;
            if form.d() != d {
                bail!("form {form} expects {} multipliers, got {d}", form.d());
            }
            let mut k = form.to_classical();
            if let Some(r_src) = a.r_poly.as_deref() {
                let g = genpoly::parse(r_src).with_context(|| format!("parsing --r-poly {r_src:?}"))?;
                let r = genpoly::to_classical(&g, d)
                    .context("--r-poly must be a floor-free polynomial in x1..xd")?;
                k = k.add(&r);
            }
            seqgen::gen_poly_of_floors(&k, &alphas, a.n, max_p)?
        }
        other => bail!("unknown family {other:?} (expected linear | nested | product | symmetric)"),
    };

    seq = seq
        .with_meta("family", a.family.clone())
        .with_meta("alphas", a.alphas.clone())
        .with_meta("N", a.n.to_string());
    if let Some(g) = &a.gammas {
        seq = seq.with_meta("gammas", g.clone());
    }
    if let Some(f) = &a.form {
        seq = seq.with_meta("form", f.clone());
    }
    if let Some(r) = &a.r_poly {
        seq = seq.with_meta("r_poly", r.clone());
    }

    match &a.out {
        Some(path) => {
            seq.save(path)
                .with_context(|| format!("writing {}", path.display()))?;
            print_line(&format!("wrote {} values to {}", seq.len(), path.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match seq.write_to(&mut stdout) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

fn recover(a: RecoverArgs) -> Result<ExitCode> {
    let seq = IntegerSequence::load(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;

    let report = match a.family.as_str() {
        "linear" => {
            let known_alphas = a
                .alphas
                .as_deref()
                .map(|s| parse_reals("alphas", s))
                .transpose()?;
            let opts = jump::RecoverLinearOptions {
                recover_gammas: a.recover_gammas || known_alphas.is_some(),
                known_alphas,
                max_p: a.precision_cap,
            };
            jump::recover_linear(&seq, a.d, &opts)?.to_report()
        }
        "nested" => match a.method.as_str() {
            "jumps" => {
                let spectrum = nested::jump_spectrum(&seq, a.d)?;
                nested::recover_nested_jumps(&spectrum)?.to_report()
            }
            "moments" => {
                let ks: Vec<u32> = if a.d == 2 { vec![1] } else { vec![1, 2, 3] };
                let table = nested::empirical_moments(&seq, a.d, &ks)?;
                let inv = match a.d {
                    2 => nested::invert_moments_d2(&table)?,
                    3 => nested::invert_moments_d3(&table)?,
                    other => bail!("moment inversion supports d = 2 or 3, got {other}"),
                };
                inv.to_report()
            }
            other => bail!("unknown method {other:?} (expected jumps | moments)"),
        },
        "product" => {
            let cfg = PrimalityConfig {
                miller_rabin_rounds: a.mr_rounds,
                ..PrimalityConfig::default()
            };
            product::recover_product(&seq, a.d, &cfg)?.to_report()
        }
        "symmetric" => {
            let form_src = a
                .form
                .as_deref()
                .context("--family symmetric requires --form")?;
            let form = SymmetricForm::parse(form_src)?;
            if form.d() != a.d {
                bail!("form {form} has d = {}, but --d {} was given", form.d(), a.d);
            }
            let opts = SymmetricRecoveryOptions {
                window: a.window.as_deref().map(parse_window).transpose()?,
                cluster_gap: a.cluster_gap,
            };
            symmetric::recover_symmetric(&seq, form, &opts)?.to_report()
        }
        other => bail!("unknown family {other:?} (expected linear | nested | product | symmetric)"),
    };

    let recovered: Vec<String> = report
        .recovered
        .iter()
        .map(|e| match &e.exact {
            Some(q) => format!("{q} (exact)"),
            None => format!("{:.6}±{:.1e}", e.value, e.radius),
        })
        .collect();
    let summary = format!(
        "family={} d={} N={} recovered=[{}] flags={:?}",
        report.family,
        report.d,
        report.n,
        recovered.join(", "),
        report.flags,
    );
    emit_json(&a.out, &serde_json::to_value(&report)?, &summary)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let lhs = genpoly::parse(&a.lhs).with_context(|| format!("parsing --lhs {:?}", a.lhs))?;
    let rhs = genpoly::parse(&a.rhs).with_context(|| format!("parsing --rhs {:?}", a.rhs))?;
    let range = parse_range(&a.range)?;
    let report = identity::verify_range(&lhs, &rhs, range, a.precision_cap)?;

    let (summary, code) = match &report.verdict {
        Verdict::HoldsOnRange { count } => (
            format!("holds-on-range: {count} points verified"),
            ExitCode::SUCCESS,
        ),
        Verdict::Counterexample { n, lhs, rhs } => (
            format!("counterexample: n={n} gives {lhs} vs {rhs}"),
            ExitCode::FAILURE,
        ),
        Verdict::ProvedEqual { period, .. } => {
            (format!("proved-equal: period {period}"), ExitCode::SUCCESS)
        }
    };
    emit_json(&a.out, &serde_json::to_value(&report)?, &summary)?;
    Ok(code)
}

// ---------------------------------------------------------------------------
// search-collisions
// ---------------------------------------------------------------------------

fn search_collisions(a: SearchArgs) -> Result<ExitCode> {
    if a.max_den < 2 {
        bail!("--max-den must be at least 2");
    }
    let census = identity::search_collisions(a.max_den);
    let summary = format!(
        "{} collision pairs with distinct multisets (+{} order swaps) up to denominator {}",
        census.pairs.len(),
        census.same_multiset,
        census.max_den,
    );
    emit_json(&a.out, &census.to_json(), &summary)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

fn moments(a: MomentsArgs) -> Result<ExitCode> {
    let seq = IntegerSequence::load(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let ks: Vec<u32> = match a.ks.as_deref() {
        Some(src) => src
            .split(',')
            .map(|t| t.trim().parse().context("parsing --ks"))
            .collect::<Result<_>>()?,
        None if a.d == 2 => vec![1],
        None => vec![1, 2, 3],
    };
    let table = nested::empirical_moments(&seq, a.d, &ks)?;

    let rows: Vec<serde_json::Value> = table
        .t
        .iter()
        .map(|(&(d, k), &value)| {
            serde_json::json!({
                "d": d,
                "k": k,
                "value": value,
                "stderr": table.stderr.get(&(d, k)).copied().unwrap_or(0.0),
            })
        })
        .collect();
    let value = serde_json::json!({
        "d": table.d,
        "N": seq.len() as u64,
        "m_used": table.m_used,
        "slope": table.slope.to_string(),
        "slope_endpoint": table.slope_endpoint.to_string(),
        "moments": rows,
        "flags": table.flags,
    });
    let summary = format!(
        "d={} N={} slope={} moments={}",
        table.d,
        seq.len(),
        table.slope,
        rows.len()
    );
    emit_json(&a.out, &value, &summary)?;
    Ok(ExitCode::SUCCESS)
}
