//! `regop` command-line verifier.
//!
//! Exit codes: 0 on pass or info, 1 on a failed check, 2 on usage errors
//! or malformed input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde_json::json;

use regop::corpus::{generate_cases, write_corpus, CorpusCase, CorpusParams};
use regop::counterexample::{counterexample_report, CounterexampleOptions, GBudget};
use regop::io::{read_matrix, read_vector};
use regop::norms::{
    gap_report, hadamard_power, operator_norm, regular_norm, verify_regular_norm_one_exact,
    verify_regular_norm_product, LatticeNorm, NormAssignment, NormOptions,
};
use regop::report::{canonical_json, emit_report};
use regop::superop::{
    verify_left_positive_modulus, verify_modulus_factorization, verify_positive_right_factor,
    VerifyOptions,
};
use regop::{
    ClaimId, LatticeVector, Rational, RegularOperator, Scalar, Status, Tolerance,
    VerificationReport,
};

#[derive(Debug, Parser)]
#[command(name = "regop", version, about = "Verify regular-operator identities on finite vector lattices")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance for float comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Exact rational arithmetic for the lattice identities.
    #[arg(
        long,
        global = true,
        action = ArgAction::Set,
        num_args = 0..=1,
        default_value_t = true,
        default_missing_value = "true"
    )]
    exact: bool,
    /// Write the report here instead of printing it.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-for-byte
    /// reproducibility).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check one claim on explicit inputs or on a generated corpus.
    Verify(VerifyArgs),
    /// Write a seeded corpus of input cases.
    Corpus(CorpusArgs),
    /// Operator or regular norm of a matrix.
    Norm(NormArgs),
    /// Operator norm versus regular norm of a superoperator.
    Gap(GapArgs),
    /// Finite model of the rank-one meet counterexample.
    Counterexample(CounterexampleArgs),
}

#[derive(Debug, Args)]
struct InputFiles {
    #[arg(long = "A", value_name = "FILE")]
    a: Option<PathBuf>,
    #[arg(long = "B", value_name = "FILE")]
    b: Option<PathBuf>,
    #[arg(long = "C", value_name = "FILE")]
    c: Option<PathBuf>,
    #[arg(long = "D", value_name = "FILE")]
    d: Option<PathBuf>,
    #[arg(long = "T", value_name = "FILE")]
    t: Option<PathBuf>,
    #[arg(long = "A0", value_name = "FILE")]
    a0: Option<PathBuf>,
    #[arg(long = "B0", value_name = "FILE")]
    b0: Option<PathBuf>,
    /// Evaluation vector; defaults to all ones.
    #[arg(long = "w", value_name = "FILE")]
    w: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormFlags {
    /// Norm on W: 1, 2, inf or any p ≥ 1.
    #[arg(long)]
    p_in: Option<String>,
    /// Norm on X.
    #[arg(long)]
    p_mid1: Option<String>,
    /// Norm on Y.
    #[arg(long)]
    p_mid2: Option<String>,
    /// Norm on Z.
    #[arg(long)]
    p_out: Option<String>,
    /// Comma-separated positive weights for the W norm.
    #[arg(long)]
    weights_in: Option<String>,
    #[arg(long)]
    weights_mid1: Option<String>,
    #[arg(long)]
    weights_mid2: Option<String>,
    #[arg(long)]
    weights_out: Option<String>,
    /// Random operators sampled by the norm reports.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// prop21, cor22, cor23, synnatzschke_a or gap.
    claim: String,
    #[command(flatten)]
    files: InputFiles,
    /// Generate inputs instead: seed=S,dims=WxXxYxZ,count=N[,sign=..][,dist=..]
    #[arg(long, value_name = "SPEC", conflicts_with_all = ["a", "b", "c", "d", "t", "a0", "b0", "w"])]
    corpus: Option<String>,
    #[command(flatten)]
    norms: NormFlags,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// seed=S,dims=WxXxYxZ,count=N[,sign=positive|mixed][,dist=rational|float]
    spec: String,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct NormArgs {
    #[arg(long = "A", value_name = "FILE")]
    a: PathBuf,
    /// Norm of |A| instead of A.
    #[arg(long)]
    regular: bool,
    #[arg(long, default_value = "2")]
    p_in: String,
    #[arg(long, default_value = "2")]
    p_out: String,
    #[arg(long)]
    weights_in: Option<String>,
    #[arg(long)]
    weights_out: Option<String>,
}

#[derive(Debug, Args)]
struct GapArgs {
    #[arg(long = "A", value_name = "FILE", required_unless_present = "hadamard")]
    a: Option<PathBuf>,
    #[arg(long = "B", value_name = "FILE", required_unless_present = "hadamard")]
    b: Option<PathBuf>,
    /// Use A = B = H₂^{⊗m}.
    #[arg(long, value_name = "M", conflicts_with_all = ["a", "b"])]
    hadamard: Option<u32>,
    #[command(flatten)]
    norms: NormFlags,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    #[arg(long)]
    n: usize,
    /// Coordinate of the functional, counted from 1.
    #[arg(long)]
    k: usize,
    /// Random positive operators compared against the superoperator.
    #[arg(long, default_value_t = 20)]
    operators: usize,
    #[arg(long, default_value_t = 64)]
    max_partitions: usize,
    /// Random operator splits per operator.
    #[arg(long, default_value_t = 16)]
    splits: usize,
    #[arg(long, default_value_t = 8)]
    max_split_parts: usize,
    /// Additional positive evaluation point.
    #[arg(long, value_name = "FILE")]
    at: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let started = Instant::now();
    let report = match &cli.command {
        Command::Verify(args) => verify(cli, args)?,
        Command::Corpus(args) => return corpus(cli, args),
        Command::Norm(args) => return norm(cli, args),
        Command::Gap(args) => gap(cli, args)?,
        Command::Counterexample(args) => counterexample(cli, args)?,
    };
    finish(cli, report, started)
}

fn finish(cli: &Cli, mut report: VerificationReport, started: Instant) -> Result<ExitCode> {
    if cli.timing {
        report.runtime_ms = Some(started.elapsed().as_millis() as u64);
    }
    match &cli.json {
        Some(path) => {
            emit_report(&report, path)
                .with_context(|| format!("writing report to {}", path.display()))?;
            println!(
                "{} {} cases={} max_deviation={:e} exact_zero={}",
                report.claim_id.as_str(),
                status_str(report.status),
                report.cases,
                report.max_deviation,
                report.exact_zero
            );
        }
        None => println!("{}", report.to_canonical_json()),
    }
    Ok(if report.status == Status::Fail {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Info => "info",
    }
}

fn parse_p(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "Inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| anyhow!("invalid norm exponent {other:?}")),
    }
}

fn parse_norm(p: Option<&str>, weights: Option<&str>, default: &str) -> Result<LatticeNorm> {
    let p = parse_p(p.unwrap_or(default))?;
    Ok(match weights {
        None => LatticeNorm::new(p)?,
        Some(list) => {
            let ws = list
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| anyhow!("invalid weight list {list:?}"))?;
            LatticeNorm::weighted(p, ws)?
        }
    })
}

fn assignment(flags: &NormFlags, default: &str) -> Result<NormAssignment> {
    Ok(NormAssignment {
        w: parse_norm(flags.p_in.as_deref(), flags.weights_in.as_deref(), default)?,
        x: parse_norm(flags.p_mid1.as_deref(), flags.weights_mid1.as_deref(), default)?,
        y: parse_norm(flags.p_mid2.as_deref(), flags.weights_mid2.as_deref(), default)?,
        z: parse_norm(flags.p_out.as_deref(), flags.weights_out.as_deref(), default)?,
    })
}

fn all_unweighted_one(n: &NormAssignment) -> bool {
    [&n.w, &n.x, &n.y, &n.z]
        .iter()
        .all(|n| n.p() == 1.0 && n.weights().is_none())
}

fn load<S: Scalar>(path: &Option<PathBuf>, flag: &str) -> Result<RegularOperator<S>> {
    let path = path
        .as_ref()
        .ok_or_else(|| anyhow!("this claim needs --{flag}"))?;
    read_matrix(path).with_context(|| format!("reading --{flag} {}", path.display()))
}

fn load_opt<S: Scalar>(path: &Option<PathBuf>, flag: &str) -> Result<Option<RegularOperator<S>>> {
    path.as_ref().map(|_| load(path, flag)).transpose()
}

fn load_vector<S: Scalar>(path: &Path, flag: &str) -> Result<LatticeVector<S>> {
    read_vector(path).with_context(|| format!("reading --{flag} {}", path.display()))
}

fn corpus_params(cli: &Cli, spec: &str) -> Result<CorpusParams> {
    let spec = if spec.split(',').any(|kv| kv.trim().starts_with("seed=")) {
        spec.to_string()
    } else {
        format!("seed={},{spec}", cli.seed)
    };
    Ok(spec.parse()?)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<VerificationReport> {
    let claim: ClaimId = args
        .claim
        .parse()
        .map_err(|_| anyhow!("unknown claim {:?}", args.claim))?;
    match claim {
        ClaimId::Counterexample => {
            bail!("use the counterexample subcommand: counterexample --n N --k K")
        }
        ClaimId::Cor23 | ClaimId::Gap => verify_norms(cli, args, claim),
        _ if cli.exact => verify_lattice::<Rational>(cli, args, claim),
        _ => verify_lattice::<f64>(cli, args, claim),
    }
}

fn lattice_case<S: Scalar>(
    claim: ClaimId,
    case: &CorpusCase<S>,
    opts: &VerifyOptions,
) -> regop::Result<VerificationReport> {
    match claim {
        ClaimId::Cor22 => Ok(verify_modulus_factorization(&case.a, &case.b, opts.tol)),
        ClaimId::Prop21 => {
            verify_left_positive_modulus(&case.a0, &case.b, &case.d, &case.t, &case.w, opts)
        }
        ClaimId::SynnatzschkeA => verify_positive_right_factor(&case.a, &case.c, &case.b0, opts.tol),
        _ => unreachable!("norm claims are dispatched separately"),
    }
}

fn verify_lattice<S: Scalar>(
    cli: &Cli,
    args: &VerifyArgs,
    claim: ClaimId,
) -> Result<VerificationReport> {
    let opts = VerifyOptions {
        tol: Tolerance(cli.tolerance),
        seed: cli.seed,
        ..VerifyOptions::default()
    };
    if let Some(spec) = &args.corpus {
        let params = corpus_params(cli, spec)?;
        let reports = generate_cases::<S>(&params)
            .iter()
            .map(|case| {
                let opts = VerifyOptions {
                    seed: params.seed.wrapping_add(case.index as u64),
                    ..opts
                };
                lattice_case(claim, case, &opts)
            })
            .collect::<regop::Result<Vec<_>>>()?;
        return Ok(VerificationReport::aggregate(
            claim,
            S::EXACT,
            &reports,
            &params.to_json(),
            Some(params.seed),
        ));
    }
    let f = &args.files;
    Ok(match claim {
        ClaimId::Cor22 => {
            verify_modulus_factorization(&load::<S>(&f.a, "A")?, &load(&f.b, "B")?, opts.tol)
        }
        ClaimId::Prop21 => {
            let a0 = load::<S>(&f.a0, "A0")?;
            let b = load::<S>(&f.b, "B")?;
            let t = load::<S>(&f.t, "T")?;
            let d = load_opt(&f.d, "D")?.unwrap_or_else(|| -&b);
            let w = match &f.w {
                Some(p) => load_vector(p, "w")?,
                None => LatticeVector::ones(b.cols()),
            };
            verify_left_positive_modulus(&a0, &b, &d, &t, &w, &opts)?
        }
        ClaimId::SynnatzschkeA => {
            let a = load::<S>(&f.a, "A")?;
            let c = load_opt(&f.c, "C")?.unwrap_or_else(|| -&a);
            verify_positive_right_factor(&a, &c, &load(&f.b0, "B0")?, opts.tol)?
        }
        _ => unreachable!("norm claims are dispatched separately"),
    })
}

fn norm_options(cli: &Cli, samples: usize) -> NormOptions {
    NormOptions {
        samples,
        seed: cli.seed,
        tol: cli.tolerance,
    }
}

fn verify_norms(cli: &Cli, args: &VerifyArgs, claim: ClaimId) -> Result<VerificationReport> {
    let default = if claim == ClaimId::Gap { "2" } else { "1" };
    let norms = assignment(&args.norms, default)?;
    let exact = claim == ClaimId::Cor23 && cli.exact && all_unweighted_one(&norms);
    let run = |a: &RegularOperator<f64>, b: &RegularOperator<f64>, opts: &NormOptions| {
        if claim == ClaimId::Gap {
            gap_report(a, b, &norms, opts)
        } else {
            verify_regular_norm_product(a, b, &norms, opts)
        }
    };
    if let Some(spec) = &args.corpus {
        let params = corpus_params(cli, spec)?;
        let reports = if exact {
            generate_cases::<Rational>(&params)
                .iter()
                .map(|c| verify_regular_norm_one_exact(&c.a, &c.b))
                .collect::<regop::Result<Vec<_>>>()?
        } else {
            generate_cases::<f64>(&params)
                .iter()
                .map(|c| {
                    let opts = NormOptions {
                        seed: params.seed.wrapping_add(c.index as u64),
                        ..norm_options(cli, args.norms.samples)
                    };
                    run(&c.a, &c.b, &opts)
                })
                .collect::<regop::Result<Vec<_>>>()?
        };
        return Ok(VerificationReport::aggregate(
            claim,
            exact,
            &reports,
            &params.to_json(),
            Some(params.seed),
        ));
    }
    let f = &args.files;
    if exact {
        return Ok(verify_regular_norm_one_exact(
            &load::<Rational>(&f.a, "A")?,
            &load::<Rational>(&f.b, "B")?,
        )?);
    }
    Ok(run(
        &load(&f.a, "A")?,
        &load(&f.b, "B")?,
        &norm_options(cli, args.norms.samples),
    )?)
}

fn gap(cli: &Cli, args: &GapArgs) -> Result<VerificationReport> {
    let norms = assignment(&args.norms, "2")?;
    let (a, b) = match args.hadamard {
        Some(m) => {
            if !(1..=6).contains(&m) {
                bail!("--hadamard must be between 1 and 6");
            }
            let h = hadamard_power::<f64>(m);
            (h.clone(), h)
        }
        None => (load(&args.a, "A")?, load(&args.b, "B")?),
    };
    Ok(gap_report(&a, &b, &norms, &norm_options(cli, args.norms.samples))?)
}

fn counterexample(cli: &Cli, args: &CounterexampleArgs) -> Result<VerificationReport> {
    let at = match &args.at {
        Some(p) => Some(load_vector::<Rational>(p, "at")?),
        None => None,
    };
    let opts = CounterexampleOptions {
        seed: cli.seed,
        random_operators: args.operators,
        budget: GBudget {
            max_partitions: args.max_partitions,
            operator_splits: args.splits,
            max_split_parts: args.max_split_parts,
            seed: cli.seed,
        },
        at,
    };
    Ok(counterexample_report(args.n, args.k, &opts)?)
}

fn corpus(cli: &Cli, args: &CorpusArgs) -> Result<ExitCode> {
    let params = corpus_params(cli, &args.spec)?;
    let entries = write_corpus::<Rational>(&params, &args.out)
        .with_context(|| format!("writing corpus to {}", args.out.display()))?;
    println!("wrote {} cases to {}", entries.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn norm(cli: &Cli, args: &NormArgs) -> Result<ExitCode> {
    let a = load::<f64>(&Some(args.a.clone()), "A")?;
    let from = parse_norm(Some(&args.p_in), args.weights_in.as_deref(), "2")?;
    let to = parse_norm(Some(&args.p_out), args.weights_out.as_deref(), "2")?;
    let result = if args.regular {
        regular_norm(&a, &from, &to)?
    } else {
        operator_norm(&a, &from, &to)?
    };
    let out = json!({
        "regular": args.regular,
        "result": result.to_json(),
    });
    let text = canonical_json(&out);
    match &cli.json {
        Some(path) => {
            regop::report::write_atomically(path, &(text + "\n"))
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{:e}", result.value);
        }
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
