//! `ul`: batch front end for the lattice, strata and local-model computations.
//!
//! Exit codes: 0 success, 1 usage, 2 enumeration bound exceeded, 3 a
//! verification or computation failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use ul_core::building::{precision_for_radius, Building};
use ul_core::localring::{tangent_dim_at_origin, LocalModel, LocalringReport, Membership};
use ul_core::strata::{fermat_count, stratum_csv, stratum_table, FiniteHermSpace, FormKind};
use ul_core::suite::{self, Status};
use ul_core::Error;

#[derive(Parser)]
#[command(name = "ul", version, about = "Unitary Rapoport–Zink computations over small primes")]
struct Cli {
    /// Upper bound on enumeration sizes (overrides UL_MAX_ENUM).
    #[arg(long, global = true)]
    max_enum: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export a ball of the Bruhat–Tits tree.
    Tree {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 1)]
        center_type: u32,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the depth stratification of the finite Hermitian space.
    Strata {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Allow l ≥ 5, which takes minutes.
        #[arg(long)]
        large: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, num_args = 1.., default_values_t = [3u64])]
        p: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check names to skip, e.g. `localring.membership`.
        #[arg(long, num_args = 1..)]
        skip: Vec<String>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Count points of the Fermat curve of degree p+1 over F_{p^{2m}}.
    Fermat {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
    /// Local-model checks with a JSON report.
    Localring {
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum)]
        check: LocalCheck,
        #[arg(long, default_value_t = 8)]
        degree_bound: u32,
        /// Where to write the membership witness (cofactors, one per line).
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalCheck {
    Tangent,
    Vandermonde,
    Eta,
    Membership,
    Component,
}

enum Failure {
    Usage(String),
    Bound(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EvenPrime | Error::NotPrime(_) | Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            Error::BoundExceeded { .. } => Failure::Bound(e.to_string()),
            _ => Failure::Verify(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(b) = cli.max_enum {
        // single-threaded at this point; read back by the core crate
        std::env::set_var("UL_MAX_ENUM", b.to_string());
    }
    let r = match cli.command {
        Command::Tree { p, radius, center_type, format, output } => {
            cmd_tree(p, radius, center_type, format, output.as_deref())
        }
        Command::Strata { p, l, m, large, output } => cmd_strata(p, l, m, large, output.as_deref()),
        Command::Verify { p, seed, skip, format } => cmd_verify(&p, seed, &skip, format),
        Command::Fermat { p, m } => cmd_fermat(p, m),
        Command::Localring { p, check, degree_bound, witness, output } => {
            cmd_localring(p, check, degree_bound, witness.as_deref(), output.as_deref())
        }
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Bound(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> std::io::Result<()> {
    match output {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_tree(p: u64, radius: usize, center_type: u32, format: GraphFormat, output: Option<&Path>) -> Outcome {
    if center_type != 1 && center_type != 3 {
        return Err(Failure::Usage("center type must be 1 or 3".into()));
    }
    let b = Building::with_precision(p, precision_for_radius(radius))?;
    let g = b.ball(&b.center(center_type)?, radius)?;
    let text = match format {
        GraphFormat::Json => g.to_json() + "\n",
        GraphFormat::Dot => g.to_dot(),
    };
    emit(output, &text)?;
    let mut census = format!("vertices {} edges {}", g.len(), g.edges.len());
    for (t, n) in g.census() {
        census.push_str(&format!(" type{t} {n}"));
    }
    // keep stdout parseable when the graph itself goes there
    if output.is_some() {
        println!("{census}");
    } else {
        eprintln!("{census}");
    }
    Ok(())
}

fn cmd_strata(p: u32, l: usize, m: u32, large: bool, output: Option<&Path>) -> Outcome {
    if l == 0 {
        return Err(Failure::Usage("l must be positive".into()));
    }
    if l >= 5 && !large {
        return Err(Failure::Usage(format!("l = {l} needs --large")));
    }
    let space = FiniteHermSpace::new(p, m, l, FormKind::AntiDiagonal)?;
    let rows = stratum_table(&space)?;
    if l == 3 {
        let expect = fermat_count(p, m)?;
        let total: u64 = rows.iter().map(|r| r.count).sum();
        if total != expect {
            return Err(Failure::Verify(format!("stratum total {total} differs from the Fermat count {expect}")));
        }
    }
    emit(output, &stratum_csv(&rows))?;
    Ok(())
}

fn cmd_verify(primes: &[u64], seed: u64, skip: &[String], format: ReportFormat) -> Outcome {
    let names = suite::check_names();
    if let Some(bad) = skip.iter().find(|s| !names.contains(&s.as_str())) {
        return Err(Failure::Usage(format!("unknown check {bad}")));
    }
    let mut failed = 0;
    let mut all = Vec::new();
    for &p in primes {
        let outcomes = suite::run(p, seed, skip)?;
        failed += outcomes.iter().filter(|o| o.status == Status::Fail).count();
        match format {
            ReportFormat::Text => {
                for o in &outcomes {
                    let s = match o.status {
                        Status::Pass => "PASS",
                        Status::Fail => "FAIL",
                        Status::Skip => "SKIP",
                    };
                    println!("{s} p={p} {} — {}: {}", o.name, o.claim, o.detail);
                }
            }
            ReportFormat::Json => all.push(json!({ "p": p, "seed": seed, "checks": outcomes })),
        }
    }
    if let ReportFormat::Json = format {
        println!("{}", serde_json::to_string_pretty(&all).expect("report serializes"));
    }
    if failed > 0 {
        return Err(Failure::Verify(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn cmd_fermat(p: u32, m: u32) -> Outcome {
    println!("{}", fermat_count(p, m)?);
    Ok(())
}

fn cmd_localring(
    p: u32,
    check: LocalCheck,
    degree_bound: u32,
    witness_path: Option<&Path>,
    output: Option<&Path>,
) -> Outcome {
    let lm = LocalModel::new(p, 1)?;
    let gf = lm.field();
    let np = p as usize + 1;
    let mut report = LocalringReport { check: String::new(), p: p as u64, result: json!(null), witness: None, jacobian_rank: None };
    let mut ok = true;
    match check {
        LocalCheck::Tangent => {
            let (rm, rank) = tangent_dim_at_origin(gf, &lm.build_rm())?;
            let (ap, _) = tangent_dim_at_origin(gf, &lm.build_a_prime())?;
            ok = rm == 2 && ap == np;
            report.check = "tangent".into();
            report.result = json!({ "R_M": rm, "A_prime": ap });
            report.jacobian_rank = Some(rank);
        }
        LocalCheck::Vandermonde => {
            let rank = lm.check_vandermonde_rank(lm.reps());
            ok = rank == np;
            report.check = "vandermonde".into();
            report.result = json!(rank == np);
            report.jacobian_rank = Some(rank);
        }
        LocalCheck::Eta => {
            let per: Vec<bool> = (0..np).map(|i| lm.check_eta_identity(i)).collect();
            ok = per.iter().all(|&b| b);
            report.check = "eta".into();
            report.result = json!(per);
        }
        LocalCheck::Component => {
            let per: Vec<bool> = (0..np).map(|i| lm.component_substitution_check(i)).collect();
            ok = per.iter().all(|&b| b);
            report.check = "component".into();
            report.result = json!(per);
        }
        LocalCheck::Membership => {
            let prod = lm.product_of_lines();
            let gk = lm.gk_ideal();
            let rm = lm.build_rm();
            report.check = "membership".into();
            let (name, ideal, found) = match lm.membership_bounded(&prod, &gk, degree_bound)? {
                m @ Membership::Member { .. } => ("g_k", &gk, m),
                Membership::Unknown { .. } => {
                    eprintln!("note: not found in (g_k) up to degree {degree_bound}; trying the full R_M ideal");
                    ("R_M", &rm, lm.membership_bounded(&prod, &rm, degree_bound)?)
                }
            };
            match found {
                Membership::Member { cofactors, .. } => {
                    let names = ideal.vars.clone();
                    let lines: Vec<String> = cofactors
                        .iter()
                        .zip(&ideal.labels)
                        .filter(|(c, _)| !c.is_zero())
                        .map(|(c, l)| format!("({}) * [{l}]", c.to_string_with(&names)))
                        .collect();
                    if let Some(path) = witness_path {
                        fs::write(path, lines.join("\n") + "\n")?;
                    }
                    report.result = json!({ "status": "member", "ideal": name, "degree_bound": degree_bound });
                    report.witness = Some(lines);
                }
                Membership::Unknown { .. } => {
                    ok = false;
                    report.result = json!({ "status": "unknown", "ideal": name, "degree_bound": degree_bound });
                }
            }
        }
    }
    emit(output, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    if !ok {
        return Err(Failure::Verify(format!("{} check failed", report.check)));
    }
    Ok(())
}
