//! `qcong`: series dumps, congruence scans, Sturm certificates, and
//! prime-exclusion reports for eta-quotient coefficient functions.
//!
//! Exit codes: 0 on success (and verified checks), 1 when a verification
//! fails (first counterexample goes to stderr), 2 on usage errors.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcong::congruence::{
    certify_80n_40, certify_80n_40_with_terms, certify_80n_60, certify_80n_60_with_terms,
    scan_ramanujan, tbar_bruteforce, tbar_series, verify_linliu, verify_mod2, verify_mod3,
    CandidateStatus, CongruenceCandidate, SturmCertificate,
};
use qcong::eta::{expand, EtaQuotient, QExpansion};
use qcong::mainthm::{
    build_f_ell, case_analysis, cong_reduce_check, coset_reps, coset_sign_classes,
    exclusion_report, profile, theta_nonvanishing, ExclusionReport, ResidueTransferReport,
};
use qcong::operators::filtration_level1;
use qcong::ring::{Fp, PrimeModulus, ZZ};
use qcong::{CoeffRing, ModSeries};

#[derive(Parser)]
#[command(
    name = "qcong",
    version,
    about = "Truncated q-series arithmetic and Ramanujan-congruence tooling for eta-quotients"
)]
struct Cli {
    /// Output format for reports and dumps.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "QCONG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Expand an eta-quotient ("3^1 * 2^-1 * 1^-1") into a series dump.
    Expand {
        /// Eta-quotient expression: scale^exponent factors, '*' optional.
        expr: String,
        /// Number of series coefficients.
        #[arg(long, default_value_t = 32)]
        terms: usize,
        /// Reduce coefficients modulo this prime.
        #[arg(long = "mod")]
        modulus: Option<u64>,
    },
    /// Dump the restricted-odd-difference overpartition series tbar(n).
    Tbar {
        #[arg(long, default_value_t = 32)]
        terms: usize,
        #[arg(long = "mod")]
        modulus: Option<u64>,
        /// Cross-check coefficients against the brute-force enumerator.
        #[arg(long)]
        brute_check: Option<u64>,
    },
    /// Scan an eta-quotient's coefficients for Ramanujan congruences.
    Scan {
        /// The prime modulus ell.
        #[arg(long = "mod")]
        modulus: u64,
        #[arg(long, default_value_t = 100_000)]
        terms: usize,
        /// Eta-quotient whose series part (the plain Euler product, any
        /// q^{offset24/24} prefactor ignored) is scanned; defaults to the
        /// tbar quotient.
        #[arg(long)]
        eta: Option<String>,
        /// Fail (exit 1) unless the surviving residues are exactly this
        /// comma-separated list (use "none" for the empty set).
        #[arg(long)]
        assert_survivors: Option<String>,
    },
    /// Produce a Sturm certificate for the mod-5 congruences.
    Certify {
        /// Which congruence: mod5-40 (tbar(80n+40)) or mod5-60 (tbar(80n+60)).
        #[arg(value_parser = ["mod5-40", "mod5-60"])]
        kind: String,
        /// Write the JSON certificate to this file.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Compute at least this many series terms (default: exactly the
        /// Sturm requirement).
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Prime-exclusion report for a quotient profile.
    Exclude {
        /// Numerator parts, comma-separated (may be empty).
        #[arg(long, default_value = "")]
        lambda: String,
        /// Denominator parts, comma-separated (may be empty).
        #[arg(long, default_value = "")]
        mu: String,
        /// Attach case traces for excluded primes up to this bound.
        #[arg(long, default_value_t = 97)]
        max_prime: u64,
    },
    /// Companion-form metadata, theta witness, and residue-transfer table.
    Fell {
        #[arg(long, default_value = "")]
        lambda: String,
        #[arg(long, default_value = "")]
        mu: String,
        #[arg(long = "mod")]
        modulus: u64,
        /// Plain-series terms to expand (drives the transfer-table range).
        #[arg(long, default_value_t = 800)]
        terms: usize,
    },
    /// Filtration of a level-one form mod ell.
    Filtration {
        /// Level-one engine (the only one implemented; required).
        #[arg(long)]
        level1: bool,
        /// Nominal weight of the form.
        #[arg(long)]
        weight: u64,
        #[arg(long = "mod")]
        modulus: u64,
        /// Eta-quotient expression for the form (must be level one).
        #[arg(long, conflicts_with = "delta_power")]
        eta: Option<String>,
        /// Use Delta^e as the form.
        #[arg(long)]
        delta_power: Option<u64>,
    },
    /// Coset representatives of Gamma_1(N) in SL_2(Z).
    Cosets { level: u64 },
    /// Verify the quoted mod-2/3/5 congruence families.
    Verify {
        /// What to verify ("known" is the only target).
        #[arg(value_parser = ["known"])]
        target: String,
        #[arg(long, default_value_t = 100_000)]
        terms: usize,
        /// Largest power of 9 in the mod-5 family.
        #[arg(long, default_value_t = 2)]
        alpha_max: u32,
    },
}

enum CliError {
    Usage(String),
    Verification(String),
}

impl From<qcong::Error> for CliError {
    fn from(e: qcong::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // a later duplicate initialization is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_parts(input: &str) -> Result<Vec<u64>, CliError> {
    input
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| CliError::Usage(format!("bad partition part '{t}'")))
        })
        .collect()
}

fn parse_modulus(ell: u64) -> Result<Fp, CliError> {
    Ok(Fp::new(PrimeModulus::new(ell)?))
}

fn require_terms(terms: usize) -> Result<(), CliError> {
    if terms == 0 {
        Err(CliError::Usage("--terms must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct SeriesDump {
    offset24: i64,
    modulus: Option<u64>,
    coeffs: Vec<String>,
}

fn dump_qexp<R: CoeffRing>(
    exp: &QExpansion<R>,
    modulus: Option<u64>,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "offset24\t{}", exp.offset24());
            out.push_str(&exp.series().dump_text());
            print!("{out}");
        }
        Format::Json => {
            let dump = SeriesDump {
                offset24: exp.offset24(),
                modulus,
                coeffs: exp.series().coeff_strings(),
            };
            println!("{}", to_json(&dump)?);
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Usage(format!("serialization failure: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Expand {
            expr,
            terms,
            modulus,
        } => {
            require_terms(*terms)?;
            let eq = EtaQuotient::parse(expr)?;
            match modulus {
                Some(ell) => {
                    let fp = parse_modulus(*ell)?;
                    dump_qexp(&expand(&fp, &eq, *terms), Some(*ell), cli.format)
                }
                None => dump_qexp(&expand(&ZZ, &eq, *terms), None, cli.format),
            }
        }
        Command::Tbar {
            terms,
            modulus,
            brute_check,
        } => {
            require_terms(*terms)?;
            if let Some(n_max) = brute_check {
                let exact = tbar_series(&ZZ, (*n_max as usize + 1).max(*terms));
                for n in 0..=*n_max {
                    let brute = tbar_bruteforce(n);
                    if exact.coeff(n as usize).to_string() != brute.to_string() {
                        return Err(CliError::Verification(format!(
                            "tbar({n}): series gives {}, enumerator gives {brute}",
                            exact.coeff(n as usize)
                        )));
                    }
                }
                eprintln!("brute-force check passed for n <= {n_max}");
            }
            match modulus {
                Some(ell) => {
                    let fp = parse_modulus(*ell)?;
                    let series = tbar_series(&fp, *terms);
                    dump_qexp(&QExpansion::new(0, series), Some(*ell), cli.format)
                }
                None => {
                    let series = tbar_series(&ZZ, *terms);
                    dump_qexp(&QExpansion::new(0, series), None, cli.format)
                }
            }
        }
        Command::Scan {
            modulus,
            terms,
            eta,
            assert_survivors,
        } => {
            require_terms(*terms)?;
            let fp = parse_modulus(*modulus)?;
            let eq = match eta {
                Some(expr) => EtaQuotient::parse(expr)?,
                None => EtaQuotient::tbar(),
            };
            let series = expand(&fp, &eq, *terms).into_series();
            let scan = scan_ramanujan(&series)?;
            print_scan(&scan, cli.format)?;
            if let Some(expected) = assert_survivors {
                let got: Vec<u64> = scan
                    .iter()
                    .filter(|c| c.status == CandidateStatus::Empirical)
                    .map(|c| c.a)
                    .collect();
                let want: Vec<u64> = if expected == "none" {
                    Vec::new()
                } else {
                    parse_parts(expected)?
                };
                if got != want {
                    return Err(CliError::Verification(format!(
                        "surviving residues {got:?} differ from expected {want:?}"
                    )));
                }
            }
            Ok(())
        }
        Command::Certify { kind, out, terms } => {
            let cert = match (kind.as_str(), terms) {
                ("mod5-40", None) => certify_80n_40()?,
                ("mod5-40", Some(t)) => certify_80n_40_with_terms(*t)?,
                ("mod5-60", None) => certify_80n_60()?,
                ("mod5-60", Some(t)) => certify_80n_60_with_terms(*t)?,
                _ => unreachable!("clap restricts the kind"),
            };
            let json = to_json(&cert)?;
            if let Some(path) = out {
                std::fs::write(path, &json).map_err(|e| {
                    CliError::Usage(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            match cli.format {
                Format::Json => println!("{json}"),
                Format::Text => print_certificate(&cert),
            }
            if !cert.verified {
                return Err(CliError::Verification(format!(
                    "{}: first failing index n = {}",
                    cert.kind,
                    cert.first_failure.expect("unverified has a failure")
                )));
            }
            Ok(())
        }
        Command::Exclude {
            lambda,
            mu,
            max_prime,
        } => {
            let report = exclusion_report(&parse_parts(lambda)?, &parse_parts(mu)?, *max_prime)?;
            print_exclusion(&report, cli.format)
        }
        Command::Fell {
            lambda,
            mu,
            modulus,
            terms,
        } => {
            require_terms(*terms)?;
            let p = profile(&parse_parts(lambda)?, &parse_parts(mu)?)?;
            let form = build_f_ell(&p, *modulus, *terms)?;
            let witness = theta_nonvanishing(&form)?;
            let t_max = (*terms as u64) / modulus / 2;
            let transfers: Vec<ResidueTransferReport> = (0..*modulus)
                .map(|a| cong_reduce_check(&p, *modulus, a, t_max))
                .collect::<qcong::Result<_>>()?;
            let trace = case_analysis(&p, *modulus, form.t)?;
            let summary = FellSummary {
                ell: form.ell,
                t: form.t,
                delta_ell: form.delta_ell,
                weight2: form.weight2,
                level: form.level,
                leading_exponent: form.leading_exponent(),
                eta: form.eta.clone(),
                theta_witness: witness,
                trace_all_pass: trace.all_pass,
                transfers,
            };
            print_fell(&summary, cli.format)?;
            if summary.transfers.iter().any(|r| !r.agree) {
                let bad = summary.transfers.iter().find(|r| !r.agree).expect("some");
                return Err(CliError::Verification(format!(
                    "residue transfer disagrees at a = {}",
                    bad.a
                )));
            }
            Ok(())
        }
        Command::Filtration {
            level1,
            weight,
            modulus,
            eta,
            delta_power,
        } => {
            if !level1 {
                return Err(CliError::Usage(
                    "only the level-one engine exists; pass --level1".into(),
                ));
            }
            let fp = parse_modulus(*modulus)?;
            let needed = qcong::eta::sturm_bound(2 * *weight as i64, 1)? as usize;
            let series: ModSeries = match (eta, delta_power) {
                (Some(expr), None) => {
                    let eq = EtaQuotient::parse(expr)?;
                    if eq.level_lcm() != 1 {
                        return Err(CliError::Usage(format!(
                            "the filtration engine is level one; quotient has level {}",
                            eq.level_lcm()
                        )));
                    }
                    expand(&fp, &eq, needed + 1).to_plain()?.truncated(needed)
                }
                (None, Some(e)) => {
                    let eq = EtaQuotient::new([(1, 24 * *e as i64)])?;
                    expand(&fp, &eq, needed + 1).to_plain()?.truncated(needed)
                }
                _ => {
                    return Err(CliError::Usage(
                        "pass exactly one of --eta or --delta-power".into(),
                    ))
                }
            };
            let result = filtration_level1(&series, *weight)?;
            match cli.format {
                Format::Json => println!("{}", to_json(&result)?),
                Format::Text => {
                    println!(
                        "filtration w = {} (weights tested: {:?}, certified on {} coefficients)",
                        result.w, result.witness_weight_chain, result.certified_up_to
                    );
                }
            }
            Ok(())
        }
        Command::Cosets { level } => {
            let reps = coset_reps(*level);
            match cli.format {
                Format::Json => println!("{}", to_json(&reps)?),
                Format::Text => {
                    println!(
                        "{} cosets of Gamma_1({level}), {} sign-classes",
                        reps.len(),
                        coset_sign_classes(*level)
                    );
                    for m in &reps {
                        println!(
                            "[{:>3} {:>3}; {:>3} {:>3}]",
                            m[0][0], m[0][1], m[1][0], m[1][1]
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Verify {
            target: _,
            terms,
            alpha_max,
        } => {
            let reports = vec![
                verify_mod3(*terms),
                verify_mod2(*terms),
                verify_linliu(*terms, *alpha_max),
            ];
            match cli.format {
                Format::Json => println!("{}", to_json(&reports)?),
                Format::Text => {
                    for r in &reports {
                        println!(
                            "[{}] mod {}: {} indices checked, {}",
                            if r.ok { "ok" } else { "FAIL" },
                            r.modulus,
                            r.checked,
                            r.description
                        );
                    }
                }
            }
            if let Some(bad) = reports.iter().find(|r| !r.ok) {
                return Err(CliError::Verification(format!(
                    "mod-{} check failed first at index {}",
                    bad.modulus,
                    bad.failures.first().copied().unwrap_or_default()
                )));
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FellSummary {
    ell: u64,
    t: u32,
    delta_ell: u64,
    weight2: i64,
    level: u64,
    leading_exponent: i64,
    eta: EtaQuotient,
    theta_witness: u64,
    trace_all_pass: bool,
    transfers: Vec<ResidueTransferReport>,
}

fn print_scan(scan: &[CongruenceCandidate], format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => println!("{}", to_json(&scan)?),
        Format::Text => {
            println!("ell\ta\tchecked\tstatus");
            for c in scan {
                let status = match &c.status {
                    CandidateStatus::Empirical => "empirical".to_string(),
                    CandidateStatus::Refuted { counterexample } => {
                        format!("refuted at n = {counterexample}")
                    }
                    CandidateStatus::Certified { reference } => format!("certified ({reference})"),
                };
                println!("{}\t{}\t{}\t{}", c.ell, c.a, c.checked_up_to, status);
            }
        }
    }
    Ok(())
}

fn print_certificate(cert: &SturmCertificate) {
    println!(
        "{}: {} (sturm bound {}, stride {}, {} terms mod {}, {} ms)",
        cert.kind,
        if cert.verified { "verified" } else { "FAILED" },
        cert.sturm_bound,
        cert.stride,
        cert.terms_computed,
        cert.modulus,
        cert.runtime_ms
    );
    println!("  quotient {}", cert.eta_factors);
    println!("  {}", cert.residue_checked);
    if let Some(n) = cert.first_failure {
        println!("  first failure at n = {n}");
    }
}

fn print_exclusion(report: &ExclusionReport, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => println!("{}", to_json(report)?),
        Format::Text => {
            let p = &report.profile;
            println!(
                "profile: lambda = {:?}, mu = {:?} (r={}, s={}, u={}, v={}, N={}, gamma={})",
                p.lambda, p.mu, p.r, p.s, p.u, p.v, p.level, p.gamma
            );
            println!("bound B = {}", report.bound_b);
            println!(
                "hypotheses: {} ({})",
                if report.hypothesis_ok {
                    "hold"
                } else {
                    "do not hold"
                },
                report.hypothesis_reason
            );
            println!("excluded: {}", report.excluded_description);
            println!(
                "residual primes{}: {:?}",
                if report.residual_complete {
                    ""
                } else {
                    " (truncated)"
                },
                report.residual
            );
            println!("case traces up to {}:", report.ell_max);
            println!("ell\tt\tk\tk0\thalf-weights\tcase II\tcase IV drop\tall");
            for tr in &report.traces {
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    tr.ell,
                    tr.t,
                    tr.weight_mod_ell,
                    tr.k0,
                    if tr.half_weight_check { "ok" } else { "FAIL" },
                    if tr.case_ii_blocked {
                        "blocked"
                    } else {
                        "OPEN"
                    },
                    tr.case_iv_drop,
                    if tr.all_pass { "pass" } else { "FAIL" }
                );
            }
        }
    }
    Ok(())
}

fn print_fell(summary: &FellSummary, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => println!("{}", to_json(summary)?),
        Format::Text => {
            println!(
                "F_{} = {} (t = {}, delta = {}, weight2 = {}, level = {}, leading exponent {})",
                summary.ell,
                summary.eta,
                summary.t,
                summary.delta_ell,
                summary.weight2,
                summary.level,
                summary.leading_exponent
            );
            println!("theta witness: n = {}", summary.theta_witness);
            println!(
                "case trace: {}",
                if summary.trace_all_pass {
                    "pass"
                } else {
                    "FAIL"
                }
            );
            println!("residue transfer (T = {}):", summary.transfers[0].t_checked);
            println!("a\tb\tc-side\tD-side\tagree");
            for r in &summary.transfers {
                let side = |holds: bool, ce: Option<u64>| match (holds, ce) {
                    (true, _) => "vanishes".to_string(),
                    (false, Some(n)) => format!("fails@{n}"),
                    (false, None) => "fails".to_string(),
                };
                println!(
                    "{}\t{}\t{}\t{}\t{}",
                    r.a,
                    r.b,
                    side(r.c_side_holds, r.c_counterexample),
                    side(r.d_side_holds, r.d_counterexample),
                    if r.agree { "yes" } else { "NO" }
                );
            }
        }
    }
    Ok(())
}
