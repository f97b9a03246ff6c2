//! `coinwalk` — simulate coined quantum walks on `Z^d` and decide
//! localization.
//!
//! Subcommands map onto the library operations: `simulate` records a
//! return-probability time series as CSV, `scan` sweeps the Brillouin zone
//! for constant eigenvalues, `rank-test` runs the all-selectors coin
//! submatrix sweep, `certificate` checks the Fourier-walk determinant
//! certificate, `search` looks for finite-support eigenvectors, and `decide`
//! chains everything into a verdict.
//!
//! Exit status: 0 on success, 2 on validation errors (bad flags, unreadable
//! or malformed files, non-unitary coins), 3 on resource-guard rejections,
//! 4 on internal-consistency failures.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::json;

use coinwalk::evolve::return_probability_series;
use coinwalk::localization::{
    decide, finite_support_eigenvector_search, fourier_certificate, necessary_condition_test,
    CoinSubmatrix, FourierCertificate, NecessaryConditionConclusion, ScanParams, VerdictStatus,
    Witness,
};
use coinwalk::momentum::constant_eigenvalue_scan;
use coinwalk::{CoinMatrix, Error, LatticeState, Position, SubmatrixSelector};

#[derive(Parser)]
#[command(
    name = "coinwalk",
    version,
    about = "Coined quantum walks on Z^d: simulation, spectra, and localization certificates"
)]
struct Cli {
    /// Print a machine-readable JSON summary to stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CoinArg {
    /// Built-in coin name (fourier:<d> | grover2d | hadamard) or a coin file
    /// path.
    #[arg(long)]
    coin: String,
}

#[derive(Args)]
struct ScanArgs {
    /// Grid points per momentum axis.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Constancy tolerance for the scan.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a state and write the return-probability series as CSV.
    Simulate {
        #[command(flatten)]
        coin: CoinArg,
        /// Number of steps to record (rows n = 0..=steps).
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Tracked site, comma-separated coordinates (default: the origin).
        #[arg(long)]
        site: Option<String>,
        /// Initial state: "uniform" (delta at the origin, uniform spin),
        /// "random" (delta at the origin, seeded random spin), or a state
        /// file path.
        #[arg(long, default_value = "uniform")]
        init: String,
        /// Seed for randomized initial states.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "simulate.csv")]
        out: PathBuf,
    },
    /// Scan the Brillouin zone for k-independent eigenvalues.
    Scan {
        #[command(flatten)]
        coin: CoinArg,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, default_value = "scan.json")]
        out: PathBuf,
    },
    /// Rank-test all 2^d coin submatrices.
    RankTest {
        #[command(flatten)]
        coin: CoinArg,
        #[arg(long, default_value = "rank_test.json")]
        out: PathBuf,
    },
    /// Verify the Fourier-walk full-rank determinant certificate.
    Certificate {
        #[command(flatten)]
        coin: CoinArg,
        #[arg(long, default_value = "certificate.json")]
        out: PathBuf,
    },
    /// Search for finite-support eigenvectors at the scan's constant
    /// eigenvalues.
    Search {
        #[command(flatten)]
        coin: CoinArg,
        #[command(flatten)]
        scan: ScanArgs,
        /// Box radius for the truncated search.
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value = "search.json")]
        out: PathBuf,
    },
    /// Run the combined decision pipeline and write a verdict.
    Decide {
        #[command(flatten)]
        coin: CoinArg,
        #[command(flatten)]
        scan: ScanArgs,
        /// Largest box radius tried per candidate eigenvalue.
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value = "verdict.json")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::ResourceGuard { .. }) => 3,
            CliError::Core(Error::InternalConsistency(_)) => 4,
            CliError::Core(Error::EigenSolver { .. }) => 4,
            _ => 2,
        }
    }
}

fn load_coin(spec: &str) -> Result<CoinMatrix, CliError> {
    if spec == "hadamard" || spec == "grover2d" || spec.starts_with("fourier:") {
        return Ok(CoinMatrix::builtin(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "--coin `{spec}` is neither a built-in name (fourier:<d> | grover2d | hadamard) \
             nor an existing file"
        )));
    }
    Ok(CoinMatrix::load(path)?)
}

fn parse_site(text: &str, d: usize) -> Result<Position, CliError> {
    let coords: Result<Vec<i64>, _> = text.split(',').map(|t| t.trim().parse::<i64>()).collect();
    let coords = coords
        .map_err(|_| CliError::Usage(format!("--site `{text}` is not a list of integers")))?;
    if coords.len() != d {
        return Err(CliError::Usage(format!(
            "--site `{text}` has {} coordinates, the coin needs {d}",
            coords.len()
        )));
    }
    Ok(Position::new(&coords))
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("--out `{}` has no file name", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serialization");
    s.push('\n');
    s
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Compact display for eigenvalues near lattice-friendly points: `1`, `-1`,
/// `0.5+0.866025i`.
fn format_lambda(z: Complex64) -> String {
    let fmt_real = |x: f64| -> String {
        if (x - x.round()).abs() < 1e-9 {
            format!("{}", x.round() as i64)
        } else {
            format!("{x:.6}")
        }
    };
    if z.im.abs() < 1e-9 {
        fmt_real(z.re)
    } else if z.re.abs() < 1e-9 {
        format!("{}i", fmt_real(z.im))
    } else {
        let sign = if z.im < 0.0 { "-" } else { "+" };
        format!("{}{}{}i", fmt_real(z.re), sign, fmt_real(z.im.abs()))
    }
}

fn emit(human: &str, machine: serde_json::Value, as_json: bool) {
    if as_json {
        println!("{machine}");
    } else {
        println!("{human}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            coin,
            steps,
            site,
            init,
            seed,
            out,
        } => cmd_simulate(
            &coin.coin,
            steps,
            site.as_deref(),
            &init,
            seed,
            &out,
            cli.json,
        ),
        Command::Scan { coin, scan, out } => cmd_scan(&coin.coin, &scan, &out, cli.json),
        Command::RankTest { coin, out } => cmd_rank_test(&coin.coin, &out, cli.json),
        Command::Certificate { coin, out } => cmd_certificate(&coin.coin, &out, cli.json),
        Command::Search {
            coin,
            scan,
            radius,
            out,
        } => cmd_search(&coin.coin, &scan, radius, &out, cli.json),
        Command::Decide {
            coin,
            scan,
            radius,
            out,
        } => cmd_decide(&coin.coin, &scan, radius, &out, cli.json),
    }
}

fn cmd_simulate(
    coin_spec: &str,
    steps: usize,
    site: Option<&str>,
    init: &str,
    seed: u64,
    out: &Path,
    as_json: bool,
) -> Result<(), CliError> {
    let coin = load_coin(coin_spec)?;
    let d = coin.d();
    let tracked = match site {
        Some(text) => parse_site(text, d.get())?,
        None => Position::origin(d),
    };
    let initial = match init {
        "uniform" => {
            let amp = Complex64::new(1.0, 0.0);
            let spin = vec![amp; d.internal_dim()];
            LatticeState::delta(d, Position::origin(d), &spin)?
        }
        "random" => {
            let mut rng = StdRng::seed_from_u64(seed);
            let spin: Vec<Complex64> = (0..d.internal_dim())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            LatticeState::delta(d, Position::origin(d), &spin)?
        }
        path => LatticeState::load(Path::new(path))?,
    };

    let records = return_probability_series(&initial, &coin, &tracked, steps)?;

    let mut csv = String::from("n,norm,return_prob,avg_return_prob,support\n");
    for r in &records {
        writeln!(
            csv,
            "{},{:.16e},{:.16e},{:.16e},{}",
            r.step_index, r.norm, r.return_probability, r.avg_return_probability, r.support_size
        )
        .expect("string write");
    }
    write_atomic(out, &csv)?;

    let last = records.last().expect("steps >= 1 yields records");
    emit(
        &format!(
            "simulate {coin_spec}: {} rows written to {}; final return_prob {:.6e}, \
             time-averaged {:.6e}, support {}",
            records.len(),
            out.display(),
            last.return_probability,
            last.avg_return_probability,
            last.support_size
        ),
        json!({
            "command": "simulate",
            "coin": coin_spec,
            "config": {"steps": steps, "site": tracked.coords(), "init": init, "seed": seed},
            "artifact": out.display().to_string(),
            "final": {
                "return_prob": last.return_probability,
                "avg_return_prob": last.avg_return_probability,
                "support": last.support_size,
            },
        }),
        as_json,
    );
    Ok(())
}

#[derive(Serialize)]
struct ScanArtifact<'a> {
    coin: &'a str,
    #[serde(flatten)]
    report: &'a coinwalk::momentum::ConstancyReport,
}

fn cmd_scan(coin_spec: &str, scan: &ScanArgs, out: &Path, as_json: bool) -> Result<(), CliError> {
    let coin = load_coin(coin_spec)?;
    let report = constant_eigenvalue_scan(&coin, scan.grid, scan.tol)?;
    write_atomic(
        out,
        &to_pretty_json(&ScanArtifact {
            coin: coin_spec,
            report: &report,
        }),
    )?;

    let constants: Vec<String> = report
        .constant_eigenvalues
        .iter()
        .map(|c| format_lambda(c.lambda))
        .collect();
    let human = if constants.is_empty() {
        format!(
            "scan {coin_spec}: no constant eigenvalue on the {}^{} grid (tol {:.1e})",
            scan.grid,
            coin.d(),
            scan.tol
        )
    } else {
        format!(
            "scan {coin_spec}: constant eigenvalue(s) {} on the {}^{} grid (tol {:.1e})",
            constants.join(", "),
            scan.grid,
            coin.d(),
            scan.tol
        )
    };
    emit(
        &human,
        json!({
            "command": "scan",
            "coin": coin_spec,
            "config": {"grid": scan.grid, "tol": scan.tol},
            "artifact": out.display().to_string(),
            "constant_eigenvalues": report
                .constant_eigenvalues
                .iter()
                .map(|c| pair(c.lambda))
                .collect::<Vec<_>>(),
        }),
        as_json,
    );
    Ok(())
}

#[derive(Serialize)]
struct RankTestArtifact<'a> {
    coin: &'a str,
    d: usize,
    rank_table: &'a [CoinSubmatrix],
    conclusion: &'a str,
    witness: Option<&'a SubmatrixSelector>,
}

fn cmd_rank_test(coin_spec: &str, out: &Path, as_json: bool) -> Result<(), CliError> {
    let coin = load_coin(coin_spec)?;
    let report = necessary_condition_test(&coin)?;
    let (conclusion, witness) = match &report.conclusion {
        NecessaryConditionConclusion::NoLocalization { witness } => {
            ("no_localization", Some(witness))
        }
        NecessaryConditionConclusion::Inconclusive => ("inconclusive", None),
    };
    write_atomic(
        out,
        &to_pretty_json(&RankTestArtifact {
            coin: coin_spec,
            d: coin.d().get(),
            rank_table: &report.rank_table,
            conclusion,
            witness,
        }),
    )?;

    let human = match witness {
        Some(selector) => {
            format!("rank-test {coin_spec}: no_localization (witness ell={selector})")
        }
        None => format!(
            "rank-test {coin_spec}: inconclusive (all {} selectors rank-deficient)",
            report.rank_table.len()
        ),
    };
    emit(
        &human,
        json!({
            "command": "rank-test",
            "coin": coin_spec,
            "artifact": out.display().to_string(),
            "conclusion": conclusion,
            "witness": witness.map(|w| w.bits().to_vec()),
        }),
        as_json,
    );
    Ok(())
}

#[derive(Serialize)]
struct CertificateArtifact<'a> {
    coin: &'a str,
    #[serde(flatten)]
    certificate: &'a FourierCertificate,
}

fn cmd_certificate(coin_spec: &str, out: &Path, as_json: bool) -> Result<(), CliError> {
    let d = match coin_spec.strip_prefix("fourier:") {
        Some(ds) => coinwalk::Dimension::new(ds.parse::<usize>().map_err(|_| {
            CliError::Usage(format!(
                "--coin `{coin_spec}` is not a valid fourier:<d> name"
            ))
        })?)?,
        None => {
            return Err(CliError::Usage(format!(
                "the certificate applies to the Fourier family only; got --coin `{coin_spec}`"
            )))
        }
    };
    let certificate = fourier_certificate(d)?;
    write_atomic(
        out,
        &to_pretty_json(&CertificateArtifact {
            coin: coin_spec,
            certificate: &certificate,
        }),
    )?;

    emit(
        &format!(
            "certificate {coin_spec}: rank {} = d, |det| = {:.12} matches closed form {:.12} \
             (selector ell={})",
            certificate.rank,
            certificate.det_magnitude,
            certificate.expected_det_magnitude,
            certificate.selector
        ),
        json!({
            "command": "certificate",
            "coin": coin_spec,
            "artifact": out.display().to_string(),
            "rank": certificate.rank,
            "det_magnitude": certificate.det_magnitude,
        }),
        as_json,
    );
    Ok(())
}

#[derive(Serialize)]
struct SearchArtifact<'a> {
    coin: &'a str,
    d: usize,
    grid: usize,
    tol: f64,
    radius: usize,
    results: Vec<SearchEntry>,
}

#[derive(Serialize)]
struct SearchEntry {
    lambda: [f64; 2],
    nullspace_dimension: usize,
    residuals: Vec<f64>,
    basis: Vec<serde_json::Value>,
}

fn cmd_search(
    coin_spec: &str,
    scan: &ScanArgs,
    radius: usize,
    out: &Path,
    as_json: bool,
) -> Result<(), CliError> {
    let coin = load_coin(coin_spec)?;
    let report = constant_eigenvalue_scan(&coin, scan.grid, scan.tol)?;
    let mut results = Vec::new();
    for candidate in &report.constant_eigenvalues {
        let found = finite_support_eigenvector_search(&coin, candidate.lambda, radius)?;
        results.push(SearchEntry {
            lambda: pair(found.lambda),
            nullspace_dimension: found.nullspace_dimension,
            residuals: found.residuals,
            basis: found
                .basis
                .iter()
                .map(LatticeState::to_json_value)
                .collect(),
        });
    }
    let total: usize = results.iter().map(|r| r.nullspace_dimension).sum();
    write_atomic(
        out,
        &to_pretty_json(&SearchArtifact {
            coin: coin_spec,
            d: coin.d().get(),
            grid: scan.grid,
            tol: scan.tol,
            radius,
            results,
        }),
    )?;

    let human = if report.constant_eigenvalues.is_empty() {
        format!(
            "search {coin_spec}: no constant eigenvalue to search for (grid {}, tol {:.1e})",
            scan.grid, scan.tol
        )
    } else {
        format!(
            "search {coin_spec}: total nullspace dimension {total} over {} candidate(s) \
             at radius {radius}",
            report.constant_eigenvalues.len()
        )
    };
    emit(
        &human,
        json!({
            "command": "search",
            "coin": coin_spec,
            "config": {"grid": scan.grid, "tol": scan.tol, "radius": radius},
            "artifact": out.display().to_string(),
            "total_nullspace_dimension": total,
        }),
        as_json,
    );
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum WitnessDoc {
    Selector {
        ell: Vec<u8>,
    },
    Eigenvector {
        lambda: [f64; 2],
        state_file: String,
    },
}

#[derive(Serialize)]
struct VerdictArtifact<'a> {
    coin: &'a str,
    d: usize,
    status: VerdictStatus,
    witness: Option<WitnessDoc>,
    rank_table: &'a [CoinSubmatrix],
    certificate: Option<&'a FourierCertificate>,
}

fn cmd_decide(
    coin_spec: &str,
    scan: &ScanArgs,
    radius: usize,
    out: &Path,
    as_json: bool,
) -> Result<(), CliError> {
    let coin = load_coin(coin_spec)?;
    let verdict = decide(
        &coin,
        ScanParams {
            grid: scan.grid,
            tol: scan.tol,
        },
        radius,
    )?;

    // corroborating determinant certificate for built-in Fourier coins
    let certificate = match coin_spec.strip_prefix("fourier:") {
        Some(ds) => {
            let d = coinwalk::Dimension::new(ds.parse::<usize>().unwrap_or(0))?;
            Some(fourier_certificate(d)?)
        }
        None => None,
    };

    let (witness_doc, summary) = match &verdict.witness {
        Some(Witness::FullRankSelector(selector)) => (
            Some(WitnessDoc::Selector {
                ell: selector.bits().to_vec(),
            }),
            format!("no_localization (witness ell={selector})"),
        ),
        Some(Witness::Eigenvector { lambda, state, .. }) => {
            let state_file = out.with_extension("witness_state.json");
            write_atomic(&state_file, &state.to_json_string())?;
            (
                Some(WitnessDoc::Eigenvector {
                    lambda: pair(*lambda),
                    state_file: state_file.display().to_string(),
                }),
                format!("localization (lambda={})", format_lambda(*lambda)),
            )
        }
        None => (
            None,
            format!("unknown (no finite-support eigenvector up to radius {radius})"),
        ),
    };

    write_atomic(
        out,
        &to_pretty_json(&VerdictArtifact {
            coin: coin_spec,
            d: coin.d().get(),
            status: verdict.status,
            witness: witness_doc,
            rank_table: &verdict.rank_table,
            certificate: certificate.as_ref(),
        }),
    )?;

    emit(
        &summary,
        json!({
            "command": "decide",
            "coin": coin_spec,
            "config": {"grid": scan.grid, "tol": scan.tol, "radius": radius},
            "artifact": out.display().to_string(),
            "status": verdict.status,
            "summary": summary,
        }),
        as_json,
    );
    Ok(())
}
