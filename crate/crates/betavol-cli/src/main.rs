//! `betavol` — command-line access to the exact evaluators, the Monte Carlo
//! estimators, and the comparison engine.
//!
//! Exit codes: 0 when every requested check passes, 1 when at least one
//! comparison fails its z-gate, 2 on usage or parameter errors.

use betavol::closedform::{
    ball_volume, closed_value, efron_value, grassmann_volume, intrinsic_volume_mean,
    kingman_binomial_sides, kingman_q_beta, mean_log_abs_det, pair_distance_moment, sphere_area,
    stiefel_volume, AffineRatioForm, EvalForms, MomentMode, MomentQuery, SphereAffineForm,
};
use betavol::mcverify::{
    estimator::{estimate_moment, StatSpec},
    lyapunov_qr_estimate, verify_bp_linear, verify_corollary3, verify_moment, CheckParams,
    McConfig, SuiteConfig, VerificationReport,
};
use betavol::numfield::Beta;
use betavol::samplers::DistKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "betavol",
    version,
    about = "Determinant moments of random point sets over the real, complex, and quaternion fields: exact values, Monte Carlo estimates, and cross-verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a closed-form quantity
    Closed(ClosedArgs),
    /// Monte Carlo estimate of a determinant-moment statistic
    Estimate(EstimateArgs),
    /// Estimate a statistic and compare it against its closed form
    Verify(VerifyArgs),
    /// Lyapunov-exponent sum of a product of Gaussian factors
    Lyapunov(LyapunovArgs),
    /// Run the full moment verification grid
    Suite(SuiteArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    LinearSquare,
    LinearRect,
    AffineSquare,
    AffineRect,
}

impl From<ModeArg> for MomentMode {
    fn from(m: ModeArg) -> MomentMode {
        match m {
            ModeArg::LinearSquare => MomentMode::LinearSquare,
            ModeArg::LinearRect => MomentMode::LinearRect,
            ModeArg::AffineSquare => MomentMode::AffineSquare,
            ModeArg::AffineRect => MomentMode::AffineRect,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum DistArg {
    Ball,
    Sphere,
    Gauss,
}

impl From<DistArg> for DistKind {
    fn from(d: DistArg) -> DistKind {
        match d {
            DistArg::Ball => DistKind::Ball,
            DistArg::Sphere => DistKind::Sphere,
            DistArg::Gauss => DistKind::Gauss,
        }
    }
}

fn parse_beta(v: u8) -> Result<Beta, String> {
    Beta::try_from_u8(v).ok_or_else(|| format!("beta must be 1, 2, or 4 (got {v})"))
}

/// Formula-variant toggles shared by the closed and verify subcommands.
#[derive(Args, Copy, Clone, Default)]
struct FormToggles {
    /// Use the legacy spherical simplex-moment variant (fails verification;
    /// kept for diagnosis)
    #[arg(long = "paper-form-36prime")]
    paper_form_36prime: bool,
    /// Use the bare moment-ratio variant for rectangular simplex moments
    /// (fails verification for ball/sphere; kept for diagnosis)
    #[arg(long = "paper-form-cor310")]
    paper_form_cor310: bool,
}

impl FormToggles {
    fn forms(self) -> EvalForms {
        EvalForms {
            sphere_affine: if self.paper_form_36prime {
                SphereAffineForm::LegacyPlusOne
            } else {
                SphereAffineForm::Consistent
            },
            affine_ratio: if self.paper_form_cor310 {
                AffineRatioForm::PlainRatio
            } else {
                AffineRatioForm::Weighted
            },
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ClosedCheck {
    Moment,
    PairDistance,
    Kingman,
    Efron,
    Intrinsic,
    MeanLogDet,
    SphereArea,
    BallVolume,
    Stiefel,
    Grassmann,
}

#[derive(Args)]
struct ClosedArgs {
    /// Which closed form to evaluate
    #[arg(long, value_enum, default_value = "moment")]
    check: ClosedCheck,
    #[arg(long, value_enum)]
    dist: Option<DistArg>,
    /// Field selector: 1 (real), 2 (complex), 4 (quaternion)
    #[arg(long, default_value_t = 1)]
    beta: u8,
    /// Ambient dimension n
    #[arg(long)]
    n: Option<usize>,
    /// Matrix width N (defaults to n where both make sense)
    #[arg(long)]
    nn: Option<usize>,
    /// Determinant power (q for square modes, h for rectangular)
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long, value_enum, default_value = "linear-square")]
    mode: ModeArg,
    /// Intrinsic-volume degree k
    #[arg(long)]
    k: Option<usize>,
    /// Real dimension for sphere-area / ball-volume
    #[arg(long)]
    dim: Option<f64>,
    /// Also print both sides of the binomial restatement of the kingman
    /// value (β=1; the sides are known to drift apart for N ≥ 2)
    #[arg(long = "kingman-binomial-diagnostic")]
    kingman_binomial_diagnostic: bool,
    #[command(flatten)]
    toggles: FormToggles,
    /// Emit JSON instead of plain text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    dist: DistArg,
    /// Field selector: 1 (real), 2 (complex), 4 (quaternion)
    #[arg(long, default_value_t = 1)]
    beta: u8,
    /// Ambient dimension n
    #[arg(long)]
    n: usize,
    /// Matrix width N (defaults to n)
    #[arg(long)]
    nn: Option<usize>,
    /// Determinant power
    #[arg(long)]
    exponent: f64,
    #[arg(long, value_enum, default_value = "linear-square")]
    mode: ModeArg,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Generator seed (BETAVOL_SEED if the flag is absent)
    #[arg(long, env = "BETAVOL_SEED", default_value_t = 42)]
    seed: u64,
    /// First generator stream id
    #[arg(long, default_value_t = 0)]
    stream_base: u64,
    /// Sequential partitions (each on its own stream)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum VerifyCheck {
    Moment,
    Corollary3,
    BpLinear,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "moment")]
    check: VerifyCheck,
    #[arg(long, value_enum)]
    dist: Option<DistArg>,
    /// Field selector: 1 (real), 2 (complex), 4 (quaternion)
    #[arg(long, default_value_t = 1)]
    beta: u8,
    /// Ambient dimension n
    #[arg(long)]
    n: usize,
    /// Matrix width N (defaults to n)
    #[arg(long)]
    nn: Option<usize>,
    /// Determinant power (q/h for moments, s for corollary3)
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long, value_enum, default_value = "linear-square")]
    mode: ModeArg,
    /// Exponential tilt strength for bp-linear
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Generator seed (BETAVOL_SEED if the flag is absent)
    #[arg(long, env = "BETAVOL_SEED", default_value_t = 42)]
    seed: u64,
    /// Largest |z| that still passes
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    /// First generator stream id
    #[arg(long, default_value_t = 0)]
    stream_base: u64,
    /// Sequential partitions (each on its own stream)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    toggles: FormToggles,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct LyapunovArgs {
    /// Field selector: 1 (real), 2 (complex), 4 (quaternion)
    #[arg(long, default_value_t = 1)]
    beta: u8,
    /// Factor size N
    #[arg(long)]
    nn: usize,
    /// Chain length per repetition
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Independent chains
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// Generator seed (BETAVOL_SEED if the flag is absent)
    #[arg(long, env = "BETAVOL_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    #[arg(long, default_value_t = 0)]
    stream_base: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Generator seed (BETAVOL_SEED if the flag is absent)
    #[arg(long, env = "BETAVOL_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

const CSV_HEADER: &str =
    "check,beta,n,N,dist,exponent,closed_form,mc_mean,mc_stderr,samples,z,pass,seed";

fn csv_row(r: &VerificationReport) -> String {
    let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.check,
        r.params.beta.map(|b| b.to_string()).unwrap_or_default(),
        opt_u(r.params.n),
        opt_u(r.params.inner),
        r.params.dist.map(|d| d.to_string()).unwrap_or_default(),
        opt_f(r.params.exponent),
        r.closed_form,
        r.estimate.mean,
        r.estimate.stderr,
        r.estimate.count,
        r.z,
        r.pass,
        r.estimate.seed,
    )
}

fn plain_row(r: &VerificationReport) -> String {
    let verdict = if r.pass { "PASS" } else { "FAIL" };
    let mut line = format!("[{verdict}] {}", r.check);
    if let Some(d) = r.params.dist {
        line += &format!(" dist={d}");
    }
    if let Some(b) = r.params.beta {
        line += &format!(" beta={b}");
    }
    if let Some(n) = r.params.n {
        line += &format!(" n={n}");
    }
    if let Some(nn) = r.params.inner {
        line += &format!(" N={nn}");
    }
    if let Some(e) = r.params.exponent {
        line += &format!(" exponent={e}");
    }
    if let Some(a) = r.params.alpha {
        line += &format!(" alpha={a}");
    }
    if let Some(s) = r.params.steps {
        line += &format!(" steps={s}");
    }
    if let Some(rp) = r.params.reps {
        line += &format!(" reps={rp}");
    }
    line += &format!(
        " closed={:.10e} mc={:.10e} stderr={:.3e} samples={} z={:+.3} seed={}",
        r.closed_form, r.estimate.mean, r.estimate.stderr, r.estimate.count, r.z, r.estimate.seed
    );
    for (flag, v) in &r.flags {
        if *v {
            line += &format!(" [{flag}]");
        }
    }
    line
}

/// Prints reports in the requested format; returns whether all passed.
fn emit_reports(reports: &[VerificationReport], json: bool, csv: bool, workers: usize) -> bool {
    if json {
        let envelope = serde_json::json!({ "workers": workers, "reports": reports });
        println!("{}", serde_json::to_string_pretty(&envelope).unwrap());
    } else if csv {
        println!("{CSV_HEADER}");
        for r in reports {
            println!("{}", csv_row(r));
        }
    } else {
        println!("workers={workers}");
        for r in reports {
            println!("{}", plain_row(r));
        }
        let failed = reports.iter().filter(|r| !r.pass).count();
        println!("{} checks, {} failed", reports.len(), failed);
    }
    reports.iter().all(|r| r.pass)
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("--{what} is required for this check"))
}

fn run_closed(a: ClosedArgs) -> Result<(), String> {
    let beta = parse_beta(a.beta)?;
    let err = |e: betavol::Error| e.to_string();
    let mut params = CheckParams {
        beta: Some(a.beta),
        ..CheckParams::default()
    };
    let (label, value) = match a.check {
        ClosedCheck::Moment => {
            let dist: DistKind = require(a.dist, "dist")?.into();
            let mode: MomentMode = a.mode.into();
            let exponent = require(a.exponent, "exponent")?;
            let (n, nn) = match (a.n, a.nn) {
                (Some(n), Some(nn)) => (n, nn),
                (Some(n), None) => (n, n),
                _ => return Err("--n is required for a moment".into()),
            };
            let query = MomentQuery::new(dist, beta, n, nn, exponent, mode).map_err(err)?;
            params = CheckParams::for_moment(&query);
            ("moment", closed_value(&query, a.toggles.forms()).map_err(err)?)
        }
        ClosedCheck::PairDistance => {
            let n = require(a.n, "n")?;
            let h = require(a.exponent, "exponent")?;
            params.n = Some(n as u64);
            params.exponent = Some(h);
            ("pair-distance", pair_distance_moment(beta, n, h).map_err(err)?)
        }
        ClosedCheck::Kingman => {
            let nn = require(a.nn.or(a.n), "nn")?;
            params.inner = Some(nn as u64);
            let v = kingman_q_beta(beta, nn);
            if a.kingman_binomial_diagnostic {
                if beta != Beta::One {
                    return Err("the binomial diagnostic is defined for beta 1 only".into());
                }
                let (lhs, rhs) = kingman_binomial_sides(nn);
                if a.json {
                    println!(
                        "{}",
                        serde_json::json!({
                            "check": "kingman-binomial-diagnostic",
                            "params": params,
                            "gamma_side": lhs,
                            "binomial_side": rhs,
                            "ratio": rhs / lhs,
                        })
                    );
                } else {
                    println!(
                        "kingman-binomial-diagnostic N={nn}: gamma_side={lhs:.12e} binomial_side={rhs:.12e} ratio={:.6}",
                        rhs / lhs
                    );
                }
            }
            ("kingman", v)
        }
        ClosedCheck::Efron => {
            let nn = require(a.nn.or(a.n), "nn")?;
            params.inner = Some(nn as u64);
            ("efron", efron_value(beta, nn))
        }
        ClosedCheck::Intrinsic => {
            if beta != Beta::One {
                return Err("intrinsic volumes are defined over the reals (beta 1)".into());
            }
            let nn = require(a.nn.or(a.n), "nn")?;
            let k = require(a.k, "k")?;
            params.inner = Some(nn as u64);
            params.k = Some(k as u64);
            ("intrinsic", intrinsic_volume_mean(nn, k).map_err(err)?)
        }
        ClosedCheck::MeanLogDet => {
            let dist: DistKind = require(a.dist, "dist")?.into();
            let nn = require(a.nn.or(a.n), "nn")?;
            params.inner = Some(nn as u64);
            params.dist = Some(dist);
            ("mean-log-det", mean_log_abs_det(dist, beta, nn).map_err(err)?)
        }
        ClosedCheck::SphereArea => {
            let dim = require(a.dim, "dim")?;
            ("sphere-area", sphere_area(dim))
        }
        ClosedCheck::BallVolume => {
            let dim = require(a.dim, "dim")?;
            ("ball-volume", ball_volume(dim))
        }
        ClosedCheck::Stiefel => {
            let n = require(a.n, "n")?;
            let nn = require(a.nn, "nn")?;
            params.n = Some(n as u64);
            params.inner = Some(nn as u64);
            ("stiefel", stiefel_volume(beta, n, nn))
        }
        ClosedCheck::Grassmann => {
            let n = require(a.n, "n")?;
            let nn = require(a.nn, "nn")?;
            params.n = Some(n as u64);
            params.inner = Some(nn as u64);
            ("grassmann", grassmann_volume(beta, n, nn))
        }
    };
    if a.json {
        println!(
            "{}",
            serde_json::json!({ "check": label, "params": params, "closed_form": value })
        );
    } else {
        println!("{label}: {value:.15e}");
    }
    Ok(())
}

fn run_estimate(a: EstimateArgs) -> Result<(), String> {
    let beta = parse_beta(a.beta)?;
    let mode: MomentMode = a.mode.into();
    let nn = a.nn.unwrap_or(a.n);
    // validate the parameter set exactly as verify would
    MomentQuery::new(a.dist.into(), beta, a.n, nn, a.exponent, mode).map_err(|e| e.to_string())?;
    let spec = StatSpec {
        dist: a.dist.into(),
        beta,
        ambient_n: a.n,
        inner_n: nn,
        exponent: a.exponent,
        affine: matches!(mode, MomentMode::AffineSquare | MomentMode::AffineRect),
    };
    let est = estimate_moment(&spec, a.samples, a.seed, a.stream_base, a.workers);
    if a.json {
        println!(
            "{}",
            serde_json::json!({ "workers": a.workers, "estimate": est })
        );
    } else {
        println!(
            "mean={:.10e} stderr={:.3e} samples={} seed={} streams={:?} workers={}",
            est.mean, est.stderr, est.count, est.seed, est.streams, a.workers
        );
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<bool, String> {
    let beta = parse_beta(a.beta)?;
    let err = |e: betavol::Error| e.to_string();
    let cfg = McConfig {
        samples: a.samples,
        seed: a.seed,
        z_max: a.z_max,
        workers: a.workers,
        stream_base: a.stream_base,
    };
    let nn = a.nn.unwrap_or(a.n);
    let report = match a.check {
        VerifyCheck::Moment => {
            let dist: DistKind = require(a.dist, "dist")?.into();
            let exponent = require(a.exponent, "exponent")?;
            let query =
                MomentQuery::new(dist, beta, a.n, nn, exponent, a.mode.into()).map_err(err)?;
            verify_moment(&query, a.toggles.forms(), &cfg).map_err(err)?
        }
        VerifyCheck::Corollary3 => {
            let s = require(a.exponent, "exponent")?;
            verify_corollary3(beta, a.n, nn, s, &cfg).map_err(err)?
        }
        VerifyCheck::BpLinear => {
            let alpha = require(a.alpha, "alpha")?;
            verify_bp_linear(beta, a.n, nn, alpha, &cfg).map_err(err)?
        }
    };
    Ok(emit_reports(&[report], a.json, a.csv, a.workers))
}

fn run_lyapunov(a: LyapunovArgs) -> Result<bool, String> {
    let beta = parse_beta(a.beta)?;
    let cfg = McConfig {
        samples: a.reps as u64,
        seed: a.seed,
        z_max: a.z_max,
        workers: a.workers,
        stream_base: a.stream_base,
    };
    let report =
        lyapunov_qr_estimate(beta, a.nn, a.steps, a.reps, &cfg).map_err(|e| e.to_string())?;
    Ok(emit_reports(&[report], a.json, a.csv, a.workers))
}

fn run_suite(a: SuiteArgs) -> Result<bool, String> {
    let cfg = SuiteConfig {
        samples: a.samples,
        seed: a.seed,
        z_max: a.z_max,
        workers: a.workers,
    };
    let reports = betavol::mcverify::run_suite(&cfg).map_err(|e| e.to_string())?;
    Ok(emit_reports(&reports, a.json, a.csv, a.workers))
}

/// Restore default SIGPIPE handling so `betavol … | head` terminates
/// quietly like any other pipeline stage instead of panicking when the
/// reader closes the pipe.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Closed(a) => run_closed(a).map(|()| true),
        Cmd::Estimate(a) => run_estimate(a).map(|()| true),
        Cmd::Verify(a) => run_verify(a),
        Cmd::Lyapunov(a) => run_lyapunov(a),
        Cmd::Suite(a) => run_suite(a),
    };
    let code = match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    };
    std::process::exit(code);
}
