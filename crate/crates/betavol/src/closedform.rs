//! Exact evaluators for sphere/ball/frame-manifold volumes and for moments
//! of determinant statistics of random point sets and matrices over F_β.
//!
//! Everything is assembled in log space from `ln_gamma` and exponentiated
//! once, so ratios of huge Γ values never overflow, and expressions that
//! cancel algebraically (a moment at exponent zero, a volume ratio with
//! equal dimensions) evaluate to exactly 1.
//!
//! Conventions:
//!
//! * σ(l) = 2 π^{l/2} / Γ(l/2) is the surface area of the unit sphere in
//!   ℝ^l, used at arbitrary real l > 0 — the Γ form is the analytic
//!   extension that the moment formulas evaluate at fractional dimension.
//! * κ(l) = σ(l)/l is the unit-ball volume, with κ(0) = 1.
//! * "Linear" moments concern N points (or an n×N matrix) through the
//!   origin: the statistic is det(M†M)^{q/2} of the matrix with those
//!   columns, i.e. |det M|^q when square. "Affine" moments concern N+1
//!   points with the first subtracted off — simplex data.
//! * A moment at fractional exponent q is a volume-ratio expression
//!   evaluated at the real dimension n = N + q/β.
//!
//! Two closed forms here deliberately exist in a second, *inconsistent*
//! variant ([`SphereAffineForm::LegacyPlusOne`],
//! [`AffineRatioForm::PlainRatio`]): they reproduce formula variants that
//! circulate in print but fail direct simulation by large z-scores. They are
//! kept behind explicit toggles so the failure is demonstrable, and are
//! never the default.

use crate::error::{Error, Result};
use crate::numfield::Beta;
use crate::samplers::DistKind;
use crate::special::{digamma, ln_gamma};
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// ln σ(l), σ(l) = 2π^{l/2}/Γ(l/2): log surface area of the unit sphere in
/// ℝ^l, for real l > 0.
pub fn log_sphere_area(l: f64) -> f64 {
    assert!(l > 0.0, "sphere dimension must be positive, got {l}");
    std::f64::consts::LN_2 + 0.5 * l * LN_PI - ln_gamma(0.5 * l)
}

/// Surface area σ(l) of the unit sphere in ℝ^l (σ(1) = 2, σ(2) = 2π, …),
/// valid at non-integer l.
pub fn sphere_area(l: f64) -> f64 {
    log_sphere_area(l).exp()
}

/// Volume κ(l) = σ(l)/l of the unit ball in ℝ^l, with κ(0) = 1.
pub fn ball_volume(l: f64) -> f64 {
    assert!(l >= 0.0, "ball dimension must be nonnegative, got {l}");
    if l == 0.0 {
        1.0
    } else {
        (log_sphere_area(l) - l.ln()).exp()
    }
}

/// ln of the volume of the manifold of orthonormal N-frames in F_β^n,
/// at real n > N - 1: Σ_{i=1..N} ln σ(β(n-i+1)).
fn ln_stiefel(beta: Beta, n: f64, nn: usize) -> f64 {
    let bf = beta.f();
    (1..=nn)
        .map(|i| log_sphere_area(bf * (n - i as f64 + 1.0)))
        .sum()
}

/// Volume of the manifold of orthonormal N-frames in F_β^n.
pub fn stiefel_volume(beta: Beta, n: usize, nn: usize) -> f64 {
    assert!(n >= nn && nn >= 1, "need n >= N >= 1, got n={n}, N={nn}");
    ln_stiefel(beta, n as f64, nn).exp()
}

/// ln of the volume of the manifold of N-dimensional subspaces of F_β^n
/// (frame volume over the volume of bases within a subspace), at real n.
fn ln_grassmann(beta: Beta, n: f64, nn: usize) -> f64 {
    let bf = beta.f();
    (1..=nn)
        .map(|i| {
            log_sphere_area(bf * (n - i as f64 + 1.0))
                - log_sphere_area(bf * (nn as f64 - i as f64 + 1.0))
        })
        .sum()
}

/// Volume of the manifold of N-dimensional subspaces of F_β^n. Equals 1
/// when n = N.
pub fn grassmann_volume(beta: Beta, n: usize, nn: usize) -> f64 {
    assert!(n >= nn && nn >= 1, "need n >= N >= 1, got n={n}, N={nn}");
    ln_grassmann(beta, n as f64, nn).exp()
}

/// Σ_{i=1..N} [ln σ(β(N-i+1)) - ln σ(β(n-i+1))] = -ln_grassmann at real n:
/// the volume-ratio core shared by every moment formula.
fn ln_sigma_ratio_prod(beta: Beta, n: f64, nn: usize) -> f64 {
    -ln_grassmann(beta, n, nn)
}

fn ln_linear_moment(dist: DistKind, beta: Beta, nn: usize, q: f64) -> f64 {
    let bf = beta.f();
    let nnf = nn as f64;
    let n = nnf + q / bf;
    let core = ln_sigma_ratio_prod(beta, n, nn);
    // ball power written as g(n) - g(N) for a single g, so q = 0 cancels
    // exactly
    match dist {
        DistKind::Ball => {
            let g = |x: f64| log_sphere_area(bf * x) - x.ln();
            core + nnf * (g(n) - g(nnf))
        }
        DistKind::Sphere => core + nnf * (log_sphere_area(bf * n) - log_sphere_area(bf * nnf)),
        DistKind::Gauss => core + 0.5 * nnf * q * LN_PI,
    }
}

/// E |det M|^q for an N×N matrix M whose columns are N independent points
/// of F_β^N drawn from `dist`. Defined for q > -β; q = 0 gives exactly 1.
pub fn linear_moment(dist: DistKind, beta: Beta, nn: usize, q: f64) -> Result<f64> {
    if nn < 1 {
        return Err(Error::InvalidParameter(format!("need N >= 1, got {nn}")));
    }
    if q <= -beta.f() {
        return Err(Error::InvalidParameter(format!(
            "linear moment diverges for q <= -beta (q = {q}, beta = {beta})"
        )));
    }
    Ok(ln_linear_moment(dist, beta, nn, q).exp())
}

fn ln_linear_ratio(dist: DistKind, beta: Beta, n: usize, nn: usize, h: f64) -> f64 {
    // Algebraically: grassmann(n, N) × squeeze-factor^N × the square moment
    // at exponent h + β(n-N). Folding the squeeze factor into the square
    // moment's volume terms leaves only *differences of one function at two
    // real dimensions* (n + h/β versus n), so h = 0 cancels exactly.
    let bf = beta.f();
    let (nf, nnf) = (n as f64, nn as f64);
    let n_inner = nf + h / bf;
    let core = ln_grassmann(beta, nf, nn) - ln_grassmann(beta, n_inner, nn);
    let power = match dist {
        DistKind::Ball => {
            nnf * ((log_sphere_area(bf * n_inner) - n_inner.ln())
                - (log_sphere_area(bf * nf) - nf.ln()))
        }
        DistKind::Sphere => nnf * (log_sphere_area(bf * n_inner) - log_sphere_area(bf * nf)),
        DistKind::Gauss => 0.5 * nnf * h * LN_PI,
    };
    core + power
}

/// E det(M†M)^{h/2} for an n×N matrix (n ≥ N) whose columns are N
/// independent points of F_β^n drawn from `dist`: the rectangular moment
/// reduced to a square one in the inner dimension. h = 0 gives exactly 1.
pub fn linear_ratio(dist: DistKind, beta: Beta, n: usize, nn: usize, h: f64) -> Result<f64> {
    if nn < 1 || n < nn {
        return Err(Error::InvalidParameter(format!(
            "need n >= N >= 1, got n={n}, N={nn}"
        )));
    }
    let q_inner = h + beta.f() * (n - nn) as f64;
    if q_inner <= -beta.f() {
        return Err(Error::InvalidParameter(format!(
            "exponent h = {h} out of range for n={n}, N={nn}, beta={beta}"
        )));
    }
    Ok(ln_linear_ratio(dist, beta, n, nn, h).exp())
}

/// Which closed form to use for the spherical affine moment. The two differ
/// in the second Euler-beta argument; only one of them is consistent with
/// direct simulation.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum SphereAffineForm {
    /// βN(n+1)/2 - N in the second beta argument: verified by Monte Carlo.
    #[default]
    Consistent,
    /// βN(n+1)/2 + 1, mirroring the ball case: a legacy variant that fails
    /// simulation by large z-scores. Diagnostic only.
    LegacyPlusOne,
}

/// ln of [2 / (σ(β(n-N)) · B(β(n-N)/2, c))], merged so the Γ(β(n-N)/2)
/// poles cancel analytically: -a·lnπ + lnΓ(a+c) - lnΓ(c) with a = β(n-N)/2.
/// Smooth through n = N, where it is exactly 0.
fn ln_perp_radial_front(a: f64, c: f64) -> f64 {
    -a * LN_PI + ln_gamma(a + c) - ln_gamma(c)
}

fn ln_affine_moment(
    dist: DistKind,
    beta: Beta,
    nn: usize,
    q: f64,
    form: SphereAffineForm,
) -> f64 {
    // A zeroth moment is 1 by the convention 0⁰ = 1. This matters for one
    // ensemble only: two points on the two-point sphere S⁰ (β = 1, N = 1)
    // coincide with probability 1/2, so the closed form tends to 1/2 as
    // q → 0⁺ — the genuine atom at determinant zero — while the moment *at*
    // q = 0 is 1. Everywhere else the limit is 1 and this return just makes
    // it exact.
    if q == 0.0 {
        return 0.0;
    }
    let bf = beta.f();
    let nnf = nn as f64;
    let n = nnf + q / bf;
    let core = ln_sigma_ratio_prod(beta, n, nn);
    let a = 0.5 * bf * (n - nnf); // = q/2
    // power terms are written as g(n) - g(N) for a single g, so q = 0
    // (n == N bitwise) cancels exactly
    match dist {
        DistKind::Ball => {
            let c = 0.5 * bf * nnf * (n + 1.0) + 1.0;
            let g = |x: f64| log_sphere_area(bf * x) - x.ln();
            ln_perp_radial_front(a, c) + core + (nnf + 1.0) * (g(n) - g(nnf))
        }
        DistKind::Sphere => {
            let c = match form {
                SphereAffineForm::Consistent => 0.5 * bf * nnf * (n + 1.0) - nnf,
                SphereAffineForm::LegacyPlusOne => 0.5 * bf * nnf * (n + 1.0) + 1.0,
            };
            ln_perp_radial_front(a, c)
                + core
                + (nnf + 1.0) * (log_sphere_area(bf * n) - log_sphere_area(bf * nnf))
        }
        DistKind::Gauss => 0.5 * q * (nnf + 1.0).ln() + 0.5 * nnf * q * LN_PI + core,
    }
}

/// E |det M̃|^q where M̃ is the N×N difference matrix of N+1 independent
/// points of F_β^N drawn from `dist` (columns 1..N+1 minus column 0).
/// Defined for q ≥ 0; q = 0 gives exactly 1. Uses the simulation-consistent
/// sphere form; see [`affine_moment_with_form`] for the variant.
pub fn affine_moment(dist: DistKind, beta: Beta, nn: usize, q: f64) -> Result<f64> {
    affine_moment_with_form(dist, beta, nn, q, SphereAffineForm::default())
}

/// [`affine_moment`] with an explicit sphere-form selection.
pub fn affine_moment_with_form(
    dist: DistKind,
    beta: Beta,
    nn: usize,
    q: f64,
    form: SphereAffineForm,
) -> Result<f64> {
    if nn < 1 {
        return Err(Error::InvalidParameter(format!("need N >= 1, got {nn}")));
    }
    if q < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "affine moment needs q >= 0, got {q}"
        )));
    }
    Ok(ln_affine_moment(dist, beta, nn, q, form).exp())
}

/// Which closed form to use for rectangular affine moments of the ball and
/// sphere ensembles.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum AffineRatioForm {
    /// Moment ratio times an Euler-beta weight correcting for the coupling
    /// between the in-span and perpendicular parts: verified by Monte Carlo.
    #[default]
    Weighted,
    /// The bare moment ratio, as it circulates in print; correct for the
    /// Gaussian ensemble only. Diagnostic only.
    PlainRatio,
}

fn ln_affine_ratio(dist: DistKind, beta: Beta, n: usize, nn: usize, h: f64) -> f64 {
    let bf = beta.f();
    let (nf, nnf) = (n as f64, nn as f64);
    let q_shift = bf * (nf - nnf);
    let plain = ln_affine_moment(dist, beta, nn, h + q_shift, SphereAffineForm::default())
        - ln_affine_moment(dist, beta, nn, q_shift, SphereAffineForm::default());
    // The Euler-beta weight couples the in-span radial part to the
    // perpendicular directions. With no perpendicular directions (n = N) it
    // is empty, and at h = 0 it is identically 1 — return the bare ratio in
    // both cases rather than evaluating a 0/0 Γ expression.
    if n == nn || h == 0.0 {
        return plain;
    }
    let a = 0.5 * bf * (nf - nnf);
    let c0 = match dist {
        DistKind::Gauss => return plain, // exact as a bare ratio
        DistKind::Ball => 0.5 * bf * nnf * (nf + 1.0) + 1.0,
        DistKind::Sphere => 0.5 * bf * nnf * (nf + 1.0) - nnf,
    };
    // ln of B(a, c0 + N·h/2) / B(a, c0), with the Γ(a) factors cancelled so
    // n = N evaluates smoothly
    let shift = 0.5 * nnf * h;
    let weight =
        ln_gamma(c0 + shift) + ln_gamma(a + c0) - ln_gamma(c0) - ln_gamma(a + c0 + shift);
    plain + weight
}

/// E det(M̃†M̃)^{h/2} where M̃ is the n×N difference matrix of N+1
/// independent points of F_β^n (n ≥ N) drawn from `dist`. h = 0 gives
/// exactly 1. Uses the simulation-consistent weighting; see
/// [`affine_ratio_with_form`] for the bare-ratio variant.
pub fn affine_ratio(dist: DistKind, beta: Beta, n: usize, nn: usize, h: f64) -> Result<f64> {
    affine_ratio_with_form(dist, beta, n, nn, h, AffineRatioForm::default())
}

/// [`affine_ratio`] with an explicit form selection. The form only affects
/// ball and sphere ensembles; the Gaussian value is a bare ratio either way.
pub fn affine_ratio_with_form(
    dist: DistKind,
    beta: Beta,
    n: usize,
    nn: usize,
    h: f64,
    form: AffineRatioForm,
) -> Result<f64> {
    if nn < 1 || n < nn {
        return Err(Error::InvalidParameter(format!(
            "need n >= N >= 1, got n={n}, N={nn}"
        )));
    }
    if h < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "affine ratio needs h >= 0, got {h}"
        )));
    }
    let value = match form {
        AffineRatioForm::Weighted => ln_affine_ratio(dist, beta, n, nn, h),
        AffineRatioForm::PlainRatio => {
            let bf = beta.f();
            let q_shift = bf * (n - nn) as f64;
            ln_affine_moment(dist, beta, nn, h + q_shift, SphereAffineForm::default())
                - ln_affine_moment(dist, beta, nn, q_shift, SphereAffineForm::default())
        }
    };
    Ok(value.exp())
}

/// E ‖x - y‖^h for two independent Gaussian points of F_β^n:
/// 2^{h/2} Γ((βn+h)/2) / Γ(βn/2). Defined for h > -βn.
pub fn pair_distance_moment(beta: Beta, n: usize, h: f64) -> Result<f64> {
    let bn = beta.f() * n as f64;
    if n < 1 || h <= -bn {
        return Err(Error::InvalidParameter(format!(
            "pair distance moment needs n >= 1 and h > -βn, got n={n}, h={h}"
        )));
    }
    Ok((0.5 * h * std::f64::consts::LN_2 + ln_gamma(0.5 * (bn + h)) - ln_gamma(0.5 * bn)).exp())
}

/// Mean β-th absolute determinant power of the difference matrix of N+1
/// uniform points in the unit ball of F_β^N, as a pure Γ-product:
/// the "random simplex content" constant. Agrees with
/// `affine_moment(Ball, β, N, β)` to rounding.
pub fn kingman_q_beta(beta: Beta, nn: usize) -> f64 {
    assert!(nn >= 1);
    let bf = beta.f();
    let nnf = nn as f64;
    let n1 = nnf + 1.0;
    (ln_gamma(0.5 * bf * n1 * n1 + 1.0) + ln_gamma(0.5 * bf * n1)
        - ln_gamma(0.5 * bf)
        - ln_gamma(0.5 * bf * nnf * (nnf + 2.0) + 1.0)
        + n1 * (ln_gamma(0.5 * bf * nnf + 1.0) - ln_gamma(0.5 * bf * n1 + 1.0)))
    .exp()
}

/// Expected simplex volume statistic for N+1 Gaussian points of F_β^N:
/// (N+1)^{β/2} Γ(β(N+1)/2) / (N! Γ(β/2)). Agrees with
/// `affine_moment(Gauss, β, N, β) / N!` to rounding.
pub fn efron_value(beta: Beta, nn: usize) -> f64 {
    assert!(nn >= 1);
    let bf = beta.f();
    let nnf = nn as f64;
    (0.5 * bf * (nnf + 1.0).ln() + ln_gamma(0.5 * bf * (nnf + 1.0))
        - ln_gamma(0.5 * bf)
        - ln_gamma(nnf + 1.0))
    .exp()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Mean k-th intrinsic volume of the Gaussian random simplex in ℝ^N
/// (β = 1, N+1 independent Gaussian points):
/// C(N,k) · κ(N)/(κ(k)κ(N-k)) · π^{k/2} · σ(N-k+1)/σ(N+1), with value 1 at
/// k = 0. Combines the projection-averaging identity for intrinsic volumes
/// with the rectangular Gaussian moment at exponent 1.
pub fn intrinsic_volume_mean(nn: usize, k: usize) -> Result<f64> {
    if k > nn || nn < 1 {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= k <= N with N >= 1, got N={nn}, k={k}"
        )));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let (nf, kf) = (nn as f64, k as f64);
    let flag_mass = ball_volume(nf).ln() - ball_volume(kf).ln() - ball_volume(nf - kf).ln();
    Ok((ln_binomial(nn, k)
        + flag_mass
        + 0.5 * kf * LN_PI
        + log_sphere_area(nf - kf + 1.0)
        - log_sphere_area(nf + 1.0))
    .exp())
}

/// E ln |det M| for an N×N matrix with columns drawn from `dist`: the
/// derivative of the linear moment's log at exponent zero, computed by
/// central differences with one Richardson refinement (step 1e-4).
///
/// For the Gaussian ensemble this equals (1/2) Σ_{j=1..N} ψ(βj/2)
/// analytically; the agreement (to 1e-8) is pinned by tests.
pub fn mean_log_abs_det(dist: DistKind, beta: Beta, nn: usize) -> Result<f64> {
    if nn < 1 {
        return Err(Error::InvalidParameter(format!("need N >= 1, got {nn}")));
    }
    let l = |q: f64| ln_linear_moment(dist, beta, nn, q);
    let d = |h: f64| (l(h) - l(-h)) / (2.0 * h);
    let h = 1e-4;
    Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
}

/// Analytic Gaussian value of [`mean_log_abs_det`]: (1/2) Σ_{j=1..N} ψ(βj/2).
pub fn gauss_mean_log_abs_det(beta: Beta, nn: usize) -> f64 {
    0.5 * (1..=nn)
        .map(|j| digamma(0.5 * beta.f() * j as f64))
        .sum::<f64>()
}

/// β = 1 diagnostic: both sides of a binomial-coefficient restatement of
/// [`kingman_q_beta`]'s N = 1 case, extended to general N by reading the
/// half-integer binomials as Γ ratios. Returns (γ-product side, binomial
/// side). The two agree at N = 1 and drift apart for N ≥ 2 (a factor 2 at
/// N = 2), so the binomial side is *not* usable as ground truth — it is
/// exposed only so the drift can be inspected.
pub fn kingman_binomial_sides(nn: usize) -> (f64, f64) {
    assert!(nn >= 1);
    let nnf = nn as f64;
    // Γ-product side, normalized the way the binomial restatement expects:
    // affine ball moment at q = β = 1 over N! σ(N)
    let lhs = kingman_q_beta(Beta::One, nn)
        / ((ln_gamma(nnf + 1.0) + log_sphere_area(nnf)).exp());
    // binomial side with C(m, m/2) = Γ(m+1)/Γ(m/2+1)²
    let ln_central = |m: f64| ln_gamma(m + 1.0) - 2.0 * ln_gamma(0.5 * m + 1.0);
    let n1 = nnf + 1.0;
    let rhs = (-nnf * std::f64::consts::LN_2 + n1 * ln_central(n1) - ln_central(n1 * n1)).exp();
    (lhs, rhs)
}

/// What a Monte Carlo run should estimate: which point ensemble, which
/// field, which shape, and which determinant-power statistic.
#[derive(Copy, Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMode {
    /// N points through the origin in F_β^N; statistic |det M|^q.
    LinearSquare,
    /// N points in F_β^n, n ≥ N; statistic det(M†M)^{h/2}.
    LinearRect,
    /// N+1 points in F_β^N, first point subtracted; statistic |det M̃|^q.
    AffineSquare,
    /// N+1 points in F_β^n, n ≥ N; statistic det(M̃†M̃)^{h/2}.
    AffineRect,
}

/// A fully specified moment check: ensemble, field, dimensions, exponent.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MomentQuery {
    pub dist: DistKind,
    pub beta: Beta,
    /// Ambient dimension n (equal to `inner_n` in the square modes).
    pub ambient_n: usize,
    /// Matrix width N (the number of difference vectors in affine modes).
    pub inner_n: usize,
    /// q for square modes, h for rectangular modes.
    pub exponent: f64,
    pub mode: MomentMode,
}

impl MomentQuery {
    pub fn new(
        dist: DistKind,
        beta: Beta,
        ambient_n: usize,
        inner_n: usize,
        exponent: f64,
        mode: MomentMode,
    ) -> Result<MomentQuery> {
        let q = MomentQuery {
            dist,
            beta,
            ambient_n,
            inner_n,
            exponent,
            mode,
        };
        match mode {
            MomentMode::LinearSquare | MomentMode::AffineSquare => {
                if ambient_n != inner_n {
                    return Err(Error::InvalidParameter(format!(
                        "square mode needs n == N, got n={ambient_n}, N={inner_n}"
                    )));
                }
            }
            MomentMode::LinearRect | MomentMode::AffineRect => {
                if ambient_n < inner_n {
                    return Err(Error::InvalidParameter(format!(
                        "rectangular mode needs n >= N, got n={ambient_n}, N={inner_n}"
                    )));
                }
            }
        }
        // delegate range checks to the evaluator
        closed_value(&q, EvalForms::default())?;
        Ok(q)
    }

    /// Number of points drawn per sample.
    pub fn points_per_sample(&self) -> usize {
        match self.mode {
            MomentMode::LinearSquare | MomentMode::LinearRect => self.inner_n,
            MomentMode::AffineSquare | MomentMode::AffineRect => self.inner_n + 1,
        }
    }
}

/// Formula-variant selection, one field per toggle-able closed form.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalForms {
    pub sphere_affine: SphereAffineForm,
    pub affine_ratio: AffineRatioForm,
}

/// Closed-form value of a [`MomentQuery`] under the selected formula
/// variants.
pub fn closed_value(query: &MomentQuery, forms: EvalForms) -> Result<f64> {
    match query.mode {
        MomentMode::LinearSquare => {
            linear_moment(query.dist, query.beta, query.inner_n, query.exponent)
        }
        MomentMode::LinearRect => linear_ratio(
            query.dist,
            query.beta,
            query.ambient_n,
            query.inner_n,
            query.exponent,
        ),
        MomentMode::AffineSquare => affine_moment_with_form(
            query.dist,
            query.beta,
            query.inner_n,
            query.exponent,
            forms.sphere_affine,
        ),
        MomentMode::AffineRect => affine_ratio_with_form(
            query.dist,
            query.beta,
            query.ambient_n,
            query.inner_n,
            query.exponent,
            forms.affine_ratio,
        ),
    }
}
