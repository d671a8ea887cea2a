//! Seeded matrix and point-set samplers.
//!
//! Randomness comes from [`RngStream`], a ChaCha8 generator addressed by a
//! `(seed, stream_id)` pair. ChaCha is counter-based with a 64-bit stream
//! field, so distinct stream ids yield disjoint keystreams from the same
//! seed — that is what makes partitioned sample budgets and "independent
//! streams for independent estimators" reproducible: the same pair always
//! replays the same draws, bit for bit, on any platform.
//!
//! Gaussian matrices put an independent N(0, 1/2) variate on every real
//! component, for every β — the normalization under which the Gaussian
//! density is π^{-βnN/2} e^{-tr M†M} with this crate's trace convention.

use crate::betalinalg::{gram_schmidt_qr, psd_sqrt, FMatrix, HermPSD};
use crate::numfield::{Beta, QuatScalar};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::str::FromStr;

/// A reproducible random stream: ChaCha8 keyed by `seed`, positioned on the
/// 64-bit stream `stream_id`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream with the same seed at `stream_id + offset` (wrapping):
    /// the unit of budget partitioning.
    pub fn offset(&self, offset: u64) -> RngStream {
        RngStream::new(self.seed, self.stream_id.wrapping_add(offset))
    }

    /// Standard normal N(0, 1).
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Gaussian matrix component: N(0, 1/2).
    pub fn gaussian_component(&mut self) -> f64 {
        self.standard_normal() * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Point distributions the moment formulas are stated for.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    /// Uniform on the unit ball of F_β^n.
    Ball,
    /// Uniform on the unit sphere of F_β^n.
    Sphere,
    /// Independent N(0, 1/2) on every real component.
    Gauss,
}

impl DistKind {
    pub const ALL: [DistKind; 3] = [DistKind::Ball, DistKind::Sphere, DistKind::Gauss];
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistKind::Ball => "ball",
            DistKind::Sphere => "sphere",
            DistKind::Gauss => "gauss",
        };
        write!(f, "{s}")
    }
}

impl FromStr for DistKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ball" => Ok(DistKind::Ball),
            "sphere" => Ok(DistKind::Sphere),
            "gauss" | "gaussian" => Ok(DistKind::Gauss),
            other => Err(format!("unknown distribution '{other}' (ball|sphere|gauss)")),
        }
    }
}

fn gaussian_entry(rng: &mut RngStream, beta: Beta) -> QuatScalar {
    match beta {
        Beta::One => QuatScalar::from_real(rng.gaussian_component()),
        Beta::Two => QuatScalar::from_complex(Complex64::new(
            rng.gaussian_component(),
            rng.gaussian_component(),
        )),
        Beta::Four => QuatScalar::new(
            Complex64::new(rng.gaussian_component(), rng.gaussian_component()),
            Complex64::new(rng.gaussian_component(), rng.gaussian_component()),
        ),
    }
}

/// n×N matrix with all βnN real components independent N(0, 1/2).
pub fn gaussian_matrix(rng: &mut RngStream, beta: Beta, n: usize, nn: usize) -> FMatrix {
    FMatrix::from_fn(beta, n, nn, |_, _| gaussian_entry(rng, beta))
}

/// `count` points uniform on the unit sphere of F_β^n, one per column:
/// normalized Gaussian vectors.
pub fn sphere_points(rng: &mut RngStream, beta: Beta, n: usize, count: usize) -> FMatrix {
    let mut m = FMatrix::zeros(beta, n, count);
    if beta == Beta::One && n == 1 {
        // the unit sphere of ℝ¹ is the two-point set {±1}; emit it exactly
        // (dividing by the norm instead leaves values 1 ulp off ±1, and
        // coincidences — which have probability 1/2 here — would no longer
        // cancel to an exact zero downstream)
        for c in 0..count {
            let sign = 1.0_f64.copysign(rng.standard_normal());
            m.set(0, c, QuatScalar::from_real(sign));
        }
        return m;
    }
    for c in 0..count {
        loop {
            for r in 0..n {
                m.set(r, c, gaussian_entry(rng, beta));
            }
            let norm = m.col_norm(c);
            if norm > 0.0 {
                let inv = 1.0 / norm;
                for r in 0..n {
                    m.set(r, c, m.get(r, c).scale(inv));
                }
                break;
            }
        }
    }
    m
}

/// `count` points uniform in the unit ball of F_β^n: uniform direction times
/// radius U^{1/(βn)}, the inverse-CDF of the uniform-ball radius in
/// dimension βn.
pub fn ball_points(rng: &mut RngStream, beta: Beta, n: usize, count: usize) -> FMatrix {
    let mut m = sphere_points(rng, beta, n, count);
    let dim = (beta.value() * n) as f64;
    for c in 0..count {
        let r = rng.uniform().powf(1.0 / dim);
        for row in 0..n {
            m.set(row, c, m.get(row, c).scale(r));
        }
    }
    m
}

/// Draws a point set per `dist`, one point per column (n×count).
pub fn point_set(
    rng: &mut RngStream,
    dist: DistKind,
    beta: Beta,
    n: usize,
    count: usize,
) -> FMatrix {
    match dist {
        DistKind::Ball => ball_points(rng, beta, n, count),
        DistKind::Sphere => sphere_points(rng, beta, n, count),
        DistKind::Gauss => gaussian_matrix(rng, beta, n, count),
    }
}

/// Haar-distributed n×N frame with orthonormal columns: Gaussian matrix
/// through Gram–Schmidt. The triangle's strictly positive real diagonal is
/// exactly the sign/phase convention that makes the Q factor Haar rather
/// than merely orthonormal. (Rank deficiency of the Gaussian draw has
/// probability zero; it is handled by redrawing.)
pub fn haar_stiefel(rng: &mut RngStream, beta: Beta, n: usize, nn: usize) -> FMatrix {
    loop {
        let g = gaussian_matrix(rng, beta, n, nn);
        if let Ok(qr) = gram_schmidt_qr(&g) {
            return qr.q;
        }
    }
}

/// N×N draw from the ensemble induced by an n×N Gaussian source:
/// K = U · (M†M)^{1/2} with U an independent Haar N×N unitary. K preserves
/// the source's Gram matrix, so |det K| equals det(M†M)^{1/2} draw for draw.
pub fn induced_matrix(rng: &mut RngStream, beta: Beta, n: usize, nn: usize) -> FMatrix {
    loop {
        let src = gaussian_matrix(rng, beta, n, nn);
        let Ok(w) = HermPSD::new(src.gram()) else {
            continue;
        };
        let Ok(h) = psd_sqrt(&w) else { continue };
        let u = haar_stiefel(rng, beta, nn, nn);
        return u.matmul(h.matrix());
    }
}

/// Runs a length-`steps` product of independent N×N Gaussian factors using
/// the QR recursion: carry an orthonormal frame, hit it with the next
/// factor, re-factorize, and accumulate Σ log t_ii of every step's triangle.
/// Returns that accumulated sum, whose value divided by `steps` estimates
/// the sum of the ensemble's Lyapunov exponents. The product matrix itself
/// is never formed, so the chain cannot overflow.
pub fn product_chain(rng: &mut RngStream, beta: Beta, nn: usize, steps: usize) -> f64 {
    let mut frame = FMatrix::identity(beta, nn);
    let mut acc = 0.0;
    let mut done = 0;
    while done < steps {
        let step = gaussian_matrix(rng, beta, nn, nn);
        let b = step.matmul(&frame);
        match gram_schmidt_qr(&b) {
            Ok(qr) => {
                for i in 0..nn {
                    acc += qr.t.get(i, i).re().ln();
                }
                frame = qr.q;
                done += 1;
            }
            // measure-zero event: drop the step and redraw
            Err(_) => continue,
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betalinalg::abs_det_beta;
    use approx::assert_relative_eq;

    #[test]
    fn identical_seed_and_stream_replay_bit_exactly() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
        let ma = gaussian_matrix(&mut a, Beta::Four, 3, 2);
        let mb = gaussian_matrix(&mut b, Beta::Four, 3, 2);
        assert_eq!(ma.max_abs_diff(&mb), 0.0);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let n = 100_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut first_differs = false;
        for i in 0..n {
            let x = a.standard_normal();
            let y = b.standard_normal();
            if i == 0 {
                first_differs = x != y;
            }
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        assert!(first_differs, "streams 0 and 1 emitted the same first draw");
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let vx = sxx / nf - (sx / nf).powi(2);
        let vy = syy / nf - (sy / nf).powi(2);
        let rho = cov / (vx * vy).sqrt();
        assert!(rho.abs() < 0.01, "cross-stream correlation {rho:.4}");
    }

    #[test]
    fn gaussian_trace_moment_matches_for_every_beta() {
        for beta in Beta::ALL {
            let mut rng = RngStream::new(7, 30 + beta.value() as u64);
            let draws = 100_000;
            let (n, nn) = (2, 2);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..draws {
                let t = gaussian_matrix(&mut rng, beta, n, nn).trace_gram();
                sum += t;
                sumsq += t * t;
            }
            let mean = sum / draws as f64;
            let var = sumsq / draws as f64 - mean * mean;
            let se = (var / draws as f64).sqrt();
            let expected = beta.f() * (n * nn) as f64 / 2.0;
            assert!(
                (mean - expected).abs() <= 4.0 * se,
                "beta {beta}: mean {mean:.5} vs {expected} (se {se:.2e})"
            );
        }
    }

    #[test]
    fn ball_radius_law_and_moment() {
        for (beta, n) in [(Beta::One, 1), (Beta::One, 3), (Beta::Two, 2), (Beta::Four, 1)] {
            let mut rng = RngStream::new(11, 5 + n as u64 + beta.value() as u64);
            let draws = 100_000;
            let dim = (beta.value() * n) as f64;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut transformed: Vec<f64> = Vec::with_capacity(draws);
            for _ in 0..draws {
                let p = ball_points(&mut rng, beta, n, 1);
                let r2: f64 = (0..n).map(|r| p.get(r, 0).norm_sq()).sum();
                sum += r2;
                sumsq += r2 * r2;
                // ‖m‖^{βn} of a uniform ball point is uniform on [0, 1]
                transformed.push(r2.sqrt().powf(dim));
            }
            let mean = sum / draws as f64;
            let var = sumsq / draws as f64 - mean * mean;
            let se = (var / draws as f64).sqrt();
            let expected = dim / (dim + 2.0);
            assert!(
                (mean - expected).abs() <= 4.0 * se,
                "beta {beta} n {n}: E r^2 = {mean:.5} vs {expected:.5}"
            );

            transformed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut ks = 0.0_f64;
            for (i, u) in transformed.iter().enumerate() {
                let hi = (i + 1) as f64 / draws as f64;
                let lo = i as f64 / draws as f64;
                ks = ks.max((hi - u).abs()).max((u - lo).abs());
            }
            // 0.1% critical value of the Kolmogorov distribution: a wrong
            // radius exponent lands an order of magnitude above this
            let crit = 1.9495 / (draws as f64).sqrt();
            assert!(ks <= crit, "beta {beta} n {n}: KS {ks:.5} > {crit:.5}");
        }
    }

    #[test]
    fn sphere_points_have_unit_norm_and_degenerate_case_is_signs() {
        let mut rng = RngStream::new(3, 1);
        let pts = sphere_points(&mut rng, Beta::Four, 3, 50);
        for c in 0..50 {
            assert_relative_eq!(pts.col_norm(c), 1.0, max_relative = 1e-12);
        }
        // βn = 1: the unit sphere of R is {-1, +1}
        let zero_sphere = sphere_points(&mut rng, Beta::One, 1, 200);
        let mut seen_pos = false;
        let mut seen_neg = false;
        for c in 0..200 {
            let v = zero_sphere.get(0, c).re();
            assert!((v.abs() - 1.0).abs() < 1e-15);
            seen_pos |= v > 0.0;
            seen_neg |= v < 0.0;
        }
        assert!(seen_pos && seen_neg);
    }

    #[test]
    fn haar_frames_are_orthonormal_with_uniform_entry_mass() {
        for beta in Beta::ALL {
            let mut rng = RngStream::new(19, beta.value() as u64);
            let (n, nn) = (3, 2);
            let draws = 20_000;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..draws {
                let f = haar_stiefel(&mut rng, beta, n, nn);
                let g = f.gram();
                let id = FMatrix::identity(beta, nn);
                assert!(g.max_abs_diff(&id) < 1e-10);
                let e = f.get(0, 0).norm_sq();
                sum += e;
                sumsq += e * e;
            }
            let mean = sum / draws as f64;
            let var = sumsq / draws as f64 - mean * mean;
            let se = (var / draws as f64).sqrt();
            assert!(
                (mean - 1.0 / n as f64).abs() <= 4.0 * se,
                "beta {beta}: E|q_00|^2 = {mean:.5} vs {:.5}",
                1.0 / n as f64
            );
        }
    }

    #[test]
    fn haar_distribution_is_invariant_under_fixed_rotations() {
        // first-row mass of Q·F and F must agree in mean and second moment
        let beta = Beta::Two;
        let (n, nn) = (3, 2);
        let q_fixed = haar_stiefel(&mut RngStream::new(555, 0), beta, n, n);
        let draws = 50_000;

        let run = |stream: u64, rotate: bool| -> (f64, f64, f64) {
            let mut rng = RngStream::new(20, stream);
            let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
            for _ in 0..draws {
                let f = haar_stiefel(&mut rng, beta, n, nn);
                let g = if rotate { q_fixed.matmul(&f) } else { f };
                let mass: f64 = (0..nn).map(|c| g.get(0, c).norm_sq()).sum();
                s1 += mass;
                s2 += mass * mass;
                s4 += mass * mass * mass * mass;
            }
            let nf = draws as f64;
            (s1 / nf, s2 / nf, s4 / nf)
        };

        let (m1a, m2a, _m4a) = run(1, false);
        let (m1b, m2b, _m4b) = run(2, true);
        let nf = draws as f64;
        let se1 = ((m2a - m1a * m1a) / nf + (m2b - m1b * m1b) / nf).sqrt();
        assert!(
            (m1a - m1b).abs() <= 4.0 * se1,
            "first moment differs: {m1a:.5} vs {m1b:.5} (se {se1:.2e})"
        );
        // crude but sufficient pooled error for the second moment
        let run_var =
            |m2: f64, m4: f64| ((m4 - m2 * m2) / nf).max(0.0);
        let se2 = (run_var(m2a, _m4a) + run_var(m2b, _m4b)).sqrt();
        assert!(
            (m2a - m2b).abs() <= 4.0 * se2,
            "second moment differs: {m2a:.5} vs {m2b:.5} (se {se2:.2e})"
        );
    }

    #[test]
    fn induced_matrix_preserves_determinant_magnitude() {
        for beta in Beta::ALL {
            let mut sample_rng = RngStream::new(31, beta.value() as u64);
            let mut induced_rng = RngStream::new(31, beta.value() as u64);
            for _ in 0..20 {
                // same stream: the induced draw consumes its source first
                let src = gaussian_matrix(&mut sample_rng, beta, 2, 2);
                let k = induced_matrix(&mut induced_rng, beta, 2, 2);
                assert_eq!((k.rows(), k.cols()), (2, 2));
                assert_relative_eq!(
                    abs_det_beta(&k),
                    abs_det_beta(&src),
                    max_relative = 1e-9
                );
                // realign the witness stream: induced also consumed a Haar draw
                let _ = haar_stiefel(&mut sample_rng, beta, 2, 2);
            }
        }
    }

    #[test]
    fn one_step_chain_is_the_log_determinant_of_its_factor() {
        for beta in Beta::ALL {
            let mut a = RngStream::new(77, 4);
            let mut b = RngStream::new(77, 4);
            let acc = product_chain(&mut a, beta, 2, 1);
            let m = gaussian_matrix(&mut b, beta, 2, 2);
            assert_relative_eq!(acc, abs_det_beta(&m).ln(), max_relative = 1e-10);
        }
    }
}
