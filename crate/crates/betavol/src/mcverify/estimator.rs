//! Monte Carlo estimation of determinant-power statistics, built from the
//! samplers and the Gram–Schmidt factorization alone.
//!
//! This module deliberately knows nothing about exact formulas: it draws
//! point sets, forms the statistic, and accumulates running moments. Keeping
//! it ignorant of the values it is supposed to reproduce is what makes a
//! match between the two routes evidence rather than tautology; a source
//! scan in the verification layer's tests enforces the separation.

use crate::betalinalg::{difference_matrix, gram_schmidt_qr, FMatrix};
use crate::numfield::Beta;
use crate::samplers::{point_set, DistKind, RngStream};
use serde::{Deserialize, Serialize};

/// What to estimate: ensemble, field, dimensions, determinant power, and
/// whether the points are taken through the origin or as differences from a
/// base point.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StatSpec {
    pub dist: DistKind,
    pub beta: Beta,
    /// Ambient dimension n; the matrix is n×N with N = `inner_n`.
    pub ambient_n: usize,
    pub inner_n: usize,
    /// Power of det(M†M)^{1/2}; for square matrices this is |det M|.
    pub exponent: f64,
    /// Draw N+1 points and difference them against the first instead of
    /// using N points directly as columns.
    pub affine: bool,
}

impl StatSpec {
    /// One draw of the statistic det(M†M)^{exponent/2}, evaluated as
    /// exp(exponent × Σ ln t_ii) from the Gram–Schmidt triangle — the
    /// diagonal product *is* det(M†M)^{1/2}, with no ambient-dimension
    /// dependence in the arithmetic cost beyond the projections.
    ///
    /// A rank-deficient draw (probability zero for continuous ensembles;
    /// probability 1/2 for the two-point sphere in one dimension, where the
    /// points can coincide) contributes 0 for a positive exponent.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let count = if self.affine {
            self.inner_n + 1
        } else {
            self.inner_n
        };
        let pts = point_set(rng, self.dist, self.beta, self.ambient_n, count);
        let m = if self.affine {
            difference_matrix(&pts)
        } else {
            pts
        };
        statistic_from_matrix(&m, self.exponent)
    }
}

/// det(M†M)^{exponent/2} via the Gram–Schmidt diagonal. Rank-deficient
/// matrices give 0 (for a negative exponent that would be a genuine
/// divergence; the caller's tail diagnostics surface it as a degenerate
/// draw rather than poisoning the mean with an infinity).
pub fn statistic_from_matrix(m: &FMatrix, exponent: f64) -> f64 {
    match gram_schmidt_qr(m) {
        Ok(qr) => {
            let log_det: f64 = (0..m.cols()).map(|i| qr.t.get(i, i).re().ln()).sum();
            (exponent * log_det).exp()
        }
        Err(_) => 0.0,
    }
}

/// Running mean/variance accumulator (Welford), mergeable across workers.
#[derive(Copy, Clone, Debug, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
    max_sample: f64,
    degenerate: u64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        if x.abs() > self.max_sample {
            self.max_sample = x.abs();
        }
        if x == 0.0 {
            self.degenerate += 1;
        }
    }

    /// Count-weighted merge of two accumulators (Chan's parallel update).
    pub fn merge(&self, other: &Welford) -> Welford {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        let count = self.count + other.count;
        Welford {
            count,
            mean: self.mean + delta * nb / (na + nb),
            m2: self.m2 + other.m2 + delta * delta * na * nb / (na + nb),
            max_sample: self.max_sample.max(other.max_sample),
            degenerate: self.degenerate + other.degenerate,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count as f64 - 1.0) / self.count as f64).sqrt()
    }

    pub fn max_sample(&self) -> f64 {
        self.max_sample
    }

    pub fn degenerate(&self) -> u64 {
        self.degenerate
    }
}

/// A Monte Carlo estimate with everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub count: u64,
    pub seed: u64,
    /// The generator stream ids that produced the samples, one per worker.
    pub streams: Vec<u64>,
}

/// Tail diagnostics for heavy-tailed statistics: when one draw carries a
/// visible share of the whole sum, the central limit estimate of the
/// standard error is not trustworthy yet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub max_sample: f64,
    /// Largest single-sample share of the total sum (0 when the mean is 0).
    pub max_share: f64,
    /// Draws whose statistic was exactly 0 (rank-deficient configurations).
    pub degenerate: u64,
}

/// Splits `samples` across `workers` sequential partitions, worker i on
/// stream `stream_base + i`, and merges count-weighted. The result is
/// deterministic in (seed, stream_base, workers); changing the partition
/// count changes which draws happen but not the distribution.
pub fn estimate_moment_detailed(
    spec: &StatSpec,
    samples: u64,
    seed: u64,
    stream_base: u64,
    workers: usize,
) -> (Estimate, TailReport) {
    estimate_custom(|rng| spec.sample(rng), samples, seed, stream_base, workers)
}

/// [`estimate_moment_detailed`] without the tail report.
pub fn estimate_moment(
    spec: &StatSpec,
    samples: u64,
    seed: u64,
    stream_base: u64,
    workers: usize,
) -> Estimate {
    estimate_moment_detailed(spec, samples, seed, stream_base, workers).0
}

/// Estimates the mean of an arbitrary per-draw statistic under the same
/// partitioning discipline as [`estimate_moment`].
pub fn estimate_custom<F>(
    mut draw: F,
    samples: u64,
    seed: u64,
    stream_base: u64,
    workers: usize,
) -> (Estimate, TailReport)
where
    F: FnMut(&mut RngStream) -> f64,
{
    let workers = workers.max(1).min(samples.max(1) as usize);
    let mut acc = Welford::default();
    let mut streams = Vec::with_capacity(workers);
    for w in 0..workers {
        let stream = stream_base + w as u64;
        streams.push(stream);
        let mut rng = RngStream::new(seed, stream);
        let share = samples / workers as u64 + u64::from((w as u64) < samples % workers as u64);
        let mut local = Welford::default();
        for _ in 0..share {
            local.push(draw(&mut rng));
        }
        acc = acc.merge(&local);
    }
    let total = acc.mean() * acc.count() as f64;
    let tail = TailReport {
        max_sample: acc.max_sample(),
        max_share: if total > 0.0 {
            acc.max_sample() / total
        } else {
            0.0
        },
        degenerate: acc.degenerate(),
    };
    (
        Estimate {
            mean: acc.mean(),
            stderr: acc.stderr(),
            count: acc.count(),
            seed,
            streams,
        },
        tail,
    )
}
