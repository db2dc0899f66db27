//! The invariant measure `mu_B`: its Fourier transform as an infinite
//! product of masks, seeded sampling, and Monte-Carlo estimators.

use crate::ifs::{AffineIfs, Point};
use crate::phase::cis_turns;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

/// Default truncation for the product formula.
pub const DEFAULT_FT_EPS: f64 = 1e-10;

/// Samples are drawn in fixed-size chunks, each from its own ChaCha stream,
/// so results do not depend on how chunks are scheduled.
const CHUNK: usize = 1 << 14;

/// Digit expansions are truncated once the remaining tail is below this.
const SAMPLE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MeasureFt {
    ifs: AffineIfs,
    eps: f64,
}

impl MeasureFt {
    pub fn new(ifs: AffineIfs, eps: f64) -> Self {
        assert!(eps > 0.0, "truncation eps must be positive");
        Self { ifs, eps }
    }

    pub fn ifs(&self) -> &AffineIfs {
        &self.ifs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        mu_hat(&self.ifs, t, self.eps)
    }
}

/// `mu_B^(t) = prod_{k >= 1} m_B(R^{-k} t)`, truncated after the first `K`
/// factors where `2 pi R^{-K} |t| max|B| < eps`.
pub fn mu_hat(ifs: &AffineIfs, t: f64, eps: f64) -> Complex64 {
    if t < 0.0 {
        return mu_hat(ifs, -t, eps).conj();
    }
    let bound = TAU * ifs.max_abs_digit();
    let mut s = t;
    let mut acc = Complex64::new(1.0, 0.0);
    while bound * s >= eps {
        s /= ifs.scale();
        acc *= ifs.mask(s);
        if acc.norm_sqr() == 0.0 {
            break;
        }
    }
    acc
}

/// Number of digits needed for a sample to be within [`SAMPLE_TAIL`] of a
/// point of the attractor.
fn sample_depth(ifs: &AffineIfs) -> usize {
    let (lo, hi) = ifs.hull();
    let diam = (hi - lo).max(f64::MIN_POSITIVE);
    let mut depth = 0;
    let mut width = diam;
    while width >= SAMPLE_TAIL {
        width /= ifs.scale();
        depth += 1;
    }
    depth
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn fill_chunk(ifs: &AffineIfs, seed: u64, stream: u64, len: usize, depth: usize) -> Vec<Point> {
    let mut rng = chunk_rng(seed, stream);
    let n = ifs.len();
    (0..len)
        .map(|_| ifs.point((0..depth).map(|_| rng.random_range(0..n)).collect()))
        .collect()
}

fn chunk_lengths(count: usize) -> Vec<(u64, usize)> {
    (0..count.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(count - c * CHUNK)))
        .collect()
}

/// `count` draws from `mu_B` via uniform random digit expansions.
pub fn sample_measure(ifs: &AffineIfs, count: usize, seed: u64) -> Vec<f64> {
    let depth = sample_depth(ifs);
    let chunks = chunk_lengths(count);
    let per_chunk = |&(stream, len): &(u64, usize)| -> Vec<f64> {
        fill_chunk(ifs, seed, stream, len, depth)
            .into_iter()
            .map(|p| p.x())
            .collect()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        chunks.par_iter().map(per_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<f64>> = chunks.iter().map(per_chunk).collect();
    parts.concat()
}

/// A Monte-Carlo mean with its standard error, `sqrt((Var re + Var im) / n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: Complex64,
    sum_sq: f64,
}

/// Estimate `int f dmu_B` from `count` samples on stream family `seed`.
pub fn monte_carlo<F>(ifs: &AffineIfs, count: usize, seed: u64, f: F) -> McEstimate
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    assert!(count > 0);
    let depth = sample_depth(ifs);
    let chunks = chunk_lengths(count);
    let per_chunk = |&(stream, len): &(u64, usize)| -> Moments {
        let mut m = Moments::default();
        for p in fill_chunk(ifs, seed, stream, len, depth) {
            let v = f(&p);
            m.sum += v;
            m.sum_sq += v.norm_sqr();
        }
        m
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Moments> = {
        use rayon::prelude::*;
        chunks.par_iter().map(per_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Moments> = chunks.iter().map(per_chunk).collect();

    let total = parts.iter().fold(Moments::default(), |a, b| Moments {
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
    });
    let n = count as f64;
    let mean = total.sum / n;
    let var = (total.sum_sq / n - mean.norm_sqr()).max(0.0);
    McEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        samples: count,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceEntry {
    pub t: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
    pub three_sigma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub pass: bool,
    pub samples: usize,
    pub entries: Vec<InvarianceEntry>,
}

impl InvarianceReport {
    pub fn max_gap(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.gap))
    }
}

/// Statistical check of `int f dmu = int (1/N) sum_{r(w) = z} f(w) dmu(z)`
/// for `f = e_t`, with the two sides estimated from independent streams.
pub fn check_strong_invariance(
    ifs: &AffineIfs,
    freqs: &[f64],
    samples: usize,
    seed: u64,
) -> InvarianceReport {
    let n = ifs.len() as f64;
    // the right-hand side uses a disjoint block of streams
    let rhs_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let entries: Vec<InvarianceEntry> = freqs
        .iter()
        .map(|&t| {
            let lhs = monte_carlo(ifs, samples, seed, |p| cis_turns(t * p.x()));
            let rhs = monte_carlo(ifs, samples, rhs_seed, |p| {
                (0..ifs.len())
                    .map(|b| cis_turns(t * ifs.tau(b, p.x())))
                    .sum::<Complex64>()
                    / n
            });
            let sigma = (lhs.std_error.powi(2) + rhs.std_error.powi(2)).sqrt();
            InvarianceEntry {
                t,
                lhs: lhs.value,
                rhs: rhs.value,
                gap: (lhs.value - rhs.value).norm(),
                three_sigma: 3.0 * sigma,
            }
        })
        .collect();
    InvarianceReport {
        pass: entries.iter().all(|e| e.gap <= e.three_sigma),
        samples,
        entries,
    }
}
