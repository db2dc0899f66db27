//! Orthonormality and completeness diagnostics.
//!
//! Inner products of piecewise exponentials are exact up to the truncation of
//! the product formula: on a cylinder `C_w = tau_w X_B` of depth `n`,
//! `int_{C_w} e_f dmu_B = N^{-n} e^{2 pi i f t_w} mu_B^(R^{-n} f)`.

use crate::basis::{PiecewiseExp, StepWalsh};
use crate::error::{Error, Result};
use crate::ifs::{index_to_word, AffineIfs, CylinderWord};
use crate::measure::{monte_carlo, mu_hat, McEstimate};
use crate::phase::cis_turns;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Default Gram tolerance; truncation errors accumulate over cylinders.
pub const GRAM_TOL: f64 = 1e-6;
pub const TRANSFER_POINTS: usize = 2048;

/// `t_w` for every word of length `depth`, in cell order.
fn translates(ifs: &AffineIfs, depth: usize) -> Vec<f64> {
    let n = ifs.len();
    (0..n.pow(depth as u32))
        .map(|idx| ifs.cylinder_data(&CylinderWord(index_to_word(idx, n, depth))).0)
        .collect()
}

fn inner_at_depth(ifs: &AffineIfs, p: &PiecewiseExp, q: &PiecewiseExp, depth: usize, t: &[f64], eps: f64) -> Complex64 {
    let (p, q) = (p.refine(depth), q.refine(depth));
    let mass = (ifs.len() as f64).powi(-(depth as i32));
    let contraction = ifs.scale().powi(-(depth as i32));
    p.cells()
        .iter()
        .zip(q.cells())
        .zip(t)
        .map(|((a, b), &tw)| {
            let df = a.freq - b.freq;
            a.coef * b.coef.conj() * cis_turns(df * tw) * mu_hat(ifs, contraction * df, eps)
        })
        .sum::<Complex64>()
        * mass
}

/// `<p, q> = int p conj(q) dmu_B`. Swapping the arguments conjugates the
/// result exactly.
pub fn inner_product(ifs: &AffineIfs, p: &PiecewiseExp, q: &PiecewiseExp, eps: f64) -> Result<Complex64> {
    p.check_system(ifs)?;
    q.check_system(ifs)?;
    let depth = p.depth().max(q.depth());
    Ok(inner_at_depth(ifs, p, q, depth, &translates(ifs, depth), eps))
}

/// Monte-Carlo estimate of `<p, q>`, for cross-checking the product formula.
pub fn monte_carlo_inner_product(ifs: &AffineIfs, p: &PiecewiseExp, q: &PiecewiseExp, samples: usize, seed: u64) -> Result<McEstimate> {
    p.check_system(ifs)?;
    q.check_system(ifs)?;
    Ok(monte_carlo(ifs, samples, seed, |x| p.eval_point(ifs, x) * q.eval_point(ifs, x).conj()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramMethod {
    ProductFormula,
    MonteCarlo,
    /// Exact sums over a step-function grid.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub size: usize,
    pub max_off_diagonal: f64,
    pub max_diagonal_defect: f64,
    pub tol: f64,
    pub method: GramMethod,
    pub pass: bool,
}

impl GramReport {
    pub fn from_matrix(gram: &DMatrix<Complex64>, tol: f64, method: GramMethod) -> Self {
        let mut off: f64 = 0.0;
        let mut diag: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                if i == j {
                    diag = diag.max((gram[(i, j)] - 1.0).norm());
                } else {
                    off = off.max(gram[(i, j)].norm());
                }
            }
        }
        Self {
            size: gram.nrows(),
            max_off_diagonal: off,
            max_diagonal_defect: diag,
            tol,
            method,
            pass: off <= tol && diag <= tol,
        }
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_off_diagonal.max(self.max_diagonal_defect)
    }
}

/// All inner products `<e_i, e_j>`; the lower triangle is the conjugate of the upper.
pub fn gram_entries(ifs: &AffineIfs, elements: &[PiecewiseExp], eps: f64) -> Result<DMatrix<Complex64>> {
    for e in elements {
        e.check_system(ifs)?;
    }
    let k = elements.len();
    let depth = elements.iter().map(PiecewiseExp::depth).max().unwrap_or(0);
    let t = translates(ifs, depth);
    let refined: Vec<PiecewiseExp> = elements.iter().map(|e| e.refine(depth)).collect();
    let row = |i: usize| -> Vec<Complex64> {
        (i..k)
            .map(|j| inner_at_depth(ifs, &refined[i], &refined[j], depth, &t, eps))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let upper: Vec<Vec<Complex64>> = {
        use rayon::prelude::*;
        (0..k).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let upper: Vec<Vec<Complex64>> = (0..k).map(row).collect();

    let mut gram = DMatrix::zeros(k, k);
    for (i, r) in upper.iter().enumerate() {
        for (offset, v) in r.iter().enumerate() {
            gram[(i, i + offset)] = *v;
            gram[(i + offset, i)] = v.conj();
        }
    }
    Ok(gram)
}

pub fn gram_matrix(ifs: &AffineIfs, elements: &[PiecewiseExp], eps: f64, tol: f64) -> Result<GramReport> {
    if elements.is_empty() {
        return Err(Error::InvalidArgument("empty element list".into()));
    }
    Ok(GramReport::from_matrix(&gram_entries(ifs, elements, eps)?, tol, GramMethod::ProductFormula))
}

/// Gram matrix of step functions under Lebesgue measure on `[0, 1]`.
pub fn walsh_gram(elements: &[StepWalsh], tol: f64) -> GramReport {
    let k = elements.len();
    let gram = DMatrix::from_fn(k, k, |i, j| elements[i].inner(&elements[j]));
    GramReport::from_matrix(&gram, tol, GramMethod::Grid)
}

/// `sum_e |<e_{-t}, e>|^2` over the given (orthonormal) elements. By Bessel's
/// inequality this never exceeds 1 beyond truncation error, and equals 1 for
/// every `t` exactly when the full family is complete.
pub fn parseval_h(ifs: &AffineIfs, elements: &[PiecewiseExp], t: f64, eps: f64) -> Result<f64> {
    Ok(parseval_terms(ifs, elements, t, eps)?.iter().sum())
}

fn parseval_terms(ifs: &AffineIfs, elements: &[PiecewiseExp], t: f64, eps: f64) -> Result<Vec<f64>> {
    for e in elements {
        e.check_system(ifs)?;
    }
    let probe = PiecewiseExp::exponential(ifs.len(), Complex64::new(1.0, 0.0), -t);
    let depth = elements.iter().map(PiecewiseExp::depth).max().unwrap_or(0);
    let tw = translates(ifs, depth);
    let term = |e: &PiecewiseExp| inner_at_depth(ifs, &probe, e, depth.max(e.depth()), &tw, eps).norm_sqr();
    #[cfg(feature = "parallel")]
    let terms = {
        use rayon::prelude::*;
        elements.par_iter().map(term).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let terms = elements.iter().map(term).collect();
    Ok(terms)
}

/// One point of a completeness curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalPoint {
    /// Maximum word length included.
    pub max_len: usize,
    pub elements: usize,
    pub h: f64,
}

/// `parseval_h` restricted to elements generated by words of length at most
/// `K`, for every `K` up to the longest word present. Elements without
/// provenance count as length 0.
pub fn parseval_curve(ifs: &AffineIfs, elements: &[PiecewiseExp], t: f64, eps: f64) -> Result<Vec<ParsevalPoint>> {
    let terms = parseval_terms(ifs, elements, t, eps)?;
    let lens: Vec<usize> = elements
        .iter()
        .map(|e| e.provenance().map_or(0, |p| p.word.len()))
        .collect();
    let longest = lens.iter().copied().max().unwrap_or(0);
    Ok((0..=longest)
        .map(|k| {
            let (count, h) = lens
                .iter()
                .zip(&terms)
                .filter(|(len, _)| **len <= k)
                .fold((0, 0.0), |(c, s), (_, v)| (c + 1, s + v));
            ParsevalPoint {
                max_len: k,
                elements: count,
                h,
            }
        })
        .collect())
}

/// Nonnegative function values on a uniform grid of `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferGrid {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl TransferGrid {
    /// A grid over the candidate interval of `L` widened by 5% on each side
    /// (half a unit when the interval is a single point).
    pub fn covering(spectrum: &[f64], scale: f64, points: usize, h: impl Fn(f64) -> f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument("a transfer grid needs at least two points".into()));
        }
        let (lo, hi) = crate::cycles::candidate_interval(spectrum, scale);
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        let mut grid = Self {
            a: lo - pad,
            b: hi + pad,
            values: vec![0.0; points],
        };
        let ts: Vec<f64> = grid.points().collect();
        for (v, t) in grid.values.iter_mut().zip(ts) {
            *v = h(t);
        }
        if let Some(bad) = grid.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("grid value {bad} is not finite and nonnegative")));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.values.len()).map(move |i| self.a + i as f64 * h)
    }

    /// Piecewise-linear interpolation; `None` outside `[a, b]`.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (left, frac) = self.locate(t)?;
        Some(self.lerp(left, frac))
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let slack = 1e-12 * (self.b - self.a).max(1.0);
        if !(t >= self.a - slack && t <= self.b + slack) {
            return None;
        }
        let u = ((t - self.a) / self.step()).clamp(0.0, (self.values.len() - 1) as f64);
        let left = (u.floor() as usize).min(self.values.len() - 2);
        Some((left, u - left as f64))
    }

    fn lerp(&self, left: usize, frac: f64) -> f64 {
        self.values[left] * (1.0 - frac) + self.values[left + 1] * frac
    }

    /// `sup |h - c|`.
    pub fn distance_to_constant(&self, c: f64) -> f64 {
        self.values.iter().map(|v| (v - c).abs()).fold(0.0, f64::max)
    }
}

/// `R^iters h0` for `Rh(t) = sum_l |m_B((t + l) / R)|^2 h((t + l) / R)`.
pub fn transfer_iterate(ifs: &AffineIfs, spectrum: &[f64], h0: &TransferGrid, iters: usize) -> Result<TransferGrid> {
    Ok(transfer_trajectory(ifs, spectrum, h0, iters)?.pop().unwrap_or_else(|| h0.clone()))
}

/// All iterates `R h0, ..., R^iters h0`.
pub fn transfer_trajectory(ifs: &AffineIfs, spectrum: &[f64], h0: &TransferGrid, iters: usize) -> Result<Vec<TransferGrid>> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    // per grid point and letter: (left index, fraction, weight)
    let mut stencil = Vec::with_capacity(h0.len() * spectrum.len());
    for t in h0.points() {
        for &l in spectrum {
            let g = (t + l) / ifs.scale();
            let (left, frac) = h0.locate(g).ok_or(Error::GridTooCoarse { t: g })?;
            stencil.push((left, frac, ifs.mask(g).norm_sqr()));
        }
    }
    let k = spectrum.len();
    let step = |h: &TransferGrid| -> TransferGrid {
        let apply = |i: usize| -> f64 {
            stencil[i * k..(i + 1) * k]
                .iter()
                .map(|&(left, frac, w)| w * h.lerp(left, frac))
                .sum()
        };
        #[cfg(feature = "parallel")]
        let values = {
            use rayon::prelude::*;
            (0..h.len()).into_par_iter().map(apply).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let values = (0..h.len()).map(apply).collect();
        TransferGrid {
            a: h.a,
            b: h.b,
            values,
        }
    };
    let mut out: Vec<TransferGrid> = Vec::with_capacity(iters);
    let mut h = h0.clone();
    for _ in 0..iters {
        h = step(&h);
        out.push(h.clone());
    }
    Ok(out)
}
