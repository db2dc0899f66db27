//! Extreme cycle points of the contractions `g_l(t) = (t + l) / R`.
//!
//! A cycle `c_0 -> c_1 -> ... -> c_{p-1} -> c_0` with `c_{k+1} = (c_k + l_k) / R`
//! is extreme when `|m_B(c_k)| = 1` at every point. Cycles are enumerated
//! exhaustively over Lyndon words in the letters of `L`: every primitive
//! periodic letter sequence has exactly one Lyndon rotation, so each cycle is
//! visited once and reported from its canonical rotation.

use crate::error::{Error, Result};
use crate::filters::is_spectrum;
use crate::ifs::AffineIfs;
use serde::Serialize;

pub const DEFAULT_P_MAX: usize = 12;
pub const DEFAULT_CYCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremeCycle {
    pub points: Vec<f64>,
    pub letters: Vec<f64>,
    /// Letter indices into `L`; the lexicographically least rotation.
    #[serde(skip)]
    pub letter_indices: Vec<usize>,
    pub period: usize,
}

/// `[min L / (R - 1), max L / (R - 1)]`, mapped into itself by every `g_l`.
pub fn candidate_interval(spectrum: &[f64], scale: f64) -> (f64, f64) {
    assert!(scale > 1.0);
    let lo = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo / (scale - 1.0), hi / (scale - 1.0))
}

/// Fixed point of `g_{l_{p-1}} o ... o g_{l_0}`:
/// `c_0 = (sum_j l_j R^j) / (R^p - 1)`.
pub fn cycle_fixed_point(letters: &[f64], scale: f64) -> f64 {
    assert!(!letters.is_empty());
    let numerator: f64 = letters
        .iter()
        .rev()
        .fold(0.0, |acc, &l| acc * scale + l);
    numerator / (scale.powi(letters.len() as i32) - 1.0)
}

/// All Lyndon words of length `1..=max_len` over `0..k`, in lexicographic
/// order (Duval's algorithm).
fn lyndon_words(k: usize, max_len: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut w: Vec<usize> = Vec::with_capacity(max_len);
    let mut started = false;
    std::iter::from_fn(move || {
        if k == 0 || max_len == 0 {
            return None;
        }
        if !started {
            started = true;
            w.push(0);
            return Some(w.clone());
        }
        let m = w.len();
        while w.len() < max_len {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == k - 1 {
                w.pop();
            } else {
                break;
            }
        }
        let last = w.last_mut()?;
        *last += 1;
        Some(w.clone())
    })
}

/// Orbit `c_0, ..., c_{p-1}` starting from the fixed point of the word.
fn orbit(letters: &[f64], scale: f64) -> Vec<f64> {
    let mut c = cycle_fixed_point(letters, scale);
    letters
        .iter()
        .map(|&l| {
            let here = c;
            c = (c + l) / scale;
            here
        })
        .collect()
}

pub fn find_extreme_cycles(ifs: &AffineIfs, spectrum: &[f64], p_max: usize, tol: f64) -> Result<Vec<ExtremeCycle>> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let check = is_spectrum(ifs.digits(), ifs.scale(), spectrum)?;
    if !check.pass {
        return Err(Error::NotASpectrum {
            defect: check.defect,
        });
    }
    let scale = ifs.scale();
    let mut cycles = Vec::new();
    for word in lyndon_words(spectrum.len(), p_max) {
        let letters: Vec<f64> = word.iter().map(|&i| spectrum[i]).collect();
        let points = orbit(&letters, scale);
        if points.iter().all(|&c| ifs.mask(c).norm() >= 1.0 - tol) {
            cycles.push(ExtremeCycle {
                period: points.len(),
                points,
                letters,
                letter_indices: word,
            });
        }
    }
    Ok(cycles)
}
