//! One-dimensional affine iterated function systems `tau_b(x) = (x + b) / R`.
//!
//! Points of the attractor are carried by their digit addresses: a [`Point`]
//! stores a finite prefix of digit indices (the tail is the digit whose value
//! is 0) together with its real coordinate. On addresses the `N`-to-1 map `r`
//! is an exact left shift and `tau_b` an exact prepend, so operators built on
//! `r` never have to resolve branches at cylinder boundaries.

use crate::error::{Error, Result};
use crate::phase::cis_turns;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Resolution used for attractor membership and branch resolution.
pub const BRANCH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IfsSpec", into = "IfsSpec")]
pub struct AffineIfs {
    scale: f64,
    digits: Vec<f64>,
    zero: usize,
    // digit indices sorted by digit value, for lowest-digit tie-breaking
    order: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IfsSpec {
    #[serde(rename = "R")]
    scale: f64,
    #[serde(rename = "B")]
    digits: Vec<f64>,
}

impl TryFrom<IfsSpec> for AffineIfs {
    type Error = Error;

    fn try_from(spec: IfsSpec) -> Result<Self> {
        AffineIfs::new(spec.scale, spec.digits)
    }
}

impl From<AffineIfs> for IfsSpec {
    fn from(ifs: AffineIfs) -> Self {
        IfsSpec {
            scale: ifs.scale,
            digits: ifs.digits,
        }
    }
}

impl AffineIfs {
    pub fn new(scale: f64, digits: Vec<f64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 1.0) {
            return Err(Error::InvalidIfs(format!("scale must exceed 1, got {scale}")));
        }
        if digits.len() < 2 {
            return Err(Error::InvalidIfs("need at least two digits".into()));
        }
        if digits.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidIfs("digits must be finite".into()));
        }
        let zero = digits
            .iter()
            .position(|&b| b == 0.0)
            .ok_or_else(|| Error::InvalidIfs("0 must be a digit".into()))?;
        let mut order: Vec<usize> = (0..digits.len()).collect();
        order.sort_by(|&i, &j| digits[i].total_cmp(&digits[j]));
        if order.windows(2).any(|w| digits[w[0]] == digits[w[1]]) {
            return Err(Error::InvalidIfs("digits must be distinct".into()));
        }
        Ok(Self {
            scale,
            digits,
            zero,
            order,
        })
    }

    /// `[0, 1]` as the attractor of `x -> (x + j) / n`, `j = 0..n`.
    pub fn unit_interval(n: usize) -> Self {
        Self::new(n as f64, (0..n).map(|j| j as f64).collect()).expect("n >= 2")
    }

    /// The middle-third Cantor system, `R = 3`, `B = {0, 2}`.
    pub fn cantor() -> Self {
        Self::new(3.0, vec![0.0, 2.0]).unwrap()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn digits(&self) -> &[f64] {
        &self.digits
    }

    /// Number of maps `N`.
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the digit 0.
    pub fn zero_digit(&self) -> usize {
        self.zero
    }

    pub fn max_abs_digit(&self) -> f64 {
        self.digits.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    /// True when `B = {0, ..., N-1}` (in this order) and `R = N`.
    pub fn is_unit_interval(&self) -> bool {
        self.scale == self.len() as f64
            && self.digits.iter().enumerate().all(|(j, &b)| b == j as f64)
    }

    pub fn tau(&self, digit: usize, x: f64) -> f64 {
        (x + self.digits[digit]) / self.scale
    }

    /// Convex hull `[min B / (R - 1), max B / (R - 1)]` of the attractor.
    pub fn hull(&self) -> (f64, f64) {
        let lo = self.digits[self.order[0]];
        let hi = self.digits[*self.order.last().unwrap()];
        (lo / (self.scale - 1.0), hi / (self.scale - 1.0))
    }

    /// `ceil(log_R(1 / BRANCH_EPS))`.
    pub fn resolution_depth(&self) -> usize {
        ((1.0 / BRANCH_EPS).ln() / self.scale.ln()).ceil() as usize
    }

    /// Digit address of `x` to [`resolution_depth`](Self::resolution_depth),
    /// preferring the smaller digit whenever two cylinders both contain `x`.
    pub fn locate(&self, x: f64) -> Result<Vec<usize>> {
        let depth = self.resolution_depth();
        let mut address = Vec::with_capacity(depth);
        if self.descend(x, depth, BRANCH_EPS, &mut address) {
            Ok(address)
        } else {
            Err(Error::OutsideAttractor { x })
        }
    }

    fn descend(&self, x: f64, remaining: usize, tol: f64, address: &mut Vec<usize>) -> bool {
        let (lo, hi) = self.hull();
        if x < lo - tol || x > hi + tol {
            return false;
        }
        if remaining == 0 {
            return true;
        }
        for &d in &self.order {
            let y = self.scale * x - self.digits[d];
            address.push(d);
            if self.descend(y, remaining - 1, tol * self.scale, address) {
                return true;
            }
            address.pop();
        }
        false
    }

    /// The `N`-to-1 map `r(x) = R x - b` on the cylinder `tau_b(X_B)` holding `x`.
    pub fn r_map(&self, x: f64) -> Result<f64> {
        let address = self.locate(x)?;
        Ok(self.scale * x - self.digits[address[0]])
    }

    /// `sum_k R^{-k} b_k` for a finite digit-index prefix.
    pub fn attractor_point(&self, digits: &[usize]) -> f64 {
        digits
            .iter()
            .rev()
            .fold(0.0, |acc, &d| (acc + self.digits[d]) / self.scale)
    }

    /// Translate `t_w` (so `tau_w(x) = R^{-n} x + t_w`) and `mu_B` mass of a cylinder.
    pub fn cylinder_data(&self, word: &CylinderWord) -> (f64, f64) {
        let translate = self.attractor_point(&word.0);
        let mass = (self.len() as f64).powi(-(word.len() as i32));
        (translate, mass)
    }

    /// `m_B(x) = (1/N) sum_b exp(2 pi i b x)`.
    pub fn mask(&self, x: f64) -> Complex64 {
        let sum: Complex64 = self.digits.iter().map(|&b| cis_turns(b * x)).sum();
        sum / self.len() as f64
    }

    pub fn point(&self, digits: Vec<usize>) -> Point {
        debug_assert!(digits.iter().all(|&d| d < self.len()));
        let x = self.attractor_point(&digits);
        Point { digits, x }
    }

    /// The point with address resolved from a real coordinate.
    pub fn point_at(&self, x: f64) -> Result<Point> {
        let digits = self.locate(x)?;
        Ok(Point { digits, x })
    }

    /// `r` on addresses: drop the leading digit.
    pub fn shift(&self, p: &Point) -> Point {
        if p.digits.is_empty() {
            // the zero tail is fixed by r
            return p.clone();
        }
        self.point(p.digits[1..].to_vec())
    }

    /// `tau_digit` on addresses: prepend a digit.
    pub fn prepend(&self, digit: usize, p: &Point) -> Point {
        let mut digits = Vec::with_capacity(p.digits.len() + 1);
        digits.push(digit);
        digits.extend_from_slice(&p.digits);
        Point {
            digits,
            x: self.tau(digit, p.x),
        }
    }

    /// Verification grid: `count` left endpoints of cylinders at the smallest
    /// depth `d` with `N^d >= count`, evenly spaced in address order.
    pub fn grid(&self, count: usize) -> Vec<Point> {
        let n = self.len();
        let count = count.max(1);
        let mut depth = 0u32;
        let mut cells = 1usize;
        while cells < count {
            depth += 1;
            cells *= n;
        }
        (0..count)
            .map(|i| {
                let idx = (i as u128 * cells as u128 / count as u128) as usize;
                self.point(index_to_word(idx, n, depth as usize))
            })
            .collect()
    }
}

/// Digits of `idx` in base `n`, most significant first, padded to `len`.
pub fn index_to_word(mut idx: usize, n: usize, len: usize) -> Vec<usize> {
    let mut word = vec![0; len];
    for slot in word.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    word
}

/// A point of the attractor given by a finite digit-index prefix; the
/// remaining digits are all the zero digit.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    digits: Vec<usize>,
    x: f64,
}

impl Point {
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// The `k`-th digit index (0-based), with `zero` filling the tail.
    pub fn digit(&self, k: usize, zero: usize) -> usize {
        self.digits.get(k).copied().unwrap_or(zero)
    }

    /// Index of the depth-`depth` cylinder containing the point, first digit
    /// most significant.
    pub fn cylinder_index(&self, depth: usize, n: usize, zero: usize) -> usize {
        (0..depth).fold(0, |acc, k| acc * n + self.digit(k, zero))
    }
}

/// A finite word of digit indices naming the cylinder `tau_{b_1} ... tau_{b_n} X_B`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CylinderWord(pub Vec<usize>);

impl CylinderWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
