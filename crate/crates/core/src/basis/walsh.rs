//! Generalized Walsh bases on `[0, 1]`.
//!
//! For a unitary `A` with constant first row `1/sqrt N`, the step filters
//! `m_i = sqrt N sum_j a_ij chi_[j/N, (j+1)/N)` form a QMF basis for
//! `r(x) = N x mod 1`, and `S_w 1` runs over an orthonormal basis of step
//! functions. On the `N^n` grid with `k = N^{n-1} j_0 + ... + j_{n-1}`,
//! `S_{i_0 ... i_{n-1}} 1 = sqrt(N^n) a_{i_0 j_0} ... a_{i_{n-1} j_{n-1}}`.

use crate::error::{Error, Result};
use crate::filters::{Evaluable, Filter, QmfBasis, UnitaryMatrix};
use crate::ifs::{AffineIfs, Point};
use num_complex::Complex64;

pub fn walsh_filters(a: &UnitaryMatrix) -> Result<QmfBasis> {
    if !a.first_row_constant() {
        return Err(Error::FirstRowNotConstant);
    }
    let n = a.dim();
    let sqrt_n = (n as f64).sqrt();
    let filters = (0..n)
        .map(|i| Filter::Step((0..n).map(|j| a.entries()[(i, j)] * sqrt_n).collect()))
        .collect();
    QmfBasis::new(&AffineIfs::unit_interval(n), filters)
}

/// `S_w 1` on the `k`-th interval `[k / N^n, (k + 1) / N^n)`, by the product formula.
pub fn walsh_value(a: &UnitaryMatrix, word: &[usize], k: usize) -> Result<Complex64> {
    let n = a.dim();
    let len = word.len();
    let cells = n.pow(len as u32);
    if k >= cells {
        return Err(Error::IndexOutOfRange { index: k, bound: cells });
    }
    if let Some(&bad) = word.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, bound: n });
    }
    let digits = crate::ifs::index_to_word(k, n, len);
    let product: Complex64 = word
        .iter()
        .zip(&digits)
        .map(|(&i, &j)| a.entries()[(i, j)])
        .product();
    Ok(product * (cells as f64).sqrt())
}

/// A step function on the `N^n` equal subintervals of `[0, 1]` (more
/// generally, on the depth-`n` cylinders of any `N`-map system).
#[derive(Debug, Clone, PartialEq)]
pub struct StepWalsh {
    n: usize,
    base: usize,
    values: Vec<Complex64>,
    word: Vec<usize>,
}

impl StepWalsh {
    pub fn constant(base: usize) -> Self {
        Self {
            n: 0,
            base,
            values: vec![Complex64::new(1.0, 0.0)],
            word: vec![],
        }
    }

    pub fn from_values(base: usize, values: Vec<Complex64>) -> Result<Self> {
        let mut n = 0;
        let mut cells = 1;
        while cells < values.len() {
            cells *= base;
            n += 1;
        }
        if cells != values.len() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                base,
            });
        }
        Ok(Self {
            n,
            base,
            values,
            word: vec![],
        })
    }

    /// Subdivision exponent: the function is constant on `N^n` intervals.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// The generating word `i_0 ... i_{n-1}` (outermost operator first).
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    /// `S_i g = m_i * (g o r)`.
    pub fn apply_isometry(&self, a: &UnitaryMatrix, i: usize) -> StepWalsh {
        let sqrt_n = (self.base as f64).sqrt();
        let filter: Vec<Complex64> = (0..self.base).map(|j| a.entries()[(i, j)] * sqrt_n).collect();
        self.apply_step_filter(&filter, i)
    }

    /// `m * (g o r)` for a filter `m` constant on first-level cylinders.
    pub(crate) fn apply_step_filter(&self, filter: &[Complex64], letter: usize) -> StepWalsh {
        let mut values = Vec::with_capacity(self.values.len() * self.base);
        for m in filter {
            values.extend(self.values.iter().map(|v| m * v));
        }
        let mut word = Vec::with_capacity(self.word.len() + 1);
        word.push(letter);
        word.extend_from_slice(&self.word);
        StepWalsh {
            n: self.n + 1,
            base: self.base,
            values,
            word,
        }
    }

    /// `z -> (1/N) sum_j conj(m(tau_j z)) g(tau_j z)` for a first-level step filter `m`.
    pub(crate) fn apply_step_adjoint(&self, filter: &[Complex64]) -> StepWalsh {
        let g = if self.n == 0 { self.refine(1) } else { self.clone() };
        let block = g.values.len() / g.base;
        let values = (0..block)
            .map(|k| {
                filter
                    .iter()
                    .enumerate()
                    .map(|(j, m)| m.conj() * g.values[j * block + k])
                    .sum::<Complex64>()
                    / g.base as f64
            })
            .collect();
        StepWalsh {
            n: g.n - 1,
            base: g.base,
            values,
            word: vec![],
        }
    }

    pub fn refine(&self, n: usize) -> StepWalsh {
        assert!(n >= self.n);
        let repeat = self.base.pow((n - self.n) as u32);
        StepWalsh {
            n,
            base: self.base,
            values: self
                .values
                .iter()
                .flat_map(|v| std::iter::repeat_n(*v, repeat))
                .collect(),
            word: self.word.clone(),
        }
    }

    /// Coarsest subdivision representing the same function.
    pub fn compress(mut self, tol: f64) -> StepWalsh {
        let b = self.base;
        while self.n > 0
            && self
                .values
                .chunks(b)
                .all(|c| c.iter().all(|v| (v - c[0]).norm() <= tol))
        {
            self.values = self.values.chunks(b).map(|c| c[0]).collect();
            self.n -= 1;
        }
        self
    }

    /// `int_0^1 f conj(g) dx`.
    pub fn inner(&self, other: &StepWalsh) -> Complex64 {
        let n = self.n.max(other.n);
        let (a, b) = (self.refine(n), other.refine(n));
        let sum: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum();
        sum / a.values.len() as f64
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let cells = self.values.len();
        let k = ((x * cells as f64).floor() as isize).clamp(0, cells as isize - 1) as usize;
        self.values[k]
    }
}

impl Evaluable for StepWalsh {
    fn value(&self, ifs: &AffineIfs, p: &Point) -> Complex64 {
        self.values[p.cylinder_index(self.n, self.base, ifs.zero_digit())]
    }
}

/// All `S_w 1` with `|w| <= max_len`, duplicates removed (`S_0 1 = 1`, so
/// trailing zeros collapse). Exactly `N^max_len` functions, ordered by word
/// length and then by the letters of the word.
pub fn gen_walsh_basis(a: &UnitaryMatrix, max_len: usize) -> Result<Vec<StepWalsh>> {
    if !a.first_row_constant() {
        return Err(Error::FirstRowNotConstant);
    }
    let n = a.dim();
    let mut out = vec![StepWalsh::constant(n)];
    let mut layer = out.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for g in &layer {
            for i in 0..n {
                // S_0 1 = 1, so only words whose last letter is nonzero are new
                if i == 0 && g.word.is_empty() {
                    continue;
                }
                next.push(g.apply_isometry(a, i));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

fn check_signal_length(len: usize, base: usize) -> Result<usize> {
    let mut cells = 1;
    let mut n = 0;
    while cells < len {
        cells *= base;
        n += 1;
    }
    if cells != len || len == 0 {
        return Err(Error::LengthMismatch { got: len, base });
    }
    Ok(n)
}

/// Apply `M` along every base-`N` digit axis of `data` (length `N^n`).
fn tensor_apply(data: &mut [Complex64], base: usize, m: impl Fn(usize, usize) -> Complex64) {
    let len = data.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); base];
    let mut stride = 1;
    while stride < len {
        let block = stride * base;
        for start in (0..len).step_by(block) {
            for offset in 0..stride {
                for (out, s) in scratch.iter_mut().enumerate() {
                    *s = (0..base).map(|inp| m(out, inp) * data[start + offset + inp * stride]).sum();
                }
                for (d, s) in scratch.iter().enumerate() {
                    data[start + offset + d * stride] = *s;
                }
            }
        }
        stride = block;
    }
}

/// Coefficients `c_w = <s, S_w 1>` of a signal sampled on the `N^n` grid, for
/// all words of length `n` (index `i_0 N^{n-1} + ... + i_{n-1}`). Runs in
/// `O(n N^{n+1})`.
pub fn walsh_analyze(a: &UnitaryMatrix, signal: &[Complex64]) -> Result<Vec<Complex64>> {
    let base = a.dim();
    let n = check_signal_length(signal.len(), base)?;
    let mut out = signal.to_vec();
    tensor_apply(&mut out, base, |i, j| a.entries()[(i, j)].conj());
    let scale = (signal.len() as f64).sqrt().recip();
    debug_assert_eq!(base.pow(n as u32), signal.len());
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Inverse of [`walsh_analyze`]: `s = sum_w c_w S_w 1`.
pub fn walsh_synthesize(a: &UnitaryMatrix, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let base = a.dim();
    check_signal_length(coeffs.len(), base)?;
    let mut out = coeffs.to_vec();
    tensor_apply(&mut out, base, |j, i| a.entries()[(i, j)]);
    let scale = (coeffs.len() as f64).sqrt();
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{is_qmf_basis, DEFAULT_GRID};
    use nalgebra::DMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_by_two_filters_are_rademacher() {
        let basis = walsh_filters(&UnitaryMatrix::hadamard2()).unwrap();
        let ifs = AffineIfs::unit_interval(2);
        let grid = ifs.grid(8);
        let m1: Vec<_> = grid.iter().map(|p| basis.filters()[1].value(&ifs, p)).collect();
        let expect: Vec<_> = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0].map(c).to_vec();
        for (a, b) in m1.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(grid.iter().all(|p| (basis.filters()[0].value(&ifs, p) - 1.0).norm() < 1e-15));
    }

    #[test]
    fn rejects_non_constant_first_row() {
        let a = UnitaryMatrix::identity(2);
        assert_eq!(walsh_filters(&a).unwrap_err(), Error::FirstRowNotConstant);
        assert_eq!(gen_walsh_basis(&a, 2).unwrap_err(), Error::FirstRowNotConstant);
    }

    #[test]
    fn example_matrix_filters_are_qmf_basis() {
        let basis = walsh_filters(&UnitaryMatrix::walsh_example4()).unwrap();
        let ifs = AffineIfs::unit_interval(4);
        assert!(is_qmf_basis(&ifs, basis.filters(), &ifs.grid(DEFAULT_GRID), 1e-12).unwrap().pass);
    }

    #[test]
    fn walsh_value_examples() {
        let a = UnitaryMatrix::walsh_example4();
        for k in 0..16 {
            assert!((walsh_value(&a, &[0, 0], k).unwrap() - 1.0).norm() < 1e-15);
        }
        assert!(walsh_value(&a, &[1, 2], 5).unwrap().norm() < 1e-15);
        let h = UnitaryMatrix::hadamard2();
        assert!((walsh_value(&h, &[1], 0).unwrap() - 1.0).norm() < 1e-15);
        assert!((walsh_value(&h, &[1], 1).unwrap() + 1.0).norm() < 1e-15);
        assert_eq!(
            walsh_value(&h, &[1], 2),
            Err(Error::IndexOutOfRange { index: 2, bound: 2 })
        );
        assert!(walsh_value(&h, &[2], 0).is_err());
    }

    #[test]
    fn basis_sizes() {
        let a = UnitaryMatrix::walsh_example4();
        assert_eq!(gen_walsh_basis(&a, 0).unwrap().len(), 1);
        assert_eq!(gen_walsh_basis(&a, 2).unwrap().len(), 16);
        assert_eq!(gen_walsh_basis(&UnitaryMatrix::hadamard2(), 3).unwrap().len(), 8);
        assert_eq!(gen_walsh_basis(&UnitaryMatrix::fourier(3), 3).unwrap().len(), 27);
    }

    #[test]
    fn operator_route_matches_product_formula() {
        let a = UnitaryMatrix::random_walsh(3, 11);
        for g in gen_walsh_basis(&a, 3).unwrap() {
            for (k, v) in g.values().iter().enumerate() {
                let direct = walsh_value(&a, g.word(), k).unwrap();
                assert!((v - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn analyze_matches_naive_sum() {
        let a = UnitaryMatrix::walsh_example4();
        let signal: Vec<Complex64> = (0..16).map(|k| Complex64::new((k as f64).sin(), 0.1 * k as f64)).collect();
        let coeffs = walsh_analyze(&a, &signal).unwrap();
        for (w, coeff) in coeffs.iter().enumerate() {
            let word = crate::ifs::index_to_word(w, 4, 2);
            let naive: Complex64 = (0..16)
                .map(|k| signal[k] * walsh_value(&a, &word, k).unwrap().conj())
                .sum::<Complex64>()
                / 16.0;
            assert!((coeff - naive).norm() < 1e-13);
        }
        let back = walsh_synthesize(&a, &coeffs).unwrap();
        for (x, y) in back.iter().zip(&signal) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn transform_of_constant_and_basis_element() {
        let a = UnitaryMatrix::hadamard2();
        let coeffs = walsh_analyze(&a, &[c(1.0); 8]).unwrap();
        assert!((coeffs[0] - 1.0).norm() < 1e-15);
        assert!(coeffs[1..].iter().all(|v| v.norm() < 1e-15));
        let word = [1, 0, 1];
        let signal: Vec<_> = (0..8).map(|k| walsh_value(&a, &word, k).unwrap()).collect();
        let coeffs = walsh_analyze(&a, &signal).unwrap();
        for (w, v) in coeffs.iter().enumerate() {
            let target = if w == 0b101 { 1.0 } else { 0.0 };
            assert!((v - target).norm() < 1e-14);
        }
        assert!(walsh_analyze(&a, &[c(1.0); 6]).is_err());
    }

    #[test]
    fn gram_is_identity() {
        let a = UnitaryMatrix::walsh_example4();
        let basis = gen_walsh_basis(&a, 2).unwrap();
        let gram = DMatrix::from_fn(basis.len(), basis.len(), |i, j| basis[i].inner(&basis[j]));
        assert!((gram - DMatrix::identity(16, 16)).map(|c| c.norm()).max() < 1e-12);
    }
}
