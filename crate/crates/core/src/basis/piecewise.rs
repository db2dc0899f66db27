use crate::error::{Error, Result};
use crate::ifs::{AffineIfs, Point};
use crate::phase::cis_turns;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;

/// Relative tolerance for structural equality of cells.
pub const CELL_TOL: f64 = 1e-12;

/// `coef * exp(2 pi i freq x)` on one cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub coef: Complex64,
    pub freq: f64,
}

impl Cell {
    fn approx_eq(&self, other: &Cell) -> bool {
        let dc = (self.coef - other.coef).norm();
        let df = (self.freq - other.freq).abs();
        dc <= CELL_TOL * self.coef.norm().max(1.0) && df <= CELL_TOL * self.freq.abs().max(1.0)
    }
}

/// How a basis element was generated: `S_{l_1} ... S_{l_n} e_{-c}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    /// Letter indices into `L`, outermost operator first.
    pub word: Vec<usize>,
    /// The letter values `l_1, ..., l_n`.
    pub letters: Vec<f64>,
    pub cycle_point: f64,
}

/// A function equal to `coef_w * exp(2 pi i freq_w x)` on every cylinder
/// `tau_w X_B` of a fixed depth.
///
/// Cells are indexed by the cylinder word read as a base-`N` number with the
/// first digit most significant, matching [`Point::cylinder_index`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseExp {
    depth: usize,
    branches: usize,
    cells: Vec<Cell>,
    provenance: Option<Provenance>,
}

impl PiecewiseExp {
    /// `coef * e_freq` on the whole attractor of an `N`-map system.
    pub fn exponential(branches: usize, coef: Complex64, freq: f64) -> Self {
        Self {
            depth: 0,
            branches,
            cells: vec![Cell { coef, freq }],
            provenance: None,
        }
    }

    pub fn from_cells(branches: usize, depth: usize, cells: Vec<Cell>) -> Result<Self> {
        let expected = branches.pow(depth as u32);
        if cells.len() != expected {
            return Err(Error::WrongArity {
                expected,
                got: cells.len(),
            });
        }
        Ok(Self {
            depth,
            branches,
            cells,
            provenance: None,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Depth-0 data when the function is a single exponential.
    pub fn as_exponential(&self) -> Option<Cell> {
        (self.depth == 0).then(|| self.cells[0])
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.cells.iter().all(|c| (c.coef.norm() - 1.0).abs() <= tol)
    }

    pub(crate) fn check_system(&self, ifs: &AffineIfs) -> Result<()> {
        if self.branches == ifs.len() {
            Ok(())
        } else {
            Err(Error::MixedSystems)
        }
    }

    pub fn eval_point(&self, ifs: &AffineIfs, p: &Point) -> Complex64 {
        let idx = p.cylinder_index(self.depth, self.branches, ifs.zero_digit());
        let cell = &self.cells[idx];
        cell.coef * cis_turns(cell.freq * p.x())
    }

    /// Evaluate at a real coordinate, resolving its cylinder first.
    pub fn eval(&self, ifs: &AffineIfs, x: f64) -> Result<Complex64> {
        self.check_system(ifs)?;
        let p = ifs.point_at(x)?;
        Ok(self.eval_point(ifs, &p))
    }

    /// The same function written on cylinders of a greater depth.
    pub fn refine(&self, depth: usize) -> PiecewiseExp {
        assert!(depth >= self.depth);
        let repeat = self.branches.pow((depth - self.depth) as u32);
        let cells = self
            .cells
            .iter()
            .flat_map(|c| std::iter::repeat_n(*c, repeat))
            .collect();
        PiecewiseExp {
            depth,
            branches: self.branches,
            cells,
            provenance: self.provenance.clone(),
        }
    }

    /// Merge sibling cylinders carrying identical data, as far as possible.
    pub fn compress(mut self) -> Self {
        let n = self.branches;
        while self.depth > 0
            && self
                .cells
                .chunks(n)
                .all(|sib| sib.iter().all(|c| c.approx_eq(&sib[0])))
        {
            self.cells = self.cells.chunks(n).map(|sib| sib[0]).collect();
            self.depth -= 1;
        }
        self
    }

    /// Structural equality after compression.
    pub fn same_function(&self, other: &PiecewiseExp) -> bool {
        let a = self.clone().compress();
        let b = other.clone().compress();
        a.branches == b.branches
            && a.depth == b.depth
            && a.cells.iter().zip(&b.cells).all(|(x, y)| x.approx_eq(y))
    }

    /// `S_l p = e_l * (p o r)` for the exponential filter `e_l`. The result
    /// lives one cylinder level deeper before compression.
    pub fn apply_isometry(&self, ifs: &AffineIfs, letter: f64) -> PiecewiseExp {
        let n = self.branches;
        let mut cells = Vec::with_capacity(self.cells.len() * n);
        for &b in ifs.digits() {
            for c in &self.cells {
                cells.push(Cell {
                    coef: c.coef * cis_turns(-c.freq * b),
                    freq: letter + ifs.scale() * c.freq,
                });
            }
        }
        PiecewiseExp {
            depth: self.depth + 1,
            branches: n,
            cells,
            provenance: None,
        }
        .compress()
    }

    /// `S_l^* p`, returned as a sum of piecewise exponentials (one per branch
    /// unless the branches share frequencies, in which case they are merged).
    pub fn apply_adjoint(&self, ifs: &AffineIfs, letter: f64) -> Vec<PiecewiseExp> {
        let base = if self.depth == 0 {
            self.refine(1)
        } else {
            self.clone()
        };
        let n = base.branches;
        let inner = base.cells.len() / n;
        let norm = 1.0 / n as f64;
        let terms: Vec<PiecewiseExp> = ifs
            .digits()
            .iter()
            .enumerate()
            .map(|(bi, &b)| {
                let cells = base.cells[bi * inner..(bi + 1) * inner]
                    .iter()
                    .map(|c| {
                        let shifted = (c.freq - letter) / ifs.scale();
                        Cell {
                            coef: c.coef * cis_turns(shifted * b) * norm,
                            freq: shifted,
                        }
                    })
                    .collect();
                PiecewiseExp {
                    depth: base.depth - 1,
                    branches: n,
                    cells,
                    provenance: None,
                }
            })
            .collect();

        let mergeable = terms.iter().all(|t| {
            t.cells
                .iter()
                .zip(&terms[0].cells)
                .all(|(a, b)| (a.freq - b.freq).abs() <= CELL_TOL * a.freq.abs().max(1.0))
        });
        if mergeable {
            let mut merged = terms[0].clone();
            for t in &terms[1..] {
                for (m, c) in merged.cells.iter_mut().zip(&t.cells) {
                    m.coef += c.coef;
                }
            }
            vec![merged.compress()]
        } else {
            terms.into_iter().map(PiecewiseExp::compress).collect()
        }
    }

    /// Coarse hash key; equal functions always share it unless a value sits
    /// on a quantization boundary.
    pub(crate) fn bucket_key(&self) -> Vec<i64> {
        const Q: f64 = 1e-9;
        let quant = |v: f64| (v / Q).round() as i64;
        let mut key = Vec::with_capacity(2 + 3 * self.cells.len());
        key.push(self.depth as i64);
        key.push(self.branches as i64);
        for c in &self.cells {
            key.extend([quant(c.coef.re), quant(c.coef.im), quant(c.freq)]);
        }
        key
    }
}

/// Deduplicating collection of compressed piecewise exponentials.
#[derive(Default)]
pub(crate) struct DedupSet {
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl DedupSet {
    /// Returns `true` if `item` is new; `pool` holds previously inserted items
    /// and `index` is where `item` will be stored.
    pub fn insert(&mut self, item: &PiecewiseExp, pool: &[PiecewiseExp], index: usize) -> bool {
        let bucket = self.buckets.entry(item.bucket_key()).or_default();
        if bucket.iter().any(|&i| pool[i].same_function(item)) {
            return false;
        }
        bucket.push(index);
        true
    }
}

/// The phase `alpha(b, l, c)` of `S_{l_1} ... S_{l_n} e_{-c}` on the cylinder
/// `tau_{b_1} ... tau_{b_n} X_B`, in turns:
///
/// `alpha = -[b_1 l_2 + (R b_1 + b_2) l_3 + ... + (R^{n-2} b_1 + ... + b_{n-1}) l_n]
///          + (R^{n-1} b_1 + ... + b_n) c`.
///
/// The coefficient on that cylinder is `exp(2 pi i alpha)`.
pub fn closed_form_alpha(b_word: &[f64], l_word: &[f64], c: f64, scale: f64) -> f64 {
    assert_eq!(b_word.len(), l_word.len(), "word lengths differ");
    let mut alpha = 0.0;
    // running value of R^{k-2} b_1 + ... + b_{k-1}
    let mut prefix = 0.0;
    for k in 1..l_word.len() {
        prefix = scale * prefix + b_word[k - 1];
        alpha -= prefix * l_word[k];
    }
    let full = b_word.iter().fold(0.0, |acc, &b| scale * acc + b);
    alpha + full * c
}

/// The frequency `l_1 + R l_2 + ... + R^{n-1} l_n - R^n c` shared by every
/// cylinder of `S_{l_1} ... S_{l_n} e_{-c}`.
pub fn closed_form_frequency(l_word: &[f64], c: f64, scale: f64) -> f64 {
    let mut freq = -c;
    for &l in l_word.iter().rev() {
        freq = l + scale * freq;
    }
    freq
}

impl PiecewiseExp {
    /// `S_{l_1} ... S_{l_n} e_{-c}` assembled cylinder by cylinder from
    /// [`closed_form_alpha`] and [`closed_form_frequency`], uncompressed.
    pub fn from_closed_form(ifs: &AffineIfs, l_word: &[f64], c: f64) -> PiecewiseExp {
        let n = ifs.len();
        let depth = l_word.len();
        let freq = closed_form_frequency(l_word, c, ifs.scale());
        let cells = (0..n.pow(depth as u32))
            .map(|idx| {
                let b_word: Vec<f64> = crate::ifs::index_to_word(idx, n, depth)
                    .into_iter()
                    .map(|d| ifs.digits()[d])
                    .collect();
                Cell {
                    coef: cis_turns(closed_form_alpha(&b_word, l_word, c, ifs.scale())),
                    freq,
                }
            })
            .collect();
        PiecewiseExp {
            depth,
            branches: n,
            cells,
            provenance: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(closed_form_alpha(&[2.0], &[0.75], 0.5, 3.0), 1.0);
        assert_eq!(closed_form_alpha(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 0.0, 3.0), 0.0);
        let alpha = closed_form_alpha(&[2.0, 0.0], &[0.75, 0.75], 0.0, 3.0);
        assert_eq!(alpha, -1.5);
        assert!((cis_turns(alpha) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn s_zero_fixes_the_constant() {
        let ifs = AffineIfs::cantor();
        let e0 = PiecewiseExp::exponential(2, one(), 0.0);
        assert_eq!(e0.apply_isometry(&ifs, 0.0), e0);
    }

    #[test]
    fn single_letter_from_zero_cycle_is_pure_exponential() {
        let ifs = AffineIfs::cantor();
        let e0 = PiecewiseExp::exponential(2, one(), 0.0);
        let s = e0.apply_isometry(&ifs, 0.75);
        assert_eq!(s.as_exponential().unwrap().freq, 0.75);
    }

    #[test]
    fn two_letters_give_sign_pattern() {
        let ifs = AffineIfs::cantor();
        let e0 = PiecewiseExp::exponential(2, one(), 0.0);
        let s = e0.apply_isometry(&ifs, 0.75).apply_isometry(&ifs, 0.75);
        assert_eq!(s.depth(), 1);
        assert!((s.cells()[0].coef - 1.0).norm() < 1e-15);
        assert!((s.cells()[1].coef + 1.0).norm() < 1e-15);
        assert_eq!(s.cells()[0].freq, 3.0);
        assert!(s.same_function(&PiecewiseExp::from_closed_form(&ifs, &[0.75, 0.75], 0.0)));
    }

    #[test]
    fn extreme_cycle_identity() {
        // S_1 e_{-1} = e_{-1} on the unit interval
        let ifs = AffineIfs::unit_interval(2);
        let e = PiecewiseExp::exponential(2, one(), -1.0);
        assert!(e.apply_isometry(&ifs, 1.0).same_function(&e));
    }

    #[test]
    fn adjoint_of_exponential_matches_mask_formula() {
        let ifs = AffineIfs::cantor();
        let t = 0.37;
        let l = 0.75;
        let out = PiecewiseExp::exponential(2, one(), -t).apply_adjoint(&ifs, l);
        assert_eq!(out.len(), 1);
        let cell = out[0].as_exponential().unwrap();
        let g = (t + l) / 3.0;
        assert!((cell.coef - ifs.mask(g).conj()).norm() < 1e-14);
        assert!((cell.freq + g).abs() < 1e-15);
    }

    #[test]
    fn adjoint_undoes_isometry() {
        let ifs = AffineIfs::cantor();
        let p = PiecewiseExp::from_closed_form(&ifs, &[0.75, 0.0, 0.75], 0.0).compress();
        for (l, expect_zero) in [(0.75, false), (0.0, true)] {
            let out = p.apply_isometry(&ifs, 0.75).apply_adjoint(&ifs, l);
            assert_eq!(out.len(), 1);
            if expect_zero {
                assert!(out[0].cells().iter().all(|c| c.coef.norm() < 1e-14));
            } else {
                assert!(out[0].same_function(&p));
            }
        }
    }

    #[test]
    fn eval_resolves_cylinders() {
        let ifs = AffineIfs::cantor();
        let e0 = PiecewiseExp::exponential(2, one(), 0.0);
        assert_eq!(e0.eval(&ifs, 0.25).unwrap(), one());
        assert!(e0.eval(&ifs, 0.5).is_err());
        let s = PiecewiseExp::from_closed_form(&ifs, &[0.75, 0.75], 0.0);
        // x = 1 lies in tau_2 X_B, where the coefficient is -1
        let v = s.eval(&ifs, 1.0).unwrap();
        assert!((v + cis_turns(3.0)).norm() < 1e-12);
    }

    #[test]
    fn mixed_systems_are_rejected() {
        let e = PiecewiseExp::exponential(3, one(), 0.0);
        assert_eq!(e.eval(&AffineIfs::cantor(), 0.0), Err(Error::MixedSystems));
    }
}
