//! The Cuntz isometries `S_i f = m_i (f o r)` of a QMF basis and their adjoints
//! `S_i^* f(z) = (1/N) sum_{r(w) = z} conj(m_i(w)) f(w)`.
//!
//! Functions stay symbolic where the representation allows it: exponential
//! filters act on [`PiecewiseExp`] and step filters on [`StepWalsh`]. Anything
//! else falls back to a closure evaluated on addressed points.

use crate::basis::{PiecewiseExp, StepWalsh};
use crate::error::{Error, Result};
use crate::filters::{is_qmf_basis, Evaluable, Filter, QmfBasis, DEFAULT_GRID, POINTWISE_TOL};
use crate::ifs::{AffineIfs, Point};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type Closure = Arc<dyn Fn(&Point) -> Complex64 + Send + Sync>;

/// A function on the attractor.
#[derive(Clone)]
pub enum Function {
    Piecewise(PiecewiseExp),
    /// A finite sum of piecewise exponentials, as produced by `S_l^*`.
    PiecewiseSum(Vec<PiecewiseExp>),
    Step(StepWalsh),
    Closure(Closure),
}

impl fmt::Debug for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Function::Piecewise(p) => f.debug_tuple("Piecewise").field(p).finish(),
            Function::PiecewiseSum(ps) => f.debug_tuple("PiecewiseSum").field(ps).finish(),
            Function::Step(s) => f.debug_tuple("Step").field(s).finish(),
            Function::Closure(_) => f.write_str("Closure(..)"),
        }
    }
}

impl Function {
    pub fn closure(f: impl Fn(&Point) -> Complex64 + Send + Sync + 'static) -> Self {
        Function::Closure(Arc::new(f))
    }

    pub fn one(branches: usize) -> Self {
        Function::Piecewise(PiecewiseExp::exponential(branches, Complex64::new(1.0, 0.0), 0.0))
    }

    /// The symbolic terms, when the function is a (sum of) piecewise exponentials.
    pub fn piecewise_terms(&self) -> Option<&[PiecewiseExp]> {
        match self {
            Function::Piecewise(p) => Some(std::slice::from_ref(p)),
            Function::PiecewiseSum(ps) => Some(ps),
            _ => None,
        }
    }

    fn from_terms(mut terms: Vec<PiecewiseExp>) -> Self {
        if terms.len() == 1 {
            Function::Piecewise(terms.pop().unwrap())
        } else {
            Function::PiecewiseSum(terms)
        }
    }
}

impl Evaluable for Function {
    fn value(&self, ifs: &AffineIfs, p: &Point) -> Complex64 {
        match self {
            Function::Piecewise(pe) => pe.eval_point(ifs, p),
            Function::PiecewiseSum(ps) => ps.iter().map(|pe| pe.eval_point(ifs, p)).sum(),
            Function::Step(s) => s.value(ifs, p),
            Function::Closure(f) => f(p),
        }
    }
}

/// The representation of the Cuntz algebra attached to a QMF basis.
#[derive(Debug, Clone)]
pub struct CuntzRep {
    ifs: Arc<AffineIfs>,
    basis: Arc<QmfBasis>,
}

impl CuntzRep {
    /// Checks that the filters form a QMF basis on the default grid.
    pub fn new(ifs: AffineIfs, basis: QmfBasis) -> Result<Self> {
        let report = is_qmf_basis(&ifs, basis.filters(), &ifs.grid(DEFAULT_GRID), POINTWISE_TOL)?;
        if !report.pass {
            return Err(Error::NotQmfBasis {
                deviation: report.max_deviation,
            });
        }
        Ok(Self::new_unchecked(ifs, basis))
    }

    /// For probing filter sets that may fail the QMF-basis property.
    pub fn new_unchecked(ifs: AffineIfs, basis: QmfBasis) -> Self {
        Self {
            ifs: Arc::new(ifs),
            basis: Arc::new(basis),
        }
    }

    pub fn ifs(&self) -> &AffineIfs {
        &self.ifs
    }

    pub fn basis(&self) -> &QmfBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    fn filter(&self, i: usize) -> Result<&Filter> {
        self.basis.filters().get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            bound: self.basis.len(),
        })
    }

    /// `S_i f = m_i (f o r)`.
    pub fn apply_s(&self, i: usize, f: &Function) -> Result<Function> {
        let filter = self.filter(i)?;
        Ok(match (filter, f) {
            (Filter::Exponential(l), Function::Piecewise(_) | Function::PiecewiseSum(_)) => {
                let terms = f.piecewise_terms().unwrap();
                for t in terms {
                    t.check_system(&self.ifs)?;
                }
                Function::from_terms(terms.iter().map(|t| t.apply_isometry(&self.ifs, *l)).collect())
            }
            (Filter::Step(values), Function::Step(g)) if g.base() == self.ifs.len() => {
                Function::Step(g.apply_step_filter(values, i))
            }
            _ => {
                let (ifs, basis, f) = (self.ifs.clone(), self.basis.clone(), f.clone());
                Function::closure(move |p| basis.filters()[i].value(&ifs, p) * f.value(&ifs, &ifs.shift(p)))
            }
        })
    }

    /// `S_i^* f(z) = (1/N) sum_b conj(m_i(tau_b z)) f(tau_b z)`.
    pub fn apply_s_star(&self, i: usize, f: &Function) -> Result<Function> {
        let filter = self.filter(i)?;
        Ok(match (filter, f) {
            (Filter::Exponential(l), Function::Piecewise(_) | Function::PiecewiseSum(_)) => {
                let terms = f.piecewise_terms().unwrap();
                for t in terms {
                    t.check_system(&self.ifs)?;
                }
                Function::from_terms(terms.iter().flat_map(|t| t.apply_adjoint(&self.ifs, *l)).collect())
            }
            (Filter::Step(values), Function::Step(g)) if g.base() == self.ifs.len() => {
                Function::Step(g.apply_step_adjoint(values))
            }
            _ => {
                let (ifs, basis, f) = (self.ifs.clone(), self.basis.clone(), f.clone());
                Function::closure(move |z| {
                    let m = &basis.filters()[i];
                    let sum: Complex64 = (0..ifs.len())
                        .map(|b| {
                            let w = ifs.prepend(b, z);
                            m.value(&ifs, &w).conj() * f.value(&ifs, &w)
                        })
                        .sum();
                    sum / ifs.len() as f64
                })
            }
        })
    }

    /// `S_{w_1} ... S_{w_n} f`; the empty word is the identity.
    pub fn apply_word(&self, word: &[usize], f: &Function) -> Result<Function> {
        word.iter().rev().try_fold(f.clone(), |acc, &i| self.apply_s(i, &acc))
    }
}

/// Largest deviations from the Cuntz relations over a grid and a set of test
/// functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuntzReport {
    pub pass: bool,
    /// `max |S_i^* S_j f - delta_ij f|`.
    pub orthogonality_defect: f64,
    /// `max |sum_i S_i S_i^* f - f|`.
    pub completeness_defect: f64,
    pub grid_size: usize,
    pub test_functions: usize,
    pub tol: f64,
}

pub fn verify_cuntz(rep: &CuntzRep, tests: &[Function], grid: &[Point], tol: f64) -> Result<CuntzReport> {
    if tests.is_empty() {
        return Err(Error::InvalidArgument("verify_cuntz needs at least one test function".into()));
    }
    let ifs = rep.ifs();
    let n = rep.len();
    let mut orthogonality: f64 = 0.0;
    let mut completeness: f64 = 0.0;
    for f in tests {
        let f_vals: Vec<Complex64> = grid.iter().map(|p| f.value(ifs, p)).collect();
        let mut recon = vec![Complex64::new(0.0, 0.0); grid.len()];
        for j in 0..n {
            let sj = rep.apply_s(j, f)?;
            for i in 0..n {
                let g = rep.apply_s_star(i, &sj)?;
                for (p, fv) in grid.iter().zip(&f_vals) {
                    let target = if i == j { *fv } else { Complex64::new(0.0, 0.0) };
                    orthogonality = orthogonality.max((g.value(ifs, p) - target).norm());
                }
            }
            let back = rep.apply_s(j, &rep.apply_s_star(j, f)?)?;
            for (acc, p) in recon.iter_mut().zip(grid) {
                *acc += back.value(ifs, p);
            }
        }
        for (r, fv) in recon.iter().zip(&f_vals) {
            completeness = completeness.max((r - fv).norm());
        }
    }
    Ok(CuntzReport {
        pass: orthogonality <= tol && completeness <= tol,
        orthogonality_defect: orthogonality,
        completeness_defect: completeness,
        grid_size: grid.len(),
        test_functions: tests.len(),
        tol,
    })
}
