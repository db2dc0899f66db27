//! Filters on the attractor, the conditional expectation onto
//! `r`-measurable functions, QMF and QMF-basis checks, spectra of digit
//! sets, and the correspondence between QMF bases and unitary-matrix-valued
//! maps.

use crate::basis::PiecewiseExp;
use crate::error::{Error, Result};
use crate::ifs::{AffineIfs, Point};
use crate::phase::cis_turns;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const UNITARY_TOL: f64 = 1e-10;
pub const POINTWISE_TOL: f64 = 1e-10;
pub const DEFAULT_GRID: usize = 512;

/// Anything that can be evaluated at an addressed point of the attractor.
pub trait Evaluable {
    fn value(&self, ifs: &AffineIfs, p: &Point) -> Complex64;
}

impl<F> Evaluable for F
where
    F: Fn(&Point) -> Complex64,
{
    fn value(&self, _ifs: &AffineIfs, p: &Point) -> Complex64 {
        self(p)
    }
}

impl Evaluable for PiecewiseExp {
    fn value(&self, ifs: &AffineIfs, p: &Point) -> Complex64 {
        self.eval_point(ifs, p)
    }
}

#[derive(Debug, Clone)]
pub enum Filter {
    /// `e_lambda(x) = exp(2 pi i lambda x)`.
    Exponential(f64),
    /// Constant `values[j]` on the first-level cylinder `tau_j X_B`; on the
    /// unit interval this is `[j/N, (j+1)/N)`.
    Step(Vec<Complex64>),
    Piecewise(PiecewiseExp),
    /// `m'_row(z) = sum_j A_{row j}(r z) m_j(z)`.
    Rotated {
        field: Arc<MatrixField>,
        row: usize,
        reference: Arc<QmfBasis>,
    },
}

impl Evaluable for Filter {
    fn value(&self, ifs: &AffineIfs, p: &Point) -> Complex64 {
        match self {
            Filter::Exponential(lambda) => cis_turns(lambda * p.x()),
            Filter::Step(values) => values[p.digit(0, ifs.zero_digit())],
            Filter::Piecewise(pe) => pe.eval_point(ifs, p),
            Filter::Rotated {
                field,
                row,
                reference,
            } => {
                let a = field.at(&ifs.shift(p), ifs);
                reference
                    .filters()
                    .iter()
                    .enumerate()
                    .map(|(j, m)| a.entries()[(*row, j)] * m.value(ifs, p))
                    .sum()
            }
        }
    }
}

/// `E(f)(z) = (1/N) sum_{r(w) = z} f(w) = (1/N) sum_b f(tau_b z)`.
pub fn cond_expectation<F: Evaluable + ?Sized>(ifs: &AffineIfs, f: &F, z: &Point) -> Complex64 {
    let sum: Complex64 = (0..ifs.len()).map(|b| f.value(ifs, &ifs.prepend(b, z))).sum();
    sum / ifs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QmfReport {
    pub pass: bool,
    pub max_deviation: f64,
    pub grid_size: usize,
    pub tol: f64,
}

pub fn is_qmf<F: Evaluable + ?Sized>(ifs: &AffineIfs, m: &F, grid: &[Point], tol: f64) -> QmfReport {
    let max_deviation = grid
        .iter()
        .map(|z| {
            let e = cond_expectation(ifs, &|w: &Point| {
                Complex64::new(m.value(ifs, w).norm_sqr(), 0.0)
            }, z);
            (e - 1.0).norm()
        })
        .fold(0.0, f64::max);
    QmfReport {
        pass: max_deviation <= tol,
        max_deviation,
        grid_size: grid.len(),
        tol,
    }
}

/// The `N x N` matrix `E(m_i conj(m_j))(z)`.
fn expectation_matrix<F: Evaluable>(ifs: &AffineIfs, left: &[F], right: &[F], z: &Point) -> DMatrix<Complex64> {
    let n = ifs.len();
    let preimages: Vec<Point> = (0..n).map(|b| ifs.prepend(b, z)).collect();
    let lv: Vec<Vec<Complex64>> = left
        .iter()
        .map(|m| preimages.iter().map(|w| m.value(ifs, w)).collect())
        .collect();
    let rv: Vec<Vec<Complex64>> = right
        .iter()
        .map(|m| preimages.iter().map(|w| m.value(ifs, w)).collect())
        .collect();
    DMatrix::from_fn(left.len(), right.len(), |i, j| {
        lv[i].iter().zip(&rv[j]).map(|(a, b)| a * b.conj()).sum::<Complex64>() / n as f64
    })
}

fn identity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Checks `E(m_i conj(m_j)) = delta_ij` on the grid.
pub fn is_qmf_basis<F: Evaluable>(ifs: &AffineIfs, filters: &[F], grid: &[Point], tol: f64) -> Result<QmfReport> {
    if filters.len() != ifs.len() {
        return Err(Error::WrongArity {
            expected: ifs.len(),
            got: filters.len(),
        });
    }
    let max_deviation = grid
        .iter()
        .map(|z| identity_defect(&expectation_matrix(ifs, filters, filters, z)))
        .fold(0.0, f64::max);
    Ok(QmfReport {
        pass: max_deviation <= tol,
        max_deviation,
        grid_size: grid.len(),
        tol,
    })
}

/// `N` filters forming a QMF basis.
#[derive(Debug, Clone)]
pub struct QmfBasis {
    filters: Vec<Filter>,
}

impl QmfBasis {
    /// Validates the QMF-basis property on the default grid.
    pub fn new(ifs: &AffineIfs, filters: Vec<Filter>) -> Result<Self> {
        let report = is_qmf_basis(ifs, &filters, &ifs.grid(DEFAULT_GRID), POINTWISE_TOL)?;
        if !report.pass {
            return Err(Error::NotQmfBasis {
                deviation: report.max_deviation,
            });
        }
        Ok(Self { filters })
    }

    /// Skips validation; for diagnosing broken filter sets.
    pub fn new_unchecked(filters: Vec<Filter>) -> Self {
        Self { filters }
    }

    /// `{e_lambda : lambda in spectrum}`.
    pub fn exponential(ifs: &AffineIfs, spectrum: &[f64]) -> Result<Self> {
        Self::new(ifs, spectrum.iter().map(|&l| Filter::Exponential(l)).collect())
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Frequencies when every filter is an exponential.
    pub fn exponential_frequencies(&self) -> Option<Vec<f64>> {
        self.filters
            .iter()
            .map(|f| match f {
                Filter::Exponential(l) => Some(*l),
                _ => None,
            })
            .collect()
    }
}

/// A square matrix verified unitary to [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: DMatrix<Complex64>,
    first_row_constant: bool,
}

/// JSON form `{"N": 4, "rows": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

pub fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    identity_defect(&(m * m.adjoint()))
}

impl UnitaryMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::WrongArity {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let defect = unitarity_defect(&entries);
        if !(defect <= UNITARY_TOL) {
            return Err(Error::NotUnitary { defect });
        }
        let n = entries.nrows();
        let c = 1.0 / (n as f64).sqrt();
        let first_row_constant = (0..n).all(|j| (entries[(0, j)] - c).norm() <= 1e-12);
        Ok(Self {
            entries,
            first_row_constant,
        })
    }

    pub fn from_spec(spec: &MatrixSpec) -> Result<Self> {
        if spec.rows.len() != spec.n {
            return Err(Error::WrongArity {
                expected: spec.n,
                got: spec.rows.len(),
            });
        }
        if let Some(bad) = spec.rows.iter().find(|r| r.len() != spec.n) {
            return Err(Error::WrongArity {
                expected: spec.n,
                got: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(spec.n, spec.n, |i, j| {
            let [re, im] = spec.rows[i][j];
            Complex64::new(re, im)
        }))
    }

    pub fn to_spec(&self) -> MatrixSpec {
        MatrixSpec {
            n: self.dim(),
            rows: (0..self.dim())
                .map(|i| {
                    (0..self.dim())
                        .map(|j| [self.entries[(i, j)].re, self.entries[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).unwrap()
    }

    /// `(1/sqrt 2) [[1, 1], [1, -1]]`.
    pub fn hadamard2() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(DMatrix::from_row_slice(
            2,
            2,
            &[s, s, s, -s].map(|v| Complex64::new(v, 0.0)),
        ))
        .unwrap()
    }

    /// The 4x4 example matrix with rows
    /// `(1/2)(1,1,1,1)`, `(s,-s,0,0)`, `(0,0,s,-s)`, `(1/2)(1,1,-1,-1)`, `s = sqrt(2)/2`.
    pub fn walsh_example4() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = 0.5;
        let rows = [
            h, h, h, h, //
            s, -s, 0.0, 0.0, //
            0.0, 0.0, s, -s, //
            h, h, -h, -h,
        ];
        Self::new(DMatrix::from_row_slice(4, 4, &rows.map(|v| Complex64::new(v, 0.0)))).unwrap()
    }

    /// Unitary `n x n` DFT matrix `exp(2 pi i j k / n) / sqrt n`; its first row is constant.
    pub fn fourier(n: usize) -> Self {
        let scale = 1.0 / (n as f64).sqrt();
        Self::new(DMatrix::from_fn(n, n, |j, k| {
            cis_turns((j * k) as f64 / n as f64) * scale
        }))
        .unwrap()
    }

    /// Haar-like random unitary from the QR factorization of a seeded complex
    /// Gaussian matrix.
    pub fn random(n: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(gaussian(&mut rng), gaussian(&mut rng))
        });
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        // fix column phases so the distribution does not depend on QR conventions
        let phases = DMatrix::from_fn(n, n, |i, j| {
            if i == j && r[(i, i)].norm() > 0.0 {
                r[(i, i)] / r[(i, i)].norm()
            } else if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(q * phases).expect("QR factor is unitary")
    }

    /// Random unitary with constant first row: `diag(1, V) F` for the DFT
    /// matrix `F` and a random `(n-1) x (n-1)` unitary `V`.
    pub fn random_walsh(n: usize, seed: u64) -> Self {
        let f = Self::fourier(n).entries;
        if n == 1 {
            return Self::fourier(1);
        }
        let v = Self::random(n - 1, seed).entries;
        let mut d = DMatrix::<Complex64>::identity(n, n);
        d.view_mut((1, 1), (n - 1, n - 1)).copy_from(&v);
        Self::new(d * f).expect("product of unitaries")
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn first_row_constant(&self) -> bool {
        self.first_row_constant
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.entries)
    }
}

fn gaussian(rng: &mut impl rand::Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// A unitary-matrix-valued map on the attractor: constant, or constant on
/// each cylinder of a fixed depth.
#[derive(Debug, Clone)]
pub enum MatrixField {
    Constant(UnitaryMatrix),
    Cylinders {
        depth: usize,
        matrices: Vec<UnitaryMatrix>,
    },
}

impl MatrixField {
    pub fn at(&self, z: &Point, ifs: &AffineIfs) -> &UnitaryMatrix {
        match self {
            MatrixField::Constant(a) => a,
            MatrixField::Cylinders { depth, matrices } => {
                &matrices[z.cylinder_index(*depth, ifs.len(), ifs.zero_digit())]
            }
        }
    }

    fn matrices(&self) -> &[UnitaryMatrix] {
        match self {
            MatrixField::Constant(a) => std::slice::from_ref(a),
            MatrixField::Cylinders { matrices, .. } => matrices,
        }
    }
}

/// `A_ij(z) = (1/N) sum_{r(w) = z} m'_i(w) conj(m_j(w))`.
pub fn basis_to_matrix(ifs: &AffineIfs, new_basis: &QmfBasis, reference: &QmfBasis, z: &Point) -> Result<UnitaryMatrix> {
    for b in [new_basis, reference] {
        if b.len() != ifs.len() {
            return Err(Error::WrongArity {
                expected: ifs.len(),
                got: b.len(),
            });
        }
    }
    UnitaryMatrix::new(expectation_matrix(ifs, new_basis.filters(), reference.filters(), z))
}

/// `m'_i(z) = sum_j A_ij(r z) m_j(z)`.
pub fn matrix_to_basis(ifs: &AffineIfs, reference: Arc<QmfBasis>, field: MatrixField) -> Result<QmfBasis> {
    let n = ifs.len();
    if reference.len() != n {
        return Err(Error::WrongArity {
            expected: n,
            got: reference.len(),
        });
    }
    if let MatrixField::Cylinders { depth, matrices } = &field {
        let expected = n.pow(*depth as u32);
        if matrices.len() != expected {
            return Err(Error::WrongArity {
                expected,
                got: matrices.len(),
            });
        }
    }
    if let Some(bad) = field.matrices().iter().find(|a| a.dim() != n) {
        return Err(Error::WrongArity {
            expected: n,
            got: bad.dim(),
        });
    }
    let field = Arc::new(field);
    Ok(QmfBasis {
        filters: (0..n)
            .map(|row| Filter::Rotated {
                field: field.clone(),
                row,
                reference: reference.clone(),
            })
            .collect(),
    })
}

/// Reconstruction `sum_i E(f conj(m_i))(r z) m_i(z)`; the expectation is
/// taken over the fibre of `r` through `z`.
pub fn decompose<F: Evaluable + ?Sized>(ifs: &AffineIfs, f: &F, basis: &QmfBasis, z: &Point) -> Complex64 {
    decompose_coefficients(ifs, f, basis, z)
        .iter()
        .zip(basis.filters())
        .map(|(c, m)| c * m.value(ifs, z))
        .sum()
}

/// The coefficients `E(f conj(m_i))(r z)`.
pub fn decompose_coefficients<F: Evaluable + ?Sized>(ifs: &AffineIfs, f: &F, basis: &QmfBasis, z: &Point) -> Vec<Complex64> {
    let base = ifs.shift(z);
    basis
        .filters()
        .iter()
        .map(|m| {
            cond_expectation(ifs, &|w: &Point| f.value(ifs, w) * m.value(ifs, w).conj(), &base)
        })
        .collect()
}

/// Outcome of a spectrum test.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCheck {
    pub pass: bool,
    pub defect: f64,
    /// `(1/sqrt N) [exp(2 pi i R^{-1} b lambda)]`, rows indexed by `B`.
    pub matrix: DMatrix<Complex64>,
}

/// Is `candidates` a spectrum for `R^{-1} B`?
pub fn is_spectrum(digits: &[f64], scale: f64, candidates: &[f64]) -> Result<SpectrumCheck> {
    if digits.len() != candidates.len() {
        return Err(Error::WrongArity {
            expected: digits.len(),
            got: candidates.len(),
        });
    }
    let n = digits.len();
    let norm = 1.0 / (n as f64).sqrt();
    let matrix = DMatrix::from_fn(n, n, |i, j| cis_turns(digits[i] / scale * candidates[j]) * norm);
    let defect = identity_defect(&(matrix.adjoint() * &matrix));
    Ok(SpectrumCheck {
        pass: defect <= UNITARY_TOL,
        defect,
        matrix,
    })
}

/// Is `(B, L)` a Hadamard pair with integer scaling factor `R`?
pub fn is_hadamard_pair(digits: &[f64], spectrum: &[f64], scale: f64) -> Result<SpectrumCheck> {
    for &v in digits.iter().chain(spectrum).chain(std::iter::once(&scale)) {
        if v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::NonIntegerInput(v));
        }
    }
    is_spectrum(digits, scale, spectrum)
}
