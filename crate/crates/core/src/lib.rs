//! Orthonormal bases generated by representations of the Cuntz algebra.
//!
//! A quadrature mirror filter (QMF) basis `m_0, ..., m_{N-1}` for the
//! `N`-to-1 map `r` of an affine iterated function system gives isometries
//! `S_i f = m_i * (f o r)` obeying the Cuntz relations on `L^2(mu)`. Orbits of
//! simple vectors under words in these isometries produce:
//!
//! * piecewise exponential orthonormal bases on Cantor-type invariant
//!   measures ([`basis::gen_fractal_onb`]), including pure Fourier bases when
//!   all data are integers ([`basis::integer_spectrum`]);
//! * generalized Walsh bases of `L^2[0, 1]` from any unitary matrix with
//!   constant first row ([`basis::gen_walsh_basis`]).
//!
//! The [`verify`] module checks orthonormality with exact inner products built
//! from the Fourier transform of the invariant measure and reports
//! completeness diagnostics (Bessel sums and transfer-operator iteration).

pub mod basis;
pub mod cuntz;
pub mod cycles;
pub mod error;
pub mod filters;
pub mod ifs;
pub mod measure;
pub mod verify;

mod phase;

pub use error::{Error, Result};
pub use num_complex::Complex64;
