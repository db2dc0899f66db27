//! Orthonormal families generated by words in the Cuntz isometries:
//! piecewise exponential bases on fractal measures and generalized Walsh
//! bases on `[0, 1]`.

mod fractal;
mod piecewise;
mod walsh;

pub use fractal::{gen_fractal_onb, integer_spectrum};
pub use piecewise::{closed_form_alpha, closed_form_frequency, Cell, PiecewiseExp, Provenance, CELL_TOL};
pub use walsh::{gen_walsh_basis, walsh_analyze, walsh_filters, walsh_synthesize, walsh_value, StepWalsh};
