pub mod complex;
pub mod matrix;

pub use complex::{
    conj_pow_over_abs_pow, rational_pow_neg_s, two_pow, BlockSum, Complex, SUM_BLOCK,
};
pub use matrix::CMatrix;
