//! Exact scalars and small dense matrices.

mod bracket;
mod hbar;
mod matrix;
mod rational;

pub use bracket::{bracket, bracket_poly, half_product, signed_gamma_ratio};
pub use hbar::HbarLaurent;
pub use matrix::RatMatrix;
pub use rational::{binomial, factorial, fmt_rat, int, parse_rat, rat, Rational};
