//! Statistical numerics: Laplace noise, the Student-t distribution, the
//! one-sample t-test and adaptive quadrature.

mod laplace;
mod quadrature;
mod student_t;
mod ttest;

pub use laplace::{laplace_from_uniform, sample_laplace, NoiseStream};
pub use quadrature::{integrate, DEFAULT_TOLERANCE, MAX_DEPTH};
pub use student_t::{
    ln_gamma, regularized_incomplete_beta, t_cdf, t_pdf, t_quantile, t_upper_tail,
};
pub use ttest::{one_sample_t_test, one_sample_t_test_with, TTestResult, VarianceDivisor};
