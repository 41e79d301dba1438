//! Scalar special functions: scaled arithmetic, Pochhammer symbols, Jacobi
//! polynomials, terminating hypergeometric series and quadrature rules.

pub mod hypergeometric;
pub mod jacobi;
pub mod logscaled;
pub mod pochhammer;
pub mod quadrature;

pub use hypergeometric::{gauss_2f1_terminating, omega_2f1};
pub use jacobi::{jacobi_p, jacobi_p_deriv, jacobi_p_scaled};
pub use logscaled::{factorial, neumaier_sum, LogScaled, ScaledSum};
pub use pochhammer::pochhammer;
