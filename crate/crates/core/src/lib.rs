//! Certification of matrix monotone and matrix convex functions of a fixed
//! order, on intervals and on finite sets.

pub mod criteria;
pub mod divdiff;
pub mod error;
pub mod expr;
pub mod gensets;
pub mod integral;
pub mod interval;
pub mod linalg;
pub mod mode;
pub mod polynomial;
pub mod quad;
pub mod scalar;

pub use error::{Error, Result};
pub use expr::{FunctionModel, Expr};
pub use interval::Interval;
pub use mode::Mode;
pub use scalar::{Ext, Precision, PrecisionPolicy, Scalar};
