//! Laplace-transform tools for deciding whether a family of functions on the
//! half-line is relatively compact in exponentially weighted L².

pub mod cli;
pub mod criteria;
pub mod diagnosis;
pub mod error;
pub mod families;
pub mod halfline;
pub mod transform;

pub use error::{PegoError, Result};
pub use halfline::{HalfLineFunction, Label, Order, PegoFamily, TimeGrid};
pub use num_complex::Complex64;
pub use transform::{FrequencyGrid, SpectrumSlice};
