//! Wave-packet and quantum-jump dynamics of a two-level atom crossing into a
//! half-space laser field.
//!
//! Closed-form parts (model, stationary states, semiclassical estimates) are
//! generic over [`Real`]; the grid and ensemble machinery works in `f64`.

pub mod error;
pub mod approx;
pub mod gridprop;
pub mod mcwf;
pub mod model;
pub mod num;
pub mod observables;
pub mod packet;
pub mod ode;
pub mod quadrature;
pub mod stationary;

pub use error::{Error, Result};
pub use num::Real;

pub type LaserParamsF64 = model::LaserParams<f64>;
pub type LaserParamsF32 = model::LaserParams<f32>;
pub type PhysicalConstantsF64 = model::PhysicalConstants<f64>;
pub type PhysicalConstantsF32 = model::PhysicalConstants<f32>;
pub type ScatteringSolutionF64 = stationary::ScatteringSolution<f64>;
pub type ScatteringSolutionF32 = stationary::ScatteringSolution<f32>;
