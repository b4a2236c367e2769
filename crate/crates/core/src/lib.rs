pub mod classes;
pub mod commands;
pub mod config;
pub mod covering;
pub mod engine;
pub mod error;
pub mod integral;
pub mod measure;
pub mod montecarlo;
pub mod quadrature;
pub mod rates;
pub mod report;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = measure::Grid<f64>;
pub type GridFunction = measure::GridFunction<f64>;
pub type DiscreteMeasure = measure::DiscreteMeasure<f64>;
pub type FunctionClass = classes::FunctionClass<f64>;
pub type EntropyCurve = integral::EntropyCurve<f64>;
pub type McConfig = montecarlo::McConfig<f64>;

pub type Grid32 = measure::Grid<f32>;
pub type GridFunction32 = measure::GridFunction<f32>;
pub type DiscreteMeasure32 = measure::DiscreteMeasure<f32>;
pub type FunctionClass32 = classes::FunctionClass<f32>;
pub type EntropyCurve32 = integral::EntropyCurve<f32>;
