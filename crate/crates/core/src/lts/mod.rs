//! Predictor-corrector local time stepping.

pub mod engine;
pub mod predictor;

pub use engine::{lts_step, LtsEngine};
pub use predictor::{build_predictor_table, build_predictor_table_with, predict_interface, PredictorTable, Rk54Predictor};
