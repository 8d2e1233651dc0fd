pub mod basis;
pub mod cases;
pub mod config;
pub mod dg;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod flux;
pub mod limiter;
pub mod lts;
pub mod mesh;
pub mod runner;
pub mod ssprk;
pub mod state;

pub use error::{Error, Result};
