//! Exact law, moments and limit behavior of the clumsy coupon collector.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod harness;
pub mod langgf;
pub mod params;
pub mod quad;
pub mod scalar;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use params::{Clumsiness, ModelParams};
