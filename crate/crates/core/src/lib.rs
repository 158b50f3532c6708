pub mod belief;
pub mod bench;
pub mod config;
pub mod domain;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod planner;
pub mod population;
pub mod protest;
pub mod testkit;

pub use error::{Error, Result};
