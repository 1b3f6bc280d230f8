pub mod catalog;
pub mod cli;
pub mod error;
pub mod federation;
pub mod mediator;
pub mod metrics;
pub mod planner;
pub mod provenance;
pub mod query;
pub mod registry;
pub mod scenario;
pub mod service;
pub mod value;
pub mod vocab;

pub use error::{Error, Result};
pub use mediator::Mediator;
