//! Instance files, generators and result output.

pub mod euclidean;
pub mod gen;
pub mod instance;
pub mod report;

pub use instance::{load_instance, parse_instance, save_instance, Instance, InstanceDocument};
