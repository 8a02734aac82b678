//! Thin-film solenoid microinductor modelling: material fits, geometry,
//! electromagnetic performance, analytical synthesis and design-space search.

pub mod design_file;
pub mod em_model;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod materials;
pub mod optimizer;
pub mod reference_data;
pub mod report;
pub mod sweep;
pub mod synthesis;

pub use em_model::{Inductor, OperatingPoint, PerformancePoint};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{CoreGeometry, VolumeRule, WindingGeometry};
pub use materials::{MaterialRegistry, MaterialSpec};
