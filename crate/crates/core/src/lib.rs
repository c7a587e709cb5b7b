pub mod lp;
pub mod model;
pub mod qm;
pub mod regions;
pub mod scalar;
pub mod stats;
pub mod verify;
