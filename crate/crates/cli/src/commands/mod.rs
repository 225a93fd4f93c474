pub mod check;
pub mod cycles;
pub mod gallery;
pub mod portrait;
pub mod scan;
pub mod transform;
