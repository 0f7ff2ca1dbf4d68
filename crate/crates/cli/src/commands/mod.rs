pub mod brane;
pub mod geometry;
pub mod hl;
pub mod mdr;
pub mod shell;
