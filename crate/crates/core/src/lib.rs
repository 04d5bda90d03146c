pub mod linalg;
pub mod representation;
pub mod semigroup;
pub mod certificates;
pub mod constructions;
pub mod cli;
