pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod execution;
pub mod frontend;
pub mod models;
pub mod pretrace;
pub mod relalg;
pub mod transform;
