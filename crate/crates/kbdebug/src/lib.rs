//! Interactive debugging of faulty knowledge bases.

pub mod api;
pub mod logic;
pub mod diagnosis;
pub mod probability;
pub mod query;
pub mod random;
pub mod session;
pub mod strategy;
