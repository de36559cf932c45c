//! Test support: a small hand-built fixture, random snapshot and context
//! generators, and a naive full-scan reference for every analytics query.

pub mod compare;
pub mod fixture;
pub mod gen;
pub mod naive;
