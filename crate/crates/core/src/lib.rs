//! Exact computational engine for small matrix groups over finite fields:
//! fields and quadratic algebras, group constructions, conjugacy machinery,
//! character tables by the Dixon-Schneider method, and the verification
//! suites for distinction multiplicities.

pub mod cache;
pub mod chartab;
pub mod classes;
pub mod cli;
pub mod cyclo;
pub mod distinction;
pub mod dixon;
pub mod error;
pub mod gf;
pub mod grp;
pub mod mackey4;
pub mod mat;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
