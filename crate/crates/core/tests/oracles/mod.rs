//! Brute-force reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

pub mod algebra;
pub mod bayes;
pub mod cfg;
pub mod prover;
pub mod regex;
