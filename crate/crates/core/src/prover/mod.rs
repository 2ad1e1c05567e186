//! A small saturation prover for clausal first-order logic with equality.

pub mod external;
pub mod parse;
pub mod saturate;
pub mod term;

pub use parse::{parse_clause, parse_cnf, parse_named, render_cnf, NamedClause, SyntaxError};
pub use saturate::{infer, one_step_check, prove, saturate, Budget, DerivationGraph, Node, ProofResult, Rule, Status};
pub use term::{Clause, Literal, Term};
