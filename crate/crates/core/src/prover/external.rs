//! Optional external prover, used only to cross-check labels.
//!
//! The command in `VERIGEN_EXTERNAL_PROVER` receives the problem as TPTP `cnf`
//! lines on stdin and must print an `SZS status` line.

use std::io::Write;
use std::process::{Command, Stdio};

use super::parse::render_cnf;
use super::saturate::{negate_conjecture, Status};
use super::term::Clause;

pub const ENV_VAR: &str = "VERIGEN_EXTERNAL_PROVER";

/// Problem text for refuting `axioms` plus the negated conjecture.
pub fn problem_text(axioms: &[Clause], conjecture: &Clause) -> String {
    let mut out = String::new();
    for (i, c) in axioms.iter().enumerate() {
        out.push_str(&render_cnf(&format!("a{}", i + 1), "axiom", c));
        out.push_str(".\n");
    }
    for (i, c) in negate_conjecture(conjecture).iter().enumerate() {
        out.push_str(&render_cnf(&format!("g{}", i + 1), "negated_conjecture", c));
        out.push_str(".\n");
    }
    out
}

/// Reads the first `SZS status` line.
pub fn parse_szs(output: &str) -> Option<Status> {
    let line = output.lines().find(|l| l.contains("SZS status"))?;
    let word = line.split("SZS status").nth(1)?.split_whitespace().next()?;
    match word {
        "Unsatisfiable" | "Theorem" | "ContradictoryAxioms" => Some(Status::Proved),
        "Satisfiable" | "CounterSatisfiable" => Some(Status::Saturated),
        _ => Some(Status::BudgetExhausted),
    }
}

/// Runs the configured prover; `None` when unset or when it fails to run.
pub fn run(axioms: &[Clause], conjecture: &Clause) -> Option<Status> {
    let cmd = std::env::var(ENV_VAR).ok().filter(|c| !c.trim().is_empty())?;
    let mut parts = cmd.split_whitespace();
    let mut child = Command::new(parts.next()?)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    child.stdin.take()?.write_all(problem_text(axioms, conjecture).as_bytes()).ok()?;
    let out = child.wait_with_output().ok()?;
    parse_szs(&String::from_utf8_lossy(&out.stdout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn szs_lines() {
        assert_eq!(parse_szs("% SZS status Unsatisfiable for x"), Some(Status::Proved));
        assert_eq!(parse_szs("# SZS status Satisfiable"), Some(Status::Saturated));
        assert_eq!(parse_szs("# SZS status Timeout"), Some(Status::BudgetExhausted));
        assert_eq!(parse_szs("nothing"), None);
    }
}
