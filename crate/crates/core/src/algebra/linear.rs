//! Linear equation systems with per-variable solution classification.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{parse_rational, rational_to_string};
use crate::env::{normalize_word, DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::rng::TaskRng;

/// Rows of `coeffs · x = rhs` over `n_vars` variables named `X1..Xn`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub n_vars: usize,
    pub coeffs: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Value(BigRational),
    NoSolution,
    MultipleSolutions,
}

impl Solution {
    pub fn render(&self) -> String {
        match self {
            Solution::Value(v) => rational_to_string(v),
            Solution::NoSolution => "No solution".into(),
            Solution::MultipleSolutions => "Multiple solutions".into(),
        }
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl LinearSystem {
    pub fn from_ints(n_vars: usize, rows: &[(&[i64], i64)]) -> Self {
        LinearSystem {
            n_vars,
            coeffs: rows.iter().map(|(c, _)| c.iter().map(|&x| int(x)).collect()).collect(),
            rhs: rows.iter().map(|&(_, b)| int(b)).collect(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Renders one row with the constant moved left: `2*X1 - X3 + 13 = 0`.
    pub fn render_row(&self, i: usize) -> String {
        let mut out = String::new();
        for (j, a) in self.coeffs[i].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mag = a.abs();
            let body = if mag.is_one() {
                format!("X{}", j + 1)
            } else {
                format!("{}*X{}", rational_to_string(&mag), j + 1)
            };
            push_term(&mut out, a.is_negative(), &body);
        }
        let c = -&self.rhs[i];
        if !c.is_zero() || out.is_empty() {
            push_term(&mut out, c.is_negative(), &rational_to_string(&c.abs()));
        }
        format!("{out} = 0")
    }

    pub fn render(&self) -> String {
        (0..self.num_rows())
            .map(|i| format!("  {}", self.render_row(i)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn push_term(out: &mut String, negative: bool, body: &str) {
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    out.push_str(body);
}

/// Reduced row-echelon form of the augmented matrix. Returns the rows and the
/// pivot column of each nonzero row.
fn rref(sys: &LinearSystem) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let n = sys.n_vars;
    let mut m: Vec<Vec<BigRational>> = sys
        .coeffs
        .iter()
        .zip(&sys.rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.resize(n, BigRational::zero());
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..=n {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..=n {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

/// Classifies the value of `target` (0-based) over the solution set.
///
/// The variable is pinned when its column is a pivot whose row has no
/// entries in free columns; a system can be underdetermined and still pin it.
pub fn classify_target(sys: &LinearSystem, target: usize) -> Solution {
    let n = sys.n_vars;
    let (m, pivots) = rref(sys);
    if pivots.contains(&n) {
        return Solution::NoSolution;
    }
    let Some(row) = pivots.iter().position(|&c| c == target) else {
        return Solution::MultipleSolutions;
    };
    let free_entry = (0..n).any(|j| j != target && !pivots.contains(&j) && !m[row][j].is_zero());
    if free_entry {
        Solution::MultipleSolutions
    } else {
        Solution::Value(m[row][n].clone())
    }
}

pub struct EquationSystem;

impl EquationSystem {
    /// Builds an obfuscated system whose consistent core is `x = solution`.
    pub fn build(
        solution: &[i64],
        row_ops: usize,
        p_inconsistent: f64,
        p_underdetermined: f64,
        rng: &mut TaskRng,
    ) -> LinearSystem {
        let n = solution.len();
        let mut coeffs: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
        let mut rhs: Vec<i64> = solution.to_vec();
        if n > 1 {
            for _ in 0..row_ops {
                let i = rng.below(n);
                let mut j = rng.below(n - 1);
                if j >= i {
                    j += 1;
                }
                let k = *rng.choose(&[1i64, 2, 3]) * if rng.chance(0.5) { 1 } else { -1 };
                let src = coeffs[j].clone();
                for (a, b) in coeffs[i].iter_mut().zip(src) {
                    *a += k * b;
                }
                rhs[i] += k * rhs[j];
            }
        }
        if rng.chance(p_underdetermined) && n > 1 {
            let drop = rng.range_usize(1, (n / 2).max(1));
            for _ in 0..drop {
                let i = rng.below(coeffs.len());
                coeffs.remove(i);
                rhs.remove(i);
            }
        }
        if rng.chance(p_inconsistent) && !coeffs.is_empty() {
            // Same left-hand side as an existing combination, shifted constant.
            let i = rng.below(coeffs.len());
            let k = *rng.choose(&[1i64, 2, -1]);
            let row: Vec<i64> = coeffs[i].iter().map(|a| k * a).collect();
            let shift = rng.range_i64(1, 9) * if rng.chance(0.5) { 1 } else { -1 };
            coeffs.push(row);
            rhs.push(k * rhs[i] + shift);
        }
        let mut order: Vec<usize> = (0..coeffs.len()).collect();
        rng.shuffle(&mut order);
        LinearSystem {
            n_vars: n,
            coeffs: order.iter().map(|&i| coeffs[i].iter().map(|&a| int(a)).collect()).collect(),
            rhs: order.iter().map(|&i| int(rhs[i])).collect(),
        }
    }
}

pub fn equation_prompt(sys: &LinearSystem, target: usize) -> String {
    format!(
        "Solve the following system of equations for the variable 'X{t}'.\n\nSystem:\n{body}\n\n\
         Return the numerical value for X{t}. If a unique numerical solution does not exist, \
         return either 'No solution' or 'Multiple solutions'.",
        t = target + 1,
        body = sys.render()
    )
}

impl Task for EquationSystem {
    fn name(&self) -> &'static str {
        "equation_system"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![
            ParamSpec::discrete("n_vars", 3.0, 0.5, 1.0, 8.0),
            ParamSpec::discrete("row_ops", 0.5, 1.0, 0.0, 12.0),
            ParamSpec::continuous("p_inconsistent", 0.15, 0.0, 0.0, 1.0),
            ParamSpec::continuous("p_underdetermined", 0.15, 0.0, 0.0, 1.0),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let n = params.usize("n_vars").max(1);
        let solution: Vec<i64> = (0..n).map(|_| rng.range_i64(-30, 30)).collect();
        let sys = Self::build(
            &solution,
            params.usize("row_ops"),
            params.get("p_inconsistent"),
            params.get("p_underdetermined"),
            rng,
        );
        if sys.coeffs.iter().any(|r| r.iter().all(Zero::is_zero)) {
            return Err(Reject::new("degenerate row"));
        }
        let target = rng.below(n);
        let label = classify_target(&sys, target);
        let kind = match label {
            Solution::Value(_) => "unique",
            Solution::NoSolution => "inconsistent",
            Solution::MultipleSolutions => "underdetermined",
        };
        Ok(Generated::new(equation_prompt(&sys, target), label.render())
            .meta("n_vars", n)
            .meta("target", format!("X{}", target + 1))
            .meta("kind", kind))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        score_equation(&instance.answer, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("n_vars")?.as_f64()
    }
}

pub fn score_equation(answer: &str, candidate: &str) -> ScoreResult {
    let label = normalize_word(candidate);
    let truth_label = normalize_word(answer);
    if label == "no solution" || label == "multiple solutions" {
        return ScoreResult::binary(label == truth_label);
    }
    let Some(c) = parse_rational(candidate.trim().trim_end_matches('.')) else {
        return ScoreResult::parse_error("expected a number, 'No solution' or 'Multiple solutions'");
    };
    let Some(t) = parse_rational(answer) else {
        return ScoreResult::binary(false);
    };
    let tol = BigRational::new(BigInt::from(1), BigInt::from(1_000_000));
    ScoreResult::binary((c - t).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_instance() {
        let sys = LinearSystem::from_ints(3, &[(&[1, 0, 0], -13), (&[0, 0, 1], 21)]);
        assert_eq!(sys.render(), "  X1 + 13 = 0\n  X3 - 21 = 0");
        assert_eq!(classify_target(&sys, 1), Solution::MultipleSolutions);
        let prompt = equation_prompt(&sys, 1);
        assert!(prompt.starts_with("Solve the following system of equations for the variable 'X2'.\n\nSystem:\n  X1 + 13 = 0"));
        assert_eq!(classify_target(&sys, 0), Solution::Value(int(-13)));
    }

    #[test]
    fn small_cases() {
        let s = LinearSystem::from_ints(1, &[(&[1], 5)]);
        assert_eq!(classify_target(&s, 0), Solution::Value(int(5)));
        let s = LinearSystem::from_ints(1, &[(&[1], 0), (&[1], 1)]);
        assert_eq!(classify_target(&s, 0), Solution::NoSolution);
        let s = LinearSystem::from_ints(2, &[(&[1, 1], 3), (&[1, -1], 1)]);
        assert_eq!(classify_target(&s, 0), Solution::Value(int(2)));
        let s = LinearSystem::from_ints(2, &[(&[1, 1], 3)]);
        assert_eq!(classify_target(&s, 0), Solution::MultipleSolutions);
        let s = LinearSystem::from_ints(3, &[(&[1, 1, 0], 3), (&[1, 1, 0], 3), (&[0, 0, 1], 7)]);
        assert_eq!(classify_target(&s, 2), Solution::Value(int(7)));
    }

    #[test]
    fn label_scoring() {
        assert_eq!(score_equation("Multiple solutions", "multiple solutions").reward, 1.0);
        assert_eq!(score_equation("Multiple solutions", "No solution").reward, 0.0);
        assert_eq!(score_equation("-13", "-13.0000001").reward, 1.0);
        assert_eq!(score_equation("-13", "-12.99").reward, 0.0);
        assert!(score_equation("-13", "banana").details.contains_key("parse_error"));
    }

    #[test]
    fn obfuscation_preserves_solution() {
        let mut rng = TaskRng::new(3);
        for _ in 0..200 {
            let sol = [4, -7, 19];
            let sys = EquationSystem::build(&sol, 8, 0.0, 0.0, &mut rng);
            for (t, v) in sol.iter().enumerate() {
                assert_eq!(classify_target(&sys, t), Solution::Value(int(*v)));
            }
        }
    }
}
