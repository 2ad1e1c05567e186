use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use verigen::algebra::{LinearSystem, Solution};

type Q = BigRational;

fn det(m: &[Vec<Q>]) -> Q {
    // Laplace expansion; matrices here are at most 4x4.
    match m.len() {
        0 => Q::one(),
        1 => m[0][0].clone(),
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<Q>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &m[0][j] * det(&minor);
                if j % 2 == 0 { term } else { -term }
            })
            .sum(),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn submatrix(m: &[Vec<Q>], rows: &[usize], cols: &[usize]) -> Vec<Vec<Q>> {
    rows.iter().map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect()).collect()
}

/// Rank as the largest order of a nonvanishing minor.
fn rank(m: &[Vec<Q>], ncols: usize) -> usize {
    let max = m.len().min(ncols);
    (1..=max)
        .rev()
        .find(|&k| {
            subsets(m.len(), k)
                .iter()
                .any(|rs| subsets(ncols, k).iter().any(|cs| !det(&submatrix(m, rs, cs)).is_zero()))
        })
        .unwrap_or(0)
}

/// Rouché–Capelli for consistency; the target is pinned iff adding the unit
/// row e_t leaves the rank unchanged. Its value comes from Cramer's rule on a
/// maximal nonsingular minor with the remaining variables set to zero.
pub fn oracle(sys: &LinearSystem, t: usize) -> Solution {
    let n = sys.n_vars;
    let a: Vec<Vec<Q>> = sys.coeffs.clone();
    let aug: Vec<Vec<Q>> = a.iter().zip(&sys.rhs).map(|(r, b)| r.iter().cloned().chain([b.clone()]).collect()).collect();
    let r = rank(&a, n);
    if rank(&aug, n + 1) != r {
        return Solution::NoSolution;
    }
    let mut with_unit = a.clone();
    with_unit.push((0..n).map(|j| if j == t { Q::one() } else { Q::zero() }).collect());
    if rank(&with_unit, n) != r {
        return Solution::MultipleSolutions;
    }
    for rs in subsets(a.len(), r) {
        for cs in subsets(n, r) {
            let sub = submatrix(&a, &rs, &cs);
            let d = det(&sub);
            if d.is_zero() {
                continue;
            }
            let Some(pos) = cs.iter().position(|&c| c == t) else { return Solution::Value(Q::zero()) };
            let mut replaced = sub.clone();
            for (i, &row) in rs.iter().enumerate() {
                replaced[i][pos] = sys.rhs[row].clone();
            }
            return Solution::Value(det(&replaced) / d);
        }
    }
    Solution::Value(Q::zero())
}

pub fn system_strategy() -> impl Strategy<Value = (LinearSystem, usize)> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-3i64..=3, n), m),
            prop::collection::vec(-6i64..=6, m),
            0..n,
        )
            .prop_map(move |(rows, rhs, t)| {
                let q = |x: i64| Q::from_integer(BigInt::from(x));
                (
                    LinearSystem {
                        n_vars: n,
                        coeffs: rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect(),
                        rhs: rhs.iter().map(|&x| q(x)).collect(),
                    },
                    t,
                )
            })
    })
}
