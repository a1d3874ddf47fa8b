//! Depth-first enumeration of restricted walks.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Direction;
use crate::walk_rules::{RuleChecker, WalkRule, WalkState};

/// Number of allowed walks of each length `1..=n_max` from the origin.
///
/// The first step is fixed east and the result multiplied by the coordination
/// number; the rule tables are invariant under the point group. Subtrees below
/// the second step are counted in parallel.
pub fn count_walks(rule: WalkRule, n_max: usize) -> Result<Vec<BigUint>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let checker = RuleChecker::new(rule)?;
    let kappa = rule.coordination();
    let seeds: Vec<u8> = (0..kappa as u8).collect();
    let partial: Vec<Vec<u64>> = seeds
        .par_iter()
        .map(|&second| {
            let mut counts = vec![0u64; n_max + 1];
            let mut st = checker.state(n_max);
            st.try_push(Direction(0));
            if n_max >= 2 && st.try_push(Direction(second)) {
                counts[2] = 1;
                dfs(&mut st, n_max, kappa as u8, &mut counts);
            }
            counts
        })
        .collect();
    let mut totals = vec![0u64; n_max + 1];
    totals[1] = 1;
    for c in partial {
        for (t, x) in totals.iter_mut().zip(c) {
            *t += x;
        }
    }
    Ok(totals[1..]
        .iter()
        .map(|&c| BigUint::from(c) * BigUint::from(kappa))
        .collect())
}

fn dfs(st: &mut WalkState, n_max: usize, kappa: u8, counts: &mut [u64]) {
    let depth = st.len();
    if depth == n_max {
        return;
    }
    for d in 0..kappa {
        if st.try_push(Direction(d)) {
            counts[depth + 1] += 1;
            dfs(st, n_max, kappa, counts);
            st.pop();
        }
    }
}

/// Count walks by brute force over every step sequence, checking each whole
/// path independently of the incremental machinery.
pub fn count_walks_brute(rule: WalkRule, n: usize) -> Result<BigUint> {
    let checker = RuleChecker::new(rule)?;
    let k = rule.coordination();
    let total = k.checked_pow(n as u32).filter(|&t| t <= 1 << 24).ok_or(Error::SizeCap {
        what: "brute-force sequences".into(),
        requested: n,
        cap: 24,
    })?;
    let mut steps = vec![0u8; n];
    let mut count = 0u64;
    for mut code in 0..total {
        for s in steps.iter_mut() {
            *s = (code % k) as u8;
            code /= k;
        }
        if checker.allowed(&steps) {
            count += 1;
        }
    }
    Ok(BigUint::from(count))
}

/// `c_n^(1/n)` rounded up at the fifth decimal, exactly: the smallest `m`
/// with `m^n >= c_n * 10^(5n)`, divided by `10^5`.
pub fn mu_upper_from_counts(counts: &[BigUint]) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(Error::Empty("no counts".into()));
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_zero() {
                return Err(Error::InvalidArgument(format!("c_{} is zero", i + 1)));
            }
            Ok(ceil_root_scaled(c, i as u32 + 1, 5) as f64 / 1e5)
        })
        .collect()
}

/// Smallest integer `m` with `m^n >= c * 10^(digits*n)`.
pub fn ceil_root_scaled(c: &BigUint, n: u32, digits: u32) -> u64 {
    let target = c * BigUint::from(10u32).pow(digits * n);
    let approx = c.to_f64().unwrap_or(f64::MAX).powf(1.0 / n as f64) * 10f64.powi(digits as i32);
    let mut m = approx.floor().max(1.0) as u64;
    let pow = |m: u64| BigUint::from(m).pow(n);
    while m > 1 && pow(m - 1) >= target {
        m -= 1;
    }
    while pow(m) < target {
        m += 1;
    }
    m
}

/// Whether `c_n c_m >= c_{n+m}` holds for every pair within the table.
pub fn is_submultiplicative(counts: &[BigUint]) -> bool {
    let c = |i: usize| &counts[i - 1];
    (1..=counts.len()).all(|n| (1..=counts.len() - n).all(|m| c(n) * c(m) >= *c(n + m)))
}
