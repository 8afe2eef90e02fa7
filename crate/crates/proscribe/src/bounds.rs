//! Exact-rational upper bounds on free-subset density.
//!
//! The two finite-n theorems take an explicit grading (level sizes plus a
//! capacity list) and produce a certified bound on G([n]) together with a
//! term-by-term breakdown. Their asymptotic corollaries — one per pattern
//! family — replace level sizes with the limiting densities (primorial
//! weights for the multiplicative gradings, friable weights for the smooth
//! one) and consume Ramsey-type capacities from a table. All arithmetic is
//! exact; decimals are rendered by rounding toward the safe side.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::numtheory::{friable_prefix, is_prime, primorial, primorial_phi};
use crate::solver::r_values;
use crate::{Error, Result};

/// Which way a reported value certifies. Everything this module produces is
/// an upper bound; the variant exists so reports are self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upper,
}

/// One summand of the subtracted sum in a bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTerm {
    /// Level index i (finite theorems, friable corollary) or prime index d.
    pub index: u32,
    /// Capacity coefficient (k·R_{i−1} − R_i, r + R_{i−1} − R_i, …). Signed:
    /// upper-bound capacities standing in for exact ones can flip a sign.
    pub coefficient: BigInt,
    /// Density weight the coefficient multiplies: |𝓕_i|/n for finite
    /// gradings, φ(P_d)/P_d^k or 1/s_{i+1} in the limits.
    pub weight: BigRational,
    /// Exact contribution to the subtracted sum, outer factor included, so
    /// that value = 1 − Σ contributions.
    pub contribution: BigRational,
}

/// A certified upper bound with its term breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// The bound itself, exact.
    pub value: BigRational,
    /// Summands, one per level/prime index 1..=depth, in index order.
    pub terms: Vec<BoundTerm>,
    /// Truncation depth; the sum runs over the contiguous prefix 1..=depth,
    /// never skipping an interior term (dropping a negative term would
    /// strengthen the bound unsoundly).
    pub depth: u32,
    pub direction: Direction,
    /// `value` at six fractional digits, rounded up — still a valid bound.
    pub decimal: String,
    /// Finite-n theorems also certify the integer form n − Σ coeff·|𝓕_i|;
    /// asymptotic corollaries have none.
    pub integer_bound: Option<BigInt>,
}

impl BoundReport {
    fn new(
        value: BigRational,
        terms: Vec<BoundTerm>,
        depth: u32,
        integer_bound: Option<BigInt>,
    ) -> Self {
        BoundReport {
            decimal: decimal_render(&value, 6, RoundDirection::Up),
            value,
            terms,
            depth,
            direction: Direction::Upper,
            integer_bound,
        }
    }
}

/// G([n])/n ≤ 1 − Σ_{i≥1} (k·R_{i−1} − R_i)·|𝓕_i|/n for a grading of [n]
/// with expansion k ≥ 2. `level_sizes` lists |𝓕_1|, …, |𝓕_D|; `caps` lists
/// R_0, R_1, …, R_D (so it is one longer), where R_i ≥ G(f_i) for every
/// cell of 𝓕_i — exact values or certified upper bounds both qualify.
pub fn theorem1_bound(n: u64, level_sizes: &[u64], caps: &[u64], k: u32) -> Result<BoundReport> {
    if k < 2 {
        return Err(Error::InvalidParameter("expansion bound needs k ≥ 2".into()));
    }
    finite_theorem(n, level_sizes, caps, |prev, cur| {
        k as i128 * prev as i128 - cur as i128
    })
}

/// G([n])/n ≤ 1 − Σ_{i≥1} (r + R_{i−1} − R_i)·|𝓕_i|/n for a grading of [n]
/// with growth r ≥ 1. Arguments as in [`theorem1_bound`].
pub fn theorem2_bound(
    n: u64,
    level_sizes: &[u64],
    caps: &[u64],
    growth: u32,
) -> Result<BoundReport> {
    if growth < 1 {
        return Err(Error::InvalidParameter("growth bound needs r ≥ 1".into()));
    }
    finite_theorem(n, level_sizes, caps, |prev, cur| {
        growth as i128 + prev as i128 - cur as i128
    })
}

fn finite_theorem(
    n: u64,
    level_sizes: &[u64],
    caps: &[u64],
    coefficient: impl Fn(u64, u64) -> i128,
) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("bounds need n ≥ 1".into()));
    }
    if caps.len() != level_sizes.len() + 1 {
        return Err(Error::LengthMismatch(format!(
            "{} capacities for {} levels; need one per level plus R_0",
            caps.len(),
            level_sizes.len()
        )));
    }
    let n_int = BigInt::from(n);
    let mut terms = Vec::with_capacity(level_sizes.len());
    let mut sum = BigRational::zero();
    let mut int_sum = BigInt::zero();
    for (i, &size) in level_sizes.iter().enumerate() {
        let coefficient = BigInt::from(coefficient(caps[i], caps[i + 1]));
        let weight = BigRational::new(BigInt::from(size), n_int.clone());
        let contribution = BigRational::from_integer(coefficient.clone()) * &weight;
        int_sum += &coefficient * BigInt::from(size);
        sum += &contribution;
        terms.push(BoundTerm {
            index: i as u32 + 1,
            coefficient,
            weight,
            contribution,
        });
    }
    let depth = level_sizes.len() as u32;
    Ok(BoundReport::new(
        BigRational::one() - sum,
        terms,
        depth,
        Some(n_int - int_sum),
    ))
}

/// Shared evaluator for the three primorial-weighted corollaries: value =
/// 1 − factor · Σ_{d=1..depth} (expansion·c_{d−1} − c_d) · φ(P_d)/P_d^power.
fn primorial_corollary(
    caps: &[u64],
    depth: u32,
    expansion: u32,
    power: u32,
    factor: BigRational,
) -> Result<BoundReport> {
    if caps.len() <= depth as usize {
        return Err(Error::MissingRecord(format!(
            "capacity c_{} (depth {depth} needs c_0..c_{depth})",
            caps.len()
        )));
    }
    let mut terms = Vec::with_capacity(depth as usize);
    let mut sum = BigRational::zero();
    for d in 1..=depth as usize {
        let coefficient =
            BigInt::from(expansion as i128 * caps[d - 1] as i128 - caps[d] as i128);
        let weight = BigRational::new(
            primorial_phi(d).into(),
            BigInt::from(primorial(d)).pow(power),
        );
        let contribution =
            &factor * BigRational::from_integer(coefficient.clone()) * &weight;
        sum += &contribution;
        terms.push(BoundTerm {
            index: d as u32,
            coefficient,
            weight,
            contribution,
        });
    }
    Ok(BoundReport::new(BigRational::one() - sum, terms, depth, None))
}

/// Asymptotic upper density of sets free of k-term integer-ratio geometric
/// progressions: 1 − (2^k/(2^k−1)) Σ (k·c_{d−1,k} − c_{d,k})·φ(P_d)/P_d^k,
/// where c_{d,k} are the line-free grid numbers. `dhj` lists c_{0,k}..c_{D,k}
/// for some D ≥ depth; upper bounds are acceptable in place of exact values.
pub fn gp_int_asymptotic(k: u32, dhj: &[u64], depth: u32) -> Result<BoundReport> {
    let factor = grid_factor(k)?;
    primorial_corollary(dhj, depth, k, k, factor)
}

/// As [`gp_int_asymptotic`] but for rational-ratio progressions, which need
/// the stronger signed-line grid numbers c′_{d,k} (Moser numbers).
pub fn gp_rat_asymptotic(k: u32, moser: &[u64], depth: u32) -> Result<BoundReport> {
    let factor = grid_factor(k)?;
    primorial_corollary(moser, depth, k, k, factor)
}

fn grid_factor(k: u32) -> Result<BigRational> {
    if k < 3 {
        return Err(Error::InvalidParameter(
            "geometric-progression bounds need k ≥ 3".into(),
        ));
    }
    let two_k = BigInt::one() << k;
    Ok(BigRational::new(two_k.clone(), two_k - 1))
}

/// Asymptotic upper density of geometric-square-free sets:
/// 1 − (4/3) Σ (2·c_{d−1,2,2} − c_{d,2,2})·φ(P_d)/P_d², with c_{d,2,2} the
/// 2-subspace-free numbers of the d-cube.
pub fn square_asymptotic(space: &[u64], depth: u32) -> Result<BoundReport> {
    primorial_corollary(
        space,
        depth,
        2,
        2,
        BigRational::new(BigInt::from(4), BigInt::from(3)),
    )
}

/// Asymptotic upper density of sets free of k-term progressions with ratio a
/// power of the prime p: 1 − (1 − 1/p) Σ_{i=1..depth} (1 + r_k(i) − r_k(i+1))/p^i.
/// `r_table[i]` must hold r_k(i) for i ≤ depth+1 (as from [`r_values`]).
pub fn prime_power_asymptotic(
    p: u64,
    k: u32,
    r_table: &[u64],
    depth: u32,
) -> Result<BoundReport> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if k < 3 {
        return Err(Error::InvalidParameter(
            "geometric-progression bounds need k ≥ 3".into(),
        ));
    }
    if r_table.len() <= depth as usize + 1 {
        return Err(Error::MissingRecord(format!(
            "r_{k}({}) (depth {depth} needs indices up to {})",
            r_table.len(),
            depth + 1
        )));
    }
    let p_int = BigInt::from(p);
    let factor = BigRational::new(&p_int - 1, p_int.clone());
    let mut terms = Vec::with_capacity(depth as usize);
    let mut sum = BigRational::zero();
    for i in 1..=depth as usize {
        let coefficient =
            BigInt::from(1 + r_table[i] as i128 - r_table[i + 1] as i128);
        let weight = BigRational::new(BigInt::one(), p_int.pow(i as u32));
        let contribution =
            &factor * BigRational::from_integer(coefficient.clone()) * &weight;
        sum += &contribution;
        terms.push(BoundTerm {
            index: i as u32,
            coefficient,
            weight,
            contribution,
        });
    }
    Ok(BoundReport::new(BigRational::one() - sum, terms, depth, None))
}

/// Asymptotic upper density of sets free of 3-term progressions with
/// d-friable integer ratio: 1 − (φ(P_d)/P_d) Σ_{i=1..depth} (1 + R_{i−1} − R_i)/s_{i+1},
/// where s_1 < s_2 < … are the d-friable numbers and R_i is the largest
/// free subset of the prefix {s_1, …, s_{i+1}}. `caps` lists R_0..R_D, D ≥ depth.
pub fn mcnew_asymptotic(d: usize, caps: &[u64], depth: u32) -> Result<BoundReport> {
    if d == 0 {
        return Err(Error::InvalidParameter("friable bound needs d ≥ 1".into()));
    }
    if caps.len() <= depth as usize {
        return Err(Error::MissingRecord(format!(
            "friable prefix capacity R_{} (depth {depth} needs R_0..R_{depth})",
            caps.len()
        )));
    }
    let s = friable_prefix(d, depth as usize + 1)?;
    let factor = BigRational::new(primorial_phi(d).into(), BigInt::from(primorial(d)));
    let mut terms = Vec::with_capacity(depth as usize);
    let mut sum = BigRational::zero();
    for i in 1..=depth as usize {
        let coefficient = BigInt::from(1 + caps[i - 1] as i128 - caps[i] as i128);
        let weight = BigRational::new(BigInt::one(), BigInt::from(s[i]));
        let contribution =
            &factor * BigRational::from_integer(coefficient.clone()) * &weight;
        sum += &contribution;
        terms.push(BoundTerm {
            index: i as u32,
            coefficient,
            weight,
            contribution,
        });
    }
    Ok(BoundReport::new(BigRational::one() - sum, terms, depth, None))
}

/// Result of [`threshold_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdOutcome {
    /// Least n where r_k(n) drops strictly below the easy bound n − ⌊n/k⌋,
    /// with the verifying pair.
    Found { n: u64, r_value: u64, easy_bound: u64 },
    /// Equality r_k(n) = n − ⌊n/k⌋ holds everywhere up to n_max.
    NotFound,
}

/// Scans n = 1..n_max for the first strict gap between r_k(n) and the easy
/// upper bound n − ⌊n/k⌋ (delete one element per block of k consecutive).
pub fn threshold_search(k: u32, n_max: u64) -> Result<ThresholdOutcome> {
    if k < 3 {
        return Err(Error::InvalidParameter(
            "threshold search needs k ≥ 3 (k = 2 collapses immediately)".into(),
        ));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("threshold search needs n_max ≥ 1".into()));
    }
    let r = r_values(k, n_max)?;
    for n in 1..=n_max {
        let easy_bound = n - n / k as u64;
        if r[n as usize] < easy_bound {
            return Ok(ThresholdOutcome::Found {
                n,
                r_value: r[n as usize],
                easy_bound,
            });
        }
    }
    Ok(ThresholdOutcome::NotFound)
}

/// Rounding side for [`decimal_render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundDirection {
    /// Round toward +∞; keeps upper bounds valid when printed.
    Up,
    /// Round toward −∞; keeps lower bounds valid when printed.
    Down,
}

/// Renders `v` with exactly `digits` fractional digits, rounded toward
/// `direction`. Exact values render exactly (possibly with trailing zeros).
pub fn decimal_render(v: &BigRational, digits: u32, direction: RoundDirection) -> String {
    let scaled = v.numer() * BigInt::from(10u32).pow(digits);
    let q = match direction {
        RoundDirection::Up => scaled.div_ceil(v.denom()),
        RoundDirection::Down => scaled.div_floor(v.denom()),
    };
    let mut digits_str = q.abs().to_string();
    if digits_str.len() <= digits as usize {
        digits_str = format!("{:0>width$}", digits_str, width = digits as usize + 1);
    }
    if digits > 0 {
        digits_str.insert(digits_str.len() - digits as usize, '.');
    }
    if q.is_negative() {
        digits_str.insert(0, '-');
    }
    digits_str
}
