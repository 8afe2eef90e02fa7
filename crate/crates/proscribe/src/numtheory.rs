//! Primes, primorials, Euler's phi, p-adic valuations and friable numbers.
//!
//! Everything here is small-scale number theory: the bound corollaries need
//! exact values of P_d = p_1 ⋯ p_d and φ(P_d) (arbitrary precision, since
//! P_d^k overflows 64 bits already for modest d and k), and the friable
//! grading needs the ordered sequence of d-friable numbers.

use num_bigint::BigUint;
use num_traits::One;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// The first `d` primes, in increasing order.
pub fn primes(d: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(d);
    let mut x: u64 = 2;
    while out.len() < d {
        if is_prime(x) {
            out.push(x);
        }
        x += 1;
    }
    out
}

/// Deterministic primality test by trial division; inputs here are tiny.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= x {
        if x % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// The primorial P_d, the product of the first `d` primes, with its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Primorial {
    pub d: usize,
    pub value: BigUint,
}

impl Primorial {
    /// P_d = p_1 · p_2 ⋯ p_d (P_0 = 1).
    pub fn new(d: usize) -> Self {
        let value = primes(d)
            .iter()
            .fold(BigUint::one(), |acc, &p| acc * BigUint::from(p));
        Primorial { d, value }
    }
}

/// P_d as an arbitrary-precision natural.
pub fn primorial(d: usize) -> BigUint {
    Primorial::new(d).value
}

/// φ(P_d) = ∏ (p_i − 1), exact.
pub fn primorial_phi(d: usize) -> BigUint {
    primes(d)
        .iter()
        .fold(BigUint::one(), |acc, &p| acc * BigUint::from(p - 1))
}

/// Euler's phi on a 64-bit natural, by trial-division factorization.
///
/// Only meant for small or smooth inputs (primorials and grading parameters);
/// general factorization of large integers is out of scope.
pub fn euler_phi(m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidParameter("euler_phi(0) is undefined".into()));
    }
    let mut rest = m;
    let mut phi = 1u64;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            phi *= p - 1;
            rest /= p;
            while rest % p == 0 {
                phi *= p;
                rest /= p;
            }
        }
        p += 1;
    }
    if rest > 1 {
        phi *= rest - 1;
    }
    Ok(phi)
}

/// v_p(x): the largest e with p^e | x.
pub fn valuation(p: u64, x: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if x == 0 {
        return Err(Error::InvalidParameter("valuation of 0 is undefined".into()));
    }
    let mut e = 0;
    let mut x = x;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    Ok(e)
}

/// All d-friable numbers ≤ `limit` (naturals whose prime factors are among the
/// first `d` primes), ascending, starting with s_1 = 1.
///
/// Generated by a priority-queue merge of the multiplication lattice rather
/// than trial division: the limit may be large while the list stays short.
pub fn friable_numbers(d: usize, limit: u64) -> Result<Vec<u64>> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "friable_numbers needs at least one prime (d ≥ 1)".into(),
        ));
    }
    if limit == 0 {
        return Err(Error::InvalidParameter("limit must be ≥ 1".into()));
    }
    let ps = primes(d);
    let mut heap: BinaryHeap<Reverse<u64>> = BinaryHeap::new();
    heap.push(Reverse(1));
    let mut out = Vec::new();
    while let Some(Reverse(s)) = heap.pop() {
        if out.last() == Some(&s) {
            continue; // duplicate path through the lattice
        }
        out.push(s);
        for &p in &ps {
            if let Some(next) = s.checked_mul(p) {
                if next <= limit {
                    heap.push(Reverse(next));
                }
            }
        }
    }
    Ok(out)
}

/// The first `count` d-friable numbers s_1 = 1 < s_2 < …, regardless of size.
pub fn friable_prefix(d: usize, count: usize) -> Result<Vec<u64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut limit = 1u64 << 10;
    loop {
        let list = friable_numbers(d, limit)?;
        if list.len() >= count {
            return Ok(list[..count].to_vec());
        }
        limit = limit.checked_mul(limit).ok_or_else(|| {
            Error::InvalidParameter(format!("friable prefix of length {count} overflows u64"))
        })?;
    }
}
