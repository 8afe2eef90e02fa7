//! Proscribed pattern families and enumeration of their instances inside a
//! ground set.
//!
//! A *family* 𝒜 is a set of forbidden finite subsets of ℕ (k-term arithmetic
//! or geometric progressions, geometric squares, …). The solver works with the
//! instances of 𝒜 that lie inside a concrete ground set X: a subset of X is
//! "free" when it contains no instance.

use std::collections::BTreeSet;
use std::fmt;

use crate::numtheory::{friable_numbers, is_prime};
use crate::{Error, Result};

/// A finite set of naturals inside the ambient interval [1, ground_max].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NaturalSet {
    elements: Vec<u64>,
    ground_max: u64,
}

impl NaturalSet {
    /// Builds a set from arbitrary elements (sorted and deduplicated here).
    pub fn new(elements: impl IntoIterator<Item = u64>, ground_max: u64) -> Result<Self> {
        let mut elements: Vec<u64> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        if let Some(&first) = elements.first() {
            if first == 0 {
                return Err(Error::InvalidParameter(
                    "natural sets contain positive integers only".into(),
                ));
            }
        }
        if let Some(&last) = elements.last() {
            if last > ground_max {
                return Err(Error::InvalidParameter(format!(
                    "element {last} exceeds ground maximum {ground_max}"
                )));
            }
        }
        Ok(NaturalSet {
            elements,
            ground_max,
        })
    }

    /// The interval [1, n].
    pub fn interval(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("interval needs n ≥ 1".into()));
        }
        Ok(NaturalSet {
            elements: (1..=n).collect(),
            ground_max: n,
        })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn ground_max(&self) -> u64 {
        self.ground_max
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// The dilate c∗X = {c·x : x ∈ X}.
    pub fn dilate(&self, c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidParameter("dilation factor must be ≥ 1".into()));
        }
        let ground_max = self.ground_max.checked_mul(c).ok_or_else(|| {
            Error::InvalidParameter("dilated ground maximum overflows".into())
        })?;
        NaturalSet::new(self.elements.iter().map(|&x| x * c), ground_max)
    }

    /// Membership bitmap over [0, ground_max], for O(1) lookups in enumeration.
    fn bitmap(&self) -> Vec<u64> {
        let words = (self.ground_max as usize + 64) / 64;
        let mut bits = vec![0u64; words];
        for &x in &self.elements {
            bits[(x / 64) as usize] |= 1 << (x % 64);
        }
        bits
    }
}

impl fmt::Display for NaturalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// A proscribed family 𝒜 of forbidden subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternFamily {
    /// k-term arithmetic progressions {a, a+e, …, a+(k−1)e}, e ≥ 1.
    Ap { k: u32 },
    /// k-term geometric progressions with integer ratio r ≥ 2.
    GpInt { k: u32 },
    /// k-term geometric progressions with rational ratio q/p > 1 in lowest
    /// terms: {a·p^{k−1−i}·q^i : 0 ≤ i < k} (r and 1/r give the same set).
    GpRat { k: u32 },
    /// Geometric squares {a, ar, as, ars} with integers 1 < r < s.
    GeomSquare,
    /// k-term geometric progressions whose ratio is a positive power of p.
    GpPrimePower { p: u64, k: u32 },
    /// 3-term geometric progressions whose ratio is a d-friable integer ≥ 2.
    GpFriable3 { d: usize },
}

impl PatternFamily {
    pub fn ap(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter("AP needs k ≥ 2".into()));
        }
        Ok(PatternFamily::Ap { k })
    }

    pub fn gp_int(k: u32) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter("GP_INT needs k ≥ 3".into()));
        }
        Ok(PatternFamily::GpInt { k })
    }

    pub fn gp_rat(k: u32) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter("GP_RAT needs k ≥ 3".into()));
        }
        Ok(PatternFamily::GpRat { k })
    }

    pub fn geom_square() -> Self {
        PatternFamily::GeomSquare
    }

    pub fn gp_prime_power(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if k < 3 {
            return Err(Error::InvalidParameter("GP_PRIME_POWER needs k ≥ 3".into()));
        }
        Ok(PatternFamily::GpPrimePower { p, k })
    }

    pub fn gp_friable3(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("GP_FRIABLE3 needs d ≥ 1".into()));
        }
        Ok(PatternFamily::GpFriable3 { d })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PatternFamily::Ap { k } => PatternFamily::ap(k).map(|_| ()),
            PatternFamily::GpInt { k } => PatternFamily::gp_int(k).map(|_| ()),
            PatternFamily::GpRat { k } => PatternFamily::gp_rat(k).map(|_| ()),
            PatternFamily::GeomSquare => Ok(()),
            PatternFamily::GpPrimePower { p, k } => PatternFamily::gp_prime_power(p, k).map(|_| ()),
            PatternFamily::GpFriable3 { d } => PatternFamily::gp_friable3(d).map(|_| ()),
        }
    }
}

impl fmt::Display for PatternFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PatternFamily::Ap { k } => write!(f, "ap(k={k})"),
            PatternFamily::GpInt { k } => write!(f, "gp-int(k={k})"),
            PatternFamily::GpRat { k } => write!(f, "gp-rat(k={k})"),
            PatternFamily::GeomSquare => write!(f, "square"),
            PatternFamily::GpPrimePower { p, k } => write!(f, "pp-gp(p={p},k={k})"),
            PatternFamily::GpFriable3 { d } => write!(f, "friable-gp3(d={d})"),
        }
    }
}

/// All instances of `family` contained in `ground`, in lexicographic order of
/// their sorted element lists, deduplicated.
pub fn enumerate_instances(family: PatternFamily, ground: &NaturalSet) -> Result<Vec<NaturalSet>> {
    let mut out: BTreeSet<Vec<u64>> = BTreeSet::new();
    visit_instances(family, ground, &mut |inst| {
        out.insert(inst.to_vec());
        true
    })?;
    out.into_iter()
        .map(|elts| NaturalSet::new(elts, ground.ground_max()))
        .collect()
}

/// True iff `set` contains no instance of `family` (i.e., set ∈ S_𝒜).
pub fn is_free(set: &NaturalSet, family: PatternFamily) -> Result<bool> {
    let mut free = true;
    visit_instances(family, set, &mut |_| {
        free = false;
        false // stop at the first witness
    })?;
    Ok(free)
}

/// Core enumeration: calls `visit` on each instance (as a sorted slice);
/// `visit` returns false to stop early.
fn visit_instances(
    family: PatternFamily,
    ground: &NaturalSet,
    visit: &mut dyn FnMut(&[u64]) -> bool,
) -> Result<()> {
    family.validate()?;
    if ground.is_empty() {
        return Ok(());
    }
    let gmax = *ground.elements().last().unwrap();
    let bits = ground.bitmap();
    let has = |x: u64| -> bool { bits[(x / 64) as usize] >> (x % 64) & 1 == 1 };

    match family {
        PatternFamily::Ap { k } => {
            let k = k as u64;
            let mut buf = vec![0u64; k as usize];
            for &a in ground.elements() {
                let mut e = 1u64;
                while a + (k - 1) * e <= gmax {
                    let mut all = true;
                    for i in 0..k {
                        let x = a + i * e;
                        if !has(x) {
                            all = false;
                            break;
                        }
                        buf[i as usize] = x;
                    }
                    if all && !visit(&buf) {
                        return Ok(());
                    }
                    e += 1;
                }
            }
        }
        PatternFamily::GpInt { k } => {
            let mut buf = vec![0u64; k as usize];
            for &a in ground.elements() {
                let mut r = 2u64;
                while let Some(top) = checked_geo_top(a, r, k) {
                    if top > gmax {
                        break;
                    }
                    if fill_geo(a, r, k, &has, &mut buf) && !visit(&buf) {
                        return Ok(());
                    }
                    r += 1;
                }
            }
        }
        PatternFamily::GpRat { k } => {
            // a = m·p^{k−1}, ratio q/p in lowest terms, q > p ≥ 1; every term
            // m·p^{k−1−i}·q^i is then an integer. p = 1 recovers integer ratios.
            let mut buf = vec![0u64; k as usize];
            let mut p = 1u64;
            while checked_pow(p + 1, k - 1).map_or(false, |v| v <= gmax) {
                let mut q = p + 1;
                while let Some(qpow) = checked_pow(q, k - 1) {
                    if qpow > gmax {
                        break;
                    }
                    if num_integer::gcd(p, q) == 1 {
                        let mut m = 1u64;
                        while m * qpow <= gmax {
                            let mut all = true;
                            for i in 0..k {
                                // m · p^{k−1−i} · q^i, computed without overflow:
                                // bounded by m·q^{k−1} ≤ gmax.
                                let x = m * p.pow(k - 1 - i) * q.pow(i);
                                if !has(x) {
                                    all = false;
                                    break;
                                }
                                buf[i as usize] = x;
                            }
                            if all && !visit(&buf) {
                                return Ok(());
                            }
                            m += 1;
                        }
                    }
                    q += 1;
                }
                p += 1;
            }
        }
        PatternFamily::GeomSquare => {
            for &a in ground.elements() {
                let mut r = 2u64;
                while r
                    .checked_mul(r + 1)
                    .and_then(|rs| a.checked_mul(rs))
                    .map_or(false, |v| v <= gmax)
                {
                    if has(a * r) {
                        let mut s = r + 1;
                        while a * r * s <= gmax {
                            if has(a * s) && has(a * r * s) && !visit(&[a, a * r, a * s, a * r * s])
                            {
                                return Ok(());
                            }
                            s += 1;
                        }
                    }
                    r += 1;
                }
            }
        }
        PatternFamily::GpPrimePower { p, k } => {
            let mut buf = vec![0u64; k as usize];
            let mut e = 1u32;
            loop {
                let r = match checked_pow(p, e) {
                    Some(r) if checked_pow(r, k - 1).map_or(false, |v| v <= gmax) => r,
                    _ => break,
                };
                for &a in ground.elements() {
                    match checked_geo_top(a, r, k) {
                        Some(top) if top <= gmax => {
                            if fill_geo(a, r, k, &has, &mut buf) && !visit(&buf) {
                                return Ok(());
                            }
                        }
                        _ => break,
                    }
                }
                e += 1;
            }
        }
        PatternFamily::GpFriable3 { d } => {
            let ratio_cap = (gmax as f64).sqrt() as u64 + 1;
            for t in friable_numbers(d, ratio_cap)? {
                if t < 2 || t * t > gmax {
                    continue;
                }
                for &a in ground.elements() {
                    match a.checked_mul(t * t) {
                        Some(top) if top <= gmax => {
                            if has(a * t) && has(top) && !visit(&[a, a * t, top]) {
                                return Ok(());
                            }
                        }
                        _ => break,
                    }
                }
            }
        }
    }
    Ok(())
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

/// a·r^{k−1}, or None on overflow.
fn checked_geo_top(a: u64, r: u64, k: u32) -> Option<u64> {
    checked_pow(r, k - 1).and_then(|rp| a.checked_mul(rp))
}

/// Fills buf with a, ar, …, ar^{k−1} and reports whether all lie in the ground.
fn fill_geo(a: u64, r: u64, k: u32, has: &dyn Fn(u64) -> bool, buf: &mut [u64]) -> bool {
    let mut x = a;
    for slot in buf.iter_mut().take(k as usize) {
        if !has(x) {
            return false;
        }
        *slot = x;
        x = x.saturating_mul(r);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(v: &[&[u64]], gmax: u64) -> Vec<NaturalSet> {
        v.iter()
            .map(|e| NaturalSet::new(e.iter().copied(), gmax).unwrap())
            .collect()
    }

    #[test]
    fn natural_set_basics() {
        let s = NaturalSet::new([3, 1, 2, 2], 5).unwrap();
        assert_eq!(s.elements(), &[1, 2, 3]);
        assert!(s.contains(2) && !s.contains(4));
        assert!(NaturalSet::new([0], 5).is_err());
        assert!(NaturalSet::new([6], 5).is_err());
        assert_eq!(NaturalSet::interval(4).unwrap().len(), 4);
        assert_eq!(s.dilate(3).unwrap().elements(), &[3, 6, 9]);
        assert_eq!(format!("{s}"), "{1, 2, 3}");
    }

    #[test]
    fn family_validation() {
        assert!(PatternFamily::ap(1).is_err());
        assert!(PatternFamily::ap(2).is_ok());
        assert!(PatternFamily::gp_int(2).is_err());
        assert!(PatternFamily::gp_rat(2).is_err());
        assert!(PatternFamily::gp_prime_power(4, 3).is_err());
        assert!(PatternFamily::gp_prime_power(3, 3).is_ok());
        assert!(PatternFamily::gp_friable3(0).is_err());
    }

    #[test]
    fn gp_int_on_first_nine() {
        let ground = NaturalSet::interval(9).unwrap();
        let got = enumerate_instances(PatternFamily::gp_int(3).unwrap(), &ground).unwrap();
        assert_eq!(got, sets(&[&[1, 2, 4], &[1, 3, 9], &[2, 4, 8]], 9));
    }

    #[test]
    fn gp_rat_on_first_nine() {
        let ground = NaturalSet::interval(9).unwrap();
        let got = enumerate_instances(PatternFamily::gp_rat(3).unwrap(), &ground).unwrap();
        // adds {4,6,9}, ratio 3/2
        assert_eq!(got, sets(&[&[1, 2, 4], &[1, 3, 9], &[2, 4, 8], &[4, 6, 9]], 9));
    }

    #[test]
    fn squares_up_to_twelve() {
        let ground = NaturalSet::interval(12).unwrap();
        let got = enumerate_instances(PatternFamily::GeomSquare, &ground).unwrap();
        assert_eq!(
            got,
            sets(
                &[
                    &[1, 2, 3, 6],
                    &[1, 2, 4, 8],
                    &[1, 2, 5, 10],
                    &[1, 2, 6, 12],
                    &[1, 3, 4, 12],
                    &[2, 4, 6, 12],
                ],
                12
            )
        );
        for inst in &got {
            assert_eq!(inst.len(), 4, "squares always have 4 elements");
        }
    }

    #[test]
    fn is_free_examples() {
        let f = PatternFamily::gp_int(3).unwrap();
        let free = NaturalSet::new([1, 2, 3, 5, 6, 7], 7).unwrap();
        assert!(is_free(&free, f).unwrap());
        let not_free = NaturalSet::new([1, 2, 4], 4).unwrap();
        assert!(!is_free(&not_free, f).unwrap());
    }

    #[test]
    fn upper_sixth_interval_has_no_squares() {
        // {x : n/6 < x ≤ n} forces ars > n for any square with a in the set.
        let n = 600u64;
        let set = NaturalSet::new((n / 6 + 1)..=n, n).unwrap();
        assert!(is_free(&set, PatternFamily::GeomSquare).unwrap());
    }

    #[test]
    fn instances_are_subsets_and_satisfy_equations() {
        let ground = NaturalSet::new((1..=40).filter(|x| x % 3 != 0), 40).unwrap();
        for inst in enumerate_instances(PatternFamily::gp_rat(3).unwrap(), &ground).unwrap() {
            let e = inst.elements();
            assert!(e.iter().all(|&x| ground.contains(x)));
            // consecutive-ratio equality: e1² = e0·e2 for a 3-term GP
            assert_eq!(e[1] * e[1], e[0] * e[2]);
        }
    }

    #[test]
    fn enumeration_is_monotone_in_ground() {
        let big = NaturalSet::interval(30).unwrap();
        let small = NaturalSet::new((1..=30).filter(|x| x % 2 == 0), 30).unwrap();
        for f in [
            PatternFamily::ap(3).unwrap(),
            PatternFamily::gp_int(3).unwrap(),
            PatternFamily::gp_rat(3).unwrap(),
            PatternFamily::GeomSquare,
            PatternFamily::gp_prime_power(2, 3).unwrap(),
            PatternFamily::gp_friable3(2).unwrap(),
        ] {
            let inner = enumerate_instances(f, &small).unwrap();
            let outer = enumerate_instances(f, &big).unwrap();
            for i in &inner {
                assert!(outer.contains(i), "{f}: {i} missing from superset run");
            }
        }
    }

    #[test]
    fn gp_int_instances_are_gp_rat_instances() {
        for n in [10u64, 25, 40] {
            let ground = NaturalSet::interval(n).unwrap();
            let int3 = enumerate_instances(PatternFamily::gp_int(3).unwrap(), &ground).unwrap();
            let rat3 = enumerate_instances(PatternFamily::gp_rat(3).unwrap(), &ground).unwrap();
            for i in &int3 {
                assert!(rat3.contains(i), "n={n}: {i} not in rational family");
            }
        }
    }

    #[test]
    fn prime_power_family_on_small_interval() {
        let ground = NaturalSet::interval(16).unwrap();
        let got = enumerate_instances(PatternFamily::gp_prime_power(2, 3).unwrap(), &ground).unwrap();
        // ratio 2: {1,2,4},{2,4,8},{3,6,12},{4,8,16}; ratio 4: {1,4,16}
        assert_eq!(
            got,
            sets(
                &[
                    &[1, 2, 4],
                    &[1, 4, 16],
                    &[2, 4, 8],
                    &[3, 6, 12],
                    &[4, 8, 16],
                ],
                16
            )
        );
    }

    #[test]
    fn friable3_family_matches_prime_power_at_d1() {
        let ground = NaturalSet::interval(64).unwrap();
        let friable = enumerate_instances(PatternFamily::gp_friable3(1).unwrap(), &ground).unwrap();
        let pp = enumerate_instances(PatternFamily::gp_prime_power(2, 3).unwrap(), &ground).unwrap();
        assert_eq!(friable, pp, "d=1 friable ratios are exactly powers of 2");
    }

    #[test]
    fn ap_instances_small() {
        let ground = NaturalSet::interval(6).unwrap();
        let got = enumerate_instances(PatternFamily::ap(3).unwrap(), &ground).unwrap();
        assert_eq!(
            got,
            sets(
                &[
                    &[1, 2, 3],
                    &[1, 3, 5],
                    &[2, 3, 4],
                    &[2, 4, 6],
                    &[3, 4, 5],
                    &[4, 5, 6],
                ],
                6
            )
        );
    }
}
