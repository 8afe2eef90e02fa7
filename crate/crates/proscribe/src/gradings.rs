//! Gradings of [1, n]: leveled systems of cells that drive the density
//! bounds.
//!
//! A grading stacks collections 𝓕_0, 𝓕_1, … of subsets of [n]: 𝓕_0 is all
//! singletons, each level is pairwise disjoint, adjacent levels nest cleanly,
//! and all cells of a level have the same free-subset number. Two structural
//! flavors exist: *expansion k* (each level-(i+1) cell is a disjoint union of
//! k level-i cells) and *growth r* (each level-(i+1) cell adds r fresh
//! elements to a level-i cell). The four builders here realize the gradings
//! behind the geometric-progression, prime-power, geometric-square, and
//! friable-ratio bounds.
//!
//! 𝓕_0 is kept implicit (it is determined by n), so building a grading on
//! [10^6] does not materialize a million singleton cells.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::numtheory::{friable_numbers, primes, primorial};
use crate::patterns::{NaturalSet, PatternFamily};
use crate::solver::{solve_ground, ProofStatus, SolverOptions};
use crate::{Error, Result};

/// Construction parameters of a built cell: the coprime base b, the scale
/// exponent (ℓ for the GP grading, the 4-power i for the square grading,
/// 0 for growth gradings), and the structure depth (level) it was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellMeta {
    pub base: u64,
    pub scale: u32,
    pub depth: u32,
}

/// One member f of some 𝓕_level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    elements: Vec<u64>,
    level: u32,
    meta: Option<CellMeta>,
}

impl Cell {
    pub fn new(elements: impl IntoIterator<Item = u64>, level: u32) -> Result<Self> {
        Self::build(elements, level, None)
    }

    fn with_meta(elements: impl IntoIterator<Item = u64>, level: u32, meta: CellMeta) -> Result<Self> {
        Self::build(elements, level, Some(meta))
    }

    fn build(
        elements: impl IntoIterator<Item = u64>,
        level: u32,
        meta: Option<CellMeta>,
    ) -> Result<Self> {
        let mut elements: Vec<u64> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() || elements[0] == 0 {
            return Err(Error::InvalidParameter(
                "cells are nonempty sets of positive integers".into(),
            ));
        }
        if level == 0 && elements.len() != 1 {
            return Err(Error::InvalidParameter("level-0 cells are singletons".into()));
        }
        Ok(Cell {
            elements,
            level,
            meta,
        })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn meta(&self) -> Option<CellMeta> {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() // construction guarantees nonempty
    }

    fn max(&self) -> u64 {
        *self.elements.last().unwrap()
    }

    fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    fn is_subset_of(&self, other: &Cell) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    fn is_disjoint_from(&self, other: &Cell) -> bool {
        !self.elements.iter().any(|&x| other.contains(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradingKind {
    Expansion(u32),
    Growth(u32),
}

/// A grading of [1, n]; `upper_levels[i]` holds 𝓕_{i+1} (𝓕_0 is implicit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    n: u64,
    kind: GradingKind,
    upper_levels: Vec<Vec<Cell>>,
}

impl Grading {
    /// Wraps explicit upper levels (𝓕_1, 𝓕_2, …). Basic shape only — the
    /// grading *conditions* are checked by [`verify_grading`], so invalid
    /// gradings can be represented (and then reported on).
    pub fn new(n: u64, kind: GradingKind, mut upper_levels: Vec<Vec<Cell>>) -> Result<Self> {
        match kind {
            GradingKind::Expansion(k) if k < 2 => {
                return Err(Error::InvalidParameter("expansion needs k ≥ 2".into()))
            }
            GradingKind::Growth(r) if r < 1 => {
                return Err(Error::InvalidParameter("growth needs r ≥ 1".into()))
            }
            _ => {}
        }
        while upper_levels.last().is_some_and(Vec::is_empty) {
            upper_levels.pop();
        }
        for (i, level) in upper_levels.iter().enumerate() {
            if level.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "level {} is empty below a nonempty level",
                    i + 1
                )));
            }
            for cell in level {
                if cell.level != i as u32 + 1 {
                    return Err(Error::InvalidParameter(format!(
                        "cell labeled level {} stored in level {}",
                        cell.level,
                        i + 1
                    )));
                }
                if cell.max() > n {
                    return Err(Error::InvalidParameter(format!(
                        "cell element {} exceeds n = {n}",
                        cell.max()
                    )));
                }
            }
        }
        Ok(Grading {
            n,
            kind,
            upper_levels,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn kind(&self) -> GradingKind {
        self.kind
    }

    /// Highest nonempty level index D (0 when only 𝓕_0 is present).
    pub fn depth(&self) -> u32 {
        self.upper_levels.len() as u32
    }

    /// 𝓕_i for i ≥ 1; empty past the depth.
    pub fn level(&self, i: u32) -> &[Cell] {
        if i == 0 || i > self.depth() {
            &[]
        } else {
            &self.upper_levels[i as usize - 1]
        }
    }

    /// [|𝓕_0|, |𝓕_1|, …, |𝓕_D|]; |𝓕_0| = n by construction.
    pub fn level_sizes(&self) -> Vec<u64> {
        std::iter::once(self.n)
            .chain(self.upper_levels.iter().map(|l| l.len() as u64))
            .collect()
    }
}

fn coprime_bases(limit: u64, modulus: u64) -> impl Iterator<Item = u64> {
    (1..=limit).filter(move |&b| num_integer::gcd(b, modulus) == 1)
}

/// Grading behind the integer-ratio GP bound: level-d cells are dilates
/// 2^{k(ℓ−1)}·b ∗ a_d of the template a_d = {∏ pᵢ^{eᵢ} : 0 ≤ eᵢ < k} over the
/// first d primes, with b coprime to the primorial P_d. Expansion k.
pub fn build_gp_grading(n: u64, k: u32) -> Result<Grading> {
    if n == 0 {
        return Err(Error::InvalidParameter("gradings need n ≥ 1".into()));
    }
    if k < 3 {
        return Err(Error::InvalidParameter("the GP grading needs k ≥ 3".into()));
    }
    let mut upper_levels = Vec::new();
    for d in 1u32.. {
        let template = gp_template(d as usize, k)?;
        let top = *template.last().unwrap(); // P_d^{k−1}
        if top > n {
            break;
        }
        let mut cells = Vec::new();
        let p_d = primorial_u64(d as usize)?;
        let mut scale = 1u64; // 2^{k(ℓ−1)}
        let mut ell = 1u32;
        while scale <= n / top {
            for b in coprime_bases(n / (top * scale), p_d) {
                let factor = scale * b;
                let cell = Cell::with_meta(
                    template.iter().map(|&t| t * factor),
                    d,
                    CellMeta {
                        base: b,
                        scale: ell,
                        depth: d,
                    },
                )?;
                debug_assert!(cell.max() <= n);
                cells.push(cell);
            }
            match scale.checked_mul(1 << k) {
                Some(next) => scale = next,
                None => break,
            }
            ell += 1;
        }
        cells.sort_by_key(|c| c.elements[0]);
        upper_levels.push(cells);
    }
    Grading::new(n, GradingKind::Expansion(k), upper_levels)
}

/// a_d = all products ∏ pᵢ^{eᵢ} with 0 ≤ eᵢ < k over the first d primes.
fn gp_template(d: usize, k: u32) -> Result<Vec<u64>> {
    let ps = primes(d);
    let mut out = vec![1u64];
    for &p in &ps {
        let mut next = Vec::with_capacity(out.len() * k as usize);
        for &x in &out {
            let mut pe = 1u64;
            for _ in 0..k {
                next.push(x.checked_mul(pe).ok_or_else(|| {
                    Error::InvalidParameter("GP grading template overflows".into())
                })?);
                pe = match pe.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        out = next;
    }
    out.sort_unstable();
    Ok(out)
}

fn primorial_u64(d: usize) -> Result<u64> {
    u64::try_from(&primorial(d))
        .map_err(|_| Error::InvalidParameter("primorial exceeds u64".into()))
}

/// Grading behind the prime-power-ratio bound: level-i cells are
/// b ∗ {1, p, …, p^i} with (b, p) = 1 and b ≤ n/p^i. Growth 1.
pub fn build_prime_power_grading(n: u64, p: u64, k: u32) -> Result<Grading> {
    PatternFamily::gp_prime_power(p, k)?; // validates p prime, k ≥ 3
    if n == 0 {
        return Err(Error::InvalidParameter("gradings need n ≥ 1".into()));
    }
    let mut upper_levels = Vec::new();
    let mut power = p; // p^i
    for i in 1u32.. {
        if power > n {
            break;
        }
        let mut cells = Vec::new();
        for b in coprime_bases(n / power, p) {
            let mut elements = Vec::with_capacity(i as usize + 1);
            let mut x = b;
            for _ in 0..=i {
                elements.push(x);
                x = x.saturating_mul(p);
            }
            cells.push(Cell::with_meta(
                elements,
                i,
                CellMeta {
                    base: b,
                    scale: 0,
                    depth: i,
                },
            )?);
        }
        cells.sort_by_key(|c| c.elements[0]);
        upper_levels.push(cells);
        power = match power.checked_mul(p) {
            Some(v) => v,
            None => break,
        };
    }
    Grading::new(n, GradingKind::Growth(1), upper_levels)
}

/// Grading behind the geometric-square bound: level-d cells are
/// b·4^i ∗ a_d for the squarefree template a_d = {∏ pᵢ^{eᵢ} : eᵢ ∈ {0,1}},
/// b coprime to P_d and 4^i ≤ n/P_d. Expansion 2.
pub fn build_square_grading(n: u64) -> Result<Grading> {
    if n == 0 {
        return Err(Error::InvalidParameter("gradings need n ≥ 1".into()));
    }
    let mut upper_levels = Vec::new();
    for d in 1u32.. {
        let template = gp_template(d as usize, 2)?; // squarefree divisors of P_d
        let p_d = *template.last().unwrap(); // = P_d
        if p_d > n {
            break;
        }
        let mut cells = Vec::new();
        let mut pow4 = 1u64;
        let mut i = 0u32;
        while pow4 <= n / p_d {
            for b in coprime_bases(n / (p_d * pow4), p_d) {
                let factor = b * pow4;
                cells.push(Cell::with_meta(
                    template.iter().map(|&t| t * factor),
                    d,
                    CellMeta {
                        base: b,
                        scale: i,
                        depth: d,
                    },
                )?);
            }
            pow4 = match pow4.checked_mul(4) {
                Some(v) => v,
                None => break,
            };
            i += 1;
        }
        cells.sort_by_key(|c| c.elements[0]);
        upper_levels.push(cells);
    }
    Grading::new(n, GradingKind::Expansion(2), upper_levels)
}

/// Grading behind the friable-ratio bound: with s_1 < s_2 < … the d-friable
/// numbers, level-i cells are b ∗ {s_1, …, s_{i+1}} with (b, P_d) = 1 and
/// b ≤ n/s_{i+1}. Growth 1.
pub fn build_friable_grading(n: u64, d: usize) -> Result<Grading> {
    if n == 0 {
        return Err(Error::InvalidParameter("gradings need n ≥ 1".into()));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("friable grading needs d ≥ 1".into()));
    }
    let s = friable_numbers(d, n)?;
    let p_d = primorial_u64(d)?;
    let mut upper_levels = Vec::new();
    for i in 1..s.len() as u32 {
        let prefix = &s[..=i as usize];
        let top = s[i as usize];
        let mut cells = Vec::new();
        for b in coprime_bases(n / top, p_d) {
            cells.push(Cell::with_meta(
                prefix.iter().map(|&t| t * b),
                i,
                CellMeta {
                    base: b,
                    scale: 0,
                    depth: i,
                },
            )?);
        }
        cells.sort_by_key(|c| c.elements[0]);
        upper_levels.push(cells);
    }
    Grading::new(n, GradingKind::Growth(1), upper_levels)
}

/// Outcome of one grading condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionOutcome {
    Pass,
    Fail(String),
    NotApplicable,
}

impl ConditionOutcome {
    pub fn is_ok(&self) -> bool {
        !matches!(self, ConditionOutcome::Fail(_))
    }
}

/// Per-condition report for the six grading conditions (index 0 ↔ condition 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub conditions: [ConditionOutcome; 6],
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(ConditionOutcome::is_ok)
    }
}

/// Checks the six grading conditions.
///
/// Condition 4 (equal free-subset numbers within a level) is solved exactly
/// on every cell when `check_ramsey` is set; otherwise cells are required to
/// be dilates of one level template, which implies it for dilation-closed
/// families.
pub fn verify_grading(
    grading: &Grading,
    family: PatternFamily,
    check_ramsey: bool,
) -> Result<ConditionReport> {
    let mut conditions = [
        ConditionOutcome::Pass, // (1) 𝓕_0 implicit: holds by representation
        check_pairwise_disjoint(grading),
        check_nesting(grading),
        check_equal_ramsey(grading, family, check_ramsey)?,
        ConditionOutcome::NotApplicable,
        ConditionOutcome::NotApplicable,
    ];
    match grading.kind() {
        GradingKind::Expansion(k) => conditions[4] = check_expansion(grading, k),
        GradingKind::Growth(r) => conditions[5] = check_growth(grading, r),
    }
    Ok(ConditionReport { conditions })
}

fn check_pairwise_disjoint(grading: &Grading) -> ConditionOutcome {
    for i in 1..=grading.depth() {
        let mut owner: BTreeMap<u64, usize> = BTreeMap::new();
        for (ci, cell) in grading.level(i).iter().enumerate() {
            for &x in cell.elements() {
                if let Some(&other) = owner.get(&x) {
                    return ConditionOutcome::Fail(format!(
                        "level {i}: cells #{other} and #{ci} share element {x}"
                    ));
                }
                owner.insert(x, ci);
            }
        }
    }
    ConditionOutcome::Pass
}

fn check_nesting(grading: &Grading) -> ConditionOutcome {
    // Level 0 vs 1 is trivial (singletons). Check each adjacent upper pair.
    for i in 1..grading.depth() {
        for (li, lower) in grading.level(i).iter().enumerate() {
            for (ui, upper) in grading.level(i + 1).iter().enumerate() {
                if !lower.is_subset_of(upper) && !lower.is_disjoint_from(upper) {
                    return ConditionOutcome::Fail(format!(
                        "levels {i}/{}: cell #{li} neither inside nor disjoint from cell #{ui}",
                        i + 1
                    ));
                }
            }
        }
    }
    ConditionOutcome::Pass
}

fn check_equal_ramsey(
    grading: &Grading,
    family: PatternFamily,
    check_ramsey: bool,
) -> Result<ConditionOutcome> {
    for i in 1..=grading.depth() {
        let cells = grading.level(i);
        if check_ramsey {
            let mut first: Option<(u64, usize)> = None;
            for (ci, cell) in cells.iter().enumerate() {
                let ground = NaturalSet::new(cell.elements().iter().copied(), grading.n())?;
                let solve = solve_ground(&ground, family, &SolverOptions::default())?;
                if solve.result.proof_status != ProofStatus::Exact {
                    return Err(Error::BudgetExceeded {
                        explored: solve.result.nodes_explored,
                        budget: SolverOptions::default().node_budget,
                        best: solve.result.optimum,
                    });
                }
                match first {
                    None => first = Some((solve.result.optimum, ci)),
                    Some((g0, c0)) if g0 != solve.result.optimum => {
                        return Ok(ConditionOutcome::Fail(format!(
                            "level {i}: cells #{c0} and #{ci} have free-subset numbers {g0} ≠ {}",
                            solve.result.optimum
                        )));
                    }
                    _ => {}
                }
            }
        } else {
            // structural: every cell is a dilate of the level's first cell,
            // normalized by its least element
            let Some(base) = cells.first() else { continue };
            let template: Vec<u64> = normalize(base);
            for (ci, cell) in cells.iter().enumerate() {
                if normalize(cell) != template {
                    return Ok(ConditionOutcome::Fail(format!(
                        "level {i}: cell #{ci} is not a dilate of cell #0"
                    )));
                }
            }
        }
    }
    Ok(ConditionOutcome::Pass)
}

/// Divides a cell by its least element; dilates of one template normalize
/// identically (non-dilates may produce non-integer ratios, encoded as 0).
fn normalize(cell: &Cell) -> Vec<u64> {
    let min = cell.elements()[0];
    cell.elements()
        .iter()
        .map(|&x| if x % min == 0 { x / min } else { 0 })
        .collect()
}

fn check_expansion(grading: &Grading, k: u32) -> ConditionOutcome {
    for i in 0..grading.depth() {
        for (ui, upper) in grading.level(i + 1).iter().enumerate() {
            if i == 0 {
                if upper.len() != k as usize {
                    return ConditionOutcome::Fail(format!(
                        "level 1: cell #{ui} has {} elements, not k = {k} singletons",
                        upper.len()
                    ));
                }
                continue;
            }
            let mut count = 0usize;
            let mut covered = 0usize;
            for lower in grading.level(i) {
                if lower.is_subset_of(upper) {
                    count += 1;
                    covered += lower.len();
                }
            }
            if count != k as usize || covered != upper.len() {
                return ConditionOutcome::Fail(format!(
                    "levels {i}/{}: cell #{ui} is a union of {count} level-{i} cells \
                     covering {covered}/{} elements (need exactly k = {k}, full cover)",
                    i + 1,
                    upper.len()
                ));
            }
        }
    }
    ConditionOutcome::Pass
}

fn check_growth(grading: &Grading, r: u32) -> ConditionOutcome {
    // Elements appearing in any of 𝓕_1..𝓕_i, built up level by level.
    let mut covered: BTreeSet<u64> = BTreeSet::new();
    for i in 0..grading.depth() {
        for (ui, upper) in grading.level(i + 1).iter().enumerate() {
            let ok = if i == 0 {
                upper.len() == r as usize + 1
            } else {
                grading.level(i).iter().any(|lower| {
                    lower.is_subset_of(upper)
                        && upper.len() == lower.len() + r as usize
                        && upper
                            .elements()
                            .iter()
                            .filter(|x| !lower.contains(**x))
                            .all(|x| !covered.contains(x))
                })
            };
            if !ok {
                return ConditionOutcome::Fail(format!(
                    "levels {i}/{}: cell #{ui} does not extend a level-{i} cell by {r} fresh \
                     element(s) outside all lower levels",
                    i + 1
                ));
            }
        }
        for cell in grading.level(i + 1) {
            covered.extend(cell.elements().iter().copied());
        }
    }
    ConditionOutcome::Pass
}

/// One part A_b of the partition induced by a grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub level: u32,
    pub elements: Vec<u64>,
}

/// The partition 𝒫 = {A_b : b ∈ [n]} (A_b = the deepest cell containing b)
/// together with the per-level part counts α_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionView {
    pub parts: Vec<Part>,
    pub alpha: Vec<u64>,
}

/// Builds the partition view; requires conditions (1)–(3) to hold.
pub fn partition_from_grading(grading: &Grading) -> Result<PartitionView> {
    for outcome in [check_pairwise_disjoint(grading), check_nesting(grading)] {
        if let ConditionOutcome::Fail(why) = outcome {
            return Err(Error::GradingPrecondition(why));
        }
    }
    // Deepest level claiming each element wins.
    let mut claimed: BTreeMap<u64, (u32, usize)> = BTreeMap::new();
    for i in 1..=grading.depth() {
        for (ci, cell) in grading.level(i).iter().enumerate() {
            for &x in cell.elements() {
                claimed.insert(x, (i, ci));
            }
        }
    }
    let mut alpha = vec![0u64; grading.depth() as usize + 1];
    let mut parts = Vec::new();
    let mut used: BTreeSet<(u32, usize)> = BTreeSet::new();
    let mut covered = 0u64;
    for b in 1..=grading.n() {
        match claimed.get(&b) {
            None => {
                alpha[0] += 1;
                parts.push(Part {
                    level: 0,
                    elements: vec![b],
                });
                covered += 1;
            }
            Some(&(level, ci)) => {
                if used.insert((level, ci)) {
                    let cell = &grading.level(level)[ci];
                    alpha[level as usize] += 1;
                    parts.push(Part {
                        level,
                        elements: cell.elements().to_vec(),
                    });
                    covered += cell.len() as u64;
                }
            }
        }
    }
    if covered != grading.n() {
        return Err(Error::GradingPrecondition(format!(
            "induced parts cover {covered} elements of [{}]: deepest-cell \
             assignment did not partition the ground set",
            grading.n()
        )));
    }
    Ok(PartitionView { parts, alpha })
}

/// Both sides of the expansion-k aggregation identity
/// Σ αᵢRᵢ = R₀·Σ kⁱαᵢ − Σ_{i≥1} (kR_{i−1}−R_i)·Σ_{j≥i} k^{j−i}αⱼ,
/// evaluated independently in exact arithmetic.
pub fn algebra_identity_check(alpha: &[u64], r: &[u64], k: u64) -> Result<bool> {
    if alpha.len() != r.len() {
        return Err(Error::LengthMismatch(format!(
            "alpha has {} entries, R has {}",
            alpha.len(),
            r.len()
        )));
    }
    let alpha: Vec<BigInt> = alpha.iter().map(|&a| BigInt::from(a)).collect();
    let r: Vec<BigInt> = r.iter().map(|&x| BigInt::from(x)).collect();
    let k = BigInt::from(k);
    let lhs: BigInt = alpha.iter().zip(&r).map(|(a, ri)| a * ri).sum();
    let mut weighted = BigInt::from(0); // Σ k^i α_i
    let mut kpow = BigInt::from(1);
    for a in &alpha {
        weighted += a * &kpow;
        kpow *= &k;
    }
    let mut rhs = &r[0] * &weighted;
    for i in 1..alpha.len() {
        // Σ_{j≥i} k^{j−i} α_j
        let mut tail = BigInt::from(0);
        let mut kpow = BigInt::from(1);
        for a in &alpha[i..] {
            tail += a * &kpow;
            kpow *= &k;
        }
        rhs -= (&k * &r[i - 1] - &r[i]) * tail;
    }
    Ok(lhs == rhs)
}

/// Growth-r analogue:
/// Σ αⱼRⱼ = R₀·Σ αⱼ + r·Σ jαⱼ − Σ_{i≥1} (r+R_{i−1}−R_i)·Σ_{j≥i} αⱼ.
pub fn growth_identity_check(alpha: &[u64], r_vals: &[u64], growth: u64) -> Result<bool> {
    if alpha.len() != r_vals.len() {
        return Err(Error::LengthMismatch(format!(
            "alpha has {} entries, R has {}",
            alpha.len(),
            r_vals.len()
        )));
    }
    let alpha: Vec<BigInt> = alpha.iter().map(|&a| BigInt::from(a)).collect();
    let rv: Vec<BigInt> = r_vals.iter().map(|&x| BigInt::from(x)).collect();
    let growth = BigInt::from(growth);
    let lhs: BigInt = alpha.iter().zip(&rv).map(|(a, ri)| a * ri).sum();
    let total: BigInt = alpha.iter().sum();
    let weighted: BigInt = alpha
        .iter()
        .enumerate()
        .map(|(j, a)| a * BigInt::from(j))
        .sum();
    let mut rhs = &rv[0] * total + &growth * weighted;
    for i in 1..alpha.len() {
        let tail: BigInt = alpha[i..].iter().sum();
        rhs -= (&growth + &rv[i - 1] - &rv[i]) * tail;
    }
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell_sets(cells: &[Cell]) -> Vec<Vec<u64>> {
        cells.iter().map(|c| c.elements().to_vec()).collect()
    }

    #[test]
    fn gp_grading_on_seven() {
        let g = build_gp_grading(7, 3).unwrap();
        assert_eq!(g.depth(), 1);
        assert_eq!(cell_sets(g.level(1)), vec![vec![1, 2, 4]]);
        assert_eq!(g.level_sizes(), vec![7, 1]);
    }

    #[test]
    fn gp_grading_on_thirty_two() {
        let g = build_gp_grading(32, 3).unwrap();
        assert_eq!(g.depth(), 1);
        assert_eq!(
            cell_sets(g.level(1)),
            vec![
                vec![1, 2, 4],
                vec![3, 6, 12],
                vec![5, 10, 20],
                vec![7, 14, 28],
                vec![8, 16, 32],
            ]
        );
        assert_eq!(g.level_sizes(), vec![32, 5]);
        let meta = g.level(1)[4].meta().unwrap();
        assert_eq!((meta.base, meta.scale), (1, 2), "8∗{{1,2,4}} comes from ℓ=2");
    }

    #[test]
    fn gp_grading_trivial() {
        let g = build_gp_grading(1, 3).unwrap();
        assert_eq!(g.depth(), 0);
        assert_eq!(g.level_sizes(), vec![1]);
    }

    #[test]
    fn prime_power_grading_on_eight() {
        let g = build_prime_power_grading(8, 2, 3).unwrap();
        assert_eq!(g.level_sizes(), vec![8, 2, 1, 1]);
        assert_eq!(cell_sets(g.level(1)), vec![vec![1, 2], vec![3, 6]]);
        assert_eq!(cell_sets(g.level(2)), vec![vec![1, 2, 4]]);
        assert_eq!(cell_sets(g.level(3)), vec![vec![1, 2, 4, 8]]);
    }

    #[test]
    fn prime_power_grading_small_cases() {
        let g = build_prime_power_grading(5, 3, 3).unwrap();
        assert_eq!(cell_sets(g.level(1)), vec![vec![1, 3]]);
        assert_eq!(g.depth(), 1);
        assert_eq!(build_prime_power_grading(2, 5, 3).unwrap().depth(), 0);
        assert!(build_prime_power_grading(8, 4, 3).is_err());
    }

    #[test]
    fn square_grading_examples() {
        let g = build_square_grading(6).unwrap();
        assert_eq!(cell_sets(g.level(1)), vec![vec![1, 2], vec![3, 6]]);
        assert_eq!(cell_sets(g.level(2)), vec![vec![1, 2, 3, 6]]);
        let g3 = build_square_grading(3).unwrap();
        assert_eq!(cell_sets(g3.level(1)), vec![vec![1, 2]]);
        assert_eq!(g3.depth(), 1);
        assert_eq!(build_square_grading(1).unwrap().depth(), 0);
    }

    #[test]
    fn friable_grading_matches_prime_power_at_d1() {
        let friable = build_friable_grading(8, 1).unwrap();
        let pp = build_prime_power_grading(8, 2, 3).unwrap();
        assert_eq!(friable.level_sizes(), pp.level_sizes());
        for i in 1..=friable.depth() {
            assert_eq!(cell_sets(friable.level(i)), cell_sets(pp.level(i)));
        }
    }

    #[test]
    fn friable_grading_on_six() {
        let g = build_friable_grading(6, 2).unwrap();
        assert_eq!(cell_sets(g.level(1)), vec![vec![1, 2]]);
        assert_eq!(cell_sets(g.level(2)), vec![vec![1, 2, 3]]);
        assert_eq!(cell_sets(g.level(3)), vec![vec![1, 2, 3, 4]]);
        assert_eq!(cell_sets(g.level(4)), vec![vec![1, 2, 3, 4, 6]]);
        assert_eq!(build_friable_grading(1, 2).unwrap().depth(), 0);
    }

    #[test]
    fn verify_gp_grading_fully() {
        let g = build_gp_grading(32, 3).unwrap();
        let report = verify_grading(&g, PatternFamily::gp_int(3).unwrap(), true).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.conditions[5], ConditionOutcome::NotApplicable);
    }

    #[test]
    fn verify_prime_power_grading_fully() {
        let g = build_prime_power_grading(8, 2, 3).unwrap();
        let report = verify_grading(&g, PatternFamily::gp_prime_power(2, 3).unwrap(), true).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.conditions[4], ConditionOutcome::NotApplicable);
        assert_eq!(report.conditions[5], ConditionOutcome::Pass);
    }

    #[test]
    fn verify_detects_overlap() {
        let cells = vec![
            Cell::new([1u64, 2], 1).unwrap(),
            Cell::new([2u64, 4], 1).unwrap(),
        ];
        let g = Grading::new(4, GradingKind::Expansion(2), vec![cells]).unwrap();
        let report = verify_grading(&g, PatternFamily::GeomSquare, false).unwrap();
        assert!(matches!(report.conditions[1], ConditionOutcome::Fail(_)));
    }

    #[test]
    fn verify_detects_bad_nesting() {
        let level1 = vec![
            Cell::new([1u64, 2], 1).unwrap(),
            Cell::new([3u64, 6], 1).unwrap(),
        ];
        let level2 = vec![Cell::new([1u64, 2, 3, 5], 2).unwrap()];
        let g = Grading::new(6, GradingKind::Expansion(2), vec![level1, level2]).unwrap();
        let report = verify_grading(&g, PatternFamily::GeomSquare, false).unwrap();
        assert!(matches!(report.conditions[2], ConditionOutcome::Fail(_)));
    }

    #[test]
    fn verify_detects_unequal_ramsey() {
        // {1,2,4} is a 3-term GP (free number 2); {1,2,5} is not (free 3).
        let cells = vec![
            Cell::new([1u64, 2, 4], 1).unwrap(),
            Cell::new([4u64, 8, 20], 1).unwrap(),
        ];
        let g = Grading::new(20, GradingKind::Expansion(3), vec![cells]).unwrap();
        let structural = verify_grading(&g, PatternFamily::gp_int(3).unwrap(), false).unwrap();
        assert!(matches!(structural.conditions[3], ConditionOutcome::Fail(_)));
        let cells = vec![
            Cell::new([1u64, 2, 4], 1).unwrap(),
            Cell::new([1u64, 2, 5], 1).unwrap(),
        ];
        let g = Grading::new(20, GradingKind::Expansion(3), vec![cells]);
        // overlapping first elements: still constructible, condition 2 fails,
        // but condition 4's Ramsey check runs independently
        let report = verify_grading(&g.unwrap(), PatternFamily::gp_int(3).unwrap(), true).unwrap();
        assert!(matches!(report.conditions[3], ConditionOutcome::Fail(_)));
    }

    #[test]
    fn partition_of_prime_power_grading() {
        let view = partition_from_grading(&build_prime_power_grading(8, 2, 3).unwrap()).unwrap();
        let sets: Vec<Vec<u64>> = view.parts.iter().map(|p| p.elements.clone()).collect();
        assert_eq!(sets, vec![vec![1, 2, 4, 8], vec![3, 6], vec![5], vec![7]]);
        assert_eq!(view.alpha, vec![2, 1, 0, 1]);
    }

    #[test]
    fn partition_of_gp_grading_on_seven() {
        let view = partition_from_grading(&build_gp_grading(7, 3).unwrap()).unwrap();
        let sets: Vec<Vec<u64>> = view.parts.iter().map(|p| p.elements.clone()).collect();
        assert_eq!(sets, vec![vec![1, 2, 4], vec![3], vec![5], vec![6], vec![7]]);
        assert_eq!(view.alpha, vec![4, 1]);
    }

    #[test]
    fn partition_of_trivial_grading() {
        let g = Grading::new(4, GradingKind::Expansion(2), Vec::new()).unwrap();
        let view = partition_from_grading(&g).unwrap();
        assert_eq!(view.alpha, vec![4]);
        assert_eq!(view.parts.len(), 4);
    }

    #[test]
    fn partition_identities_for_expansion_gradings() {
        for n in [6u64, 32, 100, 250] {
            for (g, k) in [
                (build_gp_grading(n, 3).unwrap(), 3u64),
                (build_square_grading(n).unwrap(), 2u64),
            ] {
                let view = partition_from_grading(&g).unwrap();
                let weighted: u64 = view
                    .alpha
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| k.pow(i as u32) * a)
                    .sum();
                assert_eq!(weighted, n, "Σ k^i α_i = n at n={n}, k={k}");
                let sizes = g.level_sizes();
                for i in 0..view.alpha.len() {
                    let tail: u64 = view.alpha[i..]
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| k.pow(j as u32) * a)
                        .sum();
                    assert_eq!(tail, sizes[i], "Σ_{{j≥i}} k^{{j−i}} α_j = |𝓕_{i}| at n={n}");
                }
            }
        }
    }

    #[test]
    fn algebra_identity_examples() {
        assert!(algebra_identity_check(&[10, 0, 0], &[1, 5, 9], 3).unwrap());
        assert!(algebra_identity_check(&[2, 1, 0, 1], &[1, 2, 2, 3], 2).unwrap());
        assert!(growth_identity_check(&[2, 1, 0, 1], &[1, 2, 2, 3], 1).unwrap());
        assert!(algebra_identity_check(&[1, 2], &[3], 2).is_err());
    }

    #[test]
    fn algebra_identity_on_pseudorandom_inputs() {
        // The identity is pure telescoping: it holds for arbitrary α, R, k.
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for _ in 0..50 {
            let len = (next() % 5 + 1) as usize;
            let alpha: Vec<u64> = (0..len).map(|_| next() % 100).collect();
            let r: Vec<u64> = (0..len).map(|_| next() % 50).collect();
            let k = next() % 4 + 1;
            assert!(algebra_identity_check(&alpha, &r, k).unwrap());
            assert!(growth_identity_check(&alpha, &r, k).unwrap());
        }
    }

    #[test]
    fn builders_verify_structurally_to_200() {
        for n in [1u64, 13, 60, 200] {
            let checks: Vec<(Grading, PatternFamily)> = vec![
                (build_gp_grading(n, 3).unwrap(), PatternFamily::gp_int(3).unwrap()),
                (build_gp_grading(n, 4).unwrap(), PatternFamily::gp_int(4).unwrap()),
                (
                    build_prime_power_grading(n, 2, 3).unwrap(),
                    PatternFamily::gp_prime_power(2, 3).unwrap(),
                ),
                (
                    build_prime_power_grading(n, 3, 3).unwrap(),
                    PatternFamily::gp_prime_power(3, 3).unwrap(),
                ),
                (build_square_grading(n).unwrap(), PatternFamily::GeomSquare),
                (build_friable_grading(n, 2).unwrap(), PatternFamily::gp_friable3(2).unwrap()),
                (build_friable_grading(n, 3).unwrap(), PatternFamily::gp_friable3(3).unwrap()),
            ];
            for (g, family) in checks {
                let report = verify_grading(&g, family, false).unwrap();
                assert!(report.all_pass(), "n={n} {family}: {report:?}");
            }
        }
    }
}
