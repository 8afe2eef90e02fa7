//! Combinatorics on the cube [k]^d: combinatorial lines, geometric lines,
//! combinatorial spaces, and the associated Ramsey numbers (density
//! Hales-Jewett, Moser, generalized Sperner), computed exactly by the solver.
//!
//! Points of [k]^d are identified with their mixed-radix rank (coordinate 0
//! least significant), giving every point a stable integer id.

use std::collections::BTreeSet;

use crate::solver::{max_free, CapacityPartition, ForbiddenHypergraph, ProofStatus, SolverOptions};
use crate::{Error, Result};

/// Largest vertex count a grid instance may ask the solver to handle.
const MAX_GRID_POINTS: u64 = 1 << 20;

fn grid_size(k: u32, d: u32) -> Result<u64> {
    let n = (k as u64)
        .checked_pow(d)
        .filter(|&n| n <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::InvalidParameter(format!("grid [{k}]^{d} is too large to solve"))
        })?;
    Ok(n)
}

fn check_line_params(k: u32, d: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter("grids need alphabet size k ≥ 2".into()));
    }
    if d < 1 {
        return Err(Error::InvalidParameter("line enumeration needs d ≥ 1".into()));
    }
    Ok(())
}

fn decode(mut t: u64, base: u64, d: u32) -> Vec<u64> {
    (0..d)
        .map(|_| {
            let c = t % base;
            t /= base;
            c
        })
        .collect()
}

fn point_id(coords: &[u64], k: u32) -> u32 {
    let mut id = 0u64;
    for &c in coords.iter().rev() {
        id = id * k as u64 + c;
    }
    id as u32
}

/// All combinatorial lines of [k]^d as k-point sets, sorted.
///
/// A template fixes some coordinates and sends the rest (at least one) through
/// 0..k−1 in unison; there are (k+1)^d − k^d templates, each a distinct line.
pub fn enumerate_lines(k: u32, d: u32) -> Result<Vec<Vec<u32>>> {
    check_line_params(k, d)?;
    grid_size(k, d)?;
    let base = k as u64 + 1;
    let up = k as u64;
    let mut out: BTreeSet<Vec<u32>> = BTreeSet::new();
    for t in 0..base.pow(d) {
        let cells = decode(t, base, d);
        if !cells.contains(&up) {
            continue;
        }
        out.insert(template_points(&cells, k, |cell, v| if cell == up { v } else { cell }));
    }
    Ok(out.into_iter().collect())
}

/// All geometric lines of [k]^d as k-point sets, deduplicated.
///
/// Wildcard coordinates either count up 0..k−1 or down k−1..0; reversing all
/// wildcards yields the same point set, so templates are canonicalized (first
/// wildcard counts up) and the results deduplicated by point set.
pub fn enumerate_geometric_lines(k: u32, d: u32) -> Result<Vec<Vec<u32>>> {
    check_line_params(k, d)?;
    grid_size(k, d)?;
    let base = k as u64 + 2;
    let up = k as u64;
    let down = k as u64 + 1;
    let mut out: BTreeSet<Vec<u32>> = BTreeSet::new();
    for t in 0..base.pow(d) {
        let cells = decode(t, base, d);
        match cells.iter().find(|&&c| c >= up) {
            Some(&first) if first == up => {}
            _ => continue, // no wildcard, or first wildcard counts down
        }
        out.insert(template_points(&cells, k, |cell, v| {
            if cell == up {
                v
            } else if cell == down {
                k as u64 - 1 - v
            } else {
                cell
            }
        }));
    }
    Ok(out.into_iter().collect())
}

fn template_points(cells: &[u64], k: u32, value: impl Fn(u64, u64) -> u64) -> Vec<u32> {
    let mut points: Vec<u32> = (0..k as u64)
        .map(|v| {
            let coords: Vec<u64> = cells.iter().map(|&cell| value(cell, v)).collect();
            point_id(&coords, k)
        })
        .collect();
    points.sort_unstable();
    points
}

/// All combinatorial s-spaces of [k]^d as k^s-point sets.
///
/// A template partitions some coordinates into s nonempty wildcard classes
/// moving independently; classes are unordered, so labelings are
/// canonicalized by first occurrence.
pub fn enumerate_spaces(k: u32, d: u32, s: u32) -> Result<Vec<Vec<u32>>> {
    check_line_params(k, d)?;
    if s < 1 || s > d {
        return Err(Error::InvalidParameter(format!(
            "space dimension s={s} must satisfy 1 ≤ s ≤ d={d}"
        )));
    }
    grid_size(k, d)?;
    let base = k as u64 + s as u64;
    let mut out: BTreeSet<Vec<u32>> = BTreeSet::new();
    'template: for t in 0..base.pow(d) {
        let cells = decode(t, base, d);
        // canonical: scanning coordinates, new classes appear in order 0,1,…,s−1
        let mut seen = 0u64;
        for &c in cells.iter().filter(|&&c| c >= k as u64) {
            let class = c - k as u64;
            if class > seen {
                continue 'template;
            }
            if class == seen {
                seen += 1;
            }
        }
        if seen != s as u64 {
            continue;
        }
        let mut points: Vec<u32> = (0..(k as u64).pow(s))
            .map(|a| {
                let values = decode(a, k as u64, s);
                let coords: Vec<u64> = cells
                    .iter()
                    .map(|&cell| {
                        if cell >= k as u64 {
                            values[(cell - k as u64) as usize]
                        } else {
                            cell
                        }
                    })
                    .collect();
                point_id(&coords, k)
            })
            .collect();
        points.sort_unstable();
        out.insert(points);
    }
    Ok(out.into_iter().collect())
}

/// Slab partitions: for each axis, [k]^d splits into k subcubes of dimension
/// d−1, each capped by the one-dimension-lower Ramsey value.
fn slab_hints(k: u32, d: u32, cap: u64) -> Vec<CapacityPartition> {
    let n = (k as u64).pow(d);
    (0..d)
        .map(|axis| {
            let stride = (k as u64).pow(axis);
            let mut groups = vec![Vec::new(); k as usize];
            for id in 0..n {
                groups[(id / stride % k as u64) as usize].push(id as u32);
            }
            CapacityPartition {
                groups,
                caps: vec![cap; k as usize],
            }
        })
        .collect()
}

fn solve_grid(
    edges: Vec<Vec<u32>>,
    k: u32,
    d: u32,
    slab_cap: u64,
    opts: &SolverOptions,
) -> Result<u64> {
    let h = ForbiddenHypergraph::new(grid_size(k, d)? as usize, edges)?;
    let opts = SolverOptions {
        capacity_hints: slab_hints(k, d, slab_cap),
        ..opts.clone()
    };
    let r = max_free(&h, &opts)?;
    match r.proof_status {
        ProofStatus::Exact => Ok(r.optimum),
        ProofStatus::BudgetExceeded => Err(Error::BudgetExceeded {
            explored: r.nodes_explored,
            budget: opts.node_budget,
            best: r.optimum,
        }),
    }
}

/// The density Hales-Jewett number c_{d,k}: the largest subset of [k]^d with
/// no combinatorial line. c_{0,k} = 1.
pub fn dhj_number(d: u32, k: u32) -> Result<u64> {
    dhj_number_with(d, k, &SolverOptions::default())
}

pub fn dhj_number_with(d: u32, k: u32, opts: &SolverOptions) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter("grids need alphabet size k ≥ 2".into()));
    }
    if d == 0 {
        return Ok(1);
    }
    let sub = dhj_number_with(d - 1, k, opts)?;
    solve_grid(enumerate_lines(k, d)?, k, d, sub, opts)
}

/// The Moser number c′_{d,k}: the largest subset of [k]^d with no geometric
/// line. c′_{0,k} = 1.
pub fn moser_number(d: u32, k: u32) -> Result<u64> {
    moser_number_with(d, k, &SolverOptions::default())
}

pub fn moser_number_with(d: u32, k: u32, opts: &SolverOptions) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter("grids need alphabet size k ≥ 2".into()));
    }
    if d == 0 {
        return Ok(1);
    }
    let sub = moser_number_with(d - 1, k, opts)?;
    solve_grid(enumerate_geometric_lines(k, d)?, k, d, sub, opts)
}

/// The generalized Sperner number c_{d,s,k}: the largest subset of [k]^d with
/// no combinatorial s-space. c_{0,s,k} = 1.
pub fn space_number(d: u32, s: u32, k: u32) -> Result<u64> {
    space_number_with(d, s, k, &SolverOptions::default())
}

pub fn space_number_with(d: u32, s: u32, k: u32, opts: &SolverOptions) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidParameter("grids need alphabet size k ≥ 2".into()));
    }
    if d == 0 {
        return Ok(1);
    }
    if s < 1 {
        return Err(Error::InvalidParameter(
            "space dimension s must be ≥ 1".into(),
        ));
    }
    // No s-space fits in fewer than s dimensions, so nothing is forbidden.
    if s > d {
        return Ok((k as u64).pow(d));
    }
    // A slab is a copy of [k]^{d−1}; when even that cannot host an s-space,
    // its whole point count is the cap.
    let sub = if d - 1 >= s {
        space_number_with(d - 1, s, k, opts)?
    } else {
        (k as u64).pow(d - 1)
    };
    solve_grid(enumerate_spaces(k, d, s)?, k, d, sub, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::exhaustive_max_free;

    #[test]
    fn line_counts() {
        assert_eq!(enumerate_lines(3, 1).unwrap(), vec![vec![0, 1, 2]]);
        assert_eq!(enumerate_lines(3, 2).unwrap().len(), 7);
        assert_eq!(enumerate_lines(2, 3).unwrap().len(), 19);
        for k in 2..=4u32 {
            for d in 1..=5u32 {
                let expected = (k as u64 + 1).pow(d) - (k as u64).pow(d);
                assert_eq!(
                    enumerate_lines(k, d).unwrap().len() as u64,
                    expected,
                    "lines of [{k}]^{d}"
                );
            }
        }
    }

    #[test]
    fn geometric_line_counts() {
        assert_eq!(enumerate_geometric_lines(3, 1).unwrap(), vec![vec![0, 1, 2]]);
        assert_eq!(enumerate_geometric_lines(3, 2).unwrap().len(), 8);
        assert_eq!(enumerate_geometric_lines(2, 2).unwrap().len(), 6);
        // ((k+2)^d − k^d)/2 — each unordered wildcard orientation pair once
        for d in 1..=4u32 {
            let expected = (5u64.pow(d) - 3u64.pow(d)) / 2;
            assert_eq!(enumerate_geometric_lines(3, d).unwrap().len() as u64, expected);
        }
    }

    #[test]
    fn geometric_lines_of_the_three_grid() {
        // 3 rows, 3 columns, 2 diagonals of the 3×3 grid
        let lines = enumerate_geometric_lines(3, 2).unwrap();
        assert!(lines.contains(&vec![0, 1, 2])); // bottom row
        assert!(lines.contains(&vec![0, 3, 6])); // left column
        assert!(lines.contains(&vec![0, 4, 8])); // main diagonal
        assert!(lines.contains(&vec![2, 4, 6])); // anti-diagonal
    }

    #[test]
    fn combinatorial_lines_are_geometric_lines() {
        for (k, d) in [(2u32, 3u32), (3, 2), (3, 3), (4, 2)] {
            let geo: BTreeSet<Vec<u32>> =
                enumerate_geometric_lines(k, d).unwrap().into_iter().collect();
            for line in enumerate_lines(k, d).unwrap() {
                assert!(geo.contains(&line), "[{k}]^{d}: {line:?}");
            }
        }
    }

    #[test]
    fn space_counts() {
        assert_eq!(enumerate_spaces(2, 2, 2).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(enumerate_spaces(2, 3, 2).unwrap().len(), 9);
        assert!(enumerate_spaces(2, 2, 3).is_err());
    }

    #[test]
    fn one_dimensional_spaces_are_lines() {
        for (k, d) in [(2u32, 3u32), (3, 2), (3, 3), (2, 4)] {
            assert_eq!(
                enumerate_spaces(k, d, 1).unwrap(),
                enumerate_lines(k, d).unwrap(),
                "[{k}]^{d}"
            );
        }
    }

    #[test]
    fn point_sets_have_advertised_cardinality() {
        for line in enumerate_lines(3, 3).unwrap() {
            assert_eq!(line.len(), 3);
            assert!(line.windows(2).all(|w| w[0] < w[1]));
        }
        for line in enumerate_geometric_lines(3, 3).unwrap() {
            assert_eq!(line.len(), 3);
            assert!(line.windows(2).all(|w| w[0] < w[1]));
        }
        for space in enumerate_spaces(2, 4, 2).unwrap() {
            assert_eq!(space.len(), 4);
            assert!(space.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn dhj_small_dimensions() {
        assert_eq!(dhj_number(0, 3).unwrap(), 1);
        assert_eq!(dhj_number(1, 3).unwrap(), 2);
        assert_eq!(dhj_number(2, 3).unwrap(), 6);
        assert_eq!(dhj_number(3, 3).unwrap(), 18);
    }

    #[test]
    fn moser_small_dimensions() {
        assert_eq!(moser_number(0, 3).unwrap(), 1);
        assert_eq!(moser_number(1, 3).unwrap(), 2);
        assert_eq!(moser_number(2, 3).unwrap(), 6);
        assert_eq!(moser_number(3, 3).unwrap(), 16);
        assert_eq!(moser_number(3, 2).unwrap(), 1, "k=2: any two points are a line");
    }

    #[test]
    fn sperner_numbers() {
        assert_eq!(space_number(0, 1, 2).unwrap(), 1);
        for d in 1..=4u32 {
            let central = {
                let mut c = 1u64;
                for i in 0..d as u64 / 2 {
                    c = c * (d as u64 - i) / (i + 1);
                }
                c
            };
            assert_eq!(space_number(d, 1, 2).unwrap(), central, "d={d}");
        }
    }

    #[test]
    fn generalized_sperner_small() {
        assert_eq!(space_number(2, 2, 2).unwrap(), 3);
        assert_eq!(space_number(3, 2, 2).unwrap(), 6);
        assert_eq!(space_number(4, 2, 2).unwrap(), 11);
    }

    #[test]
    fn spaces_wider_than_the_grid_forbid_nothing() {
        // c_{d,s,k} = k^d when s > d: no s-space fits in d dimensions.
        assert_eq!(space_number(1, 2, 2).unwrap(), 2);
        assert_eq!(space_number(2, 3, 3).unwrap(), 9);
    }

    #[test]
    fn dhj_agrees_with_exhaustive_oracle_for_binary_cubes() {
        for d in 1..=3u32 {
            let h = ForbiddenHypergraph::new(1 << d, enumerate_lines(2, d).unwrap()).unwrap();
            assert_eq!(
                dhj_number(d, 2).unwrap(),
                exhaustive_max_free(&h).unwrap().optimum,
                "d={d}"
            );
        }
    }

    #[test]
    fn moser_below_dhj_and_subadditive() {
        let mut prev_dhj = 1;
        let mut prev_moser = 1;
        for d in 1..=3u32 {
            let dhj = dhj_number(d, 3).unwrap();
            let moser = moser_number(d, 3).unwrap();
            assert!(moser <= dhj, "d={d}");
            assert!(dhj <= 3 * prev_dhj, "d={d}");
            assert!(moser <= 3 * prev_moser, "d={d}");
            prev_dhj = dhj;
            prev_moser = moser;
        }
    }
}
