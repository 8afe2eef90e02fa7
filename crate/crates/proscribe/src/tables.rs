//! Persistent records of grid capacities and related extremal quantities.
//!
//! Bound evaluations consume capacity sequences — c_{d,k}, c′_{d,k},
//! c_{d,s,k}, r_k(n), friable-prefix capacities — whose exact values range
//! from trivial to far beyond any compute budget. A [`Table`] keeps what is
//! known, whether computed here or taken from the literature, computes what
//! is missing on demand, and refuses to hand out a value that contradicts a
//! stored record.
//!
//! Tables serialize as JSON, one record per entry with explicit provenance.
//! A bundled default carries the published density-Hales-Jewett numbers,
//! Moser numbers and small combinatorial-space counts so that bound
//! computations work out of the box.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid;
use crate::numtheory::friable_prefix;
use crate::patterns::{NaturalSet, PatternFamily};
use crate::solver::{self, ProofStatus, SolverOptions};
use crate::Result;

/// Format version accepted by [`Table::load`]; bump on breaking JSON changes.
pub const TABLE_FORMAT_VERSION: &str = "1";

/// A capacity-like quantity a table can record.
///
/// Serialized flat into the record object under a `quantity` tag, e.g.
/// `{"quantity": "space", "d": 5, "s": 2, "k": 2, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "kebab-case")]
pub enum Quantity {
    /// c_{d,k}: largest combinatorial-line-free subset of [k]^d.
    Dhj { d: u32, k: u32 },
    /// c′_{d,k}: largest geometric-line-free subset of [k]^d (Moser number).
    Moser { d: u32, k: u32 },
    /// c_{d,s,k}: largest subset of [k]^d without an s-dimensional
    /// combinatorial subspace.
    Space { d: u32, s: u32, k: u32 },
    /// r_k(n): largest k-term-progression-free subset of [n].
    RAp { k: u32, n: u64 },
    /// Largest subset of the first i+1 d-friable numbers with no 3-term
    /// geometric progression of d-friable ratio (the R_i capacity of the
    /// friable grading).
    Gp3FriablePrefix { d: u32, i: u32 },
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Quantity::Dhj { d, k } => write!(f, "c_{{{d},{k}}}"),
            Quantity::Moser { d, k } => write!(f, "c'_{{{d},{k}}}"),
            Quantity::Space { d, s, k } => write!(f, "c_{{{d},{s},{k}}}"),
            Quantity::RAp { k, n } => write!(f, "r_{k}({n})"),
            Quantity::Gp3FriablePrefix { d, i } => write!(f, "R_{i}[{d}-friable]"),
        }
    }
}

/// Whether a recorded value is the exact optimum or a one-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Exact,
    Upper,
    Lower,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Exact => "exact",
            Status::Upper => "upper",
            Status::Lower => "lower",
        })
    }
}

/// Where a recorded value came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "provenance", rename_all = "lowercase")]
pub enum Provenance {
    /// Computed by this crate's solvers.
    Computed,
    /// Taken from published work; `note` flags reliability caveats.
    Literature {
        citation: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
}

/// One stored value: a quantity, its value, and how firmly it is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyRecord {
    #[serde(flatten)]
    pub quantity: Quantity,
    pub value: u64,
    pub status: Status,
    #[serde(flatten)]
    pub provenance: Provenance,
}

/// On-disk shape of a table file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableFile {
    version: String,
    records: Vec<RamseyRecord>,
}

/// A consistent collection of records, keyed by (quantity, status).
///
/// At most one record per key; for any single quantity the stored exact
/// value and bounds must agree (lower ≤ exact ≤ upper).
#[derive(Debug, Clone, Default)]
pub struct Table {
    records: BTreeMap<(Quantity, Status), RamseyRecord>,
}

impl Table {
    /// Builds a table, rejecting duplicate (quantity, status) keys and
    /// mutually inconsistent records for the same quantity.
    pub fn from_records(records: Vec<RamseyRecord>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for record in records {
            let key = (record.quantity, record.status);
            if map.insert(key, record).is_some() {
                return Err(Error::InvalidTable(format!(
                    "duplicate record for {} ({})",
                    key.0, key.1
                )));
            }
        }
        let table = Table { records: map };
        table.check_consistency()?;
        Ok(table)
    }

    fn check_consistency(&self) -> Result<()> {
        let quantities: BTreeSet<Quantity> = self.records.keys().map(|&(q, _)| q).collect();
        for q in quantities {
            let exact = self.get(q, Status::Exact).map(|r| r.value);
            let upper = self.get(q, Status::Upper).map(|r| r.value);
            let lower = self.get(q, Status::Lower).map(|r| r.value);
            let bad = matches!((exact, upper), (Some(e), Some(u)) if u < e)
                || matches!((exact, lower), (Some(e), Some(l)) if l > e)
                || matches!((upper, lower), (Some(u), Some(l)) if u < l);
            if bad {
                return Err(Error::InvalidTable(format!(
                    "inconsistent bounds recorded for {q}"
                )));
            }
        }
        Ok(())
    }

    /// The table compiled into the binary: published grid numbers plus the
    /// small space counts computable in milliseconds.
    pub fn bundled_default() -> Self {
        let file: TableFile = serde_json::from_str(include_str!("../data/default_table.json"))
            .expect("bundled capacity table parses");
        assert_eq!(
            file.version, TABLE_FORMAT_VERSION,
            "bundled capacity table version"
        );
        Table::from_records(file.records).expect("bundled capacity table is consistent")
    }

    /// Reads and validates a table file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: TableFile = serde_json::from_str(&text)?;
        if file.version != TABLE_FORMAT_VERSION {
            return Err(Error::InvalidTable(format!(
                "unsupported table format version {:?} (this build reads {:?})",
                file.version, TABLE_FORMAT_VERSION
            )));
        }
        Table::from_records(file.records)
    }

    /// Writes the table as pretty JSON, records in key order, so repeated
    /// stores of the same table are byte-identical.
    pub fn store(&self, path: &Path) -> Result<()> {
        let file = TableFile {
            version: TABLE_FORMAT_VERSION.to_string(),
            records: self.records.values().cloned().collect(),
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn get(&self, quantity: Quantity, status: Status) -> Option<&RamseyRecord> {
        self.records.get(&(quantity, status))
    }

    /// Inserts or replaces a record. No cross-record consistency check is
    /// performed here; [`Table::from_records`] validates loaded data and
    /// [`Table::get_or_compute`] validates before inserting.
    pub fn insert(&mut self, record: RamseyRecord) {
        self.records
            .insert((record.quantity, record.status), record);
    }

    pub fn records(&self) -> impl Iterator<Item = &RamseyRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The exact value of `quantity`: the stored exact record if present,
    /// otherwise computed, checked against any stored bounds, cached as a
    /// computed record, and returned. A computed value outside the stored
    /// bounds is a fatal [`Error::RecordConflict`].
    pub fn get_or_compute(&mut self, quantity: Quantity, opts: &SolverOptions) -> Result<u64> {
        if let Some(record) = self.get(quantity, Status::Exact) {
            return Ok(record.value);
        }
        let computed = compute_quantity(quantity, opts)?;
        let conflicting = |stored: &RamseyRecord, ok: bool| {
            if ok {
                None
            } else {
                Some(Error::RecordConflict {
                    quantity: quantity.to_string(),
                    stored: stored.value,
                    computed,
                })
            }
        };
        if let Some(upper) = self.get(quantity, Status::Upper) {
            if let Some(err) = conflicting(upper, computed <= upper.value) {
                return Err(err);
            }
        }
        if let Some(lower) = self.get(quantity, Status::Lower) {
            if let Some(err) = conflicting(lower, computed >= lower.value) {
                return Err(err);
            }
        }
        self.insert(RamseyRecord {
            quantity,
            value: computed,
            status: Status::Exact,
            provenance: Provenance::Computed,
        });
        Ok(computed)
    }

    /// A valid capacity for `quantity` in an upper-bound computation: the
    /// exact value when stored, else a stored upper bound (any upper bound
    /// on the optimum is a usable capacity), else computed exactly.
    /// Stored lower bounds are never returned.
    pub fn capacity(&mut self, quantity: Quantity, opts: &SolverOptions) -> Result<u64> {
        if let Some(record) = self.get(quantity, Status::Exact) {
            return Ok(record.value);
        }
        if let Some(record) = self.get(quantity, Status::Upper) {
            return Ok(record.value);
        }
        self.get_or_compute(quantity, opts)
    }

    /// c_{0,k}, …, c_{depth,k} as bound capacities.
    pub fn dhj_series(&mut self, k: u32, depth: u32, opts: &SolverOptions) -> Result<Vec<u64>> {
        (0..=depth)
            .map(|d| self.capacity(Quantity::Dhj { d, k }, opts))
            .collect()
    }

    /// c′_{0,k}, …, c′_{depth,k} as bound capacities.
    pub fn moser_series(&mut self, k: u32, depth: u32, opts: &SolverOptions) -> Result<Vec<u64>> {
        (0..=depth)
            .map(|d| self.capacity(Quantity::Moser { d, k }, opts))
            .collect()
    }

    /// c_{0,s,k}, …, c_{depth,s,k} as bound capacities.
    pub fn space_series(
        &mut self,
        s: u32,
        k: u32,
        depth: u32,
        opts: &SolverOptions,
    ) -> Result<Vec<u64>> {
        (0..=depth)
            .map(|d| self.capacity(Quantity::Space { d, s, k }, opts))
            .collect()
    }

    /// Friable-prefix capacities R_0, …, R_depth for the d-friable grading.
    pub fn friable_series(&mut self, d: u32, depth: u32, opts: &SolverOptions) -> Result<Vec<u64>> {
        (0..=depth)
            .map(|i| self.capacity(Quantity::Gp3FriablePrefix { d, i }, opts))
            .collect()
    }

    /// r_k(0), …, r_k(n_max) in one incremental sweep, cross-checked against
    /// every stored r_k record in range (exact must match, bounds must
    /// contain the computed value). Nothing is inserted: the sweep is cheaper
    /// than table bookkeeping for a hundred records.
    pub fn r_series(&self, k: u32, n_max: u64) -> Result<Vec<u64>> {
        let r = solver::r_values(k, n_max)?;
        for record in self.records.values() {
            if let Quantity::RAp { k: rk, n } = record.quantity {
                if rk != k || n > n_max {
                    continue;
                }
                let computed = r[n as usize];
                let ok = match record.status {
                    Status::Exact => record.value == computed,
                    Status::Upper => record.value >= computed,
                    Status::Lower => record.value <= computed,
                };
                if !ok {
                    return Err(Error::RecordConflict {
                        quantity: record.quantity.to_string(),
                        stored: record.value,
                        computed,
                    });
                }
            }
        }
        Ok(r)
    }

    /// The largest `depth` such that exact records exist for every quantity
    /// `template(0), …, template(depth)` — the natural default truncation
    /// depth for a bound driven by this table.
    pub fn contiguous_exact_depth(&self, template: impl Fn(u32) -> Quantity) -> Option<u32> {
        let mut best = None;
        let mut d = 0;
        while self.get(template(d), Status::Exact).is_some() {
            best = Some(d);
            d += 1;
        }
        best
    }

    /// Recomputes every exact record within the given budget. A mismatch is
    /// a fatal [`Error::RecordConflict`]; records whose recomputation blows
    /// the node budget are skipped and reported.
    pub fn verify(&self, opts: &SolverOptions) -> Result<VerifyReport> {
        let mut report = VerifyReport::default();
        for record in self.records.values() {
            if record.status != Status::Exact {
                continue;
            }
            match compute_quantity(record.quantity, opts) {
                Ok(value) if value == record.value => report.verified.push(record.quantity),
                Ok(value) => {
                    return Err(Error::RecordConflict {
                        quantity: record.quantity.to_string(),
                        stored: record.value,
                        computed: value,
                    })
                }
                Err(Error::BudgetExceeded { .. }) => report
                    .skipped
                    .push((record.quantity, "node budget exceeded".into())),
                Err(e) => return Err(e),
            }
        }
        Ok(report)
    }
}

/// Outcome of [`Table::verify`]: which exact records were recomputed and
/// matched, and which were skipped (with the reason).
#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub verified: Vec<Quantity>,
    pub skipped: Vec<(Quantity, String)>,
}

fn compute_quantity(quantity: Quantity, opts: &SolverOptions) -> Result<u64> {
    match quantity {
        Quantity::Dhj { d, k } => grid::dhj_number_with(d, k, opts),
        Quantity::Moser { d, k } => grid::moser_number_with(d, k, opts),
        Quantity::Space { d, s, k } => grid::space_number_with(d, s, k, opts),
        Quantity::RAp { k, n } => solver::r_value(k, n),
        Quantity::Gp3FriablePrefix { d, i } => {
            let elements = friable_prefix(d as usize, i as usize + 1)?;
            let ground_max = *elements.last().unwrap();
            let ground = NaturalSet::new(elements, ground_max)?;
            let family = PatternFamily::gp_friable3(d as usize)?;
            let solve = solver::solve_ground(&ground, family, opts)?;
            match solve.result.proof_status {
                ProofStatus::Exact => Ok(solve.result.optimum),
                ProofStatus::BudgetExceeded => Err(Error::BudgetExceeded {
                    explored: solve.result.nodes_explored,
                    budget: opts.node_budget,
                    best: solve.result.optimum,
                }),
            }
        }
    }
}
