//! The simple multiple access network model and its combinatorial
//! condition checkers.
//!
//! A SMAN is a two-hop network in which `k` unit-rate sources reach a single
//! sink through `n` relays (`n >= k`); it is fully described by a k-by-n 0/1
//! adjacency matrix. This module holds the matrix (rows bit-packed into
//! `u64`, so `n <= 64`) and the subset-enumeration checkers:
//!
//! - the MDS Condition: every nonempty set `J` of at most `k` relays is
//!   collectively connected to at least `|J|` sources;
//! - the Weak Security Condition (column form): every nonempty set `J` of
//!   fewer than `k` relays is connected to at least `|J| + 1` sources;
//! - its row form: every nonempty proper set `I` of sources satisfies
//!   `|union of supports| >= n - k + |I| + 1` (equivalent to the column
//!   form; the equivalence is exercised by tests);
//! - the block-security condition for a given adversary strength and block
//!   size, and the per-strength block-security profile.
//!
//! Checkers enumerate subsets by cardinality, then lexicographically, and
//! report the first violating subset found, so failing verdicts carry the
//! lexicographically least witness of minimum cardinality. All indices in
//! witnesses are 0-based.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row bit-packing limit.
pub const MAX_RELAYS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmanError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid dimensions k={k}, n={n} (need 1 <= k <= n <= {MAX_RELAYS})")]
    InvalidDimensions { k: usize, n: usize },
    #[error("adversary strength {strength} out of range (need 1 <= strength <= {max})")]
    StrengthOutOfRange { strength: usize, max: usize },
    #[error("block size {block} out of range (need block >= 1)")]
    BlockOutOfRange { block: usize },
    #[error("MDS condition fails; no block-security profile exists")]
    MdsConditionFails { witness: Witness },
}

/// A failing subset: either relays (column form) or sources (row form).
/// Indices are 0-based and sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Relays(Vec<usize>),
    Sources(Vec<usize>),
}

impl Witness {
    pub fn indices(&self) -> &[usize] {
        match self {
            Witness::Relays(v) | Witness::Sources(v) => v,
        }
    }

    /// The same indices shifted to the 1-based convention used in reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices().iter().map(|i| i + 1).collect()
    }
}

/// Outcome of a condition check. A failing verdict always carries a witness
/// subset that violates the checked inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// The per-source relay supports `R_i`, as bit masks over the relays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSets {
    n: usize,
    masks: Vec<u64>,
}

impl SupportSets {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask(&self, source: usize) -> u64 {
        self.masks[source]
    }

    /// Relay indices of `R_i`, ascending.
    pub fn indices(&self, source: usize) -> Vec<usize> {
        mask_to_indices(self.masks[source])
    }

    pub fn union<'a>(&self, sources: impl IntoIterator<Item = &'a usize>) -> u64 {
        sources
            .into_iter()
            .fold(0u64, |acc, &i| acc | self.masks[i])
    }
}

#[derive(Serialize, Deserialize)]
struct SmanJson {
    k: usize,
    n: usize,
    rows: Vec<Vec<u8>>,
}

/// A simple multiple access network: `k` sources, `n` relays, and the 0/1
/// adjacency matrix between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sman {
    k: usize,
    n: usize,
    rows: Vec<u64>,
}

impl Sman {
    /// Builds a network from explicit 0/1 rows.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, SmanError> {
        let k = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if k < 1 || n < k || n > MAX_RELAYS {
            return Err(SmanError::InvalidDimensions { k, n });
        }
        let mut masks = Vec::with_capacity(k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SmanError::Parse {
                    line: i + 2,
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
            let mut mask = 0u64;
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => mask |= 1 << j,
                    other => {
                        return Err(SmanError::Parse {
                            line: i + 2,
                            message: format!("entry {other} is not 0 or 1"),
                        })
                    }
                }
            }
            masks.push(mask);
        }
        Ok(Self { k, n, rows: masks })
    }

    /// Builds a network from bit-packed rows (bit `j` of `rows[i]` is the
    /// link between source `i` and relay `j`).
    pub fn from_row_masks(k: usize, n: usize, rows: Vec<u64>) -> Result<Self, SmanError> {
        if k < 1 || n < k || n > MAX_RELAYS {
            return Err(SmanError::InvalidDimensions { k, n });
        }
        if rows.len() != k {
            return Err(SmanError::InvalidDimensions { k: rows.len(), n });
        }
        let valid = if n == 64 { u64::MAX } else { (1 << n) - 1 };
        for &row in &rows {
            if row & !valid != 0 {
                return Err(SmanError::InvalidDimensions { k, n });
            }
        }
        Ok(Self { k, n, rows })
    }

    /// The densest network: every source linked to every relay.
    pub fn all_ones(k: usize, n: usize) -> Result<Self, SmanError> {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::from_row_masks(k, n, vec![mask; k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_link(&self, source: usize, relay: usize) -> bool {
        assert!(source < self.k && relay < self.n, "index out of range");
        self.rows[source] >> relay & 1 == 1
    }

    pub fn row_mask(&self, source: usize) -> u64 {
        self.rows[source]
    }

    /// Sources connected to `relay`, as a bit mask over the sources.
    pub fn col_mask(&self, relay: usize) -> u64 {
        assert!(relay < self.n, "relay index out of range");
        let mut mask = 0u64;
        for i in 0..self.k {
            mask |= (self.rows[i] >> relay & 1) << i;
        }
        mask
    }

    pub fn supports(&self) -> SupportSets {
        SupportSets {
            n: self.n,
            masks: self.rows.clone(),
        }
    }

    pub fn link_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn row_degree(&self, source: usize) -> usize {
        self.rows[source].count_ones() as usize
    }

    /// A copy with one link removed; `None` if the link is absent.
    pub fn without_link(&self, source: usize, relay: usize) -> Option<Sman> {
        if !self.has_link(source, relay) {
            return None;
        }
        let mut rows = self.rows.clone();
        rows[source] &= !(1 << relay);
        Some(Sman {
            k: self.k,
            n: self.n,
            rows,
        })
    }

    /// A copy with one link added; `None` if the link is already present.
    pub fn with_link(&self, source: usize, relay: usize) -> Option<Sman> {
        assert!(source < self.k && relay < self.n, "index out of range");
        if self.has_link(source, relay) {
            return None;
        }
        let mut rows = self.rows.clone();
        rows[source] |= 1 << relay;
        Some(Sman {
            k: self.k,
            n: self.n,
            rows,
        })
    }

    /// Entrywise comparison: true iff every link of `self` is a link of
    /// `other`.
    pub fn subset_of(&self, other: &Sman) -> bool {
        self.k == other.k
            && self.n == other.n
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a & !b == 0)
    }

    /// Sources connected to at least one relay in `relays` (0-based,
    /// ascending). Panics on an out-of-range relay index.
    pub fn column_union(&self, relays: &[usize]) -> Vec<usize> {
        let mask = relays
            .iter()
            .fold(0u64, |acc, &j| acc | self.col_mask(j));
        mask_to_indices(mask)
    }

    /// MDS Condition: `|union(J)| >= |J|` for every nonempty `J` of at most
    /// `k` relays. Necessary and sufficient for an MDS scheme on this
    /// topology.
    pub fn check_mds_condition(&self) -> Verdict {
        self.check_column_condition(self.k, 0)
    }

    /// Weak Security Condition: `|union(J)| >= |J| + 1` for every nonempty
    /// `J` of fewer than `k` relays. For `k = 1` the quantifier range is
    /// empty and the condition holds vacuously.
    pub fn check_weak_security_condition(&self) -> Verdict {
        self.check_column_condition(self.k - 1, 1)
    }

    /// Shared scan for the column-form conditions: for every nonempty `J`
    /// with `|J| <= max_size`, require `|union(J)| >= |J| + margin`.
    fn check_column_condition(&self, max_size: usize, margin: usize) -> Verdict {
        let col_masks: Vec<u64> = (0..self.n).map(|j| self.col_mask(j)).collect();
        for size in 1..=max_size.min(self.n) {
            for subset in (0..self.n).combinations(size) {
                let union = subset.iter().fold(0u64, |acc, &j| acc | col_masks[j]);
                if (union.count_ones() as usize) < size + margin {
                    return Verdict::Fails(Witness::Relays(subset));
                }
            }
        }
        Verdict::Holds
    }

    /// Row form of the Weak Security Condition:
    /// `|union of R_i over I| >= n - k + |I| + 1` for every nonempty proper
    /// subset `I` of the sources.
    pub fn check_row_condition(&self) -> Verdict {
        for size in 1..self.k {
            for subset in (0..self.k).combinations(size) {
                let union = subset.iter().fold(0u64, |acc, &i| acc | self.rows[i]);
                if (union.count_ones() as usize) < self.n - self.k + size + 1 {
                    return Verdict::Fails(Witness::Sources(subset));
                }
            }
        }
        Verdict::Holds
    }

    /// Block-security condition: `|union(J)| >= |J| + block` for every
    /// nonempty `J` of at most `strength` relays.
    pub fn check_block_security_condition(
        &self,
        strength: usize,
        block: usize,
    ) -> Result<Verdict, SmanError> {
        if strength < 1 || strength > self.k.saturating_sub(1) {
            return Err(SmanError::StrengthOutOfRange {
                strength,
                max: self.k - 1,
            });
        }
        if block < 1 {
            return Err(SmanError::BlockOutOfRange { block });
        }
        Ok(self.check_column_condition(strength, block))
    }

    /// The block-security profile `(b_1, ..., b_{k-1})`:
    /// `b_l = max(0, min over nonempty J with |J| <= l of |union(J)| - |J|)`.
    /// Requires the MDS Condition, without which no MDS scheme exists and
    /// the profile is meaningless.
    pub fn block_security_profile(&self) -> Result<SecurityProfile, SmanError> {
        if let Verdict::Fails(witness) = self.check_mds_condition() {
            return Err(SmanError::MdsConditionFails { witness });
        }
        let col_masks: Vec<u64> = (0..self.n).map(|j| self.col_mask(j)).collect();
        let mut levels = Vec::with_capacity(self.k.saturating_sub(1));
        let mut slack = usize::MAX;
        for size in 1..self.k {
            for subset in (0..self.n).combinations(size) {
                let union = subset.iter().fold(0u64, |acc, &j| acc | col_masks[j]);
                slack = slack.min((union.count_ones() as usize).saturating_sub(size));
            }
            levels.push(slack);
        }
        Ok(SecurityProfile { levels })
    }

    /// Canonical text format:
    /// line 1 `sman <k> <n>`, then `k` lines of `n` space-separated 0/1
    /// digits, each line newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = format!("sman {} {}\n", self.k, self.n);
        for i in 0..self.k {
            let digits: Vec<String> = (0..self.n)
                .map(|j| if self.has_link(i, j) { "1" } else { "0" }.to_string())
                .collect();
            out.push_str(&digits.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, SmanError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(SmanError::Parse {
            line: 1,
            message: "empty input".to_string(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "sman" {
            return Err(SmanError::Parse {
                line: 1,
                message: "expected header `sman <k> <n>`".to_string(),
            });
        }
        let k: usize = parts[1].parse().map_err(|_| SmanError::Parse {
            line: 1,
            message: format!("invalid source count `{}`", parts[1]),
        })?;
        let n: usize = parts[2].parse().map_err(|_| SmanError::Parse {
            line: 1,
            message: format!("invalid relay count `{}`", parts[2]),
        })?;
        if k < 1 || n < k || n > MAX_RELAYS {
            return Err(SmanError::InvalidDimensions { k, n });
        }
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let (idx, line) = lines.next().ok_or(SmanError::Parse {
                line: i + 2,
                message: format!("expected {k} rows, found {i}"),
            })?;
            let mut row = Vec::with_capacity(n);
            for tok in line.split_whitespace() {
                match tok {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    other => {
                        return Err(SmanError::Parse {
                            line: idx + 1,
                            message: format!("entry `{other}` is not 0 or 1"),
                        })
                    }
                }
            }
            if row.len() != n {
                return Err(SmanError::Parse {
                    line: idx + 1,
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        for (idx, line) in lines {
            if !line.trim().is_empty() {
                return Err(SmanError::Parse {
                    line: idx + 1,
                    message: "unexpected trailing content".to_string(),
                });
            }
        }
        Self::from_rows(&rows)
    }

    /// JSON format: `{"k":4,"n":6,"rows":[[1,1,1,0,0,0],...]}`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<u8>> = (0..self.k)
            .map(|i| (0..self.n).map(|j| self.has_link(i, j) as u8).collect())
            .collect();
        serde_json::to_string(&SmanJson {
            k: self.k,
            n: self.n,
            rows,
        })
        .expect("matrix serializes")
    }

    pub fn parse_json(text: &str) -> Result<Self, SmanError> {
        let parsed: SmanJson = serde_json::from_str(text).map_err(|e| SmanError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if parsed.rows.len() != parsed.k || parsed.rows.iter().any(|r| r.len() != parsed.n) {
            return Err(SmanError::Parse {
                line: 1,
                message: "row shape does not match declared k and n".to_string(),
            });
        }
        Self::from_rows(&parsed.rows)
    }

    /// Parses either format; JSON input is recognized by a leading `{`.
    pub fn parse(text: &str) -> Result<Self, SmanError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }
}

/// The block-security profile of a topology: `levels[l-1]` is the largest
/// block size protected against an adversary of strength `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecurityProfile {
    levels: Vec<usize>,
}

impl SecurityProfile {
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// `b_strength`, 1-based strength.
    pub fn level(&self, strength: usize) -> usize {
        self.levels[strength - 1]
    }
}

fn mask_to_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|j| mask >> j & 1 == 1).collect()
}
