//! Sparsification of a weakly-securable network.
//!
//! Given a network satisfying the Weak Security Condition, links are removed
//! one at a time, re-verifying after each tentative removal, until every
//! source keeps exactly `n - k + 2` relay links. The row form of the
//! condition with a singleton source set shows `n - k + 2` is a hard floor,
//! so the result is extremal: no further link can go.
//!
//! The scan is a depth-first search: sources in increasing index, each
//! driven to the floor before the next; candidate relays in increasing
//! index; a dead end (a source above the floor with no removal preserving
//! the condition) backtracks to the previous commit. Dead ends are real,
//! if rare: greedy single-link removal can paint itself into a corner (the
//! smallest examples have n = k = 4), so plain greedy is incomplete.
//! Backtracking restores completeness because the condition is monotone
//! under adding links: any state that still contains some valid floor
//! configuration can reach it by single removals in any order, each
//! intermediate state being a superset of that configuration and hence
//! valid. The DFS therefore finds a floor configuration exactly when one
//! exists, and the fixed order makes the output a deterministic function
//! of the input. On inputs where no dead end is hit the result coincides
//! with plain greedy.
//!
//! A floor configuration does not always exist. The smallest offenders
//! have n = k = 4: with rows {2,3,4}, {1,4}, {1,3}, {1,2} the condition
//! holds, the last three rows are already at the floor and forced, and the
//! three source triples then require the first row to keep relays 2, 3 and
//! 4 at once, one more than the floor allows. Exhausting all 0/1 matrices
//! with k <= 4, n <= 5 finds such cases only at n = k = 4 (192 of 6785
//! condition-satisfying matrices). Those inputs get
//! [`TrimError::TargetUnreachable`], which certifies that the exhaustive
//! search found no floor configuration.

use crate::flowverify::check_min_cut_condition;
use crate::sman::{Sman, Verdict, Witness};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrimError {
    #[error("network does not satisfy the weak security condition")]
    NotWeaklySecure { witness: Witness },
    #[error("no link between source {source_index} and relay {relay}")]
    LinkAbsent { source_index: usize, relay: usize },
    /// The exhaustive search found no subset with every row at the floor;
    /// see the module docs for the smallest inputs where this happens.
    #[error("no trimming with every row support of size {target} exists")]
    TargetUnreachable { target: usize },
}

/// Which checker re-verifies the condition after each tentative removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrimVerifier {
    /// The polynomial-time max-flow verifier.
    #[default]
    Flow,
    /// The subset-enumeration checker, for audits.
    BruteForce,
}

impl TrimVerifier {
    fn check(&self, s: &Sman) -> bool {
        match self {
            TrimVerifier::Flow => check_min_cut_condition(s).holds(),
            TrimVerifier::BruteForce => s.check_weak_security_condition().holds(),
        }
    }
}

/// Result of a trim run: the sparsified network, the committed removals in
/// order, and how many verifier invocations the scan spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrimOutcome {
    pub trimmed: Sman,
    /// `(source, relay)` pairs, 0-based, in commit order.
    pub removals: Vec<(usize, usize)>,
    pub verifier_calls: usize,
}

/// The row degree trimming drives every source to: `n - k + 2`, the floor
/// imposed by the singleton case of the row-form condition.
pub fn target_row_degree(s: &Sman) -> usize {
    s.n() - s.k() + 2
}

/// Trims with the default flow verifier.
pub fn trim(s: &Sman) -> Result<TrimOutcome, TrimError> {
    trim_with(s, TrimVerifier::Flow)
}

/// Removes links until every row support has size `n - k + 2`, preserving
/// the Weak Security Condition throughout.
///
/// Errors if the input fails the condition (the row-form witness is
/// reported). For `k = 1` the condition is vacuous and the target exceeds
/// `n`, so the input is returned unchanged.
pub fn trim_with(s: &Sman, verifier: TrimVerifier) -> Result<TrimOutcome, TrimError> {
    if let Verdict::Fails(witness) = s.check_row_condition() {
        return Err(TrimError::NotWeaklySecure { witness });
    }
    if s.k() == 1 {
        return Ok(TrimOutcome {
            trimmed: s.clone(),
            removals: Vec::new(),
            verifier_calls: 0,
        });
    }
    let target = target_row_degree(s);
    let mut search = Search {
        verifier,
        target,
        removals: Vec::new(),
        verifier_calls: 0,
    };
    match search.descend(s.clone()) {
        Some(trimmed) => Ok(TrimOutcome {
            trimmed,
            removals: search.removals,
            verifier_calls: search.verifier_calls,
        }),
        None => Err(TrimError::TargetUnreachable { target }),
    }
}

struct Search {
    verifier: TrimVerifier,
    target: usize,
    removals: Vec<(usize, usize)>,
    verifier_calls: usize,
}

impl Search {
    /// Depth-first search over condition-preserving removals. Recursion
    /// depth is the number of excess links, at most k * n.
    fn descend(&mut self, current: Sman) -> Option<Sman> {
        let Some(source) = (0..current.k()).find(|&i| current.row_degree(i) > self.target) else {
            return Some(current);
        };
        for relay in 0..current.n() {
            if !current.has_link(source, relay) {
                continue;
            }
            let candidate = current.without_link(source, relay).expect("link present");
            self.verifier_calls += 1;
            if !self.verifier.check(&candidate) {
                continue;
            }
            self.removals.push((source, relay));
            if let Some(done) = self.descend(candidate) {
                return Some(done);
            }
            self.removals.pop();
        }
        None
    }
}

/// Removes a single link and reports the flow verifier's verdict on the
/// result. Pure: the input is not modified.
pub fn trim_step(s: &Sman, source: usize, relay: usize) -> Result<(Sman, Verdict), TrimError> {
    let removed = s
        .without_link(source, relay)
        .ok_or(TrimError::LinkAbsent { source_index: source, relay })?;
    let verdict = check_min_cut_condition(&removed);
    Ok((removed, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sman::tests::DEMO_6_4;

    #[test]
    fn dense_4_by_6_trims_to_row_degree_4() {
        let s = Sman::all_ones(4, 6).unwrap();
        let outcome = trim(&s).unwrap();
        for i in 0..4 {
            assert_eq!(outcome.trimmed.row_degree(i), 4);
        }
        assert!(outcome.trimmed.check_weak_security_condition().holds());
        assert!(outcome.trimmed.subset_of(&s));
        // One committed removal per excess link.
        assert_eq!(outcome.removals.len(), 4 * (6 - 4));
    }

    #[test]
    fn already_minimal_input_is_unchanged() {
        let s = Sman::all_ones(4, 6).unwrap();
        let minimal = trim(&s).unwrap().trimmed;
        let again = trim(&minimal).unwrap();
        assert_eq!(again.trimmed, minimal);
        assert!(again.removals.is_empty());
    }

    #[test]
    fn infeasible_input_reports_row_witness() {
        let s = Sman::parse_text(DEMO_6_4).unwrap();
        let err = trim(&s).unwrap_err();
        assert_eq!(
            err,
            TrimError::NotWeaklySecure {
                witness: Witness::Sources(vec![0])
            }
        );
    }

    #[test]
    fn trim_step_examples() {
        let s = Sman::all_ones(4, 6).unwrap();
        let (removed, verdict) = trim_step(&s, 0, 0).unwrap();
        assert!(verdict.holds());
        assert_eq!(removed.row_degree(0), 5);
        assert_eq!(s.row_degree(0), 6, "input is untouched");

        // On a minimal network every removal breaks the condition.
        let minimal = trim(&s).unwrap().trimmed;
        let relay = minimal.supports().indices(0)[0];
        let (_, verdict) = trim_step(&minimal, 0, relay).unwrap();
        assert!(!verdict.holds());
    }

    #[test]
    fn trim_step_rejects_missing_link() {
        let s = Sman::all_ones(2, 3).unwrap();
        let (removed, _) = trim_step(&s, 0, 1).unwrap();
        assert_eq!(
            trim_step(&removed, 0, 1),
            Err(TrimError::LinkAbsent {
                source_index: 0,
                relay: 1
            })
        );
        // Removing then re-adding restores the original matrix.
        assert_eq!(removed.with_link(0, 1).unwrap(), s);
    }

    #[test]
    fn single_source_network_is_left_alone() {
        let s = Sman::from_rows(&[vec![1, 1, 0]]).unwrap();
        let outcome = trim(&s).unwrap();
        assert_eq!(outcome.trimmed, s);
        assert!(outcome.removals.is_empty());
    }

    #[test]
    fn greedy_dead_ends_are_escaped_by_backtracking() {
        // Plain greedy gets stuck here: after driving the first three rows
        // down, every removal from the last row breaks the condition. The
        // search must back out and still reach the floor.
        let s = Sman::parse_text("sman 4 4\n1 1 1 1\n1 0 0 1\n1 1 1 1\n1 1 1 1\n").unwrap();
        let outcome = trim(&s).unwrap();
        for i in 0..4 {
            assert_eq!(outcome.trimmed.row_degree(i), 2);
        }
        assert!(outcome.trimmed.check_weak_security_condition().holds());
        assert!(outcome.trimmed.subset_of(&s));
    }

    #[test]
    fn some_satisfying_networks_admit_no_floor_configuration() {
        // Rows {2,3,4}, {1,4}, {1,3}, {1,2}: the condition holds, but the
        // three forced floor rows make the source triples demand relays 2,
        // 3 and 4 all stay in row 1, which a 2-element support cannot do.
        let s = Sman::parse_text("sman 4 4\n0 1 1 1\n1 0 0 1\n1 0 1 0\n1 1 0 0\n").unwrap();
        assert!(s.check_weak_security_condition().holds());
        assert_eq!(
            trim(&s).unwrap_err(),
            TrimError::TargetUnreachable { target: 2 }
        );
    }

    #[test]
    fn brute_force_verifier_gives_same_result() {
        let s = Sman::all_ones(4, 7).unwrap();
        let flow = trim_with(&s, TrimVerifier::Flow).unwrap();
        let brute = trim_with(&s, TrimVerifier::BruteForce).unwrap();
        assert_eq!(flow.trimmed, brute.trimmed);
        assert_eq!(flow.removals, brute.removals);
    }

    #[test]
    fn deterministic_across_runs() {
        let s = Sman::all_ones(3, 7).unwrap();
        assert_eq!(trim(&s).unwrap(), trim(&s).unwrap());
    }
}
