//! Ground-truth security verification by exhaustive message enumeration.
//!
//! For a uniform message vector over GF(q)^k and a linear observation
//! `y = x G[E]`, every conditional distribution of a coordinate block given
//! the observation is uniform over a coset projection, so all entropies are
//! exact integer multiples of log q. The oracle tabulates the joint
//! distribution of `(x_B, y_E)` over all q^k messages, checks that coset
//! structure (equal counts, power-of-q support sizes), and reads the
//! conditional entropy off the support size. Every tabulated value is
//! cross-checked against the linear-algebra shortcut
//! `H(X_B | Y_E) = rank([G[E] | units_B]) - rank(G[E])`; a mismatch is an
//! internal-consistency error and can only mean a bug.
//!
//! Quantifier reductions used throughout (and themselves spot-checked in
//! tests by full enumeration at tiny sizes):
//!
//! - observations for a subset of `E` are a function of those for `E`, so
//!   conditioning only on maximal observation sets suffices;
//! - a marginal of a uniform distribution is uniform, so checking only
//!   maximal target blocks suffices.
//!
//! [`independence_rank_criterion`] is the budget-free surrogate for the
//! entropy computation and is what scales past small fields.

use std::collections::HashMap;

use itertools::Itertools;
use thiserror::Error;

use crate::gf::{FieldMatrix, FieldPrime};

/// Default cap on the enumerated message space q^k.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("message space {space} exceeds enumeration budget {budget}")]
    BudgetExceeded { space: u128, budget: u64 },
    #[error("adversary strength {strength} out of range (need 1 <= strength <= {max})")]
    StrengthOutOfRange { strength: usize, max: usize },
    #[error("conditional distribution is not uniform over cosets; this is a bug")]
    NonUniformConditional,
    #[error("tabulated entropy {tabulated} disagrees with rank shortcut {rank_based}; this is a bug")]
    EntropyMismatch { tabulated: u64, rank_based: u64 },
}

/// An exact entropy in q-ary units (multiples of log q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EntropyValue(u64);

impl EntropyValue {
    pub fn units(&self) -> u64 {
        self.0
    }
}

/// Exact `H(X_B | Y_E)` in q-ary units for uniform `X`, observations
/// `Y_E = X G[E]`, targets `B` (source indices), computed by tabulating all
/// q^k messages and cross-checked against the rank shortcut.
///
/// Panics on out-of-range indices in `targets` or `observed`.
pub fn conditional_entropy(
    g: &FieldMatrix,
    targets: &[usize],
    observed: &[usize],
    budget: u64,
) -> Result<EntropyValue, OracleError> {
    let q = g.field().modulus();
    let k = g.rows();
    check_budget(q, k, budget)?;
    assert!(targets.iter().all(|&i| i < k), "target index out of range");
    let cols = g.column_submatrix(observed);

    // joint[e_key][b_key] = number of messages mapping there.
    let mut joint: HashMap<Vec<u64>, HashMap<Vec<u64>, u64>> = HashMap::new();
    let mut x = vec![0u64; k];
    loop {
        let mut e_key = Vec::with_capacity(observed.len());
        for j in 0..cols.cols() {
            let mut acc = 0u64;
            for (i, &xi) in x.iter().enumerate() {
                acc = (acc + xi * cols.entry(i, j)) % q;
            }
            e_key.push(acc);
        }
        let b_key: Vec<u64> = targets.iter().map(|&i| x[i]).collect();
        *joint.entry(e_key).or_default().entry(b_key).or_default() += 1;
        if !crate::codegen::advance(&mut x, q) {
            break;
        }
    }

    // Coset structure: within every observation value the target counts are
    // equal, the support size is a power of q, and it is the same for every
    // observation value.
    let mut support_size: Option<usize> = None;
    for counts in joint.values() {
        let mut values = counts.values();
        let first = *values.next().expect("nonempty by construction");
        if values.any(|&c| c != first) {
            return Err(OracleError::NonUniformConditional);
        }
        match support_size {
            None => support_size = Some(counts.len()),
            Some(size) if size != counts.len() => {
                return Err(OracleError::NonUniformConditional)
            }
            Some(_) => {}
        }
    }
    let mut size = support_size.expect("at least one observation value") as u64;
    let mut tabulated = 0u64;
    while size > 1 {
        if !size.is_multiple_of(q) {
            return Err(OracleError::NonUniformConditional);
        }
        size /= q;
        tabulated += 1;
    }

    // Rank shortcut: dimension of the joint image minus that of the
    // observation image.
    let units = unit_columns(g.field(), k, targets);
    let joint_rank = cols.transpose().stacked(&units.transpose()).rank();
    let rank_based = (joint_rank - cols.rank()) as u64;
    if tabulated != rank_based {
        return Err(OracleError::EntropyMismatch {
            tabulated,
            rank_based,
        });
    }
    Ok(EntropyValue(tabulated))
}

/// True iff the scheme leaks nothing about any single source packet to an
/// adversary reading up to `k - 1` relay packets: `H(X_i | Y_E) = 1` for
/// every source `i` and every maximal observation set.
pub fn check_weak_security_exact(g: &FieldMatrix, budget: u64) -> Result<bool, OracleError> {
    let k = g.rows();
    let n = g.cols();
    check_budget(g.field().modulus(), k, budget)?;
    let observed_size = (k - 1).min(n);
    for observed in (0..n).combinations(observed_size) {
        for i in 0..k {
            if conditional_entropy(g, &[i], &observed, budget)?.units() != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff an adversary of the given strength learns nothing about any
/// block of up to `block` source packets: `H(X_B | Y_E) = |B|` for every
/// maximal block and maximal observation set.
///
/// `block = 0` holds vacuously. Blocks are proper subsets of the sources,
/// so sizes are capped at `k - 1`.
pub fn check_block_security_exact(
    g: &FieldMatrix,
    strength: usize,
    block: usize,
    budget: u64,
) -> Result<bool, OracleError> {
    let k = g.rows();
    let n = g.cols();
    check_strength(strength, k)?;
    check_budget(g.field().modulus(), k, budget)?;
    if block == 0 {
        return Ok(true);
    }
    let block_size = block.min(k - 1);
    let observed_size = strength.min(n);
    for observed in (0..n).combinations(observed_size) {
        for targets in (0..k).combinations(block_size) {
            let h = conditional_entropy(g, &targets, &observed, budget)?;
            if h.units() != block_size as u64 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The largest block size secure against the given strength, by exhaustive
/// entropy checks.
pub fn block_security_level_of_code(
    g: &FieldMatrix,
    strength: usize,
    budget: u64,
) -> Result<usize, OracleError> {
    check_strength(strength, g.rows())?;
    let mut level = 0;
    for block in 1..g.rows() {
        if check_block_security_exact(g, strength, block, budget)? {
            level = block;
        } else {
            break;
        }
    }
    Ok(level)
}

/// Budget-free surrogate for `H(X_B | Y_E) = |B|`: the unit rows of the
/// targets must be independent of (and from) the row space of the
/// transposed observation columns.
pub fn independence_rank_criterion(g: &FieldMatrix, targets: &[usize], observed: &[usize]) -> bool {
    let k = g.rows();
    assert!(targets.iter().all(|&i| i < k), "target index out of range");
    if targets.is_empty() {
        return true;
    }
    let transposed = g.column_submatrix(observed).transpose();
    let units = unit_columns(g.field(), k, targets).transpose();
    let stacked = transposed.stacked(&units);
    stacked.rank() == transposed.rank() + targets.len()
}

/// Weak security via the rank criterion only; agrees with
/// [`check_weak_security_exact`] wherever the oracle runs, and scales past
/// the enumeration budget.
pub fn check_weak_security_by_rank(g: &FieldMatrix) -> bool {
    let k = g.rows();
    let n = g.cols();
    let observed_size = (k - 1).min(n);
    (0..n)
        .combinations(observed_size)
        .all(|observed| (0..k).all(|i| independence_rank_criterion(g, &[i], &observed)))
}

/// Block-security level via the rank criterion only.
pub fn block_security_level_by_rank(
    g: &FieldMatrix,
    strength: usize,
) -> Result<usize, OracleError> {
    let k = g.rows();
    let n = g.cols();
    check_strength(strength, k)?;
    let observed_size = strength.min(n);
    let mut level = 0;
    for block in 1..k {
        let secure = (0..n).combinations(observed_size).all(|observed| {
            (0..k)
                .combinations(block)
                .all(|targets| independence_rank_criterion(g, &targets, &observed))
        });
        if secure {
            level = block;
        } else {
            break;
        }
    }
    Ok(level)
}

fn check_strength(strength: usize, k: usize) -> Result<(), OracleError> {
    if strength < 1 || strength >= k {
        return Err(OracleError::StrengthOutOfRange {
            strength,
            max: k.saturating_sub(1),
        });
    }
    Ok(())
}

fn check_budget(q: u64, k: usize, budget: u64) -> Result<(), OracleError> {
    let space = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if space > budget as u128 {
        return Err(OracleError::BudgetExceeded { space, budget });
    }
    Ok(())
}

/// The k x |targets| matrix whose columns are the unit vectors of the
/// target coordinates.
fn unit_columns(field: FieldPrime, k: usize, targets: &[usize]) -> FieldMatrix {
    let mut m = FieldMatrix::zeros(k, targets.len(), field);
    for (col, &i) in targets.iter().enumerate() {
        m.set(i, col, 1);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::cauchy_code;
    use crate::gf::FieldPrime;

    const BUDGET: u64 = DEFAULT_ENUMERATION_BUDGET;

    fn gf(p: u64) -> FieldPrime {
        FieldPrime::new(p).unwrap()
    }

    fn m(p: u64, rows: &[Vec<u64>]) -> FieldMatrix {
        FieldMatrix::from_rows(gf(p), rows)
    }

    #[test]
    fn entropy_with_no_observations_is_block_size() {
        let g = m(5, &[vec![1, 1, 1], vec![1, 2, 3]]);
        assert_eq!(conditional_entropy(&g, &[0], &[], BUDGET).unwrap().units(), 1);
        assert_eq!(
            conditional_entropy(&g, &[0, 1], &[], BUDGET).unwrap().units(),
            2
        );
    }

    #[test]
    fn k_independent_columns_reveal_everything() {
        let g = m(5, &[vec![1, 1, 1], vec![1, 2, 3]]);
        assert_eq!(
            conditional_entropy(&g, &[0, 1], &[0, 1], BUDGET)
                .unwrap()
                .units(),
            0
        );
    }

    #[test]
    fn single_sum_column_hides_each_addend() {
        // Two sources, one relay carrying x1 + x2: observing the sum leaves
        // each addend uniform.
        let g = m(3, &[vec![1], vec![1]]);
        assert_eq!(
            conditional_entropy(&g, &[0], &[0], BUDGET).unwrap().units(),
            1
        );
        assert_eq!(
            conditional_entropy(&g, &[1], &[0], BUDGET).unwrap().units(),
            1
        );
        // Jointly the pair is constrained to a coset of size 3.
        assert_eq!(
            conditional_entropy(&g, &[0, 1], &[0], BUDGET)
                .unwrap()
                .units(),
            1
        );
    }

    #[test]
    fn weak_security_exact_examples() {
        assert!(check_weak_security_exact(&m(5, &[vec![1, 1, 1], vec![1, 2, 3]]), BUDGET).unwrap());
        // Weight-1 column leaks a packet.
        assert!(
            !check_weak_security_exact(&m(5, &[vec![1, 1, 0], vec![0, 1, 1]]), BUDGET).unwrap()
        );
        assert!(!check_weak_security_exact(
            &FieldMatrix::identity(2, gf(5)),
            BUDGET
        )
        .unwrap());
    }

    #[test]
    fn block_security_of_cauchy_matches_dense_profile() {
        let code = cauchy_code(3, 4, gf(7)).unwrap();
        let g = code.matrix();
        assert!(check_block_security_exact(g, 1, 2, BUDGET).unwrap());
        assert!(check_block_security_exact(g, 2, 1, BUDGET).unwrap());
        assert!(!check_block_security_exact(g, 2, 2, BUDGET).unwrap());
        assert_eq!(block_security_level_of_code(g, 1, BUDGET).unwrap(), 2);
        assert_eq!(block_security_level_of_code(g, 2, BUDGET).unwrap(), 1);
        assert_eq!(block_security_level_by_rank(g, 1).unwrap(), 2);
        assert_eq!(block_security_level_by_rank(g, 2).unwrap(), 1);
    }

    #[test]
    fn block_zero_is_vacuous_and_strength_is_validated() {
        let g = m(5, &[vec![1, 1], vec![1, 2]]);
        assert!(check_block_security_exact(&g, 1, 0, BUDGET).unwrap());
        assert_eq!(
            check_block_security_exact(&g, 2, 1, BUDGET),
            Err(OracleError::StrengthOutOfRange {
                strength: 2,
                max: 1
            })
        );
    }

    #[test]
    fn weak_security_is_block_security_at_max_strength_block_one() {
        for rows in [
            vec![vec![1u64, 1, 1], vec![1, 2, 3]],
            vec![vec![1, 1, 0], vec![0, 1, 1]],
            vec![vec![1, 0], vec![0, 1]],
        ] {
            let g = m(5, &rows);
            let k = g.rows();
            assert_eq!(
                check_weak_security_exact(&g, BUDGET).unwrap(),
                check_block_security_exact(&g, k - 1, 1, BUDGET).unwrap()
            );
        }
    }

    #[test]
    fn identity_has_level_zero_and_secure_codes_at_least_one() {
        let id = FieldMatrix::identity(3, gf(5));
        assert_eq!(block_security_level_of_code(&id, 1, BUDGET).unwrap(), 0);

        let g = m(5, &[vec![1, 1, 1], vec![1, 2, 3]]);
        assert!(check_weak_security_exact(&g, BUDGET).unwrap());
        assert!(block_security_level_of_code(&g, 1, BUDGET).unwrap() >= 1);
    }

    #[test]
    fn rank_criterion_trivial_cases() {
        let g = m(5, &[vec![1, 1, 1], vec![1, 2, 3]]);
        assert!(independence_rank_criterion(&g, &[], &[0, 1]));
        assert!(independence_rank_criterion(&g, &[0, 1], &[]));
    }

    #[test]
    fn budget_is_enforced() {
        let g = m(65537, &[vec![1, 1, 1], vec![1, 2, 3]]);
        assert!(matches!(
            conditional_entropy(&g, &[0], &[0], BUDGET),
            Err(OracleError::BudgetExceeded { .. })
        ));
        assert!(matches!(
            check_weak_security_exact(&g, BUDGET),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn entropy_chain_properties_on_small_sweep() {
        // 0 <= H <= |B|, and H is monotone non-increasing as the
        // observation set grows.
        let g = m(3, &[vec![1, 1, 0, 2], vec![0, 1, 1, 1], vec![2, 0, 1, 1]]);
        use itertools::Itertools;
        for b_size in 1..=2usize {
            for targets in (0..3).combinations(b_size) {
                for e_size in 0..=2usize {
                    for observed in (0..4).combinations(e_size) {
                        let h = conditional_entropy(&g, &targets, &observed, BUDGET)
                            .unwrap()
                            .units();
                        assert!(h <= b_size as u64);
                        for extra in 0..4usize {
                            if observed.contains(&extra) {
                                continue;
                            }
                            let mut bigger = observed.clone();
                            bigger.push(extra);
                            bigger.sort_unstable();
                            let h2 = conditional_entropy(&g, &targets, &bigger, BUDGET)
                                .unwrap()
                                .units();
                            assert!(h2 <= h);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn maximal_observation_reduction_matches_full_quantification() {
        use itertools::Itertools;
        // Tiny sizes: verify that checking only |E| = k - 1 (and |B| = b)
        // agrees with quantifying over all smaller sets as the definitions
        // do.
        let candidates = [
            m(3, &[vec![1, 1, 1], vec![1, 2, 1]]),
            m(3, &[vec![1, 1, 0], vec![0, 1, 1]]),
            m(3, &[vec![1, 2, 1], vec![2, 1, 1]]),
            m(5, &[vec![1, 1, 1], vec![1, 2, 3]]),
            m(5, &[vec![1, 0, 1], vec![0, 1, 1]]),
        ];
        for g in &candidates {
            let k = g.rows();
            let n = g.cols();
            let reduced = check_weak_security_exact(g, BUDGET).unwrap();
            let mut full = true;
            for e_size in 1..k.min(n + 1) {
                for observed in (0..n).combinations(e_size) {
                    for i in 0..k {
                        full &= conditional_entropy(g, &[i], &observed, BUDGET)
                            .unwrap()
                            .units()
                            == 1;
                    }
                }
            }
            assert_eq!(reduced, full);

            // Same for blocks at strength 1.
            let reduced_block = check_block_security_exact(g, 1, 1, BUDGET).unwrap();
            let mut full_block = true;
            for observed in (0..n).combinations(1) {
                for i in 0..k {
                    full_block &= conditional_entropy(g, &[i], &observed, BUDGET)
                        .unwrap()
                        .units()
                        == 1;
                }
            }
            assert_eq!(reduced_block, full_block);
        }
    }
}
