//! Exhaustive search for a relay-output partition that is independent of
//! the destination observations.
//!
//! A candidate extractor is a set partition of the relay alphabet; a
//! partition is independent exactly when every block's joint mass with
//! `(Y1, Y2)` factorizes. Valid blocks are precomputed (the per-block
//! independence test prunes the partition lattice), and partitions are
//! enumerated as exact covers by valid blocks, finest candidates first.

use num_rational::BigRational;
use num_traits::Zero;

use super::bits::{entropy, Bits};

/// Joint distribution of the relay output against the destination pair.
pub(super) struct JointTable {
    /// Relay output values with positive probability, ascending.
    pub yr_vals: Vec<u32>,
    /// Marginal mass of each relay value.
    pub p_yr: Vec<BigRational>,
    /// `p_joint[i][j]`: mass of relay value `i` with destination cell `j`.
    pub p_joint: Vec<Vec<BigRational>>,
    /// Marginal mass of each destination cell.
    pub p_cells: Vec<BigRational>,
}

impl JointTable {
    /// A block (bitmask over `yr_vals`) is independence-compatible when
    /// its joint mass with every destination cell factorizes exactly.
    fn block_is_valid(&self, mask: u32) -> bool {
        let mut p_block = BigRational::zero();
        for i in 0..self.yr_vals.len() {
            if mask & (1 << i) != 0 {
                p_block += self.p_yr[i].clone();
            }
        }
        for j in 0..self.p_cells.len() {
            let mut joint = BigRational::zero();
            for i in 0..self.yr_vals.len() {
                if mask & (1 << i) != 0 {
                    joint += self.p_joint[i][j].clone();
                }
            }
            if joint != p_block.clone() * self.p_cells[j].clone() {
                return false;
            }
        }
        true
    }

    fn block_mass(&self, mask: u32) -> BigRational {
        let mut p = BigRational::zero();
        for i in 0..self.yr_vals.len() {
            if mask & (1 << i) != 0 {
                p += self.p_yr[i].clone();
            }
        }
        p
    }
}

pub(super) struct SearchOutcome {
    /// Blocks (bitmasks) of the best independent partition found.
    pub best_blocks: Option<Vec<u32>>,
    pub best_entropy: Bits,
    /// Whether the best partition reaches the target entropy.
    pub achieved: bool,
}

/// Enumerate independent partitions and return the first one whose block
/// entropy reaches `target`, or the maximum-entropy independent partition
/// otherwise.
pub(super) fn exhaustive_search(table: &JointTable, target: &Bits) -> SearchOutcome {
    let m = table.yr_vals.len();
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut valid: Vec<u32> = (1..=full).filter(|&s| table.block_is_valid(s)).collect();
    // Finest partitions first: trying small blocks first reaches the
    // maximum-entropy partition early when one exists.
    valid.sort_by_key(|s| (s.count_ones(), *s));
    // Index valid blocks by their lowest set bit for the cover search.
    let mut by_lowest: Vec<Vec<u32>> = vec![Vec::new(); m];
    for &s in &valid {
        by_lowest[s.trailing_zeros() as usize].push(s);
    }

    let mut best: Option<(Vec<u32>, Bits)> = None;
    let mut stack: Vec<u32> = Vec::new();
    let mut achieved = false;
    cover(
        table,
        target,
        &by_lowest,
        full,
        0,
        &mut stack,
        &mut best,
        &mut achieved,
    );
    match best {
        Some((blocks, h)) => SearchOutcome {
            best_blocks: Some(blocks),
            best_entropy: h,
            achieved,
        },
        None => SearchOutcome {
            best_blocks: None,
            best_entropy: Bits::zero(),
            achieved: false,
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn cover(
    table: &JointTable,
    target: &Bits,
    by_lowest: &[Vec<u32>],
    full: u32,
    covered: u32,
    stack: &mut Vec<u32>,
    best: &mut Option<(Vec<u32>, Bits)>,
    achieved: &mut bool,
) {
    if *achieved {
        return;
    }
    if covered == full {
        let masses: Vec<BigRational> = stack.iter().map(|&s| table.block_mass(s)).collect();
        let h = entropy(&masses);
        let better = match best {
            None => true,
            Some((_, bh)) => h.partial_cmp(bh) == Some(std::cmp::Ordering::Greater),
        };
        if better {
            *best = Some((stack.clone(), h.clone()));
        }
        if h.eq_within(target, 1e-12) {
            *achieved = true;
        }
        return;
    }
    let lowest = (!covered & full).trailing_zeros() as usize;
    for &s in &by_lowest[lowest] {
        if s & covered != 0 {
            continue;
        }
        stack.push(s);
        cover(table, target, by_lowest, full, covered | s, stack, best, achieved);
        stack.pop();
        if *achieved {
            return;
        }
    }
}
