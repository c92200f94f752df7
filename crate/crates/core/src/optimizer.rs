//! Exhaustive search over the irreducible blocks `{m_j}` of a
//! phase-covariant Choi operator.
//!
//! Each block is scored as if it carried the whole weight (`p = 1`). When
//! `M = N + k d` the uniform block `(k, ..., k)` should be the unique winner
//! for both figures of merit; otherwise every tied block is reported.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fidelity::{ln_weight, weight_over_power};
use crate::symspace::{enumerate_occupations, OccupationVector};

/// Relative tolerance under which two block scores count as tied.
pub const TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Merit {
    Single,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScore {
    pub block: OccupationVector,
    pub f_single_block: f64,
    pub f_global_block: f64,
    /// Global score keeping only the diagonal `n' = n''` terms.
    pub f_global_diagonal: f64,
}

impl BlockScore {
    pub fn score(&self, merit: Merit) -> f64 {
        match merit {
            Merit::Single => self.f_single_block,
            Merit::Global => self.f_global_block,
        }
    }
}

/// The full global block fidelity and its diagonal-only truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalBlockFidelity {
    pub full: f64,
    pub diagonal_only: f64,
}

/// All blocks with `d` levels and total `excess = M - N`.
pub fn enumerate_blocks(d: usize, excess: usize) -> Result<Vec<OccupationVector>> {
    enumerate_occupations(excess, d)
}

fn check(block: &OccupationVector, d: usize, n_in: usize, m_out: usize) -> Result<()> {
    if block.d() != d {
        return domain(format!("block {block} has {} levels, expected {d}", block.d()));
    }
    if n_in == 0 {
        return domain("blocks need at least one input copy");
    }
    if m_out.checked_sub(n_in) != Some(block.total()) {
        return domain(format!(
            "block {block} has total {}, expected M - N for N={n_in}, M={m_out}",
            block.total()
        ));
    }
    Ok(())
}

/// Single-qudit fidelity contributed by `block` at unit weight.
///
/// Diagonal terms pair each input label `{n'}` (`|n'| = N`) with itself and
/// contribute `C(N; n') / d^{N+1}`, which sums to `1/d`. Off-diagonal terms
/// pair `{n} + e_i` with `{n} + e_j` for `|n| = N - 1`, `i != j`, and
/// contribute `(1/M) N!/prod n! sqrt((m_i+n_i+1)(m_j+n_j+1) / ((n_i+1)(n_j+1)))`
/// over `d^{N+1}`.
pub fn block_single_fidelity(
    block: &OccupationVector,
    d: usize,
    n_in: usize,
    m_out: usize,
) -> Result<f64> {
    check(block, d, n_in, m_out)?;
    let m = block.counts();
    let mf = m_out as f64;
    let mut terms: Vec<f64> = enumerate_occupations(n_in, d)?
        .iter()
        .map(|occ| weight_over_power(occ, 1, d, n_in + 1))
        .collect();
    for occ in enumerate_occupations(n_in - 1, d)? {
        let c = occ.counts();
        let w = weight_over_power(&occ, n_in, d, n_in + 1);
        for i in 0..d {
            for j in (0..d).filter(|&j| j != i) {
                let num = ((m[i] + c[i] + 1) * (m[j] + c[j] + 1)) as f64;
                let den = ((c[i] + 1) * (c[j] + 1)) as f64;
                terms.push(w * (num / den).sqrt() / mf);
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

/// `Tr[|psi0><psi0|^{(x)(M+N)} |r_m><r_m|]` at unit weight.
///
/// `full` squares the summed amplitude `sum_n <psi0|{m}+{n}> <psi0|{n}>`,
/// keeping every cross term. `diagonal_only` sums the squared moduli of the
/// individual terms instead.
pub fn block_global_fidelity(
    block: &OccupationVector,
    d: usize,
    n_in: usize,
    m_out: usize,
) -> Result<GlobalBlockFidelity> {
    check(block, d, n_in, m_out)?;
    let ln_d = (d as f64).ln() * (m_out + n_in) as f64;
    let mut amps = Vec::new();
    for occ in enumerate_occupations(n_in, d)? {
        let ln_sq = ln_weight(&occ.add(block)?) + ln_weight(&occ) - ln_d;
        amps.push((0.5 * ln_sq).exp());
    }
    amps.sort_by(f64::total_cmp);
    let amp: f64 = amps.iter().sum();
    let diagonal_only = amps.iter().map(|a| a * a).sum();
    Ok(GlobalBlockFidelity {
        full: amp * amp,
        diagonal_only,
    })
}

/// Scores of every block for an `N -> M` machine, in canonical order.
pub fn score_blocks(d: usize, n_in: usize, m_out: usize) -> Result<Vec<BlockScore>> {
    let Some(excess) = m_out.checked_sub(n_in) else {
        return domain(format!("M = {m_out} is smaller than N = {n_in}"));
    };
    enumerate_blocks(d, excess)?
        .into_iter()
        .map(|block| {
            let f_single_block = block_single_fidelity(&block, d, n_in, m_out)?;
            let g = block_global_fidelity(&block, d, n_in, m_out)?;
            Ok(BlockScore {
                block,
                f_single_block,
                f_global_block: g.full,
                f_global_diagonal: g.diagonal_only,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSearch {
    pub d: usize,
    pub n_in: usize,
    pub m_out: usize,
    pub merit: Merit,
    pub best_score: f64,
    /// Every block within [`TIE_RTOL`] of the best score, canonical order.
    pub winners: Vec<OccupationVector>,
    pub scores: Vec<BlockScore>,
}

impl BlockSearch {
    pub fn is_unique(&self) -> bool {
        self.winners.len() == 1
    }

    /// True when the single winner is `(k, ..., k)`.
    pub fn uniform_winner(&self) -> Option<usize> {
        match self.winners.as_slice() {
            [w] => {
                let first = w.counts()[0];
                w.counts().iter().all(|&c| c == first).then_some(first)
            }
            _ => None,
        }
    }
}

/// Exhaustive argmax over all blocks under `merit`.
pub fn find_optimal_blocks(
    d: usize,
    n_in: usize,
    m_out: usize,
    merit: Merit,
) -> Result<BlockSearch> {
    let scores = score_blocks(d, n_in, m_out)?;
    Ok(select(d, n_in, m_out, merit, scores))
}

/// Picks the argmax set out of precomputed scores.
pub fn select(
    d: usize,
    n_in: usize,
    m_out: usize,
    merit: Merit,
    scores: Vec<BlockScore>,
) -> BlockSearch {
    let best_score = scores
        .iter()
        .map(|s| s.score(merit))
        .fold(f64::NEG_INFINITY, f64::max);
    let winners = scores
        .iter()
        .filter(|s| s.score(merit) >= best_score - TIE_RTOL * best_score.abs())
        .map(|s| s.block.clone())
        .collect();
    BlockSearch {
        d,
        n_in,
        m_out,
        merit,
        best_score,
        winners,
        scores,
    }
}
