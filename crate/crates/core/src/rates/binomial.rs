//! Binomial building blocks: odd-parity probabilities and majority votes.

use serde::{Deserialize, Serialize};

/// Terms this far below the mode term are negligible.
const TAIL_CUTOFF: f64 = 1e-300;

/// `P(K = k)` for `K ~ Binomial(n, p)`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Probability that an odd number of `n` independent events, each with
/// probability `p`, occur. Evaluated as the explicit sum over odd counts.
///
/// Terms are generated by the ratio recurrence outward from the mode, starting
/// at 1 there, and the odd-count mass is divided by the total mass. This never
/// overflows or underflows where it matters, for any `n`.
pub fn odd_parity_prob(n: u64, p: f64) -> f64 {
    if n == 0 || p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return if n % 2 == 1 { 1.0 } else { 0.0 };
    }
    let ratio = p / (1.0 - p);
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);
    let (mut total, mut odd) = (1.0, if mode % 2 == 1 { 1.0 } else { 0.0 });
    // term_{k+1} / term_k = ratio (n - k) / (k + 1)
    let mut term = 1.0;
    for k in mode..n {
        term *= ratio * (n - k) as f64 / (k + 1) as f64;
        if term < TAIL_CUTOFF {
            break;
        }
        total += term;
        if (k + 1) % 2 == 1 {
            odd += term;
        }
    }
    term = 1.0;
    for k in (1..=mode).rev() {
        term *= k as f64 / ((n - k + 1) as f64 * ratio);
        if term < TAIL_CUTOFF {
            break;
        }
        total += term;
        if (k - 1) % 2 == 1 {
            odd += term;
        }
    }
    odd / total
}

/// `1 - (1 - p)^n`, the chance that at least one of `n` trials succeeds,
/// without cancellation when the result is small.
pub fn any_success(n: u64, p: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    -(n as f64 * (-p).ln_1p()).exp_m1()
}

/// Closed form `(1 - (1 - 2p)^n) / 2` of [`odd_parity_prob`].
pub fn odd_parity_closed_form(n: u64, p: f64) -> f64 {
    (1.0 - (1.0 - 2.0 * p).powf(n as f64)) / 2.0
}

/// Odd-parity probability of independent events with heterogeneous
/// probabilities, via the product `prod (1 - 2 p_i)`.
pub fn odd_parity_of(probs: impl IntoIterator<Item = f64>) -> f64 {
    (1.0 - probs.into_iter().map(|p| 1.0 - 2.0 * p).product::<f64>()) / 2.0
}

/// What a split majority vote resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// The vote is inconclusive and the measurement counts as failed (heralded).
    #[default]
    Abstain,
    /// Pick either outcome with probability one half.
    CoinFlip,
    /// Count the tie as a wrong outcome.
    Error,
}

impl std::str::FromStr for TiePolicy {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "abstain" => Ok(TiePolicy::Abstain),
            "coin-flip" | "coin" => Ok(TiePolicy::CoinFlip),
            "error" => Ok(TiePolicy::Error),
            _ => Err(crate::error::invalid("tie policy", format!("{s:?} (expected abstain, coin-flip or error)"))),
        }
    }
}

impl std::fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TiePolicy::Abstain => "abstain",
            TiePolicy::CoinFlip => "coin-flip",
            TiePolicy::Error => "error",
        })
    }
}

/// Outcome probabilities of a majority vote over `m` voters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteOutcome {
    pub wrong: f64,
    pub abstain: f64,
}

/// Majority vote over `m` independent voters, each wrong with probability `p`.
pub fn majority_vote(m: u64, p: f64, tie: TiePolicy) -> VoteOutcome {
    let mut out = VoteOutcome { wrong: 0.0, abstain: 0.0 };
    if m == 0 {
        out.abstain = 1.0;
        return out;
    }
    for j in 0..=m {
        let pj = binomial_pmf(m, j, p);
        match (2 * j).cmp(&m) {
            std::cmp::Ordering::Greater => out.wrong += pj,
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Equal => match tie {
                TiePolicy::Abstain => out.abstain += pj,
                TiePolicy::CoinFlip => out.wrong += 0.5 * pj,
                TiePolicy::Error => out.wrong += pj,
            },
        }
    }
    out
}
