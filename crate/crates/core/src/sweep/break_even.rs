use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::rates::{tree_general, TreeParams, VotePolicy};

/// Grid used to check that the objective crosses zero once.
const MONOTONE_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakEvenKind {
    /// Physical loss at which effective loss equals physical loss.
    LossThreshold,
    /// Physical loss at which the effective error equals `p_local`.
    ErrorBreakEven,
    /// Smallest physical loss at which either loss or error stops improving.
    /// With `p_local = 0` the error never degrades and this is the loss threshold.
    Combined,
}

impl std::str::FromStr for BreakEvenKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loss" | "loss-threshold" => Ok(BreakEvenKind::LossThreshold),
            "error" | "error-break-even" => Ok(BreakEvenKind::ErrorBreakEven),
            "both" | "combined" => Ok(BreakEvenKind::Combined),
            _ => Err(crate::error::invalid("break-even kind", format!("{s:?} (expected loss, error or both)"))),
        }
    }
}

/// Break-even search over the physical loss rate of a tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakEvenQuery {
    pub params: TreeParams,
    pub p_local: f64,
    pub policy: VotePolicy,
    pub kind: BreakEvenKind,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

impl BreakEvenQuery {
    pub fn new(params: TreeParams, p_local: f64, policy: VotePolicy, kind: BreakEvenKind) -> Self {
        Self { params, p_local, policy, kind, lo: 1e-6, hi: 0.5, tol: 1e-4 }
    }

    fn objective(&self, p_loss: f64) -> Result<f64> {
        let r = tree_general(&self.params, p_loss, self.p_local, &self.policy)?;
        Ok(match self.kind {
            BreakEvenKind::LossThreshold => r.effective_loss - p_loss,
            BreakEvenKind::ErrorBreakEven => r.effective_error - self.p_local,
            BreakEvenKind::Combined => {
                let (loss, error) = (r.effective_loss - p_loss, r.effective_error - self.p_local);
                if error > 0.0 {
                    loss.max(error)
                } else {
                    loss
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakEven {
    pub root: f64,
    pub iterations: u32,
    /// Final bracket width.
    pub width: f64,
}

/// Bisection for a sign change of `f` on `[lo, hi]` down to width `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<BreakEven> {
    // written so that NaN bounds are rejected too
    if !matches!(lo.partial_cmp(&hi), Some(std::cmp::Ordering::Less)) || tol.is_nan() || tol <= 0.0 {
        return Err(crate::error::invalid("bracket", format!("[{lo}, {hi}] with tol {tol}")));
    }
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo == 0.0 {
        return Ok(BreakEven { root: lo, iterations: 0, width: 0.0 });
    }
    if f_hi == 0.0 {
        return Ok(BreakEven { root: hi, iterations: 0, width: 0.0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    let mut iterations = 0;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        iterations += 1;
        if fm == 0.0 {
            return Ok(BreakEven { root: m, iterations, width: 0.0 });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(BreakEven { root: 0.5 * (a + b), iterations, width: b - a })
}

/// Sign changes of `f` on an even grid, or `None` when `f` vanishes at every
/// grid point.
fn sign_changes(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Option<usize>> {
    let mut changes = 0;
    let mut prev = f(lo)?;
    let mut all_zero = prev == 0.0;
    for i in 1..=MONOTONE_GRID {
        let v = f(lo + (hi - lo) * i as f64 / MONOTONE_GRID as f64)?;
        all_zero &= v == 0.0;
        if v != 0.0 && prev != 0.0 && v.signum() != prev.signum() {
            changes += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    Ok((!all_zero).then_some(changes))
}

/// Finds the requested crossing. Fails with [`Error::Bracket`] when the
/// bracket has no sign change and with [`Error::Domain`] when the objective
/// changes sign more than once on a fine grid (the root would be ambiguous).
pub fn find_break_even(q: &BreakEvenQuery) -> Result<BreakEven> {
    check_probability("p_local", q.p_local)?;
    check_probability("bracket lo", q.lo)?;
    check_probability("bracket hi", q.hi)?;
    let Some(changes) = sign_changes(|x| q.objective(x), q.lo, q.hi)? else {
        return Err(Error::Domain {
            what: "break-even",
            reason: format!("objective is zero across [{}, {}]; there is no crossing to locate", q.lo, q.hi),
        });
    };
    if changes > 1 {
        return Err(Error::Domain {
            what: "break-even",
            reason: format!("objective changes sign {changes} times on [{}, {}]; narrow the bracket", q.lo, q.hi),
        });
    }
    bisect(|x| q.objective(x), q.lo, q.hi, q.tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(kind: BreakEvenKind, voting: bool) -> BreakEvenQuery {
        let policy = VotePolicy { voting, ..VotePolicy::default() };
        BreakEvenQuery::new(TreeParams::new(vec![3, 3]).unwrap(), 1e-3, policy, kind)
    }

    #[test]
    fn headline_thresholds() {
        let t = find_break_even(&query(BreakEvenKind::LossThreshold, true)).unwrap();
        assert!((t.root - 0.195).abs() < 0.01, "{t:?}");
        let e = find_break_even(&query(BreakEvenKind::ErrorBreakEven, true)).unwrap();
        assert!((e.root - 0.1).abs() < 0.01, "{e:?}");
        assert!(e.width <= 1e-4);
    }

    #[test]
    fn loss_threshold_without_ties_is_the_printed_formula_root() {
        let t = find_break_even(&query(BreakEvenKind::LossThreshold, false)).unwrap();
        let f = |e: f64| (1.0 - (1.0 - e).powi(4)).powi(3) - e;
        assert!(f(t.root - 1e-4) < 0.0 && f(t.root + 1e-4) > 0.0);
    }

    #[test]
    fn no_crossing_is_a_bracket_error() {
        // without voting the error never drops to p_local
        let r = find_break_even(&query(BreakEvenKind::ErrorBreakEven, false));
        assert!(matches!(r, Err(Error::Bracket { .. })), "{r:?}");
    }

    #[test]
    fn bisect_finds_simple_root() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-10).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-9);
        assert!(bisect(Ok, 1.0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn sign_change_count() {
        assert_eq!(sign_changes(|x| Ok(x - 0.3), 0.0, 1.0).unwrap(), Some(1));
        assert_eq!(sign_changes(|x| Ok((x - 0.2) * (x - 0.7)), 0.0, 1.0).unwrap(), Some(2));
        assert_eq!(sign_changes(|x| Ok(x * x + 1.0), 0.0, 1.0).unwrap(), Some(0));
        assert_eq!(sign_changes(|_| Ok(0.0), 0.0, 1.0).unwrap(), None);
    }

    #[test]
    fn combined_is_the_earlier_crossing() {
        let both = find_break_even(&query(BreakEvenKind::Combined, true)).unwrap();
        let error = find_break_even(&query(BreakEvenKind::ErrorBreakEven, true)).unwrap();
        assert!((both.root - error.root).abs() < 2e-4);

        // error-free measurements never degrade, so only loss matters
        let mut q = query(BreakEvenKind::Combined, true);
        q.p_local = 0.0;
        let both = find_break_even(&q).unwrap();
        q.kind = BreakEvenKind::LossThreshold;
        let loss = find_break_even(&q).unwrap();
        assert!((both.root - loss.root).abs() < 2e-4);
        q.kind = BreakEvenKind::ErrorBreakEven;
        assert!(matches!(find_break_even(&q), Err(Error::Domain { .. })));
    }
}
