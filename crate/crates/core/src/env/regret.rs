use super::round::Round;
use crate::error::{Error, Result};

/// `max_k r(k) − max{r(m), r(n)}`; with no second pick only `r(m)` counts.
pub fn instantaneous_regret(round: &Round, m: usize, n: Option<usize>) -> Result<f64> {
    let k = round.k();
    if m >= k || n.is_some_and(|n| n >= k) {
        return Err(Error::InvalidArgument(format!("item index out of range for K={k}")));
    }
    let rewards = round.rewards();
    let got = n.map_or(rewards[m], |n| rewards[m].max(rewards[n]));
    Ok((round.best_reward() - got).max(0.0))
}

/// Error of the first pick rescaled to `[0, 1]`: `(max r − r(m)) / 2`.
///
/// With star rewards `(stars − 3)/2` this is the star gap divided by 4.
pub fn pick_error(round: &Round, m: usize) -> Result<f64> {
    if m >= round.k() {
        return Err(Error::InvalidArgument(format!("item index {m} out of range")));
    }
    Ok(((round.best_reward() - round.rewards()[m]) / 2.0).clamp(0.0, 1.0))
}
