//! Relative feedback between two shown items.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_reward(r: f64) -> Result<()> {
    if r.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("reward {r} outside [-1, 1]")))
    }
}

/// `P(y = +1) = (1 + ½(r_m − r_n)) / 2`.
pub fn preference_probability(r_m: f64, r_n: f64) -> Result<f64> {
    check_reward(r_m)?;
    check_reward(r_n)?;
    Ok((1.0 + 0.5 * (r_m - r_n)) / 2.0)
}

/// Bernoulli preference bit biased toward the higher-reward item.
pub fn draw_feedback<R: Rng + ?Sized>(r_m: f64, r_n: f64, rng: &mut R) -> Result<i8> {
    let p = preference_probability(r_m, r_n)?;
    Ok(if rng.random::<f64>() < p { 1 } else { -1 })
}

/// The annotator sees each reward turned into a ±1 coin with bias
/// `(1 ± r)/2` and reports which coin came out higher; ties are split
/// uniformly. Distributionally identical to [`draw_feedback`].
pub fn draw_feedback_noisy_reward<R: Rng + ?Sized>(r_m: f64, r_n: f64, rng: &mut R) -> Result<i8> {
    check_reward(r_m)?;
    check_reward(r_n)?;
    let mut coin = |r: f64| if rng.random::<f64>() < (1.0 + r) / 2.0 { 1i8 } else { -1 };
    let (a, b) = (coin(r_m), coin(r_n));
    Ok(match a.cmp(&b) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => {
            if rng.random::<bool>() {
                1
            } else {
                -1
            }
        }
    })
}

/// Which feedback process an environment uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackMechanism {
    #[default]
    Bernoulli,
    NoisyReward,
}

impl FeedbackMechanism {
    pub fn draw<R: Rng + ?Sized>(self, r_m: f64, r_n: f64, rng: &mut R) -> Result<i8> {
        match self {
            FeedbackMechanism::Bernoulli => draw_feedback(r_m, r_n, rng),
            FeedbackMechanism::NoisyReward => draw_feedback_noisy_reward(r_m, r_n, rng),
        }
    }
}
