//! Analysis quantities: approximation error `q_t`, the theoretical `η_t`
//! schedule and the per-round regret bound check.

use super::round::Round;
use crate::error::{check_dim, Error, Result};

/// `q_t = max_m |r(t, m) − u·Φ(x_t, m)|`.
pub fn approx_error_q(round: &Round, u: &[f64]) -> Result<f64> {
    check_dim(round.dim(), u.len())?;
    Ok(round
        .items()
        .iter()
        .zip(round.rewards())
        .map(|(item, r)| (r - item.dot_dense_unchecked(u)).abs())
        .fold(0.0, f64::max))
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("delta must lie in (0, 1], got {delta}")))
    }
}

fn confidence_term(t: u64, delta: f64) -> f64 {
    36.0 * ((t as f64 + 4.0) / delta).ln()
}

/// `η_t = d₀(u, 0) + 2 Σ_{s≤t} q_s + 2 Σ_{s<t} h_s + 36 ln((t+4)/δ)`
/// with `h_s = z_sᵀ A_{s−1}⁻¹ z_s`.
///
/// Uses the first `t` entries of `q_history` and the first `t − 1` of
/// `h_history` (fewer if the histories are shorter).
pub fn theoretical_eta(t: u64, d0_u: f64, q_history: &[f64], h_history: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if t == 0 {
        return Err(Error::InvalidArgument("rounds are numbered from 1".into()));
    }
    if !(d0_u >= 0.0) {
        return Err(Error::OutOfRange(format!("d0 must be non-negative, got {d0_u}")));
    }
    let q: f64 = q_history.iter().take(t as usize).sum();
    let h: f64 = h_history.iter().take(t as usize - 1).sum();
    Ok(d0_u + 2.0 * q + 2.0 * h + confidence_term(t, delta))
}

/// Running form of [`theoretical_eta`].
#[derive(Clone, Debug, PartialEq)]
pub struct TheoreticalEta {
    d0: f64,
    delta: f64,
    t: u64,
    sum_q: f64,
    sum_h: f64,
}

impl TheoreticalEta {
    /// `d₀(u, 0) = ½‖u‖²` because `A₀ = I`.
    pub fn new(u_norm: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(TheoreticalEta {
            d0: 0.5 * u_norm * u_norm,
            delta,
            t: 0,
            sum_q: 0.0,
            sum_h: 0.0,
        })
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// Starts round `t + 1` with approximation error `q_t`; returns `η_t`.
    pub fn begin_round(&mut self, q_t: f64) -> f64 {
        self.t += 1;
        self.sum_q += q_t;
        self.current()
    }

    /// Records `h_t` for the round just played.
    pub fn record_update(&mut self, h_t: f64) {
        self.sum_h += h_t;
    }

    pub fn current(&self) -> f64 {
        self.d0 + 2.0 * self.sum_q + 2.0 * self.sum_h + confidence_term(self.t.max(1), self.delta)
    }

    pub fn round(&self) -> u64 {
        self.t
    }
}

/// `ε_t = √(2 h_t η_t)`; zero for rounds without a query.
pub fn lemma1_eps(h_t: f64, eta_t: f64) -> f64 {
    (2.0 * h_t * eta_t).max(0.0).sqrt()
}

/// Whether `r_t ≤ 2 q_t + 2 ε_t` holds (up to rounding).
pub fn lemma1_check(regret: f64, eps_t: f64, q_t: f64) -> bool {
    regret <= 2.0 * q_t + 2.0 * eps_t + 1e-12
}
