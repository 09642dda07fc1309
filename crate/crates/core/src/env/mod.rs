//! Environments: rounds, stochastic preference feedback, regret and error
//! accounting, synthetic generators and analysis diagnostics.

mod diagnostics;
mod feedback;
mod regret;
mod round;
mod synth;
mod trace;

pub use diagnostics::{approx_error_q, lemma1_check, lemma1_eps, theoretical_eta, TheoreticalEta};
pub use feedback::{draw_feedback, draw_feedback_noisy_reward, preference_probability, FeedbackMechanism};
pub use regret::{instantaneous_regret, pick_error};
pub use round::Round;
pub(crate) use round::UNIT_TOL;
pub use synth::{SynthEnv, SynthSpec};
pub use trace::{write_trace_csv, TraceRecord, TRACE_HEADER};
