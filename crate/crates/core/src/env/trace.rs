//! Per-round trace records and their CSV form.
//!
//! Columns, in order:
//!
//! | column     | meaning                                                    |
//! |------------|------------------------------------------------------------|
//! | t          | round number, from 1                                       |
//! | policy     | algorithm name                                             |
//! | m          | first (or only) pick                                       |
//! | n          | second pick; empty when none was made                      |
//! | y          | feedback bit (+1/−1); empty when no feedback was requested |
//! | queried    | `true` when feedback was requested                         |
//! | regret     | instantaneous regret                                       |
//! | cum_regret | running sum of `regret`                                    |
//! | error      | first-pick error in `[0, 1]`                               |
//! | eps_t      | `√(2 zᵀA⁻¹z η_t)` for the update (0 if none)               |
//! | q_t        | approximation error; empty when the environment has no `u` |
//!
//! For the single-pick baselines `y` is +1 when the pick was best and −1
//! otherwise.

use std::io::Write;

pub const TRACE_HEADER: &str = "t,policy,m,n,y,queried,regret,cum_regret,error,eps_t,q_t";

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub m: usize,
    pub n: Option<usize>,
    pub y: Option<i8>,
    pub instantaneous_regret: f64,
    pub error: f64,
    pub queried: bool,
    pub eps_t: f64,
    pub q_t: Option<f64>,
}

impl TraceRecord {
    pub fn satisfies_lemma1(&self) -> bool {
        super::lemma1_check(self.instantaneous_regret, self.eps_t, self.q_t.unwrap_or(0.0))
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the header and one row per record.
pub fn write_trace_csv<W: Write>(out: &mut W, policy: &str, records: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    let mut cum = 0.0;
    for r in records {
        cum += r.instantaneous_regret;
        writeln!(
            out,
            "{},{},{},{},{},{},{:.9},{:.9},{:.6},{:.9},{}",
            r.t,
            policy,
            r.m,
            opt(r.n),
            opt(r.y),
            r.queried,
            r.instantaneous_regret,
            cum,
            r.error,
            r.eps_t,
            r.q_t.map(|q| format!("{q:.9}")).unwrap_or_default(),
        )?;
    }
    Ok(())
}
