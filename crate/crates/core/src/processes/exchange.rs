//! Random exchange processes `R_n = max(R_{n−1} − T_n, W_n)`.

use rand::Rng;
use serde::Serialize;

use super::trajectory::TrajectoryRecord;
use crate::dist::{FiniteLaw, InnovationLaw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeState {
    pub r: f64,
    pub step: u64,
}

pub fn exchange_step(state: &ExchangeState, t: f64, w: f64) -> ExchangeState {
    ExchangeState {
        r: (state.r - t).max(w),
        step: state.step + 1,
    }
}

/// Path `R_0 = r0, R_1, …, R_n`; each step draws `T_k` then `W_k`.
pub fn simulate_exchange<R: Rng + ?Sized>(
    t_law: &FiniteLaw,
    w_law: &InnovationLaw,
    r0: f64,
    n: usize,
    rng: &mut R,
) -> TrajectoryRecord {
    let mut rec = TrajectoryRecord::new(vec!["r".into()]);
    let mut s = ExchangeState { r: r0, step: 0 };
    rec.push(0, vec![s.r], s.r.abs());
    for _ in 0..n {
        let t = t_law.sample(rng);
        let w = w_law.sample(rng);
        s = exchange_step(&s, t, w);
        rec.push(s.step, vec![s.r], s.r.abs());
    }
    rec
}
