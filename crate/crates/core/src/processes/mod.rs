//! Simulators for the process families.

pub mod ar;
pub mod branching;
pub mod cookie;
pub mod exchange;
pub mod frog;
pub mod trajectory;

pub use ar::{ar_step, simulate_ar, ArState, Environment};
pub use branching::{branching_step, BranchingState, OffspringFamily};
pub use cookie::{simulate_cookie_walk, CookieWalkConfig, CookieWalkOutcome};
pub use exchange::{exchange_step, simulate_exchange, ExchangeState};
pub use frog::{frog_rho, simulate_frog, FrogConfig, FrogOutcome};
pub use trajectory::TrajectoryRecord;
