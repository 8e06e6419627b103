//! Exact arithmetic on the dyadic-grid ℓ₁ space `M` and executable
//! section–retraction pairs linking it to function spaces over the fan.

pub mod adversary;
pub mod checks;
pub mod cli;
pub mod dyadic;
pub mod funcspace;
pub mod retract_chain;
pub mod retract_core;
pub mod sample;
pub mod spaces;
pub mod verdict;

pub use dyadic::Dyadic;
pub use funcspace::{BairePoint, BigFun, Bit, TwoFun};
pub use spaces::{FanPoint, MPoint, MStream, NxFanPoint};
pub use verdict::{Condition, Failure, Verdict};
