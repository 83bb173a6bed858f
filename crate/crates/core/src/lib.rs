pub mod bits;
pub mod born_machine;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod interferometer;
pub mod oracle;
pub mod permanent;
pub mod readout;
pub mod training;

pub use bits::BitString;
pub use combinatorics::FockOutcome;
pub use error::{Error, Result};
