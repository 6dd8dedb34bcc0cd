//! Multiple testing with p-values and e-values.
//!
//! The central procedure is ep-BH: Benjamini-Hochberg applied to the
//! quotients `p / e`, where each hypothesis carries a p-value from the
//! primary data and an e-value from independent side information.
//!
//! ```
//! use epbh::procedures::ep_bh;
//!
//! let p = [0.01, 0.04, 0.03, 0.2];
//! let e = [2.0, 2.0, 0.5, 1.0];
//! let r = ep_bh(&p, &e, 0.05).unwrap();
//! assert_eq!(r.rejected, vec![0, 1]);
//! ```

pub mod calib;
pub mod cli;
pub mod constructors;
pub mod error;
pub mod metrics;
pub mod procedures;
pub mod quad;
pub mod sim;
pub mod special;
pub mod values;

pub use calib::Calibrator;
pub use error::{Error, Result};
pub use metrics::{ErrorMetrics, ReplicateOutcome};
pub use procedures::{Procedure, ProcedureConfig, RejectionResult};
pub use values::{EValue, HypothesisRecord, PValue};
