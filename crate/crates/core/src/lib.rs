//! Construction schemes at desk scale: canonical finite fragments, exhaustive
//! structural verifiers, capture search, the level colorings and the `ℙ_n`
//! posets, and a simulator for the finite-condition forcing that transfers a
//! scheme on `ω` onto a simulated `ω₁`.

pub mod capturing;
pub mod cli;
pub mod cohen;
pub mod knaster;
pub mod report;
pub mod scheme;
pub mod types;

pub use report::{Check, Report};
pub use scheme::{build_scheme, MemberId, Scheme, SchemeError};
pub use types::{Elem, FinSet, OrdinalCode, PartitionSchedule, TypeSequence};
