//! Persistence for users, login sessions and assessment experiments.

mod catalog;
mod clock;
pub mod credentials;
mod error;
mod log;
mod model;
mod store;

pub use catalog::Catalog;
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{Result, StoreError};
pub use log::{Record, RecordLog};
pub use model::{Experiment, HistoryRow, HistoryView, User};
pub use store::Store;
