//! Closed-form bounds on the overcompleteness a random dictionary needs
//! before every sparse signal admits an accurate sparse representation,
//! together with the random models, greedy coders, and Monte Carlo
//! machinery used to probe those bounds empirically.

pub mod bounds;
pub mod coder;
pub mod error;
pub mod montecarlo;
pub mod randmodel;
pub mod selftest;
pub mod specfun;
pub mod stats;

pub use bounds::{BoundId, BoundReport, C2Form, RegimeParams};
pub use coder::{GramOmp, SparseApproximation};
pub use error::{Error, Result};
pub use montecarlo::{
    CoderKind, DictKind, MomentMethod, ScanConfig, ScanPoint, ScanResult, SuccessEstimate,
    ZMoments,
};
pub use randmodel::{Dictionary, DictStructure, ProblemInstance, Signal};
pub use selftest::{PropertyOutcome, SelftestOptions};
