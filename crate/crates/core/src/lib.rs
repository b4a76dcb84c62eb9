//! Market equilibria for Cournot and hierarchical Stackelberg oligopolies.
//!
//! The triopoly side recasts first-order conditions as fixed points of
//! response maps and iterates them ([`response`], [`solver`]). The n-firm
//! side uses closed forms and the backward-induction recursions for linear
//! demand with linear or quadratic costs ([`large_market`]).

pub mod error;
pub mod large_market;
pub mod market;
pub mod presets;
pub mod response;
pub mod roots;
pub mod solver;

pub use error::{Error, Result};
pub use large_market::{CostKind, FamilyParams, LargeMarketRow, ModelFamily, Structure};
pub use market::{CostSpec, DemandSpec, DiffConfig, MarketSpec, OutputTriple, SmoothFn};
pub use response::{m1, AffineMap, MapMode, ResponseSystem};
pub use roots::InnerSolveConfig;
pub use solver::{
    ContractionReport, HardyRogersConstants, IterationStatus, IterationTrace, PicardOptions,
    SocReport,
};
