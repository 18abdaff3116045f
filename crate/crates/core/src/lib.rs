//! CES, Cobb-Douglas and multi-stage Armington aggregators treated as
//! `L^r` quasinorms (`r <= 1`) on nest trees.
//!
//! Quantities live in the `r`-norm and prices in the dual `s`-norm, with
//! `1/r + 1/s = 1`. The reverse Hölder inequality `x·p >= ‖x‖_r ‖p‖_s` gives a
//! sharp lower bound on expenditure, from which the expenditure function,
//! Hicksian and Marshallian demand, indirect utility, budget shares and the
//! Konüs cost-of-living index all follow in closed form.
//!
//! Module map:
//!
//! - [`lr`]: norm evaluation, dual exponents and inequality gap reports.
//! - [`tree`]: nest trees, validation and bottom-up aggregation of quantities
//!   and prices.
//! - [`demand`]: expenditure, demand systems, shares and price indices.
//! - [`oracle`]: brute-force minimization, finite differences and seeded
//!   inequality sampling used to check every closed form.
//! - [`ball`]: points on the two-good level set `‖x‖ = 1`.
//! - [`scenario`] and [`cli`]: JSON scenario files and the `ces-demand` binary.
//!
//! ```
//! use ces_demand::{demand, NestTree, PositiveVector};
//!
//! let tree = NestTree::flat_ces(0.5, 2).validate(2).unwrap();
//! let p = PositiveVector::prices(vec![1.0, 4.0]).unwrap();
//! let e = demand::expenditure(&tree, 1.0, &p).unwrap();
//! assert!((e - 0.8).abs() < 1e-12);
//! ```

pub mod ball;
pub mod cli;
pub mod demand;
mod error;
pub mod lr;
pub mod oracle;
pub mod scenario;
pub mod tree;

pub use error::{Error, Result};
pub use lr::{Exponent, InequalityGapReport, PositiveVector, Role, WeightVector};
pub use tree::{NestTree, NodeIndexing, ValidatedTree};
