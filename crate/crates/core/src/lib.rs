//! Certification and numerical estimation of `l^p` norms of weighted mean
//! matrices `a_{n,k} = lambda_k / Lambda_n`, together with the sufficient
//! conditions, auxiliary recurrences, Wirtinger-type quadratic forms and
//! Carleman-type geometric mean ratios that go with them.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod sum;
pub mod tridiag;
pub mod weights;

pub mod carleman;
pub mod conditions;
pub mod norms;
pub mod recurrences;
pub mod wirtinger;

pub use error::{Error, Result};
pub use norms::{NormEstimate, NormMethod};
pub use recurrences::RecurrenceTrace;
pub use weights::{WeightSequence, WeightSpec};
pub mod cli;
