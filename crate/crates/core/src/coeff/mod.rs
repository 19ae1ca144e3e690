//! Scalar and series foundation: exact complex rationals, truncated jets,
//! `nu`-Laurent series with truncation tracking, and symbolic log constants.

mod crat;
mod jet;
mod logatom;
mod nu;
mod ring;

pub use crat::{factorial, parse_rational, CRat};
pub use jet::{Jet, Mono};
pub use logatom::LogPart;
pub(crate) use nu::{opt_add, opt_min};
pub use nu::{NuSeries, Trunc};
pub use ring::{Ring, RingInv};
