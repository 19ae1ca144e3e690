//! Exact computer algebra for formal deformation quantization with
//! separation of variables on split super domains `C^{m|d}`.
//!
//! Everything is computed over exact complex rationals: functions are
//! truncated jets at a base point tensored with a Grassmann algebra, star
//! products are formal Laurent series in the deformation parameter `nu`,
//! and every identity check is an exact equality on the jointly tracked
//! range. See the crate README for the layer-by-layer tour.

pub mod coeff;
pub mod diffop;
pub mod error;
pub mod grassmann;
pub mod scenario;
pub mod starprod;
pub mod superfn;
pub mod trace;
pub mod berezin;
pub mod superstar;

pub use coeff::{CRat, Jet, LogPart, Mono, NuSeries, Ring, RingInv, Trunc};
pub use diffop::{DerivKey, FormalOp, SuperDiffOp};
pub use error::{AlgebraError, Result};
pub use grassmann::{Mask, SuperCoeff};
pub use starprod::{BaseBerezin, Chirality, Potential, StarProduct, TraceData};
pub use superfn::SuperFunction;
pub use trace::{
    inverse_transform, product, supertrace, supertrace_density, supertrace_matrix,
    supertrace_via_density, verify_density_exponent, verify_hermitian_top_component,
    verify_pairing_exponential_top, verify_trace_pairing, BaseEval, HermitianTopReport,
    PairingExponentialReport, StrFunctional, SupertraceDensity, TracePairingReport,
};
pub use berezin::{dual_super_potential, verify_dual_identities, SuperBerezin};
pub use superstar::{
    MatrixOverStar, NilpotentPotentialY, OperatorIdentityReport, SuperStarProduct,
};
