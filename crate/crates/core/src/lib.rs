//! Finite-dimensional sections of the Kalton–Peck spaces `Z_p`, `1 < p < ∞`.
//!
//! - [`seq`]: finitely supported sequences, `ℓ_p` norms and the bilinear bracket.
//! - [`centralizer`]: the map `Ω_p`, the `Z_p` quasi-norm, the twisted pairing
//!   and seeded estimators for the centralizer and quasi-triangle constants.
//! - [`blocks`]: disjoint block sequences, the log-lift
//!   `‖Ω_p(Σu_j) − ΣΩ_p(u_j)‖_p`, flattening `(x_j, u_j) ↦ x_j − Ω_p(u_j)` and
//!   growth tables.
//! - [`biorth`]: biorthogonal systems, the renorming and its distortion ratio,
//!   the lift from `ℓ_p` to `Z_p`, the inevitability proxy and the
//!   perturbation chain.
//! - [`synth`]: seeded generators for all of the above.

pub mod biorth;
pub mod blocks;
pub mod centralizer;
mod error;
pub mod fmt;
pub mod sampling;
pub mod seq;
pub mod synth;

pub use biorth::{
    distortion_bound, distortion_lower_bound, distortion_lower_bound_at, inevitability_proxy,
    lift_system, renorm, validate_biorth, BiorthReport, BiorthSystem, ChainReport,
    DistortionReport, Families, Family, InevitabilityProbe, ProxyResult, SpaceElement, SpaceTag,
};
pub use blocks::{
    block_sum_growth, log_lift_direct, log_lift_lower_bound_check, make_disjoint_blocks,
    normalize_flattened, psp_flatten, BlockSequence, GrowthRow, GrowthTable, LowerBoundCheck,
    Profile,
};
pub use centralizer::{
    centralizer_defect, estimate_centralizer_constant, omega_p, quasi_triangle_defect,
    twisted_pairing, CentralizerSpec, RatioEstimate, TwistedVector,
};
pub use error::{Error, Result};
pub use seq::{are_disjoint, PExponent, SeqVector};
