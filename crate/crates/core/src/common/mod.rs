//! Common information between `X` and `Y`.
//!
//! * Gács–Körner: `C_GK = max H(f(X))` over `f(X) = g(Y)` almost surely.
//!   Computed spectrally from the unit singular modes of the CDK
//!   ([`gacs_korner`]) and, independently, from connected components of the
//!   support graph ([`gk_via_components`]).
//! * Wyner: `C_W = min I(W; X,Y)` over `P_{W|X,Y}` with `X − W − Y`.
//!   Estimated by a penalized multi-start solver ([`wyner_solve`]); a
//!   brute-force grid search serves as a test oracle on 2×2 joints
//!   ([`wyner_grid_oracle`]).

mod gk;
mod wyner;

pub use gk::{gacs_korner, gk_via_components, GkResult, FEATURE_GROUPING_TOL, UNIT_TOL};
pub use wyner::{wyner_grid_oracle, wyner_solve, WynerConfig, WynerResult};
