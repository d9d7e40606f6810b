//! Exact truncated power series in (z, z̄, w).

pub mod coeff;
pub mod map;
pub mod monomial;
#[allow(clippy::module_inception)]
mod series;
pub mod subst;

pub use coeff::{GaussianRational, Rational, C};
pub use map::{substitute_map, ConjRule, HoloMap};
pub use monomial::{slot_weight, z_slot, zbar_slot, Monomial, MAX_DIM, SLOTS, W_SLOT};
pub use series::{FormalSeries, Order, MAX_CAP};
#[allow(unused_imports)]
pub(crate) use series::{check_cap, check_dim, mul_into, Acc};
pub use subst::{invert_slot_map, substitute, Substitution};
