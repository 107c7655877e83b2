//! Exact computations around Newton–Okounkov bodies of surfaces and the
//! cohomological complexity function of semi-ample divisors.
//!
//! The crate is organised bottom-up:
//!
//! * [`rational`], [`surd`], [`linalg`], [`poly`]: exact arithmetic.
//! * [`lattice`]: Néron–Severi lattices, intersection pairings, cones.
//! * [`zariski`]: Zariski decomposition on surfaces.
//! * [`nok`]: Newton–Okounkov bodies for (curve, point) flags, slice
//!   families and conic/piecewise-linear boundary certificates.
//! * [`cohomology`]: `dim Hⁱ(X, O(nD))` tables on products of projective
//!   spaces and elliptic curves.
//! * [`holonomic`]: guessing and certifying rational / D-finite closed forms
//!   of those tables.

pub mod cohomology;
pub mod error;
pub mod fixtures;
pub mod holonomic;
pub mod lattice;
pub mod linalg;
pub mod nok;
pub mod poly;
pub mod rational;
pub mod surd;
pub mod zariski;

pub use cohomology::{kunneth_table, CoefficientTable, Factor, MultidegreeRay};
pub use error::{Error, Result};
pub use holonomic::{certify_complexity, CertifyOptions, HolonomicCertificate, Verdict};
pub use lattice::{cone_contains, cone_exit_time, intersect, pullback_embed, ConeSpec, DivisorClass, ExitTime, SurfaceData};
pub use nok::{classify_boundary, nok_surface_body, slice_region, BoundaryKind, BoundaryVerdict, FlagOnSurface, NokBody, SliceRegion};
pub use rational::Q;
pub use surd::Surd;
pub use zariski::{zariski_decompose, ZariskiDecomposition};
