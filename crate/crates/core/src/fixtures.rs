//! Surfaces shipped with the crate.
//!
//! `exe2.json` is the abelian surface `E×E` (`E` without complex
//! multiplication) in the basis `f1, f2, Delta` of the two fibre classes and
//! the diagonal: `f1·f2 = f1·Δ = f2·Δ = 1`, all squares `0` (each is an
//! elliptic curve on an abelian surface, so adjunction gives `C² = 0`). Its
//! nef and pseudoeffective cones coincide and equal the quadratic cone with
//! reference `h = f1+f2+Δ`.
//!
//! `blowup.json` is the blow-up of the plane at a point, basis `H, E`. The
//! flag point, when not generic, sits on `E` with multiplicity 1.
//!
//! `blowup2.json` is the blow-up of the plane at two points, basis
//! `H, E1, E2`, with the three `(−1)`-curves `E1, E2, H−E1−E2`.

use crate::lattice::SurfaceData;

pub const EXE2_JSON: &str = include_str!("../fixtures/exe2.json");
pub const BLOWUP_JSON: &str = include_str!("../fixtures/blowup.json");
pub const BLOWUP2_JSON: &str = include_str!("../fixtures/blowup2.json");

/// Looks up a bundled fixture by file name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "exe2.json" => Some(EXE2_JSON),
        "blowup.json" => Some(BLOWUP_JSON),
        "blowup2.json" => Some(BLOWUP2_JSON),
        _ => None,
    }
}

pub fn abelian_exe() -> SurfaceData {
    SurfaceData::from_json_str(EXE2_JSON).expect("bundled fixture")
}

pub fn blowup_plane() -> SurfaceData {
    SurfaceData::from_json_str(BLOWUP_JSON).expect("bundled fixture")
}

pub fn blowup_two_points() -> SurfaceData {
    SurfaceData::from_json_str(BLOWUP2_JSON).expect("bundled fixture")
}
