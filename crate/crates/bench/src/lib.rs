//! Shared inputs for the criterion benchmarks.

use nokholo_core::cohomology::{kunneth_table, CoefficientTable, Factor, MultidegreeRay};

/// `O(3,1)` on `P²×P²` with `n = 0..=n_max`.
pub fn o31_table(n_max: usize) -> CoefficientTable {
    let factors = [Factor::ProjectiveSpace(2), Factor::ProjectiveSpace(2)];
    kunneth_table(&factors, &MultidegreeRay::new(vec![3, 1]), n_max).expect("valid table")
}
