//! Grid-refinement helpers.

use crate::math::Real;

/// Observed order `log(e_coarse / e_fine) / log(refinement)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, refinement: f64) -> f64 {
    (e_coarse / e_fine).ln() / refinement.ln()
}

/// Error ratio between successive levels of a refinement sequence.
pub fn ratios(errors: &[f64]) -> alloc::vec::Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence() {
        let e = [4e-4, 1e-4, 2.5e-5];
        assert!((observed_order(e[0], e[1], 2.0) - 2.0).abs() < 1e-12);
        assert_eq!(ratios(&e).len(), 2);
    }
}
