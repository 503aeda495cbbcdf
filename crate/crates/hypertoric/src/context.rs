//! Shared numeric tolerances.

/// Tolerances and truncation limits used across the crate.
///
/// All comparisons are relative to these baselines; operations that accept a
/// context use [`NumericContext::default`] unless the caller overrides it.
#[derive(Debug, Clone, Copy)]
pub struct NumericContext {
    /// Baseline relative tolerance for algebraic identities.
    pub base_tol: f64,
    /// Residual tolerance for floating-point linear consistency checks.
    pub residual_tol: f64,
    /// Near-zero threshold for branch selection, relative to data scale.
    pub near_zero: f64,
    /// Default finite-difference step for Laplacian stencils.
    pub fd_step: f64,
    /// Default truncation index for infinite-family enumeration.
    pub truncation: usize,
    /// Target accuracy for truncated family sums in potential evaluation.
    pub family_tol: f64,
}

impl Default for NumericContext {
    fn default() -> Self {
        NumericContext {
            base_tol: 1e-12,
            residual_tol: 1e-10,
            near_zero: 1e-10,
            fd_step: 1e-3,
            truncation: 10_000,
            family_tol: 1e-9,
        }
    }
}

impl NumericContext {
    /// Tolerance scaled by the magnitude of the data it is compared against.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.base_tol * (1.0 + scale.abs())
    }
}
