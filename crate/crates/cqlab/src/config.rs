//! Numerical tolerances and resource bounds.
//!
//! The underlying mathematics is exact; every tolerance here is an artifact
//! decision. They are collected in one record so a caller can tighten or
//! relax them per call instead of chasing constants through the modules.

/// Numerical tolerances and resource bounds used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max absolute entry difference allowed between `A` and `A*`.
    pub hermitian: f64,
    /// Lowest admissible eigenvalue for a positive semidefinite operator.
    pub psd: f64,
    /// Allowed deviation of a density-matrix trace from 1.
    pub trace_one: f64,
    /// Relative eigenvalue cutoff for generalized inverses: eigenvalues
    /// below `rank_cutoff * max |eigenvalue|` are treated as zero.
    pub rank_cutoff: f64,
    /// Absolute band around a spectral-projection threshold inside which an
    /// eigenvalue counts as sitting exactly on the threshold.
    pub threshold_band: f64,
    /// Allowed deviation from 1 for distribution weights.
    pub weight_sum: f64,
    /// Mass on the orthogonal complement of a support above which a state is
    /// considered to leave the support (relative entropy becomes infinite).
    pub support_leak: f64,
    /// Largest dense operator dimension the engine will materialize.
    pub max_dim: usize,
    /// Largest number of type classes an enumeration may produce.
    pub max_type_classes: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            psd: 1e-10,
            trace_one: 1e-10,
            rank_cutoff: 1e-12,
            threshold_band: 1e-12,
            weight_sum: 1e-12,
            support_leak: 1e-10,
            max_dim: 4096,
            max_type_classes: 1 << 20,
        }
    }
}

impl Tolerances {
    /// Checks that a dense operator of dimension `dim` fits the bound.
    pub fn check_dim(&self, dim: u128) -> crate::Result<usize> {
        if dim == 0 || dim > self.max_dim as u128 {
            return Err(crate::Error::DimensionBound {
                required: dim,
                bound: self.max_dim,
            });
        }
        Ok(dim as usize)
    }
}
