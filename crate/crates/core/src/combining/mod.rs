//! Receive combiners.
//!
//! The free functions implement each combiner directly; [`scheme`] wraps
//! them behind [`CombiningScheme`] so experiments pick schemes by name.

mod coefficients;
mod linear;
mod obe;
pub mod scheme;

pub use coefficients::{
    alpha_table_from_stats, beta_table_from_stats, compute_alpha_table, compute_beta_table,
    AlphaVariant, CoefficientTable,
};
pub use linear::{
    dmmse_coefficient, dmmse_combiner, dmmse_combiner_ls_form, dmmse_multiuser,
    dmmse_multiuser_coefficients, dmmse_sigma_matrices, mmse_combiner_global, mr_combiner,
    whiten_estimates,
};
pub use obe::{
    obe_coefficient, obe_combiner, obe_combiner_from_estimates, obe_matrices_explicit,
    obe_matrices_vectorized, obe_pair_weights, VectorizedObe, DENSE_KRONECKER_MAX_ANTENNAS,
    VECTORIZED_GUARD,
};
pub use scheme::{
    BlockCombiner, BlockView, Bound, CombiningScheme, Prepared, SchemeContext, SchemeRegistry,
};

use crate::linalg::{CMat, CVec};

/// Combining vectors of one scheme, `[ue][bs]`.
#[derive(Debug, Clone)]
pub struct CombinerBank {
    pub scheme: String,
    pub vectors: Vec<Vec<CVec>>,
    /// Per-BS matrices applied to the LS estimate, when the scheme has them
    /// (`W_k^n` for OBE, `Sigma_k^n` for D-MMSE). Indexed `[ue][bs]`.
    pub transforms: Option<Vec<Vec<CMat>>>,
}

impl CombinerBank {
    pub fn ue(&self, ue: usize) -> &[CVec] {
        &self.vectors[ue]
    }

    /// Every vector is finite and each UE has at least one nonzero block.
    pub fn is_well_formed(&self) -> bool {
        self.vectors.iter().all(|per_bs| {
            per_bs
                .iter()
                .all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
                && per_bs.iter().any(|v| v.norm() > 0.0)
        })
    }
}

pub(crate) fn other_ue(ue: usize) -> usize {
    1 - ue
}
