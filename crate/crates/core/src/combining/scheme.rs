//! Name-keyed registry of combining schemes.
//!
//! Each scheme is a [`CombiningScheme`]. For a fixed covariance set it is
//! prepared once per UE, which yields either a per-block combiner (evaluated
//! with the instantaneous SINR) or a deterministic SINR (for bounds that
//! only depend on statistics).

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::{
    coefficients::{alpha_table_from_stats, beta_table_from_stats, AlphaVariant, CoefficientTable},
    linear::{dmmse_coefficient, dmmse_multiuser_coefficients, mmse_vector},
    obe::{obe_combiner, obe_matrices_explicit},
    other_ue,
};
use crate::asymptotics::{asymptotic_sinr_mmse, ComplexityScheme};
use crate::error::{Error, Result};
use crate::estimation::LinkStatistics;
use crate::linalg::{CMat, CVec};
use crate::se::uatf_sinr_optimal;

/// Which capacity bound a scheme is scored with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `E{log2(1 + gamma)}` with the instantaneous SINR on MMSE estimates.
    Instantaneous,
    /// Use-and-then-forget: `log2(1 + gamma_uatf)` from statistics alone.
    UseAndForget,
}

/// Statistics shared by all schemes for one covariance set. The alpha
/// table is only built when an OBE scheme asks for it.
#[derive(Debug, Clone)]
pub struct SchemeContext {
    pub stats: LinkStatistics,
    pub beta: CoefficientTable,
    alpha: OnceLock<CoefficientTable>,
}

impl SchemeContext {
    pub fn new(stats: LinkStatistics) -> Result<Self> {
        let beta = beta_table_from_stats(&stats)?;
        Ok(Self {
            stats,
            beta,
            alpha: OnceLock::new(),
        })
    }

    pub fn alpha(&self) -> Result<&CoefficientTable> {
        if let Some(a) = self.alpha.get() {
            return Ok(a);
        }
        let a = alpha_table_from_stats(&self.stats, AlphaVariant::PilotAndData)?;
        Ok(self.alpha.get_or_init(|| a))
    }

    pub fn antennas(&self) -> usize {
        self.stats.antennas()
    }

    pub fn num_ue(&self) -> usize {
        self.stats.num_ue()
    }
}

/// Per-block inputs a combiner may use.
#[derive(Debug, Clone, Copy)]
pub struct BlockView<'a> {
    /// LS estimate per BS.
    pub ls: &'a [CVec],
    /// MMSE estimates `[ue][bs]`.
    pub estimates: &'a [Vec<CVec>],
    /// `(Z^n)^{-1} hhat_k^n`, `[ue][bs]`.
    pub whitened: &'a [Vec<CVec>],
}

pub trait BlockCombiner: Send + Sync {
    /// Combining vector of the prepared UE, one entry per BS.
    fn combine(&self, block: &BlockView<'_>) -> Vec<CVec>;
}

pub enum Prepared {
    PerBlock(Box<dyn BlockCombiner>),
    Deterministic { sinr: f64 },
}

impl fmt::Debug for Prepared {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prepared::PerBlock(_) => f.write_str("PerBlock(..)"),
            Prepared::Deterministic { sinr } => {
                f.debug_struct("Deterministic").field("sinr", sinr).finish()
            }
        }
    }
}

pub trait CombiningScheme: Send + Sync {
    /// Registry key, also used in CSV output.
    fn name(&self) -> &'static str;

    fn bound(&self) -> Bound;

    fn complexity(&self) -> ComplexityScheme;

    fn supports(&self, num_ue: usize) -> bool {
        num_ue == 2
    }

    fn prepare(&self, ctx: &SchemeContext, ue: usize) -> Result<Prepared>;

    /// Large-array SINR prediction, where one exists.
    fn asymptotic_prediction(&self, _ctx: &SchemeContext, _ue: usize) -> Option<f64> {
        None
    }
}

fn check_support(scheme: &dyn CombiningScheme, ctx: &SchemeContext) -> Result<()> {
    if scheme.supports(ctx.num_ue()) {
        Ok(())
    } else {
        Err(Error::UnsupportedUeCount {
            scheme: scheme.name().into(),
            num_ue: ctx.num_ue(),
        })
    }
}

fn mmse_prediction(ctx: &SchemeContext, ue: usize) -> Option<f64> {
    (ctx.num_ue() == 2).then(|| ctx.antennas() as f64 * asymptotic_sinr_mmse(&ctx.beta, ue))
}

struct Mr;

struct MrCombiner {
    ue: usize,
}

impl BlockCombiner for MrCombiner {
    fn combine(&self, block: &BlockView<'_>) -> Vec<CVec> {
        block.estimates[self.ue].clone()
    }
}

impl CombiningScheme for Mr {
    fn name(&self) -> &'static str {
        "MR"
    }
    fn bound(&self) -> Bound {
        Bound::Instantaneous
    }
    fn complexity(&self) -> ComplexityScheme {
        ComplexityScheme::Mr
    }
    fn supports(&self, num_ue: usize) -> bool {
        num_ue >= 2
    }
    fn prepare(&self, ctx: &SchemeContext, ue: usize) -> Result<Prepared> {
        check_support(self, ctx)?;
        Ok(Prepared::PerBlock(Box::new(MrCombiner { ue })))
    }
}

struct Mmse;

struct MmseCombiner {
    ue: usize,
}

impl BlockCombiner for MmseCombiner {
    fn combine(&self, block: &BlockView<'_>) -> Vec<CVec> {
        mmse_vector(block.estimates, block.whitened, self.ue)
    }
}

impl CombiningScheme for Mmse {
    fn name(&self) -> &'static str {
        "MMSE"
    }
    fn bound(&self) -> Bound {
        Bound::Instantaneous
    }
    fn complexity(&self) -> ComplexityScheme {
        ComplexityScheme::Mmse
    }
    fn supports(&self, num_ue: usize) -> bool {
        num_ue >= 2
    }
    fn prepare(&self, ctx: &SchemeContext, ue: usize) -> Result<Prepared> {
        check_support(self, ctx)?;
        Ok(Prepared::PerBlock(Box::new(MmseCombiner { ue })))
    }
    fn asymptotic_prediction(&self, ctx: &SchemeContext, ue: usize) -> Option<f64> {
        mmse_prediction(ctx, ue)
    }
}

struct Dmmse;

/// `v^n = sum_i weights[i] (Z^n)^{-1} hhat_i^n`.
struct WeightedWhitened {
    weights: Vec<nalgebra::Complex<f64>>,
}

impl BlockCombiner for WeightedWhitened {
    fn combine(&self, block: &BlockView<'_>) -> Vec<CVec> {
        let n_bs = block.whitened[0].len();
        (0..n_bs)
            .map(|n| {
                let mut v = CVec::zeros(block.whitened[0][n].len());
                for (w, row) in self.weights.iter().zip(block.whitened) {
                    if w.norm_sqr() > 0.0 {
                        v += &row[n] * *w;
                    }
                }
                v
            })
            .collect()
    }
}

impl CombiningScheme for Dmmse {
    fn name(&self) -> &'static str {
        "DMMSE"
    }
    fn bound(&self) -> Bound {
        Bound::Instantaneous
    }
    fn complexity(&self) -> ComplexityScheme {
        ComplexityScheme::Dmmse
    }
    fn supports(&self, num_ue: usize) -> bool {
        num_ue >= 2
    }
    fn prepare(&self, ctx: &SchemeContext, ue: usize) -> Result<Prepared> {
        check_support(self, ctx)?;
        let weights = if ctx.num_ue() == 2 {
            let mut w = vec![nalgebra::Complex::new(0.0, 0.0); 2];
            w[ue] = nalgebra::Complex::new(1.0, 0.0);
            w[other_ue(ue)] = -dmmse_coefficient(&ctx.beta, ue);
            w
        } else {
            let coeffs = dmmse_multiuser_coefficients(&ctx.beta)?;
            coeffs.column(ue).iter().copied().collect()
        };
        Ok(Prepared::PerBlock(Box::new(WeightedWhitened { weights })))
    }
    fn asymptotic_prediction(&self, ctx: &SchemeContext, ue: usize) -> Option<f64> {
        mmse_prediction(ctx, ue)
    }
}

/// OBE scored with the instantaneous SINR; valid because its output is a
/// linear combination of local MMSE estimates.
struct ObeInstantaneous;

struct LsTransform {
    w: Vec<CMat>,
}

impl BlockCombiner for LsTransform {
    fn combine(&self, block: &BlockView<'_>) -> Vec<CVec> {
        obe_combiner(&self.w, block.ls)
    }
}

impl CombiningScheme for ObeInstantaneous {
    fn name(&self) -> &'static str {
        "OBE_EQ6"
    }
    fn bound(&self) -> Bound {
        Bound::Instantaneous
    }
    fn complexity(&self) -> ComplexityScheme {
        ComplexityScheme::Obe
    }
    fn prepare(&self, ctx: &SchemeContext, ue: usize) -> Result<Prepared> {
        check_support(self, ctx)?;
        let w = obe_matrices_explicit(&ctx.stats, ctx.alpha()?, ue)?;
        Ok(Prepared::PerBlock(Box::new(LsTransform { w })))
    }
}

/// OBE scored with its own design bound, in closed form.
struct ObeUatf;

impl CombiningScheme for ObeUatf {
    fn name(&self) -> &'static str {
        "OBE_UATF"
    }
    fn bound(&self) -> Bound {
        Bound::UseAndForget
    }
    fn complexity(&self) -> ComplexityScheme {
        ComplexityScheme::Obe
    }
    fn prepare(&self, ctx: &SchemeContext, ue: usize) -> Result<Prepared> {
        check_support(self, ctx)?;
        Ok(Prepared::Deterministic {
            sinr: uatf_sinr_optimal(ctx.alpha()?, ue).sinr,
        })
    }
    fn asymptotic_prediction(&self, ctx: &SchemeContext, ue: usize) -> Option<f64> {
        ctx.alpha().ok().map(|a| uatf_sinr_optimal(a, ue).sinr)
    }
}

/// Ordered collection of schemes, looked up by case-insensitive name.
#[derive(Clone, Default)]
pub struct SchemeRegistry {
    entries: Vec<Arc<dyn CombiningScheme>>,
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl SchemeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// MR, MMSE, DMMSE, OBE_EQ6 and OBE_UATF.
    pub fn builtin() -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(Mr));
        reg.register(Arc::new(Mmse));
        reg.register(Arc::new(Dmmse));
        reg.register(Arc::new(ObeInstantaneous));
        reg.register(Arc::new(ObeUatf));
        reg
    }

    /// Adds a scheme, replacing any existing one with the same name.
    pub fn register(&mut self, scheme: Arc<dyn CombiningScheme>) {
        let name = scheme.name();
        if let Some(slot) = self
            .entries
            .iter_mut()
            .find(|s| s.name().eq_ignore_ascii_case(name))
        {
            *slot = scheme;
        } else {
            self.entries.push(scheme);
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn CombiningScheme>> {
        self.entries
            .iter()
            .find(|s| s.name().eq_ignore_ascii_case(name.trim()))
            .cloned()
            .ok_or_else(|| Error::UnknownScheme(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_ok()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|s| s.name()).collect()
    }

    /// Resolves a list of names, preserving order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Arc<dyn CombiningScheme>>> {
        names.iter().map(|n| self.get(n.as_ref())).collect()
    }
}
