//! Joint location-scale combination of a location p-value and a scale
//! p-value.
//!
//! Fisher: `W_F = -2 ln p_L - 2 ln p_S`, chi-square with 4 df under the
//! joint null. minP: `W_M = min(p_L, p_S)`, Beta(1, 2) under the joint null.

use crate::data::{check_aligned, complete_cases, GenotypeVector, PhenotypeVector};
use crate::error::{JlsError, Result};
use crate::individual::{GroupScan, LeveneCenter, LocationTest, Scratch, TestOutcome};
use crate::numeric::{chi2_sf, Probability};

/// Floor applied to zero component p-values before taking logs.
pub const DEFAULT_P_FLOOR: f64 = 1e-300;

/// Test choices for a single-variant analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JlsConfig {
    pub location: LocationTest,
    pub scale_center: LeveneCenter,
    /// Groups smaller than this are left out of the scale test and LRT.
    pub min_group_size: usize,
    pub include_lrt: bool,
    pub p_floor: f64,
}

impl Default for JlsConfig {
    fn default() -> Self {
        JlsConfig {
            location: LocationTest::Ols,
            scale_center: LeveneCenter::Mean,
            min_group_size: 2,
            include_lrt: false,
            p_floor: DEFAULT_P_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherCombination {
    pub w: f64,
    pub p: Probability,
    /// At least one input was zero and was raised to the floor.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinPCombination {
    pub w: f64,
    pub p: Probability,
}

/// Fisher's combination of two independent p-values.
pub fn fisher_combine(p_location: Probability, p_scale: Probability, p_floor: f64) -> FisherCombination {
    let mut clamped = false;
    let mut term = |p: Probability| {
        let v = p.get();
        if v < p_floor {
            clamped = true;
            -2.0 * p_floor.ln()
        } else {
            -2.0 * v.ln()
        }
    };
    // -0.0 + -0.0 would print as "-0"
    let w = (term(p_location) + term(p_scale)).max(0.0);
    let p = chi2_sf(w, 4.0).unwrap_or(Probability::ZERO);
    FisherCombination { w, p, clamped }
}

/// minP combination; `p = 1 - (1 - W_M)^2`.
pub fn minp_combine(p_location: Probability, p_scale: Probability) -> MinPCombination {
    let w = p_location.get().min(p_scale.get());
    MinPCombination {
        w,
        p: Probability::saturating(w * (2.0 - w)),
    }
}

/// Per-variant joint location-scale record.
#[derive(Debug, Clone, PartialEq)]
pub struct JlsResult {
    pub variant_id: String,
    pub n_used: usize,
    pub location: TestOutcome,
    pub scale: TestOutcome,
    pub lrt: Option<TestOutcome>,
    pub fisher: Option<FisherCombination>,
    pub minp: Option<MinPCombination>,
}

impl JlsResult {
    pub fn p_location(&self) -> Option<f64> {
        self.location.p.map(Probability::get)
    }

    pub fn p_scale(&self) -> Option<f64> {
        self.scale.p.map(Probability::get)
    }

    pub fn w_fisher(&self) -> Option<f64> {
        self.fisher.map(|f| f.w)
    }

    pub fn p_fisher(&self) -> Option<f64> {
        self.fisher.map(|f| f.p.get())
    }

    pub fn w_minp(&self) -> Option<f64> {
        self.minp.map(|m| m.w)
    }

    pub fn p_minp(&self) -> Option<f64> {
        self.minp.map(|m| m.p.get())
    }

    pub fn p_lrt(&self) -> Option<f64> {
        self.lrt.and_then(|t| t.p).map(Probability::get)
    }

    /// Joint statistics are missing because a component was degenerate.
    pub fn is_degenerate(&self) -> bool {
        self.fisher.is_none()
    }

    pub fn clamped(&self) -> bool {
        self.fisher.is_some_and(|f| f.clamped)
    }
}

/// Component outcomes for one complete-case sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Components {
    pub n_used: usize,
    pub location: TestOutcome,
    pub scale: TestOutcome,
    pub lrt: Option<TestOutcome>,
    pub fisher: Option<FisherCombination>,
    pub minp: Option<MinPCombination>,
}

impl Components {
    pub fn into_result(self, variant_id: &str) -> JlsResult {
        JlsResult {
            variant_id: variant_id.to_string(),
            n_used: self.n_used,
            location: self.location,
            scale: self.scale,
            lrt: self.lrt,
            fisher: self.fisher,
            minp: self.minp,
        }
    }
}

/// Scores complete-case codes and phenotypes with the configured tests.
pub(crate) fn score(codes: &[u8], y: &[f64], config: &JlsConfig, scratch: &mut Scratch) -> Components {
    let scan = GroupScan::new(codes, y, config.scale_center, scratch);
    let location = scan.location(config.location);
    let scale = scan.levene(config.min_group_size);
    let lrt = config.include_lrt.then(|| scan.lrt(config.min_group_size));
    let (fisher, minp) = match (location.p, scale.p) {
        (Some(pl), Some(ps)) => (
            Some(fisher_combine(pl, ps, config.p_floor)),
            Some(minp_combine(pl, ps)),
        ),
        _ => (None, None),
    };
    Components {
        n_used: codes.len(),
        location,
        scale,
        lrt,
        fisher,
        minp,
    }
}

/// Runs the location and scale tests on one variant and combines them.
pub fn jls_single_variant(
    geno: &GenotypeVector,
    pheno: &PhenotypeVector,
    config: &JlsConfig,
) -> Result<JlsResult> {
    check_aligned(geno, pheno)?;
    validate_config(config)?;
    let (codes, y) = complete_cases(geno, pheno);
    Ok(score(&codes, &y, config, &mut Scratch::default()).into_result(&geno.variant_id))
}

pub(crate) fn validate_config(config: &JlsConfig) -> Result<()> {
    if config.min_group_size == 0 {
        return Err(JlsError::InvalidInput("minimum group size must be at least 1".into()));
    }
    if !(config.p_floor > 0.0 && config.p_floor < 1.0) {
        return Err(JlsError::InvalidInput(format!(
            "p-value floor {} must lie in (0, 1)",
            config.p_floor
        )));
    }
    Ok(())
}
