//! Phenotype-permutation p-values for single variants.

use rand::seq::SliceRandom;

use crate::data::{check_aligned, GenotypeVector, PhenotypeVector};
use crate::error::{JlsError, Result};
use crate::exec::{map_chunks, Execution};
use crate::individual::{LocationTest, Scratch};
use crate::jls::{score, validate_config, Components, JlsConfig, JlsResult};
use crate::numeric::Probability;
use crate::seed::substream;

/// Share of degenerate replicates above which a result carries a warning.
pub const DEGENERATE_WARN_FRACTION: f64 = 0.05;

const REPLICATES_PER_TASK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PValueConvention {
    /// `#{W_k > W} / K`.
    Strict,
    /// `(#{W_k >= W} + 1) / (K + 1)`.
    #[default]
    AddOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationPlan {
    pub replicates: usize,
    pub seed: u64,
    pub convention: PValueConvention,
}

impl PermutationPlan {
    pub fn new(replicates: usize, seed: u64) -> Self {
        PermutationPlan {
            replicates,
            seed,
            convention: PValueConvention::AddOne,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            Err(JlsError::InvalidInput("permutation replicate count must be at least 1".into()))
        } else {
            Ok(())
        }
    }
}

/// Converts exceedance counts into a p-value.
pub(crate) fn pvalue_from_counts(
    greater: usize,
    greater_or_equal: usize,
    replicates: usize,
    convention: PValueConvention,
) -> Probability {
    let p = match convention {
        PValueConvention::Strict => greater as f64 / replicates as f64,
        PValueConvention::AddOne => (greater_or_equal + 1) as f64 / (replicates + 1) as f64,
    };
    Probability::saturating(p)
}

/// Empirical p-value of `observed` against replicate statistics, larger
/// values being more extreme.
pub fn permutation_pvalue(
    observed: f64,
    replicates: &[f64],
    convention: PValueConvention,
) -> Result<Probability> {
    if replicates.is_empty() {
        return Err(JlsError::InvalidInput("no permutation replicates".into()));
    }
    let greater = replicates.iter().filter(|&&w| w > observed).count();
    let ge = replicates.iter().filter(|&&w| w >= observed).count();
    Ok(pvalue_from_counts(greater, ge, replicates.len(), convention))
}

/// Shuffles `buf` (pre-filled with the canonical phenotype) for replicate
/// `k`. Fisher-Yates over a ChaCha8 stream seeded from `(seed, k)`.
#[inline]
pub(crate) fn shuffle_for_replicate(buf: &mut [f64], seed: u64, k: usize) {
    let mut rng = substream(seed, k as u64);
    buf.shuffle(&mut rng);
}

/// The permutation replicate `k` applies to `n` canonical positions:
/// position `i` receives the phenotype originally at `perm[i]`.
pub fn replicate_permutation(seed: u64, k: usize, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = substream(seed, k as u64);
    perm.shuffle(&mut rng);
    perm
}

/// Phenotype values in canonical (sample-id) order, missing values removed,
/// with the original sample index of each position.
#[derive(Debug, Clone)]
pub(crate) struct CanonicalPhenotype {
    pub values: Vec<f64>,
    /// `slot[i]` is the canonical position of sample `i`, if observed.
    pub slot: Vec<Option<usize>>,
}

impl CanonicalPhenotype {
    pub fn new(pheno: &PhenotypeVector) -> Self {
        let mut values = Vec::with_capacity(pheno.len());
        let mut slot = vec![None; pheno.len()];
        for i in pheno.canonical_order() {
            if let Some(v) = pheno.values()[i] {
                slot[i] = Some(values.len());
                values.push(v);
            }
        }
        CanonicalPhenotype { values, slot }
    }

    /// Complete cases of `geno` as (codes, canonical positions), ordered by
    /// canonical position.
    pub fn view(&self, geno: &GenotypeVector) -> SnpView {
        let mut pairs: Vec<(usize, u8)> = geno
            .codes()
            .iter()
            .zip(&self.slot)
            .filter_map(|(c, s)| match (c, s) {
                (Some(c), Some(s)) => Some((*s, *c)),
                _ => None,
            })
            .collect();
        pairs.sort_unstable_by_key(|p| p.0);
        SnpView {
            positions: pairs.iter().map(|p| p.0).collect(),
            codes: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SnpView {
    pub positions: Vec<usize>,
    pub codes: Vec<u8>,
}

impl SnpView {
    /// A view covering every canonical position in order.
    pub fn complete(codes: Vec<u8>) -> Self {
        SnpView {
            positions: (0..codes.len()).collect(),
            codes,
        }
    }

    pub fn gather(&self, phenotype: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.positions.iter().map(|&p| phenotype[p]));
    }
}

/// Ranking statistics, larger is more extreme; `-inf` marks a degenerate
/// component.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RankStats {
    pub location: f64,
    pub scale: f64,
    pub fisher: f64,
    pub minp: f64,
    pub lrt: f64,
}

impl RankStats {
    pub fn from_components(c: &Components, location: LocationTest) -> Self {
        let ok_or = |ok: bool, v: f64| if ok { v } else { f64::NEG_INFINITY };
        let loc = match location {
            LocationTest::Ols => c.location.statistic.abs(),
            LocationTest::Anova => c.location.statistic,
        };
        RankStats {
            location: ok_or(c.location.is_ok(), loc),
            scale: ok_or(c.scale.is_ok(), c.scale.statistic),
            fisher: c.fisher.map_or(f64::NEG_INFINITY, |f| f.w),
            minp: c.minp.map_or(f64::NEG_INFINITY, |m| -m.w),
            lrt: c
                .lrt
                .filter(|t| t.is_ok())
                .map_or(f64::NEG_INFINITY, |t| t.statistic),
        }
    }

    fn as_array(&self) -> [f64; 5] {
        [self.location, self.scale, self.fisher, self.minp, self.lrt]
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ExceedanceCounts {
    pub greater: [usize; 5],
    pub greater_or_equal: [usize; 5],
    pub degenerate: usize,
}

impl ExceedanceCounts {
    fn record(&mut self, observed: &RankStats, replicate: &RankStats, degenerate: bool) {
        let obs = observed.as_array();
        for (i, r) in replicate.as_array().into_iter().enumerate() {
            if r == f64::NEG_INFINITY {
                continue;
            }
            if r > obs[i] {
                self.greater[i] += 1;
            }
            if r >= obs[i] {
                self.greater_or_equal[i] += 1;
            }
        }
        if degenerate {
            self.degenerate += 1;
        }
    }

    fn merge(mut self, other: &ExceedanceCounts) -> Self {
        for i in 0..5 {
            self.greater[i] += other.greater[i];
            self.greater_or_equal[i] += other.greater_or_equal[i];
        }
        self.degenerate += other.degenerate;
        self
    }
}

/// Permutation p-values for each component and joint statistic. A value is
/// missing when the statistic is degenerate in the observed data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PermutationPValues {
    pub location: Option<Probability>,
    pub scale: Option<Probability>,
    pub fisher: Option<Probability>,
    pub minp: Option<Probability>,
    pub lrt: Option<Probability>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOutcome {
    pub observed: JlsResult,
    pub pvalues: PermutationPValues,
    pub replicates: usize,
    /// Replicates in which the joint statistic was degenerate.
    pub degenerate_replicates: usize,
    pub warning: bool,
}

/// Counts, over the plan's replicates, how often each permuted statistic
/// reaches the observed one. `canonical` is the full phenotype that gets
/// shuffled; `view` selects the SNP's complete cases from it.
pub(crate) fn count_exceedances(
    canonical: &[f64],
    view: &SnpView,
    observed: &RankStats,
    plan: &PermutationPlan,
    config: &JlsConfig,
    exec: Execution,
) -> ExceedanceCounts {
    let partials = map_chunks(exec, plan.replicates, REPLICATES_PER_TASK, |range| {
        let mut scratch = Scratch::default();
        let mut shuffled = Vec::with_capacity(canonical.len());
        let mut y = Vec::with_capacity(view.codes.len());
        let mut counts = ExceedanceCounts::default();
        for k in range {
            shuffled.clear();
            shuffled.extend_from_slice(canonical);
            shuffle_for_replicate(&mut shuffled, plan.seed, k);
            view.gather(&shuffled, &mut y);
            let comps = score(&view.codes, &y, config, &mut scratch);
            let stats = RankStats::from_components(&comps, config.location);
            counts.record(observed, &stats, comps.fisher.is_none());
        }
        counts
    });
    partials
        .iter()
        .fold(ExceedanceCounts::default(), |acc, c| acc.merge(c))
}

pub(crate) fn pvalues_from(
    observed: &RankStats,
    counts: &ExceedanceCounts,
    plan: &PermutationPlan,
) -> PermutationPValues {
    let obs = observed.as_array();
    let p = |i: usize| {
        (obs[i] != f64::NEG_INFINITY).then(|| {
            pvalue_from_counts(
                counts.greater[i],
                counts.greater_or_equal[i],
                plan.replicates,
                plan.convention,
            )
        })
    };
    PermutationPValues {
        location: p(0),
        scale: p(1),
        fisher: p(2),
        minp: p(3),
        lrt: p(4),
    }
}

/// Permutation p-values for one variant. Samples are put in sample-id order
/// before shuffling, so the result does not depend on input sample order.
pub fn permute_and_rescore(
    geno: &GenotypeVector,
    pheno: &PhenotypeVector,
    plan: &PermutationPlan,
    config: &JlsConfig,
    exec: Execution,
) -> Result<PermutationOutcome> {
    check_aligned(geno, pheno)?;
    validate_config(config)?;
    plan.validate()?;
    let canonical = CanonicalPhenotype::new(pheno);
    let view = canonical.view(geno);
    let mut y = Vec::new();
    view.gather(&canonical.values, &mut y);
    let comps = score(&view.codes, &y, config, &mut Scratch::default());
    let observed_stats = RankStats::from_components(&comps, config.location);
    let counts = count_exceedances(&canonical.values, &view, &observed_stats, plan, config, exec);
    Ok(PermutationOutcome {
        observed: comps.into_result(&geno.variant_id),
        pvalues: pvalues_from(&observed_stats, &counts, plan),
        replicates: plan.replicates,
        degenerate_replicates: counts.degenerate,
        warning: counts.degenerate as f64 > DEGENERATE_WARN_FRACTION * plan.replicates as f64,
    })
}

/// Permutation p-values for complete-case slices (simulation path).
pub(crate) fn permutation_pvalues_complete(
    codes: &[u8],
    y: &[f64],
    observed: &Components,
    plan: &PermutationPlan,
    config: &JlsConfig,
) -> PermutationPValues {
    let view = SnpView::complete(codes.to_vec());
    let observed_stats = RankStats::from_components(observed, config.location);
    let counts = count_exceedances(y, &view, &observed_stats, plan, config, Execution::Sequential);
    pvalues_from(&observed_stats, &counts, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pvalue_conventions() {
        let reps = [1.0, 2.0, 3.0, 4.0];
        let strict = permutation_pvalue(2.5, &reps, PValueConvention::Strict).unwrap();
        let add_one = permutation_pvalue(2.5, &reps, PValueConvention::AddOne).unwrap();
        assert_eq!(strict.get(), 0.5);
        assert_eq!(add_one.get(), 0.6);
        let top = permutation_pvalue(10.0, &reps, PValueConvention::Strict).unwrap();
        assert_eq!(top.get(), 0.0);
        assert!(permutation_pvalue(1.0, &[], PValueConvention::AddOne).is_err());
    }

    #[test]
    fn ties_count_under_add_one_only() {
        let reps = [2.0, 2.0, 1.0];
        assert_eq!(permutation_pvalue(2.0, &reps, PValueConvention::Strict).unwrap().get(), 0.0);
        assert_eq!(permutation_pvalue(2.0, &reps, PValueConvention::AddOne).unwrap().get(), 0.75);
    }

    #[test]
    fn replicate_permutation_matches_shuffle() {
        let base: Vec<f64> = (0..20).map(|i| i as f64 * 1.5).collect();
        let perm = replicate_permutation(99, 5, base.len());
        let mut shuffled = base.clone();
        shuffle_for_replicate(&mut shuffled, 99, 5);
        for (i, &p) in perm.iter().enumerate() {
            assert_eq!(shuffled[i], base[p]);
        }
    }

    #[test]
    fn zero_replicates_rejected() {
        let g = GenotypeVector::from_codes("v", &[0, 1, 2, 0, 1, 2]).unwrap();
        let p = PhenotypeVector::from_values(&[0.1, 0.4, 0.3, 0.9, 0.2, 0.5]).unwrap();
        let plan = PermutationPlan::new(0, 1);
        assert!(permute_and_rescore(&g, &p, &plan, &JlsConfig::default(), Execution::Sequential).is_err());
    }
}
