//! Gene-set association: the sum of per-SNP joint statistics, evaluated by
//! phenotype permutation. Each replicate shuffles the phenotype once and
//! scores every SNP in the set against the same shuffled vector, so LD
//! between the SNPs is preserved in the null distribution.

use std::collections::HashSet;

use crate::data::{check_aligned, GenotypeVector, PhenotypeVector};
use crate::error::{JlsError, Result};
use crate::exec::{map_chunks, Execution};
use crate::individual::Scratch;
use crate::jls::{score, validate_config, Components, JlsConfig, JlsResult};
use crate::numeric::Probability;
use crate::permutation::{pvalue_from_counts, shuffle_for_replicate, CanonicalPhenotype, PermutationPlan, SnpView};

const REPLICATES_PER_TASK: usize = 16;

/// Variant identifiers annotated to one set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneSet {
    pub set_id: String,
    pub description: String,
    pub variant_ids: Vec<String>,
}

impl GeneSet {
    pub fn new(set_id: impl Into<String>, description: impl Into<String>, variant_ids: Vec<String>) -> Result<Self> {
        let set_id = set_id.into();
        if variant_ids.is_empty() {
            return Err(JlsError::Validation(format!("gene set {set_id} lists no variants")));
        }
        let mut seen = HashSet::new();
        for v in &variant_ids {
            if !seen.insert(v.as_str()) {
                return Err(JlsError::Validation(format!(
                    "gene set {set_id} lists variant {v} more than once"
                )));
            }
        }
        Ok(GeneSet {
            set_id,
            description: description.into(),
            variant_ids,
        })
    }
}

/// Per-SNP statistic entering the set sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetStatistic {
    /// `W_F`.
    #[default]
    Fisher,
    /// `-2 ln p_minP`.
    MinP,
}

impl SetStatistic {
    fn of(self, c: &Components) -> Option<f64> {
        match self {
            SetStatistic::Fisher => c.fisher.map(|f| f.w),
            SetStatistic::MinP => c.minp.map(|m| minp_term(m.p.get())),
        }
    }

    fn of_result(self, r: &JlsResult) -> Option<f64> {
        match self {
            SetStatistic::Fisher => r.w_fisher(),
            SetStatistic::MinP => r.p_minp().map(minp_term),
        }
    }
}

fn minp_term(p: f64) -> f64 {
    -2.0 * p.max(crate::jls::DEFAULT_P_FLOOR).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneSetConfig {
    pub jls: JlsConfig,
    pub statistic: SetStatistic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumStatistic {
    pub sum: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Sum of the per-SNP statistic over non-degenerate results.
pub fn geneset_sum_statistic(results: &[JlsResult], statistic: SetStatistic) -> Result<SumStatistic> {
    let values: Vec<f64> = results.iter().filter_map(|r| statistic.of_result(r)).collect();
    if values.is_empty() {
        return Err(JlsError::Validation(
            "every variant in the set is degenerate".into(),
        ));
    }
    Ok(SumStatistic {
        sum: values.iter().sum(),
        used: values.len(),
        excluded: results.len() - values.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneSetResult {
    pub set_id: String,
    /// SNPs that entered the sum (non-degenerate in the observed data).
    pub j_used: usize,
    pub observed: f64,
    pub replicates: usize,
    pub p: Probability,
    pub per_snp: Vec<JlsResult>,
    /// SNP terms that were degenerate inside a permutation replicate and
    /// contributed zero to that replicate's sum.
    pub degenerate_replicate_terms: usize,
}

/// Permutation test of the set sum statistic.
pub fn geneset_permutation_test(
    set_id: &str,
    genos: &[&GenotypeVector],
    pheno: &PhenotypeVector,
    plan: &PermutationPlan,
    config: &GeneSetConfig,
    exec: Execution,
) -> Result<GeneSetResult> {
    plan.validate()?;
    validate_config(&config.jls)?;
    if genos.is_empty() {
        return Err(JlsError::InvalidInput(format!("gene set {set_id} has no variants")));
    }
    for g in genos {
        check_aligned(g, pheno)?;
    }
    let canonical = CanonicalPhenotype::new(pheno);
    let mut scratch = Scratch::default();
    let mut y = Vec::new();
    let mut per_snp = Vec::with_capacity(genos.len());
    let mut active: Vec<SnpView> = Vec::new();
    let mut observed_terms = Vec::new();
    for g in genos {
        let view = canonical.view(g);
        view.gather(&canonical.values, &mut y);
        let comps = score(&view.codes, &y, &config.jls, &mut scratch);
        if let Some(term) = config.statistic.of(&comps) {
            observed_terms.push(term);
            active.push(view);
        }
        per_snp.push(comps.into_result(&g.variant_id));
    }
    if active.is_empty() {
        return Err(JlsError::Validation(format!(
            "gene set {set_id}: every variant is degenerate"
        )));
    }
    let observed: f64 = observed_terms.iter().sum();

    let partials = map_chunks(exec, plan.replicates, REPLICATES_PER_TASK, |range| {
        let mut scratch = Scratch::default();
        let mut shuffled = Vec::with_capacity(canonical.values.len());
        let mut y = Vec::new();
        let (mut gt, mut ge, mut degenerate) = (0usize, 0usize, 0usize);
        for k in range {
            shuffled.clear();
            shuffled.extend_from_slice(&canonical.values);
            shuffle_for_replicate(&mut shuffled, plan.seed, k);
            let mut sum = 0.0;
            for view in &active {
                view.gather(&shuffled, &mut y);
                let comps = score(&view.codes, &y, &config.jls, &mut scratch);
                match config.statistic.of(&comps) {
                    Some(t) => sum += t,
                    None => degenerate += 1,
                }
            }
            if sum > observed {
                gt += 1;
            }
            if sum >= observed {
                ge += 1;
            }
        }
        (gt, ge, degenerate)
    });
    let (gt, ge, degenerate) = partials
        .iter()
        .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    Ok(GeneSetResult {
        set_id: set_id.to_string(),
        j_used: active.len(),
        observed,
        replicates: plan.replicates,
        p: pvalue_from_counts(gt, ge, plan.replicates, plan.convention),
        per_snp,
        degenerate_replicate_terms: degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jls::jls_single_variant;

    #[test]
    fn duplicate_and_empty_sets_rejected() {
        assert!(GeneSet::new("s", "", vec![]).is_err());
        assert!(GeneSet::new("s", "", vec!["a".into(), "a".into()]).is_err());
        assert!(GeneSet::new("s", "", vec!["a".into(), "b".into()]).is_ok());
    }

    #[test]
    fn sum_skips_degenerate() {
        let ph = PhenotypeVector::from_values(&[0.0, 1.0, 1.0, 2.0, 2.0, 3.0]).unwrap();
        let good = GenotypeVector::from_codes("a", &[0, 0, 1, 1, 2, 2]).unwrap();
        let mono = GenotypeVector::from_codes("b", &[1; 6]).unwrap();
        let cfg = JlsConfig::default();
        let results = vec![
            jls_single_variant(&good, &ph, &cfg).unwrap(),
            jls_single_variant(&mono, &ph, &cfg).unwrap(),
        ];
        let s = geneset_sum_statistic(&results, SetStatistic::Fisher).unwrap();
        assert_eq!(s.used, 1);
        assert_eq!(s.excluded, 1);
        assert_eq!(s.sum, results[0].w_fisher().unwrap());
        assert!(geneset_sum_statistic(&results[1..], SetStatistic::Fisher).is_err());
    }

    #[test]
    fn all_degenerate_set_errors() {
        let ph = PhenotypeVector::from_values(&[0.0, 1.0, 1.0, 2.0]).unwrap();
        let mono = GenotypeVector::from_codes("b", &[1; 4]).unwrap();
        let plan = PermutationPlan::new(10, 1);
        let r = geneset_permutation_test("s", &[&mono], &ph, &plan, &GeneSetConfig::default(), Execution::Sequential);
        assert!(r.is_err());
    }
}
