//! File-driven scans: sample reconciliation, per-variant scoring and
//! gene-set testing.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::data::{GenotypeVector, PhenotypeVector, Sex};
use crate::error::{JlsError, Result};
use crate::exec::{map_indexed, Execution};
use crate::geneset::{geneset_permutation_test, GeneSetConfig, SetStatistic};
use crate::io::{
    format_real, load_genesets, load_genotypes, load_phenotypes, resolve_geneset, write_results, GenotypeMatrix,
    PhenotypeTable, ResultRecord,
};
use crate::jls::{jls_single_variant, validate_config, JlsConfig, JlsResult};
use crate::permutation::{permute_and_rescore, PermutationPlan};
use crate::transform::{inverse_normal_transform, BLOM_OFFSET};

/// Which joint statistics are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JointMethods {
    Fisher,
    MinP,
    #[default]
    Both,
}

impl JointMethods {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fisher" => Some(JointMethods::Fisher),
            "minp" => Some(JointMethods::MinP),
            "both" => Some(JointMethods::Both),
            _ => None,
        }
    }

    fn fisher(self) -> bool {
        self != JointMethods::MinP
    }

    fn minp(self) -> bool {
        self != JointMethods::Fisher
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanPValues {
    #[default]
    Asymptotic,
    Permutation(PermutationPlan),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub phenotype: PathBuf,
    pub genotype: PathBuf,
    pub genesets: Option<PathBuf>,
    pub jls: JlsConfig,
    pub joint: JointMethods,
    pub pvalues: ScanPValues,
    /// Variants whose joint p-value is at or below this get `flagged`.
    pub flag_threshold: Option<f64>,
    /// Rank offset for the inverse normal transform; `None` leaves the
    /// phenotype untouched.
    pub inverse_normal: Option<f64>,
    pub set_statistic: SetStatistic,
    pub output: Option<PathBuf>,
    pub execution: Execution,
}

impl ScanConfig {
    pub fn new(phenotype: impl Into<PathBuf>, genotype: impl Into<PathBuf>) -> Self {
        ScanConfig {
            phenotype: phenotype.into(),
            genotype: genotype.into(),
            genesets: None,
            jls: JlsConfig::default(),
            joint: JointMethods::Both,
            pvalues: ScanPValues::Asymptotic,
            flag_threshold: None,
            inverse_normal: None,
            set_statistic: SetStatistic::Fisher,
            output: None,
            execution: Execution::Parallel,
        }
    }

    pub fn with_int(mut self) -> Self {
        self.inverse_normal = Some(BLOM_OFFSET);
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_config(&self.jls)?;
        if let ScanPValues::Permutation(plan) = &self.pvalues {
            plan.validate()?;
        }
        if let Some(t) = self.flag_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(JlsError::InvalidInput(format!("flag threshold {t} not in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Outcome of matching phenotype and genotype sample ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconciliationReport {
    pub phenotype_samples: usize,
    pub genotype_samples: usize,
    pub common: usize,
    pub phenotype_only: Vec<String>,
    pub genotype_only: Vec<String>,
    /// Common samples whose phenotype is missing.
    pub missing_phenotype: usize,
}

impl fmt::Display for ReconciliationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "samples: {} phenotyped, {} genotyped, {} in both ({} with missing phenotype)",
            self.phenotype_samples, self.genotype_samples, self.common, self.missing_phenotype
        )?;
        let preview = |ids: &[String]| {
            let mut s = ids.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
            if ids.len() > 5 {
                s.push_str(", ...");
            }
            s
        };
        if !self.phenotype_only.is_empty() {
            write!(
                f,
                "; {} only in phenotype file [{}]",
                self.phenotype_only.len(),
                preview(&self.phenotype_only)
            )?;
        }
        if !self.genotype_only.is_empty() {
            write!(
                f,
                "; {} only in genotype file [{}]",
                self.genotype_only.len(),
                preview(&self.genotype_only)
            )?;
        }
        Ok(())
    }
}

/// Samples present in both inputs, in sample-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    pub sample_ids: Vec<String>,
    pub sexes: Vec<Sex>,
    pub phenotype: PhenotypeVector,
    /// Genotype matrix column of each frame sample.
    pub columns: Vec<usize>,
    pub report: ReconciliationReport,
}

impl SampleFrame {
    pub fn reconcile(table: &PhenotypeTable, matrix: &GenotypeMatrix) -> Result<Self> {
        let geno_col: HashMap<&str, usize> = matrix
            .sample_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut rows: Vec<(usize, usize)> = Vec::new();
        let mut phenotype_only = Vec::new();
        for (i, id) in table.sample_ids.iter().enumerate() {
            match geno_col.get(id.as_str()) {
                Some(&c) => rows.push((i, c)),
                None => phenotype_only.push(id.clone()),
            }
        }
        if rows.is_empty() {
            return Err(JlsError::Validation(
                "phenotype and genotype files share no sample ids".into(),
            ));
        }
        let in_pheno: std::collections::HashSet<&str> = table.sample_ids.iter().map(|s| s.as_str()).collect();
        let genotype_only: Vec<String> = matrix
            .sample_ids
            .iter()
            .filter(|s| !in_pheno.contains(s.as_str()))
            .cloned()
            .collect();
        rows.sort_by(|a, b| table.sample_ids[a.0].cmp(&table.sample_ids[b.0]));
        let sample_ids: Vec<String> = rows.iter().map(|&(i, _)| table.sample_ids[i].clone()).collect();
        let values: Vec<Option<f64>> = rows.iter().map(|&(i, _)| table.values[i]).collect();
        let report = ReconciliationReport {
            phenotype_samples: table.len(),
            genotype_samples: matrix.sample_ids.len(),
            common: rows.len(),
            phenotype_only,
            genotype_only,
            missing_phenotype: values.iter().filter(|v| v.is_none()).count(),
        };
        Ok(SampleFrame {
            sexes: rows.iter().map(|&(i, _)| table.sexes[i]).collect(),
            columns: rows.iter().map(|&(_, c)| c).collect(),
            phenotype: PhenotypeVector::new(sample_ids.clone(), values)?,
            sample_ids,
            report,
        })
    }

    /// Replaces the phenotype by its inverse normal transform.
    pub fn transform_phenotype(&mut self, offset: f64) -> Result<()> {
        let z = inverse_normal_transform(self.phenotype.values(), offset)?;
        self.phenotype = PhenotypeVector::new(self.sample_ids.clone(), z)?;
        Ok(())
    }

    /// A variant's genotypes restricted to and ordered like the frame.
    pub fn genotype(&self, variant: &GenotypeVector) -> GenotypeVector {
        let codes = variant.codes();
        let aligned = self.columns.iter().map(|&c| codes[c]).collect();
        GenotypeVector::new(variant.variant_id.clone(), variant.chrom.clone(), aligned)
            .expect("codes already validated")
    }
}

/// Loaded and reconciled inputs.
#[derive(Debug, Clone)]
pub struct ScanInputs {
    pub matrix: GenotypeMatrix,
    pub frame: SampleFrame,
}

pub fn load_inputs(config: &ScanConfig) -> Result<ScanInputs> {
    let table = load_phenotypes(&config.phenotype)?;
    let sexes = table.has_sex.then(|| table.sex_by_id());
    let matrix = load_genotypes(&config.genotype, sexes.as_ref())?;
    let mut frame = SampleFrame::reconcile(&table, &matrix)?;
    if let Some(offset) = config.inverse_normal {
        frame.transform_phenotype(offset)?;
    }
    Ok(ScanInputs { matrix, frame })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub records: Vec<ResultRecord>,
    pub results: Vec<JlsResult>,
    pub report: ReconciliationReport,
    pub flagged: usize,
    pub degenerate: usize,
}

fn status_of(result: &JlsResult, joint_p: Option<f64>, perm_warn: bool, threshold: Option<f64>) -> String {
    if joint_p.is_none() {
        return "degenerate".to_string();
    }
    let mut tags = vec!["ok"];
    if result.clamped() {
        tags.push("clamped");
    }
    if perm_warn {
        tags.push("perm_warn");
    }
    if let (Some(t), Some(p)) = (threshold, joint_p) {
        if p <= t {
            tags.push("flagged");
        }
    }
    tags.join(";")
}

fn score_variant(geno: &GenotypeVector, pheno: &PhenotypeVector, config: &ScanConfig) -> Result<(JlsResult, ResultRecord)> {
    let joint = config.joint;
    let (result, p_loc, p_scale, p_fisher, p_minp, p_lrt, warn) = match &config.pvalues {
        ScanPValues::Asymptotic => {
            let r = jls_single_variant(geno, pheno, &config.jls)?;
            let (l, s, f, m, x) = (r.p_location(), r.p_scale(), r.p_fisher(), r.p_minp(), r.p_lrt());
            (r, l, s, f, m, x, false)
        }
        ScanPValues::Permutation(plan) => {
            let out = permute_and_rescore(geno, pheno, plan, &config.jls, Execution::Sequential)?;
            let pv = out.pvalues;
            let g = |p: Option<crate::numeric::Probability>| p.map(|p| p.get());
            (
                out.observed,
                g(pv.location),
                g(pv.scale),
                g(pv.fisher),
                g(pv.minp),
                g(pv.lrt),
                out.warning,
            )
        }
    };
    let p_fisher = p_fisher.filter(|_| joint.fisher());
    let p_minp = p_minp.filter(|_| joint.minp());
    let joint_p = if joint.fisher() { p_fisher } else { p_minp };
    let record = ResultRecord {
        variant_id: geno.variant_id.clone(),
        chrom: geno.chrom.clone(),
        n_used: result.n_used,
        p_loc,
        p_scale,
        w_fisher: result.w_fisher().filter(|_| joint.fisher()),
        p_fisher,
        w_minp: result.w_minp().filter(|_| joint.minp()),
        p_minp,
        p_lrt,
        status: status_of(&result, joint_p, warn, config.flag_threshold),
    };
    Ok((result, record))
}

/// Scores every variant of `matrix` against the frame's phenotype. Rows
/// keep the matrix order.
pub fn scan_variants(inputs: &ScanInputs, config: &ScanConfig) -> Result<ScanOutput> {
    config.validate()?;
    let frame = &inputs.frame;
    let variants = &inputs.matrix.variants;
    let scored = map_indexed(config.execution, variants.len(), |i| {
        score_variant(&frame.genotype(&variants[i]), &frame.phenotype, config)
    });
    let mut records = Vec::with_capacity(scored.len());
    let mut results = Vec::with_capacity(scored.len());
    for s in scored {
        let (r, rec) = s?;
        results.push(r);
        records.push(rec);
    }
    let flagged = records.iter().filter(|r| r.status.contains("flagged")).count();
    let degenerate = records.iter().filter(|r| r.status == "degenerate").count();
    Ok(ScanOutput {
        records,
        results,
        report: frame.report.clone(),
        flagged,
        degenerate,
    })
}

/// Loads inputs, scans and writes the results file when an output path is
/// configured.
pub fn run_scan(config: &ScanConfig) -> Result<ScanOutput> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let out = scan_variants(&inputs, config)?;
    if let Some(path) = &config.output {
        write_results(&out.records, path)?;
    }
    Ok(out)
}

/// One row of a gene-set results file.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSetRecord {
    pub set_id: String,
    pub description: String,
    pub j_listed: usize,
    pub j_resolved: usize,
    pub j_used: usize,
    pub unresolved: Vec<String>,
    pub observed: Option<f64>,
    pub replicates: usize,
    pub p: Option<f64>,
    pub status: String,
}

pub const GENESET_HEADER: [&str; 10] = [
    "set_id",
    "description",
    "j_listed",
    "j_resolved",
    "j_used",
    "observed",
    "replicates",
    "p_set",
    "status",
    "unresolved",
];

pub fn write_geneset_results_to<W: Write>(records: &[GeneSetRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", GENESET_HEADER.join("\t"))?;
    for r in records {
        let unresolved = if r.unresolved.is_empty() {
            crate::io::MISSING.to_string()
        } else {
            r.unresolved.join(",")
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.set_id,
            r.description,
            r.j_listed,
            r.j_resolved,
            r.j_used,
            format_real(r.observed),
            r.replicates,
            format_real(r.p),
            r.status,
            unresolved
        )?;
    }
    w.flush()
}

pub fn write_geneset_results(records: &[GeneSetRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| JlsError::io(path, e))?;
    write_geneset_results_to(records, std::io::BufWriter::new(file)).map_err(|e| JlsError::io(path, e))
}

/// Permutation test of every gene set in the configured gene-set file.
/// Sets run one after another; replicates within a set are spread over
/// the worker pool.
pub fn run_genesets(config: &ScanConfig) -> Result<Vec<GeneSetRecord>> {
    config.validate()?;
    let path = config
        .genesets
        .as_ref()
        .ok_or_else(|| JlsError::InvalidInput("no gene-set file given".into()))?;
    let plan = match config.pvalues {
        ScanPValues::Permutation(plan) => plan,
        ScanPValues::Asymptotic => {
            return Err(JlsError::InvalidInput(
                "gene-set tests need a permutation replicate count".into(),
            ))
        }
    };
    let sets = load_genesets(path)?;
    let inputs = load_inputs(config)?;
    let gs_config = GeneSetConfig {
        jls: config.jls,
        statistic: config.set_statistic,
    };
    let mut out = Vec::with_capacity(sets.len());
    for set in &sets {
        let resolved = resolve_geneset(set, &inputs.matrix)?;
        let genos: Vec<GenotypeVector> = resolved
            .rows
            .iter()
            .map(|&r| inputs.frame.genotype(&inputs.matrix.variants[r]))
            .collect();
        let refs: Vec<&GenotypeVector> = genos.iter().collect();
        let base = GeneSetRecord {
            set_id: set.set_id.clone(),
            description: set.description.clone(),
            j_listed: set.variant_ids.len(),
            j_resolved: resolved.rows.len(),
            j_used: 0,
            unresolved: resolved.unresolved.clone(),
            observed: None,
            replicates: plan.replicates,
            p: None,
            status: "degenerate".into(),
        };
        match geneset_permutation_test(&set.set_id, &refs, &inputs.frame.phenotype, &plan, &gs_config, config.execution) {
            Ok(r) => {
                let flagged = config.flag_threshold.is_some_and(|t| r.p.get() <= t);
                out.push(GeneSetRecord {
                    j_used: r.j_used,
                    observed: Some(r.observed),
                    p: Some(r.p.get()),
                    status: if flagged { "ok;flagged".into() } else { "ok".into() },
                    ..base
                });
            }
            Err(JlsError::Validation(_)) => out.push(base),
            Err(e) => return Err(e),
        }
    }
    if let Some(path) = &config.output {
        write_geneset_results(&out, path)?;
    }
    Ok(out)
}
