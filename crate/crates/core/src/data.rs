//! Genotype and phenotype containers.

use std::collections::HashSet;

use crate::error::{JlsError, Result};

/// Reported sex of a sample, as coded in phenotype files (1 = male, 2 = female).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sex {
    Male,
    Female,
    #[default]
    Unknown,
}

impl Sex {
    pub fn from_code(code: &str) -> Sex {
        match code.trim() {
            "1" => Sex::Male,
            "2" => Sex::Female,
            _ => Sex::Unknown,
        }
    }
}

/// True for chromosome labels naming the X chromosome.
pub fn is_x_chromosome(chrom: &str) -> bool {
    let c = chrom.trim();
    let c = c.strip_prefix("chr").unwrap_or(c);
    c.eq_ignore_ascii_case("x") || c == "23"
}

/// Minor-allele counts for one variant; `None` marks a missing call.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeVector {
    pub variant_id: String,
    pub chrom: String,
    codes: Vec<Option<u8>>,
}

impl GenotypeVector {
    pub fn new(
        variant_id: impl Into<String>,
        chrom: impl Into<String>,
        codes: Vec<Option<u8>>,
    ) -> Result<Self> {
        let variant_id = variant_id.into();
        if let Some(pos) = codes.iter().position(|c| matches!(c, Some(g) if *g > 2)) {
            return Err(JlsError::Validation(format!(
                "variant {variant_id}: genotype code {} at sample index {pos} is not 0, 1 or 2",
                codes[pos].unwrap()
            )));
        }
        Ok(GenotypeVector {
            variant_id,
            chrom: chrom.into(),
            codes,
        })
    }

    /// Builds an autosomal vector from complete codes.
    pub fn from_codes(variant_id: impl Into<String>, codes: &[u8]) -> Result<Self> {
        Self::new(variant_id, "1", codes.iter().map(|&c| Some(c)).collect())
    }

    pub fn codes(&self) -> &[Option<u8>] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn is_x(&self) -> bool {
        is_x_chromosome(&self.chrom)
    }

    /// Rejects heterozygous calls for males on the X chromosome. Returns the
    /// offending sample indices in the error message.
    pub fn check_hemizygous(&self, sexes: &[Sex], sample_ids: &[String]) -> Result<()> {
        if !self.is_x() {
            return Ok(());
        }
        let bad: Vec<&str> = self
            .codes
            .iter()
            .zip(sexes)
            .zip(sample_ids)
            .filter(|((c, s), _)| **s == Sex::Male && **c == Some(1))
            .map(|(_, id)| id.as_str())
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(JlsError::Validation(format!(
                "variant {} on X: heterozygous call for male sample(s) {}",
                self.variant_id,
                bad.join(",")
            )))
        }
    }
}

/// Quantitative trait values keyed by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct PhenotypeVector {
    sample_ids: Vec<String>,
    values: Vec<Option<f64>>,
}

impl PhenotypeVector {
    pub fn new(sample_ids: Vec<String>, values: Vec<Option<f64>>) -> Result<Self> {
        if sample_ids.len() != values.len() {
            return Err(JlsError::InvalidInput(format!(
                "{} sample ids but {} phenotype values",
                sample_ids.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| matches!(v, Some(x) if !x.is_finite())) {
            return Err(JlsError::Validation(format!(
                "phenotype for sample {} is not finite",
                sample_ids[i]
            )));
        }
        let mut seen = HashSet::with_capacity(sample_ids.len());
        for id in &sample_ids {
            if !seen.insert(id.as_str()) {
                return Err(JlsError::Validation(format!("duplicate sample id {id}")));
            }
        }
        Ok(PhenotypeVector { sample_ids, values })
    }

    /// Complete values with generated ids `s0, s1, ...`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let ids = (0..values.len()).map(|i| format!("s{i}")).collect();
        Self::new(ids, values.iter().map(|&v| Some(v)).collect())
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample indices in ascending sample-id order.
    pub(crate) fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.sample_ids[a].cmp(&self.sample_ids[b]));
        order
    }
}

pub(crate) fn check_aligned(geno: &GenotypeVector, pheno: &PhenotypeVector) -> Result<()> {
    if geno.len() != pheno.len() {
        return Err(JlsError::InvalidInput(format!(
            "variant {} has {} genotypes but the phenotype has {} samples",
            geno.variant_id,
            geno.len(),
            pheno.len()
        )));
    }
    Ok(())
}

/// Complete-case extraction: samples missing either value are dropped.
pub(crate) fn complete_cases(geno: &GenotypeVector, pheno: &PhenotypeVector) -> (Vec<u8>, Vec<f64>) {
    let mut codes = Vec::with_capacity(geno.len());
    let mut y = Vec::with_capacity(geno.len());
    for (g, v) in geno.codes.iter().zip(&pheno.values) {
        if let (Some(g), Some(v)) = (g, v) {
            codes.push(*g);
            y.push(*v);
        }
    }
    (codes, y)
}
