//! Seedable data generators for the null model and the three interaction
//! models.
//!
//! * Model (i): `E[Y] = b_G G + b_E1 E1 + b_GE1 G E1`
//! * Model (ii): `E[Y] = b_E1 E1 + b_E2 E2 + b_GE1 G E1 + b_GE2 G E2`
//! * Model (iii): `E[Y] = b_GE1 G E1`
//!
//! Exposures are Bernoulli, residuals standard normal, no intercept. Terms
//! a model does not contain are ignored even if set in the spec.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{GenotypeVector, PhenotypeVector};
use crate::error::{JlsError, Result};
use crate::numeric::normal_quantile;
use crate::seed::{substream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    #[default]
    Null,
    I,
    II,
    III,
}

impl Model {
    pub fn parse(s: &str) -> Option<Model> {
        match s.trim().to_ascii_lowercase().as_str() {
            "null" | "0" => Some(Model::Null),
            "i" | "1" => Some(Model::I),
            "ii" | "2" => Some(Model::II),
            "iii" | "3" => Some(Model::III),
            _ => None,
        }
    }

    fn uses_e1(self) -> bool {
        !matches!(self, Model::Null)
    }

    fn uses_e2(self) -> bool {
        matches!(self, Model::II)
    }
}

/// How genotypes are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenotypeSource {
    /// i.i.d. draws under Hardy-Weinberg proportions.
    Maf(f64),
    /// Exactly `n0, n1, n2` samples per genotype, in shuffled order.
    Fixed([usize; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Effects {
    pub beta_g: f64,
    pub beta_e1: f64,
    pub beta_e2: f64,
    pub beta_ge1: f64,
    pub beta_ge2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSpec {
    pub model: Model,
    pub n: usize,
    pub genotypes: GenotypeSource,
    pub effects: Effects,
    /// Exposure frequencies `P(E1 = 1)` and `P(E2 = 1)`.
    pub f1: f64,
    pub f2: f64,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            model: Model::Null,
            n: 2000,
            genotypes: GenotypeSource::Maf(0.3),
            effects: Effects::default(),
            f1: 0.3,
            f2: 0.3,
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn null(n: usize, genotypes: GenotypeSource) -> Self {
        SimulationSpec {
            n,
            genotypes,
            ..SimulationSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(JlsError::InvalidInput("sample size must be positive".into()));
        }
        match self.genotypes {
            GenotypeSource::Maf(maf) => check_maf(maf)?,
            GenotypeSource::Fixed(sizes) => {
                let total: usize = sizes.iter().sum();
                if total != self.n {
                    return Err(JlsError::InvalidInput(format!(
                        "fixed group sizes {sizes:?} sum to {total}, not n = {}",
                        self.n
                    )));
                }
            }
        }
        for (name, f, used) in [
            ("f1", self.f1, self.model.uses_e1()),
            ("f2", self.f2, self.model.uses_e2()),
        ] {
            if used && !(f > 0.0 && f <= 1.0) {
                return Err(JlsError::InvalidInput(format!("exposure frequency {name} = {f} not in (0, 1]")));
            }
        }
        let e = &self.effects;
        if [e.beta_g, e.beta_e1, e.beta_e2, e.beta_ge1, e.beta_ge2]
            .iter()
            .any(|b| !b.is_finite())
        {
            return Err(JlsError::InvalidInput("effect sizes must be finite".into()));
        }
        Ok(())
    }

    /// Effects with terms absent from the model zeroed.
    pub fn active_effects(&self) -> Effects {
        let e = self.effects;
        match self.model {
            Model::Null => Effects::default(),
            Model::I => Effects {
                beta_g: e.beta_g,
                beta_e1: e.beta_e1,
                beta_ge1: e.beta_ge1,
                ..Effects::default()
            },
            Model::II => Effects {
                beta_g: 0.0,
                ..e
            },
            Model::III => Effects {
                beta_ge1: e.beta_ge1,
                ..Effects::default()
            },
        }
    }

    /// No genetic main or interaction effect.
    pub fn is_genetic_null(&self) -> bool {
        let e = self.active_effects();
        e.beta_g == 0.0 && e.beta_ge1 == 0.0 && e.beta_ge2 == 0.0
    }
}

fn check_maf(maf: f64) -> Result<()> {
    if maf > 0.0 && maf <= 0.5 {
        Ok(())
    } else {
        Err(JlsError::InvalidInput(format!("minor allele frequency {maf} not in (0, 0.5]")))
    }
}

/// Hardy-Weinberg genotype probabilities `(q^2, 2pq, p^2)` for MAF `p`.
pub fn hwe_proportions(maf: f64) -> [f64; 3] {
    let q = 1.0 - maf;
    [q * q, 2.0 * maf * q, maf * maf]
}

pub(crate) fn draw_hwe(maf: f64, n: usize, rng: &mut StreamRng, out: &mut Vec<u8>) {
    let [p0, p1, _] = hwe_proportions(maf);
    let c1 = p0 + p1;
    out.clear();
    out.extend((0..n).map(|_| {
        let u: f64 = rng.random();
        if u < p0 {
            0
        } else if u < c1 {
            1
        } else {
            2
        }
    }));
}

pub(crate) fn draw_fixed(sizes: [usize; 3], rng: &mut StreamRng, out: &mut Vec<u8>) {
    out.clear();
    for (g, &count) in sizes.iter().enumerate() {
        out.extend(std::iter::repeat_n(g as u8, count));
    }
    out.shuffle(rng);
}

/// i.i.d. HWE genotypes.
pub fn gen_genotypes_hwe(maf: f64, n: usize, seed: u64) -> Result<GenotypeVector> {
    check_maf(maf)?;
    let mut codes = Vec::new();
    draw_hwe(maf, n, &mut substream(seed, 0), &mut codes);
    GenotypeVector::from_codes("sim", &codes)
}

/// Genotypes with exact group sizes in seeded random order.
pub fn gen_genotypes_fixed(n0: usize, n1: usize, n2: usize, n: usize, seed: u64) -> Result<GenotypeVector> {
    if n0 + n1 + n2 != n {
        return Err(JlsError::InvalidInput(format!(
            "group sizes ({n0}, {n1}, {n2}) do not sum to n = {n}"
        )));
    }
    let mut codes = Vec::new();
    draw_fixed([n0, n1, n2], &mut substream(seed, 0), &mut codes);
    GenotypeVector::from_codes("sim", &codes)
}

/// Correlated SNPs: each haplotype carries one shared standard-normal
/// factor, and allele `j` is the minor allele when
/// `sqrt(rho) u + sqrt(1 - rho) e_j < Φ⁻¹(maf)`. Returns `j` code vectors.
pub fn gen_genotypes_ld(n: usize, j: usize, maf: f64, rho: f64, seed: u64) -> Result<Vec<Vec<u8>>> {
    check_maf(maf)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(JlsError::InvalidInput(format!("latent correlation {rho} not in [0, 1]")));
    }
    let mut rng = substream(seed, 0);
    Ok(draw_ld(n, j, maf, rho, &mut rng))
}

pub(crate) fn draw_ld(n: usize, j: usize, maf: f64, rho: f64, rng: &mut StreamRng) -> Vec<Vec<u8>> {
    let threshold = normal_quantile(maf).expect("maf validated");
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut out = vec![vec![0u8; n]; j];
    for i in 0..n {
        for _ in 0..2 {
            let u: f64 = rng.sample(StandardNormal);
            for snp in out.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                if a * u + b * e < threshold {
                    snp[i] += 1;
                }
            }
        }
    }
    out
}

/// One simulated sample. Exposures are kept for diagnostics only; tests see
/// genotypes and phenotypes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulatedDataset {
    pub genotypes: Vec<u8>,
    pub e1: Vec<u8>,
    pub e2: Vec<u8>,
    pub phenotype: Vec<f64>,
}

impl SimulatedDataset {
    pub fn genotype_vector(&self, variant_id: &str) -> GenotypeVector {
        GenotypeVector::from_codes(variant_id, &self.genotypes).expect("simulated codes are valid")
    }

    pub fn phenotype_vector(&self) -> PhenotypeVector {
        PhenotypeVector::from_values(&self.phenotype).expect("simulated values are finite")
    }
}

/// Fills `out` from `rng`; `spec` must already be validated.
pub(crate) fn fill_dataset(spec: &SimulationSpec, rng: &mut StreamRng, out: &mut SimulatedDataset) {
    match spec.genotypes {
        GenotypeSource::Maf(maf) => draw_hwe(maf, spec.n, rng, &mut out.genotypes),
        GenotypeSource::Fixed(sizes) => draw_fixed(sizes, rng, &mut out.genotypes),
    }
    let e = spec.active_effects();
    let (use_e1, use_e2) = (spec.model.uses_e1(), spec.model.uses_e2());
    out.e1.clear();
    out.e2.clear();
    out.phenotype.clear();
    for &g in &out.genotypes {
        let g = g as f64;
        let e1 = u8::from(use_e1 && rng.random_bool(spec.f1));
        let e2 = u8::from(use_e2 && rng.random_bool(spec.f2));
        let eps: f64 = rng.sample(StandardNormal);
        let (e1f, e2f) = (e1 as f64, e2 as f64);
        let mean = e.beta_g * g
            + e.beta_e1 * e1f
            + e.beta_e2 * e2f
            + e.beta_ge1 * g * e1f
            + e.beta_ge2 * g * e2f;
        out.e1.push(e1);
        out.e2.push(e2);
        out.phenotype.push(mean + eps);
    }
}

pub fn simulate_dataset(spec: &SimulationSpec) -> Result<SimulatedDataset> {
    spec.validate()?;
    let mut out = SimulatedDataset::default();
    fill_dataset(spec, &mut substream(spec.seed, 0), &mut out);
    Ok(out)
}
