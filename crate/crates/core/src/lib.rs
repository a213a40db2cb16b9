//! Joint location-scale association tests for quantitative traits.
//!
//! A variant is scored by a location test (regression slope or ANOVA) and a
//! scale test (Levene), and the two p-values are combined by Fisher's
//! method or by their minimum. The crate also provides phenotype
//! permutation, gene-set sums, a simulation engine for type 1 error and
//! power studies, and TSV file handling.

pub mod data;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod geneset;
pub mod individual;
pub mod io;
pub mod jls;
pub mod numeric;
pub mod permutation;
pub mod scan;
pub mod seed;
pub mod simulate;
pub mod transform;

pub use data::{GenotypeVector, PhenotypeVector, Sex};
pub use error::{JlsError, Result};
pub use exec::Execution;
pub use geneset::{geneset_permutation_test, GeneSet, GeneSetConfig, GeneSetResult, SetStatistic};
pub use individual::{LeveneCenter, LocationTest, TestOutcome, TestStatus};
pub use jls::{fisher_combine, jls_single_variant, minp_combine, JlsConfig, JlsResult};
pub use numeric::{DegreesOfFreedom, Probability};
pub use permutation::{permute_and_rescore, PValueConvention, PermutationPlan};
pub use simulate::{simulate_dataset, Model, SimulationSpec};
