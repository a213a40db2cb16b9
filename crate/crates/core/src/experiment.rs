//! Type-1-error and power experiment drivers.
//!
//! Replicate `r` of cell `c` draws from the substream `(seed, c, r)`, so a
//! grid gives the same table for any worker count. Aggregation is integer
//! rejection counting.

use std::fmt::Write as _;

use crate::error::{JlsError, Result};
use crate::exec::{map_chunks, Execution};
use crate::individual::Scratch;
use crate::jls::{score, validate_config, JlsConfig};
use crate::permutation::{permutation_pvalues_complete, PValueConvention, PermutationPlan};
use crate::seed::{substream2, substream_seed};
use crate::simulate::{fill_dataset, Effects, GenotypeSource, Model, SimulatedDataset, SimulationSpec};

const PERMUTATION_SALT: u64 = 0x7065_726d_7574_6521;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    Location,
    Scale,
    Fisher,
    MinP,
    Lrt,
}

impl TestKind {
    pub const ALL: [TestKind; 5] = [
        TestKind::Location,
        TestKind::Scale,
        TestKind::Fisher,
        TestKind::MinP,
        TestKind::Lrt,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TestKind::Location => "location",
            TestKind::Scale => "scale",
            TestKind::Fisher => "jls_fisher",
            TestKind::MinP => "jls_minp",
            TestKind::Lrt => "lrt",
        }
    }

    pub fn parse(s: &str) -> Option<TestKind> {
        let s = s.trim();
        let s = match s {
            "fisher" => "jls_fisher",
            "minp" => "jls_minp",
            other => other,
        };
        TestKind::ALL.into_iter().find(|t| t.label() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PValueMode {
    #[default]
    Asymptotic,
    /// Nested phenotype permutation inside every replicate.
    Permutation {
        replicates: usize,
        convention: PValueConvention,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub label: String,
    pub spec: SimulationSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub cells: Vec<GridCell>,
    pub replicates: usize,
    pub alphas: Vec<f64>,
    pub tests: Vec<TestKind>,
    pub config: JlsConfig,
    pub pvalue_mode: PValueMode,
    pub seed: u64,
    pub execution: Execution,
}

impl ExperimentGrid {
    pub fn new(cells: Vec<GridCell>, replicates: usize, alphas: Vec<f64>) -> Self {
        ExperimentGrid {
            cells,
            replicates,
            alphas,
            tests: TestKind::ALL.to_vec(),
            config: JlsConfig {
                include_lrt: true,
                ..JlsConfig::default()
            },
            pvalue_mode: PValueMode::Asymptotic,
            seed: 0,
            execution: Execution::Parallel,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(JlsError::InvalidInput("replicate count must be at least 1".into()));
        }
        if self.cells.is_empty() {
            return Err(JlsError::InvalidInput("experiment grid has no cells".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(JlsError::InvalidInput(format!("significance level {a} not in (0, 1]")));
        }
        if self.alphas.is_empty() || self.tests.is_empty() {
            return Err(JlsError::InvalidInput("grid needs at least one level and one test".into()));
        }
        if let PValueMode::Permutation { replicates: 0, .. } = self.pvalue_mode {
            return Err(JlsError::InvalidInput("permutation count must be at least 1".into()));
        }
        validate_config(&self.config)?;
        for cell in &self.cells {
            cell.spec.validate()?;
        }
        Ok(())
    }
}

/// One (cell, test, level) rejection rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub cell: String,
    pub test: TestKind,
    pub alpha: f64,
    pub rejections: usize,
    pub replicates: usize,
    /// Replicates whose p-value was missing (degenerate); counted as
    /// non-rejections.
    pub missing: usize,
}

impl ExperimentRow {
    pub fn rate(&self) -> f64 {
        self.rejections as f64 / self.replicates as f64
    }

    /// Binomial standard error of the rate.
    pub fn se(&self) -> f64 {
        let r = self.rate();
        (r * (1.0 - r) / self.replicates as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    pub fn get(&self, cell: &str, test: TestKind, alpha: f64) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.cell == cell && r.test == test && r.alpha == alpha)
    }

    /// Long-format TSV, one row per (cell, test, level).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("cell\ttest\talpha\treplicates\trejections\trate\tse\tmissing\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
                r.cell,
                r.test.label(),
                r.alpha,
                r.replicates,
                r.rejections,
                r.rate(),
                r.se(),
                r.missing
            );
        }
        out
    }
}

type PRow = [Option<f64>; 5];

fn replicate_pvalues(
    grid: &ExperimentGrid,
    cell_index: usize,
    rep: usize,
    data: &mut SimulatedDataset,
    scratch: &mut Scratch,
) -> PRow {
    let spec = &grid.cells[cell_index].spec;
    let mut rng = substream2(grid.seed, cell_index as u64, rep as u64);
    fill_dataset(spec, &mut rng, data);
    let comps = score(&data.genotypes, &data.phenotype, &grid.config, scratch);
    match grid.pvalue_mode {
        PValueMode::Asymptotic => [
            comps.location.p.map(|p| p.get()),
            comps.scale.p.map(|p| p.get()),
            comps.fisher.map(|f| f.p.get()),
            comps.minp.map(|m| m.p.get()),
            comps.lrt.and_then(|t| t.p).map(|p| p.get()),
        ],
        PValueMode::Permutation {
            replicates,
            convention,
        } => {
            let plan = PermutationPlan {
                replicates,
                seed: substream_seed(
                    substream_seed(grid.seed ^ PERMUTATION_SALT, cell_index as u64),
                    rep as u64,
                ),
                convention,
            };
            let p = permutation_pvalues_complete(&data.genotypes, &data.phenotype, &comps, &plan, &grid.config);
            let lrt = if grid.config.include_lrt { p.lrt } else { None };
            [p.location, p.scale, p.fisher, p.minp, lrt].map(|x| x.map(|p| p.get()))
        }
    }
}

fn run_grid(grid: &ExperimentGrid) -> Result<ExperimentTable> {
    grid.validate()?;
    let mut grid = grid.clone();
    if grid.tests.contains(&TestKind::Lrt) {
        grid.config.include_lrt = true;
    }
    let chunk = match grid.pvalue_mode {
        PValueMode::Asymptotic => 128,
        PValueMode::Permutation { .. } => 1,
    };
    let n_alpha = grid.alphas.len();
    let mut rows = Vec::new();
    for (ci, cell) in grid.cells.iter().enumerate() {
        // counts[test][alpha], missing[test]
        let partials = map_chunks(grid.execution, grid.replicates, chunk, |range| {
            let mut data = SimulatedDataset::default();
            let mut scratch = Scratch::default();
            let mut counts = vec![[0usize; 5]; n_alpha];
            let mut missing = [0usize; 5];
            for rep in range {
                let ps = replicate_pvalues(&grid, ci, rep, &mut data, &mut scratch);
                for (t, p) in ps.iter().enumerate() {
                    match p {
                        Some(p) => {
                            for (a, &alpha) in grid.alphas.iter().enumerate() {
                                if *p <= alpha {
                                    counts[a][t] += 1;
                                }
                            }
                        }
                        None => missing[t] += 1,
                    }
                }
            }
            (counts, missing)
        });
        let mut counts = vec![[0usize; 5]; n_alpha];
        let mut missing = [0usize; 5];
        for (c, m) in &partials {
            for a in 0..n_alpha {
                for t in 0..5 {
                    counts[a][t] += c[a][t];
                }
            }
            for t in 0..5 {
                missing[t] += m[t];
            }
        }
        for &test in &grid.tests {
            for (a, &alpha) in grid.alphas.iter().enumerate() {
                rows.push(ExperimentRow {
                    cell: cell.label.clone(),
                    test,
                    alpha,
                    rejections: counts[a][test.index()],
                    replicates: grid.replicates,
                    missing: missing[test.index()],
                });
            }
        }
    }
    Ok(ExperimentTable { rows })
}

/// Empirical type-1-error rates; every cell must be a genetic null.
pub fn run_type1_grid(grid: &ExperimentGrid) -> Result<ExperimentTable> {
    if let Some(cell) = grid.cells.iter().find(|c| !c.spec.is_genetic_null()) {
        return Err(JlsError::InvalidInput(format!(
            "type-1 grid cell {} has a genetic effect",
            cell.label
        )));
    }
    run_grid(grid)
}

/// Empirical power at the grid's levels.
pub fn run_power_grid(grid: &ExperimentGrid) -> Result<ExperimentTable> {
    run_grid(grid)
}

/// Grid builders for the published simulation designs.
pub mod presets {
    use super::*;

    pub const TYPE1_ALPHAS: [f64; 3] = [0.05, 0.005, 0.0005];
    pub const POWER_ALPHA: f64 = 5e-8;
    pub const TYPE1_REPLICATES: usize = 20_000;
    pub const POWER_REPLICATES: usize = 500;

    /// Fixed genotype group sizes with the rare homozygote at 2..20. The
    /// 10-sample row uses HWE-consistent sizes summing to 2000.
    pub const SMALL_GROUP_SIZES: [[usize; 3]; 6] = [
        [1882, 116, 2],
        [1805, 190, 5],
        [1767, 226, 7],
        [1727, 263, 10],
        [1674, 311, 15],
        [1620, 360, 20],
    ];

    /// Model (iii) rows `(P(E1 = 1), b_GE1)` with marginal effect 0.1.
    pub const MODEL_III_ROWS: [(f64, f64); 6] =
        [(0.05, 2.0), (0.1, 1.0), (0.2, 0.5), (0.3, 0.33), (0.5, 0.2), (1.0, 0.1)];

    pub fn size_label(sizes: [usize; 3]) -> String {
        format!("{}/{}/{}", sizes[0], sizes[1], sizes[2])
    }

    /// Null cells over MAF values, n = 2000.
    pub fn type1_by_maf(mafs: &[f64], n: usize) -> Vec<GridCell> {
        mafs.iter()
            .map(|&maf| GridCell {
                label: format!("maf={maf}"),
                spec: SimulationSpec::null(n, GenotypeSource::Maf(maf)),
            })
            .collect()
    }

    pub fn type1_by_group_sizes(sizes: &[[usize; 3]]) -> Vec<GridCell> {
        sizes
            .iter()
            .map(|&s| GridCell {
                label: size_label(s),
                spec: SimulationSpec::null(s.iter().sum(), GenotypeSource::Fixed(s)),
            })
            .collect()
    }

    /// `-1.0, -0.9, ..., 1.0`.
    pub fn interaction_grid() -> Vec<f64> {
        (-10..=10).map(|i| i as f64 / 10.0).collect()
    }

    fn signed(magnitude: f64, direction: f64) -> f64 {
        if direction < 0.0 {
            -magnitude
        } else {
            magnitude
        }
    }

    pub fn model_i_cell(n: usize, beta_g: f64, beta_e1: f64, beta_ge1: f64) -> GridCell {
        GridCell {
            label: format!("model=i;beta_g={beta_g};beta_e1={beta_e1};beta_ge1={beta_ge1}"),
            spec: SimulationSpec {
                model: Model::I,
                n,
                genotypes: GenotypeSource::Maf(0.3),
                effects: Effects {
                    beta_g,
                    beta_e1,
                    beta_ge1,
                    ..Effects::default()
                },
                f1: 0.3,
                ..SimulationSpec::default()
            },
        }
    }

    /// Model (i) sweep over `b_GE1`, with `b_E1 = ±0.3` following the sign
    /// of `b_GE1`.
    pub fn model_i_sweep(beta_g: f64, n: usize) -> Vec<GridCell> {
        interaction_grid()
            .into_iter()
            .map(|bge| model_i_cell(n, beta_g, signed(0.3, bge), bge))
            .collect()
    }

    /// Model (ii) sweep over `b_GE2` with fixed `b_GE1`, `b_E1 = 0.3` and
    /// `b_E2 = ±0.3` following the sign of `b_GE2`.
    pub fn model_ii_sweep(beta_ge1: f64, n: usize) -> Vec<GridCell> {
        interaction_grid()
            .into_iter()
            .map(|bge2| GridCell {
                label: format!("model=ii;beta_ge1={beta_ge1};beta_ge2={bge2}"),
                spec: SimulationSpec {
                    model: Model::II,
                    n,
                    genotypes: GenotypeSource::Maf(0.3),
                    effects: Effects {
                        beta_e1: 0.3,
                        beta_e2: signed(0.3, bge2),
                        beta_ge1,
                        beta_ge2: bge2,
                        ..Effects::default()
                    },
                    f1: 0.3,
                    f2: 0.3,
                    ..SimulationSpec::default()
                },
            })
            .collect()
    }

    pub fn model_iii_cell(n: usize, f1: f64, beta_ge1: f64) -> GridCell {
        GridCell {
            label: format!("model=iii;f1={f1};beta_ge1={beta_ge1}"),
            spec: SimulationSpec {
                model: Model::III,
                n,
                genotypes: GenotypeSource::Maf(0.3),
                effects: Effects {
                    beta_ge1,
                    ..Effects::default()
                },
                f1,
                ..SimulationSpec::default()
            },
        }
    }

    pub fn model_iii_rows(n: usize) -> Vec<GridCell> {
        MODEL_III_ROWS
            .iter()
            .map(|&(f1, b)| model_iii_cell(n, f1, b))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    #[test]
    fn alpha_one_rejects_everything() {
        let mut grid = ExperimentGrid::new(type1_by_maf(&[0.3], 200), 50, vec![1.0]);
        grid.seed = 4;
        let table = run_type1_grid(&grid).unwrap();
        for row in &table.rows {
            assert_eq!(row.rejections + row.missing, 50, "{row:?}");
            assert_eq!(row.missing, 0);
        }
    }

    #[test]
    fn type1_rejects_alternative_cells() {
        let grid = ExperimentGrid::new(vec![model_iii_cell(100, 0.1, 1.0)], 10, vec![0.05]);
        assert!(run_type1_grid(&grid).is_err());
    }

    #[test]
    fn grid_validation() {
        let mut grid = ExperimentGrid::new(type1_by_maf(&[0.3], 100), 0, vec![0.05]);
        assert!(run_type1_grid(&grid).is_err());
        grid.replicates = 5;
        grid.alphas = vec![0.0];
        assert!(run_type1_grid(&grid).is_err());
    }

    #[test]
    fn sweep_shapes() {
        let g = interaction_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[20], 1.0);
        let cells = model_i_sweep(0.01, 2000);
        assert_eq!(cells[0].spec.effects.beta_e1, -0.3);
        assert_eq!(cells[20].spec.effects.beta_e1, 0.3);
        for s in SMALL_GROUP_SIZES {
            assert_eq!(s.iter().sum::<usize>(), 2000);
        }
    }

    #[test]
    fn tsv_has_header_and_rows() {
        let mut grid = ExperimentGrid::new(type1_by_maf(&[0.3], 100), 20, vec![0.05]);
        grid.tests = vec![TestKind::Fisher];
        let tsv = run_type1_grid(&grid).unwrap().to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("maf=0.3\tjls_fisher\t0.05\t20\t"));
    }
}
