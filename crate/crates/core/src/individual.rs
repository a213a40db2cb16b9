//! Location-only and scale-only tests, plus the normal-likelihood LRT used
//! as a comparison baseline.
//!
//! Every test is computed from a [`GroupScan`]: one pass collects
//! per-genotype counts and sums, a second pass collects centered sums of
//! squares and Levene absolute deviations. The permutation and simulation
//! drivers reuse the same scan so each replicate costs two passes over the
//! samples.

use crate::data::{check_aligned, complete_cases, GenotypeVector, PhenotypeVector};
use crate::error::Result;
use crate::numeric::{chi2_sf, f_sf, student_t_two_sided, DegreesOfFreedom, Probability};

/// Relative tolerance below which a sum of squares is treated as zero.
const ZERO_SS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocationTest {
    /// Additive-model regression slope t test.
    #[default]
    Ols,
    /// Genotypic one-way ANOVA F test.
    Anova,
}

/// Center used for Levene absolute deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeveneCenter {
    #[default]
    Mean,
    /// Brown-Forsythe variant.
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestStatus {
    Ok,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p: Option<Probability>,
    pub df: DegreesOfFreedom,
    pub n_used: usize,
    pub status: TestStatus,
}

impl TestOutcome {
    fn ok(statistic: f64, p: Probability, df: DegreesOfFreedom, n_used: usize) -> Self {
        TestOutcome {
            statistic,
            p: Some(p),
            df,
            n_used,
            status: TestStatus::Ok,
        }
    }

    fn degenerate(df: DegreesOfFreedom, n_used: usize) -> Self {
        TestOutcome {
            statistic: f64::NAN,
            p: None,
            df,
            n_used,
            status: TestStatus::Degenerate,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == TestStatus::Ok
    }
}

/// Per-genotype summaries of the complete cases.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupSummary {
    pub count: [usize; 3],
    pub mean: [f64; 3],
    /// Unbiased variance; zero for groups with fewer than two samples.
    pub variance: [f64; 3],
    /// Mean absolute deviation from the chosen center.
    pub mean_abs_dev: [f64; 3],
}

impl GroupSummary {
    pub fn compute(geno: &GenotypeVector, pheno: &PhenotypeVector, center: LeveneCenter) -> Result<Self> {
        check_aligned(geno, pheno)?;
        let (codes, y) = complete_cases(geno, pheno);
        let scan = GroupScan::new(&codes, &y, center, &mut Scratch::default());
        let mut out = GroupSummary::default();
        for g in 0..3 {
            let n = scan.n[g];
            out.count[g] = n;
            if n > 0 {
                out.mean[g] = scan.mean[g];
                out.mean_abs_dev[g] = scan.z_sum[g] / n as f64;
            }
            if n > 1 {
                out.variance[g] = scan.ss[g] / (n - 1) as f64;
            }
        }
        Ok(out)
    }
}

/// Reusable buffers for median centering.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    groups: [Vec<f64>; 3],
}

/// Sufficient statistics of one (genotype, phenotype) complete-case sample.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct GroupScan {
    pub n: [usize; 3],
    pub mean: [f64; 3],
    /// Within-group sum of squares about the group mean.
    pub ss: [f64; 3],
    /// Sum and sum of squares of `|y - center_g|`.
    pub z_sum: [f64; 3],
    pub z_sq: [f64; 3],
}

impl GroupScan {
    pub fn new(codes: &[u8], y: &[f64], center: LeveneCenter, scratch: &mut Scratch) -> Self {
        debug_assert_eq!(codes.len(), y.len());
        let mut scan = GroupScan::default();
        let mut sum = [0.0f64; 3];
        for (&g, &v) in codes.iter().zip(y) {
            let g = g as usize;
            scan.n[g] += 1;
            sum[g] += v;
        }
        for g in 0..3 {
            if scan.n[g] > 0 {
                scan.mean[g] = sum[g] / scan.n[g] as f64;
            }
        }
        let centers = match center {
            LeveneCenter::Mean => scan.mean,
            LeveneCenter::Median => group_medians(codes, y, scratch),
        };
        for (&g, &v) in codes.iter().zip(y) {
            let g = g as usize;
            let d = v - scan.mean[g];
            scan.ss[g] += d * d;
            let z = (v - centers[g]).abs();
            scan.z_sum[g] += z;
            scan.z_sq[g] += z * z;
        }
        scan
    }

    fn total(&self) -> usize {
        self.n.iter().sum()
    }

    fn grand_mean(&self, groups: &[usize]) -> f64 {
        let n: usize = groups.iter().map(|&g| self.n[g]).sum();
        groups.iter().map(|&g| self.n[g] as f64 * self.mean[g]).sum::<f64>() / n as f64
    }

    /// (between, within) sums of squares over the given groups.
    fn anova_ss(&self, groups: &[usize]) -> (f64, f64) {
        let grand = self.grand_mean(groups);
        let mut between = 0.0;
        let mut within = 0.0;
        for &g in groups {
            let d = self.mean[g] - grand;
            between += self.n[g] as f64 * d * d;
            within += self.ss[g];
        }
        (between, within)
    }

    fn present(&self, min_count: usize) -> Vec<usize> {
        (0..3).filter(|&g| self.n[g] >= min_count.max(1)).collect()
    }

    pub fn ols(&self) -> TestOutcome {
        let n = self.total();
        let df = DegreesOfFreedom::single(n.saturating_sub(2) as f64);
        let groups = self.present(1);
        if n < 3 || groups.len() < 2 {
            return TestOutcome::degenerate(df, n);
        }
        let nf = n as f64;
        let x_bar = groups.iter().map(|&g| (self.n[g] * g) as f64).sum::<f64>() / nf;
        let y_bar = self.grand_mean(&groups);
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for &g in &groups {
            let dx = g as f64 - x_bar;
            sxx += self.n[g] as f64 * dx * dx;
            sxy += self.n[g] as f64 * dx * (self.mean[g] - y_bar);
        }
        let (between, within) = self.anova_ss(&groups);
        let syy = between + within;
        // residual = pure error + lack of fit of the linear trend
        let lack_of_fit = (between - sxy * sxy / sxx).max(0.0);
        let rss = within + lack_of_fit;
        if !(syy > 0.0) || rss <= ZERO_SS * syy {
            return TestOutcome::degenerate(df, n);
        }
        let s2 = rss / (nf - 2.0);
        let t = sxy / (s2 * sxx).sqrt();
        match student_t_two_sided(t, nf - 2.0) {
            Ok(p) => TestOutcome::ok(t, p, df, n),
            Err(_) => TestOutcome::degenerate(df, n),
        }
    }

    pub fn anova(&self) -> TestOutcome {
        let n = self.total();
        let groups = self.present(1);
        let k = groups.len();
        let df = DegreesOfFreedom::pair(k.saturating_sub(1) as f64, n.saturating_sub(k) as f64);
        if k < 2 || n <= k {
            return TestOutcome::degenerate(df, n);
        }
        let (between, within) = self.anova_ss(&groups);
        let syy = between + within;
        if !(syy > 0.0) || within <= ZERO_SS * syy {
            return TestOutcome::degenerate(df, n);
        }
        let d1 = (k - 1) as f64;
        let d2 = (n - k) as f64;
        let f = (between / d1) / (within / d2);
        match f_sf(f, d1, d2) {
            Ok(p) => TestOutcome::ok(f, p, df, n),
            Err(_) => TestOutcome::degenerate(df, n),
        }
    }

    pub fn location(&self, test: LocationTest) -> TestOutcome {
        match test {
            LocationTest::Ols => self.ols(),
            LocationTest::Anova => self.anova(),
        }
    }

    /// Levene's W over groups with at least `min_count` samples.
    pub fn levene(&self, min_count: usize) -> TestOutcome {
        let groups = self.present(min_count);
        let k = groups.len();
        let n: usize = groups.iter().map(|&g| self.n[g]).sum();
        let df = DegreesOfFreedom::pair(k.saturating_sub(1) as f64, n.saturating_sub(k) as f64);
        if k < 2 || n <= k {
            return TestOutcome::degenerate(df, n);
        }
        let z_grand = groups.iter().map(|&g| self.z_sum[g]).sum::<f64>() / n as f64;
        let mut between = 0.0;
        let mut within = 0.0;
        let mut scale = 0.0;
        for &g in &groups {
            let ng = self.n[g] as f64;
            let z_bar = self.z_sum[g] / ng;
            between += ng * (z_bar - z_grand) * (z_bar - z_grand);
            within += (self.z_sq[g] - ng * z_bar * z_bar).max(0.0);
            scale += self.z_sq[g];
        }
        let d1 = (k - 1) as f64;
        let d2 = (n - k) as f64;
        if within <= ZERO_SS * scale {
            // Equal deviation profiles in every group carry no evidence of
            // heterogeneity; any between-group spread makes W unbounded.
            return if between <= ZERO_SS * scale {
                TestOutcome::ok(0.0, Probability::ONE, df, n)
            } else {
                TestOutcome::degenerate(df, n)
            };
        }
        let w = (d2 / d1) * between / within;
        match f_sf(w, d1, d2) {
            Ok(p) => TestOutcome::ok(w, p, df, n),
            Err(_) => TestOutcome::degenerate(df, n),
        }
    }

    /// Normal-likelihood ratio of group-specific means and variances
    /// against a common mean and variance, referenced to chi-square with
    /// `2(k - 1)` degrees of freedom.
    pub fn lrt(&self, min_count: usize) -> TestOutcome {
        let groups = self.present(min_count);
        let k = groups.len();
        let n: usize = groups.iter().map(|&g| self.n[g]).sum();
        let df = DegreesOfFreedom::single(2.0 * k.saturating_sub(1) as f64);
        if k < 2 {
            return TestOutcome::degenerate(df, n);
        }
        let (between, within) = self.anova_ss(&groups);
        let pooled = (between + within) / n as f64;
        if !(pooled > 0.0) {
            return TestOutcome::degenerate(df, n);
        }
        let mut stat = n as f64 * pooled.ln();
        for &g in &groups {
            let var_g = self.ss[g] / self.n[g] as f64;
            if var_g <= ZERO_SS * pooled {
                return TestOutcome::degenerate(df, n);
            }
            stat -= self.n[g] as f64 * var_g.ln();
        }
        let stat = stat.max(0.0);
        match chi2_sf(stat, df.numerator) {
            Ok(p) => TestOutcome::ok(stat, p, df, n),
            Err(_) => TestOutcome::degenerate(df, n),
        }
    }
}

fn group_medians(codes: &[u8], y: &[f64], scratch: &mut Scratch) -> [f64; 3] {
    for buf in scratch.groups.iter_mut() {
        buf.clear();
    }
    for (&g, &v) in codes.iter().zip(y) {
        scratch.groups[g as usize].push(v);
    }
    let mut out = [0.0; 3];
    for (g, buf) in scratch.groups.iter_mut().enumerate() {
        out[g] = median_in_place(buf);
    }
    out
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    let (lower, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

fn scan_of(geno: &GenotypeVector, pheno: &PhenotypeVector, center: LeveneCenter) -> Result<GroupScan> {
    check_aligned(geno, pheno)?;
    let (codes, y) = complete_cases(geno, pheno);
    Ok(GroupScan::new(&codes, &y, center, &mut Scratch::default()))
}

/// Two-sided t test of the additive regression slope, `N - 2` df.
pub fn ols_location_test(geno: &GenotypeVector, pheno: &PhenotypeVector) -> Result<TestOutcome> {
    Ok(scan_of(geno, pheno, LeveneCenter::Mean)?.ols())
}

/// Genotypic one-way ANOVA, `(k - 1, N - k)` df.
pub fn anova_location_test(geno: &GenotypeVector, pheno: &PhenotypeVector) -> Result<TestOutcome> {
    Ok(scan_of(geno, pheno, LeveneCenter::Mean)?.anova())
}

pub fn levene_scale_test(
    geno: &GenotypeVector,
    pheno: &PhenotypeVector,
    center: LeveneCenter,
    min_group_size: usize,
) -> Result<TestOutcome> {
    Ok(scan_of(geno, pheno, center)?.levene(min_group_size))
}

pub fn lrt_joint_test(
    geno: &GenotypeVector,
    pheno: &PhenotypeVector,
    min_group_size: usize,
) -> Result<TestOutcome> {
    Ok(scan_of(geno, pheno, LeveneCenter::Mean)?.lrt(min_group_size))
}
