//! Reference implementations used only by the integration tests. The
//! oracles here never call the library's numeric code; `worked` pairs
//! them with library results.
#![allow(dead_code)]

pub mod worked;

use std::f64::consts::PI;

/// erf by its Maclaurin series, summed until terms vanish. Accurate for
/// |x| up to about 6.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x2 / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
        if n > 500.0 {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

pub fn phi_series(z: f64) -> f64 {
    0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2))
}

/// Φ⁻¹ by bisection on the series CDF.
pub fn phi_inv_bisect(p: f64) -> f64 {
    let (mut lo, mut hi) = (-8.0_f64, 8.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_series(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// lnΓ from the Stirling series after shifting the argument above 20.
pub fn ln_gamma_stirling(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 20.0 {
        shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// I_x(a, b) for integer a, b as a binomial tail: P(Bin(a + b - 1, x) >= a).
pub fn beta_integer(a: u32, b: u32, x: f64) -> f64 {
    let n = a + b - 1;
    let mut total = 0.0;
    for j in a..=n {
        total += binom(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32);
    }
    total
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Chi-square survival with even df as a Poisson sum.
pub fn chi2_sf_even(x: f64, df: u32) -> f64 {
    assert!(df % 2 == 0);
    let h = x / 2.0;
    let mut term = (-h).exp();
    let mut sum = term;
    for k in 1..df / 2 {
        term *= h / k as f64;
        sum += term;
    }
    sum
}

/// Student t upper tail for df = 4 from the closed-form antiderivative.
pub fn t4_sf(t: f64) -> f64 {
    let u = t / (t * t + 4.0).sqrt();
    0.5 - 0.75 * (u - u * u * u / 3.0)
}

/// Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic KS p-value with the Stephens small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
    }
    p.clamp(0.0, 1.0)
}

/// Textbook statistics computed directly from group lists.
pub mod hand {
    pub fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Slope t statistic of y on x.
    pub fn ols_t(x: &[f64], y: &[f64]) -> f64 {
        let (mx, my) = (mean(x), mean(y));
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let b1 = sxy / sxx;
        let b0 = my - b1 * mx;
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - b0 - b1 * a).powi(2)).sum();
        let s2 = rss / (x.len() as f64 - 2.0);
        b1 / (s2 / sxx).sqrt()
    }

    /// One-way ANOVA F over groups.
    pub fn anova_f(groups: &[Vec<f64>]) -> f64 {
        let all: Vec<f64> = groups.iter().flatten().copied().collect();
        let grand = mean(&all);
        let k = groups.len() as f64;
        let n = all.len() as f64;
        let between: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
        let within: f64 = groups
            .iter()
            .map(|g| {
                let m = mean(g);
                g.iter().map(|v| (v - m).powi(2)).sum::<f64>()
            })
            .sum();
        (between / (k - 1.0)) / (within / (n - k))
    }

    /// Levene W with mean centering.
    pub fn levene_w(groups: &[Vec<f64>]) -> f64 {
        let z: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| {
                let m = mean(g);
                g.iter().map(|v| (v - m).abs()).collect()
            })
            .collect();
        anova_f(&z)
    }

    /// 2 (l_alt - l_null) for group-specific normal means and variances.
    pub fn lrt(groups: &[Vec<f64>]) -> f64 {
        let mle_var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let all: Vec<f64> = groups.iter().flatten().copied().collect();
        let n = all.len() as f64;
        n * mle_var(&all).ln() - groups.iter().map(|g| g.len() as f64 * mle_var(g).ln()).sum::<f64>()
    }
}
