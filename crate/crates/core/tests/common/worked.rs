//! Worked example constants, each paired with an oracle that does not go
//! through the library's numeric routines.

use super::{beta_integer, chi2_sf_even, hand, ln_gamma_stirling, phi_inv_bisect, t4_sf};
use jls::individual::{anova_location_test, levene_scale_test, ols_location_test};
use jls::numeric::{
    chi2_sf, f_sf, ln_gamma, normal_quantile, reg_incomplete_beta, reg_incomplete_gamma_upper, student_t_sf,
};
use jls::transform::{inverse_normal_transform, BLOM_OFFSET};
use jls::{fisher_combine, jls_single_variant, minp_combine, GenotypeVector, JlsConfig, LeveneCenter, PhenotypeVector, Probability};

pub struct Check {
    pub name: &'static str,
    pub computed: f64,
    pub oracle: f64,
    pub frozen: f64,
    pub tol: f64,
}

impl Check {
    pub fn passes(&self) -> bool {
        (self.computed - self.oracle).abs() <= self.tol && (self.oracle - self.frozen).abs() <= self.tol
    }
}

fn p(x: f64) -> Probability {
    Probability::new(x).unwrap()
}

fn grouped(groups: &[&[f64]]) -> (GenotypeVector, PhenotypeVector) {
    let mut codes = Vec::new();
    let mut y = Vec::new();
    for (g, vals) in groups.iter().enumerate() {
        for &v in vals.iter() {
            codes.push(g as u8);
            y.push(v);
        }
    }
    (
        GenotypeVector::from_codes("v", &codes).unwrap(),
        PhenotypeVector::from_values(&y).unwrap(),
    )
}

pub fn worked_example() -> (GenotypeVector, PhenotypeVector) {
    grouped(&[&[0.0, 1.0], &[1.0, 2.0], &[2.0, 3.0]])
}

pub fn checks() -> Vec<Check> {
    let mut out = Vec::new();
    let mut add = |name, computed, oracle, frozen, tol| {
        out.push(Check {
            name,
            computed,
            oracle,
            frozen,
            tol,
        })
    };

    add("ln_gamma(0.5)", ln_gamma(0.5).unwrap(), ln_gamma_stirling(0.5), 0.572364943, 1e-9);
    add("ln_gamma(5)", ln_gamma(5.0).unwrap(), 24f64.ln(), 3.178053830, 1e-9);
    add("Q(1,1)", reg_incomplete_gamma_upper(1.0, 1.0).unwrap().get(), (-1f64).exp(), 0.367879441, 1e-9);
    add("Q(2,2)", reg_incomplete_gamma_upper(2.0, 2.0).unwrap().get(), 3.0 * (-2f64).exp(), 0.406005850, 1e-9);
    add("I_0.1(1,2)", reg_incomplete_beta(1.0, 2.0, 0.1).unwrap().get(), beta_integer(1, 2, 0.1), 0.19, 1e-12);
    add("chi2_sf(11.98293,4)", chi2_sf(11.98293, 4.0).unwrap().get(), chi2_sf_even(11.98293, 4), 0.0174786546, 1e-9);
    add("chi2_sf(9.4877,4)", chi2_sf(9.4877, 4.0).unwrap().get(), chi2_sf_even(9.4877, 4), 0.0500006, 1e-6);
    add("t_sf(1,1)", student_t_sf(1.0, 1.0).unwrap().get(), 0.5 - 1f64.atan() / std::f64::consts::PI, 0.25, 1e-12);
    add("t_sf(3.2660,4)", student_t_sf(3.2660, 4.0).unwrap().get(), t4_sf(3.2660), 0.0154527, 1e-6);
    add("f_sf(0.8,1,4)", f_sf(0.8, 1.0, 4.0).unwrap().get(), 2.0 * t4_sf(0.8f64.sqrt()), 0.421648255, 1e-9);
    // I_x(a, 1) = x^a
    add("f_sf(4,2,3)", f_sf(4.0, 2.0, 3.0).unwrap().get(), (3.0f64 / 11.0).powf(1.5), 0.142427173, 1e-9);
    add("normal_quantile(0.975)", normal_quantile(0.975).unwrap(), phi_inv_bisect(0.975), 1.959963985, 1e-9);
    add(
        "normal_quantile(0.19231)",
        normal_quantile(0.19231).unwrap(),
        phi_inv_bisect(0.19231),
        -0.86942,
        1e-5,
    );

    let (g, y) = worked_example();
    let ols = ols_location_test(&g, &y).unwrap();
    let x = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
    let yy = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0];
    let t_hand = hand::ols_t(&x, &yy);
    add("ols t", ols.statistic, t_hand, 3.2660, 1e-4);
    add("ols p", ols.p.unwrap().get(), 2.0 * t4_sf(t_hand), 0.030905834747, 1e-9);
    let groups = vec![vec![0.0, 1.0], vec![1.0, 2.0], vec![2.0, 3.0]];
    let anova = anova_location_test(&g, &y).unwrap();
    add("anova F", anova.statistic, hand::anova_f(&groups), 4.0, 1e-12);
    add("anova p", anova.p.unwrap().get(), (3.0f64 / 11.0).powf(1.5), 0.142427173, 1e-9);

    let (lg, ly) = grouped(&[&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]]);
    let lev = levene_scale_test(&lg, &ly, LeveneCenter::Mean, 2).unwrap();
    add(
        "levene W",
        lev.statistic,
        hand::levene_w(&[vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 4.0]]),
        0.8,
        1e-12,
    );
    add("levene p", lev.p.unwrap().get(), 2.0 * t4_sf(0.8f64.sqrt()), 0.421648255, 1e-9);

    let w = -4.0 * 0.05f64.ln();
    let f = fisher_combine(p(0.05), p(0.05), 1e-300);
    add("fisher(0.05,0.05) W", f.w, w, 11.98293, 1e-5);
    add("fisher(0.05,0.05) p", f.p.get(), chi2_sf_even(w, 4), 0.0174786, 1e-7);
    let w = -2.0 * 0.01f64.ln() - 2.0 * 0.5f64.ln();
    let f = fisher_combine(p(0.01), p(0.5), 1e-300);
    add("fisher(0.01,0.5) W", f.w, w, 10.5966347, 1e-7);
    add("fisher(0.01,0.5) p", f.p.get(), chi2_sf_even(w, 4), 0.0314915868, 1e-9);
    let m = minp_combine(p(0.05), p(0.9));
    add("minp(0.05,0.9) p", m.p.get(), 1.0 - 0.95f64 * 0.95, 0.0975, 1e-12);

    // single-variant composition
    let r = jls_single_variant(&g, &y, &JlsConfig::default()).unwrap();
    let pl = 2.0 * t4_sf(t_hand);
    let wf = -2.0 * pl.ln();
    add("jls p_location", r.p_location().unwrap(), pl, 0.030905834747, 1e-9);
    add("jls p_scale", r.p_scale().unwrap(), 1.0, 1.0, 1e-12);
    add("jls w_fisher", r.w_fisher().unwrap(), wf, 6.953620572, 1e-8);
    add("jls p_fisher", r.p_fisher().unwrap(), chi2_sf_even(wf, 4), 0.138359559, 1e-9);
    add("jls w_minp", r.w_minp().unwrap(), pl, 0.030905834747, 1e-9);
    add("jls p_minp", r.p_minp().unwrap(), 2.0 * pl - pl * pl, 0.060856499, 1e-9);

    let z = inverse_normal_transform(&[Some(5.0), Some(1.0), Some(9.0)], BLOM_OFFSET).unwrap();
    let c = phi_inv_bisect(0.625 / 3.25);
    add("int low", z[1].unwrap(), c, -0.869423773, 1e-9);
    add("int mid", z[0].unwrap(), 0.0, 0.0, 1e-12);
    add("int high", z[2].unwrap(), -c, 0.869423773, 1e-9);

    out
}
