//! Right-angled hexagon trigonometry, the rational norm `Q`, and the numeric
//! checks behind the pants-decomposition length estimates.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Length `e` with `sinh(e) sinh(b/2) = cosh(a)`.
pub fn hexagon_e(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::BadSides { a, b });
    }
    Ok((a.cosh() / (0.5 * b).sinh()).asinh())
}

/// The companion bound `a + asinh(k / b)`. The estimate is stated with both
/// `k = 3` and `k = 1`, so the constant is a parameter.
pub fn hexagon_e_upper(a: f64, b: f64, k: f64) -> Result<f64> {
    if !(a >= 0.0 && b > 0.0) {
        return Err(Error::BadSides { a, b });
    }
    Ok(a + (k / b).asinh())
}

/// `d = acosh(cosh a (1 + cosh b) / (sinh a sinh b))`, evaluated as
/// `acosh(coth a · coth(b/2))` so large sides do not overflow.
pub fn hexagon_d(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::BadSides { a, b });
    }
    let arg = (1.0 / a.tanh()) * (1.0 / (0.5 * b).tanh());
    if !(arg >= 1.0) {
        return Err(Error::DomainError(arg));
    }
    Ok(arg.acosh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValue {
    pub alpha_length: f64,
    pub beta_length: f64,
    pub q: f64,
}

/// `Q = (β / α)²` for a marking geodesic of length `α` and dual length `β`.
pub fn q_norm(alpha_length: f64, beta_length: f64) -> Result<QValue> {
    if !(alpha_length > 0.0 && beta_length > 0.0 && alpha_length.is_finite() && beta_length.is_finite()) {
        return Err(Error::BadLengths { alpha: alpha_length, beta: beta_length });
    }
    let r = beta_length / alpha_length;
    Ok(QValue { alpha_length, beta_length, q: r * r })
}

/// One row of the suite: check ids are `"i"`, `"ii"`, `"iii"`, `"iv"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub g: usize,
    pub check_id: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub g_min: usize,
    pub g_max: usize,
    pub kappa_grid: Vec<f64>,
    pub a_grid: Vec<f64>,
    pub rows: Vec<SuiteRow>,
    /// `lhs / rhs` of check (i) per genus.
    pub empirical_lambda: Vec<(usize, f64)>,
}

impl SuiteReport {
    pub fn rows_for(&self, check_id: &str) -> impl Iterator<Item = &SuiteRow> + '_ {
        let id = check_id.to_string();
        self.rows.iter().filter(move |r| r.check_id == id)
    }

    pub fn row(&self, g: usize, check_id: &str) -> Option<&SuiteRow> {
        self.rows.iter().find(|r| r.g == g && r.check_id == check_id)
    }
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()).collect()
}

pub const KAPPA_MIN: f64 = 1.0;
pub const KAPPA_MAX: f64 = 100.0;
pub const KAPPA_POINTS: usize = 20;
/// Ratio of the hexagon side `a` to `(2g)^{-1/3}` in check (iii).
pub const RHO: f64 = 0.6;

/// `min_a a / (a + asinh(a / (κ L)))` over the grid, i.e. the ratio along
/// the constraint `a b = κ L`.
fn f_kappa(kappa: f64, l: f64, a_grid: &[f64]) -> f64 {
    a_grid.iter().map(|&a| a / (a + (a / (kappa * l)).asinh())).fold(f64::INFINITY, f64::min)
}

fn row(g: usize, check_id: &'static str, lhs: f64, rhs: f64, pass: bool) -> SuiteRow {
    SuiteRow { g, check_id, lhs, rhs, margin: lhs - rhs, pass }
}

/// Evaluates checks (i) to (iv) for every `g` in `g_min..=g_max`.
///
/// * (i) `Σ_{k=1}^{g} ln(2k)^{8/5} > (2/π) g ln(2g)`
/// * (ii) `f(κ)` nondecreasing over the κ grid and, for `g ≥ 3`,
///   `max_κ (f(κ)(g-1))² > (2/π) g ln(2g)`
/// * (iii) with `a = ρ/(2g)^{1/3}` and `b = κ ln(2g)/a`,
///   `min_κ d(a, b) > (17/10) ln(2g)`
/// * (iv) `π (2g-2)² / (2g ln(2g)^{14/5}) > 1`
pub fn inequality_suite(g_min: usize, g_max: usize) -> Result<SuiteReport> {
    if g_min < 2 || g_max < g_min {
        return Err(Error::InvalidArgument(format!("need 2 <= g_min <= g_max, got {g_min}..{g_max}")));
    }
    let kappa_grid = log_grid(KAPPA_MIN, KAPPA_MAX, KAPPA_POINTS);
    let a_grid = log_grid(1e-6, 1e3, 91);
    let mut prefix = CompensatedSum::new();
    for k in 1..g_min {
        prefix.add((2.0 * k as f64).ln().powf(1.6));
    }
    let mut rows = Vec::with_capacity(4 * (g_max - g_min + 1));
    let mut empirical_lambda = Vec::new();
    for g in g_min..=g_max {
        let gf = g as f64;
        let l = (2.0 * gf).ln();
        prefix.add(l.powf(1.6));
        let target = 2.0 / PI * gf * l;

        let lhs_i = prefix.value();
        rows.push(row(g, "i", lhs_i, target, lhs_i > target));
        empirical_lambda.push((g, lhs_i / target));

        let f: Vec<f64> = kappa_grid.iter().map(|&k| f_kappa(k, l, &a_grid)).collect();
        let monotone = f.windows(2).all(|w| w[1] >= w[0]);
        let best = f.iter().map(|v| (v * (gf - 1.0)).powi(2)).fold(0.0, f64::max);
        rows.push(row(g, "ii", best, target, monotone && (g < 3 || best > target)));

        let a = RHO / (2.0 * gf).cbrt();
        let d_min = kappa_grid
            .iter()
            .map(|&k| hexagon_d(a, k * l / a))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let rhs_iii = 1.7 * l;
        rows.push(row(g, "iii", d_min, rhs_iii, d_min > rhs_iii));

        let lhs_iv = PI * (2.0 * gf - 2.0).powi(2) / (2.0 * gf * l.powf(2.8));
        rows.push(row(g, "iv", lhs_iv, 1.0, lhs_iv > 1.0));
    }
    Ok(SuiteReport { g_min, g_max, kappa_grid, a_grid, rows, empirical_lambda })
}
