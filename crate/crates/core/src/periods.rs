//! Schottky period matrices, their truncation certificate, and annulus
//! extremal length.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::SchottkyGroupSpec;
use crate::measures::dimension_bracket;
use crate::moebius::{cross_ratio, loxodromic_data, ComplexPoint, LoxodromicData, MoebiusMap};
use crate::sum::{CompensatedSum, ComplexSum};
use crate::words::{double_coset_reps, map_initial_letters, Letter};

/// Cross ratios closer than this to the negative real axis are rejected.
pub const BRANCH_TOLERANCE: f64 = 1e-12;
/// Largest word length used by the convergence gate's dimension bracket.
pub const GATE_DEPTH: usize = 5;

/// Geometric-tail estimate for the derivative series at a probe point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCertificate {
    #[serde(rename = "N")]
    pub n: usize,
    pub derivative_sum_at_n: f64,
    pub derivative_sum_before: f64,
    pub geometric_ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodMatrix {
    pub genus: usize,
    pub entries: Vec<Vec<Complex64>>,
    pub truncation: usize,
    pub tail_bound: f64,
    pub certificate: Option<TailCertificate>,
    /// Upper dimension bound used by the gate (absent for genus 1).
    pub gate_upper: Option<f64>,
}

#[derive(Serialize)]
struct PeriodMatrixJson<'a> {
    genus: usize,
    #[serde(rename = "N")]
    n: usize,
    tail_bound: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: &'a Option<TailCertificate>,
}

impl PeriodMatrix {
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[m][n]
    }

    /// `max |P_mn - P_nm|`.
    pub fn symmetry_residual(&self) -> f64 {
        let g = self.genus;
        let mut worst: f64 = 0.0;
        for m in 0..g {
            for n in 0..m {
                worst = worst.max((self.entries[m][n] - self.entries[n][m]).norm());
            }
        }
        worst
    }

    /// `τ = i P / 2π`, whose imaginary part is `Re P / 2π`.
    pub fn riemann_matrix(&self) -> Vec<Vec<Complex64>> {
        let k = Complex64::new(0.0, 1.0 / (2.0 * PI));
        self.entries.iter().map(|row| row.iter().map(|z| z * k).collect()).collect()
    }

    /// Whether the symmetrized `Re P` (equivalently `Im τ`) is positive
    /// definite.
    pub fn real_part_positive_definite(&self) -> bool {
        let g = self.genus;
        let sym: Vec<Vec<f64>> =
            (0..g).map(|m| (0..g).map(|n| 0.5 * (self.entries[m][n].re + self.entries[n][m].re)).collect()).collect();
        is_positive_definite(&sym)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let re = self.entries.iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
        let im = self.entries.iter().map(|r| r.iter().map(|z| z.im).collect()).collect();
        serde_json::to_value(PeriodMatrixJson {
            genus: self.genus,
            n: self.truncation,
            tail_bound: self.tail_bound,
            re,
            im,
            certificate: &self.certificate,
        })
        .expect("period matrix serializes")
    }
}

/// Cholesky factorization with diagonal pivoting; false on the first
/// nonpositive pivot.
pub fn is_positive_definite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[perm[i]][perm[i]].total_cmp(&m[perm[j]][perm[j]])).expect("nonempty");
        perm.swap(k, p);
        let pk = perm[k];
        let pivot = m[pk][pk];
        if !(pivot > 0.0) {
            return false;
        }
        let l = pivot.sqrt();
        for &pi in &perm[k + 1..] {
            m[pi][pk] /= l;
        }
        for i in k + 1..n {
            for j in k + 1..=i {
                let (pi, pj) = (perm[i], perm[j]);
                let v = m[pi][pk] * m[pj][pk];
                m[pi][pj] -= v;
                if i != j {
                    m[pj][pi] -= v;
                }
            }
        }
    }
    true
}

fn principal_log(z: ComplexPoint, row: usize, col: usize, word: &str) -> Result<Complex64> {
    let z = match z {
        ComplexPoint::Finite(z) if z.norm() > 0.0 => z,
        _ => return Err(Error::DegenerateCrossRatio),
    };
    if z.re < 0.0 && z.im.abs() <= BRANCH_TOLERANCE * z.norm() {
        return Err(Error::BranchAmbiguity { row, col, word: word.to_string() });
    }
    Ok(z.ln())
}

fn check_gate(spec: &SchottkyGroupSpec, n: usize) -> Result<Option<f64>> {
    if spec.genus() == 1 {
        return Ok(None);
    }
    if !spec.classical_verified() {
        return Err(Error::ConvergenceGateFailed("no verified classical circles to bound the dimension".into()));
    }
    let bracket = dimension_bracket(spec, n.clamp(1, GATE_DEPTH))?;
    if bracket.upper < 1.0 {
        Ok(Some(bracket.upper))
    } else {
        Err(Error::ConvergenceGateFailed(format!("dimension upper bound {} is not below 1", bracket.upper)))
    }
}

/// One entry `P_mn` (0-based `m`, `n`) from double-coset words of length
/// at most `max_len`, accumulated shortest word first.
fn period_entry(spec: &SchottkyGroupSpec, data: &[LoxodromicData], m: usize, n: usize, max_len: usize) -> Result<Complex64> {
    let mut acc = ComplexSum::default();
    if m == n {
        acc.add(principal_log(ComplexPoint::Finite(data[n].multiplier), m, n, "")?);
    }
    for w in double_coset_reps(spec.genus(), n + 1, m + 1, max_len) {
        let map = spec.evaluate(&w)?;
        let cr = cross_ratio(
            data[n].fixed_minus,
            data[n].fixed_plus,
            map.apply(data[m].fixed_plus),
            map.apply(data[m].fixed_minus),
        )?;
        acc.add(principal_log(cr, m, n, &w.to_string())?);
    }
    Ok(acc.value())
}

/// Period matrix from the double-coset cross-ratio series truncated at
/// word length `n`. For genus at least 2 the spec must be classical with a
/// dimension bracket certifying exponent below 1.
pub fn period_matrix(spec: &SchottkyGroupSpec, n: usize) -> Result<PeriodMatrix> {
    let gate_upper = check_gate(spec, n)?;
    let data = spec.loxodromic_data()?;
    let g = spec.genus();
    let entries: Vec<Complex64> = (0..g * g)
        .into_par_iter()
        .map(|k| period_entry(spec, &data, k / g, k % g, n))
        .collect::<Result<_>>()?;
    let entries = entries.chunks(g).map(|r| r.to_vec()).collect();
    let certificate = if g == 1 { None } else { Some(tail_certificate(spec, default_probe(spec)?, n.max(2))?) };
    let tail_bound = certificate.map_or(0.0, |c| c.bound);
    Ok(PeriodMatrix { genus: g, entries, truncation: n, tail_bound, certificate, gate_upper })
}

/// The point of the first source circle nearest the origin (its rightmost
/// point when the circle is centred at 0).
pub fn default_probe(spec: &SchottkyGroupSpec) -> Result<ComplexPoint> {
    let p = spec.require_classical()?[0].source;
    let c = p.center;
    let z = if c.norm() == 0.0 { c + p.radius } else { c - c * (p.radius / c.norm()) };
    Ok(ComplexPoint::Finite(z))
}

/// `max_n Σ |w'(z)|` over words of length `k` whose first letter is not
/// `γ_n^{±1}`.
fn derivative_sum(spec: &SchottkyGroupSpec, z: Complex64, k: usize) -> f64 {
    let g = spec.genus();
    let per_letter: Vec<f64> = map_initial_letters(g, |first| {
        let mut s = CompensatedSum::new();
        spec.walk_from(k, first, &mut |w: &[Letter], m: &MoebiusMap| {
            if w.len() == k {
                s.add(m.derivative_modulus(z));
            }
        });
        s.value()
    });
    (1..=g)
        .map(|n| {
            per_letter
                .iter()
                .enumerate()
                .filter(|(ord, _)| Letter::from_ordinal(*ord).index() != n)
                .map(|(_, v)| *v)
                .collect::<CompensatedSum>()
                .value()
        })
        .fold(0.0, f64::max)
}

/// Estimates the decay of `Σ |w'(z_probe)|` from lengths `N - 1` to `N`
/// and returns the geometric-tail bound `S_N r / (1 - r)`.
pub fn tail_certificate(spec: &SchottkyGroupSpec, z_probe: ComplexPoint, n: usize) -> Result<TailCertificate> {
    spec.require_classical()?;
    if n < 2 {
        return Err(Error::InvalidArgument("tail certificate needs N >= 2".into()));
    }
    let z = z_probe.finite().ok_or_else(|| Error::InvalidPoint("probe must be finite".into()))?;
    if spec.genus() == 1 {
        return Ok(TailCertificate { n, derivative_sum_at_n: 0.0, derivative_sum_before: 0.0, geometric_ratio: 0.0, bound: 0.0 });
    }
    let before = derivative_sum(spec, z, n - 1);
    let at = derivative_sum(spec, z, n);
    let ratio = at / before;
    if !(ratio < 1.0) {
        return Err(Error::NoContraction { ratio });
    }
    Ok(TailCertificate { n, derivative_sum_at_n: at, derivative_sum_before: before, geometric_ratio: ratio, bound: at * ratio / (1.0 - ratio) })
}

/// `(1 / 2π) ln(r2 / r1)`.
pub fn annulus_extremal_length(r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(Error::BadRadii { r1, r2 });
    }
    Ok((r2 / r1).ln() / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusIdentity {
    pub r1: f64,
    pub r2: f64,
    /// Translation length of `z -> (r2 / r1) z`.
    pub translation_length: f64,
    pub two_pi_extremal_length: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckResult {
    pub t: f64,
    pub q: f64,
    pub threshold: f64,
    pub slack: f64,
    pub pass: bool,
    pub identity: Option<AnnulusIdentity>,
}

/// Compares the translation length of the annulus generator with
/// `2π` times the annulus extremal length.
pub fn annulus_identity(r1: f64, r2: f64) -> Result<AnnulusIdentity> {
    let e = annulus_extremal_length(r1, r2)?;
    let m = MoebiusMap::dilation(Complex64::new(r2 / r1, 0.0))?;
    let t = loxodromic_data(&m)?.translation_length;
    let two_pi_e = 2.0 * PI * e;
    Ok(AnnulusIdentity { r1, r2, translation_length: t, two_pi_extremal_length: two_pi_e, residual: (t - two_pi_e).abs() })
}

/// Checks `T >= (π/2) Q`; failures are reported, not raised. With radii,
/// also evaluates the annulus identity.
pub fn length_q_inequality(t: f64, q: f64, radii: Option<(f64, f64)>) -> Result<CheckResult> {
    if !(t >= 0.0 && q >= 0.0 && t.is_finite() && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("T = {t} and Q = {q} must be finite and nonnegative")));
    }
    let threshold = 0.5 * PI * q;
    let identity = radii.map(|(r1, r2)| annulus_identity(r1, r2)).transpose()?;
    Ok(CheckResult { t, q, threshold, slack: t - threshold, pass: t >= threshold, identity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{build_from_circles, build_from_coordinates, symmetric_spec};
    use crate::moebius::Circle;

    #[test]
    fn genus_one_period() {
        let spec = build_from_coordinates(&[Complex64::new(9.0, 0.0)], &[(ComplexPoint::real(-1.0), ComplexPoint::real(1.0))]).unwrap();
        let p = period_matrix(&spec, 6).unwrap();
        assert!((p.get(0, 0) - Complex64::new(9f64.ln(), 0.0)).norm() < 1e-12);
        assert_eq!(p.tail_bound, 0.0);
        assert!(p.real_part_positive_definite());
    }

    fn circle(re: f64, im: f64, r: f64) -> Circle {
        Circle::new(Complex64::new(re, im), r).unwrap()
    }

    #[test]
    fn crossing_axes_hit_the_branch_cut() {
        // fixed points on one circle, interleaved: the identity term is -1
        let spec = symmetric_spec(2, 20.0, 1.0).unwrap();
        assert!(matches!(period_matrix(&spec, 3), Err(Error::BranchAmbiguity { row: 0, col: 1, .. })));
    }

    #[test]
    fn genus_two_far_separated() {
        let spec = build_from_circles(&[(circle(-20.0, 0.0, 1.0), circle(20.0, 0.0, 1.0)), (circle(0.0, -12.0, 1.0), circle(0.0, 12.0, 1.0))]).unwrap();
        let p = period_matrix(&spec, 5).unwrap();
        assert!(p.symmetry_residual() <= 2.0 * p.tail_bound + 1e-8);
        assert!(p.real_part_positive_definite());
        assert!(p.tail_bound < 1e-3);
        let v = p.to_json();
        assert_eq!(v["N"], 5);
        assert_eq!(v["re"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn gate_rejects_unverified_groups() {
        let spec = build_from_coordinates(
            &[Complex64::new(9.0, 0.0), Complex64::new(9.0, 0.0)],
            &[(ComplexPoint::real(-1.0), ComplexPoint::real(1.0)), (ComplexPoint::new(0.0, -1.0).unwrap(), ComplexPoint::new(0.0, 1.0).unwrap())],
        )
        .unwrap();
        assert!(matches!(period_matrix(&spec, 3), Err(Error::ConvergenceGateFailed(_))));
    }

    #[test]
    fn positive_definite_checks() {
        assert!(is_positive_definite(&[vec![2.0, 1.0], vec![1.0, 2.0]]));
        assert!(!is_positive_definite(&[vec![1.0, 2.0], vec![2.0, 1.0]]));
        assert!(!is_positive_definite(&[vec![0.0]]));
        assert!(is_positive_definite(&[vec![1.0, 0.0, 0.0], vec![0.0, 5.0, 0.0], vec![0.0, 0.0, 0.1]]));
    }

    #[test]
    fn tail_certificate_examples() {
        let g1 = build_from_circles(&[(Circle::new(Complex64::new(-3.0, 0.0), 1.0).unwrap(), Circle::new(Complex64::new(3.0, 0.0), 1.0).unwrap())]).unwrap();
        assert_eq!(tail_certificate(&g1, default_probe(&g1).unwrap(), 4).unwrap().bound, 0.0);

        let far = symmetric_spec(2, 50.0, 1.0).unwrap();
        let z = default_probe(&far).unwrap();
        let c4 = tail_certificate(&far, z, 4).unwrap();
        let c5 = tail_certificate(&far, z, 5).unwrap();
        assert!(c4.geometric_ratio < 0.1);
        assert!(c5.bound * 10.0 <= c4.bound);

        // circles nearly tangent: gap 1e-3 between neighbouring disks
        let d = (1.0 + 5e-4) * std::f64::consts::SQRT_2;
        let near = symmetric_spec(2, d, 1.0).unwrap();
        let err = tail_certificate(&near, default_probe(&near).unwrap(), 2).unwrap_err();
        assert!(matches!(err, Error::NoContraction { .. }));
    }

    #[test]
    fn annulus_examples() {
        assert!((annulus_extremal_length(1.0, (2.0 * PI).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!((annulus_extremal_length(1.0, 4.0).unwrap() - 0.2206356001526516).abs() < 1e-15);
        assert_eq!(annulus_extremal_length(2.0, 8.0).unwrap(), annulus_extremal_length(1.0, 4.0).unwrap());
        assert!(matches!(annulus_extremal_length(2.0, 1.0), Err(Error::BadRadii { .. })));
        assert!(matches!(annulus_extremal_length(0.0, 1.0), Err(Error::BadRadii { .. })));
    }

    #[test]
    fn length_q_examples() {
        let r = length_q_inequality(4f64.ln(), 0.0, Some((1.0, 4.0))).unwrap();
        assert!(r.identity.unwrap().residual < 1e-12);
        let r = length_q_inequality(10.0, 1.0, None).unwrap();
        assert!(r.pass && (r.slack - (10.0 - PI / 2.0)).abs() < 1e-15);
        let r = length_q_inequality(1.0, 1.0, None).unwrap();
        assert!(!r.pass);
    }
}
