//! Cross-checks the double-coset period series against a direct sum of the
//! abelian differentials: integrate `ω_n` along the path from `z0` to
//! `γ_m z0`, summing over all words not ending in a power of `γ_n`.

use std::f64::consts::PI;

use schottky::groups::{build_from_circles, build_from_circles_with_rotation};
use schottky::periods::{default_probe, period_matrix};
use schottky::words::words_up_to;
use schottky::{Circle, Complex64, ComplexPoint, SchottkyGroupSpec};

fn circle(re: f64, im: f64, r: f64) -> Circle {
    Circle::new(Complex64::new(re, im), r).unwrap()
}

fn finite(p: ComplexPoint) -> Complex64 {
    p.finite().expect("finite point")
}

fn direct_sum(spec: &SchottkyGroupSpec, m: usize, n: usize, max_len: usize) -> Complex64 {
    let data = spec.loxodromic_data().unwrap();
    let z0 = finite(default_probe(spec).unwrap());
    let a = finite(spec.generators()[m].apply(ComplexPoint::Finite(z0)));
    let mut q = Complex64::new(0.0, 0.0);
    for w in words_up_to(spec.genus(), max_len) {
        if w.last().is_some_and(|l| l.index() == n + 1) {
            continue;
        }
        let h = spec.evaluate(&w).unwrap();
        let zm = finite(h.apply(data[n].fixed_minus));
        let zp = finite(h.apply(data[n].fixed_plus));
        q += (((a - zm) * (z0 - zp)) / ((a - zp) * (z0 - zm))).ln();
    }
    q
}

fn check(spec: &SchottkyGroupSpec) {
    let p = period_matrix(spec, 6).unwrap();
    for m in 0..spec.genus() {
        for n in 0..spec.genus() {
            let q = direct_sum(spec, m, n, 7);
            let d = p.get(m, n) - q;
            assert!(d.re.abs() < 1e-8, "entry {m}{n}: {} vs {}", p.get(m, n), q);
            // each logarithm is only defined modulo 2πi
            let wrapped = d.im - 2.0 * PI * (d.im / (2.0 * PI)).round();
            assert!(wrapped.abs() < 1e-8, "entry {m}{n}: {} vs {}", p.get(m, n), q);
        }
    }
}

#[test]
fn genus_two() {
    check(&build_from_circles(&[(circle(-10.0, 0.0, 1.0), circle(10.0, 0.0, 1.0)), (circle(0.0, -7.0, 1.0), circle(0.0, 7.0, 1.0))]).unwrap());
}

#[test]
fn genus_three_rotated() {
    check(
        &build_from_circles_with_rotation(
            &[
                (circle(-12.0, 1.0, 1.0), circle(11.0, -2.0, 0.8)),
                (circle(3.0, -10.0, 1.2), circle(-2.0, 9.0, 1.0)),
                (circle(-7.0, -7.0, 0.7), circle(8.0, 6.0, 1.0)),
            ],
            &[0.0, 0.4, -0.3],
        )
        .unwrap(),
    );
}
