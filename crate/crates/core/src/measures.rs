//! Truncated Poincaré series, dimension brackets, discrete sector measures
//! and the mean norm of a group.
//!
//! All sums over words are split by initial letter, computed in parallel
//! with compensated summation, and combined in alphabet order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::SchottkyGroupSpec;
use crate::moebius::{loxodromic_data, Circle, ComplexPoint, H3Point, MoebiusMap, PoissonKernel};
use crate::sum::CompensatedSum;
use crate::words::{enumerate_bases, map_initial_letters, Basis, Letter, Word};

/// Bisection stops once the bracketing interval is shorter than this.
pub const EXPONENT_TOLERANCE: f64 = 1e-12;
/// Termination step of the basepoint coordinate descent.
pub const DESCENT_TOLERANCE: f64 = 1e-6;

/// Root of `Σ_{|w|=N} exp(-s d(x, wx)) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureEstimate {
    pub word_length: usize,
    pub exponent: f64,
    /// The length-`N` sum at `exponent`.
    pub sum_value: f64,
}

/// Rigorous lower and upper bounds for the dimension of the limit set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionBracket {
    pub lower: f64,
    pub upper: f64,
    pub word_length: usize,
    /// Word length at which the upper bound was attained.
    pub upper_length: usize,
    pub basepoint: H3Point,
    /// The orbit exponent `s_N` at `basepoint`, for comparison.
    pub orbit_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub point: ComplexPoint,
    pub weight: f64,
    pub word: Word,
}

/// The atoms of one sector: orbit points `wx`, `w` starting with `letter`,
/// pushed to the sphere along the geodesic ray from `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorMeasureApprox {
    pub letter: Letter,
    pub atoms: Vec<Atom>,
    pub s: f64,
    pub word_length: usize,
    pub mass: f64,
}

/// All `2g` sectors, normalized to total mass 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorMeasures {
    pub s: f64,
    pub word_length: usize,
    pub basepoint: H3Point,
    /// Total unnormalized weight.
    pub normalizer: f64,
    pub sectors: Vec<SectorMeasureApprox>,
}

impl SectorMeasures {
    pub fn sector(&self, l: Letter) -> &SectorMeasureApprox {
        &self.sectors[l.ordinal()]
    }

    pub fn mass(&self, l: Letter) -> f64 {
        self.sector(l).mass
    }

    pub fn total_mass(&self) -> f64 {
        self.sectors.iter().map(|s| s.mass).collect::<CompensatedSum>().value()
    }

    /// Rows `(re, im, weight, word)`; points at infinity give infinite
    /// coordinates.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, String)> + '_ {
        self.sectors.iter().flat_map(|s| {
            s.atoms.iter().map(|a| {
                let (re, im) = match a.point {
                    ComplexPoint::Finite(z) => (z.re, z.im),
                    ComplexPoint::Infinity => (f64::INFINITY, f64::INFINITY),
                };
                (re, im, a.weight, a.word.to_string())
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorResidual {
    pub letter: Letter,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Contribution of the atom `w = γ⁻¹`, which `γ` sends to the basepoint
    /// and which is therefore left out of `lhs`.
    pub excluded_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub genus: usize,
    pub s: f64,
    pub word_length: usize,
    pub generators: Vec<GeneratorResidual>,
    /// `Σ_γ mass(ρ_{γ⁻¹})` over the standard generators.
    pub c_omega: f64,
    pub aggregate_lhs: f64,
    pub aggregate_rhs: f64,
    pub aggregate_residual: f64,
    pub max_generator_residual: f64,
    pub total_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub basepoint: H3Point,
    pub basis: Basis,
    pub mean_displacement: f64,
    pub bases_searched: usize,
    pub nielsen_depth: usize,
    /// Best value over the candidate basepoints before refinement.
    pub unrefined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub value: f64,
    /// Hypotheses hold and the bound is not vacuous.
    pub applicable: bool,
    pub vacuous: bool,
    pub heuristic: bool,
    /// `bracket.lower <= value`.
    pub consistent: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub genus: usize,
    pub translation_lengths: Vec<f64>,
    /// `ratios[j][i] = T_j / T_i`.
    pub length_ratios: Vec<Vec<f64>>,
    pub lambda: f64,
    pub norm: NormEstimate,
    pub s: f64,
    /// `mass(ρ_{γ_i⁻¹})` at the norm basepoint.
    pub inverse_sector_masses: Vec<f64>,
    pub sigma_minus: f64,
    pub bracket: DimensionBracket,
    pub bounds: Vec<BoundEntry>,
}

impl BoundsReport {
    pub fn all_consistent(&self) -> bool {
        self.bounds.iter().filter(|b| b.applicable).all(|b| b.consistent)
    }
}

/// `d(x, wx)` for all words of length exactly `n`, in alphabet order.
pub fn orbit_distances(spec: &SchottkyGroupSpec, x: &H3Point, n: usize) -> Vec<f64> {
    map_initial_letters(spec.genus(), |first| {
        let mut out = Vec::new();
        spec.walk_from(n, first, &mut |w: &[Letter], m: &MoebiusMap| {
            if w.len() == n {
                out.push(x.distance(&m.act_h3(x)));
            }
        });
        out
    })
    .concat()
}

fn log_sum_exp(s: f64, distances: &[f64]) -> f64 {
    let dmin = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: CompensatedSum = distances.iter().map(|d| (-s * (d - dmin)).exp()).collect();
    -s * dmin + sum.value().ln()
}

/// Bisection for the root of a decreasing function on `[lo, hi]`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= EXPONENT_TOLERANCE * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The unique `s_N ≥ 0` with `Σ_{|w|=N} exp(-s_N d(x, wx)) = 1`.
pub fn pressure_exponent(spec: &SchottkyGroupSpec, x: &H3Point, n: usize) -> Result<PressureEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let d = orbit_distances(spec, x, n);
    let f = |s: f64| log_sum_exp(s, &d);
    if f(0.0) <= 0.0 {
        return Ok(PressureEstimate { word_length: n, exponent: 0.0, sum_value: f(0.0).exp() });
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let s = bisect_decreasing(f, 0.0, hi);
    Ok(PressureEstimate { word_length: n, exponent: s, sum_value: f(s).exp() })
}

/// `ln sup` and `ln inf` of `|u'|` over a disk that `u` maps into a bounded
/// disk.
fn log_derivative_range(u: &MoebiusMap, disk: &Circle) -> (f64, f64) {
    let c = u.c();
    if c.norm() == 0.0 {
        let v = -2.0 * u.d().norm().ln();
        return (v, v);
    }
    let dist = (disk.center + u.d() / c).norm();
    let lc = c.norm().ln();
    let sup = -2.0 * (lc + (dist - disk.radius).ln());
    let inf = -2.0 * (lc + (dist + disk.radius).ln());
    (sup, inf)
}

/// Nonnegative square matrix, row-major.
type Matrix = Vec<Vec<f64>>;

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn max_norm(a: &Matrix) -> f64 {
    a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max)
}

/// `ln ρ(A)` for a nonnegative matrix, from `‖A^{2^k}‖^{2^{-k}}`.
pub(crate) fn log_spectral_radius(a: &Matrix) -> f64 {
    let n0 = max_norm(a);
    if n0 == 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut m: Matrix = a.iter().map(|r| r.iter().map(|v| v / n0).collect()).collect();
    let mut log_scale = n0.ln();
    let mut weight = 1.0;
    let mut estimate = log_scale;
    for _ in 0..48 {
        m = mat_mul(&m, &m);
        let nm = max_norm(&m);
        if nm == 0.0 {
            return f64::NEG_INFINITY;
        }
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v /= nm;
            }
        }
        log_scale = 2.0 * log_scale + nm.ln();
        weight *= 2.0;
        estimate = log_scale / weight;
    }
    estimate
}

/// Log-derivative bounds for every (first letter, target disk) block at one
/// word length.
struct TransferData {
    alphabet: usize,
    /// `blocks[b][c]` holds `(ln sup, ln inf)` pairs.
    blocks: Vec<Vec<Vec<(f64, f64)>>>,
    max_log: f64,
}

impl TransferData {
    fn collect(spec: &SchottkyGroupSpec, disks: &[Circle], n: usize) -> Self {
        let alphabet = 2 * spec.genus();
        let blocks: Vec<Vec<Vec<(f64, f64)>>> = map_initial_letters(spec.genus(), |first| {
            let mut row = vec![Vec::new(); alphabet];
            spec.walk_from(n, first, &mut |w: &[Letter], u: &MoebiusMap| {
                if w.len() != n {
                    return;
                }
                let back = w[n - 1].inv().ordinal();
                for (c, disk) in disks.iter().enumerate() {
                    if c != back {
                        row[c].push(log_derivative_range(u, disk));
                    }
                }
            });
            row
        });
        let max_log = blocks.iter().flatten().flatten().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        Self { alphabet, blocks, max_log }
    }

    /// `ln ρ` of the transfer matrix at exponent `s`, using sup (`upper`)
    /// or inf derivative bounds.
    fn log_radius(&self, s: f64, upper: bool) -> f64 {
        let shift = s * self.max_log;
        let m: Matrix = (0..self.alphabet)
            .map(|b| {
                (0..self.alphabet)
                    .map(|c| {
                        self.blocks[b][c]
                            .iter()
                            .map(|&(sup, inf)| (s * (if upper { sup } else { inf }) - shift).exp())
                            .collect::<CompensatedSum>()
                            .value()
                    })
                    .collect()
            })
            .collect();
        shift + log_spectral_radius(&m)
    }

    fn root(&self, upper: bool) -> f64 {
        let f = |s: f64| self.log_radius(s, upper);
        if f(0.0) <= 1e-12 {
            return 0.0;
        }
        if f(2.0) >= 0.0 {
            return 2.0;
        }
        bisect_decreasing(f, 0.0, 2.0)
    }
}

fn letter_disks(spec: &SchottkyGroupSpec) -> Result<Vec<Circle>> {
    spec.require_classical()?;
    Ok((0..2 * spec.genus()).map(|k| spec.letter_disk(Letter::from_ordinal(k)).expect("classical spec has disks")).collect())
}

/// Bounds the dimension of the limit set by transfer matrices built from
/// sup and inf derivative bounds on the pairing disks, over word lengths
/// `1..=n`.
pub fn dimension_bracket(spec: &SchottkyGroupSpec, n: usize) -> Result<DimensionBracket> {
    let disks = letter_disks(spec)?;
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let mut upper = f64::INFINITY;
    let mut upper_length = 1;
    let mut lower: f64 = 0.0;
    for k in 1..=n {
        let data = TransferData::collect(spec, &disks, k);
        let u = data.root(true);
        if u < upper {
            upper = u;
            upper_length = k;
        }
        lower = lower.max(data.root(false));
    }
    let basepoint = H3Point::origin();
    let orbit_exponent = pressure_exponent(spec, &basepoint, n)?.exponent;
    Ok(DimensionBracket { lower: lower.min(upper), upper, word_length: n, upper_length, basepoint, orbit_exponent })
}

/// Discrete sector measures at exponent `s` from words of length `1..=n`.
pub fn sector_measures(spec: &SchottkyGroupSpec, x: &H3Point, s: f64, n: usize) -> Result<SectorMeasures> {
    if n == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let required = pressure_exponent(spec, x, n)?.exponent;
    if !(s > required) {
        return Err(Error::SummabilityMargin { s, required });
    }
    let raw: Vec<(Vec<Atom>, CompensatedSum)> = map_initial_letters(spec.genus(), |first| {
        let mut atoms = Vec::new();
        let mut total = CompensatedSum::new();
        spec.walk_from(n, first, &mut |w: &[Letter], m: &MoebiusMap| {
            let y = m.act_h3(x);
            let weight = (-s * x.distance(&y)).exp();
            let point = x.ray_endpoint(&y).unwrap_or(ComplexPoint::Infinity);
            total.add(weight);
            atoms.push(Atom { point, weight, word: Word::from_letters(w) });
        });
        (atoms, total)
    });
    let mut total = CompensatedSum::new();
    for (_, t) in &raw {
        total.merge(t);
    }
    let normalizer = total.value();
    let sectors = raw
        .into_iter()
        .enumerate()
        .map(|(k, (mut atoms, mass))| {
            for a in atoms.iter_mut() {
                a.weight /= normalizer;
            }
            SectorMeasureApprox { letter: Letter::from_ordinal(k), atoms, s, word_length: n, mass: mass.value() / normalizer }
        })
        .collect();
    Ok(SectorMeasures { s, word_length: n, basepoint: *x, normalizer, sectors })
}

/// Checks `∫ Ψ_x(γ⁻¹x, ·)^s dρ_{γ⁻¹} = 1 - mass(ρ_γ)` for each standard
/// generator, and the summed form `Σ lhs = (g - 1) + C_ω`.
pub fn verify_decomposition(spec: &SchottkyGroupSpec, x: &H3Point, s: f64, n: usize) -> Result<DecompositionReport> {
    let measures = sector_measures(spec, x, s, n)?;
    decomposition_from_measures(spec, &measures)
}

/// [`verify_decomposition`] on precomputed measures.
pub fn decomposition_from_measures(spec: &SchottkyGroupSpec, measures: &SectorMeasures) -> Result<DecompositionReport> {
    let g = spec.genus();
    let x = &measures.basepoint;
    let s = measures.s;
    let mut generators = Vec::with_capacity(g);
    for i in 1..=g {
        let gamma = Letter::generator(i);
        let kernel = PoissonKernel::new(&spec.letter_map(gamma)?, x);
        let mut lhs = CompensatedSum::new();
        let mut excluded_term = 0.0;
        for atom in &measures.sector(gamma.inv()).atoms {
            let term = atom.weight * kernel.value(atom.point, s);
            if atom.word.len() == 1 {
                excluded_term = term;
            } else {
                lhs.add(term);
            }
        }
        let lhs = lhs.value();
        let rhs = 1.0 - measures.mass(gamma);
        generators.push(GeneratorResidual { letter: gamma, lhs, rhs, residual: (lhs - rhs).abs(), excluded_term });
    }
    let c_omega: f64 = (1..=g).map(|i| measures.mass(Letter::new(i, true))).collect::<CompensatedSum>().value();
    let aggregate_lhs = generators.iter().map(|r| r.lhs).collect::<CompensatedSum>().value();
    let aggregate_rhs = (g as f64 - 1.0) + c_omega;
    let max_generator_residual = generators.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(DecompositionReport {
        genus: g,
        s,
        word_length: measures.word_length,
        generators,
        c_omega,
        aggregate_lhs,
        aggregate_rhs,
        aggregate_residual: (aggregate_lhs - aggregate_rhs).abs(),
        max_generator_residual,
        total_mass: measures.total_mass(),
    })
}

fn mean_of_maps(maps: &[MoebiusMap], x: &H3Point) -> f64 {
    maps.iter().map(|m| x.distance(&m.act_h3(x))).collect::<CompensatedSum>().value() / maps.len() as f64
}

/// `(1/g) Σ_{α ∈ basis} d(x, αx)`.
pub fn mean_displacement(spec: &SchottkyGroupSpec, basis: &Basis, x: &H3Point) -> Result<f64> {
    let maps = basis.elements.iter().map(|w| spec.evaluate(w)).collect::<Result<Vec<_>>>()?;
    Ok(mean_of_maps(&maps, x))
}

/// Coordinate descent in `(x1, x2, ln t)` with step halving.
fn refine_basepoint(maps: &[MoebiusMap], start: H3Point) -> (H3Point, f64) {
    let eval = |p: [f64; 3]| mean_of_maps(maps, &H3Point { x1: p[0], x2: p[1], t: p[2].exp() });
    let mut p = [start.x1, start.x2, start.t.ln()];
    let mut best = eval(p);
    let mut step = 0.5;
    let mut iterations = 0;
    while step > DESCENT_TOLERANCE && iterations < 100_000 {
        iterations += 1;
        let mut improved = false;
        for k in 0..3 {
            for dir in [1.0, -1.0] {
                let mut q = p;
                q[k] += dir * step;
                let v = eval(q);
                if v < best {
                    best = v;
                    p = q;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (H3Point { x1: p[0], x2: p[1], t: p[2].exp() }, best)
}

/// Upper estimate of `inf_ω (1/g) Σ d(x, αx)` over the bases within
/// `nielsen_depth` moves, minimized over the candidate basepoints and then
/// refined by coordinate descent.
pub fn mean_norm_estimate(spec: &SchottkyGroupSpec, nielsen_depth: usize, candidates: &[H3Point]) -> Result<NormEstimate> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate basepoints".into()));
    }
    let bases = enumerate_bases(spec.genus(), nielsen_depth);
    let maps: Vec<Vec<MoebiusMap>> = bases
        .iter()
        .map(|b| b.elements.iter().map(|w| spec.evaluate(w)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let best_at = |x: &H3Point| -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, m) in maps.iter().enumerate() {
            let v = mean_of_maps(m, x);
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    };
    let mut best = (0, f64::INFINITY, candidates[0]);
    for x in candidates {
        let (i, v) = best_at(x);
        if v < best.1 {
            best = (i, v, *x);
        }
    }
    let unrefined = best.1;
    for _ in 0..20 {
        let (x, v) = refine_basepoint(&maps[best.0], best.2);
        let (i, w) = best_at(&x);
        let changed = i != best.0 && w < v;
        best = if changed { (i, w, x) } else { (best.0, v.min(best.1), x) };
        if !changed {
            break;
        }
    }
    Ok(NormEstimate {
        basepoint: best.2,
        basis: bases[best.0].clone(),
        mean_displacement: best.1,
        bases_searched: bases.len(),
        nielsen_depth,
        unrefined,
    })
}

/// The origin and, for classical specs, the point above the centroid of the
/// disk centres at height equal to their mean distance from it.
pub fn default_candidates(spec: &SchottkyGroupSpec) -> Vec<H3Point> {
    let mut out = vec![H3Point::origin()];
    if let Some(ps) = spec.pairings() {
        let centers: Vec<_> = ps.iter().flat_map(|p| [p.source.center, p.target.center]).collect();
        let centroid = centers.iter().sum::<num_complex::Complex64>() / centers.len() as f64;
        let spread = centers.iter().map(|c| (c - centroid).norm()).sum::<f64>() / centers.len() as f64;
        if let Ok(p) = H3Point::new(centroid.re, centroid.im, spread) {
            out.push(p);
        }
    }
    out
}

/// Evaluates the dimension bounds against the dimension bracket.
///
/// `s_margin` is added to the orbit exponent at the norm basepoint to get
/// the exponent of the sector measures.
pub fn bounds_report(spec: &SchottkyGroupSpec, n: usize, nielsen_depth: usize, s_margin: f64) -> Result<BoundsReport> {
    spec.require_classical()?;
    let g = spec.genus();
    let gf = g as f64;
    let translation_lengths: Vec<f64> =
        spec.generators().iter().map(|m| loxodromic_data(m).map(|d| d.translation_length)).collect::<Result<_>>()?;
    let length_ratios: Vec<Vec<f64>> =
        translation_lengths.iter().map(|tj| translation_lengths.iter().map(|ti| tj / ti).collect()).collect();
    let tmax = translation_lengths.iter().copied().fold(0.0, f64::max);
    let tmin = translation_lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = tmax / tmin;

    let norm = mean_norm_estimate(spec, nielsen_depth, &default_candidates(spec))?;
    let x = norm.basepoint;
    let s = pressure_exponent(spec, &x, n)?.exponent + s_margin;
    let measures = sector_measures(spec, &x, s, n)?;
    let inverse_sector_masses: Vec<f64> = (1..=g).map(|i| measures.mass(Letter::new(i, true))).collect();
    let sigma_minus = inverse_sector_masses.iter().copied().collect::<CompensatedSum>().value();
    let bracket = dimension_bracket(spec, n)?;
    let w = norm.mean_displacement;

    let entry = |name: &str, value: f64, hypothesis: bool, vacuous: bool, heuristic: bool, note: String| BoundEntry {
        name: name.to_string(),
        value,
        applicable: hypothesis && !vacuous,
        vacuous,
        heuristic,
        consistent: bracket.lower <= value,
        note,
    };
    let ln2 = std::f64::consts::LN_2;
    let b1 = ((lambda - 1.0) * ln2 + (lambda + 1.0) * gf.ln()) / w;
    let b2 = 2.0 * gf.ln() / w;
    let b3 = (gf / sigma_minus).ln() / w;
    let mass_floor = 1.0 / (2.0 * gf) - 1e-9;
    let masses_ok = inverse_sector_masses.iter().all(|&m| m >= mass_floor);
    let degenerate = g == 1;
    let degenerate_note = |v: &str| if degenerate { format!("{v}; log g = 0 at genus 1") } else { v.to_string() };
    let bounds = vec![
        entry("B1", b1, true, degenerate, false, degenerate_note("length-ratio bound")),
        entry(
            "B2",
            b2,
            masses_ok,
            degenerate,
            false,
            degenerate_note(if masses_ok { "sector masses satisfy the 1/(2g) hypothesis" } else { "sector-mass hypothesis fails" }),
        ),
        entry("B3", b3, true, false, true, "uses the finite-depth estimate of sigma-minus".to_string()),
    ];
    Ok(BoundsReport {
        genus: g,
        translation_lengths,
        length_ratios,
        lambda,
        norm,
        s,
        inverse_sector_masses,
        sigma_minus,
        bracket,
        bounds,
    })
}
