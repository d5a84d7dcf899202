//! Schottky groups from circle pairings or from multipliers and fixed points.
//!
//! Generator `γ_i` of a classical group maps the *source* circle of pair `i`
//! onto its *target* circle, sending the exterior of the source disk into
//! the interior of the target disk. Disks are numbered `2i` (source of pair
//! `i`) and `2i + 1` (target), 0-based.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{loxodromic_data, Circle, ComplexPoint, LoxodromicData, MapKind, MoebiusMap};
use crate::words::{walk_words_from, Letter, Word};

/// Two closed disks count as disjoint when their gap exceeds this.
pub const DISJOINT_TOLERANCE: f64 = 1e-12;
/// Relative residual allowed when checking that a map pairs two circles.
pub const PAIRING_TOLERANCE: f64 = 1e-9;
const PAIRING_SAMPLES: usize = 64;

/// A generator together with the circles it pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirclePairing {
    pub source: Circle,
    pub target: Circle,
    pub map: MoebiusMap,
}

impl CirclePairing {
    /// The pairing `z -> c2 + k / (z - c1)` with `k = -e² e^{iφ} r1 r2`,
    /// `e` the unit vector from `c1` to `c2`. With `rotation = 0` the map is
    /// hyperbolic with axis through both centres.
    pub fn standard(source: Circle, target: Circle, rotation: f64) -> Result<Self> {
        let (c1, c2) = (source.center, target.center);
        let sep = c2 - c1;
        if sep.norm() == 0.0 {
            return Err(Error::DegeneratePair(0));
        }
        let e = sep / sep.norm();
        let k = -(e * e) * Complex64::from_polar(1.0, rotation) * source.radius * target.radius;
        let one = Complex64::new(1.0, 0.0);
        let map = MoebiusMap::new(c2, k - c1 * c2, one, -c1)?;
        Ok(Self { source, target, map })
    }

    /// Largest relative deviation `||γ(p) - c2| - r2| / r2` over points
    /// sampled on the source circle.
    pub fn residual(&self) -> f64 {
        (0..PAIRING_SAMPLES)
            .map(|k| {
                let p = self.source.point_at(2.0 * PI * k as f64 / PAIRING_SAMPLES as f64);
                match self.map.apply(ComplexPoint::Finite(p)) {
                    ComplexPoint::Finite(q) => ((q - self.target.center).norm() - self.target.radius).abs() / self.target.radius,
                    ComplexPoint::Infinity => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max)
    }

    /// Whether the map sends the exterior of the source disk into the
    /// target disk (equivalently: its pole lies inside the source disk).
    pub fn orientation_ok(&self) -> bool {
        match (self.map.pole(), self.map.apply(ComplexPoint::Infinity)) {
            (ComplexPoint::Finite(p), ComplexPoint::Finite(q)) => self.source.contains_open(p) && self.target.contains_open(q),
            _ => false,
        }
    }
}

/// A rank-`g` group given by `g` loxodromic generators and, optionally,
/// circle pairings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchottkyGroupSpec {
    genus: usize,
    generators: Vec<MoebiusMap>,
    pairings: Option<Vec<CirclePairing>>,
    classical_verified: bool,
    #[serde(skip)]
    letter_maps: Vec<MoebiusMap>,
}

/// Gap between two closed disks: centre distance minus the radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskGap {
    pub first: usize,
    pub second: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PingPongSample {
    pub seed: u64,
    pub samples: usize,
    pub failures: usize,
}

/// Outcome of [`validate_classical`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub genus: usize,
    pub gaps: Vec<DiskGap>,
    pub min_gap: f64,
    pub pairing_residuals: Vec<f64>,
    pub orientation_ok: Vec<bool>,
    pub loxodromic: Vec<bool>,
    pub ping_pong: Option<PingPongSample>,
    pub valid: bool,
}

impl ValidationReport {
    pub fn first_overlap(&self) -> Option<DiskGap> {
        self.gaps.iter().copied().find(|g| g.gap <= DISJOINT_TOLERANCE)
    }
}

fn disks(pairings: &[CirclePairing]) -> Vec<Circle> {
    pairings.iter().flat_map(|p| [p.source, p.target]).collect()
}

fn check_loxodromic(generators: &[MoebiusMap]) -> Result<()> {
    for m in generators {
        if m.kind() != MapKind::Loxodromic {
            let t2 = m.trace_squared();
            return Err(Error::NotLoxodromic { re: t2.re, im: t2.im });
        }
    }
    Ok(())
}

impl SchottkyGroupSpec {
    /// An unverified spec. Generators must be loxodromic; pairings, when
    /// given, must match the generators in number. Use [`Self::verified`] to
    /// run the classical check.
    pub fn new(generators: Vec<MoebiusMap>, pairings: Option<Vec<CirclePairing>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidGenus);
        }
        check_loxodromic(&generators)?;
        if let Some(p) = &pairings {
            if p.len() != generators.len() {
                return Err(Error::InvalidArgument(format!("{} pairings for {} generators", p.len(), generators.len())));
            }
        }
        let letter_maps = generators.iter().flat_map(|m| [*m, m.inverse()]).collect();
        Ok(Self { genus: generators.len(), generators, pairings, classical_verified: false, letter_maps })
    }

    /// Runs [`validate_classical`] and marks the spec classical, or reports
    /// the first failure as an error.
    pub fn verified(mut self) -> Result<Self> {
        let report = validate_classical(&self)?;
        if let Some(g) = report.first_overlap() {
            return Err(Error::OverlappingCircles { first: g.first, second: g.second, gap: g.gap });
        }
        for (i, (&r, &ok)) in report.pairing_residuals.iter().zip(&report.orientation_ok).enumerate() {
            if r > PAIRING_TOLERANCE || !ok {
                return Err(Error::PairingMismatch { index: i, residual: r });
            }
        }
        self.classical_verified = report.valid;
        Ok(self)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn generators(&self) -> &[MoebiusMap] {
        &self.generators
    }

    pub fn pairings(&self) -> Option<&[CirclePairing]> {
        self.pairings.as_deref()
    }

    pub fn classical_verified(&self) -> bool {
        self.classical_verified
    }

    pub fn require_classical(&self) -> Result<&[CirclePairing]> {
        match &self.pairings {
            Some(p) if self.classical_verified => Ok(p),
            _ => Err(Error::NotClassical),
        }
    }

    /// The map of a single letter.
    pub fn letter_map(&self, l: Letter) -> Result<MoebiusMap> {
        self.letter_maps
            .get(l.ordinal())
            .copied()
            .ok_or(Error::LetterOutOfRange { letter: l.index(), genus: self.genus })
    }

    /// Evaluates a word to a map (`a1A2` is `γ₁ ∘ γ₂⁻¹`).
    pub fn evaluate(&self, w: &Word) -> Result<MoebiusMap> {
        w.letters().iter().try_fold(MoebiusMap::identity(), |acc, &l| Ok(acc * self.letter_map(l)?))
    }

    /// The disk containing the limit points of words that start with `l`:
    /// the target disk for `γ_i`, the source disk for `γ_i⁻¹`.
    pub fn letter_disk(&self, l: Letter) -> Option<Circle> {
        let p = self.pairings.as_ref()?.get(l.index() - 1)?;
        Some(if l.is_inverse() { p.source } else { p.target })
    }

    pub fn loxodromic_data(&self) -> Result<Vec<LoxodromicData>> {
        self.generators.iter().map(loxodromic_data).collect()
    }

    /// Depth-first walk over all words of length `1..=max_len` starting with
    /// `first`, passing each word with its map.
    pub fn walk_from<V: FnMut(&[Letter], &MoebiusMap)>(&self, max_len: usize, first: Letter, visit: &mut V) {
        let maps = &self.letter_maps;
        walk_words_from(self.genus, max_len, first, &MoebiusMap::identity(), &|m: &MoebiusMap, l: Letter| *m * maps[l.ordinal()], visit);
    }

    /// The spec conjugated by `h`: generators `h γ h⁻¹`, circles moved by
    /// `h`. Pairings are dropped (and the spec left unverified) when `h`
    /// sends a circle to a line, i.e. when its pole lies on a closed disk.
    pub fn conjugate(&self, h: &MoebiusMap) -> Result<Self> {
        let generators: Vec<MoebiusMap> = self.generators.iter().map(|m| m.conjugate_by(h)).collect();
        let pairings = self.pairings.as_ref().and_then(|ps| {
            ps.iter()
                .zip(&generators)
                .map(|(p, m)| Some(CirclePairing { source: p.source.image(h)?, target: p.target.image(h)?, map: *m }))
                .collect::<Option<Vec<_>>>()
        });
        let has_pairings = pairings.is_some();
        let spec = Self::new(generators, pairings)?;
        if self.classical_verified && has_pairings {
            let report = validate_classical(&spec)?;
            let mut spec = spec;
            spec.classical_verified = report.valid;
            Ok(spec)
        } else {
            Ok(spec)
        }
    }

    /// Conjugates so that `z₋,₁ -> 0`, `z₊,₁ -> ∞` and, for `g ≥ 2`,
    /// `z₋,₂ -> 1`. Returns the normalized spec and the conjugating map.
    pub fn normalized(&self) -> Result<(Self, MoebiusMap)> {
        let data = self.loxodromic_data()?;
        let (zm, zp) = (data[0].fixed_minus, data[0].fixed_plus);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = if self.genus >= 2 {
            MoebiusMap::from_three_points(zm, data[1].fixed_minus, zp)?
        } else {
            match (zm, zp) {
                (ComplexPoint::Finite(a), ComplexPoint::Finite(b)) => MoebiusMap::new(one, -a, one, -b)?,
                (ComplexPoint::Finite(a), ComplexPoint::Infinity) => MoebiusMap::translation(-a),
                (ComplexPoint::Infinity, ComplexPoint::Finite(b)) => MoebiusMap::new(zero, one, one, -b)?,
                _ => return Err(Error::CoincidentFixedPoints(1)),
            }
        };
        Ok((self.conjugate(&h)?, h))
    }
}

/// Builds a classical group from circle pairs with the default rotation 0.
pub fn build_from_circles(pairs: &[(Circle, Circle)]) -> Result<SchottkyGroupSpec> {
    build_from_circles_with_rotation(pairs, &vec![0.0; pairs.len()])
}

/// As [`build_from_circles`], with one rotation angle per pair.
pub fn build_from_circles_with_rotation(pairs: &[(Circle, Circle)], rotations: &[f64]) -> Result<SchottkyGroupSpec> {
    if pairs.is_empty() {
        return Err(Error::InvalidGenus);
    }
    if rotations.len() != pairs.len() {
        return Err(Error::InvalidArgument(format!("{} rotations for {} pairs", rotations.len(), pairs.len())));
    }
    for (i, (s, t)) in pairs.iter().enumerate() {
        if s.center == t.center {
            return Err(Error::DegeneratePair(i));
        }
    }
    let all: Vec<Circle> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    if let Some(g) = pairwise_gaps(&all).into_iter().find(|g| g.gap <= DISJOINT_TOLERANCE) {
        return Err(Error::OverlappingCircles { first: g.first, second: g.second, gap: g.gap });
    }
    let mut pairings = Vec::with_capacity(pairs.len());
    for (i, (&(s, t), &phi)) in pairs.iter().zip(rotations).enumerate() {
        pairings.push(CirclePairing::standard(s, t, phi).map_err(|e| match e {
            Error::DegeneratePair(_) => Error::DegeneratePair(i),
            e => e,
        })?);
    }
    let generators = pairings.iter().map(|p| p.map).collect();
    SchottkyGroupSpec::new(generators, Some(pairings))?.verified()
}

/// Builds generators by conjugating `z -> λ z` so that `0 -> z₋` (repelling)
/// and `∞ -> z₊` (attracting). No circles are attached.
pub fn build_from_coordinates(multipliers: &[Complex64], fixed_pairs: &[(ComplexPoint, ComplexPoint)]) -> Result<SchottkyGroupSpec> {
    if multipliers.is_empty() {
        return Err(Error::InvalidGenus);
    }
    if multipliers.len() != fixed_pairs.len() {
        return Err(Error::InvalidArgument(format!("{} multipliers for {} fixed-point pairs", multipliers.len(), fixed_pairs.len())));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut generators = Vec::with_capacity(multipliers.len());
    for (i, (&lambda, &(zm, zp))) in multipliers.iter().zip(fixed_pairs).enumerate() {
        if !(lambda.norm() > 1.0) || !lambda.is_finite() {
            return Err(Error::NotLoxodromicMultiplier { index: i, modulus: lambda.norm() });
        }
        let h = match (zm, zp) {
            (ComplexPoint::Finite(a), ComplexPoint::Finite(b)) => {
                if a == b {
                    return Err(Error::CoincidentFixedPoints(i));
                }
                MoebiusMap::new(b, a, one, one).map_err(|_| Error::CoincidentFixedPoints(i))?
            }
            (ComplexPoint::Finite(a), ComplexPoint::Infinity) => MoebiusMap::translation(a),
            (ComplexPoint::Infinity, ComplexPoint::Finite(b)) => MoebiusMap::new(b, one, one, zero)?,
            (ComplexPoint::Infinity, ComplexPoint::Infinity) => return Err(Error::CoincidentFixedPoints(i)),
        };
        generators.push(MoebiusMap::dilation(lambda)?.conjugate_by(&h));
    }
    SchottkyGroupSpec::new(generators, None)
}

fn pairwise_gaps(disks: &[Circle]) -> Vec<DiskGap> {
    let mut gaps = Vec::new();
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            let gap = (disks[i].center - disks[j].center).norm() - disks[i].radius - disks[j].radius;
            gaps.push(DiskGap { first: i, second: j, gap });
        }
    }
    gaps
}

/// Disk gaps, pairing residuals and orientation of every pairing. The spec
/// itself is not modified.
pub fn validate_classical(spec: &SchottkyGroupSpec) -> Result<ValidationReport> {
    let pairings = spec.pairings.as_ref().ok_or(Error::MissingPairings)?;
    let gaps = pairwise_gaps(&disks(pairings));
    let min_gap = gaps.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let pairing_residuals: Vec<f64> = pairings.iter().map(CirclePairing::residual).collect();
    let orientation_ok: Vec<bool> = pairings.iter().map(CirclePairing::orientation_ok).collect();
    let loxodromic: Vec<bool> = spec.generators.iter().map(|m| m.kind() == MapKind::Loxodromic).collect();
    let valid = gaps.iter().all(|g| g.gap > DISJOINT_TOLERANCE)
        && pairing_residuals.iter().all(|&r| r <= PAIRING_TOLERANCE)
        && orientation_ok.iter().all(|&b| b)
        && loxodromic.iter().all(|&b| b);
    Ok(ValidationReport { genus: spec.genus, gaps, min_gap, pairing_residuals, orientation_ok, loxodromic, ping_pong: None, valid })
}

/// [`validate_classical`] plus a seeded ping-pong test: random points outside
/// each source disk must land strictly inside the target disk.
pub fn validate_classical_sampled(spec: &SchottkyGroupSpec, samples: usize, seed: u64) -> Result<ValidationReport> {
    let mut report = validate_classical(spec)?;
    let pairings = spec.pairings.as_ref().ok_or(Error::MissingPairings)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..samples {
        for p in pairings {
            // radius log-uniform in (r, 1e3 r), angle uniform
            let rho = p.source.radius * (rng.gen::<f64>() * 3.0 * std::f64::consts::LN_10).exp() * (1.0 + 1e-9);
            let z = p.source.center + Complex64::from_polar(rho, rng.gen::<f64>() * 2.0 * PI);
            let inside = match p.map.apply(ComplexPoint::Finite(z)) {
                ComplexPoint::Finite(w) => p.target.contains_open(w),
                ComplexPoint::Infinity => false,
            };
            if !inside {
                failures += 1;
            }
        }
    }
    report.ping_pong = Some(PingPongSample { seed, samples: samples * pairings.len(), failures });
    report.valid &= failures == 0;
    Ok(report)
}

/// Whether `z` lies outside every open pairing disk (circles themselves
/// belong to the domain).
pub fn fundamental_domain_contains(spec: &SchottkyGroupSpec, z: ComplexPoint) -> Result<bool> {
    let pairings = spec.require_classical()?;
    Ok(match z {
        ComplexPoint::Infinity => true,
        ComplexPoint::Finite(z) => disks(pairings).iter().all(|d| !d.contains_open(z)),
    })
}

/// One circle pair of the file format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub cx2: f64,
    pub cy2: f64,
    pub r2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
}

/// The group-spec file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub genus: usize,
    #[serde(default)]
    pub generators: Vec<[[f64; 2]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circles: Option<Vec<CircleRecord>>,
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse(format!("non-finite value in {what}")))
    }
}

impl GroupFile {
    pub fn from_spec(spec: &SchottkyGroupSpec) -> Self {
        let generators = spec.generators.iter().map(|m| m.entries().map(|z| [z.re, z.im])).collect();
        let circles = spec.pairings.as_ref().map(|ps| {
            ps.iter()
                .map(|p| CircleRecord {
                    cx: p.source.center.re,
                    cy: p.source.center.im,
                    r: p.source.radius,
                    cx2: p.target.center.re,
                    cy2: p.target.center.im,
                    r2: p.target.radius,
                    rotation: None,
                })
                .collect()
        });
        Self { genus: spec.genus, generators, circles }
    }

    /// Builds the spec. Circles without generators use the standard
    /// pairings; circles with generators are checked against them. Classical
    /// verification runs whenever circles are present.
    pub fn into_spec(self) -> Result<SchottkyGroupSpec> {
        if self.genus == 0 {
            return Err(Error::InvalidGenus);
        }
        let mut generators = Vec::with_capacity(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            let mut e = [Complex64::new(0.0, 0.0); 4];
            for (k, [re, im]) in g.iter().enumerate() {
                e[k] = Complex64::new(finite(*re, "generators")?, finite(*im, "generators")?);
            }
            generators.push(MoebiusMap::new(e[0], e[1], e[2], e[3]).map_err(|err| match err {
                Error::Singular { .. } => Error::Parse(format!("generator {} is singular", i + 1)),
                e => e,
            })?);
        }
        if !generators.is_empty() && generators.len() != self.genus {
            return Err(Error::Parse(format!("genus {} but {} generators", self.genus, generators.len())));
        }
        let Some(records) = self.circles else {
            if generators.is_empty() {
                return Err(Error::Parse("neither generators nor circles given".into()));
            }
            return SchottkyGroupSpec::new(generators, None);
        };
        if records.len() != self.genus {
            return Err(Error::Parse(format!("genus {} but {} circle pairs", self.genus, records.len())));
        }
        let mut pairs = Vec::with_capacity(records.len());
        let mut rotations = Vec::with_capacity(records.len());
        for r in &records {
            let s = Circle::new(Complex64::new(finite(r.cx, "circles")?, finite(r.cy, "circles")?), finite(r.r, "circles")?)?;
            let t = Circle::new(Complex64::new(finite(r.cx2, "circles")?, finite(r.cy2, "circles")?), finite(r.r2, "circles")?)?;
            pairs.push((s, t));
            rotations.push(finite(r.rotation.unwrap_or(0.0), "circles")?);
        }
        if generators.is_empty() {
            return build_from_circles_with_rotation(&pairs, &rotations);
        }
        let pairings = pairs.iter().zip(&generators).map(|(&(source, target), &map)| CirclePairing { source, target, map }).collect();
        SchottkyGroupSpec::new(generators, Some(pairings))?.verified()
    }
}

impl SchottkyGroupSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GroupFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_spec()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GroupFile::from_spec(self)).expect("group file serializes")
    }
}

/// A symmetric classical group: pair `k` (0-based) has radius-`r` circles
/// centred at `±d·e^{iπk/g}`, so genus 2 uses `±d` and `±d i`.
pub fn symmetric_spec(g: usize, d: f64, r: f64) -> Result<SchottkyGroupSpec> {
    let pairs: Vec<(Circle, Circle)> = (0..g)
        .map(|i| {
            let dir = Complex64::from_polar(d, PI * i as f64 / g as f64);
            Ok((Circle::new(-dir, r)?, Circle::new(dir, r)?))
        })
        .collect::<Result<_>>()?;
    build_from_circles(&pairs)
}
