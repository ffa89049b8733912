//! Almost-periodic signals represented as finite trigonometric polynomials
//! `sum_λ a_λ exp(2πi λ·x)`, with frequencies in cycles per unit length.
//!
//! Frequency identity is decided on a canonical integer key obtained by
//! rounding each component to a fixed resolution (default `1e-12`).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: f64 = 1e-12;
/// Midpoint samples per unit length per axis used by box averages.
pub const DEFAULT_SAMPLES_PER_UNIT: usize = 64;
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

type Key = Vec<i64>;

fn key_of(freq: &[f64], resolution: f64) -> Key {
    freq.iter().map(|&x| (x / resolution).round() as i64).collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    freq: Vec<f64>,
    amp: Complex64,
}

/// Finite trigonometric polynomial on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApSignal {
    dims: usize,
    resolution: f64,
    terms: BTreeMap<Key, Term>,
}

impl ApSignal {
    /// The zero signal.
    pub fn zero(dims: usize) -> Self {
        assert!(dims >= 1, "signal dimension must be positive");
        ApSignal { dims, resolution: DEFAULT_RESOLUTION, terms: BTreeMap::new() }
    }

    pub fn with_resolution(dims: usize, resolution: f64) -> Self {
        assert!(resolution > 0.0);
        ApSignal { resolution, ..ApSignal::zero(dims) }
    }

    /// Build from `(frequency, amplitude)` pairs. Colliding frequencies are
    /// summed and zero amplitudes dropped.
    pub fn from_terms<I>(dims: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, Complex64)>,
    {
        let mut s = ApSignal::zero(dims);
        for (freq, amp) in terms {
            s.add_term(freq, amp)?;
        }
        Ok(s)
    }

    /// Like [`ApSignal::from_terms`], but rejects signals that are not real-valued.
    pub fn from_terms_real<I>(dims: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, Complex64)>,
    {
        let s = Self::from_terms(dims, terms)?;
        s.require_real(1e-12)?;
        Ok(s)
    }

    pub fn constant(dims: usize, c: f64) -> Self {
        let mut s = ApSignal::zero(dims);
        s.add_term(vec![0.0; dims], Complex64::new(c, 0.0)).unwrap();
        s
    }

    /// `amp * exp(2πi λ·x)`
    pub fn mode(freq: Vec<f64>, amp: Complex64) -> Self {
        let mut s = ApSignal::zero(freq.len());
        s.add_term(freq, amp).unwrap();
        s
    }

    /// `amp * sin(2π λ·x + phase)`
    pub fn sine(freq: Vec<f64>, amp: f64, phase: f64) -> Self {
        let neg: Vec<f64> = freq.iter().map(|x| -x).collect();
        let c = Complex64::from_polar(amp / 2.0, phase - PI / 2.0);
        let mut s = ApSignal::zero(freq.len());
        s.add_term(freq, c).unwrap();
        s.add_term(neg, c.conj()).unwrap();
        s
    }

    /// `amp * cos(2π λ·x + phase)`
    pub fn cosine(freq: Vec<f64>, amp: f64, phase: f64) -> Self {
        Self::sine(freq, amp, phase + PI / 2.0)
    }

    pub fn add_term(&mut self, freq: Vec<f64>, amp: Complex64) -> Result<()> {
        if freq.len() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, got: freq.len() });
        }
        let key = key_of(&freq, self.resolution);
        let entry = self.terms.entry(key.clone()).or_insert(Term { freq, amp: Complex64::new(0.0, 0.0) });
        entry.amp += amp;
        if entry.amp == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn add(&self, other: &ApSignal) -> Result<ApSignal> {
        let mut s = self.clone();
        for t in other.terms.values() {
            s.add_term(t.freq.clone(), t.amp)?;
        }
        Ok(s)
    }

    pub fn scale(&self, c: f64) -> ApSignal {
        let mut s = ApSignal::with_resolution(self.dims, self.resolution);
        for t in self.terms.values() {
            s.add_term(t.freq.clone(), t.amp * c).unwrap();
        }
        s
    }

    /// Mirror image `x -> -x`.
    pub fn reflect(&self) -> ApSignal {
        let mut s = ApSignal::with_resolution(self.dims, self.resolution);
        for t in self.terms.values() {
            s.add_term(t.freq.iter().map(|x| -x).collect(), t.amp).unwrap();
        }
        s
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (sorted key) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[f64], Complex64)> {
        self.terms.values().map(|t| (t.freq.as_slice(), t.amp))
    }

    /// Largest conjugate-symmetry defect `|a_{-λ} - conj(a_λ)|`.
    pub fn reality_defect(&self) -> (f64, Option<Vec<f64>>) {
        let mut worst = (0.0, None);
        for t in self.terms.values() {
            let neg: Vec<f64> = t.freq.iter().map(|x| -x).collect();
            let partner = self
                .terms
                .get(&key_of(&neg, self.resolution))
                .map_or(Complex64::new(0.0, 0.0), |p| p.amp);
            let d = (partner - t.amp.conj()).norm();
            if d > worst.0 {
                worst = (d, Some(t.freq.clone()));
            }
        }
        worst
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect().0 <= tol * self.l1_amplitude().max(1.0)
    }

    pub fn require_real(&self, tol: f64) -> Result<()> {
        let scale = self.l1_amplitude().max(1.0);
        match self.reality_defect() {
            (d, Some(freq)) if d > tol * scale => Err(Error::NotReal { freq }),
            _ => Ok(()),
        }
    }

    /// `sum |a_λ|`, an upper bound for the sup norm.
    pub fn l1_amplitude(&self) -> f64 {
        self.terms.values().map(|t| t.amp.norm()).sum()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dims);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in self.terms.values() {
            let phase: f64 = t.freq.iter().zip(x).map(|(l, xi)| l * xi).sum();
            let (s, c) = (2.0 * PI * phase).sin_cos();
            acc += t.amp * Complex64::new(c, s);
        }
        acc
    }

    /// Mean value: the amplitude at frequency zero.
    pub fn mean_value(&self) -> Complex64 {
        self.terms
            .get(&vec![0; self.dims])
            .map_or(Complex64::new(0.0, 0.0), |t| t.amp)
    }

    /// Bohr-Fourier coefficient at `freq` (zero when absent).
    pub fn fourier_coefficient(&self, freq: &[f64]) -> Result<Complex64> {
        if freq.len() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, got: freq.len() });
        }
        Ok(self
            .terms
            .get(&key_of(freq, self.resolution))
            .map_or(Complex64::new(0.0, 0.0), |t| t.amp))
    }

    pub fn spectrum(&self) -> FrequencySet {
        let mut set = FrequencySet::with_resolution(self.dims, self.resolution);
        for t in self.terms.values() {
            set.insert(t.freq.clone());
        }
        set
    }

    /// `sum |a_λ|^2`
    pub fn energy(&self) -> f64 {
        self.terms.values().map(|t| t.amp.norm_sqr()).sum()
    }

    /// Midpoint-rule average of `|sig|^p` over the cube `[-R/2, R/2]^d`,
    /// raised to `1/p`.
    pub fn box_average(&self, p: u32, box_size: f64, samples_per_unit: usize) -> f64 {
        let n = ((box_size * samples_per_unit as f64).ceil() as usize).max(1);
        let h = box_size / n as f64;
        let origin = -0.5 * box_size;
        let coord = |j: usize| origin + (j as f64 + 0.5) * h;
        let pow = |z: Complex64| match p {
            1 => z.norm(),
            2 => z.norm_sqr(),
            _ => z.norm().powi(p as i32),
        };
        let total: f64 = match self.dims {
            1 => (0..n).map(|j| pow(self.eval(&[coord(j)]))).sum(),
            2 => {
                // per-row partial sums, reduced in row order
                let rows: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let x0 = coord(i);
                        (0..n).map(|j| pow(self.eval(&[x0, coord(j)]))).sum()
                    })
                    .collect();
                rows.iter().sum()
            }
            d => {
                let count = n.pow(d as u32);
                let mut idx = vec![0usize; d];
                let mut x = vec![0.0; d];
                let mut s = 0.0;
                for _ in 0..count {
                    for (xi, &ii) in x.iter_mut().zip(&idx) {
                        *xi = coord(ii);
                    }
                    s += pow(self.eval(&x));
                    for k in (0..d).rev() {
                        idx[k] += 1;
                        if idx[k] < n {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                s
            }
        };
        let mean = total / (n as f64).powi(self.dims as i32);
        mean.powf(1.0 / p as f64)
    }

    /// Besicovitch `N_p` seminorm. `p = 2` is exact by Parseval; `p = 1` is a
    /// box-average estimate over the supplied, increasing box sizes.
    pub fn besicovitch_seminorm(&self, p: u32, boxes: &[f64]) -> Result<SeminormEstimate> {
        match p {
            2 => Ok(SeminormEstimate {
                value: self.energy().sqrt(),
                method: SeminormMethod::ParsevalExact,
                box_sizes: Vec::new(),
                residual: 0.0,
            }),
            1 => {
                if boxes.is_empty() {
                    return Err(Error::InvalidArgument { name: "boxes", reason: "empty".into() });
                }
                if boxes[0] <= 0.0 || boxes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidArgument {
                        name: "boxes",
                        reason: "box sizes must be positive and strictly increasing".into(),
                    });
                }
                let est: Vec<f64> = boxes
                    .iter()
                    .map(|&r| self.box_average(1, r, DEFAULT_SAMPLES_PER_UNIT))
                    .collect();
                let value = *est.last().unwrap();
                let residual = if est.len() >= 2 { (value - est[est.len() - 2]).abs() } else { 0.0 };
                Ok(SeminormEstimate {
                    value,
                    method: SeminormMethod::BoxAverage,
                    box_sizes: boxes.to_vec(),
                    residual,
                })
            }
            other => Err(Error::UnsupportedExponent(other)),
        }
    }

    /// Move every frequency to the nearest point of the lattice `Z^d / L`.
    /// Returns the projected signal and the largest per-axis frequency shift.
    pub fn commensurate_project(&self, lengths: &[f64]) -> Result<(ApSignal, f64)> {
        if lengths.len() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, got: lengths.len() });
        }
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidArgument {
                name: "lengths",
                reason: "super-cell lengths must be positive".into(),
            });
        }
        let mut out = ApSignal::with_resolution(self.dims, self.resolution);
        let mut max_err = 0.0f64;
        for t in self.terms.values() {
            let projected: Vec<f64> = t
                .freq
                .iter()
                .zip(lengths)
                .map(|(&l, &len)| {
                    let p = (l * len).round() / len;
                    max_err = max_err.max((l - p).abs());
                    p
                })
                .collect();
            out.add_term(projected, t.amp)?;
        }
        Ok((out, max_err))
    }

    /// Keep only the frequencies in `keep`, each multiplied by its weight
    /// (default 1). Weights must lie in `[0, 1]`.
    pub fn spectral_truncate(
        &self,
        keep: &FrequencySet,
        weights: Option<&[(Vec<f64>, f64)]>,
    ) -> Result<ApSignal> {
        let mut wmap: BTreeMap<Key, f64> = BTreeMap::new();
        for (freq, w) in weights.unwrap_or(&[]) {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::InvalidArgument {
                    name: "weights",
                    reason: format!("weight {w} at {freq:?} outside [0, 1]"),
                });
            }
            wmap.insert(key_of(freq, self.resolution), *w);
        }
        let mut out = ApSignal::with_resolution(self.dims, self.resolution);
        for (key, t) in &self.terms {
            if keep.contains(&t.freq) {
                let w = wmap.get(key).copied().unwrap_or(1.0);
                out.add_term(t.freq.clone(), t.amp * w)?;
            }
        }
        Ok(out)
    }

    /// `sum_{λ in spectrum \ F} |a_λ|^2`
    pub fn spectral_tail_mass(&self, f: &FrequencySet) -> f64 {
        self.terms
            .values()
            .filter(|t| !f.contains(&t.freq))
            .map(|t| t.amp.norm_sqr())
            .sum()
    }

    /// Grid shifts `τ ∈ step·Z^d ∩ [-S/2, S/2]^d` whose Stepanoff distance
    /// `sup_x ∫_{x + [0,1]^d} |f(y+τ) - f(y)| dy` is at most `eps`.
    ///
    /// The sup over `x` is sampled on grid points of one super-cell and each
    /// unit-cube integral uses the midpoint rule, so a signal that is periodic
    /// on the super-cell is resolved up to the grid spacing.
    pub fn epsilon_almost_periods(
        &self,
        eps: f64,
        search_box: f64,
        step: f64,
        opts: &AlmostPeriodOptions,
    ) -> Result<Vec<Vec<f64>>> {
        if !(step > 0.0) || !(search_box > 0.0) {
            return Err(Error::InvalidArgument {
                name: "step/search_box",
                reason: "must be positive".into(),
            });
        }
        let m = (0.5 * search_box / step + 1e-9).floor() as i64;
        let per_axis: Vec<f64> = (-m..=m).map(|k| k as f64 * step).collect();
        let mut shifts: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..self.dims {
            shifts = shifts
                .into_iter()
                .flat_map(|s| {
                    per_axis.iter().map(move |&t| {
                        let mut v = s.clone();
                        v.push(t);
                        v
                    })
                })
                .collect();
        }
        let accepted: Vec<Option<Vec<f64>>> = shifts
            .into_par_iter()
            .map(|tau| {
                let d = self.stepanoff_distance(&tau, opts);
                (d <= eps).then_some(tau)
            })
            .collect();
        Ok(accepted.into_iter().flatten().collect())
    }

    /// Sampled Stepanoff distance between the signal and its translate by `tau`.
    pub fn stepanoff_distance(&self, tau: &[f64], opts: &AlmostPeriodOptions) -> f64 {
        // f(y+τ) - f(y) = sum a_λ (e^{2πiλ·τ} - 1) e^{2πiλ·y}
        let mut diff = ApSignal::with_resolution(self.dims, self.resolution);
        for t in self.terms.values() {
            let phase: f64 = t.freq.iter().zip(tau).map(|(l, s)| l * s).sum();
            let frac = phase - phase.round();
            let (s, c) = (2.0 * PI * frac).sin_cos();
            let factor = Complex64::new(c - 1.0, s);
            if factor != Complex64::new(0.0, 0.0) {
                diff.add_term(t.freq.clone(), t.amp * factor).unwrap();
            }
        }
        if diff.is_empty() {
            return 0.0;
        }
        let q = opts.samples_per_unit.max(1);
        let h = 1.0 / q as f64;
        match self.dims {
            1 => {
                let cell = opts.super_cell.first().copied().unwrap_or(10.0);
                let nx = (cell * q as f64).ceil() as usize;
                let total = nx + q;
                let vals: Vec<f64> = (0..total)
                    .map(|j| diff.eval(&[(j as f64 + 0.5) * h]).norm())
                    .collect();
                let mut prefix = vec![0.0; total + 1];
                for j in 0..total {
                    prefix[j + 1] = prefix[j] + vals[j];
                }
                (0..=nx)
                    .map(|x0| (prefix[x0 + q] - prefix[x0]) * h)
                    .fold(0.0, f64::max)
            }
            2 => {
                let cx = opts.super_cell.first().copied().unwrap_or(10.0);
                let cy = opts.super_cell.get(1).copied().unwrap_or(cx);
                let nx = (cx * q as f64).ceil() as usize;
                let ny = (cy * q as f64).ceil() as usize;
                let (tx, ty) = (nx + q, ny + q);
                let mut sat = vec![0.0; (tx + 1) * (ty + 1)];
                for i in 0..tx {
                    let x = (i as f64 + 0.5) * h;
                    for j in 0..ty {
                        let y = (j as f64 + 0.5) * h;
                        let v = diff.eval(&[x, y]).norm();
                        sat[(i + 1) * (ty + 1) + j + 1] =
                            v + sat[i * (ty + 1) + j + 1] + sat[(i + 1) * (ty + 1) + j]
                                - sat[i * (ty + 1) + j];
                    }
                }
                let at = |i: usize, j: usize| sat[i * (ty + 1) + j];
                let mut best = 0.0f64;
                for i in 0..=nx {
                    for j in 0..=ny {
                        let s = at(i + q, j + q) - at(i, j + q) - at(i + q, j) + at(i, j);
                        best = best.max(s * h * h);
                    }
                }
                best
            }
            _ => {
                // Higher dimensions: sample corner x = 0 only.
                diff.box_average(1, 1.0, q)
            }
        }
    }
}

/// Sampling controls for the ε-almost-period search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlmostPeriodOptions {
    /// Super-cell side lengths over which the sup in `x` is sampled.
    pub super_cell: Vec<f64>,
    /// Midpoint samples per unit length per axis.
    pub samples_per_unit: usize,
}

impl Default for AlmostPeriodOptions {
    fn default() -> Self {
        AlmostPeriodOptions { super_cell: vec![10.0], samples_per_unit: DEFAULT_SAMPLES_PER_UNIT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormMethod {
    ParsevalExact,
    BoxAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub value: f64,
    pub method: SeminormMethod,
    pub box_sizes: Vec<f64>,
    pub residual: f64,
}

/// Finite set of frequency vectors, deduplicated by canonical rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    dims: usize,
    resolution: f64,
    members: BTreeMap<Key, Vec<f64>>,
}

impl FrequencySet {
    pub fn new(dims: usize) -> Self {
        Self::with_resolution(dims, DEFAULT_RESOLUTION)
    }

    pub fn with_resolution(dims: usize, resolution: f64) -> Self {
        FrequencySet { dims, resolution, members: BTreeMap::new() }
    }

    pub fn from_members<I: IntoIterator<Item = Vec<f64>>>(dims: usize, members: I) -> Result<Self> {
        let mut s = FrequencySet::new(dims);
        for m in members {
            if m.len() != dims {
                return Err(Error::DimensionMismatch { expected: dims, got: m.len() });
            }
            s.insert(m);
        }
        Ok(s)
    }

    pub fn insert(&mut self, freq: Vec<f64>) -> bool {
        let key = key_of(&freq, self.resolution);
        if self.members.contains_key(&key) {
            false
        } else {
            self.members.insert(key, freq);
            true
        }
    }

    pub fn contains(&self, freq: &[f64]) -> bool {
        self.members.contains_key(&key_of(freq, self.resolution))
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.members.values().map(|v| v.as_slice())
    }

    pub fn is_subset(&self, other: &FrequencySet) -> bool {
        self.iter().all(|f| other.contains(f))
    }

    /// All combinations `sum n_j λ_j` with `sum |n_j| <= order`.
    pub fn group_closure(&self, order: usize, cap: usize) -> Result<FrequencySet> {
        if order == 0 {
            return Err(Error::InvalidArgument { name: "order", reason: "must be >= 1".into() });
        }
        let generators: Vec<Vec<f64>> = self.iter().map(|f| f.to_vec()).collect();
        let mut all = FrequencySet::with_resolution(self.dims, self.resolution);
        all.insert(vec![0.0; self.dims]);
        let mut frontier = vec![vec![0.0; self.dims]];
        for _ in 0..order {
            let mut next = Vec::new();
            for base in &frontier {
                for g in &generators {
                    for sign in [1.0, -1.0] {
                        let cand: Vec<f64> = base.iter().zip(g).map(|(b, x)| b + sign * x).collect();
                        if all.insert(cand.clone()) {
                            if all.len() > cap {
                                return Err(Error::ClosureTooLarge { cap });
                            }
                            next.push(cand);
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(all)
    }
}

// --- JSON forms -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    freq: Vec<f64>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalRepr {
    dims: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for ApSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignalRepr {
            dims: self.dims,
            terms: self
                .terms
                .values()
                .map(|t| TermRepr { freq: t.freq.clone(), re: t.amp.re, im: t.amp.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ApSignal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SignalRepr::deserialize(d)?;
        if repr.dims == 0 {
            return Err(serde::de::Error::custom("dims must be positive"));
        }
        ApSignal::from_terms(
            repr.dims,
            repr.terms.into_iter().map(|t| (t.freq, Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetRepr {
    dims: usize,
    members: Vec<Vec<f64>>,
}

impl Serialize for FrequencySet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetRepr { dims: self.dims, members: self.members.values().cloned().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrequencySet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SetRepr::deserialize(d)?;
        FrequencySet::from_members(repr.dims, repr.members).map_err(serde::de::Error::custom)
    }
}
