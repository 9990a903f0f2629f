//! Analysis and synthesis operators on 1-periodic band-limited signals.
//!
//! A band with translation matrix `L` and phase period `P` has coefficients
//! `c_k = a sum_xi f(xi) w(xi) e^{2 pi i xi L k}` for `k` in `(Z/P)^2`. Since
//! `P L` is an integer matrix, binning `f w` by `eta = xi P L mod P` turns the
//! sum into one `P x P` inverse DFT. Synthesis is the weighted adjoint.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{self, pos_of};
use crate::frame::{Frame, FrequencyGrid, SpectralWindow};
use crate::lattice::{Band, Cone, IMat2, ShearletIndex, System};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Coefficients below this magnitude count as absent.
pub const SPARSE_EPS: f64 = 1e-14;

/// `N x N` samples `f(n/N)` of a 1-periodic band-limited function and its Fourier coefficients.
///
/// `samples[a*N + b] = sum_xi spectrum(xi) e^{2 pi i xi.(a,b)/N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSignal {
    grid: FrequencyGrid,
    samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

impl PeriodicSignal {
    pub fn zeros(grid: FrequencyGrid) -> PeriodicSignal {
        PeriodicSignal { grid, samples: vec![ZERO; grid.len()], spectrum: vec![ZERO; grid.len()] }
    }

    pub fn from_spectrum(grid: FrequencyGrid, spectrum: Vec<Complex64>) -> Result<PeriodicSignal> {
        if spectrum.len() != grid.len() {
            return Err(Error::Format(format!("spectrum length {} for grid {}", spectrum.len(), grid.n())));
        }
        let mut samples = spectrum.clone();
        fourier::inverse(&mut samples, grid.n());
        Ok(PeriodicSignal { grid, samples, spectrum })
    }

    pub fn from_samples(grid: FrequencyGrid, samples: Vec<Complex64>) -> Result<PeriodicSignal> {
        if samples.len() != grid.len() {
            return Err(Error::Format(format!("sample count {} for grid {}", samples.len(), grid.n())));
        }
        let mut spectrum = samples.clone();
        fourier::forward(&mut spectrum, grid.n());
        let s = 1.0 / grid.len() as f64;
        spectrum.iter_mut().for_each(|c| *c *= s);
        Ok(PeriodicSignal { grid, samples, spectrum })
    }

    /// Single exponential `c e^{2 pi i xi.x}`.
    pub fn exponential(grid: FrequencyGrid, xi: [i64; 2], c: Complex64) -> Result<PeriodicSignal> {
        let flat = grid
            .flat(xi)
            .ok_or_else(|| Error::InvalidParameter(format!("frequency {xi:?} outside grid")))?;
        let mut spectrum = vec![ZERO; grid.len()];
        spectrum[flat] = c;
        PeriodicSignal::from_spectrum(grid, spectrum)
    }

    /// Unit-modulus random-phase spectrum on `|xi|_inf <= radius` (whole grid for `None`).
    pub fn random(grid: FrequencyGrid, radius: Option<i64>, rng: &mut ChaCha8Rng) -> PeriodicSignal {
        let spectrum = (0..grid.len())
            .map(|i| {
                let xi = grid.freq(i);
                let phase: f64 = rng.gen();
                let inside = radius.map_or(true, |r| xi[0].abs().max(xi[1].abs()) <= r);
                if inside {
                    Complex64::from_polar(1.0, 2.0 * PI * phase)
                } else {
                    ZERO
                }
            })
            .collect();
        PeriodicSignal::from_spectrum(grid, spectrum).expect("grid length")
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// `||f||_2^2` over the unit cell, from the spectrum.
    pub fn norm_sq(&self) -> f64 {
        self.spectrum.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `||f||_2^2` by the rectangle rule on the samples.
    pub fn norm_sq_samples(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.len() as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Exact evaluation at an arbitrary point by direct summation.
    pub fn evaluate(&self, x: [f64; 2]) -> Complex64 {
        let mut s = ZERO;
        for (i, c) in self.spectrum.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let xi = self.grid.freq(i);
            s += c * Complex64::from_polar(1.0, 2.0 * PI * (xi[0] as f64 * x[0] + xi[1] as f64 * x[1]));
        }
        s
    }

    /// `f(. - x0)`.
    pub fn translate(&self, x0: [f64; 2]) -> PeriodicSignal {
        let spectrum = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let xi = self.grid.freq(i);
                c * Complex64::from_polar(1.0, -2.0 * PI * (xi[0] as f64 * x0[0] + xi[1] as f64 * x0[1]))
            })
            .collect();
        PeriodicSignal::from_spectrum(self.grid, spectrum).expect("grid length")
    }

    /// `a f + b g`.
    pub fn combine(a: Complex64, f: &PeriodicSignal, b: Complex64, g: &PeriodicSignal) -> Result<PeriodicSignal> {
        if f.grid != g.grid {
            return Err(Error::InvalidParameter("signals on different grids".into()));
        }
        let spectrum = f.spectrum.iter().zip(&g.spectrum).map(|(x, y)| a * x + b * y).collect();
        PeriodicSignal::from_spectrum(f.grid, spectrum)
    }

    /// Same function on a finer grid (zero padding of the spectrum).
    pub fn refine(&self, grid: FrequencyGrid) -> Result<PeriodicSignal> {
        if grid.n() < self.n() {
            return Err(Error::InvalidParameter("refinement must not shrink the grid".into()));
        }
        let mut spectrum = vec![ZERO; grid.len()];
        for (i, c) in self.spectrum.iter().enumerate() {
            if *c != ZERO {
                spectrum[grid.flat(self.grid.freq(i)).expect("finer grid")] = *c;
            }
        }
        PeriodicSignal::from_spectrum(grid, spectrum)
    }
}

/// Coefficients of one band on its `P x P` translation lattice, row-major in `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub period: usize,
    pub weight: f64,
    pub values: Vec<Complex64>,
}

/// Coefficients indexed by band and translation, with the bands' redundancy weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMap {
    pub system: System,
    pub j_max: u32,
    blocks: BTreeMap<Band, Block>,
}

impl CoefficientMap {
    pub fn new(system: System, j_max: u32) -> CoefficientMap {
        CoefficientMap { system, j_max, blocks: BTreeMap::new() }
    }

    fn check_band(&self, band: &Band) -> Result<()> {
        if band.system != self.system {
            return Err(Error::InvalidParameter(format!("band {band:?} belongs to another system")));
        }
        if band.j > self.j_max {
            return Err(Error::ScaleExceedsGrid { j: band.j, j_max: self.j_max });
        }
        Ok(())
    }

    pub fn insert_block(&mut self, band: Band, values: Vec<Complex64>) -> Result<()> {
        self.check_band(&band)?;
        let p = band.period();
        if values.len() != p * p {
            return Err(Error::Format(format!("block of {} values for period {p}", values.len())));
        }
        self.blocks.insert(band, Block { period: p, weight: band.weight(), values });
        Ok(())
    }

    fn block_mut(&mut self, band: Band) -> Result<&mut Block> {
        self.check_band(&band)?;
        let p = band.period();
        Ok(self
            .blocks
            .entry(band)
            .or_insert_with(|| Block { period: p, weight: band.weight(), values: vec![ZERO; p * p] }))
    }

    pub fn block(&self, band: &Band) -> Option<&Block> {
        self.blocks.get(band)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Band, &Block)> {
        self.blocks.iter()
    }

    pub fn blocks_mut(&mut self) -> impl Iterator<Item = (&Band, &mut Block)> {
        self.blocks.iter_mut()
    }

    fn slot(band: &Band, k: [i64; 2]) -> usize {
        let p = band.period();
        pos_of(k[0], p) * p + pos_of(k[1], p)
    }

    /// Coefficient at an index; `k` is reduced modulo the band period.
    pub fn get(&self, index: &ShearletIndex) -> Complex64 {
        self.blocks.get(&index.band).map_or(ZERO, |b| b.values[Self::slot(&index.band, index.k)])
    }

    pub fn set(&mut self, index: &ShearletIndex, value: Complex64) -> Result<()> {
        let slot = Self::slot(&index.band, index.k);
        self.block_mut(index.band)?.values[slot] = value;
        Ok(())
    }

    /// Sets every lattice index that addresses the same periodic cube as `index`.
    pub fn set_cube(&mut self, index: &ShearletIndex, value: Complex64) -> Result<()> {
        let p = index.band.period();
        let base = [pos_of(index.k[0], p), pos_of(index.k[1], p)];
        let class = redundancy_class(&index.band);
        let block = self.block_mut(index.band)?;
        for h in class {
            block.values[((base[0] + h[0]) % p) * p + (base[1] + h[1]) % p] = value;
        }
        Ok(())
    }

    /// Entries with magnitude at least [`SPARSE_EPS`].
    pub fn iter(&self) -> impl Iterator<Item = (ShearletIndex, Complex64)> + '_ {
        self.blocks.iter().flat_map(|(band, b)| {
            b.values.iter().enumerate().filter(|(_, c)| c.norm() >= SPARSE_EPS).map(move |(i, c)| {
                let k = [(i / b.period) as i64, (i % b.period) as i64];
                (ShearletIndex { band: *band, k }, *c)
            })
        })
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_b w_b sum_k |c_k|^2`.
    pub fn weighted_energy(&self) -> f64 {
        self.blocks.values().map(|b| b.weight * b.values.iter().map(|c| c.norm_sqr()).sum::<f64>()).sum()
    }

    /// `sum_b w_b sum_k c_k conj(d_k)`.
    pub fn weighted_inner(&self, other: &CoefficientMap) -> Complex64 {
        let mut s = ZERO;
        for (band, b) in &self.blocks {
            if let Some(o) = other.blocks.get(band) {
                let t: Complex64 = b.values.iter().zip(&o.values).map(|(x, y)| x * y.conj()).sum();
                s += t * b.weight;
            }
        }
        s
    }

    pub fn scaled(&self, a: Complex64) -> CoefficientMap {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            b.values.iter_mut().for_each(|c| *c *= a);
        }
        out
    }
}

/// Lattice offsets `h` in `(Z/P)^2` with `L h` integral: indices `k` and `k + h`
/// address the same translate on the periodic domain.
pub fn redundancy_class(band: &Band) -> Vec<[usize; 2]> {
    let p = band.period() as i64;
    let inv = band.cube_inverse();
    let gens = [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]];
    let mut seen = vec![false; (p * p) as usize];
    let mut out = vec![[0usize, 0usize]];
    seen[0] = true;
    let mut i = 0;
    while i < out.len() {
        let h = out[i];
        for g in &gens {
            let n = [
                (h[0] as i64 + g[0]).rem_euclid(p) as usize,
                (h[1] as i64 + g[1]).rem_euclid(p) as usize,
            ];
            let s = n[0] * p as usize + n[1];
            if !seen[s] {
                seen[s] = true;
                out.push(n);
            }
        }
        i += 1;
    }
    out.sort();
    out
}

#[inline]
fn eta(xi: [i64; 2], m: &IMat2, p: usize) -> usize {
    let e0 = xi[0] * m[0][0] + xi[1] * m[1][0];
    let e1 = xi[0] * m[0][1] + xi[1] * m[1][1];
    pos_of(e0, p) * p + pos_of(e1, p)
}

/// Bins `g(xi) = f(xi) w(xi)` by phase class.
fn bin_band(window: &SpectralWindow, grid: &FrequencyGrid, spectrum: &[Complex64]) -> Vec<Complex64> {
    let p = window.period;
    let mut g = vec![ZERO; p * p];
    for part in &window.parts {
        let m = window.band.phase_matrix(part.chart);
        for &(i, v) in &part.entries {
            g[eta(grid.freq(i), &m, p)] += spectrum[i] * v;
        }
    }
    g
}

fn analyze_band(window: &SpectralWindow, f: &PeriodicSignal) -> Vec<Complex64> {
    let p = window.period;
    let mut g = bin_band(window, &f.grid, &f.spectrum);
    fourier::inverse(&mut g, p);
    let a = window.normalization;
    g.iter_mut().for_each(|c| *c *= a);
    g
}

impl Frame {
    /// Analysis operator.
    pub fn analyze(&self, f: &PeriodicSignal) -> Result<CoefficientMap> {
        if f.grid != self.grid {
            return Err(Error::InvalidParameter("signal grid differs from frame grid".into()));
        }
        let blocks: Vec<(Band, Vec<Complex64>)> =
            self.windows().par_iter().map(|w| (w.band, analyze_band(w, f))).collect();
        let mut out = CoefficientMap::new(self.system, self.j_max);
        for (band, values) in blocks {
            out.insert_block(band, values)?;
        }
        Ok(out)
    }

    /// Weighted synthesis operator (adjoint of [`Frame::analyze`] in the weighted inner product).
    pub fn synthesize(&self, c: &CoefficientMap) -> Result<PeriodicSignal> {
        if c.system != self.system {
            return Err(Error::InvalidParameter("coefficient system differs from frame system".into()));
        }
        let mut jobs = Vec::new();
        for (band, block) in c.blocks() {
            let w = self.window(band).ok_or_else(|| {
                Error::InvalidParameter(format!("band {band:?} not present on grid {}", self.grid.n()))
            })?;
            jobs.push((w, block));
        }
        let grid = self.grid;
        let parts: Vec<Vec<(usize, Complex64)>> = jobs
            .par_iter()
            .map(|(w, block)| {
                let p = w.period;
                let mut ch = block.values.clone();
                fourier::forward(&mut ch, p);
                let s = w.weight * w.normalization;
                let mut out = Vec::with_capacity(w.nonzero_count());
                for part in &w.parts {
                    let m = w.band.phase_matrix(part.chart);
                    for &(i, v) in &part.entries {
                        out.push((i, ch[eta(grid.freq(i), &m, p)] * (s * v)));
                    }
                }
                out
            })
            .collect();
        let mut spectrum = vec![ZERO; grid.len()];
        for part in parts {
            for (i, v) in part {
                spectrum[i] += v;
            }
        }
        PeriodicSignal::from_spectrum(grid, spectrum)
    }
}

/// `S_psi f` with the full scale range when `j_max` is the grid's top scale.
pub fn analyze(f: &PeriodicSignal, system: System, j_max: u32) -> Result<CoefficientMap> {
    Frame::new(system, f.grid(), j_max)?.analyze(f)
}

/// `T_psi c` on `grid`.
pub fn synthesize(c: &CoefficientMap, grid: FrequencyGrid) -> Result<PeriodicSignal> {
    Frame::new(c.system, grid, c.j_max)?.synthesize(c)
}

/// `f * conj-reflected window`: spectrum multiplied by the (real) window.
pub fn band_convolve(f: &PeriodicSignal, window: &SpectralWindow) -> PeriodicSignal {
    let mut spectrum = vec![ZERO; f.grid.len()];
    for (i, v, _) in window.iter() {
        spectrum[i] = f.spectrum[i] * v;
    }
    PeriodicSignal::from_spectrum(f.grid, spectrum).expect("grid length")
}

/// Relative residual of `f = sum_b f * w_b~ * w_b` including the coarse term.
pub fn littlewood_paley_check(f: &PeriodicSignal, frame: &Frame) -> Result<f64> {
    if frame.system != System::SmoothParseval {
        return Err(Error::InvalidParameter("reproducing identity needs the smooth system".into()));
    }
    let mut spectrum = vec![ZERO; f.grid.len()];
    for w in frame.windows() {
        let once = band_convolve(f, w);
        for (i, v, _) in w.iter() {
            spectrum[i] += once.spectrum[i] * v;
        }
    }
    let err: f64 = spectrum.iter().zip(&f.spectrum).map(|(a, b)| (a - b).norm_sqr()).sum();
    let nf = f.norm_sq();
    Ok(if nf == 0.0 { err.sqrt() } else { (err / nf).sqrt() })
}

/// Samples `g(L k)` on the band lattice for `g` supported on one chart of the window.
fn lattice_samples(window: &SpectralWindow, chart: Cone, g: &PeriodicSignal) -> Vec<Complex64> {
    let p = window.period;
    let m = window.band.phase_matrix(chart);
    let mut out = vec![ZERO; p * p];
    for (i, c) in g.spectrum.iter().enumerate() {
        if *c != ZERO {
            out[eta(g.grid.freq(i), &m, p)] += c;
        }
    }
    fourier::inverse(&mut out, p);
    out
}

/// Max residual of `g * h = P^{-2} sum_{k in (Z/P)^2} g(L k) h(. - L k)` on the grid.
///
/// `g` must be supported in one fundamental cell of the band's dual lattice.
pub fn sampling_identity(window: &SpectralWindow, chart: Cone, g: &PeriodicSignal, h: &PeriodicSignal) -> Result<f64> {
    if g.grid != h.grid {
        return Err(Error::InvalidParameter("signals on different grids".into()));
    }
    let p = window.period;
    let m = window.band.phase_matrix(chart);
    let mut gk = lattice_samples(window, chart, g);
    fourier::forward(&mut gk, p);
    let scale = 1.0 / (p * p) as f64;
    let mut lhs = vec![ZERO; g.grid.len()];
    let mut rhs = vec![ZERO; g.grid.len()];
    for i in 0..g.grid.len() {
        lhs[i] = g.spectrum[i] * h.spectrum[i];
        if h.spectrum[i] != ZERO {
            rhs[i] = h.spectrum[i] * gk[eta(g.grid.freq(i), &m, p)] * scale;
        }
    }
    let l = PeriodicSignal::from_spectrum(g.grid, lhs)?;
    let r = PeriodicSignal::from_spectrum(g.grid, rhs)?;
    Ok(l.samples.iter().zip(&r.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Random band-limited signal with spectrum `window * random phase` on one chart part.
pub fn random_in_band(window: &SpectralWindow, chart: Cone, grid: FrequencyGrid, rng: &mut ChaCha8Rng) -> PeriodicSignal {
    let mut spectrum = vec![ZERO; grid.len()];
    if let Some(part) = window.parts.iter().find(|p| p.chart == chart) {
        for &(i, v) in &part.entries {
            let a: f64 = rng.gen_range(0.5..1.5);
            spectrum[i] = Complex64::from_polar(a * v, 2.0 * PI * rng.gen::<f64>());
        }
    }
    PeriodicSignal::from_spectrum(grid, spectrum).expect("grid length")
}

/// Sampling identity for random `g, h` in the band's first chart.
pub fn sampling_identity_check(window: &SpectralWindow, grid: FrequencyGrid, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = window.band.charts()[0];
    let g = random_in_band(window, chart, grid, &mut rng);
    let h = random_in_band(window, chart, grid, &mut rng);
    sampling_identity(window, chart, &g, &h)
}
