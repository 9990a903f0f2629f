//! Triebel-Lizorkin function and sequence norms, maximal functions and the
//! `s*` majorant, evaluated by quadrature on the periodic cell.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, pos_of};
use crate::frame::{Frame, FrequencyGrid};
use crate::generators::{dyadic_band, dyadic_coarse};
use crate::lattice::{mat_ba, to_f64, Band, Cone, IMat2, System};
use crate::transform::{redundancy_class, CoefficientMap, PeriodicSignal};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ab")]
    AbShear,
    #[serde(rename = "dyadic")]
    Dyadic,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        match s {
            "ab" => Ok(Family::AbShear),
            "dyadic" => Ok(Family::Dyadic),
            _ => Err(Error::InvalidParameter(format!("unknown family '{s}'"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::AbShear => "ab",
            Family::Dyadic => "dyadic",
        })
    }
}

/// Smoothness `alpha`, integrability `p`, summability `q` (`f64::INFINITY` for a sup).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub family: Family,
}

impl SpaceParams {
    pub fn new(alpha: f64, p: f64, q: f64, family: Family) -> Result<SpaceParams> {
        let s = SpaceParams { alpha, p, q, family };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be positive and finite, got {}", self.p)));
        }
        if !(self.q > 0.0) {
            return Err(Error::InvalidParameter(format!("q must be positive, got {}", self.q)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        Ok(())
    }
}

/// Exponent `r` and decay `n` of the `s*` majorant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SStarParams {
    pub r: f64,
    pub decay: f64,
}

impl SStarParams {
    /// True when `decay > 3 max(1, r/q, r/p)`.
    pub fn admissible_for(&self, space: &SpaceParams) -> bool {
        let m = 1f64.max(self.r / space.q).max(self.r / space.p);
        self.decay > 3.0 * m
    }
}

/// Real field sampled on an `n x n` grid over `[0,1)^2`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub n: usize,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(n: usize, values: Vec<f64>) -> GridField {
        assert_eq!(values.len(), n * n);
        GridField { n, values }
    }

    pub fn abs_of(f: &PeriodicSignal) -> GridField {
        GridField::new(f.n(), f.samples().iter().map(|c| c.norm()).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> GridField {
        GridField::new(self.n, self.values.par_iter().map(|&v| f(v)).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// `(mean |v|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s / self.values.len() as f64).powf(1.0 / p)
    }
}

/// Periodic 1-D window sums of half-width `h` along rows (`axis = 1`) or columns (`axis = 0`).
fn box_sum(values: &[f64], n: usize, h: usize, axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    let lines: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|line| {
            let get = |i: usize| if axis == 1 { values[line * n + i] } else { values[i * n + line] };
            let mut pre = vec![0.0; n + 1];
            for i in 0..n {
                pre[i + 1] = pre[i] + get(i);
            }
            (0..n)
                .map(|c| {
                    let a = c as i64 - h as i64;
                    let b = c as i64 + h as i64;
                    let mut s = 0.0;
                    if a < 0 {
                        s += pre[n] - pre[(n as i64 + a) as usize];
                        s += pre[(b + 1) as usize];
                    } else if b >= n as i64 {
                        s += pre[n] - pre[a as usize];
                        s += pre[(b + 1 - n as i64) as usize];
                    } else {
                        s += pre[(b + 1) as usize] - pre[a as usize];
                    }
                    s
                })
                .collect()
        })
        .collect();
    for (line, vals) in lines.into_iter().enumerate() {
        for (i, v) in vals.into_iter().enumerate() {
            if axis == 1 {
                out[line * n + i] = v;
            } else {
                out[i * n + line] = v;
            }
        }
    }
    out
}

/// Hardy-Littlewood maximal function over centered squares of half-width
/// `0, 1, 2, 4, ...` cells (below half the period) and the whole torus, with periodic wrap.
pub fn hl_max(f: &GridField) -> GridField {
    let n = f.n;
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let mut out = abs.clone();
    let mut h = 1;
    while 2 * h < n {
        let rows = box_sum(&abs, n, h, 1);
        let both = box_sum(&rows, n, h, 0);
        let area = ((2 * h + 1) * (2 * h + 1)) as f64;
        for (o, s) in out.iter_mut().zip(&both) {
            *o = o.max(s / area);
        }
        h *= 2;
    }
    // the whole torus is the largest ball
    let mean = abs.iter().sum::<f64>() / (n * n) as f64;
    out.iter_mut().for_each(|o| *o = o.max(mean));
    GridField::new(n, out)
}

fn weighted_sup(g: &GridField, weight: &[f64]) -> GridField {
    let n = g.n;
    let half = n / 2;
    let values = (0..n * n)
        .into_par_iter()
        .map(|x| {
            let (x0, x1) = (x / n, x % n);
            let mut best = 0.0f64;
            for d0 in 0..n {
                let r0 = ((x0 + n + half - d0) % n) * n;
                for d1 in 0..n {
                    let w = weight[d0 * n + d1];
                    let v = g.values[r0 + (x1 + n + half - d1) % n].abs() * w;
                    if v > best {
                        best = v;
                    }
                }
            }
            best
        })
        .collect();
    GridField::new(n, values)
}

fn offset_weights(n: usize, metric: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let half = n / 2;
    (0..n * n)
        .map(|i| {
            let y = [(i / n) as f64 - half as f64, (i % n) as f64 - half as f64];
            metric([y[0] / n as f64, y[1] / n as f64])
        })
        .collect()
}

/// Shear-anisotropic Peetre maximal function `sup_y |g(x-y)| / (1 + |B^l A^j y|)^{2 lambda}`
/// over all grid offsets `y` in `[-1/2, 1/2)^2`.
pub fn peetre_max(g: &GridField, band: &Band, lambda: f64) -> Result<GridField> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive".into()));
    }
    let chart = if band.is_coarse() { Cone::LowFrequency } else { band.charts()[0] };
    let m = to_f64(&mat_ba(band.j, band.shear, chart)?);
    let w = offset_weights(g.n, |y| {
        let z = [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]];
        (1.0 + z[0].hypot(z[1])).powf(-2.0 * lambda)
    });
    Ok(weighted_sup(g, &w))
}

/// Isotropic Peetre maximal function `sup_y |g(x-y)| / (1 + scale |y|)^{2 lambda}`.
pub fn peetre_isotropic(g: &GridField, scale: f64, lambda: f64) -> Result<GridField> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive".into()));
    }
    let w = offset_weights(g.n, |y| (1.0 + scale * y[0].hypot(y[1])).powf(-2.0 * lambda));
    Ok(weighted_sup(g, &w))
}

/// One term of a Littlewood-Paley norm: window samples and `log2` of its smoothness weight per unit `alpha`.
struct NormBand {
    weight_log2: f64,
    entries: Vec<(usize, f64)>,
}

fn ab_bands(frame: &Frame) -> (Vec<(usize, f64)>, Vec<NormBand>) {
    let mut coarse = Vec::new();
    let mut bands = Vec::new();
    for w in frame.windows() {
        let entries: Vec<(usize, f64)> = w.iter().map(|(i, v, _)| (i, v)).collect();
        if w.band.is_coarse() {
            coarse = entries;
        } else {
            bands.push(NormBand { weight_log2: 3.0 * w.band.j as f64, entries });
        }
    }
    (coarse, bands)
}

/// Top isotropic level so that the dyadic bands cover every grid frequency.
pub fn dyadic_levels(grid: &FrequencyGrid) -> u32 {
    let rmax = grid.n() as f64 / 2.0 * 2f64.sqrt();
    let mut nu = 0;
    while 2f64.powi(nu as i32) < rmax {
        nu += 1;
    }
    nu
}

fn dyadic_norm_bands(grid: &FrequencyGrid) -> (Vec<(usize, f64)>, Vec<NormBand>) {
    let mut coarse = Vec::new();
    for i in 0..grid.len() {
        let xi = grid.freq(i);
        let v = dyadic_coarse([xi[0] as f64, xi[1] as f64]);
        if v != 0.0 {
            coarse.push((i, v));
        }
    }
    let bands = (0..=dyadic_levels(grid))
        .map(|nu| {
            let s = 2f64.powi(-(nu as i32));
            let entries = (0..grid.len())
                .filter_map(|i| {
                    let xi = grid.freq(i);
                    let v = dyadic_band([xi[0] as f64 * s, xi[1] as f64 * s]);
                    (v != 0.0).then_some((i, v))
                })
                .collect();
            NormBand { weight_log2: nu as f64, entries }
        })
        .collect();
    (coarse, bands)
}

/// `|f * w|` on an `m x m` quadrature grid (spectrum zero-padded from the signal grid).
fn band_magnitude(f: &PeriodicSignal, entries: &[(usize, f64)], m: usize) -> Vec<f64> {
    let grid = f.grid();
    let mut spectrum = vec![ZERO; m * m];
    for &(i, v) in entries {
        let xi = grid.freq(i);
        spectrum[pos_of(xi[0], m) * m + pos_of(xi[1], m)] = f.spectrum()[i] * v;
    }
    fourier::inverse(&mut spectrum, m);
    spectrum.into_iter().map(|c| c.norm()).collect()
}

/// Quadrature settings for function norms.
#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    /// Quadrature grid side as a multiple of the signal grid side.
    pub oversample: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { oversample: 2 }
    }
}

fn aggregate_norm(f: &PeriodicSignal, params: &SpaceParams, coarse: &[(usize, f64)], bands: &[NormBand], opts: NormOptions) -> f64 {
    let m = f.n() * opts.oversample.max(1);
    let q = params.q;
    let active: Vec<&NormBand> = bands
        .iter()
        .filter(|b| b.entries.iter().any(|&(i, _)| f.spectrum()[i] != ZERO))
        .collect();
    let mut acc = vec![0.0; m * m];
    const CHUNK: usize = 8;
    for chunk in active.chunks(CHUNK) {
        let mags: Vec<(f64, Vec<f64>)> = chunk
            .par_iter()
            .map(|b| (2f64.powf(params.alpha * b.weight_log2), band_magnitude(f, &b.entries, m)))
            .collect();
        for (w, g) in mags {
            if q.is_infinite() {
                for (a, v) in acc.iter_mut().zip(&g) {
                    *a = f64::max(*a, w * v);
                }
            } else {
                for (a, v) in acc.iter_mut().zip(&g) {
                    *a += (w * v).powf(q);
                }
            }
        }
    }
    let inner = if q.is_infinite() { acc } else { acc.into_iter().map(|a| a.powf(1.0 / q)).collect() };
    let main = GridField::new(m, inner).lp_norm(params.p);
    let low = GridField::new(m, band_magnitude(f, coarse, m)).lp_norm(params.p);
    low + main
}

/// Prebuilt windows of one norm family on one grid.
pub struct NormContext {
    grid: FrequencyGrid,
    family: Family,
    coarse: Vec<(usize, f64)>,
    bands: Vec<NormBand>,
}

impl NormContext {
    /// `AbShear` sums the shearlet bands of `system` with weight `2^{3 j alpha}`;
    /// `Dyadic` sums isotropic bands with weight `2^{nu alpha}` and ignores `system`.
    pub fn new(family: Family, system: System, grid: FrequencyGrid) -> Result<NormContext> {
        let (coarse, bands) = match family {
            Family::AbShear => ab_bands(&Frame::full(system, grid)?),
            Family::Dyadic => dyadic_norm_bands(&grid),
        };
        Ok(NormContext { grid, family, coarse, bands })
    }

    pub fn from_frame(frame: &Frame) -> NormContext {
        let (coarse, bands) = ab_bands(frame);
        NormContext { grid: frame.grid, family: Family::AbShear, coarse, bands }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn norm(&self, f: &PeriodicSignal, params: &SpaceParams, opts: NormOptions) -> Result<f64> {
        params.validate()?;
        if f.grid() != self.grid {
            return Err(Error::InvalidParameter("signal grid differs from norm grid".into()));
        }
        if params.family != self.family {
            return Err(Error::InvalidParameter("parameter family differs from norm family".into()));
        }
        Ok(aggregate_norm(f, params, &self.coarse, &self.bands, opts))
    }
}

/// Triebel-Lizorkin function norm of a band-limited signal (see [`NormContext::new`]).
pub fn function_norm(f: &PeriodicSignal, params: &SpaceParams, system: System) -> Result<f64> {
    function_norm_with(f, params, system, NormOptions::default())
}

pub fn function_norm_with(f: &PeriodicSignal, params: &SpaceParams, system: System, opts: NormOptions) -> Result<f64> {
    params.validate()?;
    NormContext::new(params.family, system, f.grid())?.norm(f, params, opts)
}

/// Geometry of one block of cubes `L (Q_0 + k)`, `k` in `(Z/P)^2`.
#[derive(Clone, Debug)]
pub struct CubeGeometry {
    pub period: usize,
    /// Integer `L^{-1}`.
    pub inverse: IMat2,
    pub matrix: [[f64; 2]; 2],
    pub measure: f64,
    /// Smoothness weight is `2^{alpha * weight_log2}`.
    pub weight_log2: f64,
    /// Distance scale in the `s*` kernel.
    pub decay_scale: f64,
    /// Offsets addressing the same periodic cube.
    pub class: Vec<[usize; 2]>,
}

/// A sequence indexed by blocks of periodic cubes.
pub trait CubeSequence: Sized {
    fn geometries(&self) -> Vec<CubeGeometry>;
    fn block_values(&self) -> Vec<&[Complex64]>;
    fn with_block_values(&self, values: Vec<Vec<Complex64>>) -> Self;
}

impl CubeSequence for CoefficientMap {
    fn geometries(&self) -> Vec<CubeGeometry> {
        self.blocks()
            .map(|(band, b)| CubeGeometry {
                period: b.period,
                inverse: band.cube_inverse(),
                matrix: to_f64(&band.cube_matrix()),
                measure: band.measure_f64(),
                weight_log2: 3.0 * band.j as f64,
                decay_scale: 2f64.powi(band.j as i32),
                class: redundancy_class(band),
            })
            .collect()
    }

    fn block_values(&self) -> Vec<&[Complex64]> {
        self.blocks().map(|(_, b)| b.values.as_slice()).collect()
    }

    fn with_block_values(&self, values: Vec<Vec<Complex64>>) -> Self {
        let mut out = self.clone();
        for ((_, b), v) in out.blocks_mut().zip(values) {
            b.values = v;
        }
        out
    }
}

/// Isotropic sequence on dyadic cubes `2^{-nu}(Q_0 + k)`, `k` in `(Z/2^nu)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSequence {
    pub levels: Vec<Vec<Complex64>>,
}

impl DyadicSequence {
    pub fn zeros(nu_max: u32) -> DyadicSequence {
        DyadicSequence { levels: (0..=nu_max).map(|nu| vec![ZERO; 1 << (2 * nu)]).collect() }
    }

    pub fn set(&mut self, nu: u32, k: [i64; 2], v: Complex64) {
        let p = 1usize << nu;
        self.levels[nu as usize][pos_of(k[0], p) * p + pos_of(k[1], p)] = v;
    }

    pub fn get(&self, nu: u32, k: [i64; 2]) -> Complex64 {
        let p = 1usize << nu;
        self.levels[nu as usize][pos_of(k[0], p) * p + pos_of(k[1], p)]
    }
}

impl CubeSequence for DyadicSequence {
    fn geometries(&self) -> Vec<CubeGeometry> {
        (0..self.levels.len())
            .map(|nu| {
                let p = 1usize << nu;
                let s = 1.0 / p as f64;
                CubeGeometry {
                    period: p,
                    inverse: [[p as i64, 0], [0, p as i64]],
                    matrix: [[s, 0.0], [0.0, s]],
                    measure: s * s,
                    weight_log2: nu as f64,
                    decay_scale: p as f64,
                    class: vec![[0, 0]],
                }
            })
            .collect()
    }

    fn block_values(&self) -> Vec<&[Complex64]> {
        self.levels.iter().map(|v| v.as_slice()).collect()
    }

    fn with_block_values(&self, values: Vec<Vec<Complex64>>) -> Self {
        DyadicSequence { levels: values }
    }
}

/// Per-cube class aggregate of `|s|^e` (mean) or `|s|` (max when `e` is infinite).
fn class_values(g: &CubeGeometry, values: &[Complex64], e: f64) -> Vec<f64> {
    let p = g.period;
    let inv = 1.0 / g.class.len() as f64;
    (0..p * p)
        .map(|i| {
            let (a, b) = (i / p, i % p);
            let it = g.class.iter().map(|h| values[((a + h[0]) % p) * p + (b + h[1]) % p].norm());
            if e.is_infinite() {
                it.fold(0.0, f64::max)
            } else {
                it.map(|v| v.powf(e)).sum::<f64>() * inv
            }
        })
        .collect()
}

#[inline]
fn cube_slot(g: &CubeGeometry, x: [f64; 2]) -> usize {
    let p = g.period as i64;
    let y0 = g.inverse[0][0] as f64 * x[0] + g.inverse[0][1] as f64 * x[1];
    let y1 = g.inverse[1][0] as f64 * x[0] + g.inverse[1][1] as f64 * x[1];
    let k0 = (y0.floor() as i64).rem_euclid(p) as usize;
    let k1 = (y1.floor() as i64).rem_euclid(p) as usize;
    k0 * p as usize + k1
}

/// Finest quadrature side that resolves every cube of the sequence (two samples across the short side).
pub fn default_sequence_quadrature<S: CubeSequence>(s: &S) -> usize {
    let geoms = s.geometries();
    let finest = geoms
        .iter()
        .zip(s.block_values())
        .filter(|(_, v)| v.iter().any(|c| *c != ZERO))
        .map(|(g, _)| {
            let m = g.matrix;
            let short = m[0][0].abs().min(m[1][1].abs()).max(1e-300);
            (1.0 / short).ceil() as usize
        })
        .max()
        .unwrap_or(1);
    (2 * finest).next_power_of_two().max(64)
}

/// Block-wise field `x -> class value of the cube containing x` at the quadrature midpoints.
fn cube_field(g: &CubeGeometry, cv: &[f64], m: usize) -> Vec<f64> {
    (0..m * m)
        .into_par_iter()
        .map(|i| {
            let x = [((i / m) as f64 + 0.5) / m as f64, ((i % m) as f64 + 0.5) / m as f64];
            cv[cube_slot(g, x)]
        })
        .collect()
}

/// Triebel-Lizorkin sequence norm `|| (sum_Q (|Q|^{-alpha}|s_Q| chi~_Q)^q)^{1/q} ||_p`
/// by midpoint quadrature on an `m x m` grid.
pub fn sequence_norm_with<S: CubeSequence>(s: &S, params: &SpaceParams, m: usize) -> Result<f64> {
    params.validate()?;
    let q = params.q;
    let geoms = s.geometries();
    let vals = s.block_values();
    let mut acc = vec![0.0; m * m];
    let mut any = false;
    for (g, v) in geoms.iter().zip(vals) {
        if v.iter().all(|c| *c == ZERO) {
            continue;
        }
        any = true;
        let w = 2f64.powf(params.alpha * g.weight_log2) / g.measure.sqrt();
        let cv = class_values(g, v, q);
        let field = cube_field(g, &cv, m);
        if q.is_infinite() {
            acc.par_iter_mut().zip(&field).for_each(|(a, f)| *a = f64::max(*a, w * f));
        } else {
            let wq = w.powf(q);
            acc.par_iter_mut().zip(&field).for_each(|(a, f)| *a += wq * f);
        }
    }
    if !any {
        return Ok(0.0);
    }
    let inner: Vec<f64> = if q.is_infinite() { acc } else { acc.into_iter().map(|a| a.powf(1.0 / q)).collect() };
    Ok(GridField::new(m, inner).lp_norm(params.p))
}

pub fn sequence_norm<S: CubeSequence>(s: &S, params: &SpaceParams) -> Result<f64> {
    sequence_norm_with(s, params, default_sequence_quadrature(s))
}

fn torus_kernel(g: &CubeGeometry, decay: f64) -> Vec<f64> {
    let p = g.period;
    let m = g.matrix;
    let mut k = vec![0.0; p * p];
    for a in 0..p {
        for b in 0..p {
            let d = [a as f64, b as f64];
            let mut v = [m[0][0] * d[0] + m[0][1] * d[1], m[1][0] * d[0] + m[1][1] * d[1]];
            v[0] -= v[0].round();
            v[1] -= v[1].round();
            let dist = v[0].hypot(v[1]);
            k[a * p + b] = if dist < 1e-12 { 0.0 } else { (1.0 + g.decay_scale * dist).powf(-decay) };
        }
    }
    k
}

fn circular_convolve(a: &[f64], k: &[f64], p: usize) -> Vec<f64> {
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fk: Vec<Complex64> = k.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fourier::forward(&mut fa, p);
    fourier::forward(&mut fk, p);
    for (x, y) in fa.iter_mut().zip(&fk) {
        *x *= y;
    }
    fourier::inverse(&mut fa, p);
    let s = 1.0 / (p * p) as f64;
    fa.into_iter().map(|c| (c.re * s).max(0.0)).collect()
}

/// Majorant `(s*)_Q = (sum_P |s_P|^r / (1 + 2^j |x_Q - x_P|)^N)^{1/r}` over cubes of the same
/// block, with torus distances. Each periodic cube is counted once (class-averaged).
pub fn s_star<S: CubeSequence>(s: &S, params: &SStarParams) -> Result<S> {
    if !(params.r > 0.0) || !(params.decay > 0.0) {
        return Err(Error::InvalidParameter("r and decay must be positive".into()));
    }
    let geoms = s.geometries();
    let vals = s.block_values();
    let out: Vec<Vec<Complex64>> = geoms
        .par_iter()
        .zip(vals.par_iter())
        .map(|(g, v)| {
            let p = g.period;
            let a: Vec<f64> = v.iter().map(|c| c.norm().powf(params.r)).collect();
            let own = class_values(g, v, params.r);
            let conv = if a.iter().all(|&x| x == 0.0) {
                vec![0.0; p * p]
            } else {
                circular_convolve(&a, &torus_kernel(g, params.decay), p)
            };
            let inv = 1.0 / g.class.len() as f64;
            own.iter()
                .zip(&conv)
                .map(|(o, c)| Complex64::new((o + c * inv).powf(1.0 / params.r), 0.0))
                .collect()
        })
        .collect();
    Ok(s.with_block_values(out))
}

/// Largest pointwise ratio `(s*)_Q / [M(sum_P |s_P|^a chi_P)(x)]^{1/a}` over quadrature
/// points `x` in `Q`, per block; the maximum over blocks is returned.
pub fn s_star_pointwise_constant<S: CubeSequence>(s: &S, params: &SStarParams, a: f64, m: usize) -> Result<f64> {
    let star = s_star(s, params)?;
    let geoms = s.geometries();
    let mut best = 0.0f64;
    for ((g, v), sv) in geoms.iter().zip(s.block_values()).zip(star.block_values()) {
        if v.iter().all(|c| *c == ZERO) {
            continue;
        }
        let cv = class_values(g, v, a);
        let field = GridField::new(m, cube_field(g, &cv, m));
        let hl = hl_max(&field);
        let sv_abs: Vec<f64> = sv.iter().map(|c| c.re).collect();
        let star_field = cube_field(g, &sv_abs, m);
        for (st, h) in star_field.iter().zip(&hl.values) {
            if *st > 0.0 && *h > 0.0 {
                best = best.max(st / h.powf(1.0 / a));
            }
        }
    }
    Ok(best)
}

/// `|| (sum_i |f_i|^q)^{1/q} ||_p` for fields on a common grid.
pub fn mixed_norm(fields: &[GridField], p: f64, q: f64) -> f64 {
    let n = fields[0].n;
    let inner: Vec<f64> = (0..n * n)
        .map(|x| {
            if q.is_infinite() {
                fields.iter().map(|f| f.values[x].abs()).fold(0.0, f64::max)
            } else {
                fields.iter().map(|f| f.values[x].abs().powf(q)).sum::<f64>().powf(1.0 / q)
            }
        })
        .collect();
    GridField::new(n, inner).lp_norm(p)
}

/// Ratio `||(sum (M f_i)^q)^{1/q}||_p / ||(sum |f_i|^q)^{1/q}||_p`.
pub fn fefferman_stein_ratio(fields: &[GridField], p: f64, q: f64) -> f64 {
    let maxed: Vec<GridField> = fields.iter().map(hl_max).collect();
    mixed_norm(&maxed, p, q) / mixed_norm(fields, p, q)
}

/// Largest ratio `peetre_max(g) / (M g^{1/lambda})^lambda` over the grid.
pub fn peetre_ratio(g: &GridField, band: &Band, lambda: f64) -> Result<f64> {
    let pm = peetre_max(g, band, lambda)?;
    let hl = hl_max(&g.map(|v| v.abs().powf(1.0 / lambda)));
    Ok(pm
        .values
        .iter()
        .zip(&hl.values)
        .filter(|(_, h)| **h > 0.0)
        .map(|(a, h)| a / h.powf(lambda))
        .fold(0.0, f64::max))
}

/// Largest ratio `g*_lambda / (M |g|^{1/lambda})^lambda` for the isotropic Peetre function at `scale`.
pub fn isotropic_peetre_ratio(g: &GridField, scale: f64, lambda: f64) -> Result<f64> {
    let pm = peetre_isotropic(g, scale, lambda)?;
    let hl = hl_max(&g.map(|v| v.abs().powf(1.0 / lambda)));
    Ok(pm
        .values
        .iter()
        .zip(&hl.values)
        .filter(|(_, h)| **h > 0.0)
        .map(|(a, h)| a / h.powf(lambda))
        .fold(0.0, f64::max))
}

/// Largest `|xi|` in the spectrum of `g` (0 for the zero signal).
pub fn spectral_radius(g: &PeriodicSignal) -> f64 {
    let grid = g.grid();
    (0..grid.len())
        .filter(|&i| g.spectrum()[i] != ZERO)
        .map(|i| {
            let xi = grid.freq(i);
            (xi[0] as f64).hypot(xi[1] as f64)
        })
        .fold(0.0, f64::max)
}

/// Largest ratio `(R^{-1} d g / d x1)*_lambda / g*_lambda`, with `R = 2 pi max |xi|` over the
/// spectrum of `g` and the isotropic Peetre function at scale `max |xi|`.
pub fn derivative_peetre_ratio(g: &PeriodicSignal, lambda: f64) -> Result<f64> {
    let grid = g.grid();
    let radius = spectral_radius(g);
    if radius == 0.0 {
        return Ok(0.0);
    }
    let spectrum: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let xi = grid.freq(i);
            g.spectrum()[i] * Complex64::new(0.0, 2.0 * std::f64::consts::PI * xi[0] as f64) / (2.0 * std::f64::consts::PI * radius)
        })
        .collect();
    let dg = PeriodicSignal::from_spectrum(grid, spectrum)?;
    let num = peetre_isotropic(&GridField::abs_of(&dg), radius, lambda)?;
    let den = peetre_isotropic(&GridField::abs_of(g), radius, lambda)?;
    Ok(num
        .values
        .iter()
        .zip(&den.values)
        .filter(|(_, d)| **d > 0.0)
        .map(|(a, d)| a / d)
        .fold(0.0, f64::max))
}
