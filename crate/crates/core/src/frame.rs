//! Sampled frequency windows for the cone-projected and smooth Parseval systems.

use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{freq_of, pos_of};
use crate::generators::{meyer_lowpass, meyer_lowpass_2d, phi_coarse_hat, psi1_hat, psi2_hat, w_hat_sq};
use crate::lattice::{all_cones, enumerate_bands, Band, Cone, System};

/// `N x N` integer frequency lattice for 1-periodic band-limited signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencyGrid {
    n: usize,
    j_max: u32,
}

impl FrequencyGrid {
    /// `n` must be a power of two. The top scale is the least `J` with `4^J >= n`,
    /// so every grid frequency is covered once the top scale is closed.
    pub fn new(n: usize) -> Result<FrequencyGrid> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        let mut j = 0;
        while 4usize.pow(j) < n {
            j += 1;
        }
        Ok(FrequencyGrid { n, j_max: j })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn freq(&self, flat: usize) -> [i64; 2] {
        [freq_of(flat / self.n, self.n), freq_of(flat % self.n, self.n)]
    }

    pub fn contains(&self, xi: [i64; 2]) -> bool {
        let h = (self.n / 2) as i64;
        (-h..h).contains(&xi[0]) && (-h..h).contains(&xi[1])
    }

    pub fn flat(&self, xi: [i64; 2]) -> Option<usize> {
        if self.contains(xi) {
            Some(pos_of(xi[0], self.n) * self.n + pos_of(xi[1], self.n))
        } else {
            None
        }
    }
}

/// Cone classification of a frequency; the diagonal seam goes to the horizontal cone.
pub fn cone_of(xi: [f64; 2]) -> Cone {
    let (a, b) = (xi[0].abs(), xi[1].abs());
    if a >= 0.125 && b <= a {
        Cone::Horizontal
    } else if b >= 0.125 && a < b {
        Cone::Vertical
    } else {
        Cone::LowFrequency
    }
}

fn swap(xi: [f64; 2]) -> [f64; 2] {
    [xi[1], xi[0]]
}

/// Horizontal-chart window at `xi` (chart coordinates), without cone mask.
fn chart_value(band: &Band, xi: [f64; 2], closed: bool) -> f64 {
    if xi[0] == 0.0 {
        return 0.0;
    }
    let scale = 4f64.powi(band.j as i32);
    let ang = psi2_hat((1u64 << band.j) as f64 * xi[1] / xi[0] - band.shear as f64);
    if ang == 0.0 {
        return 0.0;
    }
    let rad = match band.system {
        System::ConeProjected => {
            let w = xi[0] / scale;
            if closed {
                (1.0 - meyer_lowpass(w).powi(2)).max(0.0).sqrt()
            } else {
                psi1_hat(w)
            }
        }
        System::SmoothParseval => {
            let w = [xi[0] / scale, xi[1] / scale];
            if closed {
                (1.0 - meyer_lowpass_2d(w).powi(2)).max(0.0).sqrt()
            } else {
                w_hat_sq(w).sqrt()
            }
        }
    };
    rad * ang
}

/// Window value of `band` at a real frequency, with the chart whose phase applies.
///
/// `top` is the closing scale: a band at that scale uses the telescoping tail
/// instead of its raw radial window.
pub fn band_value(band: &Band, xi: [f64; 2], top: Option<u32>) -> (f64, Cone) {
    let closed = top == Some(band.j) && !band.is_coarse();
    match (band.system, band.cone) {
        (System::ConeProjected, Cone::LowFrequency) => {
            let inside = xi[0].abs() <= 0.125 && xi[1].abs() <= 0.125;
            let v = if inside { phi_coarse_hat(xi) } else { 0.0 };
            (v, Cone::LowFrequency)
        }
        (System::SmoothParseval, Cone::LowFrequency) => (meyer_lowpass_2d(xi), Cone::LowFrequency),
        (System::ConeProjected, Cone::Horizontal) => {
            let v = if cone_of(xi) == Cone::Horizontal { chart_value(band, xi, closed) } else { 0.0 };
            (v, Cone::Horizontal)
        }
        (System::ConeProjected, Cone::Vertical) => {
            let v = if cone_of(xi) == Cone::Vertical { chart_value(band, swap(xi), closed) } else { 0.0 };
            (v, Cone::Vertical)
        }
        (System::SmoothParseval, _) if band.boundary => {
            if xi[1].abs() <= xi[0].abs() {
                (chart_value(band, xi, closed), Cone::Horizontal)
            } else {
                (chart_value(band, swap(xi), closed), Cone::Vertical)
            }
        }
        (System::SmoothParseval, Cone::Horizontal) => (chart_value(band, xi, closed), Cone::Horizontal),
        (System::SmoothParseval, Cone::Vertical) => (chart_value(band, swap(xi), closed), Cone::Vertical),
    }
}

/// Analytic support of one chart part: `|xi_main|` in `radial` (upper end `None` when
/// closed) and slope `xi_other / xi_main` in `slope`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportBox {
    pub chart: Cone,
    pub radial: (Rational64, Option<Rational64>),
    pub slope: (Rational64, Rational64),
}

impl SupportBox {
    /// Closed-box membership test in exact arithmetic.
    pub fn contains(&self, xi: [i64; 2]) -> bool {
        let (main, other) = match self.chart {
            Cone::Vertical => (xi[1], xi[0]),
            _ => (xi[0], xi[1]),
        };
        if self.chart == Cone::LowFrequency {
            let m = Rational64::from_integer(xi[0].abs().max(xi[1].abs()));
            return m >= self.radial.0 && self.radial.1.map_or(true, |h| m <= h);
        }
        if main == 0 {
            return false;
        }
        let a = Rational64::from_integer(main.abs());
        if a < self.radial.0 || self.radial.1.is_some_and(|h| a > h) {
            return false;
        }
        let u = Rational64::new(other, main);
        u >= self.slope.0 && u <= self.slope.1
    }
}

/// Support boxes of a band's window parts.
pub fn support_boxes(band: &Band, closed: bool) -> Vec<SupportBox> {
    if band.is_coarse() {
        let hi = match band.system {
            System::ConeProjected => Rational64::new(1, 8),
            System::SmoothParseval => Rational64::new(1, 8),
        };
        return vec![SupportBox {
            chart: Cone::LowFrequency,
            radial: (Rational64::from_integer(0), Some(hi)),
            slope: (Rational64::from_integer(-1), Rational64::from_integer(1)),
        }];
    }
    let s = 4i64.pow(band.j);
    let radial = (Rational64::new(s, 16), if closed { None } else { Some(Rational64::new(s, 2)) });
    let d = 1i64 << band.j;
    let one = Rational64::from_integer(1);
    let lo = Rational64::new(band.shear - 1, d).max(-one);
    let hi = Rational64::new(band.shear + 1, d).min(one);
    band.charts()
        .iter()
        .map(|&chart| SupportBox { chart, radial, slope: (lo, hi) })
        .collect()
}

/// Nonzero samples of one chart part: `(flat index, value)`.
#[derive(Clone, Debug)]
pub struct WindowPart {
    pub chart: Cone,
    pub entries: Vec<(usize, f64)>,
}

/// Sampled window magnitudes of one band (translation phase excluded).
#[derive(Clone, Debug)]
pub struct SpectralWindow {
    pub band: Band,
    pub normalization: f64,
    pub period: usize,
    pub weight: f64,
    pub closed: bool,
    pub parts: Vec<WindowPart>,
    pub support: Vec<SupportBox>,
}

impl SpectralWindow {
    pub fn build(band: Band, grid: &FrequencyGrid, top: Option<u32>) -> Result<SpectralWindow> {
        if band.j > grid.j_max() {
            return Err(Error::ScaleExceedsGrid { j: band.j, j_max: grid.j_max() });
        }
        let closed = top == Some(band.j) && !band.is_coarse();
        let support = support_boxes(&band, closed);
        let half = (grid.n() / 2) as i64;
        let mut parts: Vec<WindowPart> =
            band.charts().iter().map(|&chart| WindowPart { chart, entries: Vec::new() }).collect();
        let mut visit = |xi: [i64; 2]| {
            let flat = match grid.flat(xi) {
                Some(f) => f,
                None => return,
            };
            let (v, chart) = band_value(&band, [xi[0] as f64, xi[1] as f64], top);
            if v != 0.0 {
                let part = parts.iter_mut().find(|p| p.chart == chart).expect("chart of band");
                part.entries.push((flat, v));
            }
        };
        for sb in &support {
            if sb.chart == Cone::LowFrequency {
                for a in -1..=1 {
                    for b in -1..=1 {
                        visit([a, b]);
                    }
                }
                continue;
            }
            let lo = ceil(sb.radial.0).max(1);
            let hi = sb.radial.1.map_or(half, |h| floor(h).min(half));
            for main_abs in lo..=hi {
                for main in [main_abs, -main_abs] {
                    let e0 = sb.slope.0 * Rational64::from_integer(main);
                    let e1 = sb.slope.1 * Rational64::from_integer(main);
                    let (a, b) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
                    for other in floor(a).max(-half)..=ceil(b).min(half - 1) {
                        let xi = if sb.chart == Cone::Vertical { [other, main] } else { [main, other] };
                        visit(xi);
                    }
                }
            }
        }
        for p in &mut parts {
            p.entries.sort_by_key(|e| e.0);
            p.entries.dedup_by_key(|e| e.0);
        }
        Ok(SpectralWindow {
            band,
            normalization: band.normalization(),
            period: band.period(),
            weight: band.weight(),
            closed,
            parts,
            support,
        })
    }

    /// All nonzero samples with their phase chart.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, Cone)> + '_ {
        self.parts.iter().flat_map(|p| p.entries.iter().map(move |&(i, v)| (i, v, p.chart)))
    }

    pub fn nonzero_count(&self) -> usize {
        self.parts.iter().map(|p| p.entries.len()).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn to_dense(&self, grid: &FrequencyGrid) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for (i, v, _) in self.iter() {
            out[i] = v;
        }
        out
    }
}

fn floor(r: Rational64) -> i64 {
    r.floor().to_integer()
}

fn ceil(r: Rational64) -> i64 {
    r.ceil().to_integer()
}

/// Window of `band` on `grid`, closing the grid's top scale.
pub fn window(band: Band, grid: &FrequencyGrid) -> Result<SpectralWindow> {
    SpectralWindow::build(band, grid, Some(grid.j_max()))
}

/// All windows of one system up to `j_max` on a grid.
///
/// When `j_max` equals the grid's top scale the last scale is closed and the
/// squared windows sum to one at every grid frequency; smaller `j_max` gives
/// the raw truncated family.
#[derive(Clone, Debug)]
pub struct Frame {
    pub system: System,
    pub grid: FrequencyGrid,
    pub j_max: u32,
    windows: Vec<SpectralWindow>,
}

impl Frame {
    pub fn new(system: System, grid: FrequencyGrid, j_max: u32) -> Result<Frame> {
        if j_max > grid.j_max() {
            return Err(Error::ScaleExceedsGrid { j: j_max, j_max: grid.j_max() });
        }
        let top = if j_max == grid.j_max() { Some(j_max) } else { None };
        let bands = enumerate_bands(system, j_max, &all_cones());
        let windows = bands
            .into_par_iter()
            .map(|b| SpectralWindow::build(b, &grid, top))
            .collect::<Result<Vec<_>>>()?;
        Ok(Frame { system, grid, j_max, windows })
    }

    /// Frame with the grid's full scale range.
    pub fn full(system: System, grid: FrequencyGrid) -> Result<Frame> {
        Frame::new(system, grid, grid.j_max())
    }

    pub fn windows(&self) -> &[SpectralWindow] {
        &self.windows
    }

    pub fn bands(&self) -> impl Iterator<Item = Band> + '_ {
        self.windows.iter().map(|w| w.band)
    }

    pub fn window(&self, band: &Band) -> Option<&SpectralWindow> {
        self.windows.binary_search_by(|w| w.band.cmp(band)).ok().map(|i| &self.windows[i])
    }

    /// `sum_b |w_b(xi)|^2` at every grid frequency.
    pub fn multiplier(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for w in &self.windows {
            for (i, v, _) in w.iter() {
                out[i] += v * v;
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub system: System,
    pub n: usize,
    pub j_max: u32,
    pub max_deviation: f64,
    pub max_deviation_off_seam: f64,
    pub worst_frequency: [i64; 2],
    pub seam_count: usize,
    #[serde(skip)]
    pub residual: Vec<f64>,
    #[serde(skip)]
    pub seam: Vec<bool>,
}

/// Residual of `sum |w|^2 = 1` over the grid, with diagonal seam frequencies flagged.
pub fn partition_of_unity(system: System, grid: &FrequencyGrid) -> Result<PartitionReport> {
    let frame = Frame::full(system, *grid)?;
    let total = frame.multiplier();
    let mut residual = vec![0.0; grid.len()];
    let mut seam = vec![false; grid.len()];
    let mut max_dev = 0.0f64;
    let mut max_off = 0.0f64;
    let mut worst = [0, 0];
    for i in 0..grid.len() {
        let xi = grid.freq(i);
        let r = (total[i] - 1.0).abs();
        residual[i] = r;
        seam[i] = xi[0].abs() == xi[1].abs() && xi[0] != 0;
        if r > max_dev {
            max_dev = r;
            worst = xi;
        }
        if !seam[i] {
            max_off = max_off.max(r);
        }
    }
    Ok(PartitionReport {
        system,
        n: grid.n(),
        j_max: grid.j_max(),
        max_deviation: max_dev,
        max_deviation_off_seam: max_off,
        worst_frequency: worst,
        seam_count: seam.iter().filter(|&&s| s).count(),
        residual,
        seam,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BandOverlap {
    pub j: u32,
    pub shear: i64,
    pub count: usize,
    /// Interacting shears per scale `i`, including the band itself.
    pub interactions: Vec<(u32, Vec<i64>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapReport {
    pub j_max: u32,
    pub max_count: usize,
    pub max_interactions: usize,
    pub scale_local: bool,
    pub bands: Vec<BandOverlap>,
}

fn open_overlap(a: (Rational64, Rational64), b: (Rational64, Rational64)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

/// Support-box overlaps between horizontal cone-projected bands up to `j_max`.
pub fn overlap_count(grid: &FrequencyGrid, j_max: u32) -> Result<OverlapReport> {
    if j_max > grid.j_max() {
        return Err(Error::ScaleExceedsGrid { j: j_max, j_max: grid.j_max() });
    }
    let bands = enumerate_bands(System::ConeProjected, j_max, &[Cone::Horizontal]);
    let boxes: Vec<SupportBox> = bands.iter().map(|b| support_boxes(b, false).remove(0)).collect();
    let mut out = Vec::with_capacity(bands.len());
    let mut scale_local = true;
    for (a, ba) in bands.iter().zip(&boxes) {
        let mut count = 0;
        let mut inter: Vec<(u32, Vec<i64>)> = Vec::new();
        for (b, bb) in bands.iter().zip(&boxes) {
            let hit = open_overlap((ba.radial.0, ba.radial.1.unwrap()), (bb.radial.0, bb.radial.1.unwrap()))
                && open_overlap(ba.slope, bb.slope);
            if !hit {
                continue;
            }
            if a.j.abs_diff(b.j) > 1 {
                scale_local = false;
            }
            if a != b {
                count += 1;
            }
            match inter.iter_mut().find(|e| e.0 == b.j) {
                Some(e) => e.1.push(b.shear),
                None => inter.push((b.j, vec![b.shear])),
            }
        }
        out.push(BandOverlap { j: a.j, shear: a.shear, count, interactions: inter });
    }
    Ok(OverlapReport {
        j_max,
        max_count: out.iter().map(|b| b.count).max().unwrap_or(0),
        max_interactions: out.iter().map(|b| b.count + 1).max().unwrap_or(0),
        scale_local,
        bands: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::psi1_hat_sq;

    #[test]
    fn grid_scales() {
        assert_eq!(FrequencyGrid::new(256).unwrap().j_max(), 4);
        assert_eq!(FrequencyGrid::new(128).unwrap().j_max(), 4);
        assert_eq!(FrequencyGrid::new(64).unwrap().j_max(), 3);
        assert_eq!(FrequencyGrid::new(16).unwrap().j_max(), 2);
        assert!(FrequencyGrid::new(48).is_err());
        assert!(FrequencyGrid::new(1).is_err());
        let g = FrequencyGrid::new(8).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat(g.freq(i)), Some(i));
        }
        assert_eq!(g.flat([4, 0]), None);
    }

    #[test]
    fn cone_examples() {
        assert_eq!(cone_of([1.0, 0.5]), Cone::Horizontal);
        assert_eq!(cone_of([0.05, 0.05]), Cone::LowFrequency);
        assert_eq!(cone_of([8.0, 8.0]), Cone::Horizontal);
        assert_eq!(cone_of([-8.0, 8.0]), Cone::Horizontal);
        assert_eq!(cone_of([1.0, -3.0]), Cone::Vertical);
    }

    #[test]
    fn window_examples() {
        let grid = FrequencyGrid::new(256).unwrap();
        let b0 = Band::new(System::ConeProjected, Cone::Horizontal, 0, 0).unwrap();
        assert_eq!(window(b0, &grid).unwrap().nonzero_count(), 0);
        let b2 = Band::new(System::ConeProjected, Cone::Horizontal, 2, 0).unwrap();
        let w = window(b2, &grid).unwrap().to_dense(&grid);
        let expect = psi1_hat_sq(0.375).sqrt();
        assert!((w[grid.flat([6, 0]).unwrap()] - expect).abs() < 1e-15);
        let bb = Band::new(System::SmoothParseval, Cone::Horizontal, 1, 2).unwrap();
        assert!((window(bb, &grid).unwrap().normalization - 0.25).abs() < 1e-15);
        let big = Band::new(System::ConeProjected, Cone::Horizontal, 5, 0).unwrap();
        assert!(matches!(window(big, &grid), Err(Error::ScaleExceedsGrid { .. })));
    }

    // oracle: brute-force evaluation of every band at every grid frequency
    fn dense_partition(system: System, grid: &FrequencyGrid) -> Vec<f64> {
        let bands = enumerate_bands(system, grid.j_max(), &all_cones());
        (0..grid.len())
            .map(|i| {
                let xi = grid.freq(i);
                bands
                    .iter()
                    .map(|b| band_value(b, [xi[0] as f64, xi[1] as f64], Some(grid.j_max())).0.powi(2))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn sparse_windows_match_dense_evaluation() {
        for n in [16usize, 32, 128] {
            let grid = FrequencyGrid::new(n).unwrap();
            for system in [System::ConeProjected, System::SmoothParseval] {
                let frame = Frame::full(system, grid).unwrap();
                let fast = frame.multiplier();
                let slow = dense_partition(system, &grid);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn partition_small_grids() {
        for n in [2usize, 4, 8, 16, 32, 64, 128] {
            let grid = FrequencyGrid::new(n).unwrap();
            let s = partition_of_unity(System::SmoothParseval, &grid).unwrap();
            assert!(s.max_deviation <= 1e-8, "n={n} dev={}", s.max_deviation);
            let c = partition_of_unity(System::ConeProjected, &grid).unwrap();
            assert!(c.max_deviation_off_seam <= 1e-8, "n={n} dev={}", c.max_deviation_off_seam);
            assert_eq!(c.residual[0], 0.0);
        }
    }

    #[test]
    fn cone_projected_point_value() {
        let grid = FrequencyGrid::new(256).unwrap();
        let c = partition_of_unity(System::ConeProjected, &grid).unwrap();
        assert!(c.residual[grid.flat([16, 4]).unwrap()] < 1e-12);
    }

    #[test]
    fn support_containment() {
        let grid = FrequencyGrid::new(256).unwrap();
        for system in [System::ConeProjected, System::SmoothParseval] {
            let frame = Frame::full(system, grid).unwrap();
            for w in frame.windows() {
                for part in &w.parts {
                    let sb = w.support.iter().find(|s| s.chart == part.chart).unwrap();
                    for &(i, _) in &part.entries {
                        assert!(sb.contains(grid.freq(i)), "{:?} {:?}", w.band, grid.freq(i));
                    }
                }
            }
        }
    }

    #[test]
    fn horizontal_interior_trapezoid() {
        let grid = FrequencyGrid::new(256).unwrap();
        let frame = Frame::new(System::ConeProjected, grid, 3).unwrap();
        for w in frame.windows().iter().filter(|w| w.band.cone == Cone::Horizontal) {
            let j = w.band.j as i64;
            for (i, _, _) in w.iter() {
                let xi = grid.freq(i);
                let a = xi[0].abs();
                // 2^{2j-4} <= |xi1| <= 2^{2j-1}, scaled by 16 to stay in integers
                assert!(16 * a >= 1 << (2 * j) && 2 * a <= 1 << (2 * j));
                // |xi2/xi1 - l 2^{-j}| <= 2^{-j}
                assert!(((xi[1] << j) - w.band.shear * xi[0]).abs() <= a);
            }
        }
    }

    #[test]
    fn swap_symmetry() {
        let grid = FrequencyGrid::new(64).unwrap();
        for system in [System::ConeProjected, System::SmoothParseval] {
            let frame = Frame::full(system, grid).unwrap();
            for w in frame.windows().iter().filter(|w| w.band.cone == Cone::Horizontal) {
                let h = w.to_dense(&grid);
                let mirror = if w.band.boundary {
                    h.clone()
                } else {
                    let vb = Band::new(system, Cone::Vertical, w.band.j, w.band.shear).unwrap();
                    frame.window(&vb).unwrap().to_dense(&grid)
                };
                for i in 0..grid.len() {
                    let xi = grid.freq(i);
                    let Some(t) = grid.flat([xi[1], xi[0]]) else { continue };
                    let seam = xi[0].abs() == xi[1].abs();
                    if system == System::ConeProjected && seam {
                        continue;
                    }
                    assert_eq!(h[i], mirror[t], "{:?} {:?}", w.band, xi);
                }
            }
        }
    }

    #[test]
    fn overlap_examples() {
        let grid = FrequencyGrid::new(1024).unwrap();
        let r0 = overlap_count(&grid, 0).unwrap();
        assert!(r0.max_count <= 2);
        let r5 = overlap_count(&grid, 5).unwrap();
        assert!(r5.max_count <= 11);
        assert_eq!(r5.max_count, 10);
        assert!(r5.max_interactions <= 12);
        assert!(r5.scale_local);
    }
}
