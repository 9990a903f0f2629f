//! Grid files and coefficient lists.
//!
//! Grid file: the 8-byte magic `SHGRID01`, `N` as a little-endian `u32`, then `N^2`
//! row-major samples, each a little-endian `f64` pair `(re, im)`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use shearlet_core::{Band, CoefficientMap, Cone, FrequencyGrid, PeriodicSignal, ShearletIndex, System};

use crate::CliError;

pub const MAGIC: &[u8; 8] = b"SHGRID01";

pub fn encode_signal(f: &PeriodicSignal) -> Vec<u8> {
    let n = f.n();
    let mut out = Vec::with_capacity(12 + 16 * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for c in f.samples() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_signal(bytes: &[u8]) -> Result<PeriodicSignal, CliError> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(CliError::Input("not a SHGRID01 file (bad magic)".into()));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if n < 2 || !n.is_power_of_two() {
        return Err(CliError::Input(format!("grid size {n} is not a power of two")));
    }
    let payload = &bytes[12..];
    if payload.len() != 16 * n * n {
        return Err(CliError::Input(format!(
            "payload has {} bytes, expected {} for N = {n}",
            payload.len(),
            16 * n * n
        )));
    }
    let f64_at = |i: usize| f64::from_le_bytes(payload[8 * i..8 * i + 8].try_into().unwrap());
    let samples = (0..n * n).map(|i| Complex64::new(f64_at(2 * i), f64_at(2 * i + 1))).collect();
    let grid = FrequencyGrid::new(n)?;
    Ok(PeriodicSignal::from_samples(grid, samples)?)
}

pub fn save_signal(f: &PeriodicSignal, path: &Path) -> Result<(), CliError> {
    fs::write(path, encode_signal(f)).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

pub fn load_signal(path: &Path) -> Result<PeriodicSignal, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    decode_signal(&bytes)
}

/// One stored coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub system: System,
    pub cone: Cone,
    pub j: u32,
    pub l: i64,
    pub k: [i64; 2],
    pub re: f64,
    pub im: f64,
}

pub fn coefficient_records(c: &CoefficientMap) -> Vec<CoefficientRecord> {
    c.iter()
        .map(|(idx, v)| CoefficientRecord {
            system: c.system,
            cone: idx.band.cone,
            j: idx.band.j,
            l: idx.band.shear,
            k: idx.k,
            re: v.re,
            im: v.im,
        })
        .collect()
}

/// Rebuilds a coefficient map; `j_max` defaults to the finest stored scale and
/// `system` is only consulted for an empty list.
pub fn coefficient_map(records: &[CoefficientRecord], system: System, j_max: Option<u32>) -> Result<CoefficientMap, CliError> {
    let system = records.first().map_or(system, |r| r.system);
    if records.iter().any(|r| r.system != system) {
        return Err(CliError::Input("coefficient list mixes frame systems".into()));
    }
    let finest = records.iter().map(|r| r.j).max().unwrap_or(0);
    let j_max = j_max.unwrap_or(finest);
    if finest > j_max {
        return Err(CliError::Input(format!("coefficient scale {finest} exceeds j_max {j_max}")));
    }
    let mut c = CoefficientMap::new(system, j_max);
    for r in records {
        let band = match r.cone {
            Cone::LowFrequency if r.j == 0 && r.l == 0 => Band::coarse(system),
            Cone::LowFrequency => return Err(CliError::Input("low-frequency coefficients need j = l = 0".into())),
            cone => Band::new(system, cone, r.j, r.l)?,
        };
        let p = band.period() as i64;
        if r.k.iter().any(|&k| k < 0 || k >= p) {
            return Err(CliError::Input(format!("translation {:?} outside 0..{p} for {band:?}", r.k)));
        }
        c.set(&ShearletIndex { band, k: r.k }, Complex64::new(r.re, r.im))?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use shearlet_core::Frame;

    fn random(n: usize, seed: u64) -> PeriodicSignal {
        let mut rng = shearlet_core::experiments::rng_for(seed, 0);
        PeriodicSignal::random(FrequencyGrid::new(n).unwrap(), None, &mut rng)
    }

    #[test]
    fn encoded_size() {
        assert_eq!(encode_signal(&random(64, 1)).len(), 12 + 65536);
    }

    #[test]
    fn encode_decode_bitwise() {
        let f = random(16, 3);
        let g = decode_signal(&encode_signal(&f)).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn decode_errors() {
        let bytes = encode_signal(&random(8, 2));
        assert!(decode_signal(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_signal(&bad).is_err());
        let mut odd = bytes[..12].to_vec();
        odd[8..12].copy_from_slice(&12u32.to_le_bytes());
        odd.extend(std::iter::repeat(0u8).take(16 * 144));
        assert!(decode_signal(&odd).is_err());
    }

    #[test]
    fn coefficient_records_round_trip() {
        let f = random(16, 4);
        let frame = Frame::full(System::SmoothParseval, f.grid()).unwrap();
        let c = frame.analyze(&f).unwrap();
        let recs = coefficient_records(&c);
        let back = coefficient_map(&recs, System::ConeProjected, Some(frame.j_max)).unwrap();
        assert_eq!(coefficient_records(&back), recs);
        let g = frame.synthesize(&back).unwrap();
        let d: f64 = f.samples().iter().zip(g.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-10);
    }
}
