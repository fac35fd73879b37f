//! On-disk cache of eigenbases keyed by the physics hash of a scenario, so
//! repeated runs over the same grid, units and barrier skip the dense
//! diagonalization.
//!
//! File layout (little endian): magic `SALPEIG1`, one flag byte (bit 0: the
//! vectors are real and only real parts follow), `n` as u64, the 64-byte hex
//! hash, `n` energies, then the `n×n` vector matrix column-major as real
//! parts followed by imaginary parts unless flagged real.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Units};
use crate::kernel::{build_hamiltonian, diagonalize, EigenBasis};
use crate::potential::Potential;

const MAGIC: &[u8; 8] = b"SALPEIG1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
}

#[derive(Debug, Clone)]
pub struct EigenCache {
    dir: PathBuf,
}

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.eig"))
    }

    /// `Ok(None)` when no entry exists. A malformed entry is an error.
    pub fn load(&self, hash: &str, grid: &Grid) -> Result<Option<EigenBasis>> {
        let path = self.path_for(hash);
        if !path.exists() {
            return Ok(None);
        }
        let mut r = BufReader::new(fs::File::open(&path)?);
        let bad = |what: &str| Error::Serialization(format!("cache entry {}: {what}", path.display()));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let n = read_u64(&mut r)? as usize;
        let mut stored = [0u8; 64];
        r.read_exact(&mut stored)?;
        if stored != hash.as_bytes() {
            return Err(bad("hash mismatch"));
        }
        if n != grid.len() {
            return Err(bad("size mismatch"));
        }
        let energies = read_f64s(&mut r, n)?;
        let re = read_f64s(&mut r, n * n)?;
        let im = if flag[0] & 1 == 1 {
            vec![0.0; n * n]
        } else {
            read_f64s(&mut r, n * n)?
        };
        let vectors = DMatrix::from_iterator(n, n, re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)));
        EigenBasis::from_parts(*grid, energies, vectors).map(Some)
    }

    pub fn store(&self, hash: &str, basis: &EigenBasis) -> Result<()> {
        if hash.len() != 64 {
            return Err(Error::Argument("cache keys are 64-character hex digests".into()));
        }
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(hash);
        // Write-then-rename keeps concurrent readers from seeing partial files.
        let tmp = self.dir.join(format!("{hash}.eig.{}.tmp", std::process::id()));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            let real = basis.is_real();
            w.write_all(MAGIC)?;
            w.write_all(&[real as u8])?;
            w.write_all(&(basis.len() as u64).to_le_bytes())?;
            w.write_all(hash.as_bytes())?;
            for e in basis.energies() {
                w.write_all(&e.to_le_bytes())?;
            }
            for z in basis.vectors().iter() {
                w.write_all(&z.re.to_le_bytes())?;
            }
            if !real {
                for z in basis.vectors().iter() {
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Loads the basis from `cache` when present, otherwise diagonalizes and
/// stores it. Unreadable entries are rebuilt and overwritten.
pub fn obtain_basis(
    cache: Option<&EigenCache>,
    hash: &str,
    grid: &Grid,
    potential: &Potential,
    units: &Units,
) -> Result<(EigenBasis, CacheStatus)> {
    let Some(cache) = cache else {
        let basis = diagonalize(&build_hamiltonian(grid, potential, units))?;
        return Ok((basis, CacheStatus::Disabled));
    };
    match cache.load(hash, grid) {
        Ok(Some(basis)) => {
            log::info!("eigenbasis cache hit {}", &hash[..12]);
            return Ok((basis, CacheStatus::Hit));
        }
        Ok(None) => log::info!("eigenbasis cache miss {}", &hash[..12]),
        Err(e) => log::warn!("ignoring unreadable cache entry: {e}"),
    }
    let basis = diagonalize(&build_hamiltonian(grid, potential, units))?;
    cache.store(hash, &basis)?;
    Ok((basis, CacheStatus::Miss))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let g = Grid::new(-10.0, 10.0, 32).unwrap();
        let v = Potential::SmoothTanh { v0: 5.0, width: 1.0, alpha: 4.0 };
        let hash = "a".repeat(64);
        let (first, s1) = obtain_basis(Some(&cache), &hash, &g, &v, &Units::default()).unwrap();
        let (second, s2) = obtain_basis(Some(&cache), &hash, &g, &v, &Units::default()).unwrap();
        assert_eq!(s1, CacheStatus::Miss);
        assert_eq!(s2, CacheStatus::Hit);
        assert_eq!(first.energies(), second.energies());
        assert_eq!(first.vectors(), second.vectors());
    }

    #[test]
    fn complex_vectors_survive() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let g = Grid::new(-1.0, 1.0, 4).unwrap();
        let vectors = DMatrix::from_fn(4, 4, |i, j| Complex64::new(i as f64, j as f64 - 0.5));
        let basis = EigenBasis::from_parts(g, vec![1.0, 2.0, 3.0, 4.0], vectors).unwrap();
        let hash = "b".repeat(64);
        cache.store(&hash, &basis).unwrap();
        let back = cache.load(&hash, &g).unwrap().unwrap();
        assert_eq!(back.vectors(), basis.vectors());
    }

    #[test]
    fn corrupt_entry_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let hash = "c".repeat(64);
        fs::write(cache.path_for(&hash), b"garbage").unwrap();
        let g = Grid::new(-10.0, 10.0, 16).unwrap();
        let v = Potential::Rectangular { v0: 1.0, width: 1.0 };
        let (_, status) = obtain_basis(Some(&cache), &hash, &g, &v, &Units::default()).unwrap();
        assert_eq!(status, CacheStatus::Miss);
        assert!(cache.load(&hash, &g).unwrap().is_some());
    }
}
