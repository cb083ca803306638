//! On-disk cache of assembled Hamiltonians, keyed by a digest of everything
//! that determines the matrix.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{assemble_hamiltonian, ManyBodyOperator, OccupationBasis, SparseOperator};
use crate::error::{Error, Result};
use crate::hermite::HermiteBasis;
use crate::interaction::InteractionSpec;

pub const CACHE_ENV: &str = "MEANFIELD_CACHE_DIR";
const MAGIC: &[u8; 8] = b"MFCSR001";

#[derive(Serialize)]
struct CacheKey<'a> {
    omega: f64,
    cutoff_energy: f64,
    interaction: &'a InteractionSpec,
    modes: usize,
    particles: usize,
}

pub fn cache_key(basis: &HermiteBasis, interaction: &InteractionSpec, occ: &OccupationBasis) -> Result<String> {
    let key = CacheKey {
        omega: basis.omega(),
        cutoff_energy: basis.cutoff_energy(),
        interaction,
        modes: occ.modes(),
        particles: occ.particles(),
    };
    let text = serde_json::to_string(&key)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

pub fn write_operator(path: &Path, op: &SparseOperator) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u64::<LittleEndian>(op.dim as u64)?;
    w.write_u64::<LittleEndian>(op.nnz() as u64)?;
    for &p in &op.indptr {
        w.write_u64::<LittleEndian>(p as u64)?;
    }
    for &c in &op.indices {
        w.write_u64::<LittleEndian>(c as u64)?;
    }
    for &v in &op.values {
        w.write_f64::<LittleEndian>(v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator(path: &Path) -> Result<SparseOperator> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidParameter(format!("{} is not a cached operator", path.display())));
    }
    let dim = r.read_u64::<LittleEndian>()? as usize;
    let nnz = r.read_u64::<LittleEndian>()? as usize;
    let mut indptr = Vec::with_capacity(dim + 1);
    for _ in 0..=dim {
        indptr.push(r.read_u64::<LittleEndian>()? as usize);
    }
    let mut indices = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        indices.push(r.read_u64::<LittleEndian>()? as usize);
    }
    let mut values = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        values.push(r.read_f64::<LittleEndian>()?);
    }
    if indptr.last() != Some(&nnz) {
        return Err(Error::InvalidParameter(format!("{} is truncated", path.display())));
    }
    Ok(SparseOperator { dim, indptr, indices, values })
}

/// Directory named by `MEANFIELD_CACHE_DIR`, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// Assemble, or load from `dir` when an entry for the same inputs exists.
pub fn assemble_cached(
    occ: Arc<OccupationBasis>,
    basis: &HermiteBasis,
    interaction: &InteractionSpec,
    dir: Option<&Path>,
) -> Result<ManyBodyOperator> {
    let Some(dir) = dir else {
        return assemble_hamiltonian(occ, basis, interaction);
    };
    let path = dir.join(format!("{}.csr", cache_key(basis, interaction, &occ)?));
    if path.exists() {
        let matrix = read_operator(&path)?;
        if matrix.dim == occ.len() {
            log::debug!("loaded cached Hamiltonian {}", path.display());
            return Ok(ManyBodyOperator { occupation: occ, one_body: basis.eigenvalues().to_vec(), matrix });
        }
        log::warn!("ignoring cache entry {} with wrong dimension", path.display());
    }
    let op = assemble_hamiltonian(occ, basis, interaction)?;
    std::fs::create_dir_all(dir)?;
    write_operator(&path, &op.matrix)?;
    Ok(op)
}
