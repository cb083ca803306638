use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::OccupationBasis;
use crate::error::{Error, Result};
use crate::hermite::HermiteBasis;
use crate::interaction::{InteractionSpec, PairTable};

/// Real symmetric matrix in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseOperator {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { dim, indptr, indices, values }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        Self::from_rows(entries.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, parallel over rows with a fixed per-row summation order.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(i, out)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, v) in self.row(i) {
                acc += x[c] * v;
            }
            *out = acc;
        });
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .into_par_iter()
            .map(|i| self.row(i).map(|(c, v)| x[c] * v).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }

    /// `max |A_ij − A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                worst = worst.max((v - self.get(c, i)).abs());
            }
        }
        worst
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (c, v) in self.row(i) {
                if c == i {
                    diag += v;
                } else {
                    off += v.abs();
                }
            }
            lo = lo.min(diag - off);
            hi = hi.max(diag + off);
        }
        (lo, hi)
    }

    /// `A + s·I`.
    pub fn shifted(&self, s: f64) -> Self {
        let rows = (0..self.dim)
            .map(|i| {
                let mut row: Vec<(usize, f64)> = self.row(i).collect();
                match row.iter_mut().find(|(c, _)| *c == i) {
                    Some(entry) => entry.1 += s,
                    None => {
                        row.push((i, s));
                        row.sort_by_key(|e| e.0);
                    }
                }
                row
            })
            .collect();
        Self::from_rows(rows)
    }
}

/// `H = Σ_p ε_p n_p + g·½Σ W_{pq,rs} a†_p a†_q a_s a_r + shift` on a sector.
pub fn assemble_operator(
    occ: &OccupationBasis,
    one_body: &[f64],
    pair: Option<&PairTable>,
    pair_scale: f64,
    shift: f64,
) -> Result<SparseOperator> {
    let d = occ.modes();
    if one_body.len() != d {
        return Err(Error::DimensionMismatch(format!("{} one-body entries for {d} modes", one_body.len())));
    }
    if let Some(t) = pair {
        if t.dim() != d {
            return Err(Error::DimensionMismatch(format!("pair table has {} modes, sector {d}", t.dim())));
        }
    }
    // nonzero (p, q, W) for each ordered annihilated pair (r, s)
    let couplings: Vec<Vec<(usize, usize, f64)>> = match pair {
        Some(t) if pair_scale != 0.0 => {
            let mut scale = 0.0f64;
            let all: Vec<Vec<(usize, usize, f64)>> = (0..d * d)
                .map(|rs| {
                    let (r, s) = (rs / d, rs % d);
                    let mut v = Vec::new();
                    for p in 0..d {
                        for q in 0..d {
                            let w = t.element(p, q, r, s);
                            scale = scale.max(w.abs());
                            v.push((p, q, w));
                        }
                    }
                    v
                })
                .collect();
            let cut = 1e-15 * scale;
            all.into_iter().map(|v| v.into_iter().filter(|e| e.2.abs() > cut).collect()).collect()
        }
        _ => vec![Vec::new(); d * d],
    };
    let half = 0.5 * pair_scale;
    let rows: Vec<Vec<(usize, f64)>> = occ
        .states()
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let diag: f64 = m.iter().zip(one_body).map(|(&k, e)| k as f64 * e).sum::<f64>() + shift;
            let mut acc: HashMap<usize, f64> = HashMap::new();
            let mut order: Vec<usize> = Vec::new();
            acc.insert(i, diag);
            order.push(i);
            let mut mid = m.clone();
            let mut target = m.clone();
            for r in 0..d {
                if m[r] == 0 {
                    continue;
                }
                for s in 0..d {
                    let ms = m[s] as i32 - (r == s) as i32;
                    if ms <= 0 || couplings[r * d + s].is_empty() {
                        continue;
                    }
                    let amp1 = (m[r] as f64).sqrt() * (ms as f64).sqrt();
                    mid.copy_from_slice(m);
                    mid[r] -= 1;
                    mid[s] -= 1;
                    for &(p, q, w) in &couplings[r * d + s] {
                        let amp2 = ((mid[q] + 1) as f64).sqrt() * ((mid[p] + 1 + (p == q) as u8) as f64).sqrt();
                        target.copy_from_slice(&mid);
                        target[q] += 1;
                        target[p] += 1;
                        let j = occ.index_of(&target).expect("particle number is conserved");
                        let v = half * w * amp1 * amp2;
                        match acc.get_mut(&j) {
                            Some(e) => *e += v,
                            None => {
                                acc.insert(j, v);
                                order.push(j);
                            }
                        }
                    }
                }
            }
            let mut row: Vec<(usize, f64)> = order.into_iter().map(|j| (j, acc[&j])).collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(SparseOperator::from_rows(rows))
}

/// Assembled N-body Hamiltonian with the data it was built from.
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    pub occupation: Arc<OccupationBasis>,
    pub one_body: Vec<f64>,
    pub matrix: SparseOperator,
}

impl ManyBodyOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matrix.apply(x)
    }
}

/// `H_N = Σ_p λ_p n_p + (1/(2N)) Σ W_{pq,rs} a†_p a†_q a_s a_r`.
pub fn assemble_hamiltonian(
    occ: Arc<OccupationBasis>,
    basis: &HermiteBasis,
    interaction: &InteractionSpec,
) -> Result<ManyBodyOperator> {
    if occ.modes() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "sector has {} modes, single-particle basis {}",
            occ.modes(),
            basis.len()
        )));
    }
    if occ.particles() != interaction.n {
        return Err(Error::DimensionMismatch(format!(
            "sector holds {} particles, interaction is scaled for {}",
            occ.particles(),
            interaction.n
        )));
    }
    let table = if interaction.is_zero() { None } else { Some(PairTable::new(basis, interaction)?) };
    let one_body = basis.eigenvalues().to_vec();
    let matrix = assemble_operator(&occ, &one_body, table.as_ref(), 1.0 / occ.particles() as f64, 0.0)?;
    Ok(ManyBodyOperator { occupation: occ, one_body, matrix })
}
