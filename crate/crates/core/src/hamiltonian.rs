//! Sparse Bose-Hubbard Hamiltonian in a fixed particle-number sector.
//!
//! `H = -J Σ_<ij> (a†_i a_j + a†_j a_i) + (U/2) Σ_i n_i (n_i - 1)`, with the
//! bond sum running over the lattice edges. Matrix elements are real, so the
//! operator is stored as a real symmetric CSR matrix acting on complex
//! amplitudes.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::lattice::LatticeGraph;

/// Hopping `J` and on-site repulsion `U`, energies with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoseHubbardParams {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U")]
    pub u: f64,
}

impl Default for BoseHubbardParams {
    /// `U/J = 4` at `J = 4`.
    fn default() -> Self {
        Self { j: 4.0, u: 16.0 }
    }
}

impl BoseHubbardParams {
    pub fn new(j: f64, u: f64) -> Self {
        Self { j, u }
    }

    pub fn from_ratio(j: f64, u_over_j: f64) -> Self {
        Self { j, u: u_over_j * j }
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
pub struct SparseHamiltonian {
    id: u64,
    basis: Arc<FockBasis>,
    params: BoseHubbardParams,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    bounds: (f64, f64),
}

/// Rows per parallel work item in [`SparseHamiltonian::matvec`].
const ROW_BLOCK: usize = 1024;

pub fn build_hamiltonian(
    graph: &LatticeGraph,
    params: BoseHubbardParams,
    basis: Arc<FockBasis>,
) -> Result<SparseHamiltonian> {
    if graph.site_count() != basis.sites() {
        return Err(Error::DimensionMismatch {
            expected: basis.sites(),
            found: graph.site_count(),
        });
    }
    if basis.dim() > u32::MAX as usize {
        return Err(Error::DimensionMismatch {
            expected: u32::MAX as usize,
            found: basis.dim(),
        });
    }
    let cap = basis.cap() as u8;
    let half_u = 0.5 * params.u;
    let edges = graph.edges();
    let rows: Vec<Vec<(u32, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map_init(
            || vec![0u8; basis.sites()],
            |occ, a| {
                occ.copy_from_slice(basis.state(a));
                let mut row = Vec::with_capacity(2 * edges.len() + 1);
                let diag: f64 = occ.iter().map(|&n| f64::from(n) * (f64::from(n) - 1.0)).sum::<f64>() * half_u;
                if diag != 0.0 {
                    row.push((a as u32, diag));
                }
                for &(i, j) in edges {
                    for (to, from) in [(i, j), (j, i)] {
                        let (nt, nf) = (occ[to], occ[from]);
                        if nf == 0 || nt >= cap {
                            continue;
                        }
                        // ⟨.., nt+1, nf-1, ..| a†_to a_from |.., nt, nf, ..⟩
                        let amp = -params.j * ((f64::from(nt) + 1.0) * f64::from(nf)).sqrt();
                        occ[to] += 1;
                        occ[from] -= 1;
                        let b = basis.try_rank(occ).expect("hop image stays in sector");
                        occ[to] -= 1;
                        occ[from] += 1;
                        row.push((b as u32, amp));
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                row
            },
        )
        .collect();
    let nnz = rows.iter().map(Vec::len).sum();
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    let mut bounds = (f64::INFINITY, f64::NEG_INFINITY);
    for r in 0..row_ptr.len() - 1 {
        let (mut diag, mut radius) = (0.0, 0.0);
        for k in row_ptr[r]..row_ptr[r + 1] {
            if cols[k] as usize == r {
                diag = vals[k];
            } else {
                radius += vals[k].abs();
            }
        }
        bounds = (bounds.0.min(diag - radius), bounds.1.max(diag + radius));
    }
    if row_ptr.len() == 1 {
        bounds = (0.0, 0.0);
    }
    Ok(SparseHamiltonian {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        basis,
        params,
        row_ptr,
        cols,
        vals,
        bounds,
    })
}

impl SparseHamiltonian {
    /// Process-unique identity, used to key caches of derived data.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn params(&self) -> BoseHubbardParams {
        self.params
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    /// Gershgorin interval `[lo, hi]` containing every eigenvalue.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// `y = H x`. Each row is reduced sequentially, so the result is bitwise
    /// independent of the thread count.
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        y.par_chunks_mut(ROW_BLOCK)
            .enumerate()
            .for_each(|(blk, out)| {
                let r0 = blk * ROW_BLOCK;
                for (k, slot) in out.iter_mut().enumerate() {
                    let r = r0 + k;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                        acc += x[self.cols[idx] as usize] * self.vals[idx];
                    }
                    *slot = acc;
                }
            });
    }

    pub fn matvec_real(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn matvec(&self, v: &QuantumState) -> Result<QuantumState> {
        if v.dim() != self.dim() || v.basis().bosons() != self.basis.bosons() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.matvec_into(v.amplitudes(), &mut y);
        QuantumState::new(self.basis.clone(), y)
    }

    /// `⟨v|H|v⟩ / ⟨v|v⟩`.
    pub fn energy(&self, v: &QuantumState) -> Result<f64> {
        let hv = self.matvec(v)?;
        Ok(v.inner(&hv)?.re / v.norm().powi(2))
    }

    /// `sqrt(⟨H²⟩ - ⟨H⟩²)`.
    pub fn energy_spread(&self, v: &QuantumState) -> Result<f64> {
        let hv = self.matvec(v)?;
        let n2 = v.norm().powi(2);
        let mean = v.inner(&hv)?.re / n2;
        let second = hv.norm().powi(2) / n2;
        Ok((second - mean * mean).max(0.0).sqrt())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for r in 0..n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Lazily built bases and Hamiltonians for the particle-number sectors of
/// one lattice, shared between observables.
pub struct SectorCache {
    graph: LatticeGraph,
    params: BoseHubbardParams,
    n_max: usize,
    sectors: Mutex<BTreeMap<usize, Arc<SparseHamiltonian>>>,
}

impl SectorCache {
    /// `n_max = None` keeps every sector exact.
    pub fn new(graph: LatticeGraph, params: BoseHubbardParams, n_max: Option<usize>) -> Self {
        Self {
            graph,
            params,
            n_max: n_max.unwrap_or(usize::MAX),
            sectors: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn graph(&self) -> &LatticeGraph {
        &self.graph
    }

    pub fn params(&self) -> BoseHubbardParams {
        self.params
    }

    pub fn n_max_for(&self, bosons: usize) -> usize {
        self.n_max.min(bosons)
    }

    pub fn hamiltonian(&self, bosons: usize) -> Result<Arc<SparseHamiltonian>> {
        if let Some(h) = self.sectors.lock().unwrap().get(&bosons) {
            return Ok(h.clone());
        }
        let basis = Arc::new(FockBasis::new(
            self.graph.site_count(),
            bosons,
            self.n_max_for(bosons),
        )?);
        let h = Arc::new(build_hamiltonian(&self.graph, self.params, basis)?);
        self.sectors.lock().unwrap().insert(bosons, h.clone());
        Ok(h)
    }

    pub fn basis(&self, bosons: usize) -> Result<Arc<FockBasis>> {
        Ok(self.hamiltonian(bosons)?.basis().clone())
    }
}
