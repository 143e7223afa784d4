//! Brute-force dense reference implementations.
//!
//! Everything here is built independently of the fast paths: the basis is
//! found by scanning all `(N+1)^L` occupation vectors, the Hamiltonian is
//! assembled from dense ladder matrices, and time evolution uses a full
//! eigendecomposition. Dimensions are capped at [`DEFAULT_CAP`].

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::entropy::{reduced_density_matrix, AncillaLatticeState, Subsystem};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::hamiltonian::{BoseHubbardParams, SectorCache, SparseHamiltonian};
use crate::lattice::{build_preset, LatticeGraph, OperatorSitePair};
use crate::observables::{OtocProblem, TimeGrid};
use crate::propagator::{Evolution, KrylovPropagator, Propagator};

pub const DEFAULT_CAP: usize = 2000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::OracleCapExceeded { dim, cap });
    }
    Ok(())
}

/// A fixed-N sector found by exhaustive scan, with a hash lookup.
#[derive(Debug, Clone)]
pub struct DenseSector {
    pub sites: usize,
    pub bosons: usize,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl DenseSector {
    pub fn new(sites: usize, bosons: usize, cap: usize) -> Result<Self> {
        let base = bosons + 1;
        let total = (base as u64).checked_pow(sites as u32).unwrap_or(u64::MAX);
        if total > 50_000_000 {
            return Err(Error::OracleCapExceeded {
                dim: total.min(usize::MAX as u64) as usize,
                cap,
            });
        }
        let mut states = Vec::new();
        let mut digits = vec![0usize; sites];
        loop {
            if digits.iter().sum::<usize>() == bosons {
                states.push(digits.iter().map(|&d| d as u8).collect::<Vec<u8>>());
                check_cap(states.len(), cap)?;
            }
            // odometer, last site fastest
            let mut k = sites;
            loop {
                if k == 0 {
                    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
                    return Ok(Self {
                        sites,
                        bosons,
                        states,
                        index,
                    });
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < base {
                    break;
                }
                digits[k] = 0;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Re-expresses a fast-path state in this sector's ordering.
    pub fn import(&self, state: &QuantumState) -> Result<DVector<Complex64>> {
        let mut v = DVector::from_element(self.dim(), ZERO);
        for (occ, &a) in state.basis().iter().zip(state.amplitudes()) {
            let k = self.index_of(occ).ok_or_else(|| Error::NotInSector(occ.to_vec()))?;
            v[k] = a;
        }
        Ok(v)
    }

    /// Inverse of [`DenseSector::import`].
    pub fn export(&self, v: &DVector<Complex64>, basis: std::sync::Arc<FockBasis>) -> Result<QuantumState> {
        let mut out = QuantumState::zeros(basis);
        for (occ, &a) in self.states.iter().zip(v.iter()) {
            let k = out.basis().rank(occ)?;
            out.amplitudes_mut()[k] = a;
        }
        Ok(out)
    }

    pub fn basis_vector(&self, occ: &[u8]) -> Result<DVector<Complex64>> {
        let k = self.index_of(occ).ok_or_else(|| Error::NotInSector(occ.to_vec()))?;
        let mut v = DVector::from_element(self.dim(), ZERO);
        v[k] = c(1.0);
        Ok(v)
    }
}

/// `a_site` as a dense `dim(N-1) × dim(N)` matrix.
pub fn annihilation_matrix(from: &DenseSector, to: &DenseSector, site: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(to.dim(), from.dim(), ZERO);
    for (col, occ) in from.states.iter().enumerate() {
        let n = occ[site];
        if n == 0 {
            continue;
        }
        let mut lowered = occ.clone();
        lowered[site] -= 1;
        if let Some(row) = to.index_of(&lowered) {
            m[(row, col)] = c((n as f64).sqrt());
        }
    }
    m
}

/// Dense matrix tagged with the particle number of the sector it acts on.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub bosons: usize,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>, bosons: usize, cap: usize) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        check_cap(matrix.nrows(), cap)?;
        Ok(Self { matrix, bosons })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectrum(&self) -> DenseSpectrum {
        DenseSpectrum::new(&self.matrix)
    }
}

/// Bose-Hubbard Hamiltonian of one sector, assembled from ladder-matrix
/// products: `-J Σ (a†_i a_j + a†_j a_i) + (U/2) Σ (n_i² - n_i)`.
pub fn dense_hamiltonian(graph: &LatticeGraph, params: BoseHubbardParams, bosons: usize, cap: usize) -> Result<DenseOperator> {
    let sector = DenseSector::new(graph.site_count(), bosons, cap)?;
    if bosons == 0 {
        return DenseOperator::new(DMatrix::from_element(1, 1, ZERO), 0, cap);
    }
    let lower = DenseSector::new(graph.site_count(), bosons - 1, cap)?;
    let a: Vec<DMatrix<Complex64>> = (0..graph.site_count())
        .map(|s| annihilation_matrix(&sector, &lower, s))
        .collect();
    let dim = sector.dim();
    let mut h = DMatrix::from_element(dim, dim, ZERO);
    for &(i, j) in graph.edges() {
        let hop = a[i].adjoint() * &a[j];
        h -= (&hop + hop.adjoint()) * c(params.j);
    }
    for ai in &a {
        let n = ai.adjoint() * ai;
        let n2 = &n * &n;
        h += (n2 - n) * c(params.u / 2.0);
    }
    DenseOperator::new(h, bosons, cap)
}

/// Full eigendecomposition of a Hermitian matrix; real matrices take the
/// real symmetric path.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl DenseSpectrum {
    pub fn new(m: &DMatrix<Complex64>) -> Self {
        if m.iter().all(|z| z.im == 0.0) {
            let eig = SymmetricEigen::new(m.map(|z| z.re));
            Self {
                values: eig.eigenvalues,
                vectors: eig.eigenvectors.map(c),
            }
        } else {
            let eig = SymmetricEigen::new(m.clone());
            Self {
                values: eig.eigenvalues,
                vectors: eig.eigenvectors,
            }
        }
    }

    /// `exp(-iHt)` as a matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(self.values.len(), self.values.iter().map(|&l| Complex64::new(0.0, -l * t).exp()));
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, k| self.vectors[(r, k)] * phases[k]);
        scaled * self.vectors.adjoint()
    }

    pub fn apply(&self, v: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut w = self.vectors.adjoint() * v;
        for (x, &l) in w.iter_mut().zip(self.values.iter()) {
            *x *= Complex64::new(0.0, -l * t).exp();
        }
        &self.vectors * w
    }
}

/// `exp(-iHt)|v⟩` by full diagonalization.
pub fn dense_evolve(h: &DenseOperator, v: &DVector<Complex64>, t: f64) -> Result<DVector<Complex64>> {
    if v.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.len(),
        });
    }
    Ok(h.spectrum().apply(v, t))
}

/// Algebraic route for [`dense_otoc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtocOrdering {
    /// Builds `a_j(t) = e^{iHt} a_j e^{-iHt}` as explicit matrices.
    Heisenberg,
    /// Evolves vectors forwards and backwards through the sectors.
    StateEvolution,
}

/// `⟨ψ| a_j†(t) a_i† a_j(t) a_i |ψ⟩` for a Fock initial state, with every
/// sector exact.
pub struct DenseOtoc {
    sectors: [DenseSector; 3],
    spectra: [DenseSpectrum; 3],
    pair: OperatorSitePair,
    psi: DVector<Complex64>,
    hop: f64,
}

impl DenseOtoc {
    pub fn new(graph: &LatticeGraph, params: BoseHubbardParams, pair: OperatorSitePair, initial: &[u8], cap: usize) -> Result<Self> {
        let pair = OperatorSitePair::new(graph, pair.i, pair.j)?;
        if initial.len() != graph.site_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.site_count(),
                found: initial.len(),
            });
        }
        let n: usize = initial.iter().map(|&x| x as usize).sum();
        if n < 2 {
            return Err(Error::TooFewBosons(n));
        }
        let l = graph.site_count();
        let sectors = [
            DenseSector::new(l, n, cap)?,
            DenseSector::new(l, n - 1, cap)?,
            DenseSector::new(l, n - 2, cap)?,
        ];
        let spectra = [
            dense_hamiltonian(graph, params, n, cap)?.spectrum(),
            dense_hamiltonian(graph, params, n - 1, cap)?.spectrum(),
            dense_hamiltonian(graph, params, n - 2, cap)?.spectrum(),
        ];
        let psi = sectors[0].basis_vector(initial)?;
        Ok(Self {
            sectors,
            spectra,
            pair,
            psi,
            hop: params.j,
        })
    }

    /// Value at dimensionless time `jt`.
    pub fn at(&self, jt: f64, ordering: OtocOrdering) -> Complex64 {
        let t = jt / self.hop;
        let [s0, s1, s2] = &self.sectors;
        let ai_0 = annihilation_matrix(s0, s1, self.pair.i);
        let ai_1 = annihilation_matrix(s1, s2, self.pair.i);
        let aj_0 = annihilation_matrix(s0, s1, self.pair.j);
        let aj_1 = annihilation_matrix(s1, s2, self.pair.j);
        match ordering {
            OtocOrdering::Heisenberg => {
                let u: Vec<DMatrix<Complex64>> = self.spectra.iter().map(|s| s.propagator(t)).collect();
                let aj_t_0 = u[1].adjoint() * &aj_0 * &u[0];
                let aj_t_1 = u[2].adjoint() * &aj_1 * &u[1];
                let right = &aj_t_1 * (&ai_0 * &self.psi);
                let left = &ai_1 * (&aj_t_0 * &self.psi);
                left.dotc(&right)
            }
            OtocOrdering::StateEvolution => {
                let x = self.spectra[0].apply(&self.psi, t);
                let y = self.spectra[1].apply(&(&ai_0 * &self.psi), t);
                let p = self.spectra[1].apply(&(&aj_0 * x), -t);
                let q = self.spectra[2].apply(&(&aj_1 * y), -t);
                (&ai_1 * p).dotc(&q)
            }
        }
    }
}

pub fn dense_otoc(
    graph: &LatticeGraph,
    params: BoseHubbardParams,
    pair: OperatorSitePair,
    initial: &[u8],
    jt: f64,
    ordering: OtocOrdering,
) -> Result<Complex64> {
    Ok(DenseOtoc::new(graph, params, pair, initial, DEFAULT_CAP)?.at(jt, ordering))
}

/// A pure state embedded in a tensor product of local spaces, factor 0
/// being the most significant index.
#[derive(Debug, Clone)]
pub struct ProductState {
    pub local_dims: Vec<usize>,
    pub amplitudes: Vec<Complex64>,
}

impl ProductState {
    /// Each site gets local dimension `N + 1`.
    pub fn from_lattice(state: &QuantumState, cap: usize) -> Result<Self> {
        check_cap(state.dim(), cap)?;
        let b = state.basis();
        Self::embed(b.sites(), b.bosons() + 1, &[(None, state)])
    }

    /// Lattice sites first, then the ancilla as a final two-level factor.
    pub fn from_ancilla(state: &AncillaLatticeState, cap: usize) -> Result<Self> {
        let (b0, b1) = (state.branch(0), state.branch(1));
        check_cap(b0.dim() + b1.dim(), cap)?;
        let local = b0.basis().bosons().max(b1.basis().bosons()) + 1;
        Self::embed(state.site_count(), local, &[(Some(0), b0), (Some(1), b1)])
    }

    fn embed(sites: usize, local: usize, branches: &[(Option<usize>, &QuantumState)]) -> Result<Self> {
        let with_ancilla = branches[0].0.is_some();
        let mut local_dims = vec![local; sites];
        if with_ancilla {
            local_dims.push(2);
        }
        let total: usize = local_dims.iter().product();
        let mut amplitudes = vec![ZERO; total];
        for &(anc, branch) in branches {
            for (occ, &a) in branch.basis().iter().zip(branch.amplitudes()) {
                let mut idx = 0;
                for &n in occ {
                    idx = idx * local + n as usize;
                }
                if let Some(x) = anc {
                    idx = idx * 2 + x;
                }
                amplitudes[idx] += a;
            }
        }
        Ok(Self { local_dims, amplitudes })
    }
}

/// Reduced density matrix on `keep` (factor indices), by reshaping the state
/// into a `(kept) × (traced)` matrix `M` and forming `M M†`. Rows are
/// ordered lexicographically over the kept factors in ascending order.
pub fn dense_partial_trace(state: &ProductState, keep: &[usize]) -> Result<DMatrix<Complex64>> {
    let f = state.local_dims.len();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&k) = keep.iter().find(|&&k| k >= f) {
        return Err(Error::InvalidSubsystem(format!("factor {k} outside [0, {f})")));
    }
    let traced: Vec<usize> = (0..f).filter(|k| !keep.contains(k)).collect();
    let rows: usize = keep.iter().map(|&k| state.local_dims[k]).product();
    let cols: usize = traced.iter().map(|&k| state.local_dims[k]).product();
    let mut m = DMatrix::from_element(rows, cols, ZERO);
    let mut digits = vec![0usize; f];
    for (flat, &a) in state.amplitudes.iter().enumerate() {
        let mut rest = flat;
        for k in (0..f).rev() {
            digits[k] = rest % state.local_dims[k];
            rest /= state.local_dims[k];
        }
        let r = keep.iter().fold(0, |acc, &k| acc * state.local_dims[k] + digits[k]);
        let col = traced.iter().fold(0, |acc, &k| acc * state.local_dims[k] + digits[k]);
        m[(r, col)] = a;
    }
    Ok(&m * m.adjoint())
}

/// Propagator that diagonalizes each sector Hamiltonian once and caches the
/// spectrum by Hamiltonian identity.
#[derive(Default)]
pub struct DensePropagator {
    cache: Mutex<HashMap<u64, std::sync::Arc<DenseSpectrum>>>,
}

impl DensePropagator {
    fn spectrum(&self, h: &SparseHamiltonian) -> Result<std::sync::Arc<DenseSpectrum>> {
        check_cap(h.dim(), DEFAULT_CAP)?;
        if let Some(s) = self.cache.lock().unwrap().get(&h.id()) {
            return Ok(s.clone());
        }
        let s = std::sync::Arc::new(DenseSpectrum::new(&h.to_dense().map(c)));
        self.cache.lock().unwrap().insert(h.id(), s.clone());
        Ok(s)
    }
}

impl Propagator for DensePropagator {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn evolve(&self, h: &SparseHamiltonian, v: &QuantumState, t: f64) -> Result<Evolution> {
        if v.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: v.dim(),
            });
        }
        let spec = self.spectrum(h)?;
        let out = spec.apply(&DVector::from_column_slice(v.amplitudes()), t);
        Ok(Evolution {
            state: QuantumState::new(v.basis().clone(), out.iter().copied().collect())?,
            error_estimate: 0.0,
            substeps: 1,
        })
    }

    fn tolerance(&self) -> f64 {
        0.0
    }
}

/// One oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: max_error <= tolerance,
            max_error,
            tolerance,
        }
    }
}

fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a Complex64>, b: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Sparse Hamiltonian against the ladder-product oracle, entrywise.
pub fn check_hamiltonian(graph: &LatticeGraph, params: BoseHubbardParams, bosons: usize) -> Result<f64> {
    let sectors = SectorCache::new(graph.clone(), params, None);
    let h = sectors.hamiltonian(bosons)?;
    let dense = dense_hamiltonian(graph, params, bosons, DEFAULT_CAP)?;
    let sector = DenseSector::new(graph.site_count(), bosons, DEFAULT_CAP)?;
    if sector.dim() != h.dim() {
        return Ok(f64::INFINITY);
    }
    let perm: Vec<usize> = h
        .basis()
        .iter()
        .map(|occ| sector.index_of(occ).ok_or_else(|| Error::NotInSector(occ.to_vec())))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for r in 0..h.dim() {
        for col in 0..h.dim() {
            worst = worst.max((dense.matrix[(perm[r], perm[col])] - c(h.get(r, col))).norm());
        }
    }
    Ok(worst)
}

/// Largest deviation of the fast OTOC from the state-evolution oracle over
/// `grid`.
pub fn check_otoc(
    graph: &LatticeGraph,
    params: BoseHubbardParams,
    pair: OperatorSitePair,
    initial: &[u8],
    grid: &TimeGrid,
    propagator: &dyn Propagator,
) -> Result<f64> {
    let sectors = SectorCache::new(graph.clone(), params, None);
    let fast = OtocProblem {
        sectors: &sectors,
        pair,
        initial: initial.to_vec(),
    }
    .series(grid, propagator)?;
    let oracle = DenseOtoc::new(graph, params, pair, initial, DEFAULT_CAP)?;
    let reference: Vec<Complex64> = fast.jt.iter().map(|&jt| oracle.at(jt, OtocOrdering::StateEvolution)).collect();
    Ok(max_abs_diff(&fast.values, &reference))
}

/// Reduced density matrix of the fast path against the reshape oracle,
/// entrywise, including the zero rows the fast path omits.
pub fn check_partial_trace(state: &ProductState, fast: &crate::entropy::DensityMatrix, keep: &[usize]) -> Result<f64> {
    let dense = dense_partial_trace(state, keep)?;
    let sites = &fast.subsystem.sites;
    let mut factors: Vec<usize> = sites.clone();
    let ancilla_factor = state.local_dims.len() - 1;
    if fast.subsystem.ancilla {
        factors.push(ancilla_factor);
    }
    let index = |cfg: &crate::entropy::LocalConfig| -> usize {
        let mut digits: Vec<(usize, usize)> = sites.iter().zip(&cfg.occupations).map(|(&s, &n)| (s, n as usize)).collect();
        if let Some(a) = cfg.ancilla {
            digits.push((ancilla_factor, a as usize));
        }
        digits.sort_unstable();
        digits.iter().fold(0, |acc, &(k, d)| acc * state.local_dims[k] + d)
    };
    let idx: Vec<usize> = fast.configs.iter().map(index).collect();
    let mut covered = DMatrix::from_element(dense.nrows(), dense.ncols(), false);
    let mut worst = 0.0f64;
    for (r, &dr) in idx.iter().enumerate() {
        for (col, &dc) in idx.iter().enumerate() {
            worst = worst.max((fast.matrix[(r, col)] - dense[(dr, dc)]).norm());
            covered[(dr, dc)] = true;
        }
    }
    for r in 0..dense.nrows() {
        for col in 0..dense.ncols() {
            if !covered[(r, col)] {
                worst = worst.max(dense[(r, col)].norm());
            }
        }
    }
    Ok(worst)
}

/// The built-in oracle suite, run by `oracle-check`.
pub fn run_oracle_checks() -> Result<Vec<OracleCheck>> {
    let params = BoseHubbardParams::default();
    let krylov = KrylovPropagator::default();
    let mut out = Vec::new();

    let dimer = LatticeGraph::new(2, &[(0, 1)], None, "dimer")?;
    let h = dense_hamiltonian(&dimer, BoseHubbardParams::new(1.0, 0.0), 1, DEFAULT_CAP)?;
    let sector = DenseSector::new(2, 1, DEFAULT_CAP)?;
    let v = dense_evolve(&h, &sector.basis_vector(&[1, 0])?, std::f64::consts::FRAC_PI_2)?;
    let mut expected = DVector::from_element(2, ZERO);
    expected[sector.index_of(&[0, 1]).unwrap()] = Complex64::new(0.0, 1.0);
    out.push(OracleCheck::new("dense_evolve_dimer_quarter_period", max_abs_diff(&v, &expected), 1e-14));

    for (name, variant) in [("hex_strip", 1), ("triangle_pair", 1), ("square_pair", 1), ("tri_square", 1), ("chain_pbc", 6)] {
        let inst = build_preset(name, variant)?;
        let l = inst.graph.site_count();
        out.push(OracleCheck::new(
            format!("hamiltonian_{name}_{variant}"),
            check_hamiltonian(&inst.graph, params, l)?,
            1e-12,
        ));
        out.push(OracleCheck::new(
            format!("otoc_{name}_{variant}"),
            check_otoc(&inst.graph, params, inst.default_pair(), &vec![1; l], &TimeGrid::new(0.0, 10.0, 41)?, &krylov)?,
            1e-8,
        ));
    }

    let triangle = LatticeGraph::new(3, &[(0, 1), (1, 2), (0, 2)], None, "triangle")?;
    let oracle = DenseOtoc::new(&triangle, params, OperatorSitePair::new(&triangle, 0, 1)?, &[1, 1, 1], DEFAULT_CAP)?;
    let worst = [0.37, 1.9, 4.2, 8.85]
        .iter()
        .map(|&jt| (oracle.at(jt, OtocOrdering::Heisenberg) - oracle.at(jt, OtocOrdering::StateEvolution)).norm())
        .fold(0.0, f64::max);
    out.push(OracleCheck::new("otoc_orderings_triangle", worst, 1e-12));

    let hex = build_preset("hex_strip", 1)?.graph;
    let sectors = SectorCache::new(hex.clone(), params, None);
    let h6 = sectors.hamiltonian(6)?;
    let psi = QuantumState::fock(h6.basis().clone(), &[1; 6])?;
    let evolved = krylov.evolve(&h6, &psi, 1.0 / params.j)?.state;
    let reference = {
        let ds = DenseSector::new(6, 6, DEFAULT_CAP)?;
        let dh = dense_hamiltonian(&hex, params, 6, DEFAULT_CAP)?;
        dense_evolve(&dh, &ds.basis_vector(&[1; 6])?, 1.0 / params.j)?
    };
    let ds = DenseSector::new(6, 6, DEFAULT_CAP)?;
    out.push(OracleCheck::new(
        "krylov_vs_dense_evolve_hexagon",
        max_abs_diff(&ds.import(&evolved)?, &reference),
        1e-10,
    ));

    let embedded = ProductState::from_lattice(&evolved, DEFAULT_CAP)?;
    let sub = Subsystem::sites([0, 1, 2]);
    let fast = reduced_density_matrix(&evolved, &sub)?;
    out.push(OracleCheck::new(
        "partial_trace_hexagon",
        check_partial_trace(&embedded, &fast, &sub.sites)?,
        1e-12,
    ));

    let ring = SectorCache::new(build_preset("chain_pbc", 6)?.graph, params, None);
    let anc = crate::entropy::evolve_ancilla_state(&AncillaLatticeState::bell_on_site(&ring, &[1; 6], 0)?, &ring, 0.5, &krylov)?;
    let embedded = ProductState::from_ancilla(&anc, DEFAULT_CAP)?;
    let sub = Subsystem::sites([0, 3]).with_ancilla();
    let fast = reduced_density_matrix(&anc, &sub)?;
    out.push(OracleCheck::new(
        "partial_trace_ancilla_ring",
        check_partial_trace(&embedded, &fast, &[0, 3, 6])?,
        1e-12,
    ));

    Ok(out)
}
