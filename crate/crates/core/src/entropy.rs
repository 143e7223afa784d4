//! Reduced density matrices, von Neumann entropies and (tripartite) mutual
//! information, for lattice states and for lattice states entangled with a
//! stationary ancilla qubit. Entropies are in nats.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::format::fmt_f64;
use crate::hamiltonian::SectorCache;
use crate::observables::{OtocSeries, TimeGrid};
use crate::propagator::Propagator;

/// Eigenvalues below this are treated as exact zeros.
pub const EIGEN_CLIP: f64 = 1e-14;
const NEGATIVE_TOLERANCE: f64 = 1e-10;
const TRACE_TOLERANCE: f64 = 1e-10;

/// A set of lattice sites, optionally together with the ancilla qubit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    #[serde(default)]
    pub ancilla: bool,
    pub sites: Vec<usize>,
}

impl Subsystem {
    pub fn sites(sites: impl IntoIterator<Item = usize>) -> Self {
        let mut sites: Vec<usize> = sites.into_iter().collect();
        sites.sort_unstable();
        sites.dedup();
        Self { ancilla: false, sites }
    }

    pub fn ancilla() -> Self {
        Self {
            ancilla: true,
            sites: Vec::new(),
        }
    }

    pub fn with_ancilla(mut self) -> Self {
        self.ancilla = true;
        self
    }

    pub fn overlaps(&self, other: &Subsystem) -> bool {
        (self.ancilla && other.ancilla) || self.sites.iter().any(|s| other.sites.contains(s))
    }

    pub fn union(&self, other: &Subsystem) -> Subsystem {
        let mut s = Subsystem::sites(self.sites.iter().chain(&other.sites).copied());
        s.ancilla = self.ancilla || other.ancilla;
        s
    }
}

/// A lattice state tensored with an ancilla qubit that never evolves:
/// `|0⟩|branch₀⟩ + |1⟩|branch₁⟩`. Branches may sit in different particle
/// sectors.
#[derive(Debug, Clone)]
pub struct AncillaLatticeState {
    branches: [QuantumState; 2],
}

impl AncillaLatticeState {
    /// Normalises jointly so that `‖b₀‖² + ‖b₁‖² = 1`.
    pub fn new(branch0: QuantumState, branch1: QuantumState) -> Result<Self> {
        if branch0.basis().sites() != branch1.basis().sites() {
            return Err(Error::DimensionMismatch {
                expected: branch0.basis().sites(),
                found: branch1.basis().sites(),
            });
        }
        let total = (branch0.norm().powi(2) + branch1.norm().powi(2)).sqrt();
        if total == 0.0 {
            return Err(Error::InvalidSubsystem("both ancilla branches vanish".into()));
        }
        let scale = |s: QuantumState| {
            let basis = s.basis().clone();
            let amps = s.into_amplitudes().into_iter().map(|a| a / total).collect();
            QuantumState::new(basis, amps)
        };
        Ok(Self {
            branches: [scale(branch0)?, scale(branch1)?],
        })
    }

    /// `(|0⟩_A |1⟩_b + |1⟩_A |0⟩_b) ⊗ |rest⟩ / √2`, with `occupation` giving
    /// the lattice state of the first branch (site `b` must hold one boson).
    pub fn bell_on_site(sectors: &SectorCache, occupation: &[u8], b: usize) -> Result<Self> {
        if b >= occupation.len() || occupation[b] != 1 {
            return Err(Error::InvalidSubsystem(format!(
                "site {b} must hold exactly one boson in the initial occupation"
            )));
        }
        let n: usize = occupation.iter().map(|&x| x as usize).sum();
        let mut emptied = occupation.to_vec();
        emptied[b] = 0;
        let b0 = QuantumState::fock(sectors.basis(n)?, occupation)?;
        let b1 = QuantumState::fock(sectors.basis(n - 1)?, &emptied)?;
        Self::new(b0, b1)
    }

    pub fn branch(&self, ancilla: usize) -> &QuantumState {
        &self.branches[ancilla]
    }

    pub fn branch_norms(&self) -> [f64; 2] {
        [self.branches[0].norm(), self.branches[1].norm()]
    }

    pub fn site_count(&self) -> usize {
        self.branches[0].basis().sites()
    }
}

/// Either a plain lattice state or one carrying an ancilla.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Lattice(&'a QuantumState),
    WithAncilla(&'a AncillaLatticeState),
}

impl<'a> From<&'a QuantumState> for StateRef<'a> {
    fn from(s: &'a QuantumState) -> Self {
        StateRef::Lattice(s)
    }
}

impl<'a> From<&'a AncillaLatticeState> for StateRef<'a> {
    fn from(s: &'a AncillaLatticeState) -> Self {
        StateRef::WithAncilla(s)
    }
}

impl StateRef<'_> {
    fn site_count(&self) -> usize {
        match self {
            StateRef::Lattice(s) => s.basis().sites(),
            StateRef::WithAncilla(s) => s.site_count(),
        }
    }

    fn branches(&self) -> Vec<(Option<u8>, &QuantumState)> {
        match self {
            StateRef::Lattice(s) => vec![(None, *s)],
            StateRef::WithAncilla(s) => vec![(Some(0), &s.branches[0]), (Some(1), &s.branches[1])],
        }
    }
}

/// Local basis label of a subsystem: ancilla value (when included) and the
/// occupations of its sites in ascending site order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalConfig {
    pub ancilla: Option<u8>,
    pub occupations: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub subsystem: Subsystem,
    pub configs: Vec<LocalConfig>,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest `|ρ - ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        worst
    }
}

fn validate_subsystem(state: &StateRef<'_>, sub: &Subsystem) -> Result<()> {
    let l = state.site_count();
    if let Some(&s) = sub.sites.iter().find(|&&s| s >= l) {
        return Err(Error::InvalidSubsystem(format!("site {s} outside [0, {l})")));
    }
    let mut sorted = sub.sites.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sub.sites.len() {
        return Err(Error::InvalidSubsystem(format!("repeated sites in {:?}", sub.sites)));
    }
    if sub.ancilla && matches!(state, StateRef::Lattice(_)) {
        return Err(Error::InvalidSubsystem("state has no ancilla".into()));
    }
    Ok(())
}

/// The state as a matrix `M[config, environment]`, in sparse form: the
/// sorted subsystem configurations, and per environment configuration the
/// `(config index, amplitude)` entries of its column.
struct Reshaped {
    configs: Vec<LocalConfig>,
    columns: Vec<Vec<(usize, Complex64)>>,
}

fn reshape(state: &StateRef<'_>, sub: &Subsystem) -> Result<Reshaped> {
    validate_subsystem(state, sub)?;
    let mut sites = sub.sites.clone();
    sites.sort_unstable();
    let complement: Vec<usize> = (0..state.site_count()).filter(|s| !sites.contains(s)).collect();

    type EnvKey = (Option<u8>, Vec<u8>);
    let mut configs: BTreeMap<LocalConfig, usize> = BTreeMap::new();
    let mut groups: BTreeMap<EnvKey, Vec<(LocalConfig, Complex64)>> = BTreeMap::new();
    for (ancilla, branch) in state.branches() {
        for (occ, &amp) in branch.basis().iter().zip(branch.amplitudes()) {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let local = LocalConfig {
                ancilla: if sub.ancilla { ancilla } else { None },
                occupations: sites.iter().map(|&s| occ[s]).collect(),
            };
            let env = (
                if sub.ancilla { None } else { ancilla },
                complement.iter().map(|&s| occ[s]).collect(),
            );
            configs.entry(local.clone()).or_insert(0);
            groups.entry(env).or_default().push((local, amp));
        }
    }
    for (k, idx) in configs.values_mut().enumerate() {
        *idx = k;
    }
    let columns = groups
        .into_values()
        .map(|members| members.into_iter().map(|(c, a)| (configs[&c], a)).collect())
        .collect();
    Ok(Reshaped {
        configs: configs.into_keys().collect(),
        columns,
    })
}

/// Traces out everything outside `sub`.
pub fn reduced_density_matrix<'a>(state: impl Into<StateRef<'a>>, sub: &Subsystem) -> Result<DensityMatrix> {
    let r = reshape(&state.into(), sub)?;
    let dim = r.configs.len();
    let mut matrix = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for col in &r.columns {
        for &(i, ai) in col {
            for &(k, ak) in col {
                matrix[(i, k)] += ai * ak.conj();
            }
        }
    }
    Ok(DensityMatrix {
        subsystem: sub.clone(),
        configs: r.configs,
        matrix,
    })
}

/// `-Σ λ ln λ` over the eigenvalues of `ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_matrix(&rho.matrix)
}

pub fn entropy_of_matrix(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotDensityMatrix(format!("shape {}x{}", m.nrows(), m.ncols())));
    }
    let tr = m.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOLERANCE {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > TRACE_TOLERANCE {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let mut s = 0.0;
    for &l in eig.iter() {
        if l < -NEGATIVE_TOLERANCE {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {l:e}")));
        }
        if l > EIGEN_CLIP {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

/// Entropy of `ρ_sub`. For a pure global state `M M†` and `M† M` share
/// their nonzero spectrum, so the smaller of the two is diagonalized.
pub fn subsystem_entropy<'a>(state: impl Into<StateRef<'a>>, sub: &Subsystem) -> Result<f64> {
    let r = reshape(&state.into(), sub)?;
    let (rows, cols) = (r.configs.len(), r.columns.len());
    let mut m = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for (e, col) in r.columns.iter().enumerate() {
        for &(i, a) in col {
            m[(i, e)] = a;
        }
    }
    let gram = if rows <= cols { &m * m.adjoint() } else { m.adjoint() * &m };
    entropy_of_matrix(&gram)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutualInformation {
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub mi: f64,
}

/// `I(A:B) = S_A + S_B - S_AB`.
pub fn mutual_information<'a>(state: impl Into<StateRef<'a>>, a: &Subsystem, b: &Subsystem) -> Result<MutualInformation> {
    let state = state.into();
    if a.overlaps(b) {
        return Err(Error::InvalidSubsystem(format!("{a:?} and {b:?} overlap")));
    }
    let s_a = subsystem_entropy(state, a)?;
    let s_b = subsystem_entropy(state, b)?;
    let s_ab = subsystem_entropy(state, &a.union(b))?;
    Ok(MutualInformation {
        s_a,
        s_b,
        s_ab,
        mi: s_a + s_b - s_ab,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripartiteInformation {
    pub i_ab: f64,
    pub i_ac: f64,
    pub i_abc: f64,
    pub tmi: f64,
}

/// `I₃(A:B:C) = I(A:B) + I(A:C) - I(A:BC)`.
pub fn tripartite_mutual_information<'a>(
    state: impl Into<StateRef<'a>>,
    a: &Subsystem,
    b: &Subsystem,
    c: &Subsystem,
) -> Result<TripartiteInformation> {
    let state = state.into();
    if b.overlaps(c) {
        return Err(Error::InvalidSubsystem(format!("{b:?} and {c:?} overlap")));
    }
    let i_ab = mutual_information(state, a, b)?.mi;
    let i_ac = mutual_information(state, a, c)?.mi;
    let i_abc = mutual_information(state, a, &b.union(c))?.mi;
    Ok(TripartiteInformation {
        i_ab,
        i_ac,
        i_abc,
        tmi: i_ab + i_ac - i_abc,
    })
}

/// Evolves both lattice branches by `t` under their own sector Hamiltonians;
/// the ancilla is untouched.
pub fn evolve_ancilla_state(
    state: &AncillaLatticeState,
    sectors: &SectorCache,
    t: f64,
    propagator: &dyn Propagator,
) -> Result<AncillaLatticeState> {
    let evolve = |s: &QuantumState| -> Result<QuantumState> {
        let h = sectors.hamiltonian(s.basis().bosons())?;
        if h.dim() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: s.dim(),
            });
        }
        Ok(propagator.evolve(&h, s, t)?.state)
    };
    Ok(AncillaLatticeState {
        branches: [evolve(&state.branches[0])?, evolve(&state.branches[1])?],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiRow {
    pub jt: f64,
    #[serde(flatten)]
    pub values: MutualInformation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmiRow {
    pub jt: f64,
    #[serde(flatten)]
    pub values: TripartiteInformation,
}

/// Bipartite MI along `U(t)|initial⟩` on the grid.
pub fn mi_series(
    sectors: &SectorCache,
    initial: &[u8],
    a: &Subsystem,
    b: &Subsystem,
    grid: &TimeGrid,
    propagator: &dyn Propagator,
) -> Result<Vec<MiRow>> {
    grid.validate()?;
    let n: usize = initial.iter().map(|&x| x as usize).sum();
    let h = sectors.hamiltonian(n)?;
    let mut state = QuantumState::fock(h.basis().clone(), initial)?;
    let j = sectors.params().j;
    let mut t_prev = 0.0;
    let mut rows = Vec::with_capacity(grid.points);
    for jt in grid.values() {
        let t = jt / j;
        if t != t_prev {
            state = propagator.evolve(&h, &state, t - t_prev)?.state;
            t_prev = t;
        }
        rows.push(MiRow {
            jt,
            values: mutual_information(&state, a, b)?,
        });
    }
    Ok(rows)
}

/// Tripartite MI along the evolution of an ancilla state; `a` is normally
/// the ancilla itself.
pub fn tmi_series(
    sectors: &SectorCache,
    initial: &AncillaLatticeState,
    a: &Subsystem,
    b: &Subsystem,
    c: &Subsystem,
    grid: &TimeGrid,
    propagator: &dyn Propagator,
) -> Result<Vec<TmiRow>> {
    grid.validate()?;
    let j = sectors.params().j;
    let mut state = initial.clone();
    let mut t_prev = 0.0;
    let mut rows = Vec::with_capacity(grid.points);
    for jt in grid.values() {
        let t = jt / j;
        if t != t_prev {
            state = evolve_ancilla_state(&state, sectors, t - t_prev, propagator)?;
            t_prev = t;
        }
        rows.push(TmiRow {
            jt,
            values: tripartite_mutual_information(&state, a, b, c)?,
        });
    }
    Ok(rows)
}

/// Slack for declaring `ΔOTOC ≤ ΔI` satisfied, absorbing round-off at `t = 0`.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub jt: f64,
    pub delta_otoc: f64,
    pub delta_mi: f64,
    pub satisfied: bool,
}

/// Per-time comparison of `1 - Re OTOC(t)` against `I(t) - I(t₀)`.
pub fn otoc_mi_bound_check(otoc: &OtocSeries, mi: &[(f64, f64)]) -> Result<Vec<BoundRow>> {
    if otoc.len() != mi.len() {
        return Err(Error::GridMismatch(format!("{} OTOC points vs {} MI points", otoc.len(), mi.len())));
    }
    let Some(&(_, mi0)) = mi.first() else {
        return Ok(Vec::new());
    };
    otoc.jt
        .iter()
        .zip(&otoc.values)
        .zip(mi)
        .map(|((&jt, f), &(jt_mi, i))| {
            if (jt - jt_mi).abs() > 1e-9 * jt.abs().max(1.0) {
                return Err(Error::GridMismatch(format!("Jt {jt} vs {jt_mi}")));
            }
            let delta_otoc = 1.0 - f.re;
            let delta_mi = i - mi0;
            Ok(BoundRow {
                jt,
                delta_otoc,
                delta_mi,
                satisfied: delta_otoc <= delta_mi + BOUND_SLACK,
            })
        })
        .collect()
}

pub fn write_mi_csv<W: Write>(mut out: W, rows: &[MiRow]) -> Result<()> {
    writeln!(out, "jt,s_a,s_b,s_ab,mi")?;
    for r in rows {
        let v = r.values;
        writeln!(out, "{},{},{},{},{}", fmt_f64(r.jt), fmt_f64(v.s_a), fmt_f64(v.s_b), fmt_f64(v.s_ab), fmt_f64(v.mi))?;
    }
    Ok(())
}

pub fn write_tmi_csv<W: Write>(mut out: W, rows: &[TmiRow]) -> Result<()> {
    writeln!(out, "jt,i_ab,i_ac,i_abc,tmi")?;
    for r in rows {
        let v = r.values;
        writeln!(out, "{},{},{},{},{}", fmt_f64(r.jt), fmt_f64(v.i_ab), fmt_f64(v.i_ac), fmt_f64(v.i_abc), fmt_f64(v.tmi))?;
    }
    Ok(())
}

pub fn write_bound_csv<W: Write>(mut out: W, rows: &[BoundRow]) -> Result<()> {
    writeln!(out, "jt,delta_otoc,delta_mi,satisfied")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", fmt_f64(r.jt), fmt_f64(r.delta_otoc), fmt_f64(r.delta_mi), r.satisfied)?;
    }
    Ok(())
}
