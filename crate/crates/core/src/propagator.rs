//! Time evolution `|ψ(t)⟩ = exp(-iHt)|ψ(0)⟩`.
//!
//! [`KrylovPropagator`] projects onto a Lanczos basis of at most `m`
//! vectors, exponentiates the tridiagonal projection exactly through its
//! eigendecomposition and halves the step until the a-posteriori
//! last-component error estimate is below tolerance. Times are physical
//! (ħ = 1); configuration step caps are given in units of `1/J`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{inner, norm, QuantumState};
use crate::hamiltonian::SparseHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrylovConfig {
    /// Largest Lanczos subspace per step.
    #[serde(rename = "m")]
    pub max_subspace: usize,
    /// Accepted error estimate per step.
    #[serde(rename = "tol")]
    pub tolerance: f64,
    /// Largest internal step, in units of `1/J`.
    pub max_step: f64,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            max_subspace: 30,
            tolerance: 1e-10,
            max_step: 1.0,
        }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_subspace < 2 {
            return Err(Error::InvalidKrylovConfig(format!(
                "subspace size {} < 2",
                self.max_subspace
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidKrylovConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidKrylovConfig(format!(
                "max_step {} must be positive",
                self.max_step
            )));
        }
        Ok(())
    }
}

/// Result of an evolution: the state plus the accumulated error estimate.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: QuantumState,
    pub error_estimate: f64,
    pub substeps: usize,
}

/// A time-evolution strategy, selectable by name.
pub trait Propagator: Send + Sync {
    fn name(&self) -> &'static str;

    /// `exp(-iHt)|v⟩`; negative `t` evolves backwards.
    fn evolve(&self, h: &SparseHamiltonian, v: &QuantumState, t: f64) -> Result<Evolution>;

    /// Nominal accuracy, recorded in output metadata.
    fn tolerance(&self) -> f64;
}

/// Lanczos projection of `H` onto the Krylov space of a start vector.
struct LanczosBasis {
    start_norm: f64,
    vectors: Vec<Vec<Complex64>>,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    /// `β_k`, coupling to the first vector outside the basis; zero after a
    /// happy breakdown.
    residual: f64,
}

impl LanczosBasis {
    fn build(h: &SparseHamiltonian, v: &[Complex64], m: usize) -> Self {
        let start_norm = norm(v);
        let dim = v.len();
        let m = m.min(dim).max(1);
        let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        vectors.push(v.iter().map(|a| a / start_norm).collect());
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut residual = 0.0;
        // breakdown threshold relative to the projected operator scale
        let mut scale = 0.0f64;
        for k in 0..m {
            h.matvec_into(&vectors[k], &mut w);
            let a = inner(&vectors[k], &w).re;
            alpha.push(a);
            scale = scale.max(a.abs()).max(beta.last().copied().unwrap_or(0.0));
            let prev_beta = if k > 0 { beta[k - 1] } else { 0.0 };
            {
                let vk = &vectors[k];
                let vprev = if k > 0 { Some(&vectors[k - 1]) } else { None };
                w.par_iter_mut().enumerate().for_each(|(r, x)| {
                    *x -= vk[r] * a;
                    if let Some(p) = vprev {
                        *x -= p[r] * prev_beta;
                    }
                });
            }
            // full reorthogonalisation against the whole basis
            for q in &vectors {
                let c = inner(q, &w);
                w.par_iter_mut().zip(q.par_iter()).for_each(|(x, y)| *x -= y * c);
            }
            let b = norm(&w);
            if b <= 1e-12 * scale.max(f64::MIN_POSITIVE) || k + 1 == dim {
                residual = 0.0;
                break;
            }
            residual = b;
            if k + 1 == m {
                break;
            }
            beta.push(b);
            vectors.push(w.iter().map(|x| x / b).collect());
        }
        let n = alpha.len();
        vectors.truncate(n);
        let mut t = DMatrix::zeros(n, n);
        for k in 0..n {
            t[(k, k)] = alpha[k];
            if k + 1 < n {
                t[(k, k + 1)] = beta[k];
                t[(k + 1, k)] = beta[k];
            }
        }
        Self {
            start_norm,
            vectors,
            eig: SymmetricEigen::new(t),
            residual,
        }
    }

    fn size(&self) -> usize {
        self.vectors.len()
    }

    /// `exp(-i dt T) e_1`.
    fn small_exp(&self, dt: f64) -> Vec<Complex64> {
        let q = &self.eig.eigenvectors;
        let n = self.size();
        let weights: Vec<Complex64> = (0..n)
            .map(|l| Complex64::from_polar(q[(0, l)], -dt * self.eig.eigenvalues[l]))
            .collect();
        (0..n)
            .map(|r| (0..n).map(|l| weights[l] * q[(r, l)]).sum())
            .collect()
    }

    fn error_estimate(&self, dt: f64, coeffs: &[Complex64]) -> f64 {
        (self.start_norm * dt * self.residual * coeffs[self.size() - 1].norm()).abs()
    }

    fn combine(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let dim = self.vectors[0].len();
        let scaled: Vec<Complex64> = coeffs.iter().map(|c| c * self.start_norm).collect();
        (0..dim)
            .into_par_iter()
            .map(|r| {
                self.vectors
                    .iter()
                    .zip(&scaled)
                    .map(|(v, c)| v[r] * c)
                    .sum()
            })
            .collect()
    }
}

/// One Krylov propagation over `dt`, split internally whenever the error
/// estimate exceeds `cfg.tolerance`. Returns the state, the summed error
/// estimate and the number of accepted sub-steps.
pub fn krylov_step(
    h: &SparseHamiltonian,
    v: &[Complex64],
    dt: f64,
    cfg: &KrylovConfig,
) -> Result<(Vec<Complex64>, f64, usize)> {
    cfg.validate()?;
    if v.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.len(),
        });
    }
    if dt == 0.0 || norm(v) == 0.0 {
        return Ok((v.to_vec(), 0.0, 0));
    }
    // Lanczos is shift invariant, so only the spectral half-width limits
    // the step; a phase spread beyond ~m radians needs more than m vectors
    let (lo, hi) = h.spectral_bounds();
    let half_width = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let phase_cap = cfg.max_subspace as f64 / half_width;
    let min_step = dt.abs() * 1e-12;

    let mut w = v.to_vec();
    let mut remaining = dt;
    let mut total_error = 0.0;
    let mut substeps = 0;
    while remaining != 0.0 {
        let basis = LanczosBasis::build(h, &w, cfg.max_subspace);
        let exact = basis.residual == 0.0;
        let mut step = if exact {
            remaining
        } else {
            remaining.signum() * remaining.abs().min(phase_cap)
        };
        loop {
            let coeffs = basis.small_exp(step);
            let est = if exact { 0.0 } else { basis.error_estimate(step, &coeffs) };
            if est <= cfg.tolerance {
                w = basis.combine(&coeffs);
                total_error += est;
                break;
            }
            if step.abs() / 2.0 < min_step {
                return Err(Error::ToleranceNotMet {
                    tolerance: cfg.tolerance,
                    estimate: est,
                    step,
                });
            }
            step /= 2.0;
        }
        substeps += 1;
        remaining = if step == remaining { 0.0 } else { remaining - step };
        if remaining.abs() < min_step {
            remaining = 0.0;
        }
    }
    Ok((w, total_error, substeps))
}

#[derive(Debug, Clone, Default)]
pub struct KrylovPropagator {
    pub config: KrylovConfig,
}

impl KrylovPropagator {
    pub fn new(config: KrylovConfig) -> Self {
        Self { config }
    }
}

impl Propagator for KrylovPropagator {
    fn name(&self) -> &'static str {
        "krylov"
    }

    fn tolerance(&self) -> f64 {
        self.config.tolerance
    }

    fn evolve(&self, h: &SparseHamiltonian, v: &QuantumState, t: f64) -> Result<Evolution> {
        evolve(h, v, t, &self.config)
    }
}

/// Evolves to `t` exactly through a sequence of Krylov steps no longer than
/// `cfg.max_step / J`.
pub fn evolve(h: &SparseHamiltonian, v: &QuantumState, t: f64, cfg: &KrylovConfig) -> Result<Evolution> {
    cfg.validate()?;
    if v.dim() != h.dim() || v.basis().bosons() != h.basis().bosons() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: v.dim(),
        });
    }
    let j = h.params().j.abs();
    let max_dt = if j > 0.0 { cfg.max_step / j } else { cfg.max_step };
    let chunks = (t.abs() / max_dt).ceil().max(1.0) as usize;
    let mut amps = v.amplitudes().to_vec();
    let mut error = 0.0;
    let mut substeps = 0;
    let mut done = 0.0;
    for c in 0..chunks {
        // land exactly on t
        let target = if c + 1 == chunks { t } else { t * (c + 1) as f64 / chunks as f64 };
        let (next, e, s) = krylov_step(h, &amps, target - done, cfg)?;
        amps = next;
        error += e;
        substeps += s;
        done = target;
    }
    Ok(Evolution {
        state: QuantumState::new(h.basis().clone(), amps)?,
        error_estimate: error,
        substeps,
    })
}

/// Name-addressable propagators.
pub struct PropagatorRegistry {
    entries: Vec<(&'static str, Box<dyn Fn(&KrylovConfig) -> Box<dyn Propagator> + Send + Sync>)>,
}

impl PropagatorRegistry {
    pub fn builtin() -> Self {
        let mut r = Self { entries: Vec::new() };
        r.register("krylov", |cfg| Box::new(KrylovPropagator::new(*cfg)));
        r.register("dense", |_| Box::new(crate::oracle::DensePropagator::default()));
        r
    }

    pub fn register<F>(&mut self, name: &'static str, factory: F)
    where
        F: Fn(&KrylovConfig) -> Box<dyn Propagator> + Send + Sync + 'static,
    {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, Box::new(factory)));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn create(&self, name: &str, cfg: &KrylovConfig) -> Result<Box<dyn Propagator>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f(cfg))
            .ok_or_else(|| Error::UnknownPropagator(name.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use crate::hamiltonian::{build_hamiltonian, BoseHubbardParams};
    use crate::lattice::{build_preset, LatticeGraph};
    use std::f64::consts::FRAC_PI_2;
    use std::sync::Arc;

    fn dimer(j: f64) -> SparseHamiltonian {
        let g = LatticeGraph::new(2, &[(0, 1)], None, "dimer").unwrap();
        build_hamiltonian(&g, BoseHubbardParams::new(j, 16.0), Arc::new(enumerate_basis(2, 1, 1).unwrap())).unwrap()
    }

    fn hexagon() -> (SparseHamiltonian, QuantumState) {
        let g = build_preset("chain_pbc", 6).unwrap().graph;
        let b = Arc::new(enumerate_basis(6, 6, 6).unwrap());
        let h = build_hamiltonian(&g, BoseHubbardParams::from_ratio(4.0, 4.0), b.clone()).unwrap();
        let psi = QuantumState::fock(b, &[1; 6]).unwrap();
        (h, psi)
    }

    #[test]
    fn zero_time_is_identity() {
        let (h, psi) = hexagon();
        let (out, err, steps) = krylov_step(&h, psi.amplitudes(), 0.0, &KrylovConfig::default()).unwrap();
        assert_eq!(out, psi.amplitudes());
        assert_eq!((err, steps), (0.0, 0));
    }

    #[test]
    fn dimer_quarter_period() {
        // exp(-iHt)|1,0⟩ = cos(Jt)|1,0⟩ + i sin(Jt)|0,1⟩
        let j = 4.0;
        let h = dimer(j);
        let v = QuantumState::fock(h.basis().clone(), &[1, 0]).unwrap();
        let (out, _, _) = krylov_step(&h, v.amplitudes(), FRAC_PI_2 / j, &KrylovConfig::default()).unwrap();
        let k01 = h.basis().rank(&[0, 1]).unwrap();
        let k10 = h.basis().rank(&[1, 0]).unwrap();
        assert!((out[k01] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!(out[k10].norm() < 1e-12);
    }

    #[test]
    fn invalid_config() {
        let h = dimer(1.0);
        let v = vec![Complex64::new(1.0, 0.0); 2];
        let bad = KrylovConfig {
            max_subspace: 1,
            ..Default::default()
        };
        assert!(matches!(krylov_step(&h, &v, 1.0, &bad), Err(Error::InvalidKrylovConfig(_))));
        let bad = KrylovConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let (h, psi) = hexagon();
        let cfg = KrylovConfig {
            max_subspace: 2,
            tolerance: 1e-300,
            max_step: 1.0,
        };
        assert!(matches!(
            krylov_step(&h, psi.amplitudes(), 0.1, &cfg),
            Err(Error::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn reversibility_and_conservation() {
        let (h, psi) = hexagon();
        let cfg = KrylovConfig::default();
        let t = 10.0 / 4.0;
        let fwd = evolve(&h, &psi, t, &cfg).unwrap();
        let back = evolve(&h, &fwd.state, -t, &cfg).unwrap();
        let diff: f64 = back
            .state
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-9, "{diff}");

        // ⟨H⟩ vanishes for unit filling, so drift is measured against the
        // energy spread of the initial state
        let e0 = h.energy(&psi).unwrap();
        let spread = h.energy_spread(&psi).unwrap();
        assert!(spread > 1.0);
        let mut state = psi.clone();
        for _ in 0..20 {
            state = evolve(&h, &state, 0.5 / 4.0, &cfg).unwrap().state;
            assert!((state.norm() - 1.0).abs() < 1e-9);
            assert!(((h.energy(&state).unwrap() - e0) / spread).abs() < 1e-9);
        }
    }

    #[test]
    fn happy_breakdown_is_exact() {
        let h = dimer(1.0);
        let v = QuantumState::fock(h.basis().clone(), &[1, 0]).unwrap();
        let out = evolve(&h, &v, 3.7, &KrylovConfig::default()).unwrap();
        let k10 = h.basis().rank(&[1, 0]).unwrap();
        assert!((out.state.amplitudes()[k10].re - 3.7f64.cos()).abs() < 1e-13);
        assert_eq!(out.error_estimate, 0.0);
    }

    #[test]
    fn registry_lookup() {
        let reg = PropagatorRegistry::builtin();
        assert_eq!(reg.names(), vec!["krylov", "dense"]);
        assert_eq!(reg.create("krylov", &KrylovConfig::default()).unwrap().name(), "krylov");
        assert!(matches!(
            reg.create("rk4", &KrylovConfig::default()),
            Err(Error::UnknownPropagator(_))
        ));
    }
}
