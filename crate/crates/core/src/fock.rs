//! Fixed-particle-number bosonic occupation bases and ladder operators.
//!
//! States of a sector are ordered lexicographically by occupation vector,
//! `(0,..,0,N) < ... < (N,0,..,0)`, and indexed combinatorially: ranking
//! costs one table lookup per site.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Number of ways to place `bosons` into `sites` sites with at most `cap`
/// per site (bounded compositions).
pub fn sector_dimension(sites: usize, bosons: usize, cap: usize) -> u64 {
    let cap = cap.min(bosons);
    // counts[r] for the current number of sites
    let mut counts = vec![0u64; bosons + 1];
    counts[0] = 1;
    for _ in 0..sites {
        let mut next = vec![0u64; bosons + 1];
        for (r, slot) in next.iter_mut().enumerate() {
            *slot = (0..=cap.min(r)).map(|v| counts[r - v]).fold(0u64, u64::saturating_add);
        }
        counts = next;
    }
    counts[bosons]
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    bosons: usize,
    n_max: usize,
    cap: usize,
    states: Vec<u8>,
    /// `skip[(k * (bosons + 1) + rem) * (cap + 1) + n]`: number of states
    /// that precede occupation `n` at a site followed by `k` more sites,
    /// with `rem` bosons still to place.
    skip: Vec<u64>,
}

impl FockBasis {
    /// Enumerates the sector of `bosons` bosons on `sites` sites with at most
    /// `n_max` per site. `n_max >= bosons` is the exact, untruncated sector.
    pub fn new(sites: usize, bosons: usize, n_max: usize) -> Result<Self> {
        if sites == 0 || sites.saturating_mul(n_max) < bosons {
            return Err(Error::EmptySector {
                sites,
                bosons,
                cap: n_max,
            });
        }
        if n_max.min(bosons) > u8::MAX as usize {
            return Err(Error::EmptySector {
                sites,
                bosons,
                cap: n_max,
            });
        }
        let cap = n_max.min(bosons);
        // count[k][r]: states of k sites holding r bosons
        let mut count = vec![vec![0u64; bosons + 1]; sites + 1];
        count[0][0] = 1;
        for k in 1..=sites {
            for r in 0..=bosons {
                count[k][r] = (0..=cap.min(r)).map(|v| count[k - 1][r - v]).sum();
            }
        }
        let mut skip = vec![0u64; sites * (bosons + 1) * (cap + 1)];
        for k in 0..sites {
            for rem in 0..=bosons {
                let mut acc = 0u64;
                for n in 0..=cap {
                    skip[(k * (bosons + 1) + rem) * (cap + 1) + n] = acc;
                    if n <= rem {
                        acc += count[k][rem - n];
                    }
                }
            }
        }
        let dim = count[sites][bosons] as usize;
        let mut basis = Self {
            sites,
            bosons,
            n_max,
            cap,
            states: Vec::with_capacity(dim * sites),
            skip,
        };
        let mut occ = vec![0u8; sites];
        basis.enumerate_into(0, bosons, &mut occ);
        debug_assert_eq!(basis.states.len(), dim * sites);
        Ok(basis)
    }

    fn enumerate_into(&mut self, site: usize, rem: usize, occ: &mut [u8]) {
        if site + 1 == self.sites {
            if rem <= self.cap {
                occ[site] = rem as u8;
                self.states.extend_from_slice(occ);
            }
            return;
        }
        let left = self.sites - site - 1;
        for n in 0..=self.cap.min(rem) {
            if left * self.cap < rem - n {
                continue;
            }
            occ[site] = n as u8;
            self.enumerate_into(site + 1, rem - n, occ);
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn bosons(&self) -> usize {
        self.bosons
    }

    /// Requested per-site cap.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Effective per-site cap, `min(n_max, bosons)`.
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn is_truncated(&self) -> bool {
        self.n_max < self.bosons
    }

    pub fn dim(&self) -> usize {
        self.states.len() / self.sites
    }

    pub fn state(&self, index: usize) -> &[u8] {
        &self.states[index * self.sites..(index + 1) * self.sites]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.states.chunks_exact(self.sites)
    }

    /// Occupation vector at `index`.
    pub fn unrank(&self, index: usize) -> Option<Vec<u8>> {
        (index < self.dim()).then(|| self.state(index).to_vec())
    }

    /// Index of `occ`, or `None` when it is not in the sector.
    pub fn try_rank(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.sites {
            return None;
        }
        let mut rem = self.bosons;
        let mut index = 0u64;
        for (s, &n) in occ.iter().enumerate() {
            let n = n as usize;
            if n > self.cap || n > rem {
                return None;
            }
            let k = self.sites - s - 1;
            index += self.skip[(k * (self.bosons + 1) + rem) * (self.cap + 1) + n];
            rem -= n;
        }
        (rem == 0).then_some(index as usize)
    }

    pub fn rank(&self, occ: &[u8]) -> Result<usize> {
        self.try_rank(occ).ok_or_else(|| Error::NotInSector(occ.to_vec()))
    }

    /// The sector with `bosons` particles sharing this basis' site count and
    /// requested cap.
    /// The same lattice with a different particle number. An exact basis has
    /// exact siblings; a truncated one keeps its cap.
    pub fn sibling(&self, bosons: usize) -> Result<FockBasis> {
        let n_max = if self.is_truncated() { self.n_max } else { self.n_max.max(bosons) };
        FockBasis::new(self.sites, bosons, n_max)
    }
}

pub fn enumerate_basis(sites: usize, bosons: usize, n_max: usize) -> Result<FockBasis> {
    FockBasis::new(sites, bosons, n_max)
}

/// Complex amplitudes over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            amplitudes: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// The normalised Fock state `|occ⟩`.
    pub fn fock(basis: Arc<FockBasis>, occ: &[u8]) -> Result<Self> {
        let k = basis.rank(occ)?;
        let mut s = Self::zeros(basis);
        s.amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        if self.dim() != other.dim() || self.basis.bosons() != other.basis.bosons() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }
}

const CHUNK: usize = 4096;

/// `Σ conj(a)·b`, summed over fixed-size chunks so the result does not
/// depend on the thread count.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let partial: Vec<Complex64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum())
        .collect();
    partial.into_iter().sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|x| x.iter().map(|p| p.norm_sqr()).sum())
        .collect();
    partial.into_iter().sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Annihilation,
    Creation,
}

/// A single-site ladder operator between two fixed sectors, stored as a
/// gather map over the destination basis.
#[derive(Debug, Clone)]
pub struct LadderOp {
    kind: LadderKind,
    site: usize,
    from: Arc<FockBasis>,
    to: Arc<FockBasis>,
    source: Vec<u32>,
    factor: Vec<f64>,
}

const NO_SOURCE: u32 = u32::MAX;

impl LadderOp {
    pub fn new(kind: LadderKind, site: usize, from: Arc<FockBasis>, to: Arc<FockBasis>) -> Result<Self> {
        if site >= from.sites() {
            return Err(Error::SiteOutOfRange {
                index: site,
                site_count: from.sites(),
            });
        }
        if from.sites() != to.sites() {
            return Err(Error::DimensionMismatch {
                expected: from.sites(),
                found: to.sites(),
            });
        }
        let expected = match kind {
            LadderKind::Annihilation => {
                if from.bosons() == 0 {
                    return Err(Error::VacuumAnnihilation);
                }
                from.bosons() - 1
            }
            LadderKind::Creation => from.bosons() + 1,
        };
        if to.bosons() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: to.bosons(),
            });
        }
        let (source, factor): (Vec<u32>, Vec<f64>) = (0..to.dim())
            .into_par_iter()
            .map_init(
                || vec![0u8; to.sites()],
                |occ, d| {
                    occ.copy_from_slice(to.state(d));
                    let n = occ[site];
                    let (src_n, amp) = match kind {
                        // a|.., n+1, ..⟩ = sqrt(n+1) |.., n, ..⟩
                        LadderKind::Annihilation => (n.checked_add(1), ((n as f64) + 1.0).sqrt()),
                        // a†|.., n-1, ..⟩ = sqrt(n) |.., n, ..⟩
                        LadderKind::Creation => (n.checked_sub(1), (n as f64).sqrt()),
                    };
                    match src_n {
                        Some(m) => {
                            occ[site] = m;
                            match from.try_rank(occ) {
                                Some(k) => (k as u32, amp),
                                None => (NO_SOURCE, 0.0),
                            }
                        }
                        None => (NO_SOURCE, 0.0),
                    }
                },
            )
            .unzip();
        Ok(Self {
            kind,
            site,
            from,
            to,
            source,
            factor,
        })
    }

    pub fn annihilation(site: usize, from: Arc<FockBasis>, to: Arc<FockBasis>) -> Result<Self> {
        Self::new(LadderKind::Annihilation, site, from, to)
    }

    pub fn creation(site: usize, from: Arc<FockBasis>, to: Arc<FockBasis>) -> Result<Self> {
        Self::new(LadderKind::Creation, site, from, to)
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn from_basis(&self) -> &Arc<FockBasis> {
        &self.from
    }

    pub fn to_basis(&self) -> &Arc<FockBasis> {
        &self.to
    }

    /// True when the destination sector is cut by the occupation cap, so some
    /// images are dropped.
    pub fn is_approximate(&self) -> bool {
        self.kind == LadderKind::Creation && self.to.is_truncated()
    }

    pub fn apply_raw(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(amplitudes.len(), self.from.dim());
        self.source
            .par_iter()
            .zip(self.factor.par_iter())
            .map(|(&s, &f)| {
                if s == NO_SOURCE {
                    Complex64::new(0.0, 0.0)
                } else {
                    amplitudes[s as usize] * f
                }
            })
            .collect()
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.basis().bosons() != self.from.bosons() || state.dim() != self.from.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.from.dim(),
                found: state.dim(),
            });
        }
        QuantumState::new(self.to.clone(), self.apply_raw(state.amplitudes()))
    }
}

/// `a_site |state⟩`, landing in the sector with one boson fewer.
pub fn apply_annihilation(state: &QuantumState, site: usize) -> Result<QuantumState> {
    let from = state.basis().clone();
    if site >= from.sites() {
        return Err(Error::SiteOutOfRange {
            index: site,
            site_count: from.sites(),
        });
    }
    if from.bosons() == 0 {
        return Err(Error::VacuumAnnihilation);
    }
    let to = Arc::new(from.sibling(from.bosons() - 1)?);
    LadderOp::annihilation(site, from, to)?.apply(state)
}

/// `a†_site |state⟩`, landing in the sector with one boson more.
pub fn apply_creation(state: &QuantumState, site: usize) -> Result<QuantumState> {
    let from = state.basis().clone();
    if site >= from.sites() {
        return Err(Error::SiteOutOfRange {
            index: site,
            site_count: from.sites(),
        });
    }
    let to = Arc::new(from.sibling(from.bosons() + 1)?);
    LadderOp::creation(site, from, to)?.apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_sites_two_bosons() {
        let b = enumerate_basis(2, 2, 2).unwrap();
        let states: Vec<_> = b.iter().map(<[u8]>::to_vec).collect();
        assert_eq!(states, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(b.rank(&[0, 2]).unwrap(), 0);
        assert_eq!(b.rank(&[2, 0]).unwrap(), 2);
        assert!(b.rank(&[1, 0]).is_err());
        assert!(b.rank(&[3, 0]).is_err());
    }

    #[test]
    fn stars_and_bars_dimensions() {
        assert_eq!(enumerate_basis(6, 6, 6).unwrap().dim(), 462);
        for l in 1..=8usize {
            for n in 0..=8usize {
                let expected = binomial((n + l - 1) as u64, n as u64);
                assert_eq!(enumerate_basis(l, n, n).unwrap().dim() as u64, expected);
                assert_eq!(sector_dimension(l, n, n), expected);
            }
        }
    }

    #[test]
    fn ten_sites_ten_bosons() {
        // C(19, 9) by stars and bars
        let b = enumerate_basis(10, 10, 10).unwrap();
        assert_eq!(b.dim(), 92378);
        assert_eq!(binomial(19, 9), 92378);
        assert_eq!(sector_dimension(10, 10, 10), 92378);
    }

    #[test]
    fn truncated_dimensions_match_recursion() {
        // bounded compositions of N into L parts each <= cap, by brute force
        fn brute(l: usize, n: usize, cap: usize) -> u64 {
            if l == 0 {
                return u64::from(n == 0);
            }
            (0..=cap.min(n)).map(|v| brute(l - 1, n - v, cap)).sum()
        }
        for (l, n, cap) in [(6, 6, 2), (7, 5, 1), (5, 9, 3), (14, 14, 2), (4, 4, 1)] {
            let expected = brute(l, n, cap);
            assert_eq!(sector_dimension(l, n, cap), expected);
            if expected < 2_000_000 {
                let b = enumerate_basis(l, n, cap).unwrap();
                assert_eq!(b.dim() as u64, expected);
                assert!(b.is_truncated() == (cap < n));
                for (k, occ) in b.iter().enumerate() {
                    assert_eq!(b.rank(occ).unwrap(), k);
                }
            }
        }
        assert_eq!(sector_dimension(14, 14, 14), 20_058_300);
        assert_eq!(sector_dimension(13, 13, 13), 5_200_300);
    }

    #[test]
    fn empty_sector_is_an_error() {
        assert!(matches!(enumerate_basis(2, 5, 2), Err(Error::EmptySector { .. })));
        assert_eq!(enumerate_basis(3, 0, 0).unwrap().dim(), 1);
    }

    #[test]
    fn basis_is_lexicographic_and_valid() {
        let b = enumerate_basis(5, 4, 2).unwrap();
        for w in b.states.chunks_exact(5).collect::<Vec<_>>().windows(2) {
            assert!(w[0] < w[1]);
        }
        for occ in b.iter() {
            assert_eq!(occ.iter().map(|&n| n as usize).sum::<usize>(), 4);
            assert!(occ.iter().all(|&n| n <= 2));
        }
    }

    #[test]
    fn rank_unrank_sampled() {
        let b = enumerate_basis(8, 8, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let k = rng.random_range(0..b.dim());
            assert_eq!(b.rank(&b.unrank(k).unwrap()).unwrap(), k);
        }
        assert!(b.unrank(b.dim()).is_none());
    }

    proptest! {
        #[test]
        fn rank_inverts_unrank(l in 1usize..7, n in 0usize..7, cap in 1usize..7, seed in 0u64..1000) {
            prop_assume!(l * cap >= n);
            let b = enumerate_basis(l, n, cap).unwrap();
            let k = (seed as usize) % b.dim();
            prop_assert_eq!(b.rank(&b.unrank(k).unwrap()).unwrap(), k);
        }
    }

    #[test]
    fn annihilation_examples() {
        let b2 = Arc::new(enumerate_basis(2, 2, 2).unwrap());
        let out = apply_annihilation(&QuantumState::fock(b2, &[2, 0]).unwrap(), 0).unwrap();
        let k = out.basis().rank(&[1, 0]).unwrap();
        assert!((out.amplitudes()[k] - c(2f64.sqrt())).norm() < 1e-15);
        assert!((out.norm() - 2f64.sqrt()).abs() < 1e-15);

        let b1 = Arc::new(enumerate_basis(2, 1, 1).unwrap());
        let out = apply_annihilation(&QuantumState::fock(b1, &[0, 1]).unwrap(), 0).unwrap();
        assert_eq!(out.norm(), 0.0);

        let b6 = Arc::new(enumerate_basis(6, 6, 6).unwrap());
        let out = apply_annihilation(&QuantumState::fock(b6, &[1; 6]).unwrap(), 2).unwrap();
        let k = out.basis().rank(&[1, 1, 0, 1, 1, 1]).unwrap();
        assert_eq!(out.amplitudes()[k], c(1.0));
        assert_eq!(out.norm(), 1.0);
    }

    #[test]
    fn creation_examples() {
        let b = Arc::new(enumerate_basis(2, 1, 1).unwrap());
        let out = apply_creation(&QuantumState::fock(b, &[1, 0]).unwrap(), 0).unwrap();
        let k = out.basis().rank(&[2, 0]).unwrap();
        assert!((out.amplitudes()[k] - c(2f64.sqrt())).norm() < 1e-15);

        let vac = Arc::new(enumerate_basis(2, 0, 0).unwrap());
        let out = apply_creation(&QuantumState::fock(vac, &[0, 0]).unwrap(), 1).unwrap();
        let k = out.basis().rank(&[0, 1]).unwrap();
        assert_eq!(out.amplitudes()[k], c(1.0));
    }

    #[test]
    fn ladder_errors() {
        let vac = Arc::new(enumerate_basis(2, 0, 0).unwrap());
        let s = QuantumState::fock(vac, &[0, 0]).unwrap();
        assert!(matches!(apply_annihilation(&s, 0), Err(Error::VacuumAnnihilation)));
        assert!(matches!(apply_creation(&s, 2), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn truncated_creation_drops_capped_components() {
        let from = Arc::new(enumerate_basis(3, 2, 2).unwrap());
        assert!(!from.is_truncated());
        assert!(!from.sibling(3).unwrap().is_truncated());
        let to = Arc::new(enumerate_basis(3, 3, 2).unwrap());
        assert!(to.is_truncated());
        let op = LadderOp::creation(0, from.clone(), to).unwrap();
        assert!(op.is_approximate());
        let out = op.apply(&QuantumState::fock(from.clone(), &[2, 0, 0]).unwrap()).unwrap();
        assert_eq!(out.norm(), 0.0);
        let out = op.apply(&QuantumState::fock(from, &[1, 1, 0]).unwrap()).unwrap();
        assert!((out.norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    /// Dense matrix of a ladder operator, columns indexed by the source basis.
    fn dense(op: &LadderOp) -> Vec<Vec<f64>> {
        let (n_from, n_to) = (op.from_basis().dim(), op.to_basis().dim());
        let mut m = vec![vec![0.0; n_from]; n_to];
        for col in 0..n_from {
            let mut e = vec![Complex64::new(0.0, 0.0); n_from];
            e[col] = c(1.0);
            for (row, v) in op.apply_raw(&e).into_iter().enumerate() {
                m[row][col] = v.re;
            }
        }
        m
    }

    #[test]
    fn creation_is_transpose_of_annihilation() {
        for (l, n) in [(2, 2), (3, 3), (4, 3), (6, 5)] {
            let lo = Arc::new(enumerate_basis(l, n - 1, n).unwrap());
            let hi = Arc::new(enumerate_basis(l, n, n).unwrap());
            for site in 0..l {
                let a = dense(&LadderOp::annihilation(site, hi.clone(), lo.clone()).unwrap());
                let ad = dense(&LadderOp::creation(site, lo.clone(), hi.clone()).unwrap());
                for r in 0..lo.dim() {
                    for col in 0..hi.dim() {
                        assert_eq!(a[r][col], ad[col][r]);
                    }
                }
            }
        }
    }

    #[test]
    fn adjointness_on_random_states() {
        let lo = Arc::new(enumerate_basis(6, 5, 6).unwrap());
        let hi = Arc::new(enumerate_basis(6, 6, 6).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut random = |dim: usize| -> Vec<Complex64> {
            (0..dim)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        };
        let phi = random(hi.dim());
        let psi = random(lo.dim());
        for site in 0..6 {
            let a = LadderOp::annihilation(site, hi.clone(), lo.clone()).unwrap();
            let ad = LadderOp::creation(site, lo.clone(), hi.clone()).unwrap();
            // ⟨φ|a† ψ⟩ = ⟨a φ|ψ⟩
            let lhs = inner(&phi, &ad.apply_raw(&psi));
            let rhs = inner(&a.apply_raw(&phi), &psi);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn number_operator_from_ladder_pair() {
        let hi = Arc::new(enumerate_basis(4, 4, 4).unwrap());
        let lo = Arc::new(hi.sibling(3).unwrap());
        for site in 0..4 {
            let a = LadderOp::annihilation(site, hi.clone(), lo.clone()).unwrap();
            let ad = LadderOp::creation(site, lo.clone(), hi.clone()).unwrap();
            for (k, occ) in hi.iter().enumerate() {
                let mut e = vec![Complex64::new(0.0, 0.0); hi.dim()];
                e[k] = c(1.0);
                let out = ad.apply_raw(&a.apply_raw(&e));
                for (m, v) in out.iter().enumerate() {
                    let want = if m == k { occ[site] as f64 } else { 0.0 };
                    assert!((v.re - want).abs() < 1e-14 && v.im == 0.0);
                }
            }
        }
    }
}
