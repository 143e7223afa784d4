//! OTOC time series `F(t) = ⟨ψ| a†_j(t) a†_i a_j(t) a_i |ψ⟩`.
//!
//! Heisenberg operators are never formed. Two forward trajectories are
//! stepped incrementally across the grid,
//! `x(t) = U_N(t)|ψ⟩` and `y(t) = U_{N-1}(t) a_i|ψ⟩`, and at each grid time
//! `p = a_j x`, `q = a_j y` are evolved back by `t` from scratch:
//! `F(t) = ⟨a_i U†(t) p | U†(t) q⟩`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{inner, LadderOp, QuantumState};
use crate::format::fmt_f64;
use crate::hamiltonian::{BoseHubbardParams, SectorCache};
use crate::lattice::{LatticeGraph, OperatorSitePair};
use crate::propagator::Propagator;

/// Uniform grid in `Jt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 10.0,
            points: 201,
        }
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, points: usize) -> Result<Self> {
        let g = Self {
            t_start,
            t_end,
            points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidGrid(format!("t_start {} must be >= 0", self.t_start)));
        }
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!("{} points, need at least 2", self.points)));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidGrid(format!(
                "t_end {} must exceed t_start {}",
                self.t_end, self.t_start
            )));
        }
        Ok(())
    }

    /// Grid values in `Jt`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|k| {
                if k == n {
                    self.t_end
                } else {
                    self.t_start + (self.t_end - self.t_start) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocMetadata {
    pub lattice: String,
    pub pair: OperatorSitePair,
    pub params: BoseHubbardParams,
    pub propagator: String,
    pub tolerance: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtocSeries {
    /// Times in `Jt`.
    pub jt: Vec<f64>,
    pub values: Vec<Complex64>,
    pub meta: Option<OtocMetadata>,
}

impl OtocSeries {
    pub fn len(&self) -> usize {
        self.jt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jt.is_empty()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Everything needed to evaluate OTOCs on one lattice, shared across grid
/// points.
pub struct OtocProblem<'a> {
    pub sectors: &'a SectorCache,
    pub pair: OperatorSitePair,
    pub initial: Vec<u8>,
}

pub fn compute_otoc_series(
    graph: &LatticeGraph,
    params: BoseHubbardParams,
    pair: OperatorSitePair,
    initial: &[u8],
    grid: &TimeGrid,
    propagator: &dyn Propagator,
) -> Result<OtocSeries> {
    let sectors = SectorCache::new(graph.clone(), params, None);
    OtocProblem {
        sectors: &sectors,
        pair,
        initial: initial.to_vec(),
    }
    .series(grid, propagator)
}

impl OtocProblem<'_> {
    pub fn series(&self, grid: &TimeGrid, propagator: &dyn Propagator) -> Result<OtocSeries> {
        grid.validate()?;
        let graph = self.sectors.graph();
        let pair = OperatorSitePair::new(graph, self.pair.i, self.pair.j)?;
        if self.initial.len() != graph.site_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.site_count(),
                found: self.initial.len(),
            });
        }
        let n: usize = self.initial.iter().map(|&x| x as usize).sum();
        if n < 2 {
            return Err(Error::TooFewBosons(n));
        }
        let j_hop = self.sectors.params().j;
        let h0 = self.sectors.hamiltonian(n)?;
        let h1 = self.sectors.hamiltonian(n - 1)?;
        let h2 = self.sectors.hamiltonian(n - 2)?;
        let (b0, b1, b2) = (h0.basis().clone(), h1.basis().clone(), h2.basis().clone());
        let truncated = b0.is_truncated() || b1.is_truncated() || b2.is_truncated();

        let ai_0 = LadderOp::annihilation(pair.i, b0.clone(), b1.clone())?;
        let ai_1 = LadderOp::annihilation(pair.i, b1.clone(), b2.clone())?;
        let aj_0 = LadderOp::annihilation(pair.j, b0.clone(), b1.clone())?;
        let aj_1 = LadderOp::annihilation(pair.j, b1.clone(), b2.clone())?;

        let psi = QuantumState::fock(b0, &self.initial)?;
        let mut x = psi.clone();
        let mut y = ai_0.apply(&psi)?;
        let mut t_prev = 0.0;
        let mut values = Vec::with_capacity(grid.points);
        let jt = grid.values();
        for &jt_k in &jt {
            let t = jt_k / j_hop;
            let dt = t - t_prev;
            if dt != 0.0 {
                x = propagator.evolve(&h0, &x, dt)?.state;
                y = propagator.evolve(&h1, &y, dt)?.state;
            }
            t_prev = t;
            let p = aj_0.apply(&x)?;
            let q = aj_1.apply(&y)?;
            let back_p = propagator.evolve(&h1, &p, -t)?.state;
            let back_q = propagator.evolve(&h2, &q, -t)?.state;
            let left = ai_1.apply(&back_p)?;
            values.push(inner(left.amplitudes(), back_q.amplitudes()));
        }
        Ok(OtocSeries {
            jt,
            values,
            meta: Some(OtocMetadata {
                lattice: graph.label().to_string(),
                pair,
                params: self.sectors.params(),
                propagator: propagator.name().to_string(),
                tolerance: propagator.tolerance(),
                truncated,
            }),
        })
    }
}

/// One CSV row: `jt, re_otoc, im_otoc, abs_otoc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtocRow {
    pub jt: f64,
    pub re_otoc: f64,
    pub im_otoc: f64,
    pub abs_otoc: f64,
}

pub fn otoc_scalar_outputs(series: &OtocSeries) -> Vec<OtocRow> {
    series
        .jt
        .iter()
        .zip(&series.values)
        .map(|(&jt, v)| OtocRow {
            jt,
            re_otoc: v.re,
            im_otoc: v.im,
            abs_otoc: v.norm(),
        })
        .collect()
}

pub const OTOC_CSV_HEADER: &str = "jt,re_otoc,im_otoc,abs_otoc";

pub fn write_otoc_csv<W: Write>(mut out: W, series: &OtocSeries) -> Result<()> {
    writeln!(out, "{OTOC_CSV_HEADER}")?;
    for r in otoc_scalar_outputs(series) {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.jt),
            fmt_f64(r.re_otoc),
            fmt_f64(r.im_otoc),
            fmt_f64(r.abs_otoc)
        )?;
    }
    Ok(())
}

/// Reads a series written by [`write_otoc_csv`]; `abs_otoc` is ignored in
/// favour of the complex value.
pub fn read_otoc_csv<R: Read>(input: R) -> Result<OtocSeries> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let expected: Vec<&str> = OTOC_CSV_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Config {
            pointer: "/header".into(),
            message: format!("expected columns {OTOC_CSV_HEADER}, found {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut jt = Vec::new();
    let mut values = Vec::new();
    for row in rdr.deserialize() {
        let row: OtocRow = row?;
        jt.push(row.jt);
        values.push(Complex64::new(row.re_otoc, row.im_otoc));
    }
    Ok(OtocSeries { jt, values, meta: None })
}
