//! Early-time decay models for OTOC series and their least-squares fits.
//!
//! Three models are registered by name:
//! - `exponential`: `exp(λ (t - |x|/v))`
//! - `gaussian`: `exp(λ (t - |x|/v)²)`
//! - `convolution`: `P e^{-τt/2} erfc(z₋) + Q e^{τt/2} erfc(z₊)` with
//!   `z± = (τ/2 ± σ²t) / (√2 σ)`, the convolution of an exponential and a
//!   Gaussian decay.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::{DMatrix, DVector, Dyn, Owned};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::OtocSeries;
use crate::special::{erfc, erfcx, ln_erfc};

/// Seeds shared by the two-parameter models and the convolution.
pub const LAMBDA_SEEDS: [f64; 3] = [-1.0, -5.0, -20.0];
pub const VELOCITY_SEEDS: [f64; 2] = [5.0, 15.0];
/// Convolution scan grid for `τ·T` and `σ·T`, with `T` the window length.
pub const TAU_SEEDS: [f64; 8] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0];
pub const SIGMA_SEEDS: [f64; 6] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0];
/// Best scan cells refined into convolution seeds.
pub const CONVOLUTION_SEEDS: usize = 4;

/// Rise needed after a local minimum for it to end the default window.
pub const MIN_PROMINENCE: f64 = 0.01;

/// Fewest points a fit window may hold.
pub const MIN_WINDOW_POINTS: usize = 5;

/// A decay model. Fits run in an internal coordinate system chosen for
/// good conditioning; `public` maps back to the reported parameters.
pub trait DecayModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn param_names(&self) -> &'static [&'static str];

    /// Value at time `t` for reported parameters.
    fn eval(&self, params: &[f64], t: f64, distance: f64) -> Result<f64>;

    fn eval_internal(&self, internal: &[f64], t: f64, distance: f64) -> f64;

    fn public(&self, internal: &[f64]) -> Vec<f64>;

    fn internal(&self, params: &[f64]) -> Vec<f64>;

    /// Starting points in internal coordinates, in a fixed order.
    fn seeds(&self, t: &[f64], y: &[f64], distance: f64) -> Vec<Vec<f64>>;

    fn is_physical(&self, params: &[f64]) -> bool;
}

fn check_len(params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::InvalidParameters(format!("expected {n} parameters, got {}", params.len())));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameters(format!("non-finite parameter in {params:?}")));
    }
    Ok(())
}

/// The two butterfly-velocity models fit `(λ, 1/v)` so that the fit can
/// pass through infinite and negative velocities smoothly.
fn velocity_seeds() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for &l in &LAMBDA_SEEDS {
        for &v in &VELOCITY_SEEDS {
            out.push(vec![l, 1.0 / v]);
        }
    }
    out
}

fn velocity_public(internal: &[f64]) -> Vec<f64> {
    vec![internal[0], 1.0 / internal[1]]
}

fn velocity_internal(params: &[f64]) -> Vec<f64> {
    vec![params[0], 1.0 / params[1]]
}

pub struct Exponential;

impl DecayModel for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["lambda", "v"]
    }

    fn eval(&self, params: &[f64], t: f64, distance: f64) -> Result<f64> {
        check_len(params, 2)?;
        Ok((params[0] * (t - distance / params[1])).exp())
    }

    fn eval_internal(&self, p: &[f64], t: f64, distance: f64) -> f64 {
        (p[0] * (t - distance * p[1])).exp()
    }

    fn public(&self, internal: &[f64]) -> Vec<f64> {
        velocity_public(internal)
    }

    fn internal(&self, params: &[f64]) -> Vec<f64> {
        velocity_internal(params)
    }

    fn seeds(&self, _t: &[f64], _y: &[f64], _distance: f64) -> Vec<Vec<f64>> {
        velocity_seeds()
    }

    fn is_physical(&self, params: &[f64]) -> bool {
        params[1] > 0.0
    }
}

pub struct Gaussian;

impl DecayModel for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["lambda", "v"]
    }

    fn eval(&self, params: &[f64], t: f64, distance: f64) -> Result<f64> {
        check_len(params, 2)?;
        Ok((params[0] * (t - distance / params[1]).powi(2)).exp())
    }

    fn eval_internal(&self, p: &[f64], t: f64, distance: f64) -> f64 {
        (p[0] * (t - distance * p[1]).powi(2)).exp()
    }

    fn public(&self, internal: &[f64]) -> Vec<f64> {
        velocity_public(internal)
    }

    fn internal(&self, params: &[f64]) -> Vec<f64> {
        velocity_internal(params)
    }

    fn seeds(&self, _t: &[f64], _y: &[f64], _distance: f64) -> Vec<Vec<f64>> {
        velocity_seeds()
    }

    fn is_physical(&self, params: &[f64]) -> bool {
        params[1] > 0.0
    }
}

/// Parameters `(P, Q, τ, σ)`; fitted internally as `(P, Q, ±τ, ±σ)`.
pub struct Convolution;

/// Natural logs of the two convolution terms without their amplitudes,
/// `e^{-τt/2} erfc(z₋)` and `e^{τt/2} erfc(z₊)`. Both share the Gaussian
/// envelope `exp(-τ²/(8σ²) - σ²t²/2)` once the erfc is written in scaled
/// form; forming that exponent directly avoids `∞·0` for large `τt`.
pub fn convolution_ln_terms(tau: f64, sigma: f64, t: f64) -> (f64, f64) {
    let s2 = std::f64::consts::SQRT_2 * sigma;
    let z_minus = (tau / 2.0 - sigma * sigma * t) / s2;
    let z_plus = (tau / 2.0 + sigma * sigma * t) / s2;
    let envelope = -tau * tau / (8.0 * sigma * sigma) - sigma * sigma * t * t / 2.0;
    let ln_term = |z: f64, sign: f64| {
        if z >= 0.0 {
            erfcx(z).ln() + envelope
        } else {
            sign * tau * t / 2.0 + ln_erfc(z)
        }
    };
    (ln_term(z_minus, -1.0), ln_term(z_plus, 1.0))
}

/// `ln(P·term₋ + Q·term₊)` for positive amplitudes, usable where the
/// model value itself under- or overflows.
pub fn convolution_ln(p: f64, q: f64, tau: f64, sigma: f64, t: f64) -> f64 {
    let (a, b) = convolution_ln_terms(tau, sigma, t);
    let (a, b) = (p.ln() + a, q.ln() + b);
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// The two convolution terms, each with its amplitude set to one.
pub fn convolution_terms(tau: f64, sigma: f64, t: f64) -> (f64, f64) {
    let s2 = std::f64::consts::SQRT_2 * sigma;
    let z_minus = (tau / 2.0 - sigma * sigma * t) / s2;
    let z_plus = (tau / 2.0 + sigma * sigma * t) / s2;
    let envelope = (-tau * tau / (8.0 * sigma * sigma) - sigma * sigma * t * t / 2.0).exp();
    let term = |z: f64, sign: f64| {
        if z >= 0.0 {
            erfcx(z) * envelope
        } else {
            (sign * tau * t / 2.0).exp() * erfc(z)
        }
    };
    (term(z_minus, -1.0), term(z_plus, 1.0))
}

impl DecayModel for Convolution {
    fn name(&self) -> &'static str {
        "convolution"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["P", "Q", "tau", "sigma"]
    }

    fn eval(&self, params: &[f64], t: f64, _distance: f64) -> Result<f64> {
        check_len(params, 4)?;
        let (p, q, tau, sigma) = (params[0], params[1], params[2], params[3]);
        if sigma <= 0.0 {
            return Err(Error::InvalidParameters(format!("sigma must be positive, got {sigma}")));
        }
        if tau < 0.0 {
            return Err(Error::InvalidParameters(format!("tau must be non-negative, got {tau}")));
        }
        let (a, b) = convolution_terms(tau, sigma, t);
        Ok(p * a + q * b)
    }

    fn eval_internal(&self, params: &[f64], t: f64, _distance: f64) -> f64 {
        let (a, b) = convolution_terms(params[2].abs(), params[3].abs(), t);
        params[0] * a + params[1] * b
    }

    fn public(&self, internal: &[f64]) -> Vec<f64> {
        vec![internal[0], internal[1], internal[2].abs(), internal[3].abs()]
    }

    fn internal(&self, params: &[f64]) -> Vec<f64> {
        params.to_vec()
    }

    /// The `(τ, σ)` grid is scanned with `P, Q` eliminated by linear least
    /// squares (variable projection); the best cells are refined the same
    /// way before the full fit. This keeps the large, strongly correlated
    /// amplitudes of the Gaussian-like regime out of the nonlinear search.
    fn seeds(&self, t: &[f64], y: &[f64], _distance: f64) -> Vec<Vec<f64>> {
        let data = FitData {
            t: t.to_vec(),
            y: y.to_vec(),
        };
        let span = t.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut cells = Vec::new();
        for &tau_t in &TAU_SEEDS {
            for &sigma_t in &SIGMA_SEEDS {
                let (tau, sigma) = (tau_t / span, sigma_t / span);
                let problem = ProfileProblem {
                    data: &data,
                    params: DVector::from_vec(vec![tau, sigma]),
                };
                if let Some(r) = problem.residuals() {
                    cells.push((r.norm_squared(), tau, sigma));
                }
            }
        }
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lm = LevenbergMarquardt::new().with_patience(200);
        let mut out = Vec::new();
        for &(_, tau0, sigma0) in cells.iter().take(CONVOLUTION_SEEDS) {
            let problem = ProfileProblem {
                data: &data,
                params: DVector::from_vec(vec![tau0, sigma0]),
            };
            let (done, _) = lm.minimize(problem);
            let (tau, sigma) = (done.params[0].abs(), done.params[1].abs());
            let seed = convolution_amplitudes(tau, sigma, &data)
                .map(|(p, q)| vec![p, q, tau, sigma])
                .or_else(|| convolution_amplitudes(tau0, sigma0, &data).map(|(p, q)| vec![p, q, tau0, sigma0]));
            out.extend(seed);
        }
        if out.is_empty() {
            out.push(vec![1.0, 0.0, 1.0 / span, 1.0 / span]);
        }
        out
    }

    fn is_physical(&self, params: &[f64]) -> bool {
        params[3] > 0.0 && params[2] >= 0.0
    }
}

/// Least-squares `(P, Q)` for fixed `(τ, σ)`, with column scaling so
/// that tiny terms do not vanish below the solver tolerance.
fn convolution_amplitudes(tau: f64, sigma: f64, data: &FitData) -> Option<(f64, f64)> {
    if sigma == 0.0 {
        return None;
    }
    let terms: Vec<(f64, f64)> = data.t.iter().map(|&t| convolution_terms(tau, sigma, t)).collect();
    let scale = |col: fn(&(f64, f64)) -> f64| terms.iter().map(col).map(f64::abs).fold(0.0, f64::max);
    let (s0, s1) = (scale(|p| p.0), scale(|p| p.1));
    if !(s0 > 0.0 && s1 > 0.0 && s0.is_finite() && s1.is_finite()) {
        return None;
    }
    let a = DMatrix::from_fn(terms.len(), 2, |r, c| if c == 0 { terms[r].0 / s0 } else { terms[r].1 / s1 });
    let x = a.svd(true, true).solve(&DVector::from_column_slice(&data.y), 1e-14).ok()?;
    let (p, q) = (x[0] / s0, x[1] / s1);
    (p.is_finite() && q.is_finite()).then_some((p, q))
}

/// Convolution residuals as a function of `(τ, σ)` alone.
struct ProfileProblem<'a> {
    data: &'a FitData,
    params: DVector<f64>,
}

impl ProfileProblem<'_> {
    fn residuals_at(&self, p: &[f64]) -> Option<DVector<f64>> {
        let (tau, sigma) = (p[0].abs(), p[1].abs());
        let (a, b) = convolution_amplitudes(tau, sigma, self.data)?;
        let r = DVector::from_iterator(
            self.data.t.len(),
            self.data.t.iter().zip(&self.data.y).map(|(&t, &y)| {
                let (u, v) = convolution_terms(tau, sigma, t);
                a * u + b * v - y
            }),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for ProfileProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.params.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.params.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        self.residuals_at(self.params.as_slice())
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        central_jacobian(self.params.as_slice(), self.data.t.len(), |p| self.residuals_at(p))
    }
}

fn central_jacobian(params: &[f64], rows: usize, residuals: impl Fn(&[f64]) -> Option<DVector<f64>>) -> Option<DMatrix<f64>> {
    let mut jac = DMatrix::zeros(rows, params.len());
    let mut p = params.to_vec();
    for k in 0..p.len() {
        let x = p[k];
        let h = f64::EPSILON.cbrt() * x.abs().max(1e-3);
        p[k] = x + h;
        let up = residuals(&p)?;
        p[k] = x - h;
        let down = residuals(&p)?;
        p[k] = x;
        jac.set_column(k, &((up - down) / (2.0 * h)));
    }
    Some(jac)
}

/// Name-addressable decay models, in a fixed order that breaks ranking
/// ties.
pub struct ModelRegistry {
    models: Vec<Box<dyn DecayModel>>,
}

impl ModelRegistry {
    pub fn builtin() -> Self {
        let mut r = Self { models: Vec::new() };
        r.register(Box::new(Exponential));
        r.register(Box::new(Gaussian));
        r.register(Box::new(Convolution));
        r
    }

    pub fn register(&mut self, model: Box<dyn DecayModel>) {
        self.models.retain(|m| m.name() != model.name());
        self.models.push(model);
    }

    pub fn get(&self, name: &str) -> Result<&dyn DecayModel> {
        self.models
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownModel(name.into()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.models.iter().map(|m| m.name()).collect()
    }

    fn order(&self, name: &str) -> usize {
        self.models.iter().position(|m| m.name() == name).unwrap_or(usize::MAX)
    }
}

/// Evaluates a registered model by name.
pub fn model_eval(model: &str, params: &[f64], t: f64, distance: f64) -> Result<f64> {
    ModelRegistry::builtin().get(model)?.eval(params, t, distance)
}

/// Which real-valued view of the complex OTOC is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    #[default]
    Re,
    Abs,
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "re" => Ok(Quantity::Re),
            "abs" => Ok(Quantity::Abs),
            other => Err(Error::InvalidParameters(format!("unknown quantity `{other}` (expected re or abs)"))),
        }
    }
}

/// Time variable the models see: `Jt` as stored, or `t = Jt / J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeAxis {
    Jt,
    #[default]
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub quantity: Quantity,
    pub time_axis: TimeAxis,
    /// Hopping `J` used to convert `Jt` into `t`.
    pub hopping: f64,
    /// Window start on the fitted time axis; `None` starts at the first point.
    pub window_start: Option<f64>,
    /// Without an explicit start, start at [`FitData::onset`] of this level.
    pub onset_level: Option<f64>,
    /// Window end on the fitted time axis; `None` picks the default.
    pub window_end: Option<f64>,
    pub max_evaluations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            quantity: Quantity::Re,
            time_axis: TimeAxis::Physical,
            hopping: 4.0,
            window_start: None,
            onset_level: None,
            window_end: None,
            max_evaluations: 400,
        }
    }
}

/// Data prepared for fitting: times on the fitted axis and values.
#[derive(Debug, Clone, PartialEq)]
pub struct FitData {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

impl FitData {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: t.len(),
                found: y.len(),
            });
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateWindow("times must increase strictly".into()));
        }
        Ok(Self { t, y })
    }

    pub fn from_series(series: &OtocSeries, options: &FitOptions) -> Result<Self> {
        let scale = match options.time_axis {
            TimeAxis::Jt => 1.0,
            TimeAxis::Physical => {
                if options.hopping <= 0.0 {
                    return Err(Error::InvalidParameters(format!("hopping must be positive, got {}", options.hopping)));
                }
                1.0 / options.hopping
            }
        };
        let y = match options.quantity {
            Quantity::Re => series.real(),
            Quantity::Abs => series.abs(),
        };
        Self::new(series.jt.iter().map(|jt| jt * scale).collect(), y)
    }

    /// From the start to the first point below 0.1 or the first local
    /// minimum, whichever comes first. A minimum only counts once the data
    /// climbs [`MIN_PROMINENCE`] above it before dropping lower, so early
    /// ripples on the plateau do not end the window.
    pub fn default_window_end(&self) -> f64 {
        let y = &self.y;
        for k in 1..y.len() {
            if y[k] < 0.1 || (y[k] < y[k - 1] && self.is_prominent_minimum(k)) {
                return self.t[k];
            }
        }
        self.t[self.t.len() - 1]
    }

    fn is_prominent_minimum(&self, k: usize) -> bool {
        let floor = self.y[k];
        for &v in &self.y[k + 1..] {
            if v < floor {
                return false;
            }
            if v >= floor + MIN_PROMINENCE {
                return true;
            }
        }
        false
    }

    /// First time the data drops below `level`.
    pub fn threshold_crossing(&self, level: f64) -> Option<f64> {
        self.t.iter().zip(&self.y).find(|(_, &y)| y < level).map(|(&t, _)| t)
    }

    /// The data from `start` on.
    pub fn since(&self, start: f64) -> FitData {
        let tol = 1e-12 * start.abs().max(1.0);
        let first = self.t.iter().position(|&t| t >= start - tol).unwrap_or(self.t.len());
        FitData {
            t: self.t[first..].to_vec(),
            y: self.y[first..].to_vec(),
        }
    }

    /// Last time before the data first drops below `level`, a window start
    /// that skips the initial plateau.
    pub fn onset(&self, level: f64) -> f64 {
        match self.y.iter().position(|&y| y < level) {
            Some(k) if k > 0 => self.t[k - 1],
            _ => self.t[0],
        }
    }

    pub fn window(&self, end: f64) -> Result<FitData> {
        let tol = 1e-12 * end.abs().max(1.0);
        let keep: Vec<usize> = (0..self.t.len()).filter(|&k| self.t[k] <= end + tol).collect();
        if keep.len() < MIN_WINDOW_POINTS {
            return Err(Error::DegenerateWindow(format!(
                "window ending at {end} holds {} points, need at least {MIN_WINDOW_POINTS}",
                keep.len()
            )));
        }
        if self.y.iter().take(keep.len()).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateWindow("non-finite data in window".into()));
        }
        Ok(FitData {
            t: keep.iter().map(|&k| self.t[k]).collect(),
            y: keep.iter().map(|&k| self.y[k]).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<(String, f64)>,
    pub rss: f64,
    pub window: [f64; 2],
    pub converged: bool,
    pub iterations: usize,
    pub physical: bool,
    pub distance: f64,
    /// Index of the winning seed.
    pub seed: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|(_, v)| *v).collect()
    }

    pub fn tau_over_sigma(&self) -> Option<f64> {
        Some(self.param("tau")? / self.param("sigma")?)
    }

    /// The JSON report block for this fit.
    pub fn report(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> =
            self.params.iter().map(|(n, v)| (n.clone(), serde_json::json!(v))).collect();
        let mut out = serde_json::json!({
            "model": self.model,
            "params": params,
            "rss": self.rss,
            "window": self.window,
            "converged": self.converged,
            "iterations": self.iterations,
            "physical": self.physical,
            "distance": self.distance,
        });
        if let Some(r) = self.tau_over_sigma() {
            out["tau_over_sigma"] = serde_json::json!(r);
            out["regime"] = serde_json::json!(regime_classify_ratio(r));
        }
        out
    }
}

struct CurveProblem<'a> {
    model: &'a dyn DecayModel,
    data: &'a FitData,
    distance: f64,
    params: DVector<f64>,
}

impl CurveProblem<'_> {
    fn residuals_at(&self, p: &[f64]) -> Option<DVector<f64>> {
        let r = DVector::from_iterator(
            self.data.t.len(),
            self.data
                .t
                .iter()
                .zip(&self.data.y)
                .map(|(&t, &y)| self.model.eval_internal(p, t, self.distance) - y),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for CurveProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.params.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.params.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        self.residuals_at(self.params.as_slice())
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        central_jacobian(self.params.as_slice(), self.data.t.len(), |p| self.residuals_at(p))
    }
}

fn rss(model: &dyn DecayModel, internal: &[f64], data: &FitData, distance: f64) -> f64 {
    data.t
        .iter()
        .zip(&data.y)
        .map(|(&t, &y)| (model.eval_internal(internal, t, distance) - y).powi(2))
        .sum()
}

/// Fits one model on `[t₀, window_end]` from every seed and keeps the
/// lowest residual (ties: fewer evaluations, then seed order).
pub fn fit_model(model: &dyn DecayModel, data: &FitData, window_end: f64, distance: f64, max_evaluations: usize) -> Result<FitResult> {
    let w = data.window(window_end)?;
    let n_params = model.param_names().len();
    let lm = LevenbergMarquardt::new().with_patience(max_evaluations.div_ceil(n_params + 1).max(1));
    let mut best: Option<(f64, usize, usize, Vec<f64>, bool)> = None;
    for (seed_index, seed) in model.seeds(&w.t, &w.y, distance).into_iter().enumerate() {
        if !rss(model, &seed, &w, distance).is_finite() {
            continue;
        }
        let problem = CurveProblem {
            model,
            data: &w,
            distance,
            params: DVector::from_vec(seed),
        };
        let (done, report) = lm.minimize(problem);
        let converged = report.termination.was_successful() || matches!(report.termination, TerminationReason::NoImprovementPossible(_));
        let p = done.params.as_slice().to_vec();
        let r = rss(model, &p, &w, distance);
        if !r.is_finite() {
            continue;
        }
        let candidate = (r, report.number_of_evaluations, seed_index, p, converged);
        let better = match &best {
            None => true,
            Some((br, bi, _, _, _)) => r < *br || (r == *br && candidate.1 < *bi),
        };
        if better {
            best = Some(candidate);
        }
    }
    let (r, iterations, seed, internal, converged) =
        best.ok_or_else(|| Error::DegenerateWindow(format!("no finite start for model `{}`", model.name())))?;
    let public = model.public(&internal);
    Ok(FitResult {
        model: model.name().to_string(),
        params: model.param_names().iter().map(|s| s.to_string()).zip(public.iter().copied()).collect(),
        rss: r,
        window: [w.t[0], w.t[w.t.len() - 1]],
        converged,
        iterations,
        physical: model.is_physical(&public) && public.iter().all(|v| v.is_finite()),
        distance,
        seed,
    })
}

/// Fits every named model and ranks them: physical fits first, then by
/// residual, evaluations and registry order.
pub fn model_select(
    registry: &ModelRegistry,
    names: &[&str],
    data: &FitData,
    window_end: f64,
    distance: f64,
    max_evaluations: usize,
) -> Result<Vec<FitResult>> {
    let mut fits = names
        .iter()
        .map(|n| fit_model(registry.get(n)?, data, window_end, distance, max_evaluations))
        .collect::<Result<Vec<_>>>()?;
    rank_fits(registry, &mut fits);
    Ok(fits)
}

pub fn rank_fits(registry: &ModelRegistry, fits: &mut [FitResult]) {
    fits.sort_by(|a, b| {
        b.physical
            .cmp(&a.physical)
            .then(a.rss.total_cmp(&b.rss))
            .then(a.iterations.cmp(&b.iterations))
            .then(registry.order(&a.model).cmp(&registry.order(&b.model)))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    GaussianLike,
    ExponentialLike,
    Intermediate,
}

pub const GAUSSIAN_RATIO: f64 = 5.0;
pub const EXPONENTIAL_RATIO: f64 = 0.8;

pub fn regime_classify_ratio(tau_over_sigma: f64) -> Regime {
    if tau_over_sigma > GAUSSIAN_RATIO {
        Regime::GaussianLike
    } else if tau_over_sigma < EXPONENTIAL_RATIO {
        Regime::ExponentialLike
    } else {
        Regime::Intermediate
    }
}

pub fn regime_classify(conv: &FitResult) -> Result<Regime> {
    conv.tau_over_sigma()
        .map(regime_classify_ratio)
        .ok_or_else(|| Error::InvalidParameters(format!("`{}` fit has no tau/sigma", conv.model)))
}

/// Complete report over a set of models.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub window: [f64; 2],
    pub options: FitOptions,
    pub ranked: Vec<FitResult>,
}

impl FitReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "quantity": self.options.quantity,
            "time_axis": self.options.time_axis,
            "hopping": self.options.hopping,
            "window": self.window,
            "ranking": self.ranked.iter().map(|f| f.model.clone()).collect::<Vec<_>>(),
            "fits": self.ranked.iter().map(FitResult::report).collect::<Vec<_>>(),
        })
    }
}

/// Window selection, fitting and ranking for one OTOC series.
pub fn fit_series(series: &OtocSeries, models: &[&str], distance: f64, options: &FitOptions) -> Result<FitReport> {
    let mut data = FitData::from_series(series, options)?;
    if let Some(start) = options.window_start.or_else(|| options.onset_level.map(|level| data.onset(level))) {
        data = data.since(start);
        if data.t.is_empty() {
            return Err(Error::DegenerateWindow(format!("window start {start} is past the data")));
        }
    }
    let window_end = options.window_end.unwrap_or_else(|| data.default_window_end());
    let ranked = model_select(&ModelRegistry::builtin(), models, &data, window_end, distance, options.max_evaluations)?;
    Ok(FitReport {
        window: [data.t[0], window_end],
        options: *options,
        ranked,
    })
}
