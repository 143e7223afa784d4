//! JSON-configured experiment runs: OTOC, entanglement and fit tasks on one
//! lattice, writing CSV and JSON artifacts to an output directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::entropy::{self, AncillaLatticeState, Subsystem};
use crate::error::{Error, Result};
use crate::fitting::{fit_series, FitOptions, ModelRegistry, Quantity, TimeAxis};
use crate::fock::sector_dimension;
use crate::hamiltonian::{BoseHubbardParams, SectorCache};
use crate::lattice::{build_preset, LatticeDocument, LatticeGraph, OperatorSitePair, PresetInstance};
use crate::observables::{write_otoc_csv, OtocProblem, OtocSeries, TimeGrid};
use crate::oracle::run_oracle_checks;
use crate::propagator::{KrylovConfig, PropagatorRegistry};

/// Sector dimension above which a run needs `allow_heavy`.
pub const DEFAULT_DIM_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSpec {
    Preset {
        preset: String,
        variant: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        placement: Option<String>,
    },
    Inline {
        graph: LatticeDocument,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(rename = "J", default = "default_j")]
    pub j: f64,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(rename = "U_over_J", default, skip_serializing_if = "Option::is_none")]
    pub u_over_j: Option<f64>,
}

fn default_j() -> f64 {
    4.0
}

impl Default for ParamsSpec {
    fn default() -> Self {
        Self {
            j: 4.0,
            u: None,
            u_over_j: Some(4.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    Occupations(Vec<u8>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    AllOnes,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Named(NamedState::AllOnes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "t_end_Jt", default = "default_t_end")]
    pub t_end_jt: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_t_end() -> f64 {
    10.0
}

fn default_points() -> usize {
    201
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_end_jt: default_t_end(),
            points: default_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Otoc,
    Mi,
    Tmi,
    Fit,
    OracleCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSpec {
    pub models: Vec<String>,
    /// Window end on the fitted time axis; omitted means the default window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Window start on the fitted time axis; omitted means `t = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<f64>,
    /// Start the window where the OTOC first drops below this level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset_level: Option<f64>,
    pub quantity: Quantity,
    pub time_axis: TimeAxis,
}

impl Default for FitSpec {
    fn default() -> Self {
        Self {
            models: ModelRegistry::builtin().names().into_iter().map(String::from).collect(),
            window: None,
            window_start: None,
            onset_level: None,
            quantity: Quantity::Re,
            time_axis: TimeAxis::Physical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyUnits {
    #[default]
    Nats,
    Bits,
}

/// Subsystems for the entanglement tasks. Empty lists take defaults: an
/// equal bipartition for MI, and for TMI `B` = operator site `i`, `C` = the
/// next two sites in index order (cyclically).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropySpec {
    pub mi_a: Vec<usize>,
    pub mi_b: Vec<usize>,
    pub tmi_b: Vec<usize>,
    pub tmi_c: Vec<usize>,
    pub units: EntropyUnits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<OperatorSitePair>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub krylov: KrylovConfig,
    #[serde(default = "default_propagator")]
    pub propagator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default)]
    pub entropy: EntropySpec,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub allow_heavy: bool,
    #[serde(default = "default_budget")]
    pub dim_budget: u64,
    #[serde(default)]
    pub strict: bool,
}

fn default_propagator() -> String {
    "krylov".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_budget() -> u64 {
    DEFAULT_DIM_BUDGET
}

fn config_error(pointer: &str, message: impl Into<String>) -> Error {
    Error::Config {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// `a.b[2]` from serde_path_to_error into `/a/b/2`.
fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(e.path());
            config_error(&pointer, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn params(&self) -> Result<BoseHubbardParams> {
        let p = self.params;
        if !(p.j > 0.0) || !p.j.is_finite() {
            return Err(config_error("/params/J", format!("J must be positive, got {}", p.j)));
        }
        match (p.u, p.u_over_j) {
            (Some(_), Some(_)) => Err(config_error("/params", "give either U or U_over_J, not both")),
            (Some(u), None) => Ok(BoseHubbardParams::new(p.j, u)),
            (None, Some(r)) => Ok(BoseHubbardParams::from_ratio(p.j, r)),
            (None, None) => Ok(BoseHubbardParams::from_ratio(p.j, 4.0)),
        }
    }

    /// Builds the lattice and settles the operator pair and initial state.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let params = self.params()?;
        let (graph, preset_pair) = match &self.lattice {
            LatticeSpec::Preset {
                preset,
                variant,
                placement,
            } => {
                let inst: PresetInstance = build_preset(preset, *variant).map_err(|e| config_error("/lattice", e.to_string()))?;
                let pair = match placement {
                    None => Some(inst.default_pair()),
                    Some(name) => Some(inst.placement(name).ok_or_else(|| {
                        config_error("/lattice/placement", format!("preset `{preset}` has no placement `{name}`"))
                    })?),
                };
                (inst.graph, pair)
            }
            LatticeSpec::Inline { graph } => (
                LatticeGraph::from_document(graph).map_err(|e| config_error("/lattice/graph", e.to_string()))?,
                None,
            ),
        };
        let l = graph.site_count();
        let pair = match (self.operators, preset_pair) {
            (Some(p), _) => OperatorSitePair::new(&graph, p.i, p.j).map_err(|e| config_error("/operators", e.to_string()))?,
            (None, Some(p)) => p,
            (None, None) => return Err(config_error("/operators", "inline lattices need explicit operators {i, j}")),
        };
        let initial = match &self.initial_state {
            InitialState::Named(NamedState::AllOnes) => vec![1u8; l],
            InitialState::Occupations(v) => {
                if v.len() != l {
                    return Err(config_error(
                        "/initial_state",
                        format!("{} occupations for {l} sites", v.len()),
                    ));
                }
                v.clone()
            }
        };
        if self.tasks.is_empty() {
            return Err(config_error("/tasks", "at least one task is required"));
        }
        self.krylov.validate().map_err(|e| config_error("/krylov", e.to_string()))?;
        let grid = TimeGrid::new(0.0, self.grid.t_end_jt, self.grid.points).map_err(|e| config_error("/grid", e.to_string()))?;
        if PropagatorRegistry::builtin().create(&self.propagator, &self.krylov).is_err() {
            return Err(config_error("/propagator", format!("unknown propagator `{}`", self.propagator)));
        }
        let registry = ModelRegistry::builtin();
        for (k, m) in self.fit.models.iter().enumerate() {
            if registry.get(m).is_err() {
                return Err(config_error(&format!("/fit/models/{k}"), format!("unknown model `{m}`")));
            }
        }
        let check_sites = |sites: &[usize], pointer: &str| -> Result<()> {
            match sites.iter().find(|&&s| s >= l) {
                Some(s) => Err(config_error(pointer, format!("site {s} out of range for {l} sites"))),
                None => Ok(()),
            }
        };
        check_sites(&self.entropy.mi_a, "/entropy/mi_a")?;
        check_sites(&self.entropy.mi_b, "/entropy/mi_b")?;
        check_sites(&self.entropy.tmi_b, "/entropy/tmi_b")?;
        check_sites(&self.entropy.tmi_c, "/entropy/tmi_c")?;
        let bosons: usize = initial.iter().map(|&n| n as usize).sum();
        Ok(ResolvedExperiment {
            graph,
            params,
            pair,
            initial,
            bosons,
            grid,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub graph: LatticeGraph,
    pub params: BoseHubbardParams,
    pub pair: OperatorSitePair,
    pub initial: Vec<u8>,
    pub bosons: usize,
    pub grid: TimeGrid,
}

impl ResolvedExperiment {
    /// Particle numbers whose sectors the tasks touch.
    pub fn sectors_needed(&self, tasks: &[Task]) -> Vec<usize> {
        let mut out = vec![self.bosons];
        if tasks.iter().any(|t| matches!(t, Task::Otoc | Task::Fit)) && self.bosons >= 1 {
            out.push(self.bosons - 1);
        }
        if tasks.iter().any(|t| matches!(t, Task::Otoc | Task::Fit)) && self.bosons >= 2 {
            out.push(self.bosons - 2);
        }
        if tasks.contains(&Task::Tmi) && self.bosons >= 1 {
            out.push(self.bosons - 1);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn sector_dims(&self, tasks: &[Task], n_max: Option<usize>) -> BTreeMap<usize, u64> {
        self.sectors_needed(tasks)
            .into_iter()
            .map(|n| (n, sector_dimension(self.graph.site_count(), n, n_max.unwrap_or(n).min(n))))
            .collect()
    }
}

/// Rejects runs whose largest sector exceeds the budget unless allowed.
pub fn check_resources(dims: &BTreeMap<usize, u64>, budget: u64, allow_heavy: bool) -> Result<()> {
    let largest = dims.values().copied().max().unwrap_or(0);
    if largest > budget && !allow_heavy {
        return Err(Error::ResourceRefusal { dim: largest, budget });
    }
    Ok(())
}

/// What a run produced.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub bound_violations: usize,
    pub oracle_failures: usize,
    pub truncated: bool,
    pub wall_seconds: BTreeMap<String, f64>,
}

impl RunSummary {
    pub fn success(&self, strict: bool) -> bool {
        self.oracle_failures == 0 && !(strict && self.bound_violations > 0)
    }
}

fn write_file(dir: &Path, name: &str, summary: &mut RunSummary, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(dir.join(name))?);
    f(&mut out)?;
    use std::io::Write;
    out.flush()?;
    summary.outputs.push(name.to_string());
    Ok(())
}

fn write_json(out: &mut impl std::io::Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn scale_entropy(x: f64, units: EntropyUnits) -> f64 {
    match units {
        EntropyUnits::Nats => x,
        EntropyUnits::Bits => x / std::f64::consts::LN_2,
    }
}

/// Runs every task of `config`, writing artifacts into its output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    // on a pool worker, nested parallel calls never block on the injector
    rayon::scope(|_| run_tasks(config))
}

fn run_tasks(config: &ExperimentConfig) -> Result<RunSummary> {
    let resolved = config.resolve()?;
    let dims = resolved.sector_dims(&config.tasks, config.n_max);
    check_resources(&dims, config.dim_budget, config.allow_heavy)?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut summary = RunSummary::default();
    let sectors = SectorCache::new(resolved.graph.clone(), resolved.params, config.n_max);
    let propagator = PropagatorRegistry::builtin().create(&config.propagator, &config.krylov)?;
    let grid = resolved.grid;
    let tasks = &config.tasks;
    let units = config.entropy.units;
    let l = resolved.graph.site_count();

    let mut otoc: Option<OtocSeries> = None;
    if tasks.contains(&Task::Otoc) || tasks.contains(&Task::Fit) {
        let start = Instant::now();
        let series = OtocProblem {
            sectors: &sectors,
            pair: resolved.pair,
            initial: resolved.initial.clone(),
        }
        .series(&grid, propagator.as_ref())?;
        summary.truncated |= series.meta.as_ref().is_some_and(|m| m.truncated);
        write_file(dir, "otoc.csv", &mut summary, |w| write_otoc_csv(w, &series))?;
        summary.wall_seconds.insert("otoc".into(), start.elapsed().as_secs_f64());
        otoc = Some(series);
    }

    let mut mi_rows = None;
    if tasks.contains(&Task::Mi) {
        let start = Instant::now();
        let (a, b) = if config.entropy.mi_a.is_empty() {
            (Subsystem::sites(0..l / 2), Subsystem::sites(l / 2..l))
        } else {
            (Subsystem::sites(config.entropy.mi_a.iter().copied()), Subsystem::sites(config.entropy.mi_b.iter().copied()))
        };
        let mut rows = entropy::mi_series(&sectors, &resolved.initial, &a, &b, &grid, propagator.as_ref())?;
        let raw: Vec<(f64, f64)> = rows.iter().map(|r| (r.jt, r.values.mi)).collect();
        for r in &mut rows {
            let v = &mut r.values;
            v.s_a = scale_entropy(v.s_a, units);
            v.s_b = scale_entropy(v.s_b, units);
            v.s_ab = scale_entropy(v.s_ab, units);
            v.mi = scale_entropy(v.mi, units);
        }
        write_file(dir, "mi.csv", &mut summary, |w| entropy::write_mi_csv(w, &rows))?;
        summary.wall_seconds.insert("mi".into(), start.elapsed().as_secs_f64());
        mi_rows = Some(raw);
    }

    if let (Some(series), Some(mi)) = (&otoc, &mi_rows) {
        let rows = entropy::otoc_mi_bound_check(series, mi)?;
        summary.bound_violations = rows.iter().filter(|r| !r.satisfied).count();
        write_file(dir, "bound.csv", &mut summary, |w| entropy::write_bound_csv(w, &rows))?;
    }

    if tasks.contains(&Task::Tmi) {
        let start = Instant::now();
        let i = resolved.pair.i;
        let b = if config.entropy.tmi_b.is_empty() { vec![i] } else { config.entropy.tmi_b.clone() };
        let c = if config.entropy.tmi_c.is_empty() {
            vec![(i + 1) % l, (i + 2) % l]
        } else {
            config.entropy.tmi_c.clone()
        };
        if b.len() != 1 {
            return Err(config_error("/entropy/tmi_b", "B must be the single site entangled with the ancilla"));
        }
        let state = AncillaLatticeState::bell_on_site(&sectors, &resolved.initial, b[0])?;
        let mut rows = entropy::tmi_series(
            &sectors,
            &state,
            &Subsystem::ancilla(),
            &Subsystem::sites(b),
            &Subsystem::sites(c),
            &grid,
            propagator.as_ref(),
        )?;
        for r in &mut rows {
            let v = &mut r.values;
            v.i_ab = scale_entropy(v.i_ab, units);
            v.i_ac = scale_entropy(v.i_ac, units);
            v.i_abc = scale_entropy(v.i_abc, units);
            v.tmi = scale_entropy(v.tmi, units);
        }
        write_file(dir, "tmi.csv", &mut summary, |w| entropy::write_tmi_csv(w, &rows))?;
        summary.wall_seconds.insert("tmi".into(), start.elapsed().as_secs_f64());
    }

    if tasks.contains(&Task::Fit) {
        let start = Instant::now();
        let series = otoc.as_ref().expect("fit computes the OTOC");
        let distance = resolved.pair.distance(&resolved.graph)? as f64;
        let options = FitOptions {
            quantity: config.fit.quantity,
            time_axis: config.fit.time_axis,
            hopping: resolved.params.j,
            window_start: config.fit.window_start,
            onset_level: config.fit.onset_level,
            window_end: config.fit.window,
            ..FitOptions::default()
        };
        let models: Vec<&str> = config.fit.models.iter().map(String::as_str).collect();
        let report = fit_series(series, &models, distance, &options)?;
        write_file(dir, "fits.json", &mut summary, |w| write_json(w, &report.to_json()))?;
        summary.wall_seconds.insert("fit".into(), start.elapsed().as_secs_f64());
    }

    if tasks.contains(&Task::OracleCheck) {
        let start = Instant::now();
        let checks = run_oracle_checks()?;
        summary.oracle_failures = checks.iter().filter(|c| !c.passed).count();
        write_file(dir, "oracle.json", &mut summary, |w| write_json(w, &serde_json::to_value(&checks)?))?;
        summary.wall_seconds.insert("oracle_check".into(), start.elapsed().as_secs_f64());
    }

    let manifest = serde_json::json!({
        "tool": "hexotoc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "lattice": {
            "label": resolved.graph.label(),
            "sites": l,
            "edges": resolved.graph.edges().len(),
            "bosons": resolved.bosons,
        },
        "operators": resolved.pair,
        "params": resolved.params,
        "sector_dims": dims,
        "truncated": summary.truncated,
        "threads": rayon::current_num_threads(),
        "outputs": summary.outputs,
        "bound_violations": summary.bound_violations,
        "oracle_failures": summary.oracle_failures,
        "wall_seconds": summary.wall_seconds,
    });
    write_file(dir, "run_manifest.json", &mut summary, |w| write_json(w, &manifest))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = config(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":["otoc"]}"#);
        assert_eq!(c.grid, GridSpec { t_end_jt: 10.0, points: 201 });
        assert_eq!(c.params().unwrap(), BoseHubbardParams::new(4.0, 16.0));
        assert_eq!(c.krylov, KrylovConfig::default());
        let r = c.resolve().unwrap();
        assert_eq!(r.initial, vec![1; 6]);
        assert_eq!(r.pair, build_preset("hex_strip", 1).unwrap().default_pair());
    }

    #[test]
    fn errors_carry_json_pointers() {
        let e = ExperimentConfig::from_json(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":["otoc"],"grid":{"points":"many"}}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { pointer, .. } if pointer == "/grid/points"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":["otoc","plot"]}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { pointer, .. } if pointer == "/tasks/1"), "{e}");
        let e = config(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":["otoc"],"operators":{"i":0,"j":40}}"#)
            .resolve()
            .unwrap_err();
        assert!(matches!(&e, Error::Config { pointer, .. } if pointer == "/operators"), "{e}");
        let e = config(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":[],"params":{"J":0}}"#).resolve().unwrap_err();
        assert!(matches!(&e, Error::Config { pointer, .. } if pointer == "/params/J"), "{e}");
        let e = config(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":[]}"#).resolve().unwrap_err();
        assert!(matches!(&e, Error::Config { pointer, .. } if pointer == "/tasks"), "{e}");
        let e = config(r#"{"lattice":{"preset":"hex_strip","variant":1},"tasks":["fit"],"fit":{"models":["gaussian","cubic"]}}"#)
            .resolve()
            .unwrap_err();
        assert!(matches!(&e, Error::Config { pointer, .. } if pointer == "/fit/models/1"), "{e}");
    }

    #[test]
    fn heavy_strip_is_refused() {
        let c = config(r#"{"lattice":{"preset":"hex_strip","variant":3},"tasks":["otoc"]}"#);
        let e = run(&c).unwrap_err();
        assert!(matches!(e, Error::ResourceRefusal { dim: 20_058_300, .. }));
        assert!(e.to_string().contains("20058300"));
    }

    #[test]
    fn truncation_lowers_the_estimate() {
        let c = config(r#"{"lattice":{"preset":"hex_strip","variant":3},"tasks":["otoc"],"n_max":2}"#);
        let r = c.resolve().unwrap();
        let dims = r.sector_dims(&c.tasks, c.n_max);
        assert_eq!(dims[&14], sector_dimension(14, 14, 2));
        assert!(check_resources(&dims, DEFAULT_DIM_BUDGET, false).is_ok());
    }

    #[test]
    fn inline_graph_needs_operators() {
        let c = config(r#"{"lattice":{"graph":{"sites":3,"edges":[[0,1],[1,2]]}},"tasks":["otoc"]}"#);
        assert!(matches!(c.resolve(), Err(Error::Config { pointer, .. }) if pointer == "/operators"));
        let c = config(r#"{"lattice":{"graph":{"sites":3,"edges":[[0,1],[1,2]]}},"operators":{"i":0,"j":2},"tasks":["otoc"]}"#);
        assert_eq!(c.resolve().unwrap().pair, OperatorSitePair { i: 0, j: 2 });
    }

    #[test]
    fn manifest_config_round_trips() {
        let c = config(
            r#"{"lattice":{"preset":"chain_pbc","variant":6,"placement":"distant"},"params":{"J":2,"U":3},"tasks":["mi","tmi"],"initial_state":[2,0,1,1,2,0]}"#,
        );
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }
}
