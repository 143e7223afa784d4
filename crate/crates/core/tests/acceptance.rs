//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero on any failure. Criterion 10 is heavy and runs only with
//! `--ignored` or `HEXOTOC_HEAVY=1`; numeric arguments select criteria.

use std::error::Error as StdError;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use hexotoc_core::entropy::{
    evolve_ancilla_state, mi_series, mutual_information, otoc_mi_bound_check, subsystem_entropy, tmi_series,
    tripartite_mutual_information, AncillaLatticeState, Subsystem,
};
use hexotoc_core::fitting::{
    convolution_ln_terms, fit_model, fit_series, model_eval, FitData, FitOptions, FitReport, FitResult, ModelRegistry,
};
use hexotoc_core::observables::OtocProblem;
use hexotoc_core::oracle::{check_otoc, check_partial_trace, dense_partial_trace, ProductState, DEFAULT_CAP};
use hexotoc_core::special::{erfc, erfcx};
use hexotoc_core::{
    build_preset, entropy, sector_dimension, BoseHubbardParams, FockBasis, KrylovPropagator, LatticeGraph,
    OperatorSitePair, OtocSeries, PresetRegistry, Propagator, QuantumState, SectorCache, TimeGrid,
};
use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<Verdict, Box<dyn StdError>>;

struct Verdict {
    passed: bool,
    detail: String,
}

/// Sub-checks of one criterion, reported together.
struct Checks {
    passed: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: impl Into<String>) {
        self.passed &= ok;
        let note = note.into();
        self.notes.push(if ok { note } else { format!("FAILED {note}") });
    }

    fn info(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn done(self) -> Outcome {
        Ok(Verdict {
            passed: self.passed,
            detail: self.notes.join("; "),
        })
    }
}

const MODELS: [&str; 3] = ["exponential", "gaussian", "convolution"];

fn params() -> BoseHubbardParams {
    BoseHubbardParams::default()
}

fn grid(t_end: f64, step: f64) -> TimeGrid {
    TimeGrid::new(0.0, t_end, (t_end / step).round() as usize + 1).unwrap()
}

fn otoc(graph: &LatticeGraph, pair: OperatorSitePair, n_max: Option<usize>, grid: &TimeGrid) -> hexotoc_core::Result<OtocSeries> {
    let sectors = SectorCache::new(graph.clone(), params(), n_max);
    OtocProblem {
        sectors: &sectors,
        pair,
        initial: vec![1; graph.site_count()],
    }
    .series(grid, &KrylovPropagator::default())
}

/// Distant-pair strip OTOC and the pair's graph distance.
fn strip_otoc(name: &str, variant: usize, n_max: Option<usize>, grid: &TimeGrid) -> hexotoc_core::Result<(OtocSeries, f64)> {
    let inst = build_preset(name, variant)?;
    let pair = inst.placement("distant").unwrap_or(inst.default_pair());
    let distance = pair.distance(&inst.graph)? as f64;
    Ok((otoc(&inst.graph, pair, n_max, grid)?, distance))
}

fn fit<'a>(report: &'a FitReport, model: &str) -> &'a FitResult {
    report.ranked.iter().find(|f| f.model == model).expect("model was fitted")
}

fn window_fit(series: &OtocSeries, distance: f64, start: Option<f64>, onset: Option<f64>, end: Option<f64>) -> hexotoc_core::Result<FitReport> {
    let options = FitOptions {
        window_start: start,
        onset_level: onset,
        window_end: end,
        ..FitOptions::default()
    };
    fit_series(series, &MODELS, distance, &options)
}

fn describe(report: &FitReport) -> String {
    let g = fit(report, "gaussian");
    let e = fit(report, "exponential");
    let c = fit(report, "convolution");
    format!(
        "window [{:.4}, {:.4}]: gaussian rss {:.4} (λ {:.3}, v {:.3}), exponential rss {:.4}, τ/σ {:.3}",
        report.window[0],
        report.window[1],
        g.rss,
        g.param("lambda").unwrap(),
        g.param("v").unwrap(),
        e.rss,
        c.tau_over_sigma().unwrap()
    )
}

/// Presets with two to six sites whose unit-filling sector fits the dense
/// oracle, plus the dimer.
fn small_systems() -> hexotoc_core::Result<Vec<(LatticeGraph, Vec<OperatorSitePair>)>> {
    let dimer = LatticeGraph::new(2, &[(0, 1)], None, "dimer")?;
    let pair = OperatorSitePair::new(&dimer, 0, 1)?;
    let mut out = vec![(dimer, vec![pair])];
    for preset in PresetRegistry::builtin().iter() {
        let (lo, hi) = preset.variants();
        for v in lo..=hi {
            let inst = preset.build(v)?;
            let l = inst.graph.site_count();
            if l > 6 || sector_dimension(l, l, l) > DEFAULT_CAP as u64 {
                continue;
            }
            let pairs = inst.placements.iter().map(|p| p.pair).collect();
            out.push((inst.graph, pairs));
        }
    }
    Ok(out)
}

/// Entropy of a set of factors of a pure product-embedded state, traced on
/// whichever side is smaller.
fn dense_entropy(state: &ProductState, factors: &[usize]) -> hexotoc_core::Result<f64> {
    let all = state.local_dims.len();
    let rest: Vec<usize> = (0..all).filter(|k| !factors.contains(k)).collect();
    let size = |fs: &[usize]| fs.iter().map(|&k| state.local_dims[k]).product::<usize>();
    let keep = if size(factors) <= size(&rest) { factors } else { &rest };
    if keep.is_empty() {
        return Ok(0.0);
    }
    entropy::entropy_of_matrix(&dense_partial_trace(state, keep)?)
}

fn factors(sub: &Subsystem, ancilla_factor: usize) -> Vec<usize> {
    let mut f = sub.sites.clone();
    if sub.ancilla {
        f.push(ancilla_factor);
    }
    f
}

fn dense_mi(state: &ProductState, a: &Subsystem, b: &Subsystem) -> hexotoc_core::Result<f64> {
    let anc = state.local_dims.len() - 1;
    Ok(dense_entropy(state, &factors(a, anc))? + dense_entropy(state, &factors(b, anc))?
        - dense_entropy(state, &factors(&a.union(b), anc))?)
}

/// Worst MI and reduced-density-matrix deviation from the dense oracle for
/// a lattice state and subsystems `a`, `b`.
fn entropy_error(state: &QuantumState, a: &Subsystem, b: &Subsystem) -> hexotoc_core::Result<f64> {
    let embedded = ProductState::from_lattice(state, DEFAULT_CAP)?;
    let mi = mutual_information(state, a, b)?.mi;
    let rho = entropy::reduced_density_matrix(state, a)?;
    Ok((mi - dense_mi(&embedded, a, b)?)
        .abs()
        .max(check_partial_trace(&embedded, &rho, &a.sites)?)
        .max((subsystem_entropy(state, b)? - dense_entropy(&embedded, &b.sites)?).abs()))
}

fn tmi_error(state: &AncillaLatticeState, b: &Subsystem, c: &Subsystem) -> hexotoc_core::Result<f64> {
    let embedded = ProductState::from_ancilla(state, DEFAULT_CAP)?;
    let a = Subsystem::ancilla();
    let fast = tripartite_mutual_information(state, &a, b, c)?.tmi;
    let slow = dense_mi(&embedded, &a, b)? + dense_mi(&embedded, &a, c)? - dense_mi(&embedded, &a, &b.union(c))?;
    Ok((fast - slow).abs())
}

fn criterion_1() -> Outcome {
    let mut checks = Checks::new();
    let systems = small_systems()?;
    let krylov = KrylovPropagator::default();
    let p = params();

    let mut worst_otoc = 0.0f64;
    let mut worst_entropy = 0.0f64;
    let mut pairs = 0;
    for (graph, placements) in &systems {
        let l = graph.site_count();
        let ones = vec![1u8; l];
        for &pair in placements {
            worst_otoc = worst_otoc.max(check_otoc(graph, p, pair, &ones, &TimeGrid::default(), &krylov)?);
            pairs += 1;
        }
        let sectors = SectorCache::new(graph.clone(), p, None);
        let h = sectors.hamiltonian(l)?;
        let psi = krylov.evolve(&h, &QuantumState::fock(h.basis().clone(), &ones)?, 1.3 / p.j)?.state;
        let halves = (Subsystem::sites(0..l / 2), Subsystem::sites(l / 2..l));
        worst_entropy = worst_entropy.max(entropy_error(&psi, &halves.0, &halves.1)?);
        let pair = placements[0];
        let (b, c) = (Subsystem::sites([pair.i]), Subsystem::sites([pair.j]));
        worst_entropy = worst_entropy.max(entropy_error(&psi, &b, &c)?);
        let anc = AncillaLatticeState::bell_on_site(&sectors, &ones, pair.i)?;
        let anc = evolve_ancilla_state(&anc, &sectors, 1.3 / p.j, &krylov)?;
        worst_entropy = worst_entropy.max(tmi_error(&anc, &b, &c)?);
    }
    checks.check(
        worst_otoc <= 1e-8,
        format!("{} systems, {pairs} pairs: max |ΔOTOC| {worst_otoc:.2e} on the default grid", systems.len()),
    );
    checks.check(worst_entropy <= 1e-10, format!("all-ones entropy/MI/TMI max error {worst_entropy:.2e}"));

    // Random unit-filling Fock states, pairs, times and bipartitions.
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 24,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = (
        any::<Index>(),
        any::<Index>(),
        any::<Index>(),
        any::<Index>(),
        0.5f64..10.0,
        prop::collection::vec(0usize..3, 6),
    );
    let worst = std::cell::Cell::new((0.0f64, 0.0f64));
    let result = runner.run(&strategy, |(sys, i, j, state, jt, labels)| {
        let (graph, _) = &systems[sys.index(systems.len())];
        let l = graph.site_count();
        let i = i.index(l);
        let j = (i + 1 + j.index(l - 1)) % l;
        let pair = OperatorSitePair::new(graph, i, j).unwrap();
        let basis = FockBasis::new(l, l, l).unwrap();
        let occ = basis.unrank(state.index(basis.dim())).unwrap();
        let e_otoc = check_otoc(graph, p, pair, &occ, &TimeGrid::new(0.0, jt, 11).unwrap(), &krylov).unwrap();

        let a = Subsystem::sites((0..l).filter(|&s| s == i || (labels[s] == 0 && s != j)));
        let b = Subsystem::sites((0..l).filter(|&s| s == j || (labels[s] == 1 && s != i)));
        let sectors = SectorCache::new(graph.clone(), p, None);
        let h = sectors.hamiltonian(l).unwrap();
        let psi = krylov.evolve(&h, &QuantumState::fock(h.basis().clone(), &occ).unwrap(), jt / p.j).unwrap().state;
        let e_mi = entropy_error(&psi, &a, &b).unwrap();
        let (w_otoc, w_mi) = worst.get();
        worst.set((w_otoc.max(e_otoc), w_mi.max(e_mi)));
        prop_assert!(e_otoc <= 1e-8, "OTOC error {e_otoc} on {} pair {pair:?} from {occ:?}", graph.label());
        prop_assert!(e_mi <= 1e-10, "MI error {e_mi} on {} A {a:?} B {b:?}", graph.label());
        Ok(())
    });
    let (w_otoc, w_mi) = worst.get();
    match result {
        Ok(()) => checks.check(true, format!("24 random cases: max |ΔOTOC| {w_otoc:.2e}, max MI error {w_mi:.2e}")),
        Err(e) => checks.check(false, format!("random cases: {e}")),
    }
    checks.done()
}

fn criterion_2() -> Outcome {
    let mut checks = Checks::new();
    let graph = build_preset("hex_strip", 1)?.graph;
    let p = BoseHubbardParams::from_ratio(4.0, 4.0);
    let sectors = SectorCache::new(graph, p, None);
    let h = sectors.hamiltonian(6)?;
    let krylov = KrylovPropagator::default();
    let mut psi = QuantumState::fock(h.basis().clone(), &[1; 6])?;
    let e0 = h.energy(&psi)?;
    let spread = h.energy_spread(&psi)?;
    let (mut norm_drift, mut energy_drift) = (0.0f64, 0.0f64);
    let jt = TimeGrid::default().values();
    for w in jt.windows(2) {
        psi = krylov.evolve(&h, &psi, (w[1] - w[0]) / p.j)?.state;
        norm_drift = norm_drift.max((psi.norm() - 1.0).abs());
        energy_drift = energy_drift.max((h.energy(&psi)? - e0).abs() / spread);
    }
    checks.check(norm_drift <= 1e-9, format!("norm drift {norm_drift:.2e} over Jt [0, 10] in {} steps", jt.len() - 1));
    checks.check(
        energy_drift <= 1e-9,
        format!("energy drift {energy_drift:.2e} relative to spread {spread:.4} (⟨H⟩₀ = {e0:.1e})"),
    );
    checks.done()
}

fn criterion_3() -> Outcome {
    let mut checks = Checks::new();
    let (mut worst, mut count, mut largest) = (0.0f64, 0, 0);
    let at_zero = TimeGrid::new(0.0, 1e-3, 2)?;
    for preset in PresetRegistry::builtin().iter() {
        let (lo, hi) = preset.variants();
        for v in lo..=hi {
            let inst = preset.build(v)?;
            let l = inst.graph.site_count();
            let dim = sector_dimension(l, l, l);
            if dim > 100_000 {
                continue;
            }
            largest = largest.max(dim);
            for placement in &inst.placements {
                let value = otoc(&inst.graph, placement.pair, None, &at_zero)?.values[0];
                worst = worst.max((value - 1.0).norm());
                count += 1;
            }
        }
    }
    checks.check(
        worst <= 1e-10,
        format!("{count} preset placements up to dim {largest}: max |OTOC(0) - 1| {worst:.2e}"),
    );
    checks.done()
}

fn criterion_4() -> Outcome {
    let mut checks = Checks::new();
    let start = Instant::now();
    let (series, distance) = strip_otoc("hex_strip", 1, None, &TimeGrid::default())?;

    let report = window_fit(&series, distance, None, None, None)?;
    let (g, e, c) = (fit(&report, "gaussian"), fit(&report, "exponential"), fit(&report, "convolution"));
    checks.check(g.rss < e.rss, format!("default {}", describe(&report)));
    checks.check(c.tau_over_sigma().unwrap() > 5.0, "τ/σ > 5 on the default window");

    let onset = window_fit(&series, distance, None, Some(0.9), None)?;
    let g = fit(&onset, "gaussian");
    let (lambda, v) = (g.param("lambda").unwrap(), g.param("v").unwrap());
    let rel = ((lambda + 26.310) / 26.310).abs().max(((v - 14.754) / 14.754).abs());
    checks.check(
        rel <= 0.3,
        format!("onset-0.9 window [{:.4}, {:.4}]: λ {lambda:.3}, v {v:.3}, worst relative deviation {:.1}%", onset.window[0], onset.window[1], 100.0 * rel),
    );

    let data = FitData::from_series(&series, &FitOptions::default())?;
    let (from, to) = (data.threshold_crossing(0.2).unwrap(), data.threshold_crossing(0.05).unwrap());
    let mut ends = 0;
    let mut ranked = true;
    for &end in data.t.iter().filter(|&&t| t >= from && t <= to) {
        let r = window_fit(&series, distance, None, None, Some(end))?;
        ranked &= fit(&r, "gaussian").rss < fit(&r, "exponential").rss;
        ends += 1;
    }
    checks.check(ranked, format!("gaussian ranked first for all {ends} window ends in [{from}, {to}]"));
    let secs = start.elapsed().as_secs_f64();
    checks.check(secs < 60.0, format!("{secs:.1} s"));
    checks.done()
}

/// Exact 2-hex strip OTOC on Jt [0, 3.5] in steps of 0.05.
fn two_hex() -> &'static (OtocSeries, f64) {
    static SERIES: OnceLock<(OtocSeries, f64)> = OnceLock::new();
    SERIES.get_or_init(|| strip_otoc("hex_strip", 2, None, &grid(3.5, 0.05)).expect("2-hex OTOC"))
}

fn criterion_5() -> Outcome {
    let mut checks = Checks::new();
    let start = Instant::now();
    let (series, distance) = two_hex();
    let data = FitData::from_series(series, &FitOptions::default())?;
    let half = data.threshold_crossing(0.5).ok_or("2-hex OTOC never drops below 0.5")?;
    let report = window_fit(series, *distance, None, None, Some(half))?;
    let (g, e, c) = (fit(&report, "gaussian"), fit(&report, "exponential"), fit(&report, "convolution"));
    checks.check(g.rss < e.rss, format!("half-decay {}", describe(&report)));
    checks.check(c.tau_over_sigma().unwrap() > 5.0, "τ/σ > 5 on the half-decay window");
    checks.info(format!("default {}", describe(&window_fit(series, *distance, None, None, None)?)));
    let secs = start.elapsed().as_secs_f64();
    checks.check(secs < 1800.0, format!("{secs:.1} s"));
    checks.done()
}

/// First grid time at which two Re OTOC curves differ by more than 0.05.
fn departure(a: &OtocSeries, b: &OtocSeries) -> Option<f64> {
    let jt_b: Vec<i64> = b.jt.iter().map(|t| (t * 1000.0).round() as i64).collect();
    a.jt.iter().zip(&a.values).find_map(|(&t, va)| {
        let k = jt_b.iter().position(|&x| x == (t * 1000.0).round() as i64)?;
        ((va.re - b.values[k].re).abs() > 0.05).then_some(t)
    })
}

fn show(t: Option<f64>, end: f64) -> String {
    t.map_or(format!("> {end}"), |t| format!("{t:.2}"))
}

fn criterion_6() -> Outcome {
    let mut checks = Checks::new();
    let early = grid(1.5, 0.05);
    let reference = strip_otoc("hex_strip", 3, Some(2), &early)?.0;
    let one_t = strip_otoc("hex_strip", 1, Some(2), &early)?.0;
    let two_t = strip_otoc("hex_strip", 2, Some(2), &early)?.0;
    let d1 = departure(&one_t, &reference);
    let d2 = departure(&two_t, &reference);
    let (t1, t2) = (d1.unwrap_or(f64::INFINITY), d2.unwrap_or(f64::INFINITY));
    checks.check(
        t2 > t1,
        format!("departure from 3-hex (n_max 2, Jt ≤ 1.5): 1-hex {}, 2-hex {}", show(d1, 1.5), show(d2, 1.5)),
    );

    let one = strip_otoc("hex_strip", 1, None, &grid(3.5, 0.05))?.0;
    let two = &two_hex().0;
    let limit = t1.min(t2);
    let gap = one
        .jt
        .iter()
        .zip(one.values.iter().zip(&two.values))
        .filter(|(&t, _)| t < limit - 1e-9)
        .map(|(_, (a, b))| (a.re - b.re).abs())
        .fold(0.0, f64::max);
    checks.check(gap <= 0.05, format!("exact 1-hex vs 2-hex max |ΔRe| {gap:.4} for Jt < {limit:.2}"));
    checks.info(format!("exact 1-hex vs 2-hex departure {}", show(departure(&one, two), 3.5)));
    checks.done()
}

/// Block means of `values` over `blocks` equal runs.
fn block_means(values: &[f64], blocks: usize) -> Vec<f64> {
    let n = values.len();
    (0..blocks)
        .map(|k| {
            let run = &values[k * n / blocks..(k + 1) * n / blocks];
            run.iter().sum::<f64>() / run.len() as f64
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut checks = Checks::new();
    let inst = build_preset("chain_pbc", 6)?;
    let pair = inst.placement("distant").ok_or("ring has no distant placement")?;
    let p = params();
    let sectors = SectorCache::new(inst.graph.clone(), p, None);
    let krylov = KrylovPropagator::default();
    let grid = TimeGrid::default();
    let ones = [1u8; 6];

    let anc = AncillaLatticeState::bell_on_site(&sectors, &ones, pair.i)?;
    let c = Subsystem::sites([(pair.i + 1) % 6, (pair.i + 2) % 6]);
    let tmi = tmi_series(&sectors, &anc, &Subsystem::ancilla(), &Subsystem::sites([pair.i]), &c, &grid, &krylov)?;
    let values: Vec<f64> = tmi.iter().map(|r| r.values.tmi).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let late: Vec<f64> = tmi.iter().filter(|r| r.jt >= 5.0).map(|r| r.values.tmi).collect();
    let mean = late.iter().sum::<f64>() / late.len() as f64;
    checks.check(min < 0.0, format!("TMI minimum {min:.4}"));
    checks.check(mean < 0.0, format!("TMI mean over Jt [5, 10] {mean:.4}"));

    let (a, b) = (Subsystem::sites(0..3), Subsystem::sites(3..6));
    let mi = mi_series(&sectors, &ones, &a, &b, &grid, &krylov)?;
    let mi_values: Vec<f64> = mi.iter().map(|r| r.values.mi).collect();
    let blocks = block_means(&mi_values, 10);
    let top = blocks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let plateau = blocks.iter().position(|&m| m >= 0.9 * top).unwrap();
    let rising = blocks[..=plateau].windows(2).all(|w| w[1] >= w[0]);
    let shown: Vec<String> = blocks.iter().map(|m| format!("{m:.3}")).collect();
    checks.check(
        rising,
        format!("MI block means [{}] non-decreasing to plateau block {plateau}", shown.join(", ")),
    );

    let series = otoc(&inst.graph, pair, None, &grid)?;
    let raw: Vec<(f64, f64)> = mi.iter().map(|r| (r.jt, r.values.mi)).collect();
    let rows = otoc_mi_bound_check(&series, &raw)?;
    let violations: Vec<String> = rows.iter().filter(|r| !r.satisfied).map(|r| format!("Jt {}", r.jt)).collect();
    checks.check(
        violations.is_empty(),
        format!("bound ΔOTOC ≤ ΔI(A:B): {} of {} rows violated {:?}", violations.len(), rows.len(), violations),
    );
    checks.done()
}

fn criterion_8() -> Outcome {
    let mut checks = Checks::new();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/erfc_reference.csv");
    let mut reader = csv::Reader::from_path(path)?;
    let (mut worst_erfc, mut worst_erfcx, mut n) = (0.0f64, 0.0f64, 0);
    for row in reader.deserialize() {
        let (x, want, want_x): (f64, f64, f64) = row?;
        worst_erfc = worst_erfc.max(((erfc(x) - want) / want).abs());
        worst_erfcx = worst_erfcx.max(((erfcx(x) - want_x) / want_x).abs());
        n += 1;
    }
    checks.check(n == 10_000, format!("{n} reference points"));
    checks.check(worst_erfc <= 1e-12, format!("erfc max relative error {worst_erfc:.2e}"));
    checks.check(worst_erfcx <= 1e-12, format!("erfcx max relative error {worst_erfcx:.2e}"));

    let (mut evals, mut bad) = (0, Vec::new());
    for it in 0..=200 {
        let t = 0.5 * it as f64;
        for is in 0..=40 {
            let sigma = 1e-3 * 10f64.powf(4.0 * is as f64 / 40.0);
            for itau in 0..=40 {
                let tau = 0.25 * itau as f64;
                let f = model_eval("convolution", &[1.0, 1.0, tau, sigma], t, 0.0)?;
                let (x, y) = convolution_ln_terms(tau, sigma, t);
                let representable = x.max(y) > f64::MIN_POSITIVE.ln();
                if !f.is_finite() || (representable && f <= 0.0) {
                    bad.push((t, sigma, tau, f));
                }
                evals += 1;
            }
        }
    }
    checks.check(
        bad.is_empty(),
        format!("convolution finite (and positive where representable) at {evals} sweep points; bad {:?}", &bad[..bad.len().min(3)]),
    );
    checks.done()
}

fn criterion_9() -> Outcome {
    let mut checks = Checks::new();
    let registry = ModelRegistry::builtin();
    let cases: [(&str, &[f64], f64, f64, usize); 4] = [
        ("exponential", &[-3.0, 12.0], 3.0, 2.0, 41),
        ("gaussian", &[-8.0, 20.0], 3.0, 0.8, 41),
        ("gaussian", &[-26.31, 14.754], 3.0, 0.5, 41),
        ("convolution", &[0.8, 0.3, 1.5, 0.9], 0.0, 4.0, 61),
    ];
    for (model, want, distance, end, n) in cases {
        let t: Vec<f64> = (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect();
        let y = t.iter().map(|&ti| model_eval(model, want, ti, distance)).collect::<Result<_, _>>()?;
        let data = FitData::new(t, y)?;
        let got = fit_model(registry.get(model)?, &data, end, distance, 2000)?;
        let rel = got
            .values()
            .iter()
            .zip(want)
            .map(|(g, w)| ((g - w) / w).abs())
            .fold(0.0, f64::max);
        checks.check(rel <= 1e-6, format!("{model} {want:?}: relative error {rel:.1e}"));
    }
    checks.done()
}

fn criterion_10() -> Outcome {
    let mut checks = Checks::new();
    for (name, n_max) in [("hex_flake", None), ("hex_strip", Some(3))] {
        let (series, distance) = strip_otoc(name, 3, n_max, &grid(3.0, 0.1))?;
        let report = window_fit(&series, distance, None, None, None)?;
        let (g, e, c) = (fit(&report, "gaussian"), fit(&report, "exponential"), fit(&report, "convolution"));
        let label = match n_max {
            Some(n) => format!("{name} 3 (n_max {n}, approximate)"),
            None => format!("{name} 3"),
        };
        checks.check(e.rss < g.rss, format!("{label} {}", describe(&report)));
        checks.check(c.tau_over_sigma().unwrap() < 1.0, format!("{label} τ/σ < 1"));
    }
    checks.done()
}

struct Criterion {
    number: u32,
    name: &'static str,
    run: fn() -> Outcome,
    heavy: bool,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { number: 1, name: "oracle equivalence", run: criterion_1, heavy: false },
    Criterion { number: 2, name: "hexagon conservation", run: criterion_2, heavy: false },
    Criterion { number: 3, name: "OTOC(0) = 1 on presets", run: criterion_3, heavy: false },
    Criterion { number: 4, name: "1-hex reproduction", run: criterion_4, heavy: false },
    Criterion { number: 5, name: "2-hex strip ranking", run: criterion_5, heavy: false },
    Criterion { number: 6, name: "size independence of early decay", run: criterion_6, heavy: false },
    Criterion { number: 7, name: "ring TMI, MI envelope and bound", run: criterion_7, heavy: false },
    Criterion { number: 8, name: "special functions", run: criterion_8, heavy: false },
    Criterion { number: 9, name: "fit round-trips", run: criterion_9, heavy: false },
    Criterion { number: 10, name: "3-hex ranking", run: criterion_10, heavy: true },
];

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let heavy = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("HEXOTOC_HEAVY").is_ok_and(|v| v == "1");
    let selected: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let failures = rayon::scope(|_| {
        let mut failures = 0;
        for c in &CRITERIA {
            if !selected.is_empty() && !selected.contains(&c.number) {
                continue;
            }
            if c.heavy && !heavy {
                println!("SKIP criterion {} ({}): heavy, run with --ignored or HEXOTOC_HEAVY=1", c.number, c.name);
                continue;
            }
            let start = Instant::now();
            let verdict = (c.run)().unwrap_or_else(|e| Verdict {
                passed: false,
                detail: format!("error: {e}"),
            });
            println!(
                "{} criterion {} ({}): {} [{:.1} s]",
                if verdict.passed { "PASS" } else { "FAIL" },
                c.number,
                c.name,
                verdict.detail,
                start.elapsed().as_secs_f64()
            );
            failures += usize::from(!verdict.passed);
        }
        failures
    });
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
