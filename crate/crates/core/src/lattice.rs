//! Finite lattice graphs and the named preset geometries.
//!
//! The hopping term of the Hamiltonian runs over the edges of a
//! [`LatticeGraph`]; nothing else about the geometry enters the dynamics.
//! Coordinates are carried along only for plotting.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected, connected site graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    site_count: usize,
    edges: Vec<(usize, usize)>,
    coords: Option<Vec<[f64; 2]>>,
    label: String,
    adjacency: Vec<Vec<usize>>,
}

/// JSON form of a lattice: `{"sites", "edges", "coords"?, "label"?}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeDocument {
    pub sites: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl LatticeGraph {
    /// Validates and builds a graph. Edges are stored as `(min, max)` in
    /// sorted order; the input order is irrelevant.
    pub fn new(
        site_count: usize,
        edges: &[(usize, usize)],
        coords: Option<Vec<[f64; 2]>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if site_count == 0 {
            return Err(Error::InvalidLattice("site count must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= site_count || b >= site_count {
                return Err(Error::InvalidLattice(format!(
                    "edge #{k} [{a},{b}] references a site outside [0, {site_count})"
                )));
            }
            if a == b {
                return Err(Error::InvalidLattice(format!(
                    "edge #{k} [{a},{b}] is a self-loop"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidLattice(format!(
                    "edge #{k} [{a},{b}] is a duplicate"
                )));
            }
        }
        if let Some(c) = &coords {
            if c.len() != site_count {
                return Err(Error::InvalidLattice(format!(
                    "{} coordinates given for {site_count} sites",
                    c.len()
                )));
            }
        }
        let edges: Vec<(usize, usize)> = seen.into_iter().collect();
        let mut adjacency = vec![Vec::new(); site_count];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        let graph = Self {
            site_count,
            edges,
            coords,
            label: label.into(),
            adjacency,
        };
        let reached = graph.bfs(0).iter().filter(|d| d.is_some()).count();
        if reached != site_count {
            let stray = graph
                .bfs(0)
                .iter()
                .position(Option::is_none)
                .expect("some site unreached");
            return Err(Error::InvalidLattice(format!(
                "graph is disconnected: site {stray} is unreachable from site 0"
            )));
        }
        Ok(graph)
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adjacency[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.adjacency[site].len()
    }

    pub fn check_site(&self, index: usize) -> Result<()> {
        if index < self.site_count {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                index,
                site_count: self.site_count,
            })
        }
    }

    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.site_count];
        let mut queue = VecDeque::from([source]);
        dist[source] = Some(0);
        while let Some(s) = queue.pop_front() {
            let d = dist[s].unwrap();
            for &n in &self.adjacency[s] {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Hop distances from `source` to every site.
    pub fn distances_from(&self, source: usize) -> Result<Vec<usize>> {
        self.check_site(source)?;
        Ok(self.bfs(source).into_iter().map(|d| d.unwrap()).collect())
    }

    /// Shortest-path length in edge hops (one lattice constant per hop).
    pub fn graph_distance(&self, i: usize, j: usize) -> Result<usize> {
        self.check_site(j)?;
        Ok(self.distances_from(i)?[j])
    }

    pub fn to_document(&self) -> LatticeDocument {
        LatticeDocument {
            sites: self.site_count,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            coords: self.coords.clone(),
            label: Some(self.label.clone()),
        }
    }

    pub fn from_document(doc: &LatticeDocument) -> Result<Self> {
        let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(
            doc.sites,
            &edges,
            doc.coords.clone(),
            doc.label.clone().unwrap_or_else(|| "custom".into()),
        )
    }
}

/// Parses and validates the JSON lattice schema.
pub fn load_graph(document: &str) -> Result<LatticeGraph> {
    let doc: LatticeDocument = serde_json::from_str(document)?;
    LatticeGraph::from_document(&doc)
}

/// The two sites `(i, j)` carrying the OTOC's local operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorSitePair {
    pub i: usize,
    pub j: usize,
}

impl OperatorSitePair {
    pub fn new(graph: &LatticeGraph, i: usize, j: usize) -> Result<Self> {
        graph.check_site(i)?;
        graph.check_site(j)?;
        if i == j {
            return Err(Error::CoincidentSites(i));
        }
        Ok(Self { i, j })
    }

    pub fn distance(&self, graph: &LatticeGraph) -> Result<usize> {
        graph.graph_distance(self.i, self.j)
    }
}

/// A named operator placement offered by a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub name: &'static str,
    pub pair: OperatorSitePair,
}

/// A built preset: the graph plus its operator placements. The first
/// placement is the default.
#[derive(Debug, Clone)]
pub struct PresetInstance {
    pub graph: LatticeGraph,
    pub placements: Vec<Placement>,
}

impl PresetInstance {
    pub fn default_pair(&self) -> OperatorSitePair {
        self.placements[0].pair
    }

    pub fn placement(&self, name: &str) -> Option<OperatorSitePair> {
        self.placements
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.pair)
    }
}

/// A family of lattice geometries selectable by name.
pub trait LatticePreset: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Inclusive range of accepted variants.
    fn variants(&self) -> (usize, usize);
    /// Variants listed by `presets list`.
    fn listed_variants(&self) -> Vec<usize> {
        let (lo, hi) = self.variants();
        (lo..=hi).collect()
    }
    fn build_unchecked(&self, variant: usize) -> Result<PresetInstance>;

    fn build(&self, variant: usize) -> Result<PresetInstance> {
        let (min, max) = self.variants();
        if variant < min || variant > max {
            return Err(Error::VariantOutOfRange {
                name: self.name().into(),
                variant,
                min,
                max,
            });
        }
        self.build_unchecked(variant)
    }
}

fn pair(i: usize, j: usize) -> OperatorSitePair {
    OperatorSitePair { i, j }
}

/// Ring of `L` sites, `0-1-...-(L-1)-0`.
struct ChainPbc;

impl LatticePreset for ChainPbc {
    fn name(&self) -> &'static str {
        "chain_pbc"
    }
    fn description(&self) -> &'static str {
        "periodic chain; variant = site count"
    }
    fn variants(&self) -> (usize, usize) {
        (3, 24)
    }
    fn listed_variants(&self) -> Vec<usize> {
        vec![6]
    }
    fn build_unchecked(&self, l: usize) -> Result<PresetInstance> {
        let edges: Vec<_> = (0..l).map(|s| (s, (s + 1) % l)).collect();
        let coords = (0..l)
            .map(|s| {
                let phi = 2.0 * PI * s as f64 / l as f64;
                let r = 0.5 / (PI / l as f64).sin();
                [r * phi.cos(), r * phi.sin()]
            })
            .collect();
        let graph = LatticeGraph::new(l, &edges, Some(coords), format!("chain_pbc({l})"))?;
        Ok(PresetInstance {
            graph,
            placements: vec![
                Placement {
                    name: "neighbor",
                    pair: pair(0, 1),
                },
                Placement {
                    name: "distant",
                    pair: pair(0, l / 2),
                },
            ],
        })
    }
}

/// Two triangles sharing the edge 1-2:
///
/// ```text
///     2 --- 3
///    / \   /
///   0 --- 1
/// ```
///
/// Variant 1 puts the operators on the tips (0, 3), variant 2 on the
/// adjacent pair (0, 1).
struct TrianglePair;

impl LatticePreset for TrianglePair {
    fn name(&self) -> &'static str {
        "triangle_pair"
    }
    fn description(&self) -> &'static str {
        "two edge-sharing triangles; variant = configuration"
    }
    fn variants(&self) -> (usize, usize) {
        (1, 2)
    }
    fn build_unchecked(&self, variant: usize) -> Result<PresetInstance> {
        let h = 3f64.sqrt() / 2.0;
        let graph = LatticeGraph::new(
            4,
            &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)],
            Some(vec![[0.0, 0.0], [1.0, 0.0], [0.5, h], [1.5, h]]),
            format!("triangle_pair({variant})"),
        )?;
        let p = [pair(0, 3), pair(0, 1)][variant - 1];
        Ok(PresetInstance {
            graph,
            placements: vec![Placement {
                name: "configuration",
                pair: p,
            }],
        })
    }
}

/// Two squares sharing the rung 1-4:
///
/// ```text
///   0 --- 1 --- 2
///   |     |     |
///   3 --- 4 --- 5
/// ```
///
/// Variants: 1 = (0, 1), 2 = (0, 4), 3 = (0, 5).
struct SquarePair;

impl LatticePreset for SquarePair {
    fn name(&self) -> &'static str {
        "square_pair"
    }
    fn description(&self) -> &'static str {
        "two edge-sharing squares; variant = configuration"
    }
    fn variants(&self) -> (usize, usize) {
        (1, 3)
    }
    fn build_unchecked(&self, variant: usize) -> Result<PresetInstance> {
        let graph = LatticeGraph::new(
            6,
            &[(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)],
            Some(vec![
                [0.0, 1.0],
                [1.0, 1.0],
                [2.0, 1.0],
                [0.0, 0.0],
                [1.0, 0.0],
                [2.0, 0.0],
            ]),
            format!("square_pair({variant})"),
        )?;
        let p = [pair(0, 1), pair(0, 4), pair(0, 5)][variant - 1];
        Ok(PresetInstance {
            graph,
            placements: vec![Placement {
                name: "configuration",
                pair: p,
            }],
        })
    }
}

/// A square with a triangle on its edge 1-2:
///
/// ```text
///   3 --- 2
///   |     | \
///   |     |  4
///   |     | /
///   0 --- 1
/// ```
///
/// Variants: 1 = (0, 1), 2 = (1, 2), 3 = (3, 4).
struct TriSquare;

impl LatticePreset for TriSquare {
    fn name(&self) -> &'static str {
        "tri_square"
    }
    fn description(&self) -> &'static str {
        "square and triangle sharing an edge; variant = configuration"
    }
    fn variants(&self) -> (usize, usize) {
        (1, 3)
    }
    fn build_unchecked(&self, variant: usize) -> Result<PresetInstance> {
        let h = 3f64.sqrt() / 2.0;
        let graph = LatticeGraph::new(
            5,
            &[(0, 1), (1, 2), (2, 3), (0, 3), (1, 4), (2, 4)],
            Some(vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 1.0],
                [0.0, 1.0],
                [1.0 + h, 0.5],
            ]),
            format!("tri_square({variant})"),
        )?;
        let p = [pair(0, 1), pair(1, 2), pair(3, 4)][variant - 1];
        Ok(PresetInstance {
            graph,
            placements: vec![Placement {
                name: "configuration",
                pair: p,
            }],
        })
    }
}

/// Linear chain of `n` edge-sharing hexagons (`4n + 2` sites, `5n + 1`
/// edges). Top row is `0..=2n`, bottom row `2n+1..=4n+1` with bottom
/// site `2n+1+k` under top site `k`; rungs join even columns.
///
/// ```text
///      1       3
///    /   \   /   \
///   0     2       4
///   |     |       |
///   5     7       9
///    \   /   \   /
///      6       8
/// ```
///
/// `distant` (default): antipodal pair of the first hexagon, `(0, 2n+3)`.
/// `neighbor`: the adjacent pair `(0, 1)`.
struct HexStrip;

impl LatticePreset for HexStrip {
    fn name(&self) -> &'static str {
        "hex_strip"
    }
    fn description(&self) -> &'static str {
        "edge-sharing hexagons in a row; variant = hexagon count"
    }
    fn variants(&self) -> (usize, usize) {
        (1, 3)
    }
    fn build_unchecked(&self, n: usize) -> Result<PresetInstance> {
        let cols = 2 * n + 1;
        let bottom = |k: usize| cols + k;
        let mut edges = Vec::with_capacity(5 * n + 1);
        for k in 0..cols - 1 {
            edges.push((k, k + 1));
            edges.push((bottom(k), bottom(k + 1)));
        }
        for k in (0..cols).step_by(2) {
            edges.push((k, bottom(k)));
        }
        let dx = 3f64.sqrt() / 2.0;
        let mut coords = Vec::with_capacity(2 * cols);
        for k in 0..cols {
            coords.push([k as f64 * dx, 1.0 + 0.5 * (k % 2) as f64]);
        }
        for k in 0..cols {
            coords.push([k as f64 * dx, -0.5 * (k % 2) as f64]);
        }
        let graph = LatticeGraph::new(2 * cols, &edges, Some(coords), format!("hex_strip({n})"))?;
        Ok(PresetInstance {
            graph,
            placements: vec![
                Placement {
                    name: "distant",
                    pair: pair(0, bottom(2)),
                },
                Placement {
                    name: "neighbor",
                    pair: pair(0, 1),
                },
            ],
        })
    }
}

/// The first `n` rings of a three-hexagon flake whose rings all share one
/// central vertex (13 sites at `n = 3`). Perimeter sites are numbered
/// counter-clockwise from a neighbor of the centre, the centre is the
/// last site.
///
/// ```text
///          2
///       3     1
///       4     0
///    5     c     11
///    6           10
///       7     9
///          8
/// ```
///
/// `distant` (default): `(0, 3)`, antipodal in the first ring and away
/// from the edge it shares with the second ring. For `n = 1` this is the
/// same OTOC as `hex_strip(1)`. `neighbor`: `(0, 1)`.
struct HexFlake;

impl HexFlake {
    fn geometry(n: usize) -> (Vec<[f64; 2]>, Vec<(usize, usize)>) {
        let centres = [90.0f64, 210.0, 330.0];
        let mut perimeter: Vec<[f64; 2]> = Vec::new();
        let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]) < 1e-9;
        for &c in &centres[..n] {
            let (cx, cy) = (c.to_radians().cos(), c.to_radians().sin());
            for k in 0..6 {
                let th = (30.0 + 60.0 * k as f64).to_radians();
                let p = [cx + th.cos(), cy + th.sin()];
                if p[0].hypot(p[1]) < 1e-9 || perimeter.iter().any(|&q| close(p, q)) {
                    continue;
                }
                perimeter.push(p);
            }
        }
        // counter-clockwise from the spoke neighbour at 30 degrees
        let angle = |p: &[f64; 2]| (p[1].atan2(p[0]).to_degrees() - 30.0 + 720.0 + 1e-9) % 360.0;
        perimeter.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
        let mut coords = perimeter;
        coords.push([0.0, 0.0]);
        let mut edges = Vec::new();
        for a in 0..coords.len() {
            for b in a + 1..coords.len() {
                let d = (coords[a][0] - coords[b][0]).hypot(coords[a][1] - coords[b][1]);
                if (d - 1.0).abs() < 1e-9 {
                    edges.push((a, b));
                }
            }
        }
        (coords, edges)
    }
}

impl LatticePreset for HexFlake {
    fn name(&self) -> &'static str {
        "hex_flake"
    }
    fn description(&self) -> &'static str {
        "hexagons fused around a shared central vertex; variant = hexagon count"
    }
    fn variants(&self) -> (usize, usize) {
        (1, 3)
    }
    fn listed_variants(&self) -> Vec<usize> {
        vec![3]
    }
    fn build_unchecked(&self, n: usize) -> Result<PresetInstance> {
        let (coords, edges) = Self::geometry(n);
        let graph = LatticeGraph::new(coords.len(), &edges, Some(coords), format!("hex_flake({n})"))?;
        Ok(PresetInstance {
            graph,
            placements: vec![
                Placement {
                    name: "distant",
                    pair: pair(0, 3),
                },
                Placement {
                    name: "neighbor",
                    pair: pair(0, 1),
                },
            ],
        })
    }
}

/// Ordered, name-addressable collection of lattice presets.
pub struct PresetRegistry {
    presets: Vec<Box<dyn LatticePreset>>,
}

impl PresetRegistry {
    pub fn empty() -> Self {
        Self {
            presets: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ChainPbc));
        r.register(Box::new(TrianglePair));
        r.register(Box::new(SquarePair));
        r.register(Box::new(TriSquare));
        r.register(Box::new(HexStrip));
        r.register(Box::new(HexFlake));
        r
    }

    /// Adds a preset; a later registration under an existing name replaces it.
    pub fn register(&mut self, preset: Box<dyn LatticePreset>) {
        match self.presets.iter().position(|p| p.name() == preset.name()) {
            Some(k) => self.presets[k] = preset,
            None => self.presets.push(preset),
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn LatticePreset> {
        self.presets
            .iter()
            .find(|p| p.name() == name)
            .map(|p| p.as_ref())
            .ok_or_else(|| Error::UnknownPreset(name.into()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn LatticePreset> {
        self.presets.iter().map(|p| p.as_ref())
    }

    /// One row per listed `(preset, variant)`, in registration order.
    pub fn list(&self) -> Vec<PresetRow> {
        let mut rows = Vec::new();
        for p in self.iter() {
            for v in p.listed_variants() {
                let inst = p.build(v).expect("listed variants build");
                rows.push(PresetRow {
                    name: p.name(),
                    variant: v,
                    sites: inst.graph.site_count(),
                    edges: inst.graph.edges().len(),
                    placements: inst
                        .placements
                        .iter()
                        .map(|pl| (pl.name, pl.pair))
                        .collect(),
                    description: p.description(),
                });
            }
        }
        rows
    }
}

#[derive(Debug, Clone)]
pub struct PresetRow {
    pub name: &'static str,
    pub variant: usize,
    pub sites: usize,
    pub edges: usize,
    pub placements: Vec<(&'static str, OperatorSitePair)>,
    pub description: &'static str,
}

pub fn build_preset(name: &str, variant: usize) -> Result<PresetInstance> {
    PresetRegistry::builtin().get(name)?.build(variant)
}
