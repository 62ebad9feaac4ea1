//! Dual-graph presentation of a veering branched surface.
//!
//! The [`VeeringComplex`] is the single source of truth for everything else
//! in this crate: the directed multigraph `G` (vertices = triple points,
//! edges = branch segments, both carrying opaque numeric ids), the smooth
//! strand pairings at each vertex, and the diamond sectors with their
//! bottom edges and top chains. Parsing, canonical serialization,
//! validation, branch-loop extraction and finite cyclic covers live here.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Vertex (triple point) identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

/// Edge identifier of the dual graph `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

/// Sector identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectorId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Triple-point color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Blue,
    Red,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Blue => Color::Red,
            Color::Red => Color::Blue,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Blue => write!(f, "blue"),
            Color::Red => write!(f, "red"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
}

/// Smooth strand pairing at one vertex: two (incoming, outgoing) edge pairs
/// covering the four incident edge-ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smoothing {
    pub vertex: VertexId,
    pub pairs: [(EdgeId, EdgeId); 2],
}

/// A diamond sector: bottom and top corner vertices, the two single-edge
/// bottom sides and the two top chains (each a directed edge path).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub id: SectorId,
    pub bottom: VertexId,
    pub top: VertexId,
    pub left_bottom: EdgeId,
    pub right_bottom: EdgeId,
    pub left_top: Vec<EdgeId>,
    pub right_top: Vec<EdgeId>,
}

/// Which of the two boundary paths of a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// The validated dual-graph presentation. Immutable once constructed;
/// vertices, edges and sectors are kept sorted by id.
#[derive(Debug, Clone)]
pub struct VeeringComplex {
    pub name: String,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub smoothings: Vec<Smoothing>,
    pub sectors: Vec<Sector>,
    /// Optional edge weighting by position, measuring intersection with a
    /// fiber surface.
    pub fiber_cocycle: Option<Vec<u64>>,

    vertex_pos: BTreeMap<VertexId, usize>,
    edge_pos: BTreeMap<EdgeId, usize>,
    sector_pos: BTreeMap<SectorId, usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("{referrer} references missing {kind} {id}")]
    DanglingRef {
        kind: &'static str,
        id: u32,
        referrer: String,
    },
    #[error("fiber_cocycle key {key:?} is not an edge id")]
    CocycleKey { key: String },
}

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("sector {sector}: weight sums over left and right boundary paths differ mod {n} ({left} vs {right})")]
    SectorLift {
        sector: SectorId,
        n: u64,
        left: u64,
        right: u64,
    },
    #[error("cover is disconnected; the Heegaard surface of a veering complex must be connected")]
    Disconnected,
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("id overflow while relabeling the cover")]
    IdOverflow,
    #[error("cover failed validation: {0}")]
    Invalid(String),
}

/// Result of one validation check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub offenders: Vec<String>,
    pub message: String,
}

/// Outcome of [`VeeringComplex::validate`]: one entry per invariant class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    name: String,
    vertices: Vec<RawVertex>,
    edges: Vec<RawEdge>,
    smoothings: Vec<RawSmoothing>,
    sectors: Vec<RawSector>,
    #[serde(default)]
    fiber_cocycle: Option<BTreeMap<String, u64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    id: u32,
    color: Color,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: u32,
    from: u32,
    to: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSmoothing {
    vertex: u32,
    pairs: [[u32; 2]; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSector {
    id: u32,
    bottom: u32,
    top: u32,
    left_bottom: u32,
    right_bottom: u32,
    left_top: Vec<u32>,
    right_top: Vec<u32>,
}

/// Parse a JSON document conforming to the input schema. Ids are resolved
/// (duplicates and dangling references are rejected) but no semantic
/// validation happens here; run [`VeeringComplex::validate`] for that.
pub fn parse_complex(document: &str) -> Result<VeeringComplex, ParseError> {
    let raw: RawDoc = serde_json::from_str(document).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let vertices = raw
        .vertices
        .into_iter()
        .map(|v| Vertex {
            id: VertexId(v.id),
            color: v.color,
        })
        .collect();
    let edges = raw
        .edges
        .into_iter()
        .map(|e| Edge {
            id: EdgeId(e.id),
            from: VertexId(e.from),
            to: VertexId(e.to),
        })
        .collect();
    let smoothings = raw
        .smoothings
        .into_iter()
        .map(|s| Smoothing {
            vertex: VertexId(s.vertex),
            pairs: [
                (EdgeId(s.pairs[0][0]), EdgeId(s.pairs[0][1])),
                (EdgeId(s.pairs[1][0]), EdgeId(s.pairs[1][1])),
            ],
        })
        .collect();
    let sectors = raw
        .sectors
        .into_iter()
        .map(|s| Sector {
            id: SectorId(s.id),
            bottom: VertexId(s.bottom),
            top: VertexId(s.top),
            left_bottom: EdgeId(s.left_bottom),
            right_bottom: EdgeId(s.right_bottom),
            left_top: s.left_top.into_iter().map(EdgeId).collect(),
            right_top: s.right_top.into_iter().map(EdgeId).collect(),
        })
        .collect();
    let cocycle = match raw.fiber_cocycle {
        None => None,
        Some(map) => {
            let mut out = BTreeMap::new();
            for (k, v) in map {
                let id: u32 = k
                    .parse()
                    .map_err(|_| ParseError::CocycleKey { key: k.clone() })?;
                out.insert(EdgeId(id), v);
            }
            Some(out)
        }
    };

    VeeringComplex::from_parts(raw.name, vertices, edges, smoothings, sectors, cocycle)
}

impl VeeringComplex {
    /// Build a complex from resolved parts, checking id uniqueness and
    /// reference integrity, and putting everything in canonical (id) order.
    pub fn from_parts(
        name: String,
        mut vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
        mut smoothings: Vec<Smoothing>,
        mut sectors: Vec<Sector>,
        fiber_cocycle: Option<BTreeMap<EdgeId, u64>>,
    ) -> Result<Self, ParseError> {
        vertices.sort_by_key(|v| v.id);
        edges.sort_by_key(|e| e.id);
        sectors.sort_by_key(|s| s.id);
        smoothings.sort_by_key(|s| s.vertex);
        for s in &mut smoothings {
            s.pairs.sort_by_key(|p| p.0);
        }

        let mut vertex_pos = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_pos.insert(v.id, i).is_some() {
                return Err(ParseError::DuplicateId {
                    kind: "vertex",
                    id: v.id.0,
                });
            }
        }
        let mut edge_pos = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if edge_pos.insert(e.id, i).is_some() {
                return Err(ParseError::DuplicateId {
                    kind: "edge",
                    id: e.id.0,
                });
            }
        }
        let mut sector_pos = BTreeMap::new();
        for (i, s) in sectors.iter().enumerate() {
            if sector_pos.insert(s.id, i).is_some() {
                return Err(ParseError::DuplicateId {
                    kind: "sector",
                    id: s.id.0,
                });
            }
        }

        let vref = |id: VertexId, referrer: String| -> Result<(), ParseError> {
            if vertex_pos.contains_key(&id) {
                Ok(())
            } else {
                Err(ParseError::DanglingRef {
                    kind: "vertex",
                    id: id.0,
                    referrer,
                })
            }
        };
        let eref = |id: EdgeId, referrer: String| -> Result<(), ParseError> {
            if edge_pos.contains_key(&id) {
                Ok(())
            } else {
                Err(ParseError::DanglingRef {
                    kind: "edge",
                    id: id.0,
                    referrer,
                })
            }
        };

        for e in &edges {
            vref(e.from, format!("edge {}", e.id))?;
            vref(e.to, format!("edge {}", e.id))?;
        }
        let mut seen_smoothing = BTreeSet::new();
        for s in &smoothings {
            vref(s.vertex, format!("smoothing at {}", s.vertex))?;
            if !seen_smoothing.insert(s.vertex) {
                return Err(ParseError::DuplicateId {
                    kind: "smoothing vertex",
                    id: s.vertex.0,
                });
            }
            for (a, b) in &s.pairs {
                eref(*a, format!("smoothing at {}", s.vertex))?;
                eref(*b, format!("smoothing at {}", s.vertex))?;
            }
        }
        for s in &sectors {
            let r = format!("sector {}", s.id);
            vref(s.bottom, r.clone())?;
            vref(s.top, r.clone())?;
            eref(s.left_bottom, r.clone())?;
            eref(s.right_bottom, r.clone())?;
            for e in s.left_top.iter().chain(&s.right_top) {
                eref(*e, r.clone())?;
            }
        }
        if let Some(c) = &fiber_cocycle {
            for id in c.keys() {
                eref(*id, "fiber_cocycle".to_string())?;
            }
        }

        let mut out_edges = vec![Vec::new(); vertices.len()];
        let mut in_edges = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[vertex_pos[&e.from]].push(i);
            in_edges[vertex_pos[&e.to]].push(i);
        }

        let fiber_cocycle = fiber_cocycle.map(|map| {
            edges
                .iter()
                .map(|e| map.get(&e.id).copied().unwrap_or(0))
                .collect()
        });

        Ok(VeeringComplex {
            name,
            vertices,
            edges,
            smoothings,
            sectors,
            fiber_cocycle,
            vertex_pos,
            edge_pos,
            sector_pos,
            out_edges,
            in_edges,
        })
    }

    pub fn vertex_position(&self, id: VertexId) -> usize {
        self.vertex_pos[&id]
    }
    pub fn edge_position(&self, id: EdgeId) -> usize {
        self.edge_pos[&id]
    }
    pub fn sector_position(&self, id: SectorId) -> usize {
        self.sector_pos[&id]
    }
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[self.edge_pos[&id]]
    }
    pub fn sector(&self, id: SectorId) -> &Sector {
        &self.sectors[self.sector_pos[&id]]
    }
    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[self.vertex_pos[&id]]
    }
    pub fn color(&self, id: VertexId) -> Color {
        self.vertex(id).color
    }
    /// Color of a sector: the color of its top corner.
    pub fn sector_color(&self, id: SectorId) -> Color {
        self.color(self.sector(id).top)
    }
    /// Toggle means the bottom and top corners have different colors.
    pub fn is_toggle(&self, id: SectorId) -> bool {
        let s = self.sector(id);
        self.color(s.bottom) != self.color(s.top)
    }
    pub fn out_edge_positions(&self, v: VertexId) -> &[usize] {
        &self.out_edges[self.vertex_pos[&v]]
    }
    pub fn in_edge_positions(&self, v: VertexId) -> &[usize] {
        &self.in_edges[self.vertex_pos[&v]]
    }

    /// Full boundary path of a sector on the given side: the bottom edge
    /// followed by the top chain, a directed path bottom -> top.
    pub fn boundary_path(&self, id: SectorId, side: Side) -> Vec<EdgeId> {
        let s = self.sector(id);
        let (b, chain) = match side {
            Side::Left => (s.left_bottom, &s.left_top),
            Side::Right => (s.right_bottom, &s.right_top),
        };
        let mut path = Vec::with_capacity(1 + chain.len());
        path.push(b);
        path.extend(chain.iter().copied());
        path
    }

    /// The sector charging an edge as a bottom side, with the side. Only
    /// meaningful on validated complexes (exactly one owner per edge).
    pub fn bottom_owner(&self, e: EdgeId) -> Option<(SectorId, Side)> {
        for s in &self.sectors {
            if s.left_bottom == e {
                return Some((s.id, Side::Left));
            }
            if s.right_bottom == e {
                return Some((s.id, Side::Right));
            }
        }
        None
    }

    /// Smooth successor: the outgoing edge paired with `incoming` at the
    /// head of `incoming`.
    pub fn smooth_out(&self, incoming: EdgeId) -> Option<EdgeId> {
        let v = self.edge(incoming).to;
        let sm = self.smoothings.iter().find(|s| s.vertex == v)?;
        sm.pairs
            .iter()
            .find(|(i, _)| *i == incoming)
            .map(|(_, o)| *o)
    }

    /// True if the underlying undirected multigraph is connected (vacuously
    /// true for the empty complex).
    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in self.out_edges[v].iter().chain(&self.in_edges[v]) {
                let edge = &self.edges[e];
                for w in [self.vertex_pos[&edge.from], self.vertex_pos[&edge.to]] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Run every invariant check and report per-check results. Failures are
    /// data, not errors.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();

        // valence22: every vertex has exactly 2 incoming and 2 outgoing edges.
        {
            let mut offenders = Vec::new();
            for (i, v) in self.vertices.iter().enumerate() {
                if self.out_edges[i].len() != 2 || self.in_edges[i].len() != 2 {
                    offenders.push(format!(
                        "vertex {} ({} in, {} out)",
                        v.id,
                        self.in_edges[i].len(),
                        self.out_edges[i].len()
                    ));
                }
            }
            push_check(
                &mut checks,
                "valence22",
                offenders,
                "every vertex has 2 incoming and 2 outgoing edges",
            );
        }

        // smoothing_cover: per vertex, the two pairs cover each incident
        // edge-end exactly once, incoming ends paired with outgoing ends.
        {
            let mut offenders = Vec::new();
            let mut covered: BTreeSet<VertexId> = BTreeSet::new();
            for sm in &self.smoothings {
                covered.insert(sm.vertex);
                let mut in_ends: Vec<EdgeId> = Vec::new();
                let mut out_ends: Vec<EdgeId> = Vec::new();
                for &(i, o) in &sm.pairs {
                    in_ends.push(i);
                    out_ends.push(o);
                    if self.edge_pos.contains_key(&i) && self.edge(i).to != sm.vertex {
                        offenders.push(format!(
                            "vertex {}: edge {} is not incoming there",
                            sm.vertex, i
                        ));
                    }
                    if self.edge_pos.contains_key(&o) && self.edge(o).from != sm.vertex {
                        offenders.push(format!(
                            "vertex {}: edge {} is not outgoing there",
                            sm.vertex, o
                        ));
                    }
                }
                in_ends.sort();
                out_ends.sort();
                let mut want_in: Vec<EdgeId> = self
                    .in_edge_positions(sm.vertex)
                    .iter()
                    .map(|&p| self.edges[p].id)
                    .collect();
                let mut want_out: Vec<EdgeId> = self
                    .out_edge_positions(sm.vertex)
                    .iter()
                    .map(|&p| self.edges[p].id)
                    .collect();
                want_in.sort();
                want_out.sort();
                if in_ends != want_in || out_ends != want_out {
                    offenders.push(format!(
                        "vertex {}: smoothing pairs do not cover the incident edge-ends exactly once",
                        sm.vertex
                    ));
                }
            }
            for v in &self.vertices {
                if !covered.contains(&v.id) {
                    offenders.push(format!("vertex {}: no smoothing given", v.id));
                }
            }
            push_check(
                &mut checks,
                "smoothing_cover",
                offenders,
                "smoothing pairs cover each incident edge-end exactly once",
            );
        }

        // sector_paths: bottom edges start at the bottom vertex; top chains
        // are nonempty directed paths from the bottom-edge head to the top.
        {
            let mut offenders = Vec::new();
            for s in &self.sectors {
                for side in [Side::Left, Side::Right] {
                    let (b, chain) = match side {
                        Side::Left => (s.left_bottom, &s.left_top),
                        Side::Right => (s.right_bottom, &s.right_top),
                    };
                    if self.edge(b).from != s.bottom {
                        offenders.push(format!(
                            "sector {}: {side} bottom edge {b} does not start at the bottom vertex",
                            s.id
                        ));
                        continue;
                    }
                    if chain.is_empty() {
                        offenders.push(format!("sector {}: {side} top chain is empty", s.id));
                        continue;
                    }
                    let mut at = self.edge(b).to;
                    let mut ok = true;
                    for &e in chain {
                        if self.edge(e).from != at {
                            ok = false;
                            break;
                        }
                        at = self.edge(e).to;
                    }
                    if !ok {
                        offenders.push(format!(
                            "sector {}: {side} top chain is not a directed path",
                            s.id
                        ));
                    } else if at != s.top {
                        offenders.push(format!(
                            "sector {}: {side} boundary path ends at {at}, not the top vertex {}",
                            s.id, s.top
                        ));
                    }
                }
            }
            push_check(
                &mut checks,
                "sector_paths",
                offenders,
                "sector boundary paths are directed bottom-to-top paths",
            );
        }

        // edge_incidence: each edge appears exactly once as a bottom side and
        // exactly twice inside top chains, counted over all sectors.
        {
            let mut bottoms = vec![0usize; self.edges.len()];
            let mut tops = vec![0usize; self.edges.len()];
            for s in &self.sectors {
                bottoms[self.edge_pos[&s.left_bottom]] += 1;
                bottoms[self.edge_pos[&s.right_bottom]] += 1;
                for e in s.left_top.iter().chain(&s.right_top) {
                    tops[self.edge_pos[e]] += 1;
                }
            }
            let mut offenders = Vec::new();
            for (i, e) in self.edges.iter().enumerate() {
                if bottoms[i] != 1 {
                    offenders.push(format!(
                        "edge {}: {} bottom-side occurrences (want 1)",
                        e.id, bottoms[i]
                    ));
                }
                if tops[i] != 2 {
                    offenders.push(format!(
                        "edge {}: {} top-chain occurrences (want 2)",
                        e.id, tops[i]
                    ));
                }
            }
            push_check(
                &mut checks,
                "edge_incidence",
                offenders,
                "each edge is a bottom side once and lies in top chains twice",
            );
        }

        // bottom_bijection / top_bijection.
        for (check, pick) in [("bottom_bijection", true), ("top_bijection", false)] {
            let mut seen: BTreeMap<VertexId, SectorId> = BTreeMap::new();
            let mut offenders = Vec::new();
            for s in &self.sectors {
                let v = if pick { s.bottom } else { s.top };
                if let Some(prev) = seen.insert(v, s.id) {
                    offenders.push(format!(
                        "vertex {v} is the {} corner of sectors {prev} and {}",
                        if pick { "bottom" } else { "top" },
                        s.id
                    ));
                }
            }
            if self.sectors.len() != self.vertices.len() {
                offenders.push(format!(
                    "{} sectors vs {} vertices",
                    self.sectors.len(),
                    self.vertices.len()
                ));
            } else {
                for v in &self.vertices {
                    if !seen.contains_key(&v.id) {
                        offenders.push(format!(
                            "vertex {} is not a {} corner of any sector",
                            v.id,
                            if pick { "bottom" } else { "top" }
                        ));
                    }
                }
            }
            push_check(
                &mut checks,
                check,
                offenders,
                "the corner map sectors -> vertices is a bijection",
            );
        }

        // side_colors: the side corners of a sector carry the sector's color.
        {
            let mut offenders = Vec::new();
            for s in &self.sectors {
                let want = self.color(s.top);
                for (side, b) in [(Side::Left, s.left_bottom), (Side::Right, s.right_bottom)] {
                    let corner = self.edge(b).to;
                    if self.color(corner) != want {
                        offenders.push(format!(
                            "sector {}: {side} corner {corner} is {}, sector is {want}",
                            s.id,
                            self.color(corner)
                        ));
                    }
                }
            }
            push_check(
                &mut checks,
                "side_colors",
                offenders,
                "side corners have the sector's color",
            );
        }

        // chain_rule: along each top side with edges e1..ed, the sector with
        // bottom side e1 (and ed) is toggle when d >= 2, the middle ones are
        // fan of the opposite color; for d = 1 it is a fan of the same color.
        {
            let mut offenders = Vec::new();
            // Only meaningful when bottom owners are unique; guarded by
            // edge_incidence above, we take the first owner found.
            let mut owner: BTreeMap<EdgeId, SectorId> = BTreeMap::new();
            for s in &self.sectors {
                owner.entry(s.left_bottom).or_insert(s.id);
                owner.entry(s.right_bottom).or_insert(s.id);
            }
            for s in &self.sectors {
                let color = self.color(s.top);
                for (side, chain) in [(Side::Left, &s.left_top), (Side::Right, &s.right_top)] {
                    let d = chain.len();
                    for (k, &e) in chain.iter().enumerate() {
                        let Some(&owner) = owner.get(&e) else {
                            offenders.push(format!(
                                "sector {} {side} chain: edge {e} has no bottom owner",
                                s.id
                            ));
                            continue;
                        };
                        let toggle = self.is_toggle(owner);
                        let oc = self.sector_color(owner);
                        let end = k == 0 || k == d - 1;
                        if d == 1 {
                            if toggle || oc != color {
                                offenders.push(format!(
                                    "sector {} {side} chain (d=1): sector {owner} must be a {color} fan",
                                    s.id
                                ));
                            }
                        } else if end {
                            if !toggle {
                                offenders.push(format!(
                                    "sector {} {side} chain: end sector {owner} must be toggle",
                                    s.id
                                ));
                            }
                        } else if toggle || oc != color.opposite() {
                            offenders.push(format!(
                                "sector {} {side} chain: middle sector {owner} must be a {} fan",
                                s.id,
                                color.opposite()
                            ));
                        }
                    }
                }
            }
            push_check(
                &mut checks,
                "chain_rule",
                offenders,
                "top-side chains follow the toggle/fan color rule",
            );
        }

        ValidationReport { checks }
    }

    /// Canonical JSON serialization: fixed key order, arrays sorted by id,
    /// byte-identical across runs.
    pub fn serialize(&self) -> String {
        let mut root = serde_json::Map::new();
        root.insert("name".into(), self.name.clone().into());
        root.insert(
            "vertices".into(),
            self.vertices
                .iter()
                .map(|v| {
                    let mut m = serde_json::Map::new();
                    m.insert("id".into(), v.id.0.into());
                    m.insert("color".into(), v.color.to_string().into());
                    serde_json::Value::Object(m)
                })
                .collect(),
        );
        root.insert(
            "edges".into(),
            self.edges
                .iter()
                .map(|e| {
                    let mut m = serde_json::Map::new();
                    m.insert("id".into(), e.id.0.into());
                    m.insert("from".into(), e.from.0.into());
                    m.insert("to".into(), e.to.0.into());
                    serde_json::Value::Object(m)
                })
                .collect(),
        );
        root.insert(
            "smoothings".into(),
            self.smoothings
                .iter()
                .map(|s| {
                    let mut m = serde_json::Map::new();
                    m.insert("vertex".into(), s.vertex.0.into());
                    m.insert(
                        "pairs".into(),
                        s.pairs
                            .iter()
                            .map(|(a, b)| serde_json::json!([a.0, b.0]))
                            .collect(),
                    );
                    serde_json::Value::Object(m)
                })
                .collect(),
        );
        root.insert(
            "sectors".into(),
            self.sectors
                .iter()
                .map(|s| {
                    let mut m = serde_json::Map::new();
                    m.insert("id".into(), s.id.0.into());
                    m.insert("bottom".into(), s.bottom.0.into());
                    m.insert("top".into(), s.top.0.into());
                    m.insert("left_bottom".into(), s.left_bottom.0.into());
                    m.insert("right_bottom".into(), s.right_bottom.0.into());
                    m.insert(
                        "left_top".into(),
                        s.left_top.iter().map(|e| e.0).collect::<Vec<_>>().into(),
                    );
                    m.insert(
                        "right_top".into(),
                        s.right_top.iter().map(|e| e.0).collect::<Vec<_>>().into(),
                    );
                    serde_json::Value::Object(m)
                })
                .collect(),
        );
        if let Some(c) = &self.fiber_cocycle {
            let mut m = serde_json::Map::new();
            for (e, w) in self.edges.iter().zip(c) {
                m.insert(e.id.0.to_string(), (*w).into());
            }
            root.insert("fiber_cocycle".into(), serde_json::Value::Object(m));
        }
        let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(root)).unwrap();
        s.push('\n');
        s
    }

    /// Maximal smooth cycles of the branch locus. Every edge lies on exactly
    /// one returned loop; loops are returned sorted.
    pub fn branch_loops(&self) -> Vec<Vec<EdgeId>> {
        let mut succ: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
        for sm in &self.smoothings {
            for &(i, o) in &sm.pairs {
                succ.insert(i, o);
            }
        }
        let mut visited: BTreeSet<EdgeId> = BTreeSet::new();
        let mut loops = Vec::new();
        for e in &self.edges {
            if visited.contains(&e.id) {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = e.id;
            loop {
                cycle.push(cur);
                visited.insert(cur);
                cur = match succ.get(&cur) {
                    Some(n) => *n,
                    None => break,
                };
                if cur == e.id {
                    break;
                }
            }
            loops.push(least_rotation(&cycle));
        }
        loops.sort();
        loops
    }

    /// Finite cyclic cover of order `n` twisted by `weights` (residues mod
    /// n, by edge position). Sectors lift by accumulating weights along
    /// their boundary paths; the weight sums over the left and right paths
    /// must agree mod n for every sector.
    pub fn cyclic_cover(&self, n: u64, weights: &[u64]) -> Result<VeeringComplex, CoverError> {
        if n < 2 {
            return Err(CoverError::BadModulus(n));
        }
        assert_eq!(weights.len(), self.edges.len());
        let w = |e: EdgeId| weights[self.edge_pos[&e]] % n;

        for s in &self.sectors {
            let sum = |side: Side| -> u64 {
                self.boundary_path(s.id, side)
                    .iter()
                    .map(|&e| w(e))
                    .sum::<u64>()
                    % n
            };
            let (l, r) = (sum(Side::Left), sum(Side::Right));
            if l != r {
                return Err(CoverError::SectorLift {
                    sector: s.id,
                    n,
                    left: l,
                    right: r,
                });
            }
        }

        let lift_v = |v: VertexId, k: u64| -> Result<VertexId, CoverError> {
            let id = (v.0 as u64)
                .checked_mul(n)
                .and_then(|x| x.checked_add(k))
                .ok_or(CoverError::IdOverflow)?;
            u32::try_from(id)
                .map(VertexId)
                .map_err(|_| CoverError::IdOverflow)
        };
        let lift_e = |e: EdgeId, k: u64| -> Result<EdgeId, CoverError> {
            let id = (e.0 as u64)
                .checked_mul(n)
                .and_then(|x| x.checked_add(k))
                .ok_or(CoverError::IdOverflow)?;
            u32::try_from(id)
                .map(EdgeId)
                .map_err(|_| CoverError::IdOverflow)
        };
        let lift_s = |s: SectorId, k: u64| -> Result<SectorId, CoverError> {
            let id = (s.0 as u64)
                .checked_mul(n)
                .and_then(|x| x.checked_add(k))
                .ok_or(CoverError::IdOverflow)?;
            u32::try_from(id)
                .map(SectorId)
                .map_err(|_| CoverError::IdOverflow)
        };

        let mut vertices = Vec::new();
        for v in &self.vertices {
            for k in 0..n {
                vertices.push(Vertex {
                    id: lift_v(v.id, k)?,
                    color: v.color,
                });
            }
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            for k in 0..n {
                edges.push(Edge {
                    id: lift_e(e.id, k)?,
                    from: lift_v(e.from, k)?,
                    to: lift_v(e.to, (k + w(e.id)) % n)?,
                });
            }
        }
        let mut smoothings = Vec::new();
        for sm in &self.smoothings {
            for k in 0..n {
                // Incoming edge (i, j) arrives at level k when j + w(i) = k.
                let mut pairs = Vec::new();
                for &(i, o) in &sm.pairs {
                    let j = (k + n - w(i)) % n;
                    pairs.push((lift_e(i, j)?, lift_e(o, k)?));
                }
                smoothings.push(Smoothing {
                    vertex: lift_v(sm.vertex, k)?,
                    pairs: [pairs[0], pairs[1]],
                });
            }
        }
        let mut sectors = Vec::new();
        for s in &self.sectors {
            for k in 0..n {
                let lift_chain =
                    |b: EdgeId,
                     chain: &[EdgeId]|
                     -> Result<(EdgeId, Vec<EdgeId>, u64), CoverError> {
                        let mut level = k;
                        let lb = lift_e(b, level)?;
                        level = (level + w(b)) % n;
                        let mut lifted = Vec::with_capacity(chain.len());
                        for &e in chain {
                            lifted.push(lift_e(e, level)?);
                            level = (level + w(e)) % n;
                        }
                        Ok((lb, lifted, level))
                    };
                let (lb, lt, ll) = lift_chain(s.left_bottom, &s.left_top)?;
                let (rb, rt, rl) = lift_chain(s.right_bottom, &s.right_top)?;
                debug_assert_eq!(ll, rl);
                sectors.push(Sector {
                    id: lift_s(s.id, k)?,
                    bottom: lift_v(s.bottom, k)?,
                    top: lift_v(s.top, ll)?,
                    left_bottom: lb,
                    right_bottom: rb,
                    left_top: lt,
                    right_top: rt,
                });
            }
        }

        // Lift the fiber cocycle when the chosen weights are its residues:
        // the lifted value counts crossings of the fundamental-domain seam.
        let cocycle = match &self.fiber_cocycle {
            Some(f)
                if self
                    .edges
                    .iter()
                    .enumerate()
                    .all(|(i, e)| f[i] % n == w(e.id)) =>
            {
                let mut map = BTreeMap::new();
                for (i, e) in self.edges.iter().enumerate() {
                    for k in 0..n {
                        map.insert(lift_e(e.id, k)?, (k + f[i]) / n);
                    }
                }
                Some(map)
            }
            _ => None,
        };

        let name = format!("{}-cover{}", self.name, n);
        let cover = VeeringComplex::from_parts(name, vertices, edges, smoothings, sectors, cocycle)
            .map_err(|e| CoverError::Invalid(e.to_string()))?;
        if !cover.is_connected() {
            return Err(CoverError::Disconnected);
        }
        let report = cover.validate();
        if !report.passed() {
            let msg = report
                .failures()
                .map(|c| c.id.clone())
                .collect::<Vec<_>>()
                .join(", ");
            return Err(CoverError::Invalid(msg));
        }
        Ok(cover)
    }
}

fn push_check(checks: &mut Vec<CheckResult>, id: &str, offenders: Vec<String>, message: &str) {
    checks.push(CheckResult {
        id: id.to_string(),
        pass: offenders.is_empty(),
        offenders,
        message: message.to_string(),
    });
}

/// Lexicographically least rotation of a cyclic id sequence.
pub(crate) fn least_rotation<T: Ord + Copy>(xs: &[T]) -> Vec<T> {
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0usize;
    for r in 1..n {
        for i in 0..n {
            let a = xs[(r + i) % n];
            let b = xs[(best + i) % n];
            if a < b {
                best = r;
                break;
            }
            if a > b {
                break;
            }
        }
    }
    (0..n).map(|i| xs[(best + i) % n]).collect()
}
