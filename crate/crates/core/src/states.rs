//! Heegaard states and multi-loops of the augmented graph.
//!
//! The augmented graph adds one diagonal edge per sector, directed from the
//! sector's bottom corner to its top corner. A Heegaard state assigns each
//! sector one of its four corner slots so that each vertex is picked exactly
//! once; states correspond bijectively to embedded multi-loops.

use crate::model::{EdgeId, SectorId, Side, VeeringComplex, VertexId};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// An edge of the augmented graph: either a graph edge or a sector diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GEdge {
    Graph(EdgeId),
    Diag(SectorId),
}

impl GEdge {
    pub fn is_diag(self) -> bool {
        matches!(self, GEdge::Diag(_))
    }
}

impl fmt::Display for GEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GEdge::Graph(e) => write!(f, "{e}"),
            GEdge::Diag(s) => write!(f, "d{s}"),
        }
    }
}

// Diagonals serialize as strings "d<sector-id>", graph edges as numbers.
impl Serialize for GEdge {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            GEdge::Graph(e) => ser.serialize_u32(e.0),
            GEdge::Diag(s) => ser.serialize_str(&format!("d{}", s.0)),
        }
    }
}

impl<'de> Deserialize<'de> for GEdge {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = GEdge;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "an edge id or a diagonal name \"d<sector-id>\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<GEdge, E> {
                u32::try_from(v)
                    .map(|id| GEdge::Graph(EdgeId(id)))
                    .map_err(|_| E::custom("edge id out of range"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<GEdge, E> {
                let rest = v
                    .strip_prefix('d')
                    .ok_or_else(|| E::custom("diagonal names look like \"d<sector-id>\""))?;
                rest.parse::<u32>()
                    .map(|id| GEdge::Diag(SectorId(id)))
                    .map_err(|_| E::custom("bad sector id in diagonal name"))
            }
        }
        de.deserialize_any(V)
    }
}

/// One cyclic edge path, stored at its lexicographically least rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Loop(Vec<GEdge>);

impl Loop {
    /// Normalize to the least rotation. The input must be nonempty.
    pub fn new(edges: Vec<GEdge>) -> Loop {
        assert!(!edges.is_empty(), "a loop has at least one edge");
        Loop(crate::model::least_rotation(&edges))
    }

    pub fn edges(&self) -> &[GEdge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn has_diagonal(&self) -> bool {
        self.0.iter().any(|e| e.is_diag())
    }
}

/// Multiset of loops, sorted. Normalization (least rotation per loop,
/// sorted loops) is the identity used for all set membership.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiLoop(Vec<Loop>);

/// Position of one edge occurrence inside a multi-loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occurrence {
    pub loop_idx: usize,
    pub pos: usize,
}

impl MultiLoop {
    pub fn empty() -> MultiLoop {
        MultiLoop(Vec::new())
    }

    pub fn new(mut loops: Vec<Loop>) -> MultiLoop {
        loops.sort();
        MultiLoop(loops)
    }

    /// Normalize raw edge sequences, returning for each original
    /// (loop, position) occurrence its position in the normalized form.
    pub(crate) fn from_raw_with_map(raw: Vec<Vec<GEdge>>) -> (MultiLoop, Vec<Vec<Occurrence>>) {
        let mut rotated: Vec<(Loop, usize, usize)> = Vec::new(); // (loop, original index, rotation)
        for (i, edges) in raw.iter().enumerate() {
            let n = edges.len();
            assert!(n > 0);
            let norm = crate::model::least_rotation(edges);
            // Recover a rotation offset that realizes the normal form.
            let mut rot = 0;
            'outer: for r in 0..n {
                for k in 0..n {
                    if edges[(r + k) % n] != norm[k] {
                        continue 'outer;
                    }
                }
                rot = r;
                break;
            }
            rotated.push((Loop(norm), i, rot));
        }
        // Stable sort by content keeps ties in original order.
        rotated.sort_by(|a, b| a.0.cmp(&b.0));
        let mut map = vec![Vec::new(); raw.len()];
        for (new_idx, (lp, orig, rot)) in rotated.iter().enumerate() {
            let n = lp.len();
            map[*orig] = (0..n)
                .map(|p| Occurrence {
                    loop_idx: new_idx,
                    pos: (p + n - rot) % n,
                })
                .collect();
        }
        (
            MultiLoop(rotated.into_iter().map(|(l, _, _)| l).collect()),
            map,
        )
    }

    pub fn loops(&self) -> &[Loop] {
        &self.0
    }

    pub fn total_len(&self) -> usize {
        self.0.iter().map(|l| l.len()).sum()
    }

    pub fn is_g_only(&self) -> bool {
        self.0.iter().all(|l| !l.has_diagonal())
    }

    /// Diagonal occurrences in canonical order.
    pub fn diagonal_sites(&self) -> Vec<Occurrence> {
        let mut out = Vec::new();
        for (i, l) in self.0.iter().enumerate() {
            for (p, e) in l.edges().iter().enumerate() {
                if e.is_diag() {
                    out.push(Occurrence {
                        loop_idx: i,
                        pos: p,
                    });
                }
            }
        }
        out
    }

    pub fn edge_at(&self, occ: Occurrence) -> GEdge {
        self.0[occ.loop_idx].edges()[occ.pos]
    }
}

/// View of the augmented graph: endpoints for both edge kinds.
#[derive(Clone, Copy)]
pub struct GPlus<'a> {
    pub complex: &'a VeeringComplex,
}

impl<'a> GPlus<'a> {
    pub fn new(complex: &'a VeeringComplex) -> Self {
        GPlus { complex }
    }

    pub fn tail(&self, e: GEdge) -> VertexId {
        match e {
            GEdge::Graph(id) => self.complex.edge(id).from,
            GEdge::Diag(id) => self.complex.sector(id).bottom,
        }
    }

    pub fn head(&self, e: GEdge) -> VertexId {
        match e {
            GEdge::Graph(id) => self.complex.edge(id).to,
            GEdge::Diag(id) => self.complex.sector(id).top,
        }
    }

    /// Check head-to-tail composition of every loop.
    pub fn is_valid(&self, m: &MultiLoop) -> bool {
        m.loops().iter().all(|l| {
            let es = l.edges();
            (0..es.len()).all(|i| self.head(es[i]) == self.tail(es[(i + 1) % es.len()]))
        })
    }

    /// Embedded means no vertex is visited twice, counting all loops and all
    /// visits.
    pub fn is_embedded(&self, m: &MultiLoop) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for l in m.loops() {
            for &e in l.edges() {
                if !seen.insert(self.tail(e)) {
                    return false;
                }
            }
        }
        true
    }
}

/// Corner slot of a sector. The declaration order fixes the enumeration
/// order of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerSlot {
    Bottom,
    Left,
    Right,
    Top,
}

pub const ALL_SLOTS: [CornerSlot; 4] = [
    CornerSlot::Bottom,
    CornerSlot::Left,
    CornerSlot::Right,
    CornerSlot::Top,
];

impl fmt::Display for CornerSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CornerSlot::Bottom => "bottom",
            CornerSlot::Left => "left",
            CornerSlot::Right => "right",
            CornerSlot::Top => "top",
        };
        write!(f, "{s}")
    }
}

/// Assignment sector -> corner slot, indexed by sector position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeegaardState {
    pub slots: Vec<CornerSlot>,
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("multi-loop is not embedded")]
    NotEmbedded,
    #[error("edge {0} is not chargeable to a unique sector as a diagonal or bottom side")]
    NotChargeable(EdgeId),
    #[error("sector {0} is charged by more than one edge")]
    SectorChargedTwice(SectorId),
    #[error("the induced vertex assignment is not a bijection")]
    NotABijection,
    #[error("chosen edges do not decompose into vertex-disjoint cycles")]
    NotAMultiLoop,
}

/// Vertex a slot lands on.
pub fn slot_vertex(cx: &VeeringComplex, sector: SectorId, slot: CornerSlot) -> VertexId {
    let s = cx.sector(sector);
    match slot {
        CornerSlot::Bottom => s.bottom,
        CornerSlot::Left => cx.edge(s.left_bottom).to,
        CornerSlot::Right => cx.edge(s.right_bottom).to,
        CornerSlot::Top => s.top,
    }
}

impl HeegaardState {
    pub fn slot(&self, cx: &VeeringComplex, sector: SectorId) -> CornerSlot {
        self.slots[cx.sector_position(sector)]
    }

    /// Vertex assigned to each sector, in sector order.
    pub fn assigned_vertices(&self, cx: &VeeringComplex) -> Vec<VertexId> {
        cx.sectors
            .iter()
            .zip(&self.slots)
            .map(|(s, &slot)| slot_vertex(cx, s.id, slot))
            .collect()
    }

    pub fn is_valid(&self, cx: &VeeringComplex) -> bool {
        if self.slots.len() != cx.sectors.len() {
            return false;
        }
        let mut seen = std::collections::BTreeSet::new();
        self.assigned_vertices(cx)
            .into_iter()
            .all(|v| seen.insert(v))
    }
}

/// Complete, duplicate-free list of Heegaard states in deterministic order:
/// backtracking over sectors in id order, slots tried bottom < left <
/// right < top.
pub fn enumerate_states(cx: &VeeringComplex) -> Vec<HeegaardState> {
    let n = cx.sectors.len();
    let mut out = Vec::new();
    let mut slots: Vec<CornerSlot> = Vec::with_capacity(n);
    let mut used = std::collections::BTreeSet::new();
    fn rec(
        cx: &VeeringComplex,
        slots: &mut Vec<CornerSlot>,
        used: &mut std::collections::BTreeSet<VertexId>,
        out: &mut Vec<HeegaardState>,
    ) {
        let k = slots.len();
        if k == cx.sectors.len() {
            out.push(HeegaardState {
                slots: slots.clone(),
            });
            return;
        }
        for slot in ALL_SLOTS {
            let v = slot_vertex(cx, cx.sectors[k].id, slot);
            if used.insert(v) {
                slots.push(slot);
                rec(cx, slots, used, out);
                slots.pop();
                used.remove(&v);
            }
        }
    }
    rec(cx, &mut slots, &mut used, &mut out);
    out
}

/// The two preferential states: all-top and all-bottom.
pub fn canonical_states(cx: &VeeringComplex) -> (HeegaardState, HeegaardState) {
    let n = cx.sectors.len();
    (
        HeegaardState {
            slots: vec![CornerSlot::Top; n],
        },
        HeegaardState {
            slots: vec![CornerSlot::Bottom; n],
        },
    )
}

/// The multi-loop of a state: per sector, bottom contributes nothing, a
/// side contributes that bottom-side edge, top contributes the diagonal.
pub fn state_multiloop(
    cx: &VeeringComplex,
    state: &HeegaardState,
) -> Result<MultiLoop, StateError> {
    let gp = GPlus::new(cx);
    let mut chosen: Vec<GEdge> = Vec::new();
    for (s, &slot) in cx.sectors.iter().zip(&state.slots) {
        match slot {
            CornerSlot::Bottom => {}
            CornerSlot::Left => chosen.push(GEdge::Graph(s.left_bottom)),
            CornerSlot::Right => chosen.push(GEdge::Graph(s.right_bottom)),
            CornerSlot::Top => chosen.push(GEdge::Diag(s.id)),
        }
    }
    // Each visited vertex carries exactly one chosen out-edge; follow them.
    let mut by_tail = std::collections::BTreeMap::new();
    for &e in &chosen {
        if by_tail.insert(gp.tail(e), e).is_some() {
            return Err(StateError::NotAMultiLoop);
        }
    }
    let mut remaining: std::collections::BTreeSet<GEdge> = chosen.iter().copied().collect();
    if remaining.len() != chosen.len() {
        return Err(StateError::NotAMultiLoop);
    }
    let mut loops = Vec::new();
    while let Some(&start) = remaining.iter().next() {
        let mut cur = start;
        let mut edges = Vec::new();
        loop {
            if !remaining.remove(&cur) {
                return Err(StateError::NotAMultiLoop);
            }
            edges.push(cur);
            let next = *by_tail
                .get(&gp.head(cur))
                .ok_or(StateError::NotAMultiLoop)?;
            if next == start {
                break;
            }
            cur = next;
        }
        loops.push(Loop::new(edges));
    }
    let m = MultiLoop::new(loops);
    debug_assert!(gp.is_embedded(&m));
    Ok(m)
}

/// Inverse of [`state_multiloop`] on embedded multi-loops whose edges are
/// diagonals or bottom sides.
pub fn multiloop_state(cx: &VeeringComplex, m: &MultiLoop) -> Result<HeegaardState, StateError> {
    let gp = GPlus::new(cx);
    if !gp.is_valid(m) {
        return Err(StateError::NotAMultiLoop);
    }
    if !gp.is_embedded(m) {
        return Err(StateError::NotEmbedded);
    }
    let mut slots = vec![CornerSlot::Bottom; cx.sectors.len()];
    let mut charged = vec![false; cx.sectors.len()];
    for l in m.loops() {
        for &e in l.edges() {
            let (sector, slot) = match e {
                GEdge::Diag(s) => (s, CornerSlot::Top),
                GEdge::Graph(id) => match cx.bottom_owner(id) {
                    Some((s, Side::Left)) => (s, CornerSlot::Left),
                    Some((s, Side::Right)) => (s, CornerSlot::Right),
                    None => return Err(StateError::NotChargeable(id)),
                },
            };
            let pos = cx.sector_position(sector);
            if charged[pos] {
                return Err(StateError::SectorChargedTwice(sector));
            }
            charged[pos] = true;
            slots[pos] = slot;
        }
    }
    let state = HeegaardState { slots };
    if !state.is_valid(cx) {
        return Err(StateError::NotABijection);
    }
    Ok(state)
}
