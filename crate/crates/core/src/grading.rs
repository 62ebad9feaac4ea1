//! Homology gradings.
//!
//! Cycle vectors live in the cycle lattice of the dual graph; the first
//! homology of the ambient manifold is the quotient by the integer span of
//! the sector boundary classes (left boundary path minus right boundary
//! path). Cosets are canonicalized exactly by reducing against a Hermite
//! basis of that span expressed in the fundamental-cycle coordinates of a
//! spanning forest, so torsion comes out exactly.

use crate::model::{Side, VeeringComplex};
use crate::states::{GEdge, HeegaardState, MultiLoop};
use crate::sweep::strum;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GradingError {
    #[error("multi-loop contains diagonal edges")]
    DiagonalsPresent,
    #[error("vector is not boundary-zero at vertex position {0}")]
    NotACycle(usize),
    #[error("state {state} has resolutions in different classes; the lift invariant fails")]
    LiftInvariant { state: usize },
}

/// Integer edge-multiplicity vector, indexed by edge position. Boundary
/// zero at every vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleVector(pub Vec<i64>);

/// Canonical coset representative in the quotient of the cycle lattice by
/// the sector-boundary span, expressed in fundamental-cycle coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct H1MClass(pub Vec<i64>);

/// Edge-multiplicity vector of a multi-loop without diagonals.
pub fn cycle_vector(cx: &VeeringComplex, m: &MultiLoop) -> Result<CycleVector, GradingError> {
    let mut v = vec![0i64; cx.edges.len()];
    for l in m.loops() {
        for &e in l.edges() {
            match e {
                GEdge::Graph(id) => v[cx.edge_position(id)] += 1,
                GEdge::Diag(_) => return Err(GradingError::DiagonalsPresent),
            }
        }
    }
    debug_assert!(is_boundary_zero(cx, &v));
    Ok(CycleVector(v))
}

fn is_boundary_zero(cx: &VeeringComplex, v: &[i64]) -> bool {
    cx.vertices.iter().all(|vx| {
        let inflow: i64 = cx.in_edge_positions(vx.id).iter().map(|&p| v[p]).sum();
        let outflow: i64 = cx.out_edge_positions(vx.id).iter().map(|&p| v[p]).sum();
        inflow == outflow
    })
}

/// Fundamental-cycle coordinates over a spanning forest, plus the Hermite
/// basis of the sector-boundary lattice. Build once per complex.
#[derive(Debug, Clone)]
pub struct H1Context {
    /// Edge positions not in the forest, in id order; these index the
    /// fundamental-cycle coordinates.
    nontree: Vec<usize>,
    /// Echelon basis of the sector-boundary lattice: (pivot row, column).
    hnf: Vec<(usize, Vec<i64>)>,
}

impl H1Context {
    pub fn new(cx: &VeeringComplex) -> H1Context {
        // Spanning forest by BFS over the underlying undirected multigraph,
        // roots and frontier explored in id order.
        let nv = cx.vertices.len();
        let ne = cx.edges.len();
        let mut in_tree = vec![false; ne];
        let mut seen = vec![false; nv];
        for root in 0..nv {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                let vid = cx.vertices[v].id;
                let mut incident: Vec<usize> = cx
                    .out_edge_positions(vid)
                    .iter()
                    .chain(cx.in_edge_positions(vid))
                    .copied()
                    .collect();
                incident.sort();
                for e in incident {
                    let edge = &cx.edges[e];
                    let other = if edge.from == vid {
                        cx.vertex_position(edge.to)
                    } else {
                        cx.vertex_position(edge.from)
                    };
                    if !seen[other] {
                        seen[other] = true;
                        in_tree[e] = true;
                        queue.push_back(other);
                    }
                }
            }
        }
        let nontree: Vec<usize> = (0..ne).filter(|&e| !in_tree[e]).collect();
        let mut ctx = H1Context {
            nontree,
            hnf: Vec::new(),
        };
        let cols: Vec<Vec<i64>> = cx
            .sectors
            .iter()
            .map(|s| {
                let mut v = vec![0i64; ne];
                for e in cx.boundary_path(s.id, Side::Left) {
                    v[cx.edge_position(e)] += 1;
                }
                for e in cx.boundary_path(s.id, Side::Right) {
                    v[cx.edge_position(e)] -= 1;
                }
                debug_assert!(is_boundary_zero(cx, &v));
                ctx.coords(&v)
            })
            .collect();
        ctx.hnf = hermite_columns(cols, ctx.nontree.len());
        ctx
    }

    pub fn rank(&self) -> usize {
        self.nontree.len()
    }

    /// Coordinates of a boundary-zero vector over the fundamental cycles:
    /// its values on the non-forest edges.
    pub fn coords(&self, v: &[i64]) -> Vec<i64> {
        self.nontree.iter().map(|&e| v[e]).collect()
    }

    /// Canonical coset representative modulo the sector-boundary lattice.
    pub fn reduce(&self, mut coords: Vec<i64>) -> H1MClass {
        for (row, col) in &self.hnf {
            let h = col[*row];
            let q = coords[*row].div_euclid(h);
            if q != 0 {
                for (c, x) in coords.iter_mut().zip(col) {
                    *c -= q * x;
                }
            }
        }
        H1MClass(coords)
    }
}

/// Column-style integer echelon form: returns pivoted columns spanning the
/// same lattice, pivots positive, zeros above each pivot.
fn hermite_columns(cols: Vec<Vec<i64>>, rows: usize) -> Vec<(usize, Vec<i64>)> {
    let mut work: Vec<Vec<i64>> = cols
        .into_iter()
        .filter(|c| c.iter().any(|&x| x != 0))
        .collect();
    let mut out = Vec::new();
    for row in 0..rows {
        loop {
            let mut nz: Vec<usize> = (0..work.len()).filter(|&i| work[i][row] != 0).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let mut col = work.remove(nz[0]);
                if col[row] < 0 {
                    for x in &mut col {
                        *x = -*x;
                    }
                }
                out.push((row, col));
                break;
            }
            // Reduce the larger entry by the smaller one.
            nz.sort_by_key(|&i| work[i][row].unsigned_abs());
            let (a, b) = (nz[0], nz[1]);
            let q = work[b][row].div_euclid(work[a][row]);
            let source = work[a].clone();
            for (x, s) in work[b].iter_mut().zip(&source) {
                *x -= q * s;
            }
            work.retain(|c| c.iter().any(|&x| x != 0));
        }
    }
    out
}

/// All full resolutions of a multi-loop: every diagonal occurrence is
/// independently strummed left or right, deduplicated after normalization.
pub fn strum_resolutions(cx: &VeeringComplex, m: &MultiLoop) -> BTreeSet<MultiLoop> {
    let mut done = BTreeSet::new();
    let mut pending = vec![m.clone()];
    while let Some(cur) = pending.pop() {
        match cur.diagonal_sites().first() {
            None => {
                done.insert(cur);
            }
            Some(&site) => {
                for side in [Side::Left, Side::Right] {
                    pending.push(strum(cx, &cur, site, side).expect("site is a diagonal"));
                }
            }
        }
    }
    done
}

/// The multi-valued lift of the epsilon map: homology classes of all full
/// resolutions of the state's multi-loop.
pub fn epsilon_tilde(cx: &VeeringComplex, m: &MultiLoop) -> BTreeSet<CycleVector> {
    strum_resolutions(cx, m)
        .iter()
        .map(|r| cycle_vector(cx, r).expect("resolutions carry no diagonals"))
        .collect()
}

/// [`epsilon_tilde`] evaluated on a state directly.
pub fn epsilon_tilde_state(
    cx: &VeeringComplex,
    state: &HeegaardState,
) -> Result<BTreeSet<CycleVector>, crate::states::StateError> {
    Ok(epsilon_tilde(
        cx,
        &crate::states::state_multiloop(cx, state)?,
    ))
}

/// Canonical class of a boundary-zero vector in the quotient lattice.
pub fn h1m_class(ctx: &H1Context, v: &CycleVector) -> H1MClass {
    ctx.reduce(ctx.coords(&v.0))
}

/// One block of a grading partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradingBlock {
    /// Indices into the canonical state enumeration.
    pub states: Vec<usize>,
    /// Common class in the quotient lattice.
    pub class: H1MClass,
    pub contains_top: bool,
    pub contains_bot: bool,
}

/// Partition of the state set, blocks ordered by smallest member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradingPartition {
    pub blocks: Vec<GradingBlock>,
}

impl GradingPartition {
    pub fn block_of(&self, state: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.states.contains(&state))
            .expect("blocks partition the state set")
    }
}

/// Per-state grading data shared by both partitions.
pub struct StateGradings {
    pub states: Vec<HeegaardState>,
    pub multiloops: Vec<MultiLoop>,
    pub epsilon: Vec<BTreeSet<CycleVector>>,
    pub classes: Vec<H1MClass>,
    pub ctx: H1Context,
}

/// Compute multi-loops, epsilon-tilde sets and classes for every state.
/// Fails if some state's resolutions land in different classes.
pub fn state_gradings(
    cx: &VeeringComplex,
    states: Vec<HeegaardState>,
) -> Result<StateGradings, GradingError> {
    use rayon::prelude::*;
    let ctx = H1Context::new(cx);
    let multiloops: Vec<MultiLoop> = states
        .iter()
        .map(|s| crate::states::state_multiloop(cx, s).expect("enumerated states are valid"))
        .collect();
    let epsilon: Vec<BTreeSet<CycleVector>> = multiloops
        .par_iter()
        .map(|m| epsilon_tilde(cx, m))
        .collect();
    let mut classes = Vec::with_capacity(states.len());
    for (i, eps) in epsilon.iter().enumerate() {
        let mut it = eps.iter().map(|v| h1m_class(&ctx, v));
        let first = it.next().expect("epsilon-tilde sets are nonempty");
        if it.any(|c| c != first) {
            return Err(GradingError::LiftInvariant { state: i });
        }
        classes.push(first);
    }
    Ok(StateGradings {
        states,
        multiloops,
        epsilon,
        classes,
        ctx,
    })
}

fn blocks_from_groups(g: &StateGradings, groups: Vec<Vec<usize>>) -> GradingPartition {
    let n = g.states.len();
    let top = g
        .states
        .iter()
        .position(|s| s.slots.iter().all(|&x| x == crate::states::CornerSlot::Top));
    let bot = g.states.iter().position(|s| {
        s.slots
            .iter()
            .all(|&x| x == crate::states::CornerSlot::Bottom)
    });
    let mut blocks: Vec<GradingBlock> = groups
        .into_iter()
        .map(|mut states| {
            states.sort();
            GradingBlock {
                class: g.classes[states[0]].clone(),
                contains_top: top.is_some_and(|t| states.contains(&t)),
                contains_bot: bot.is_some_and(|b| states.contains(&b)),
                states,
            }
        })
        .collect();
    blocks.sort_by_key(|b| b.states[0]);
    debug_assert_eq!(blocks.iter().map(|b| b.states.len()).sum::<usize>(), n);
    GradingPartition { blocks }
}

/// Fibers of the class map: the spin^c partition.
pub fn spinc_partition(g: &StateGradings) -> GradingPartition {
    let mut by_class: BTreeMap<&H1MClass, Vec<usize>> = BTreeMap::new();
    for (i, c) in g.classes.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    blocks_from_groups(g, by_class.into_values().collect())
}

/// Connected components of the graph on states with an edge whenever their
/// epsilon-tilde sets intersect: the refined partition.
pub fn s_tilde_partition(g: &StateGradings) -> GradingPartition {
    let n = g.states.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for i in 0..n {
        for j in i + 1..n {
            if intersects(&g.epsilon[i], &g.epsilon[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    blocks_from_groups(g, groups.into_values().collect())
}

fn intersects(a: &BTreeSet<CycleVector>, b: &BTreeSet<CycleVector>) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().any(|x| large.contains(x))
}
