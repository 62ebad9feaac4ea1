//! Exact linear algebra over the two-element field and top-level reports.

use crate::dynamic::{cc_multiloop_complex, ChainComplexF2};
use crate::grading::{
    s_tilde_partition, spinc_partition, state_gradings, GradingError, GradingPartition,
    StateGradings,
};
use crate::model::{SectorId, Side, ValidationReport, VeeringComplex};
use crate::states::{enumerate_states, CornerSlot, GEdge, MultiLoop};
use crate::sweep::{sweep_class, SweepClass, SweepError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense bit matrix over the two-element field, row-major in 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl F2Matrix {
    pub fn zero(rows: usize, cols: usize) -> F2Matrix {
        let words = cols.div_ceil(64).max(1);
        F2Matrix {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols);
        self.bits[r * self.words + c / 64] ^= 1 << (c % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = F2Matrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    for w in 0..other.words {
                        out.bits[r * out.words + w] ^= other.bits[k * other.words + w];
                    }
                }
            }
        }
        out
    }

    /// Permute rows and columns simultaneously (basis reorder).
    pub fn permuted(&self, perm: &[usize]) -> F2Matrix {
        assert_eq!(perm.len(), self.rows);
        assert_eq!(self.rows, self.cols);
        let mut out = F2Matrix::zero(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(perm[r], perm[c], true);
                }
            }
        }
        out
    }
}

/// Rank over the two-element field: plain Gaussian elimination with column
/// pivoting in id order.
pub fn f2_rank(m: &F2Matrix) -> usize {
    let mut work = m.clone();
    let mut rank = 0;
    for col in 0..work.cols {
        let Some(pivot) = (rank..work.rows).find(|&r| work.get(r, col)) else {
            continue;
        };
        if pivot != rank {
            for w in 0..work.words {
                work.bits
                    .swap(pivot * work.words + w, rank * work.words + w);
            }
        }
        for r in 0..work.rows {
            if r != rank && work.get(r, col) {
                for w in 0..work.words {
                    let x = work.bits[rank * work.words + w];
                    work.bits[r * work.words + w] ^= x;
                }
            }
        }
        rank += 1;
        if rank == work.rows {
            break;
        }
    }
    rank
}

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error("boundary does not square to zero; upstream construction is wrong")]
    BoundaryNotSquareZero,
}

/// Homology dimension of a differential F2 module: generators minus twice
/// the boundary rank. Checks the square-zero identity first.
pub fn homology_dim(c: &ChainComplexF2) -> Result<usize, HomologyError> {
    if !c.d_squared_is_zero() {
        return Err(HomologyError::BoundaryNotSquareZero);
    }
    Ok(c.generators.len() - 2 * f2_rank(&c.boundary))
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("complex fails validation")]
    Validation(ValidationReport),
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(
        "fiber cocycle is inconsistent at sector {sector}: left sum {left}, right sum {right}"
    )]
    InconsistentCocycle {
        sector: SectorId,
        left: u64,
        right: u64,
    },
    #[error("no fiber cocycle available")]
    MissingCocycle,
    #[error("states of one refined block carry different pairings")]
    MixedBlockPairing,
    #[error("internal invariant broken: {0}")]
    Internal(String),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// How one refined block was resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BlockStatus {
    Sleek {
        class_size: usize,
        homology_dim: usize,
    },
    NotSleek {
        witness: MultiLoop,
    },
    /// The closure cap was exceeded before sleekness could be decided; the
    /// block is excluded from the bound.
    Unresolved {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    pub id: usize,
    pub states: Vec<usize>,
    pub spinc_class: Vec<i64>,
    pub contains_top: bool,
    pub contains_bot: bool,
    #[serde(flatten)]
    pub status: BlockStatus,
}

/// Full pipeline output: per refined block sizes, classes, sleekness,
/// homology, and the resulting lower bound on the Floer group dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SfhReport {
    pub name: String,
    pub states_total: usize,
    pub spinc_blocks: usize,
    pub blocks: Vec<BlockReport>,
    pub sleek_blocks: usize,
    pub sleek_dim_total: usize,
    /// One extra dimension when the all-top state's block is resolved and
    /// not sleek.
    pub top_bonus: bool,
    pub lower_bound: usize,
    pub unresolved_blocks: usize,
}

fn resolve_block(
    cx: &VeeringComplex,
    g: &StateGradings,
    states: &[usize],
    cap: usize,
) -> Result<BlockStatus, PipelineError> {
    // Distinct sweep classes of the block's multi-loops.
    let mut classes: Vec<SweepClass> = Vec::new();
    for &s in states {
        let m = &g.multiloops[s];
        if classes.iter().any(|c| c.contains(m)) {
            continue;
        }
        match sweep_class(cx, m, cap) {
            Ok(c) => classes.push(c),
            Err(SweepError::CapExceeded { cap, .. }) => {
                return Ok(BlockStatus::Unresolved {
                    reason: format!("closure cap {cap} exceeded"),
                })
            }
            Err(e) => return Err(PipelineError::Internal(e.to_string())),
        }
    }
    let sleek_class = classes.iter().find(|c| c.sleekness(cx).0);
    match sleek_class {
        None => {
            let witness = classes
                .iter()
                .find_map(|c| c.sleekness(cx).1.cloned())
                .expect("a non-sleek class has a witness");
            Ok(BlockStatus::NotSleek { witness })
        }
        Some(class) => {
            if classes.len() > 1 {
                return Err(PipelineError::Internal(
                    "sleek block split across several sweep classes".into(),
                ));
            }
            if class.members.len() != states.len() {
                return Err(PipelineError::Internal(format!(
                    "sleek block has {} states but its class has {} members",
                    states.len(),
                    class.members.len()
                )));
            }
            let cc = cc_multiloop_complex(cx, class)
                .map_err(|e| PipelineError::Internal(e.to_string()))?;
            let dim = homology_dim(&cc)?;
            Ok(BlockStatus::Sleek {
                class_size: class.members.len(),
                homology_dim: dim,
            })
        }
    }
}

/// Shared front of both reports: validation, states, gradings, partitions,
/// and the per-block resolution.
pub struct Pipeline {
    pub gradings: StateGradings,
    pub spinc: GradingPartition,
    pub s_tilde: GradingPartition,
    pub blocks: Vec<BlockReport>,
}

pub fn run_pipeline(cx: &VeeringComplex, cap: usize) -> Result<Pipeline, PipelineError> {
    use rayon::prelude::*;
    let report = cx.validate();
    if !report.passed() {
        return Err(PipelineError::Validation(report));
    }
    let g = state_gradings(cx, enumerate_states(cx))?;
    let spinc = spinc_partition(&g);
    let s_tilde = s_tilde_partition(&g);
    let statuses: Vec<Result<BlockStatus, PipelineError>> = s_tilde
        .blocks
        .par_iter()
        .map(|b| resolve_block(cx, &g, &b.states, cap))
        .collect();
    let mut blocks = Vec::new();
    for (i, (b, status)) in s_tilde.blocks.iter().zip(statuses).enumerate() {
        blocks.push(BlockReport {
            id: i,
            states: b.states.clone(),
            spinc_class: b.class.0.clone(),
            contains_top: b.contains_top,
            contains_bot: b.contains_bot,
            status: status?,
        });
    }
    Ok(Pipeline {
        gradings: g,
        spinc,
        s_tilde,
        blocks,
    })
}

/// Run the whole pipeline and assemble the homology lower bound:
/// the sum over sleek blocks of their homology dimensions, plus one when
/// the all-top state's block is resolved and not sleek.
pub fn sfh_report(cx: &VeeringComplex, cap: usize) -> Result<SfhReport, PipelineError> {
    let pipe = run_pipeline(cx, cap)?;
    let mut sleek_blocks = 0;
    let mut sleek_dim_total = 0;
    let mut unresolved = 0;
    let mut top_bonus = false;
    for b in &pipe.blocks {
        match &b.status {
            BlockStatus::Sleek { homology_dim, .. } => {
                sleek_blocks += 1;
                sleek_dim_total += homology_dim;
            }
            BlockStatus::NotSleek { .. } => {
                if b.contains_top {
                    top_bonus = true;
                }
            }
            BlockStatus::Unresolved { .. } => unresolved += 1,
        }
    }
    Ok(SfhReport {
        name: cx.name.clone(),
        states_total: pipe.gradings.states.len(),
        spinc_blocks: pipe.spinc.blocks.len(),
        blocks: pipe.blocks,
        sleek_blocks,
        sleek_dim_total,
        top_bonus,
        lower_bound: sleek_dim_total + usize::from(top_bonus),
        unresolved_blocks: unresolved,
    })
}

/// One pairing level of the fibered table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberedRow {
    pub n: u64,
    pub states: usize,
    pub blocks: usize,
    pub sleek_blocks: usize,
    pub sleek_dim_total: usize,
    pub unresolved_blocks: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberedReport {
    pub name: String,
    pub bot_pairing: u64,
    /// Pairing of the all-top state: the top grading.
    pub top_pairing: u64,
    pub rows: Vec<FiberedRow>,
}

/// Pairing of every state against an edge weighting that extends to
/// diagonals (equal sums over both boundary paths of every sector).
pub fn state_pairings(
    cx: &VeeringComplex,
    omega: &[u64],
    multiloops: &[MultiLoop],
) -> Result<Vec<u64>, PipelineError> {
    assert_eq!(omega.len(), cx.edges.len());
    let mut diag_value = vec![0u64; cx.sectors.len()];
    for (i, s) in cx.sectors.iter().enumerate() {
        let total = |side: Side| -> u64 {
            cx.boundary_path(s.id, side)
                .iter()
                .map(|&e| omega[cx.edge_position(e)])
                .sum()
        };
        let (l, r) = (total(Side::Left), total(Side::Right));
        if l != r {
            return Err(PipelineError::InconsistentCocycle {
                sector: s.id,
                left: l,
                right: r,
            });
        }
        diag_value[i] = l;
    }
    Ok(multiloops
        .iter()
        .map(|m| {
            m.loops()
                .iter()
                .flat_map(|l| l.edges())
                .map(|&e| match e {
                    GEdge::Graph(id) => omega[cx.edge_position(id)],
                    GEdge::Diag(s) => diag_value[cx.sector_position(s)],
                })
                .sum()
        })
        .collect())
}

/// Per-pairing table of refined blocks, sleekness and homology. The
/// pairing of each state is the weight of its multi-loop; every block
/// pairs coherently because the weighting vanishes on sector boundaries.
pub fn fibered_report(
    cx: &VeeringComplex,
    omega: &[u64],
    cap: usize,
) -> Result<FiberedReport, PipelineError> {
    let pipe = run_pipeline(cx, cap)?;
    let pairings = state_pairings(cx, omega, &pipe.gradings.multiloops)?;

    let bot = pipe
        .gradings
        .states
        .iter()
        .position(|s| s.slots.iter().all(|&x| x == CornerSlot::Bottom))
        .expect("the all-bottom state exists");
    let top = pipe
        .gradings
        .states
        .iter()
        .position(|s| s.slots.iter().all(|&x| x == CornerSlot::Top))
        .expect("the all-top state exists");
    if pairings[bot] != 0 {
        return Err(PipelineError::Internal(
            "the all-bottom state must pair to zero".into(),
        ));
    }

    let mut rows: std::collections::BTreeMap<u64, FiberedRow> = std::collections::BTreeMap::new();
    for b in &pipe.blocks {
        let n = pairings[b.states[0]];
        if b.states.iter().any(|&s| pairings[s] != n) {
            return Err(PipelineError::MixedBlockPairing);
        }
        let row = rows.entry(n).or_insert(FiberedRow {
            n,
            states: 0,
            blocks: 0,
            sleek_blocks: 0,
            sleek_dim_total: 0,
            unresolved_blocks: 0,
        });
        row.states += b.states.len();
        row.blocks += 1;
        match &b.status {
            BlockStatus::Sleek { homology_dim, .. } => {
                row.sleek_blocks += 1;
                row.sleek_dim_total += homology_dim;
            }
            BlockStatus::NotSleek { .. } => {}
            BlockStatus::Unresolved { .. } => row.unresolved_blocks += 1,
        }
    }
    Ok(FiberedReport {
        name: cx.name.clone(),
        bot_pairing: pairings[bot],
        top_pairing: pairings[top],
        rows: rows.into_values().collect(),
    })
}
