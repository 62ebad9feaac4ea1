//! Combinatorics of veering branched surfaces.
//!
//! A veering branched surface is presented here purely by its dual-graph
//! data: a (2,2)-valent directed multigraph with colored vertices, a
//! smoothing (pairing of edge-ends) at every vertex, and a list of diamond
//! sectors. On top of that presentation the library computes
//!
//! * Heegaard states and the bijection with embedded multi-loops of the
//!   augmented graph ([`states`]),
//! * strum resolutions, the multi-valued lift of the epsilon map, and the
//!   spin^c and refined gradings ([`grading`]),
//! * sweep-equivalence closures, sleekness, vertex resolutions and
//!   branch-loop bipartitions ([`sweep`]),
//! * dynamic regions, cores and the combinatorial chain complexes attached
//!   to sweep classes ([`dynamic`]),
//! * exact linear algebra over F2 and the top-level reports ([`homology`]).
//!
//! All computations are exact and deterministic: identifiers are opaque
//! non-negative integers, and every ordering used for output is numeric id
//! order.

pub mod datasets;
pub mod dynamic;
pub mod grading;
pub mod homology;
pub mod model;
pub mod states;
pub mod sweep;

pub use model::{
    Color, Edge, EdgeId, ParseError, Sector, SectorId, ValidationReport, VeeringComplex, Vertex,
    VertexId,
};
pub use states::{CornerSlot, GEdge, HeegaardState, Loop, MultiLoop};
