//! Topology, power counting and divergence analysis for electron-photon
//! Feynman diagrams in which every vertex joins two electron lines and one
//! photon line, exactly one of them external.
//!
//! * [`diagram`]: colored multigraph model and the vertex condition.
//! * [`topology`]: components, bridges, loop count and the invariant summary.
//! * [`counting`]: direct/inverse recovery of line counts, the power counter
//!   and divergence classification.
//! * [`enumeration`]: brute-force generation and canonical certificates.
//! * [`integral`]: numerical checks of the one-loop cutoff integral.
//! * [`dsl`]: text format and JSON summary documents.

pub mod counting;
pub mod diagram;
pub mod dsl;
pub mod enumeration;
pub mod integral;
pub mod topology;

pub use counting::{
    classify_divergence, power_counter, power_counter_external, rational_profile, solve_direct,
    solve_inverse, CountingError, DivergenceClass, DivergenceReport, ExternalData, InternalData,
    Recovered,
};
pub use diagram::{
    build_diagram, check_main_condition, contact_points, Diagram, DiagramError, Direction,
    ExternalLeg, InternalLine, LineId, ParticleKind, ValidationReport, VertexId,
};
pub use enumeration::{canonical_form, enumerate, CanonicalForm, EnumerationRequest};
pub use topology::{connected_components, is_irreducible, loop_count, summarize, TopologySummary};
