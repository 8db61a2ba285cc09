//! Diagram data model: vertices, undirected internal lines and directed
//! external legs, each line colored electron or photon.
//!
//! A [`Diagram`] can only be obtained through [`build_diagram`] (or the DSL
//! parser, which calls it), so every value of the type is referentially
//! sound. The Main condition is checked separately by
//! [`check_main_condition`], because ill-conditioned diagrams are still useful
//! inputs for the graph-theoretic routines.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleKind {
    Electron,
    Photon,
}

impl ParticleKind {
    pub const ALL: [ParticleKind; 2] = [ParticleKind::Electron, ParticleKind::Photon];

    pub fn keyword(self) -> &'static str {
        match self {
            ParticleKind::Electron => "electron",
            ParticleKind::Photon => "photon",
        }
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Orientation of an external leg. Internal lines have none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Incoming,
    Outgoing,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Incoming => "in",
            Direction::Outgoing => "out",
        }
    }

    pub fn flipped(self) -> Direction {
        match self {
            Direction::Incoming => Direction::Outgoing,
            Direction::Outgoing => Direction::Incoming,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Opaque vertex identifier; equality of ids is vertex identity.
    VertexId
);
string_id!(
    /// Identifier of an internal line or external leg.
    LineId
);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InternalLine {
    pub id: LineId,
    pub endpoints: (VertexId, VertexId),
    pub kind: ParticleKind,
}

impl InternalLine {
    pub fn new(
        id: impl Into<LineId>,
        a: impl Into<VertexId>,
        b: impl Into<VertexId>,
        kind: ParticleKind,
    ) -> Self {
        Self {
            id: id.into(),
            endpoints: (a.into(), b.into()),
            kind,
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.endpoints.0 == self.endpoints.1
    }

    /// Endpoints in sorted order; the stored order carries no meaning.
    pub fn sorted_endpoints(&self) -> (&VertexId, &VertexId) {
        let (a, b) = (&self.endpoints.0, &self.endpoints.1);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExternalLeg {
    pub id: LineId,
    pub vertex: VertexId,
    pub kind: ParticleKind,
    pub direction: Direction,
}

impl ExternalLeg {
    pub fn new(
        id: impl Into<LineId>,
        vertex: impl Into<VertexId>,
        kind: ParticleKind,
        direction: Direction,
    ) -> Self {
        Self {
            id: id.into(),
            vertex: vertex.into(),
            kind,
            direction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(VertexId),
    #[error("duplicate line id `{0}`")]
    DuplicateLine(LineId),
    #[error("line `{line}` references undeclared vertex `{vertex}`")]
    DanglingVertex { line: LineId, vertex: VertexId },
}

/// Colored multigraph with external legs. Parallel lines and self-loops are
/// allowed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagram {
    name: Option<String>,
    vertices: Vec<VertexId>,
    internal_lines: Vec<InternalLine>,
    external_legs: Vec<ExternalLeg>,
}

/// Validates referential integrity and assembles a [`Diagram`].
///
/// Vertex ids must be unique, line ids must be unique across internal lines
/// and external legs together, and every endpoint must be a declared vertex.
pub fn build_diagram(
    vertices: impl IntoIterator<Item = VertexId>,
    internal_lines: impl IntoIterator<Item = InternalLine>,
    external_legs: impl IntoIterator<Item = ExternalLeg>,
    name: Option<String>,
) -> Result<Diagram, DiagramError> {
    let vertices: Vec<VertexId> = vertices.into_iter().collect();
    let internal_lines: Vec<InternalLine> = internal_lines.into_iter().collect();
    let external_legs: Vec<ExternalLeg> = external_legs.into_iter().collect();

    let mut declared = HashSet::with_capacity(vertices.len());
    for v in &vertices {
        if !declared.insert(v) {
            return Err(DiagramError::DuplicateVertex(v.clone()));
        }
    }

    let mut line_ids = HashSet::with_capacity(internal_lines.len() + external_legs.len());
    for line in &internal_lines {
        if !line_ids.insert(&line.id) {
            return Err(DiagramError::DuplicateLine(line.id.clone()));
        }
        for v in [&line.endpoints.0, &line.endpoints.1] {
            if !declared.contains(v) {
                return Err(DiagramError::DanglingVertex {
                    line: line.id.clone(),
                    vertex: v.clone(),
                });
            }
        }
    }
    for leg in &external_legs {
        if !line_ids.insert(&leg.id) {
            return Err(DiagramError::DuplicateLine(leg.id.clone()));
        }
        if !declared.contains(&leg.vertex) {
            return Err(DiagramError::DanglingVertex {
                line: leg.id.clone(),
                vertex: leg.vertex.clone(),
            });
        }
    }

    Ok(Diagram {
        name,
        vertices,
        internal_lines,
        external_legs,
    })
}

/// Line-independent view of a diagram used for structural comparison.
type StructureKey<'a> = (
    Vec<&'a VertexId>,
    Vec<(ParticleKind, &'a VertexId, &'a VertexId)>,
    Vec<(ParticleKind, Direction, &'a VertexId)>,
);

impl Diagram {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Vertices in declaration order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn internal_lines(&self) -> &[InternalLine] {
        &self.internal_lines
    }

    pub fn external_legs(&self) -> &[ExternalLeg] {
        &self.external_legs
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn internal_count(&self, kind: ParticleKind) -> usize {
        self.internal_lines
            .iter()
            .filter(|l| l.kind == kind)
            .count()
    }

    pub fn external_count(&self, kind: ParticleKind) -> usize {
        self.external_legs.iter().filter(|l| l.kind == kind).count()
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.vertices.iter().position(|x| x == v)
    }

    fn structure_key(&self) -> StructureKey<'_> {
        let mut vertices: Vec<_> = self.vertices.iter().collect();
        vertices.sort();
        let mut lines: Vec<_> = self
            .internal_lines
            .iter()
            .map(|l| {
                let (a, b) = l.sorted_endpoints();
                (l.kind, a, b)
            })
            .collect();
        lines.sort();
        let mut legs: Vec<_> = self
            .external_legs
            .iter()
            .map(|l| (l.kind, l.direction, &l.vertex))
            .collect();
        legs.sort();
        (vertices, lines, legs)
    }

    /// Same vertex ids and the same multisets of lines and legs.
    ///
    /// Line ids, declaration order, endpoint order and the name are ignored.
    /// This is not an isomorphism test; see `enumeration::canonical_form`.
    pub fn same_structure(&self, other: &Diagram) -> bool {
        self.structure_key() == other.structure_key()
    }

    /// Incidence counts per vertex, keyed by vertex id.
    pub fn incidences(&self) -> BTreeMap<&VertexId, Incidence> {
        let mut map: BTreeMap<&VertexId, Incidence> = self
            .vertices
            .iter()
            .map(|v| (v, Incidence::default()))
            .collect();
        for line in &self.internal_lines {
            for v in [&line.endpoints.0, &line.endpoints.1] {
                if let Some(inc) = map.get_mut(v) {
                    inc.add(line.kind, false);
                }
            }
        }
        for leg in &self.external_legs {
            if let Some(inc) = map.get_mut(&leg.vertex) {
                inc.add(leg.kind, true);
            }
        }
        map
    }

    /// Disjoint union; vertex and line ids of `other` get `suffix` appended.
    pub fn disjoint_union(&self, other: &Diagram, suffix: &str) -> Diagram {
        let rename = |v: &VertexId| VertexId::new(format!("{v}{suffix}"));
        let rename_line = |l: &LineId| LineId::new(format!("{l}{suffix}"));
        let mut out = self.clone();
        out.vertices.extend(other.vertices.iter().map(rename));
        out.internal_lines
            .extend(other.internal_lines.iter().map(|l| InternalLine {
                id: rename_line(&l.id),
                endpoints: (rename(&l.endpoints.0), rename(&l.endpoints.1)),
                kind: l.kind,
            }));
        out.external_legs
            .extend(other.external_legs.iter().map(|l| ExternalLeg {
                id: rename_line(&l.id),
                vertex: rename(&l.vertex),
                kind: l.kind,
                direction: l.direction,
            }));
        out
    }
}

/// Line ends meeting at one vertex. A self-loop counts twice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Incidence {
    pub electron: usize,
    pub photon: usize,
    pub internal: usize,
    pub external: usize,
    pub external_electron: usize,
}

impl Incidence {
    fn add(&mut self, kind: ParticleKind, external: bool) {
        match kind {
            ParticleKind::Electron => self.electron += 1,
            ParticleKind::Photon => self.photon += 1,
        }
        if external {
            self.external += 1;
            if kind == ParticleKind::Electron {
                self.external_electron += 1;
            }
        } else {
            self.internal += 1;
        }
    }

    /// Two electron ends and one photon end, two internal and one external.
    pub fn satisfies_main_condition(&self) -> bool {
        self.electron == 2 && self.photon == 1 && self.internal == 2 && self.external == 1
    }
}

impl fmt::Display for Incidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} electron, {} photon; {} internal, {} external",
            self.electron, self.photon, self.internal, self.external
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strictness {
    #[default]
    Lenient,
    /// Also warn when incoming and outgoing electron legs are unbalanced.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub vertex: VertexId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub well_formed: bool,
    pub main_condition: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

pub fn check_main_condition(d: &Diagram) -> ValidationReport {
    check_main_condition_with(d, Strictness::Lenient)
}

pub fn check_main_condition_with(d: &Diagram, strictness: Strictness) -> ValidationReport {
    let violations: Vec<Violation> = d
        .incidences()
        .into_iter()
        .filter(|(_, inc)| !inc.satisfies_main_condition())
        .map(|(v, inc)| Violation {
            vertex: v.clone(),
            reason: inc.to_string(),
        })
        .collect();

    let mut warnings = Vec::new();
    if strictness == Strictness::Strict {
        let count = |dir| {
            d.external_legs
                .iter()
                .filter(|l| l.kind == ParticleKind::Electron && l.direction == dir)
                .count()
        };
        let (incoming, outgoing) = (count(Direction::Incoming), count(Direction::Outgoing));
        if incoming != outgoing {
            warnings.push(format!(
                "unbalanced external electron legs: {incoming} incoming, {outgoing} outgoing"
            ));
        }
    }

    ValidationReport {
        well_formed: true,
        main_condition: violations.is_empty(),
        violations,
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("Main condition violated at {} vertex(es), first at `{}`: {}", .0.len(), .0[0].vertex, .0[0].reason)]
pub struct MainConditionViolated(pub Vec<Violation>);

/// Vertices carrying an external electron leg, sorted by id.
///
/// Under the Main condition these are exactly the vertices where an internal
/// electron line meets an internal photon line.
pub fn contact_points(d: &Diagram) -> Result<BTreeSet<VertexId>, MainConditionViolated> {
    let report = check_main_condition(d);
    if !report.main_condition {
        return Err(MainConditionViolated(report.violations));
    }
    Ok(d.external_legs
        .iter()
        .filter(|l| l.kind == ParticleKind::Electron)
        .map(|l| l.vertex.clone())
        .collect())
}

/// Reference diagrams from the examples worked by hand.
pub mod fixtures {
    use super::*;
    use Direction::*;
    use ParticleKind::*;

    fn vertices(names: &[&str]) -> Vec<VertexId> {
        names.iter().map(|&n| VertexId::from(n)).collect()
    }

    /// Two contact points joined by one electron and one photon line.
    pub fn figure1() -> Diagram {
        build_diagram(
            vertices(&["A1", "A2"]),
            [
                InternalLine::new("i1", "A1", "A2", Electron),
                InternalLine::new("i2", "A1", "A2", Photon),
            ],
            [
                ExternalLeg::new("x1", "A1", Electron, Incoming),
                ExternalLeg::new("x2", "A2", Electron, Outgoing),
            ],
            Some("figure1".into()),
        )
        .expect("figure 1 is well formed")
    }

    /// Six-vertex single loop with contact points A2, A3, A5, A6. Internal
    /// photons join A2-A3 and A5-A6; A1 and A4 carry external photons.
    pub fn figure2() -> Diagram {
        build_diagram(
            vertices(&["A1", "A2", "A3", "A4", "A5", "A6"]),
            [
                InternalLine::new("i1", "A1", "A2", Electron),
                InternalLine::new("i2", "A2", "A3", Photon),
                InternalLine::new("i3", "A3", "A4", Electron),
                InternalLine::new("i4", "A4", "A5", Electron),
                InternalLine::new("i5", "A5", "A6", Photon),
                InternalLine::new("i6", "A6", "A1", Electron),
            ],
            [
                ExternalLeg::new("x1", "A1", Photon, Incoming),
                ExternalLeg::new("x2", "A2", Electron, Incoming),
                ExternalLeg::new("x3", "A3", Electron, Outgoing),
                ExternalLeg::new("x4", "A4", Photon, Incoming),
                ExternalLeg::new("x5", "A5", Electron, Incoming),
                ExternalLeg::new("x6", "A6", Electron, Outgoing),
            ],
            Some("figure2".into()),
        )
        .expect("figure 2 is well formed")
    }

    /// Electron box: four electron lines in a cycle, one external photon each.
    pub fn electron_box() -> Diagram {
        build_diagram(
            vertices(&["B1", "B2", "B3", "B4"]),
            [
                InternalLine::new("i1", "B1", "B2", Electron),
                InternalLine::new("i2", "B2", "B3", Electron),
                InternalLine::new("i3", "B3", "B4", Electron),
                InternalLine::new("i4", "B4", "B1", Electron),
            ],
            (1..=4).map(|k| ExternalLeg::new(format!("x{k}"), format!("B{k}"), Photon, Incoming)),
            Some("box".into()),
        )
        .expect("box is well formed")
    }

    /// Two parallel electron lines, one external photon per vertex.
    pub fn photon_self_energy() -> Diagram {
        build_diagram(
            vertices(&["A1", "A2"]),
            [
                InternalLine::new("i1", "A1", "A2", Electron),
                InternalLine::new("i2", "A1", "A2", Electron),
            ],
            [
                ExternalLeg::new("x1", "A1", Photon, Incoming),
                ExternalLeg::new("x2", "A2", Photon, Incoming),
            ],
            Some("selfenergy".into()),
        )
        .expect("self-energy is well formed")
    }
}
