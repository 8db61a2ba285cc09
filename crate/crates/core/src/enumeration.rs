//! Exhaustive generation of Main-condition diagrams on a fixed number of
//! vertices, and a relabeling-invariant certificate for deduplication.
//!
//! The Main condition fixes almost everything once the contact points are
//! chosen: contact points carry an external electron, one internal photon end
//! and one internal electron end; every other vertex carries an external
//! photon and two internal electron ends. Generation therefore walks
//! contact sets, perfect photon matchings on them, and electron multigraphs
//! with the induced degree sequence.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::counting::{solve_inverse, CountingError, ExternalData};
use crate::diagram::{
    build_diagram, Diagram, Direction, ExternalLeg, InternalLine, ParticleKind, VertexId,
};
use crate::topology::{connected_components, is_irreducible};

pub const DEFAULT_MAX_VERTICES: usize = 8;

/// How external-leg directions are assigned to generated diagrams.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DirectionMode {
    /// Electron legs alternate in, out, in, ... over contact points in vertex
    /// order; photon legs are incoming.
    #[default]
    Normalized,
    /// Every in/out assignment of every leg.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationRequest {
    pub vertices: Option<usize>,
    pub external: Option<ExternalData>,
    pub connected_only: bool,
    pub irreducible_only: bool,
    pub dedupe: bool,
    pub limit: Option<usize>,
    pub directions: DirectionMode,
    pub max_vertices: usize,
}

impl Default for EnumerationRequest {
    fn default() -> Self {
        Self {
            vertices: None,
            external: None,
            connected_only: false,
            irreducible_only: false,
            dedupe: false,
            limit: None,
            directions: DirectionMode::Normalized,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

impl EnumerationRequest {
    pub fn vertices(n: usize) -> Self {
        Self {
            vertices: Some(n),
            ..Self::default()
        }
    }

    pub fn external(x: ExternalData) -> Self {
        Self {
            external: Some(x),
            ..Self::default()
        }
    }

    pub fn connected(mut self) -> Self {
        self.connected_only = true;
        self
    }

    pub fn irreducible(mut self) -> Self {
        self.irreducible_only = true;
        self
    }

    pub fn deduped(mut self) -> Self {
        self.dedupe = true;
        self
    }

    pub fn limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn directions(mut self, mode: DirectionMode) -> Self {
        self.directions = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("requested {requested} vertices, above the enumeration limit of {max}")]
    GuardExceeded { requested: usize, max: usize },
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error("external data implies {implied} vertices but {requested} were requested")]
    VertexMismatch { requested: usize, implied: usize },
    #[error("enumeration needs a vertex count or external data")]
    Unspecified,
}

/// Relabeling-invariant certificate. Two diagrams have equal certificates iff
/// a vertex bijection maps one onto the other, preserving line kinds and
/// external-leg kinds and directions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

const ELECTRON: usize = 0;
const PHOTON: usize = 1;

fn kind_index(kind: ParticleKind) -> usize {
    match kind {
        ParticleKind::Electron => ELECTRON,
        ParticleKind::Photon => PHOTON,
    }
}

fn leg_code(kind: ParticleKind, direction: Direction) -> u8 {
    (kind_index(kind) as u8) << 1 | (direction == Direction::Outgoing) as u8
}

/// Index-based view of a diagram: per-vertex leg codes and symmetric
/// line multiplicities per kind (self-loops on the diagonal).
struct Indexed {
    legs: Vec<Vec<u8>>,
    mult: [Vec<Vec<u8>>; 2],
}

impl Indexed {
    fn new(d: &Diagram) -> Self {
        let n = d.vertex_count();
        let mut legs = vec![Vec::new(); n];
        for leg in d.external_legs() {
            let v = d.index_of(&leg.vertex).expect("well formed");
            legs[v].push(leg_code(leg.kind, leg.direction));
        }
        legs.iter_mut().for_each(|l| l.sort_unstable());
        let mut mult = [vec![vec![0u8; n]; n], vec![vec![0u8; n]; n]];
        for line in d.internal_lines() {
            let a = d.index_of(&line.endpoints.0).expect("well formed");
            let b = d.index_of(&line.endpoints.1).expect("well formed");
            let m = &mut mult[kind_index(line.kind)];
            m[a][b] += 1;
            if a != b {
                m[b][a] += 1;
            }
        }
        Self { legs, mult }
    }

    fn n(&self) -> usize {
        self.legs.len()
    }

    /// Relabeling-invariant vertex signature used to restrict the search.
    fn invariant(&self, v: usize) -> (Vec<u8>, Vec<(u8, u8, bool, Vec<u8>)>) {
        let mut neighbours = Vec::new();
        for (k, m) in self.mult.iter().enumerate() {
            for w in 0..self.n() {
                if m[v][w] > 0 {
                    neighbours.push((k as u8, m[v][w], v == w, self.legs[w].clone()));
                }
            }
        }
        neighbours.sort();
        (self.legs[v].clone(), neighbours)
    }

    fn row(&self, order: &[usize], k: usize, v: usize, out: &mut Vec<u8>) {
        out.clear();
        for &w in &order[..k] {
            out.push(self.mult[ELECTRON][v][w]);
            out.push(self.mult[PHOTON][v][w]);
        }
        out.push(self.mult[ELECTRON][v][v]);
        out.push(self.mult[PHOTON][v][v]);
    }
}

struct Search<'a> {
    graph: &'a Indexed,
    slots: Vec<usize>,
    classes: Vec<Vec<usize>>,
    used: Vec<bool>,
    order: Vec<usize>,
    rows: Vec<Vec<u8>>,
    best: Option<Vec<Vec<u8>>>,
}

impl Search<'_> {
    /// Ordering of the placed rows `0..=k` against the best rows so far.
    fn compare_prefix(&self, k: usize) -> Ordering {
        match &self.best {
            Some(best) => self.rows[..=k].cmp(&best[..=k]),
            None => Ordering::Less,
        }
    }

    /// Branch and bound over class-respecting orderings.
    fn run(&mut self, k: usize) {
        let n = self.graph.n();
        if k == n {
            if self.best.is_none() || self.rows < *self.best.as_ref().unwrap() {
                self.best = Some(self.rows.clone());
            }
            return;
        }
        let class = self.slots[k];
        for i in 0..self.classes[class].len() {
            let v = self.classes[class][i];
            if self.used[v] {
                continue;
            }
            let mut row = std::mem::take(&mut self.rows[k]);
            self.graph.row(&self.order, k, v, &mut row);
            self.rows[k] = row;
            if self.compare_prefix(k) == Ordering::Greater {
                continue;
            }
            self.used[v] = true;
            self.order.push(v);
            self.run(k + 1);
            self.order.pop();
            self.used[v] = false;
        }
    }
}

/// Minimum adjacency encoding over all vertex orderings that respect the
/// sorted vertex invariants.
pub fn canonical_form(d: &Diagram) -> CanonicalForm {
    let graph = Indexed::new(d);
    let n = graph.n();

    let mut by_invariant: Vec<(_, usize)> = (0..n).map(|v| (graph.invariant(v), v)).collect();
    by_invariant.sort();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slots = Vec::with_capacity(n);
    for (i, (inv, v)) in by_invariant.iter().enumerate() {
        if i == 0 || by_invariant[i - 1].0 != *inv {
            classes.push(Vec::new());
        }
        classes.last_mut().unwrap().push(*v);
        slots.push(classes.len() - 1);
    }

    let mut search = Search {
        graph: &graph,
        slots,
        classes,
        used: vec![false; n],
        order: Vec::with_capacity(n),
        rows: vec![Vec::new(); n],
        best: None,
    };
    search.run(0);

    let mut code = vec![n as u8];
    for (_, v) in &by_invariant {
        code.push(graph.legs[*v].len() as u8);
        code.extend_from_slice(&graph.legs[*v]);
    }
    for row in search.best.unwrap_or_default() {
        code.extend(row);
    }
    CanonicalForm(code)
}

/// Encoding of the diagram under its own labeling; orders labeled output.
fn labeled_key(d: &Diagram) -> Vec<u8> {
    let graph = Indexed::new(d);
    let order: Vec<usize> = (0..graph.n()).collect();
    let mut code = Vec::new();
    for legs in &graph.legs {
        code.push(legs.len() as u8);
        code.extend_from_slice(legs);
    }
    let mut row = Vec::new();
    for k in 0..graph.n() {
        graph.row(&order, k, k, &mut row);
        code.extend_from_slice(&row);
    }
    code
}

pub fn vertex_name(i: usize) -> VertexId {
    VertexId::new(format!("A{}", i + 1))
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn perfect_matchings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
    match points {
        [] => vec![Vec::new()],
        [first, rest @ ..] => {
            let mut out = Vec::new();
            for (i, &partner) in rest.iter().enumerate() {
                let remaining: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &p)| p)
                    .collect();
                for mut m in perfect_matchings(&remaining) {
                    m.insert(0, (*first, partner));
                    out.push(m);
                }
            }
            out
        }
    }
}

/// All multisets of undirected lines (self-loops allowed) realising the
/// given degree sequence; a self-loop uses two degrees.
fn multigraphs(degrees: &[u8]) -> Vec<Vec<(usize, usize)>> {
    fn go(
        degrees: &mut [u8],
        last: Option<(usize, usize)>,
        lines: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some(v) = degrees.iter().position(|&d| d > 0) else {
            out.push(lines.clone());
            return;
        };
        let min_u = match last {
            Some((lv, lu)) if lv == v => lu,
            _ => v,
        };
        for u in min_u..degrees.len() {
            let need_loop = u == v;
            if (need_loop && degrees[v] < 2) || degrees[u] == 0 {
                continue;
            }
            degrees[v] -= 1;
            degrees[u] -= 1;
            lines.push((v, u));
            go(degrees, Some((v, u)), lines, out);
            lines.pop();
            degrees[v] += 1;
            degrees[u] += 1;
        }
    }
    let mut degrees = degrees.to_vec();
    let mut out = Vec::new();
    go(&mut degrees, None, &mut Vec::new(), &mut out);
    out
}

/// Normalized leg directions for a list of per-vertex leg kinds.
pub fn normalized_directions(kinds: &[ParticleKind]) -> Vec<Direction> {
    let mut next_electron = Direction::Incoming;
    kinds
        .iter()
        .map(|kind| match kind {
            ParticleKind::Electron => {
                let d = next_electron;
                next_electron = next_electron.flipped();
                d
            }
            ParticleKind::Photon => Direction::Incoming,
        })
        .collect()
}

fn direction_assignments(kinds: &[ParticleKind], mode: DirectionMode) -> Vec<Vec<Direction>> {
    match mode {
        DirectionMode::Normalized => vec![normalized_directions(kinds)],
        DirectionMode::Exhaustive => (0u32..1 << kinds.len())
            .map(|mask| {
                (0..kinds.len())
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            Direction::Outgoing
                        } else {
                            Direction::Incoming
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Assembles a generated diagram with vertices `A1..An`, one external leg
/// per vertex in vertex order, and internal lines in the given order.
pub fn assemble(
    n: usize,
    lines: &[(usize, usize, ParticleKind)],
    legs: &[(ParticleKind, Direction)],
) -> Diagram {
    build_diagram(
        (0..n).map(vertex_name),
        lines.iter().enumerate().map(|(i, &(a, b, kind))| {
            InternalLine::new(format!("i{}", i + 1), vertex_name(a), vertex_name(b), kind)
        }),
        legs.iter().enumerate().map(|(i, &(kind, dir))| {
            ExternalLeg::new(format!("x{}", i + 1), vertex_name(i), kind, dir)
        }),
        None,
    )
    .expect("generated diagrams are well formed")
}

fn for_contact_set(n: usize, contacts: &[usize], mode: DirectionMode) -> Vec<Diagram> {
    let mut is_contact = vec![false; n];
    contacts.iter().for_each(|&c| is_contact[c] = true);
    let degrees: Vec<u8> = is_contact.iter().map(|&c| if c { 1 } else { 2 }).collect();
    let kinds: Vec<ParticleKind> = is_contact
        .iter()
        .map(|&c| {
            if c {
                ParticleKind::Electron
            } else {
                ParticleKind::Photon
            }
        })
        .collect();
    let directions = direction_assignments(&kinds, mode);
    let electron_graphs = multigraphs(&degrees);

    let mut out = Vec::new();
    for photons in perfect_matchings(contacts) {
        for electrons in &electron_graphs {
            let lines: Vec<_> = photons
                .iter()
                .map(|&(a, b)| (a, b, ParticleKind::Photon))
                .chain(
                    electrons
                        .iter()
                        .map(|&(a, b)| (a, b, ParticleKind::Electron)),
                )
                .collect();
            for dirs in &directions {
                let legs: Vec<_> = kinds.iter().copied().zip(dirs.iter().copied()).collect();
                out.push(assemble(n, &lines, &legs));
            }
        }
    }
    out
}

/// Every labeled Main-condition diagram matching the request, ordered by
/// canonical certificate (labeled encoding breaks ties). With `dedupe`, one
/// representative per isomorphism class is kept.
pub fn enumerate(req: &EnumerationRequest) -> Result<Vec<Diagram>, EnumerationError> {
    let contact_counts: Vec<usize>;
    let n = match (req.vertices, req.external) {
        (_, Some(x)) => {
            let recovered = solve_inverse(x)?;
            let implied = recovered.vertices as usize;
            if let Some(requested) = req.vertices.filter(|&r| r != implied) {
                return Err(EnumerationError::VertexMismatch { requested, implied });
            }
            contact_counts = vec![recovered.contact_points as usize];
            implied
        }
        (Some(n), None) => {
            contact_counts = (0..=n).step_by(2).collect();
            n
        }
        (None, None) => return Err(EnumerationError::Unspecified),
    };
    if n > req.max_vertices {
        return Err(EnumerationError::GuardExceeded {
            requested: n,
            max: req.max_vertices,
        });
    }

    let contact_sets: Vec<Vec<usize>> = contact_counts
        .iter()
        .flat_map(|&q| k_subsets(n, q))
        .collect();

    let mut keyed: Vec<(CanonicalForm, Vec<u8>, Diagram)> = contact_sets
        .par_iter()
        .flat_map_iter(|contacts| for_contact_set(n, contacts, req.directions))
        .filter(|d| !req.connected_only || connected_components(d).count() <= 1)
        .filter(|d| !req.irreducible_only || is_irreducible(d).irreducible)
        .map(|d| (canonical_form(&d), labeled_key(&d), d))
        .collect();
    keyed.par_sort_unstable_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    if req.dedupe {
        keyed.dedup_by(|later, first| later.0 == first.0);
    }
    let limit = req.limit.unwrap_or(usize::MAX);
    Ok(keyed.into_iter().take(limit).map(|(_, _, d)| d).collect())
}
