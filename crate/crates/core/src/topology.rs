//! Graph invariants of a diagram. Only internal lines are graph edges;
//! external legs never join components and are never bridges.

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::counting;
use crate::diagram::{
    contact_points, Diagram, LineId, MainConditionViolated, ParticleKind, VertexId,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Each component's vertices in declaration order; components ordered
    /// by their first vertex.
    pub partition: Vec<Vec<VertexId>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.partition.len()
    }
}

/// Internal lines as index pairs into `d.vertices()`.
fn edge_list(d: &Diagram) -> Vec<(usize, usize)> {
    d.internal_lines()
        .iter()
        .map(|l| {
            let a = d.index_of(&l.endpoints.0).expect("diagram is well formed");
            let b = d.index_of(&l.endpoints.1).expect("diagram is well formed");
            (a, b)
        })
        .collect()
}

fn component_labels(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut uf = UnionFind::<usize>::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    uf.into_labeling()
}

fn count_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> usize {
    let labels = component_labels(n, edges);
    (0..n).filter(|&i| labels[i] == i).count()
}

pub fn connected_components(d: &Diagram) -> Components {
    let n = d.vertex_count();
    let labels = component_labels(n, edge_list(d));
    let mut order: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<VertexId>> = Vec::new();
    for (i, v) in d.vertices().iter().enumerate() {
        match order.iter().position(|&root| root == labels[i]) {
            Some(k) => groups[k].push(v.clone()),
            None => {
                order.push(labels[i]);
                groups.push(vec![v.clone()]);
            }
        }
    }
    Components { partition: groups }
}

/// Indices of internal lines whose removal increases the component count.
///
/// Iterative low-link DFS. Parallel lines are distinguished by line index, so
/// a doubled edge is never a bridge; self-loops are skipped.
pub fn bridges(d: &Diagram) -> Vec<usize> {
    let n = d.vertex_count();
    let edges = edge_list(d);
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (idx, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adjacency[a].push((b, idx));
            adjacency[b].push((a, idx));
        }
    }

    let mut order = vec![usize::MAX; n];
    let mut low = vec![usize::MAX; n];
    let mut found = Vec::new();
    let mut clock = 0;

    for root in 0..n {
        if order[root] != usize::MAX {
            continue;
        }
        order[root] = clock;
        low[root] = clock;
        clock += 1;
        // (vertex, edge used to enter it, next adjacency position)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, via, pos) = *top;
            if pos < adjacency[v].len() {
                top.2 += 1;
                let (w, edge) = adjacency[v][pos];
                if Some(edge) == via {
                    continue;
                }
                if order[w] == usize::MAX {
                    order[w] = clock;
                    low[w] = clock;
                    clock += 1;
                    stack.push((w, Some(edge), 0));
                } else {
                    low[v] = low[v].min(order[w]);
                }
            } else {
                stack.pop();
                if let (Some(&(parent, _, _)), Some(edge)) = (stack.last(), via) {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > order[parent] {
                        found.push(edge);
                    }
                }
            }
        }
    }
    found.sort_unstable();
    found
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// One bridge, present iff the diagram is reducible.
    pub witness: Option<LineId>,
}

pub fn is_irreducible(d: &Diagram) -> Irreducibility {
    let witness = bridges(d)
        .first()
        .map(|&idx| d.internal_lines()[idx].id.clone());
    Irreducibility {
        irreducible: witness.is_none(),
        witness,
    }
}

/// Independent loop count: lines minus vertices plus components.
pub fn loop_count(d: &Diagram) -> usize {
    let f = d.internal_lines().len();
    let c = count_components(d.vertex_count(), edge_list(d));
    // Every spanning forest has n - C edges, so F + C >= n.
    f + c - d.vertex_count()
}

/// Removal-and-recount bridge test; quadratic, used as a cross-check.
pub fn bridges_by_removal(d: &Diagram) -> Vec<usize> {
    let n = d.vertex_count();
    let edges = edge_list(d);
    let base = count_components(n, edges.iter().copied());
    (0..edges.len())
        .filter(|&skip| {
            let rest = edges
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &e)| e);
            count_components(n, rest) > base
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologySummary {
    pub n: usize,
    pub components: usize,
    pub contact_points: usize,
    pub external_electrons: usize,
    pub external_photons: usize,
    pub internal_electrons: usize,
    pub internal_photons: usize,
    pub internal_lines: usize,
    pub loops: usize,
    pub power_counter: i64,
    /// False when n is odd: the counting identities still hold, but such
    /// diagrams vanish by Furry's theorem.
    pub physical: bool,
    /// The empty diagram (n = 0).
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error(transparent)]
    MainCondition(#[from] MainConditionViolated),
    #[error("invariant check failed: {0}")]
    Inconsistent(String),
}

/// Full invariant tuple of a Main-condition diagram.
///
/// Besides collecting counts, this re-derives every counting identity that
/// the Main condition implies and reports any disagreement as
/// [`TopologyError::Inconsistent`].
pub fn summarize(d: &Diagram) -> Result<TopologySummary, TopologyError> {
    let contacts = contact_points(d)?;
    let n = d.vertex_count();
    let q = contacts.len();
    let fe = d.internal_count(ParticleKind::Electron);
    let fp = d.internal_count(ParticleKind::Photon);
    let ne = d.external_count(ParticleKind::Electron);
    let np = d.external_count(ParticleKind::Photon);
    let f = fe + fp;
    let c = connected_components(d).count();
    let m = loop_count(d);
    let k = counting::power_counter(fe as u64, fp as u64, m as u64);

    let summary = TopologySummary {
        n,
        components: c,
        contact_points: q,
        external_electrons: ne,
        external_photons: np,
        internal_electrons: fe,
        internal_photons: fp,
        internal_lines: f,
        loops: m,
        power_counter: k,
        physical: n % 2 == 0,
        degenerate: n == 0,
    };
    summary.check_identities()?;
    Ok(summary)
}

impl TopologySummary {
    /// Verifies the counting identities that hold under the Main condition.
    pub fn check_identities(&self) -> Result<(), TopologyError> {
        let (n, q, ne, np, fe, fp) = (
            self.n,
            self.contact_points,
            self.external_electrons,
            self.external_photons,
            self.internal_electrons,
            self.internal_photons,
        );
        let mut failures = Vec::new();
        let mut expect = |ok: bool, what: &str| {
            if !ok {
                failures.push(what.to_owned());
            }
        };
        expect(self.internal_lines == fe + fp, "F = Fe + Fp");
        expect(
            self.loops + n == self.internal_lines + self.components,
            "m = F - n + C",
        );
        expect(ne == q, "Ne = Q");
        expect(q % 2 == 0, "Q even");
        expect(2 * fe == 2 * n - q, "Fe = n - Q/2");
        expect(2 * fp == q, "Fp = Q/2");
        expect(np + q == n, "Np = n - Q");
        expect(2 * fe + ne == 2 * n, "2Fe + Ne = 2n");
        expect(2 * fp + np == n, "2Fp + Np = n");
        expect(fe + fp == n, "Fe + Fp = n");
        expect(ne + np == n, "Ne + Np = n");
        expect(self.loops == self.components, "m = C");
        match counting::power_counter_external(ne as u64, np as u64, self.loops as u64) {
            Ok(k) => expect(
                k == self.power_counter,
                "K from internal and external data agree",
            ),
            Err(_) => expect(false, "Ne even"),
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(TopologyError::Inconsistent(failures.join(", ")))
        }
    }
}
