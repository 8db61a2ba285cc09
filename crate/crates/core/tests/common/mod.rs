//! Independent oracles shared by the integration tests. Nothing here calls
//! the code path it is used to check.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use qedgraph::diagram::{
    build_diagram, check_main_condition, Diagram, Direction, ExternalLeg, InternalLine,
    ParticleKind,
};
use qedgraph::enumeration::{canonical_form, CanonicalForm};

const KINDS: [ParticleKind; 2] = [ParticleKind::Electron, ParticleKind::Photon];

fn name(i: usize) -> String {
    format!("A{}", i + 1)
}

/// Naive generator: every multiset of internal lines on `n` vertices (any
/// kind, any endpoints, self-loops allowed) with at most three line ends per
/// vertex, completed by every multiset of external-leg kinds that brings each
/// vertex to three ends, filtered by the Main condition.
///
/// Electron legs get alternating in/out directions in vertex order, photon
/// legs are incoming, mirroring the enumerator's normalized convention.
pub fn naive_main_condition_diagrams(n: usize) -> Vec<Diagram> {
    let mut slots = Vec::new();
    for a in 0..n {
        for b in a..n {
            for kind in KINDS {
                slots.push((a, b, kind));
            }
        }
    }

    let mut internal_sets = Vec::new();
    let mut ends = vec![0usize; n];
    let mut chosen = Vec::new();
    collect_internal(&slots, 0, &mut ends, &mut chosen, &mut internal_sets);

    let mut out = Vec::new();
    for lines in internal_sets {
        let mut ends = vec![0usize; n];
        for &(a, b, _) in &lines {
            ends[a] += 1;
            ends[b] += 1;
        }
        // Per vertex: number of external electron legs among the free ends.
        let mut choice = vec![0usize; n];
        loop {
            let mut legs: Vec<(usize, ParticleKind)> = Vec::new();
            for v in 0..n {
                for k in 0..3 - ends[v] {
                    let kind = if k < choice[v] {
                        ParticleKind::Electron
                    } else {
                        ParticleKind::Photon
                    };
                    legs.push((v, kind));
                }
            }
            let d = assemble_naive(n, &lines, &legs);
            if check_main_condition(&d).main_condition {
                out.push(d);
            }
            // Odometer over choice[v] in 0..=free(v).
            let mut v = 0;
            while v < n {
                choice[v] += 1;
                if choice[v] <= 3 - ends[v] {
                    break;
                }
                choice[v] = 0;
                v += 1;
            }
            if v == n {
                break;
            }
        }
    }
    out
}

fn collect_internal(
    slots: &[(usize, usize, ParticleKind)],
    from: usize,
    ends: &mut Vec<usize>,
    chosen: &mut Vec<(usize, usize, ParticleKind)>,
    out: &mut Vec<Vec<(usize, usize, ParticleKind)>>,
) {
    out.push(chosen.clone());
    for s in from..slots.len() {
        let (a, b, _) = slots[s];
        ends[a] += 1;
        ends[b] += 1;
        if ends[a] <= 3 && ends[b] <= 3 {
            chosen.push(slots[s]);
            collect_internal(slots, s, ends, chosen, out);
            chosen.pop();
        }
        ends[a] -= 1;
        ends[b] -= 1;
    }
}

fn assemble_naive(
    n: usize,
    lines: &[(usize, usize, ParticleKind)],
    legs: &[(usize, ParticleKind)],
) -> Diagram {
    let mut next_electron = Direction::Incoming;
    let legs: Vec<ExternalLeg> = legs
        .iter()
        .enumerate()
        .map(|(k, &(v, kind))| {
            let dir = match kind {
                ParticleKind::Electron => {
                    let d = next_electron;
                    next_electron = match d {
                        Direction::Incoming => Direction::Outgoing,
                        Direction::Outgoing => Direction::Incoming,
                    };
                    d
                }
                ParticleKind::Photon => Direction::Incoming,
            };
            ExternalLeg::new(format!("x{k}"), name(v), kind, dir)
        })
        .collect();
    build_diagram(
        (0..n).map(|i| name(i).into()),
        lines
            .iter()
            .enumerate()
            .map(|(k, &(a, b, kind))| InternalLine::new(format!("i{k}"), name(a), name(b), kind)),
        legs,
        None,
    )
    .unwrap()
}

pub fn class_set(diagrams: &[Diagram]) -> BTreeSet<CanonicalForm> {
    diagrams.iter().map(canonical_form).collect()
}

/// Component count by breadth-first search over internal lines, skipping
/// the line at `skip`.
pub fn bfs_components(d: &Diagram, skip: Option<usize>) -> usize {
    let n = d.vertex_count();
    let index = |v| d.vertices().iter().position(|x| x == v).unwrap();
    let mut adjacency = vec![Vec::new(); n];
    for (i, l) in d.internal_lines().iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let (a, b) = (index(&l.endpoints.0), index(&l.endpoints.1));
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

/// Brute-force irreducibility: no single internal line's removal raises the
/// component count.
pub fn brute_force_irreducible(d: &Diagram) -> bool {
    let base = bfs_components(d, None);
    (0..d.internal_lines().len()).all(|i| bfs_components(d, Some(i)) == base)
}

/// The 4D cutoff integral reduced by rotational symmetry about q:
///
/// J_mu = (q_mu / |q|) 4π ∫_0^L ∫_0^π r⁴ cos θ sin² θ / (r² - 2 r |q| cos θ + ℓ)² dθ dr
///
/// evaluated by composite Simpson rules on geometric radial panels. For
/// q = 0 the integral vanishes by symmetry.
pub fn reduced_integral(q: [f64; 4], ell: f64, cutoff: f64, mu: usize) -> f64 {
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if qn == 0.0 {
        return 0.0;
    }
    let f = |r: f64, t: f64| {
        let den = r * r - 2.0 * r * qn * t.cos() + ell;
        r.powi(4) * t.cos() * t.sin().powi(2) / (den * den)
    };
    let theta_steps = 400;
    let inner = |r: f64| simpson(|t| f(r, t), 0.0, PI, theta_steps);

    let mut edges = vec![0.0];
    let mut e = 0.5;
    while e < cutoff {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(cutoff);
    let radial: f64 = edges
        .windows(2)
        .map(|w| simpson(inner, w[0], w[1], 200))
        .sum();
    4.0 * PI * radial * q[mu - 1] / qn
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Random well-formed source text together with the diagram it describes.
///
/// Identifiers, statement order, spacing, comments, blank lines and
/// endpoint order all vary; every vertex is declared before first use.
pub fn fuzz_valid_source(rng: &mut impl rand::Rng) -> (String, Diagram) {
    use rand::seq::SliceRandom;
    use rand::RngExt;

    const ALPHA: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    const REST: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_";
    let ident = |rng: &mut dyn FnMut(usize) -> usize| {
        let mut s = String::new();
        s.push(ALPHA[rng(ALPHA.len())] as char);
        for _ in 0..rng(7) {
            s.push(REST[rng(REST.len())] as char);
        }
        s
    };

    let mut pick = |n: usize| rng.random_range(0..n);
    let n = 1 + pick(6);
    let mut names: Vec<String> = Vec::new();
    while names.len() < n {
        let s = ident(&mut pick);
        if !names.contains(&s) {
            names.push(s);
        }
    }
    let header = (pick(2) == 0).then(|| ident(&mut pick));
    let kinds = [ParticleKind::Electron, ParticleKind::Photon];
    let dirs = [Direction::Incoming, Direction::Outgoing];

    let mut lines = Vec::new();
    let mut legs = Vec::new();
    let mut body: Vec<Vec<String>> = Vec::new();
    for _ in 0..pick(9) {
        let (kind, a, b) = (kinds[pick(2)], pick(n), pick(n));
        lines.push(InternalLine::new(
            format!("i{}", lines.len()),
            names[a].as_str(),
            names[b].as_str(),
            kind,
        ));
        let (x, y) = if pick(2) == 0 { (a, b) } else { (b, a) };
        body.push(vec![
            "internal".into(),
            kind.keyword().into(),
            names[x].clone(),
            names[y].clone(),
        ]);
    }
    for _ in 0..pick(9) {
        let (kind, dir, v) = (kinds[pick(2)], dirs[pick(2)], pick(n));
        legs.push(ExternalLeg::new(
            format!("x{}", legs.len()),
            names[v].as_str(),
            kind,
            dir,
        ));
        body.push(vec![
            "external".into(),
            kind.keyword().into(),
            dir.keyword().into(),
            names[v].clone(),
        ]);
    }

    let mut decls: Vec<Vec<String>> = names
        .iter()
        .map(|v| vec!["vertex".into(), v.clone()])
        .collect();
    let mut order: Vec<usize> = (0..body.len()).collect();
    let seed = pick(1 << 30) as u64;
    let mut shuffler = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    decls.shuffle(&mut shuffler);
    order.shuffle(&mut shuffler);

    let space = |pick: &mut dyn FnMut(usize) -> usize| -> String {
        [" ", "  ", "\t", " \t "][pick(4)].to_string()
    };
    let mut statements: Vec<Vec<String>> = Vec::new();
    if let Some(h) = &header {
        statements.push(vec!["diagram".into(), h.clone()]);
    }
    statements.extend(decls);
    statements.extend(order.into_iter().map(|i| body[i].clone()));

    let mut text = String::new();
    if pick(3) == 0 {
        text.push_str("# generated\n");
    }
    for tokens in statements {
        if pick(5) == 0 {
            text.push('\n');
        }
        if pick(3) == 0 {
            text.push_str(&space(&mut pick));
        }
        for (k, t) in tokens.iter().enumerate() {
            if k > 0 {
                text.push_str(&space(&mut pick));
            }
            text.push_str(t);
        }
        match pick(4) {
            0 => text.push_str(&space(&mut pick)),
            1 => text.push_str(" # note"),
            _ => {}
        }
        text.push('\n');
    }

    let d = build_diagram(names.iter().map(|v| v.as_str().into()), lines, legs, header).unwrap();
    (text, d)
}

/// Corrupts a source by deleting, duplicating or replacing tokens and
/// characters. The result may or may not parse.
pub fn mutate_source(rng: &mut impl rand::Rng, source: &str) -> String {
    use rand::RngExt;
    const JUNK: [&str; 10] = [
        "muon", "sideways", "vertex", "internal", "1A", "#", "é", "", "\t", "A1",
    ];
    let mut chars: Vec<char> = source.chars().collect();
    for _ in 0..rng.random_range(1..4) {
        if chars.is_empty() {
            break;
        }
        let at = rng.random_range(0..chars.len());
        match rng.random_range(0..4) {
            0 => {
                chars.remove(at);
            }
            1 => {
                let c = chars[at];
                chars.insert(at, c);
            }
            2 => {
                let junk = JUNK[rng.random_range(0..JUNK.len())];
                for (k, c) in junk.chars().enumerate() {
                    chars.insert(at + k, c);
                }
            }
            _ => chars[at] = char::from_u32(rng.random_range(0x20..0x7f)).unwrap(),
        }
    }
    chars.into_iter().collect()
}
