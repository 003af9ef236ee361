//! Combinatorial link diagrams.
//!
//! A diagram is stored two ways at once:
//!
//! * as a list of crossings, each an `(over, under_in, under_out)` triple of
//!   arc ids (arcs are severed only at undercrossings), which is all the
//!   coloring equations need;
//! * optionally, as a rotation system: for every crossing the four incident
//!   edge labels in counterclockwise order, starting from the incoming
//!   under-edge (planar-diagram style). Edges are the segments of the
//!   underlying 4-valent graph, so there are `2N` of them. Moves need this;
//!   colorings do not.
//!
//! ```text
//!        e3 (over)
//!          |
//!   e0 ----|---> e2        slots are counterclockwise: 0, 1, 2, 3
//!  (under) |   (under)     slot 0 = incoming under, slot 2 = outgoing under
//!        e1 (over)
//! ```

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ArcId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: arc {arc} is not declared (arcs={arcs})")]
    ArcOutOfRange { line: usize, arc: usize, arcs: usize },
    #[error("arc {arc} is an under-end {count} times (expected 2)")]
    ArcIncidence { arc: ArcId, count: usize },
    #[error("a diagram without crossings must have exactly one arc, found {arcs}")]
    CrossinglessArcs { arcs: usize },
    #[error("rotation system inconsistent with crossing list: {0}")]
    RotationMismatch(String),
    #[error("declared {declared} components but the diagram has {actual}")]
    ComponentMismatch { declared: usize, actual: usize },
    #[error("diagram has a component that never passes under a crossing")]
    OverOnlyComponent,
    #[error("diagram is not connected")]
    Disconnected,
    #[error("diagram has no rotation system")]
    MissingRotation,
    #[error("diagram has no crossings")]
    NoCrossings,
    #[error("embedding is not planar: V - E + F = {euler} (F = {faces})")]
    NonPlanar { faces: usize, euler: i64 },
    #[error("braid: {0}")]
    Braid(String),
}

/// One crossing as arc ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub over: ArcId,
    pub under_in: ArcId,
    pub under_out: ArcId,
}

impl Crossing {
    pub fn new(over: ArcId, under_in: ArcId, under_out: ArcId) -> Self {
        Crossing { over, under_in, under_out }
    }
}

/// An edge end at a crossing: leaving `crossing` through `slot`.
///
/// In face tracing a dart is read with its face on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dart {
    pub crossing: usize,
    pub slot: usize,
}

impl Dart {
    pub fn new(crossing: usize, slot: usize) -> Self {
        Dart { crossing, slot }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    arcs: usize,
    components: usize,
    crossings: Vec<Crossing>,
    rotation: Option<Vec<[EdgeId; 4]>>,
    /// Arc containing each edge; present together with `rotation`.
    edge_arcs: Vec<ArcId>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn classes(&mut self) -> usize {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count()
    }
}

impl Diagram {
    /// The crossingless unknot diagram: one arc, no crossings.
    pub fn unknot() -> Self {
        Diagram { arcs: 1, components: 1, crossings: Vec::new(), rotation: None, edge_arcs: Vec::new() }
    }

    /// Builds a diagram from arc triples alone. Arc ids must already be dense.
    pub fn from_crossings(arcs: usize, crossings: Vec<Crossing>) -> Result<Self, DiagramError> {
        if crossings.is_empty() {
            if arcs != 1 {
                return Err(DiagramError::CrossinglessArcs { arcs });
            }
            return Ok(Diagram::unknot());
        }
        let mut under_ends = vec![0usize; arcs];
        for (i, x) in crossings.iter().enumerate() {
            for arc in [x.over, x.under_in, x.under_out] {
                if arc >= arcs {
                    return Err(DiagramError::ArcOutOfRange { line: i + 1, arc, arcs });
                }
            }
            under_ends[x.under_in] += 1;
            under_ends[x.under_out] += 1;
        }
        if let Some((arc, &count)) = under_ends.iter().enumerate().find(|(_, &c)| c != 2) {
            return Err(DiagramError::ArcIncidence { arc, count });
        }
        let mut uf = UnionFind::new(arcs);
        for x in &crossings {
            uf.union(x.under_in, x.under_out);
        }
        let components = uf.classes();
        Ok(Diagram { arcs, components, crossings, rotation: None, edge_arcs: Vec::new() })
    }

    /// Builds a diagram from a rotation system; arcs and triples are derived.
    ///
    /// Edge labels may be sparse; they are reindexed in sorted order. Arcs are
    /// numbered by their smallest edge label. Crossing order is preserved.
    pub fn from_rotation(rotation: Vec<[EdgeId; 4]>) -> Result<Self, DiagramError> {
        if rotation.is_empty() {
            return Ok(Diagram::unknot());
        }
        let mut labels: Vec<EdgeId> = rotation.iter().flatten().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        let index: HashMap<EdgeId, EdgeId> = labels.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let rotation: Vec<[EdgeId; 4]> = rotation.iter().map(|r| r.map(|e| index[&e])).collect();
        let n = rotation.len();
        let edges = labels.len();
        let mut uses = vec![0usize; edges];
        for &e in rotation.iter().flatten() {
            uses[e] += 1;
        }
        if edges != 2 * n || uses.iter().any(|&u| u != 2) {
            return Err(DiagramError::RotationMismatch(format!(
                "{n} crossings need {} edges each used twice, found {edges} labels",
                2 * n
            )));
        }

        let mut strands = UnionFind::new(edges);
        let mut over = UnionFind::new(edges);
        for r in &rotation {
            strands.union(r[0], r[2]);
            strands.union(r[1], r[3]);
            over.union(r[1], r[3]);
        }
        let components = strands.classes();

        // Arc numbering: sorted by smallest edge label.
        let mut arc_of_root: HashMap<usize, ArcId> = HashMap::new();
        let mut edge_arcs = vec![0; edges];
        for (e, slot) in edge_arcs.iter_mut().enumerate() {
            let root = over.find(e);
            let next = arc_of_root.len();
            *slot = *arc_of_root.entry(root).or_insert(next);
        }
        let arcs = arc_of_root.len();
        let crossings: Vec<Crossing> = rotation
            .iter()
            .map(|r| Crossing::new(edge_arcs[r[1]], edge_arcs[r[0]], edge_arcs[r[2]]))
            .collect();

        let mut under_ends = vec![0usize; arcs];
        for x in &crossings {
            under_ends[x.under_in] += 1;
            under_ends[x.under_out] += 1;
        }
        if under_ends.contains(&0) {
            return Err(DiagramError::OverOnlyComponent);
        }
        debug_assert!(under_ends.iter().all(|&c| c == 2));
        Ok(Diagram { arcs, components, crossings, rotation: Some(rotation), edge_arcs })
    }

    /// Attaches a rotation system to a triple-only diagram after checking that
    /// the arcs it induces agree with the triples.
    pub fn with_rotation(self, rotation: Vec<[EdgeId; 4]>) -> Result<Self, DiagramError> {
        if rotation.len() != self.crossings.len() {
            return Err(DiagramError::RotationMismatch(format!(
                "{} rotation lines for {} crossings",
                rotation.len(),
                self.crossings.len()
            )));
        }
        let derived = Diagram::from_rotation(rotation)?;
        let mut to_declared: Vec<Option<ArcId>> = vec![None; derived.arcs];
        let mut to_derived: Vec<Option<ArcId>> = vec![None; self.arcs];
        for (i, (d, x)) in derived.crossings.iter().zip(&self.crossings).enumerate() {
            for (a, b) in [(d.over, x.over), (d.under_in, x.under_in), (d.under_out, x.under_out)] {
                let fwd = *to_declared[a].get_or_insert(b);
                let back = *to_derived[b].get_or_insert(a);
                if fwd != b || back != a {
                    return Err(DiagramError::RotationMismatch(format!(
                        "crossing {i}: edge structure disagrees with arc {b}"
                    )));
                }
            }
        }
        if derived.arcs != self.arcs {
            return Err(DiagramError::RotationMismatch(format!(
                "rotation induces {} arcs, crossing list has {}",
                derived.arcs, self.arcs
            )));
        }
        let edge_arcs = derived.edge_arcs.iter().map(|&a| to_declared[a].expect("mapped")).collect();
        Ok(Diagram { rotation: derived.rotation, edge_arcs, ..self })
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn num_components(&self) -> usize {
        self.components
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing(&self, i: usize) -> Crossing {
        self.crossings[i]
    }

    pub fn rotation(&self) -> Option<&[[EdgeId; 4]]> {
        self.rotation.as_deref()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_arcs.len()
    }

    /// Arc containing an edge. Panics without a rotation system.
    pub fn arc_of_edge(&self, edge: EdgeId) -> ArcId {
        self.edge_arcs[edge]
    }

    pub fn edge_at(&self, dart: Dart) -> Option<EdgeId> {
        self.rotation.as_ref().map(|r| r[dart.crossing][dart.slot])
    }

    /// Whether the underlying 4-valent graph is connected.
    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.arcs);
        for x in &self.crossings {
            uf.union(x.over, x.under_in);
            uf.union(x.over, x.under_out);
        }
        uf.classes() == 1
    }

    /// The other end of the edge leaving through `dart`.
    pub fn twin(&self, dart: Dart) -> Result<Dart, DiagramError> {
        let rot = self.rotation.as_ref().ok_or(DiagramError::MissingRotation)?;
        let edge = rot[dart.crossing][dart.slot];
        for (c, r) in rot.iter().enumerate() {
            for (s, &e) in r.iter().enumerate() {
                if e == edge && (c, s) != (dart.crossing, dart.slot) {
                    return Ok(Dart::new(c, s));
                }
            }
        }
        unreachable!("every edge label occurs twice")
    }

    fn twin_table(rot: &[[EdgeId; 4]]) -> HashMap<Dart, Dart> {
        let mut first: HashMap<EdgeId, Dart> = HashMap::new();
        let mut twins = HashMap::new();
        for (c, r) in rot.iter().enumerate() {
            for (s, &e) in r.iter().enumerate() {
                let here = Dart::new(c, s);
                if let Some(there) = first.remove(&e) {
                    twins.insert(here, there);
                    twins.insert(there, here);
                } else {
                    first.insert(e, here);
                }
            }
        }
        twins
    }

    /// Faces of the embedding, each a cycle of darts with the face on the left.
    ///
    /// Faces are listed in order of their smallest dart, each starting there.
    pub fn faces(&self) -> Result<Vec<Vec<Dart>>, DiagramError> {
        let rot = self.rotation.as_ref().ok_or(DiagramError::MissingRotation)?;
        let twins = Self::twin_table(rot);
        let mut seen = vec![[false; 4]; rot.len()];
        let mut faces = Vec::new();
        for c in 0..rot.len() {
            for s in 0..4 {
                if seen[c][s] {
                    continue;
                }
                let mut face = Vec::new();
                let mut d = Dart::new(c, s);
                while !seen[d.crossing][d.slot] {
                    seen[d.crossing][d.slot] = true;
                    face.push(d);
                    let t = twins[&d];
                    d = Dart::new(t.crossing, (t.slot + 3) % 4);
                }
                faces.push(face);
            }
        }
        Ok(faces)
    }

    /// Traces faces and checks Euler's formula `V - E + F = 2`.
    pub fn validate_embedding(&self) -> Result<usize, DiagramError> {
        if self.crossings.is_empty() {
            return Err(DiagramError::NoCrossings);
        }
        if !self.is_connected() {
            return Err(DiagramError::Disconnected);
        }
        let faces = self.faces()?.len();
        let n = self.crossings.len() as i64;
        let euler = n - 2 * n + faces as i64;
        if euler != 2 {
            return Err(DiagramError::NonPlanar { faces, euler });
        }
        Ok(faces)
    }

    /// The two under-ends of every arc as `(crossing, is_under_in)`.
    fn under_ends(&self) -> Vec<Vec<(usize, bool)>> {
        let mut ends = vec![Vec::with_capacity(2); self.arcs];
        for (i, x) in self.crossings.iter().enumerate() {
            ends[x.under_in].push((i, true));
            ends[x.under_out].push((i, false));
        }
        ends
    }

    /// Walks the component of `start` arc by arc. The walk leaves `start`
    /// through the end where it is the incoming under-arc when `forward`,
    /// otherwise through the other end.
    ///
    /// Returns each visited arc with the crossing it is left through.
    pub fn tour(&self, start: ArcId, forward: bool) -> Vec<(ArcId, usize)> {
        let ends = self.under_ends();
        let Some(&first) = ends[start].iter().find(|e| e.1 == forward).or(ends[start].first()) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let (mut arc, mut exit) = (start, first);
        loop {
            out.push((arc, exit.0));
            let x = self.crossings[exit.0];
            let (next, entry) = if exit.1 { (x.under_out, (exit.0, false)) } else { (x.under_in, (exit.0, true)) };
            let e = &ends[next];
            exit = if e[0] == entry { e[1] } else { e[0] };
            arc = next;
            if (arc, exit) == (start, first) {
                return out;
            }
        }
    }

    /// Serializes to the line-oriented text format (see [`parse_diagram`]).
    pub fn to_text(&self) -> String {
        let mut s = format!("arcs={} components={}\n", self.arcs, self.components);
        for x in &self.crossings {
            s.push_str(&format!("C {} {} {}\n", x.over, x.under_in, x.under_out));
        }
        if let Some(rot) = &self.rotation {
            for (i, r) in rot.iter().enumerate() {
                s.push_str(&format!("R {} {} {} {} {}\n", i, r[0], r[1], r[2], r[3]));
            }
        }
        s
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses the diagram text format.
///
/// ```text
/// arcs=3 components=1
/// C 1 0 2          # over under_in under_out
/// C 2 1 0
/// C 0 2 1
/// R 0 0 3 1 4      # crossing, then four edge labels counterclockwise,
/// ...              # starting at the incoming under-edge
/// ```
///
/// The header is optional; without it the arc count is `1 + max id` and the
/// component count is computed. `#` starts a comment.
pub fn parse_diagram(text: &str) -> Result<Diagram, DiagramError> {
    let mut declared_arcs: Option<usize> = None;
    let mut declared_components: Option<usize> = None;
    let mut triples: Vec<(usize, [usize; 3])> = Vec::new();
    let mut rotation: Vec<(usize, usize, [EdgeId; 4])> = Vec::new();

    let number = |tok: &str, line: usize| -> Result<usize, DiagramError> {
        tok.parse::<usize>().map_err(|_| DiagramError::Malformed {
            line,
            message: format!("expected a nonnegative integer, found {tok:?}"),
        })
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        match head {
            "C" => {
                if rest.len() != 3 {
                    return Err(DiagramError::Malformed { line, message: "crossing needs 3 arc ids".into() });
                }
                let ids = [number(rest[0], line)?, number(rest[1], line)?, number(rest[2], line)?];
                triples.push((line, ids));
            }
            "R" => {
                if rest.len() != 5 {
                    return Err(DiagramError::Malformed {
                        line,
                        message: "rotation needs a crossing index and 4 edge labels".into(),
                    });
                }
                let c = number(rest[0], line)?;
                let e = [number(rest[1], line)?, number(rest[2], line)?, number(rest[3], line)?, number(rest[4], line)?];
                rotation.push((line, c, e));
            }
            _ if head.starts_with("arcs=") || head.starts_with("components=") => {
                for tok in std::iter::once(head).chain(rest.iter().copied()) {
                    let (key, value) = tok.split_once('=').ok_or_else(|| DiagramError::Malformed {
                        line,
                        message: format!("bad header field {tok:?}"),
                    })?;
                    let value = number(value, line)?;
                    match key {
                        "arcs" => declared_arcs = Some(value),
                        "components" => declared_components = Some(value),
                        _ => {
                            return Err(DiagramError::Malformed { line, message: format!("unknown header key {key:?}") })
                        }
                    }
                }
            }
            _ => return Err(DiagramError::Malformed { line, message: format!("unrecognized line {content:?}") }),
        }
    }

    let arcs = match declared_arcs {
        Some(a) => a,
        None => triples.iter().flat_map(|(_, t)| t.iter()).max().map_or(1, |m| m + 1),
    };
    for (line, t) in &triples {
        if let Some(&arc) = t.iter().find(|&&a| a >= arcs) {
            return Err(DiagramError::ArcOutOfRange { line: *line, arc, arcs });
        }
    }

    // Sorted reindex of the ids actually used.
    let mut used: Vec<usize> = triples.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let crossings: Vec<Crossing> = if triples.is_empty() {
        Vec::new()
    } else {
        if used.len() != arcs {
            let missing = (0..arcs).find(|a| used.binary_search(a).is_err()).unwrap_or(0);
            return Err(DiagramError::ArcIncidence { arc: missing, count: 0 });
        }
        triples.iter().map(|(_, t)| Crossing::new(t[0], t[1], t[2])).collect()
    };

    let mut diagram = Diagram::from_crossings(arcs, crossings)?;
    if let Some(c) = declared_components {
        if c != diagram.components {
            return Err(DiagramError::ComponentMismatch { declared: c, actual: diagram.components });
        }
    }
    if !rotation.is_empty() {
        let n = diagram.num_crossings();
        let mut ordered: Vec<Option<[EdgeId; 4]>> = vec![None; n];
        for (line, c, e) in rotation {
            if c >= n || ordered[c].is_some() {
                return Err(DiagramError::Malformed {
                    line,
                    message: format!("rotation for crossing {c} is out of range or repeated"),
                });
            }
            ordered[c] = Some(e);
        }
        let ordered: Option<Vec<[EdgeId; 4]>> = ordered.into_iter().collect();
        let ordered = ordered.ok_or_else(|| DiagramError::RotationMismatch("some crossings lack a rotation".into()))?;
        diagram = diagram.with_rotation(ordered)?;
    }
    Ok(diagram)
}

/// A braid word on `strands` strands; letter `±i` is the generator
/// `σ_i^{±1}` crossing positions `i` and `i + 1` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<i32>) -> Result<Self, DiagramError> {
        if strands < 2 {
            return Err(DiagramError::Braid(format!("need at least 2 strands, got {strands}")));
        }
        if letters.is_empty() {
            return Err(DiagramError::Braid("empty braid word".into()));
        }
        for &l in &letters {
            if l == 0 {
                return Err(DiagramError::Braid("zero is not a generator".into()));
            }
            if l.unsigned_abs() as usize >= strands {
                return Err(DiagramError::Braid(format!("generator {l} needs more than {strands} strands")));
            }
        }
        Ok(BraidWord { strands, letters })
    }

    /// The identity braid. Its closure is an unlink and cannot be drawn as a
    /// crossing diagram, so [`braid_closure`] rejects it.
    pub fn identity(strands: usize) -> Self {
        BraidWord { strands: strands.max(2), letters: Vec::new() }
    }

    /// `(σ_{r-1} ⋯ σ_1)^s` on `r` strands: the standard torus link word.
    pub fn torus(strands: usize, power: usize) -> Result<Self, DiagramError> {
        let pass: Vec<i32> = (1..strands as i32).rev().collect();
        Self::new(strands, pass.repeat(power))
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// Strand permutation cycles = components of the closure.
    pub fn closure_components(&self) -> usize {
        let mut perm: Vec<usize> = (0..self.strands).collect();
        for &l in &self.letters {
            let i = l.unsigned_abs() as usize - 1;
            perm.swap(i, i + 1);
        }
        let mut seen = vec![false; self.strands];
        let mut cycles = 0;
        for s in 0..self.strands {
            if !seen[s] {
                cycles += 1;
                let mut c = s;
                while !seen[c] {
                    seen[c] = true;
                    c = perm[c];
                }
            }
        }
        cycles
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "strands={}", self.strands)?;
        for l in &self.letters {
            write!(f, " {l}")?;
        }
        Ok(())
    }
}

/// Parses `"[strands=r] l1 l2 ..."`; without the header `r = 1 + max |l|`.
pub fn parse_braid(text: &str) -> Result<BraidWord, DiagramError> {
    let mut strands = None;
    let mut letters = Vec::new();
    for tok in text.split_whitespace() {
        if let Some(v) = tok.strip_prefix("strands=") {
            let r = v.parse::<usize>().map_err(|_| DiagramError::Braid(format!("bad strand count {v:?}")))?;
            strands = Some(r);
        } else {
            let l = tok.parse::<i32>().map_err(|_| DiagramError::Braid(format!("bad letter {tok:?}")))?;
            if l == 0 {
                return Err(DiagramError::Braid("zero is not a generator".into()));
            }
            letters.push(l);
        }
    }
    let strands = strands.unwrap_or_else(|| 1 + letters.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(1));
    BraidWord::new(strands, letters)
}

/// Closes a braid into a planar diagram.
///
/// Strands run downward. For `σ_i` the strand entering at position `i + 1`
/// passes over to position `i`; for `σ_i^{-1}` the strand entering at `i`
/// passes over. In `(σ_{r-1} ⋯ σ_1)^s` the strand travelling from the right
/// edge to the left edge of each pass is therefore a bridge over `r - 1`
/// crossings. Crossing `t` of the result is letter `t` of the word.
pub fn braid_closure(word: &BraidWord) -> Result<Diagram, DiagramError> {
    let r = word.strands;
    let mut touched = vec![false; r];
    let mut position: Vec<EdgeId> = (0..r).collect();
    let mut next = r;
    let mut rotation = Vec::with_capacity(word.letters.len());
    for &l in &word.letters {
        let i = l.unsigned_abs() as usize - 1;
        touched[i] = true;
        touched[i + 1] = true;
        let (tl, tr) = (position[i], position[i + 1]);
        let (bl, br) = (next, next + 1);
        next += 2;
        // counterclockwise from the incoming under-edge
        rotation.push(if l > 0 { [tl, bl, br, tr] } else { [tr, tl, bl, br] });
        position[i] = bl;
        position[i + 1] = br;
    }
    if let Some(idle) = touched.iter().position(|t| !t) {
        return Err(DiagramError::Braid(format!("strand {} takes part in no crossing", idle + 1)));
    }
    // Close up: bottom of position j is the top of position j.
    let closing: HashMap<EdgeId, EdgeId> = position.iter().enumerate().map(|(j, &e)| (e, j)).collect();
    for r in rotation.iter_mut() {
        for e in r.iter_mut() {
            if let Some(&top) = closing.get(e) {
                *e = top;
            }
        }
    }
    Diagram::from_rotation(rotation).map_err(|e| match e {
        DiagramError::OverOnlyComponent => {
            DiagramError::Braid("closure has a component that never passes under".into())
        }
        other => other,
    })
}
