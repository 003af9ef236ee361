//! Generators for Schubert normal forms of 2-bridge links and for torus
//! braid closures, with their prescribed colorings.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{solve_colorings, Coloring, ColoringError};
use crate::diagram::{braid_closure, ArcId, BraidWord, Diagram, DiagramError, EdgeId};
use crate::linalg::gcd;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("b({p},{q}) needs p >= 2, 0 < q < p and gcd(p, q) = 1")]
    InvalidRational { p: u64, q: u64 },
    #[error("bridge colors ({left}, {right}) violate {p}·(b_l - b_r) = 0 mod {modulus}")]
    InconsistentBridges { p: u64, left: u64, right: u64, modulus: u64 },
    #[error("torus parameters need k, l >= 1")]
    InvalidTorus,
    #[error("no prescribed coloring for {0}")]
    NoPrescribedColoring(TorusFamily),
    #[error("cannot parse descriptor {0:?}")]
    BadDescriptor(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// Names a Schubert normal form `b(p, q)` and its two bridge arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfDescriptor {
    pub p: u64,
    pub q: u64,
    pub bridge_left: ArcId,
    pub bridge_right: ArcId,
}

impl fmt::Display for SnfDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "snf {}/{}", self.p, self.q)
    }
}

/// Parses `"p/q"` or `"snf p/q"`.
pub fn parse_rational(text: &str) -> Result<(u64, u64), FamilyError> {
    let body = text.trim().trim_start_matches("snf").trim();
    let (p, q) = body.split_once('/').ok_or_else(|| FamilyError::BadDescriptor(text.into()))?;
    let p = p.trim().parse().map_err(|_| FamilyError::BadDescriptor(text.into()))?;
    let q = q.trim().parse().map_err(|_| FamilyError::BadDescriptor(text.into()))?;
    Ok((p, q))
}

/// The rays at a crossing of the normal form, in counterclockwise order:
/// backward along the under-strand, forward along the bridge, forward along
/// the under-strand, backward along the bridge.
const UNDER_BACK: usize = 0;
const BRIDGE_FWD: usize = 1;
const UNDER_FWD: usize = 2;
const BRIDGE_BACK: usize = 3;

/// A crossing met while walking an under-strand.
#[derive(Debug, Clone, Copy)]
struct Underpass {
    key: (usize, u64),
    /// Whether the strand direction agrees with the crossing's local frame.
    aligned: bool,
}

/// Builds the Schubert normal form of `b(p, q)`.
///
/// The picture is the pillowcase: the two bridges are its two horizontal
/// edges and the two under-strands are the images of the lattice segments of
/// direction `(q, p)` starting at the corners. Strand `j` of a segment
/// (`j = 1..p-1`) meets height `j`, so it alternates between the bridges, and
/// sits at position `m/p` along the bridge where `m` is `j·q` (shifted by the
/// start corner) folded into `1..p-1`.
pub fn rational_snf(p: u64, q: u64) -> Result<(Diagram, SnfDescriptor), FamilyError> {
    if p < 2 || q == 0 || q >= p || gcd(p as u128, q as u128) != 1 {
        return Err(FamilyError::InvalidRational { p, q });
    }
    // Corners are (x mod 2, y mod 2); bridge b joins (0, b) to (1, b).
    let first_start = (0u64, 0u64);
    let first_end = (q % 2, p % 2);
    let second_start = if first_end == (1, 0) { (0, 1) } else { (1, 0) };
    let second_end = ((second_start.0 + q) % 2, (second_start.1 + p) % 2);
    let strand_ends = [(first_start, first_end), (second_start, second_end)];

    let underpasses: Vec<Vec<Underpass>> = strand_ends
        .iter()
        .map(|&((sx, sy), _)| {
            (1..p)
                .map(|j| {
                    let bridge = ((sy + j) % 2) as usize;
                    let r = (sx * p + j * q) % (2 * p);
                    let (m, aligned) = if r < p { (r, true) } else { (2 * p - r, false) };
                    Underpass { key: (bridge, m), aligned }
                })
                .collect()
        })
        .collect();

    let mut keys: Vec<(usize, u64)> = underpasses.iter().flatten().map(|u| u.key).collect();
    keys.sort_unstable();
    let index: HashMap<(usize, u64), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    assert_eq!(index.len(), keys.len(), "underpasses are distinct");
    let on_bridge: [Vec<u64>; 2] = [0, 1].map(|b| keys.iter().filter(|k| k.0 == b).map(|k| k.1).collect());

    let mut rays: Vec<[Option<EdgeId>; 4]> = vec![[None; 4]; keys.len()];
    let mut next_edge: EdgeId = 0;

    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Segment {
        Strand { which: usize, forward: bool },
        Bridge { which: usize, increasing: bool },
    }

    let corner_strand = |c: (u64, u64)| -> Segment {
        for (which, &(s, e)) in strand_ends.iter().enumerate() {
            if s == c {
                return Segment::Strand { which, forward: true };
            }
            if e == c {
                return Segment::Strand { which, forward: false };
            }
        }
        unreachable!("every corner ends a strand")
    };

    let mut visited = [false; 2];
    for start in 0..2 {
        if visited[start] {
            continue;
        }
        let first_edge = next_edge;
        let mut current = next_edge;
        next_edge += 1;
        let opening = Segment::Strand { which: start, forward: true };
        let mut seg = opening;
        loop {
            let arrive_at = match seg {
                Segment::Strand { which, forward } => {
                    visited[which] = true;
                    let passes: Vec<Underpass> = if forward {
                        underpasses[which].clone()
                    } else {
                        underpasses[which].iter().rev().copied().collect()
                    };
                    for u in passes {
                        let x = index[&u.key];
                        let (arrive, depart) =
                            if u.aligned == forward { (UNDER_BACK, UNDER_FWD) } else { (UNDER_FWD, UNDER_BACK) };
                        rays[x][arrive] = Some(current);
                        current = next_edge;
                        next_edge += 1;
                        rays[x][depart] = Some(current);
                    }
                    let (s, e) = strand_ends[which];
                    let corner = if forward { e } else { s };
                    // the bridge ending at this corner, walked away from it
                    Segment::Bridge { which: corner.1 as usize, increasing: corner.0 == 0 }
                }
                Segment::Bridge { which, increasing } => {
                    let positions: Vec<u64> = if increasing {
                        on_bridge[which].clone()
                    } else {
                        on_bridge[which].iter().rev().copied().collect()
                    };
                    for m in positions {
                        let x = index[&(which, m)];
                        let (arrive, depart) =
                            if increasing { (BRIDGE_BACK, BRIDGE_FWD) } else { (BRIDGE_FWD, BRIDGE_BACK) };
                        rays[x][arrive] = Some(current);
                        current = next_edge;
                        next_edge += 1;
                        rays[x][depart] = Some(current);
                    }
                    let corner = (if increasing { 1 } else { 0 }, which as u64);
                    corner_strand(corner)
                }
            };
            if arrive_at == opening {
                break;
            }
            seg = arrive_at;
        }
        // the last edge closes up onto the first
        for r in rays.iter_mut().flatten() {
            if *r == Some(current) {
                *r = Some(first_edge);
            }
        }
    }

    let rotation: Vec<[EdgeId; 4]> =
        rays.iter().map(|r| r.map(|e| e.expect("every ray is assigned"))).collect();
    let diagram = Diagram::from_rotation(rotation)?;
    let bridge_arc = |which: usize| {
        let x = index[&(which, on_bridge[which][0])];
        diagram.crossing(x).over
    };
    let descriptor = SnfDescriptor { p, q, bridge_left: bridge_arc(0), bridge_right: bridge_arc(1) };
    Ok((diagram, descriptor))
}

/// Colors along the walk that starts on the left bridge, one entry per arc
/// visited; used for both the coloring and its propagation order.
pub fn snf_tour_colors(s: &SnfDescriptor, d: &Diagram, left: u64, right: u64, n: u64) -> Vec<(ArcId, u64)> {
    let n = n as u128;
    let mut out = Vec::new();
    let mut known: HashMap<ArcId, u64> = HashMap::from([(s.bridge_left, left % n as u64), (s.bridge_right, right % n as u64)]);
    for start in [s.bridge_left, s.bridge_right] {
        if out.iter().any(|&(a, _)| a == start) {
            continue;
        }
        let mut color = known[&start];
        for (arc, exit) in d.tour(start, true) {
            if let Some(&k) = known.get(&arc) {
                color = k;
            }
            known.insert(arc, color);
            out.push((arc, color));
            let x = d.crossing(exit);
            let over = known.get(&x.over).copied().expect("over-arcs are bridges");
            color = ((2 * over as u128 + n - color as u128 % n) % n) as u64;
        }
    }
    out
}

/// Colors an SNF from its two bridge colors by propagating under the bridges.
pub fn snf_bridge_coloring(
    s: &SnfDescriptor,
    d: &Diagram,
    left: u64,
    right: u64,
    n: u64,
) -> Result<Coloring, FamilyError> {
    if n == 0 {
        return Err(ColoringError::ZeroModulus.into());
    }
    let (l, r) = (left % n, right % n);
    let diff = (l as u128 + n as u128 - r as u128) % n as u128;
    if !(s.p as u128 * diff).is_multiple_of(n as u128) {
        return Err(FamilyError::InconsistentBridges { p: s.p, left, right, modulus: n });
    }
    let mut colors = vec![None; d.num_arcs()];
    for (arc, c) in snf_tour_colors(s, d, l, r, n) {
        colors[arc] = Some(c);
    }
    let colors: Vec<u64> = colors.into_iter().map(|c| c.expect("tours cover the diagram")).collect();
    Ok(Coloring::on(d, n, colors)?)
}

/// The three torus-closure families, with `k, l >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TorusFamily {
    /// Closure of `(σ_{2l-1} ⋯ σ_1)^{2k+1}`, the torus link `T(2l, 2k+1)`.
    EvenStrandsOddPower,
    /// Closure of `(σ_{2k} ⋯ σ_1)^{2l}`, the torus link `T(2k+1, 2l)`.
    OddStrandsEvenPower,
    /// Closure of `(σ_{2k-1} ⋯ σ_1)^{2l}`, the torus link `T(2k, 2l)`.
    EvenStrandsEvenPower,
}

impl TorusFamily {
    pub fn number(self) -> u8 {
        match self {
            TorusFamily::EvenStrandsOddPower => 1,
            TorusFamily::OddStrandsEvenPower => 2,
            TorusFamily::EvenStrandsEvenPower => 3,
        }
    }
}

impl fmt::Display for TorusFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorusFamily::EvenStrandsOddPower => "even-strands-odd-power",
            TorusFamily::OddStrandsEvenPower => "odd-strands-even-power",
            TorusFamily::EvenStrandsEvenPower => "even-strands-even-power",
        })
    }
}

impl FromStr for TorusFamily {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, FamilyError> {
        match s {
            "1" | "even-strands-odd-power" => Ok(TorusFamily::EvenStrandsOddPower),
            "2" | "odd-strands-even-power" => Ok(TorusFamily::OddStrandsEvenPower),
            "3" | "even-strands-even-power" => Ok(TorusFamily::EvenStrandsEvenPower),
            _ => Err(FamilyError::BadDescriptor(s.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusParams {
    pub family: TorusFamily,
    pub k: u64,
    pub l: u64,
}

impl TorusParams {
    pub fn new(family: TorusFamily, k: u64, l: u64) -> Result<Self, FamilyError> {
        if k == 0 || l == 0 {
            return Err(FamilyError::InvalidTorus);
        }
        Ok(TorusParams { family, k, l })
    }

    /// `(strands, power)` of the torus braid word.
    pub fn shape(&self) -> (usize, usize) {
        let (k, l) = (self.k as usize, self.l as usize);
        match self.family {
            TorusFamily::EvenStrandsOddPower => (2 * l, 2 * k + 1),
            TorusFamily::OddStrandsEvenPower => (2 * k + 1, 2 * l),
            TorusFamily::EvenStrandsEvenPower => (2 * k, 2 * l),
        }
    }

    pub fn word(&self) -> BraidWord {
        let (r, s) = self.shape();
        BraidWord::torus(r, s).expect("k, l >= 1 give a valid torus word")
    }

    /// Modulus of the family's coloring statement: `2k+1` for the first two
    /// families, `2kl` for the third.
    pub fn modulus(&self) -> u64 {
        match self.family {
            TorusFamily::EvenStrandsEvenPower => 2 * self.k * self.l,
            _ => 2 * self.k + 1,
        }
    }
}

impl fmt::Display for TorusParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "torus {} {} {}", self.family.number(), self.k, self.l)
    }
}

impl FromStr for TorusParams {
    type Err = FamilyError;

    /// Parses `"torus <family> k l"` or `"<family> k l"`.
    fn from_str(s: &str) -> Result<Self, FamilyError> {
        let toks: Vec<&str> = s.split_whitespace().filter(|t| *t != "torus").collect();
        let bad = || FamilyError::BadDescriptor(s.into());
        let [family, k, l] = toks.as_slice() else { return Err(bad()) };
        let k = k.parse().map_err(|_| bad())?;
        let l = l.parse().map_err(|_| bad())?;
        TorusParams::new(family.parse()?, k, l)
    }
}

pub fn torus_diagram(t: &TorusParams) -> Diagram {
    braid_closure(&t.word()).expect("torus words close to valid diagrams")
}

/// Colors the closure of `word` from the colors entering at the top of the
/// braid, following [`braid_closure`]'s crossing conventions. Fails if the
/// colors leaving at the bottom differ from the top.
pub fn braid_coloring(word: &BraidWord, d: &Diagram, top: &[u64], n: u64) -> Result<Coloring, ColoringError> {
    if n == 0 {
        return Err(ColoringError::ZeroModulus);
    }
    let reflect = |over: u64, under: u64| ((2 * over as u128 + n as u128 - under as u128) % n as u128) as u64;
    let mut state: Vec<u64> = top.iter().map(|c| c % n).collect();
    let mut colors: Vec<Option<u64>> = vec![None; d.num_arcs()];
    let mut assign = |arc: ArcId, c: u64, crossing: usize| -> Result<(), ColoringError> {
        match colors[arc] {
            Some(old) if old != c => Err(ColoringError::Invalid { crossing }),
            _ => {
                colors[arc] = Some(c);
                Ok(())
            }
        }
    };
    for (t, &letter) in word.letters().iter().enumerate() {
        let i = letter.unsigned_abs() as usize - 1;
        let (tl, tr) = (state[i], state[i + 1]);
        let x = d.crossing(t);
        let (over, under_in, under_out) = if letter > 0 { (tr, tl, reflect(tr, tl)) } else { (tl, tr, reflect(tl, tr)) };
        assign(x.over, over, t)?;
        assign(x.under_in, under_in, t)?;
        assign(x.under_out, under_out, t)?;
        if letter > 0 {
            state[i] = over;
            state[i + 1] = under_out;
        } else {
            state[i] = under_out;
            state[i + 1] = over;
        }
    }
    if state.iter().zip(top).any(|(a, b)| *a != b % n) {
        return Err(ColoringError::Invalid { crossing: word.letters().len().saturating_sub(1) });
    }
    let colors = colors.into_iter().map(|c| c.expect("every arc meets a crossing")).collect();
    Coloring::on(d, n, colors)
}

/// The surjective `(2k+1)`-coloring of the first two families.
///
/// Family 1 enters with `0, 1, 0, 1, …` on its `2l` strands; every pass then
/// shifts all colors by one, so `2k+1` passes close up and each color lands
/// on exactly `2l - 1` arcs. Family 2 enters with `1, 2, …, 2k, 0`; one pass
/// turns this into `0, 2k, …, 2, 1` and the next pass restores it.
pub fn torus_theorem5_coloring(t: &TorusParams) -> Result<Coloring, FamilyError> {
    let n = t.modulus();
    let (strands, _) = t.shape();
    let top: Vec<u64> = match t.family {
        TorusFamily::EvenStrandsOddPower => (0..strands as u64).map(|i| i % 2).collect(),
        TorusFamily::OddStrandsEvenPower => (1..=strands as u64).map(|i| i % n).collect(),
        TorusFamily::EvenStrandsEvenPower => return Err(FamilyError::NoPrescribedColoring(t.family)),
    };
    let d = torus_diagram(t);
    Ok(braid_coloring(&t.word(), &d, &top, n)?)
}

/// Searches every coloring of `d` mod `n` for one that uses all `n` colors.
pub fn search_full_palette(d: &Diagram, n: u64, cap: u128) -> Result<Option<Coloring>, FamilyError> {
    let space = solve_colorings(d, n)?;
    if d.num_arcs() < n as usize {
        return Ok(None);
    }
    Ok(space.colorings(cap)?.find(|c| c.palette_size() == n as usize))
}
