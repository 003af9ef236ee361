//! Color-raising diagram moves: affine renormalization of a coloring and the
//! type-II "finger" move that inserts one new color, iterated to realize every
//! palette size up to the modulus.

use std::collections::BTreeSet;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::coloring::{Coloring, ColoringError};
use crate::diagram::{Dart, Diagram, DiagramError, EdgeId};
use crate::linalg::{gcd, mod_inverse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("crossing {crossing}: difference {difference} is not invertible mod {modulus} (gcd {gcd})")]
    NotInvertible { crossing: usize, difference: u64, modulus: u64, gcd: u64 },
    #[error("crossing {0} does not carry three distinct colors")]
    NotDistinct(usize),
    #[error("crossing {0} out of range")]
    NoSuchCrossing(usize),
    #[error("the move needs a rotation system")]
    MissingRotation,
    #[error("darts {cut:?} and {push:?} do not bound a common face")]
    NotCofacial { cut: Dart, push: Dart },
    #[error("site colors do not match the expected (k, k+1, k+2) pattern: {0}")]
    BadSite(String),
    #[error("coloring is trivial; nothing to expand")]
    Trivial,
    #[error("coloring is mod {found}, requested mod {expected}")]
    ModulusMismatch { expected: u64, found: u64 },
    #[error("no crossing admits the move mod {modulus}: {}", describe(.obstructions))]
    Obstructed { modulus: u64, obstructions: Vec<Obstruction> },
    #[error("spectrum run did not reach {modulus} colors within {steps} moves")]
    Stalled { modulus: u64, steps: usize },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// Why a crossing with three distinct colors cannot be normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub crossing: usize,
    pub difference: u64,
    pub gcd: u64,
}

fn describe(obstructions: &[Obstruction]) -> String {
    match obstructions {
        [] => "no crossing carries three distinct colors".into(),
        [o] => format!("crossing {} has b-a = {}, sharing the factor {} with the modulus", o.crossing, o.difference, o.gcd),
        [o, rest @ ..] => format!(
            "{} crossings carry three distinct colors, all with non-invertible b-a (first: crossing {}, b-a = {}, sharing the factor {} with the modulus)",
            rest.len() + 1,
            o.crossing,
            o.difference,
            o.gcd
        ),
    }
}

fn sub_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 + n as u128 - b as u128 % n as u128) % n as u128) as u64
}

fn reflect(over: u64, under: u64, n: u64) -> u64 {
    ((2 * over as u128 + n as u128 - under as u128 % n as u128) % n as u128) as u64
}

/// Colors `(a, b, c)` of a crossing's incoming under-arc, over-arc and
/// outgoing under-arc.
pub fn crossing_colors(d: &Diagram, c: &Coloring, crossing: usize) -> Result<(u64, u64, u64), MoveError> {
    if crossing >= d.num_crossings() {
        return Err(MoveError::NoSuchCrossing(crossing));
    }
    let x = d.crossing(crossing);
    Ok((c.color(x.under_in), c.color(x.over), c.color(x.under_out)))
}

/// Applies `x -> (x - a)·(b - a)^{-1}` to every arc, where `a` and `b` are the
/// colors of the site's incoming under-arc and over-arc. The site then reads
/// `(0, 1, 2)`.
pub fn normalize_affine(d: &Diagram, c: &Coloring, site: usize) -> Result<Coloring, MoveError> {
    let n = c.modulus();
    let (a, b, _) = crossing_colors(d, c, site)?;
    let difference = sub_mod(b, a, n);
    let inv = mod_inverse(difference, n).ok_or(MoveError::NotInvertible {
        crossing: site,
        difference,
        modulus: n,
        gcd: gcd(difference as u128, n as u128) as u64,
    })?;
    let shift = ((n as u128 - a as u128) * inv as u128 % n as u128) as u64;
    let out = c.affine(inv, shift);
    out.check(d)?;
    Ok(out)
}

/// Where the next type-II move happens.
///
/// `cut` is a dart along an edge of the arc colored `k+1` and `push` a dart
/// along an edge of the arc colored `k+2`, both with the same face on their
/// left. The move drags the `push` strand across the face and over the `cut`
/// edge; the piece of the cut arc between the two new crossings gets the color
/// `2(k+2) - (k+1) = k+3`. `crossing` is where the `(k, k+1, k+2)` pattern sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MoveSite {
    pub crossing: usize,
    pub cut: Dart,
    pub push: Dart,
}

/// The first site at a normalized crossing colored `(0, 1, 2)`: the over-arc
/// (color 1) is cut and the under-arc colored 2 is pushed across the face in
/// the corner between them.
pub fn initial_site(d: &Diagram, c: &Coloring, crossing: usize) -> Result<MoveSite, MoveError> {
    let rot = d.rotation().ok_or(MoveError::MissingRotation)?;
    let n = c.modulus();
    let (_, b, _) = crossing_colors(d, c, crossing)?;
    let target = (b + 1) % n;
    let slot = [0, 2]
        .into_iter()
        .find(|&s| c.color(d.arc_of_edge(rot[crossing][s])) == target)
        .ok_or_else(|| MoveError::BadSite(format!("crossing {crossing} has no under-arc colored {target}")))?;
    let cut = d.twin(Dart::new(crossing, (slot + 1) % 4))?;
    Ok(MoveSite { crossing, cut, push: Dart::new(crossing, slot) })
}

fn check_site(d: &Diagram, c: &Coloring, site: &MoveSite) -> Result<(EdgeId, EdgeId), MoveError> {
    let n = c.modulus();
    let x = d.edge_at(site.cut).ok_or(MoveError::MissingRotation)?;
    let y = d.edge_at(site.push).ok_or(MoveError::MissingRotation)?;
    let (u, v) = (c.color(d.arc_of_edge(x)), c.color(d.arc_of_edge(y)));
    let (a, b, cc) = crossing_colors(d, c, site.crossing)?;
    let other = reflect(u, v, n);
    let unders: BTreeSet<u64> = [a, cc].into();
    if u == v || b != u || unders != BTreeSet::from([v, other]) {
        return Err(MoveError::BadSite(format!(
            "cut color {u}, push color {v}, crossing {} colored ({a}, {b}, {cc})",
            site.crossing
        )));
    }
    let faces = d.faces()?;
    if !faces.iter().any(|f| f.contains(&site.cut) && f.contains(&site.push)) {
        return Err(MoveError::NotCofacial { cut: site.cut, push: site.push });
    }
    Ok((x, y))
}

/// Performs the color-inserting type-II move at `site`.
///
/// Returns the new diagram (two more crossings and arcs), its coloring, and
/// the site for the following move, which sits in the bigon just created.
pub fn r2_expand(d: &Diagram, c: &Coloring, site: &MoveSite) -> Result<(Diagram, Coloring, MoveSite), MoveError> {
    let (x, y) = check_site(d, c, site)?;
    let n = c.modulus();
    let mut rot: Vec<[EdgeId; 4]> = d.rotation().ok_or(MoveError::MissingRotation)?.to_vec();
    let old_crossings = rot.len();
    let far_x = d.twin(site.cut)?;
    let far_y = d.twin(site.push)?;

    let e = d.num_edges();
    let (x1, x_mid, x2) = (x, e, e + 1);
    let (y1, y_mid, y2) = (y, e + 2, e + 3);
    rot[far_x.crossing][far_x.slot] = x2;
    rot[far_y.crossing][far_y.slot] = y2;
    let p = old_crossings;
    let q = old_crossings + 1;
    rot.push([x_mid, y_mid, x2, y1]);
    rot.push([x1, y_mid, x_mid, y2]);

    let (u, v) = (c.color(d.arc_of_edge(x)), c.color(d.arc_of_edge(y)));
    let mut edge_colors: Vec<u64> = (0..e).map(|k| c.color(d.arc_of_edge(k))).collect();
    edge_colors.extend([reflect(v, u, n), u, v, v]);

    let nd = Diagram::from_rotation(rot)?;
    let mut colors = vec![None; nd.num_arcs()];
    for (edge, &col) in edge_colors.iter().enumerate() {
        let slot = &mut colors[nd.arc_of_edge(edge)];
        debug_assert!(slot.is_none_or(|old| old == col), "edges of one arc share a color");
        *slot = Some(col);
    }
    let colors: Vec<u64> = colors.into_iter().map(|k| k.expect("every arc has an edge")).collect();
    let nc = Coloring::on(&nd, n, colors)?;
    nd.validate_embedding()?;
    let next = MoveSite { crossing: q, cut: Dart::new(q, 1), push: Dart::new(p, 0) };
    Ok((nd, nc, next))
}

/// One diagram and coloring along a spectrum run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumRecord {
    pub diagram: Diagram,
    pub coloring: Coloring,
    pub palette_size: usize,
}

impl Serialize for SpectrumRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SpectrumRecord", 3)?;
        st.serialize_field("palette_size", &self.palette_size)?;
        st.serialize_field("crossings", &self.diagram.num_crossings())?;
        st.serialize_field("coloring", &self.coloring)?;
        st.end()
    }
}

/// The diagrams and colorings produced while raising the palette to the full
/// modulus, starting from the normalized input coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumTrace {
    pub modulus: u64,
    /// Crossing the run was anchored at.
    pub site: usize,
    pub records: Vec<SpectrumRecord>,
}

impl SpectrumTrace {
    pub fn sizes(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.palette_size).collect()
    }

    /// The set of achieved palette sizes.
    pub fn spectrum(&self) -> BTreeSet<usize> {
        self.records.iter().map(|r| r.palette_size).collect()
    }

    /// Largest palette in the trace.
    pub fn max_palette(&self) -> usize {
        self.records.iter().map(|r| r.palette_size).max().unwrap_or(0)
    }

    /// Sizes never drop, never jump by two or more, and end at the modulus.
    pub fn is_contiguous(&self) -> bool {
        let sizes = self.sizes();
        sizes.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
            && sizes.last().is_some_and(|&s| s as u64 == self.modulus)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.records).expect("records serialize")
    }
}

/// Lowest crossing whose colors are distinct with an invertible difference,
/// or every reason why none qualifies.
pub fn eligible_crossing(d: &Diagram, c: &Coloring) -> Result<usize, MoveError> {
    let n = c.modulus();
    let mut obstructions = Vec::new();
    for i in 0..d.num_crossings() {
        let (a, b, cc) = crossing_colors(d, c, i)?;
        if a == b || b == cc || a == cc {
            continue;
        }
        let difference = sub_mod(b, a, n);
        let g = gcd(difference as u128, n as u128) as u64;
        if g == 1 {
            return Ok(i);
        }
        obstructions.push(Obstruction { crossing: i, difference, gcd: g });
    }
    Err(MoveError::Obstructed { modulus: n, obstructions })
}

/// Raises the palette of `c` one color at a time until all `p` colors are
/// used, recording every intermediate diagram and coloring.
pub fn realize_spectrum(d: &Diagram, c: &Coloring, p: u64) -> Result<SpectrumTrace, MoveError> {
    if c.modulus() != p {
        return Err(MoveError::ModulusMismatch { expected: p, found: c.modulus() });
    }
    c.check(d)?;
    if c.is_trivial() {
        return Err(MoveError::Trivial);
    }
    if d.rotation().is_none() {
        return Err(MoveError::MissingRotation);
    }
    let anchor = eligible_crossing(d, c)?;
    let mut coloring = normalize_affine(d, c, anchor)?;
    let mut diagram = d.clone();
    let mut records = vec![SpectrumRecord {
        diagram: diagram.clone(),
        coloring: coloring.clone(),
        palette_size: coloring.palette_size(),
    }];
    let mut site = initial_site(&diagram, &coloring, anchor)?;
    let mut steps = 0;
    while (coloring.palette_size() as u64) < p {
        if steps as u64 >= p {
            return Err(MoveError::Stalled { modulus: p, steps });
        }
        let (nd, nc, next) = r2_expand(&diagram, &coloring, &site)?;
        steps += 1;
        records.push(SpectrumRecord { diagram: nd.clone(), coloring: nc.clone(), palette_size: nc.palette_size() });
        diagram = nd;
        coloring = nc;
        site = next;
    }
    Ok(SpectrumTrace { modulus: p, site: anchor, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{braid_closure, parse_braid};

    fn closure(text: &str) -> Diagram {
        braid_closure(&parse_braid(text).unwrap()).unwrap()
    }

    #[test]
    fn affine_normalization_mod_7() {
        let d = closure("1 1 1 1 1 1 1");
        // every nontrivial 7-coloring of T(2,7); pick one with (a, b) = (3, 5) at crossing 0
        let x = d.crossing(0);
        let space = crate::coloring::solve_colorings(&d, 7).unwrap();
        let c = space
            .colorings(1000)
            .unwrap()
            .find(|c| c.color(x.under_in) == 3 && c.color(x.over) == 5)
            .unwrap();
        assert_eq!(c.color(x.under_out), 0);
        let nc = normalize_affine(&d, &c, 0).unwrap();
        assert_eq!(crossing_colors(&d, &nc, 0).unwrap(), (0, 1, 2));
        assert_eq!(nc.palette_size(), c.palette_size());
        // already normalized: identity
        assert_eq!(normalize_affine(&d, &nc, 0).unwrap(), nc);
    }

    #[test]
    fn non_invertible_difference_is_reported() {
        let d = closure("1 1 1 1 1 1 1 1 1 1 1 1");
        let x = d.crossing(0);
        let space = crate::coloring::solve_colorings(&d, 9).unwrap();
        let c = space
            .colorings(100_000)
            .unwrap()
            .find(|c| c.color(x.under_in) == 0 && c.color(x.over) == 3)
            .unwrap();
        let err = normalize_affine(&d, &c, 0).unwrap_err();
        assert!(matches!(err, MoveError::NotInvertible { difference: 3, gcd: 3, .. }), "{err}");
        assert!(matches!(realize_spectrum(&d, &c, 9), Err(MoveError::Obstructed { .. })));
    }

    #[test]
    fn one_move_adds_a_color() {
        let d = closure("1 1 1 1 1");
        let c = crate::coloring::enumerate_nontrivial(&d, 5, 100).unwrap().next().unwrap();
        let anchor = eligible_crossing(&d, &c).unwrap();
        let c = normalize_affine(&d, &c, anchor).unwrap();
        let site = initial_site(&d, &c, anchor).unwrap();
        let (nd, nc, next) = r2_expand(&d, &c, &site).unwrap();
        assert_eq!(nd.num_crossings(), d.num_crossings() + 2);
        assert_eq!(nd.num_arcs(), d.num_arcs() + 2);
        assert!(nc.is_valid_on(&nd));
        assert!(nc.palette().is_superset(&c.palette()));
        assert!(nc.colors().contains(&3));
        assert_eq!(crossing_colors(&nd, &nc, next.crossing).unwrap().1, 2);
        nd.validate_embedding().unwrap();
    }

    #[test]
    fn wraparound_keeps_going() {
        let d = closure("1 1 1 1 1");
        let c = crate::coloring::enumerate_nontrivial(&d, 5, 100).unwrap().next().unwrap();
        let anchor = eligible_crossing(&d, &c).unwrap();
        let mut c = normalize_affine(&d, &c, anchor).unwrap();
        let mut d = d;
        let mut site = initial_site(&d, &c, anchor).unwrap();
        for _ in 0..6 {
            let (nd, nc, next) = r2_expand(&d, &c, &site).unwrap();
            assert!(nc.is_valid_on(&nd));
            d = nd;
            c = nc;
            site = next;
        }
        assert_eq!(d.num_crossings(), 5 + 12);
    }

    #[test]
    fn trefoil_is_already_full() {
        let d = closure("1 1 1");
        let c = crate::coloring::enumerate_nontrivial(&d, 3, 100).unwrap().next().unwrap();
        let t = realize_spectrum(&d, &c, 3).unwrap();
        assert_eq!(t.sizes(), vec![3]);
        assert!(t.is_contiguous());
    }

    #[test]
    fn figure_eight_reaches_five() {
        let d = closure("1 -2 1 -2");
        assert_eq!(d.num_arcs(), 4);
        let c = crate::coloring::enumerate_nontrivial(&d, 5, 100).unwrap().min_by_key(|c| c.palette_size()).unwrap();
        let t = realize_spectrum(&d, &c, 5).unwrap();
        assert_eq!(t.max_palette(), 5);
        assert!(t.is_contiguous());
        for r in &t.records {
            assert!(r.coloring.is_valid_on(&r.diagram));
        }
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), t.records.len());
        assert!(json[0]["palette_size"].is_u64() && json[0]["crossings"].is_u64());
    }

    #[test]
    fn non_cofacial_site_is_refused() {
        let d = closure("1 1 1 1 1");
        let c = crate::coloring::enumerate_nontrivial(&d, 5, 100).unwrap().next().unwrap();
        let anchor = eligible_crossing(&d, &c).unwrap();
        let c = normalize_affine(&d, &c, anchor).unwrap();
        let site = initial_site(&d, &c, anchor).unwrap();
        let faces = d.faces().unwrap();
        let push_face = faces.iter().position(|f| f.contains(&site.push)).unwrap();
        // same edge as `cut`, traversed the other way: on the opposite face
        let flipped = d.twin(site.cut).unwrap();
        assert!(!faces[push_face].contains(&flipped));
        let bad = MoveSite { cut: flipped, ..site };
        assert!(matches!(r2_expand(&d, &c, &bad), Err(MoveError::NotCofacial { .. })));
    }
}
