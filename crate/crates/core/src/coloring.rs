//! Fox colorings: the coloring matrix, determinant, exact counts,
//! enumeration, palettes and the Kauffman-Harary property.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::diagram::{ArcId, Diagram};
use crate::linalg::{self, IntMatrix, LinalgError, SmithForm, Solutions};

/// Default ceiling on the number of colorings any enumeration will walk.
pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("diagram has no crossings")]
    NoCrossings,
    #[error("diagram is split (disconnected); determinant is only defined for non-split diagrams")]
    Split,
    #[error("coloring has {colors} entries but the diagram has {arcs} arcs")]
    WrongLength { colors: usize, arcs: usize },
    #[error("color {color} on arc {arc} is not a residue mod {modulus}")]
    OutOfRange { arc: ArcId, color: u64, modulus: u64 },
    #[error("coloring condition fails at crossing {crossing}")]
    Invalid { crossing: usize },
    #[error("only trivial colorings exist mod {modulus}")]
    TriviallyColorableOnly { modulus: u64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A total assignment of residues mod `modulus` to arcs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    modulus: u64,
    colors: Vec<u64>,
}

impl Coloring {
    /// Builds a coloring without checking it against a diagram; colors are
    /// reduced mod `modulus`.
    pub fn new(modulus: u64, colors: Vec<u64>) -> Result<Self, ColoringError> {
        if modulus == 0 {
            return Err(ColoringError::ZeroModulus);
        }
        Ok(Coloring { modulus, colors: colors.into_iter().map(|c| c % modulus).collect() })
    }

    /// Builds a coloring and checks it on `d`.
    pub fn on(d: &Diagram, modulus: u64, colors: Vec<u64>) -> Result<Self, ColoringError> {
        if let Some((arc, &color)) = colors.iter().enumerate().find(|(_, &c)| modulus > 0 && c >= modulus) {
            return Err(ColoringError::OutOfRange { arc, color, modulus });
        }
        let c = Coloring::new(modulus, colors)?;
        c.check(d)?;
        Ok(c)
    }

    pub fn trivial(arcs: usize, modulus: u64, color: u64) -> Self {
        Coloring { modulus, colors: vec![color % modulus; arcs] }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn colors(&self) -> &[u64] {
        &self.colors
    }

    pub fn color(&self, arc: ArcId) -> u64 {
        self.colors[arc]
    }

    /// Checks `2·over ≡ under_in + under_out` at every crossing.
    pub fn check(&self, d: &Diagram) -> Result<(), ColoringError> {
        if self.colors.len() != d.num_arcs() {
            return Err(ColoringError::WrongLength { colors: self.colors.len(), arcs: d.num_arcs() });
        }
        let n = self.modulus as u128;
        for (i, x) in d.crossings().iter().enumerate() {
            let lhs = 2 * self.colors[x.over] as u128;
            let rhs = self.colors[x.under_in] as u128 + self.colors[x.under_out] as u128;
            if lhs % n != rhs % n {
                return Err(ColoringError::Invalid { crossing: i });
            }
        }
        Ok(())
    }

    pub fn is_valid_on(&self, d: &Diagram) -> bool {
        self.check(d).is_ok()
    }

    pub fn palette(&self) -> BTreeSet<u64> {
        self.colors.iter().copied().collect()
    }

    pub fn palette_size(&self) -> usize {
        self.palette().len()
    }

    /// A coloring is trivial when it uses a single color.
    pub fn is_trivial(&self) -> bool {
        self.colors.windows(2).all(|w| w[0] == w[1])
    }

    /// Applies `x -> scale·x + shift` to every color.
    pub fn affine(&self, scale: u64, shift: u64) -> Coloring {
        let n = self.modulus as u128;
        let colors = self
            .colors
            .iter()
            .map(|&x| ((scale as u128 * x as u128 + shift as u128) % n) as u64)
            .collect();
        Coloring { modulus: self.modulus, colors }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coloring serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Serialize, Deserialize)]
struct ColoringRepr {
    modulus: u64,
    colors: BTreeMap<String, u64>,
}

impl Serialize for Coloring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        // keys are sorted numerically, not lexically
        use serde::ser::SerializeMap;
        struct Colors<'a>(&'a [u64]);
        impl Serialize for Colors<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (i, c) in self.0.iter().enumerate() {
                    m.serialize_entry(&i.to_string(), c)?;
                }
                m.end()
            }
        }
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Coloring", 2)?;
        st.serialize_field("modulus", &self.modulus)?;
        st.serialize_field("colors", &Colors(&self.colors))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Coloring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ColoringRepr::deserialize(d)?;
        if repr.modulus == 0 {
            return Err(D::Error::custom("modulus must be at least 1"));
        }
        let mut entries: Vec<(usize, u64)> = Vec::with_capacity(repr.colors.len());
        for (k, v) in repr.colors {
            let arc: usize = k.parse().map_err(|_| D::Error::custom(format!("bad arc id {k:?}")))?;
            if v >= repr.modulus {
                return Err(D::Error::custom(format!("color {v} is not a residue mod {}", repr.modulus)));
            }
            entries.push((arc, v));
        }
        entries.sort_unstable();
        if entries.iter().enumerate().any(|(i, &(arc, _))| arc != i) {
            return Err(D::Error::custom("arc ids must be exactly 0..A-1"));
        }
        Ok(Coloring { modulus: repr.modulus, colors: entries.into_iter().map(|(_, v)| v).collect() })
    }
}

/// One row per crossing: `+2` on the over-arc, `-1` on each under-arc,
/// summed where columns coincide.
pub fn coloring_matrix(d: &Diagram) -> IntMatrix {
    let mut m = IntMatrix::zeros(d.num_crossings(), d.num_arcs());
    for (i, x) in d.crossings().iter().enumerate() {
        m.add_to(i, x.over, 2);
        m.add_to(i, x.under_in, -1);
        m.add_to(i, x.under_out, -1);
    }
    m
}

/// Absolute value of a first minor of the coloring matrix.
pub fn determinant(d: &Diagram) -> Result<u128, ColoringError> {
    if d.num_crossings() == 0 {
        return Err(ColoringError::NoCrossings);
    }
    if !d.is_connected() {
        return Err(ColoringError::Split);
    }
    Ok(linalg::minor_abs_det(&coloring_matrix(d), 0, 0)?)
}

/// All colorings of a diagram mod `n`, described through the Smith form of
/// its coloring matrix.
#[derive(Debug, Clone)]
pub struct ColoringSpace<'a> {
    pub diagram: &'a Diagram,
    pub modulus: u64,
    pub rank: usize,
    pub invariant_factors: Vec<i128>,
    /// Generators of the solution module over `Z/n`.
    pub basis: Vec<Vec<u64>>,
    pub total_count: u128,
    smith: SmithForm,
}

impl<'a> ColoringSpace<'a> {
    /// Whether colorings other than the `n` trivial ones exist.
    pub fn has_nontrivial(&self) -> bool {
        self.total_count > self.modulus as u128
    }

    /// Every coloring exactly once, refusing above `cap`.
    pub fn colorings(&self, cap: u128) -> Result<impl Iterator<Item = Coloring> + 'a, ColoringError> {
        if self.total_count > cap {
            return Err(LinalgError::OverCap { count: self.total_count, cap }.into());
        }
        let n = self.modulus;
        let sols: Solutions = linalg::solutions_from_smith(&self.smith, n);
        Ok(sols.map(move |colors| Coloring { modulus: n, colors }))
    }
}

pub fn solve_colorings(d: &Diagram, n: u64) -> Result<ColoringSpace<'_>, ColoringError> {
    if n == 0 {
        return Err(ColoringError::ZeroModulus);
    }
    let arcs = d.num_arcs();
    let smith = if d.num_crossings() == 0 {
        linalg::smith_normal_form(&IntMatrix::zeros(0, arcs))
    } else {
        linalg::smith_normal_form(&coloring_matrix(d))
    };
    let total_count = smith.solution_count(n)?;
    let mut basis = Vec::new();
    for i in 0..arcs {
        let column: Vec<u64> = (0..arcs).map(|r| smith.right.get(r, i).rem_euclid(n as i128) as u64).collect();
        let scale = match smith.invariant_factors.get(i) {
            Some(&f) => {
                let g = linalg::gcd(f.unsigned_abs(), n as u128) as u64;
                if g == 1 {
                    continue;
                }
                n / g
            }
            None => 1,
        };
        basis.push(column.iter().map(|&c| ((c as u128 * scale as u128) % n as u128) as u64).collect());
    }
    Ok(ColoringSpace {
        diagram: d,
        modulus: n,
        rank: smith.rank,
        invariant_factors: smith.invariant_factors.clone(),
        basis,
        total_count,
        smith,
    })
}

/// Every coloring using at least two colors, each exactly once.
pub fn enumerate_nontrivial(d: &Diagram, n: u64, cap: u128) -> Result<impl Iterator<Item = Coloring> + '_, ColoringError> {
    let space = solve_colorings(d, n)?;
    if space.total_count > cap {
        return Err(LinalgError::OverCap { count: space.total_count, cap }.into());
    }
    let sols = linalg::solutions_from_smith(&space.smith, n);
    Ok(sols.filter(|c| c.windows(2).any(|w| w[0] != w[1])).map(move |colors| Coloring { modulus: n, colors }))
}

/// Used colors and their multiplicities over arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteReport {
    pub palette: BTreeSet<u64>,
    pub size: usize,
    pub histogram: BTreeMap<u64, usize>,
}

impl PaletteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn palette_report(c: &Coloring) -> PaletteReport {
    let mut histogram = BTreeMap::new();
    for &x in c.colors() {
        *histogram.entry(x).or_insert(0) += 1;
    }
    let palette: BTreeSet<u64> = histogram.keys().copied().collect();
    PaletteReport { size: palette.len(), palette, histogram }
}

/// Distinct arcs carry distinct colors.
pub fn kh_property(d: &Diagram, c: &Coloring) -> bool {
    debug_assert_eq!(c.colors().len(), d.num_arcs());
    c.palette_size() == d.num_arcs()
}

/// Smallest palette among nontrivial colorings of this fixed diagram, by
/// exhaustive enumeration.
pub fn mincol_on_diagram(d: &Diagram, n: u64, cap: u128) -> Result<usize, ColoringError> {
    enumerate_nontrivial(d, n, cap)?
        .map(|c| c.palette_size())
        .min()
        .ok_or(ColoringError::TriviallyColorableOnly { modulus: n })
}

/// The first nontrivial coloring (in enumeration order) with the smallest
/// palette, if any.
pub fn min_palette_coloring(d: &Diagram, n: u64, cap: u128) -> Result<Option<Coloring>, ColoringError> {
    Ok(enumerate_nontrivial(d, n, cap)?.min_by_key(|c| c.palette_size()))
}

/// Closure of a residue set under `a * b = 2b - a (mod n)`.
pub fn is_palette_closed(s: &BTreeSet<u64>, n: u64) -> bool {
    let n = n as u128;
    s.iter().all(|&a| {
        s.iter().all(|&b| {
            let v = ((2 * b as u128 + n - (a as u128 % n)) % n) as u64;
            s.contains(&v)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{braid_closure, parse_braid, parse_diagram};

    fn trefoil() -> Diagram {
        parse_diagram("arcs=3 components=1\nC 1 0 2\nC 2 1 0\nC 0 2 1\n").unwrap()
    }

    fn closure(w: &str) -> Diagram {
        braid_closure(&parse_braid(w).unwrap()).unwrap()
    }

    #[test]
    fn matrix_rows() {
        let m = coloring_matrix(&trefoil());
        for i in 0..3 {
            let mut row: Vec<i128> = m.row(i).to_vec();
            row.sort_unstable();
            assert_eq!(row, vec![-1, -1, 2]);
        }
        // a kink: over arc equal to an under arc
        let kink = parse_diagram("arcs=2\nC 1 0 1\nC 0 1 0\n").unwrap();
        let m = coloring_matrix(&kink);
        assert_eq!(m.row(0), &[-1, 1]);
        assert_eq!(determinant(&kink).unwrap(), 1);
    }

    #[test]
    fn determinants_of_small_closures() {
        assert_eq!(determinant(&trefoil()).unwrap(), 3);
        assert_eq!(determinant(&closure("1 1")).unwrap(), 2);
        assert_eq!(determinant(&closure("1 -2 1 -2")).unwrap(), 5);
        assert_eq!(determinant(&closure("strands=4 3 2 1 3 2 1")).unwrap(), 4);
        assert_eq!(determinant(&Diagram::unknot()), Err(ColoringError::NoCrossings));
    }

    #[test]
    fn split_diagram_refused() {
        // two separate kinked unknots
        let d = parse_diagram("arcs=4\nC 1 0 1\nC 0 1 0\nC 3 2 3\nC 2 3 2\n").unwrap();
        assert!(!d.is_connected());
        assert_eq!(determinant(&d), Err(ColoringError::Split));
    }

    #[test]
    fn counts_and_enumeration() {
        let t = trefoil();
        assert_eq!(solve_colorings(&t, 3).unwrap().total_count, 9);
        assert_eq!(solve_colorings(&t, 5).unwrap().total_count, 5);
        assert_eq!(solve_colorings(&t, 1).unwrap().total_count, 1);
        assert_eq!(enumerate_nontrivial(&t, 3, DEFAULT_CAP).unwrap().count(), 6);
        assert_eq!(enumerate_nontrivial(&t, 2, DEFAULT_CAP).unwrap().count(), 0);
        assert_eq!(enumerate_nontrivial(&closure("1 1"), 2, DEFAULT_CAP).unwrap().count(), 2);
        for c in enumerate_nontrivial(&t, 3, DEFAULT_CAP).unwrap() {
            assert!(c.is_valid_on(&t));
        }
        assert!(matches!(enumerate_nontrivial(&t, 3, 5), Err(ColoringError::Linalg(LinalgError::OverCap { count: 9, cap: 5 }))));
    }

    #[test]
    fn basis_generates_valid_colorings() {
        let d = closure("strands=4 3 2 1 3 2 1 3 2 1 3 2 1");
        let space = solve_colorings(&d, 8).unwrap();
        for v in &space.basis {
            Coloring::on(&d, 8, v.clone()).unwrap();
        }
    }

    #[test]
    fn palettes_and_kh() {
        let t = trefoil();
        let c = Coloring::on(&t, 3, vec![0, 1, 2]).unwrap();
        let r = palette_report(&c);
        assert_eq!(r.palette, BTreeSet::from([0, 1, 2]));
        assert_eq!(r.histogram, BTreeMap::from([(0, 1), (1, 1), (2, 1)]));
        assert!(kh_property(&t, &c));
        let triv = Coloring::trivial(5, 7, 4);
        let r = palette_report(&triv);
        assert_eq!((r.size, r.histogram.clone()), (1, BTreeMap::from([(4, 5)])));
        assert!(!kh_property(&t, &Coloring::trivial(3, 3, 1)));
    }

    #[test]
    fn mincol_examples() {
        assert_eq!(mincol_on_diagram(&trefoil(), 3, DEFAULT_CAP), Ok(3));
        assert_eq!(mincol_on_diagram(&closure("1 1 1 1 1"), 5, DEFAULT_CAP), Ok(5));
        assert_eq!(mincol_on_diagram(&closure(&"1 ".repeat(12)), 9, DEFAULT_CAP), Ok(3));
        assert_eq!(
            mincol_on_diagram(&trefoil(), 5, DEFAULT_CAP),
            Err(ColoringError::TriviallyColorableOnly { modulus: 5 })
        );
    }

    #[test]
    fn palette_closure() {
        assert!(is_palette_closed(&BTreeSet::from([0, 3, 6]), 9));
        assert!(is_palette_closed(&BTreeSet::from([1, 4, 7]), 9));
        assert!(!is_palette_closed(&BTreeSet::from([0, 1]), 5));
        for a in 0..7 {
            assert!(is_palette_closed(&BTreeSet::from([a]), 7));
        }
    }

    #[test]
    fn json_round_trip() {
        let c = Coloring::new(13, (0..12).collect()).unwrap();
        let text = c.to_json();
        assert!(text.starts_with(r#"{"modulus":13,"colors":{"0":0,"1":1,"2":2"#), "{text}");
        assert_eq!(Coloring::from_json(&text).unwrap(), c);
        assert!(Coloring::from_json(r#"{"modulus":3,"colors":{"0":5}}"#).is_err());
        assert!(Coloring::from_json(r#"{"modulus":3,"colors":{"1":0}}"#).is_err());
        let r = palette_report(&Coloring::new(3, vec![0, 1, 1]).unwrap());
        assert_eq!(r.to_json(), r#"{"palette":[0,1],"size":2,"histogram":{"0":1,"1":2}}"#);
    }
}
