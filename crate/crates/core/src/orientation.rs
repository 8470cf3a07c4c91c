//! Edge-orientation machinery: directed signs eps_E(v,v'), the triangle
//! pairing <.,.>, epsilon-signs of quadrilaterals, and extraction of
//! (u1, u2, eta1, eta2) data from a decorated tetrahedron.

use num_complex::Complex64;

use crate::dilog::EtaPair;
use crate::triangulation::{
    face_positive_cycle, permutation_is_even, OrientationSpec, Triangulation3,
};
use crate::{Error, Result};

/// An orientation of every edge class, stored as a flip against the
/// triangulation's reference direction and propagated through gluings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeOrientations {
    flip: Vec<bool>,
}

impl EdgeOrientations {
    /// Reference orientation on every class.
    pub fn default_for(t: &Triangulation3) -> Self {
        EdgeOrientations { flip: vec![false; t.edge_class_count()] }
    }

    /// Build from explicit directed representatives, one per edge class.
    pub fn from_specs(t: &Triangulation3, specs: &[OrientationSpec]) -> Result<Self> {
        let mut flip = vec![None; t.edge_class_count()];
        for s in specs {
            if s.tet >= t.tet_count || s.from > 3 || s.to > 3 || s.from == s.to {
                return Err(Error::Parse(format!("bad orientation spec {s:?}")));
            }
            let class = t.edge_class(s.tet, s.from, s.to);
            let f = t.reference_sign(s.tet, s.from, s.to) < 0;
            if let Some(prev) = flip[class] {
                if prev != f {
                    return Err(Error::Parse(format!(
                        "conflicting orientation specs for edge class {class}"
                    )));
                }
            }
            flip[class] = Some(f);
        }
        let flip = flip
            .into_iter()
            .enumerate()
            .map(|(c, f)| {
                f.ok_or_else(|| Error::Parse(format!("no orientation for edge class {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeOrientations { flip })
    }

    /// eps_E(v,v'): +1 iff the class orientation points v -> v' at this corner.
    pub fn sign(&self, t: &Triangulation3, tet: usize, v: u8, w: u8) -> i8 {
        let class = t.edge_class(tet, v, w);
        let s = t.reference_sign(tet, v, w);
        if self.flip[class] {
            -s
        } else {
            s
        }
    }

    /// New orientations with one class reversed.
    pub fn with_class_reversed(&self, class: usize) -> Self {
        let mut flip = self.flip.clone();
        flip[class] = !flip[class];
        EdgeOrientations { flip }
    }

    pub fn class_count(&self) -> usize {
        self.flip.len()
    }

    /// Directed representatives suitable for re-serialization.
    pub fn to_specs(&self, t: &Triangulation3) -> Vec<OrientationSpec> {
        (0..t.edge_class_count())
            .map(|c| {
                let &(tet, (v, w)) = &t.edge_incidences(c)[0];
                if self.sign(t, tet, v, w) > 0 {
                    OrientationSpec { tet, from: v, to: w }
                } else {
                    OrientationSpec { tet, from: w, to: v }
                }
            })
            .collect()
    }
}

/// A pair of opposite edges marked on each tetrahedron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedPairs {
    pairs: Vec<[(u8, u8); 2]>,
}

impl MarkedPairs {
    pub fn new(pairs: Vec<[(u8, u8); 2]>) -> Result<Self> {
        for (tet, p) in pairs.iter().enumerate() {
            let mut seen = [false; 4];
            for &(a, b) in p {
                if a > 3 || b > 3 || a == b {
                    return Err(Error::Parse(format!("tet {tet}: bad marked pair {p:?}")));
                }
                seen[a as usize] = true;
                seen[b as usize] = true;
            }
            if seen != [true; 4] {
                return Err(Error::Parse(format!(
                    "tet {tet}: marked edges {p:?} are not an opposite pair"
                )));
            }
        }
        Ok(MarkedPairs { pairs })
    }

    pub fn from_input(raw: &[[[u8; 2]; 2]]) -> Result<Self> {
        Self::new(raw.iter().map(|p| [(p[0][0], p[0][1]), (p[1][0], p[1][1])]).collect())
    }

    /// The same marked pair on every tetrahedron.
    pub fn uniform(tet_count: usize, pair: [(u8, u8); 2]) -> Result<Self> {
        Self::new(vec![pair; tet_count])
    }

    pub fn pair(&self, tet: usize) -> [(u8, u8); 2] {
        self.pairs[tet]
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn with_pair(&self, tet: usize, pair: [(u8, u8); 2]) -> Result<Self> {
        let mut pairs = self.pairs.clone();
        pairs[tet] = pair;
        Self::new(pairs)
    }

    pub fn to_input(&self) -> Vec<[[u8; 2]; 2]> {
        self.pairs.iter().map(|p| [[p[0].0, p[0].1], [p[1].0, p[1].1]]).collect()
    }

    /// The edge of face `f` belonging to this tet's marked pair. Each face
    /// contains exactly one edge from each opposite pair.
    pub fn marked_edge_on_face(&self, tet: usize, f: u8) -> (u8, u8) {
        let face: Vec<u8> = (0..4u8).filter(|&v| v != f).collect();
        for &(a, b) in &self.pairs[tet] {
            if face.contains(&a) && face.contains(&b) {
                return (a, b);
            }
        }
        unreachable!("a face always contains one edge of an opposite pair")
    }
}

/// Canonical vertex relabeling of a tetrahedron: positively oriented and
/// sending the marked pair to {01, 23}. `verts[i]` is the actual vertex
/// playing the canonical role `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TetFrame {
    pub verts: [u8; 4],
}

impl TetFrame {
    /// Deterministic frame: canonical 0 is vertex 0's slot (the marked edge
    /// containing vertex 0 becomes the edge 01), the remaining edge ordered
    /// to make the relabeling even.
    pub fn from_marked(pair: [(u8, u8); 2]) -> Self {
        let (e1, e2) =
            if pair[0].0.min(pair[0].1) == 0 { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
        let v0 = e1.0.min(e1.1);
        let v1 = e1.0.max(e1.1);
        let (a, b) = (e2.0.min(e2.1), e2.0.max(e2.1));
        let cand = [v0, v1, a, b];
        if permutation_is_even(&cand) {
            TetFrame { verts: cand }
        } else {
            TetFrame { verts: [v0, v1, b, a] }
        }
    }

    /// All four even relabelings fixing the pair partition {01, 23}.
    pub fn admissible_relabelings(&self) -> [TetFrame; 4] {
        let v = self.verts;
        [
            TetFrame { verts: v },
            TetFrame { verts: [v[1], v[0], v[3], v[2]] },
            TetFrame { verts: [v[2], v[3], v[0], v[1]] },
            TetFrame { verts: [v[3], v[2], v[1], v[0]] },
        ]
    }

    pub fn vertex(&self, canonical: u8) -> u8 {
        self.verts[canonical as usize]
    }
}

/// Product of four directed edge-orientation signs around a quadrilateral
/// cycle; equals (-1)^(number of clockwise edges).
pub fn epsilon_sign_quad(signs: [i8; 4]) -> i8 {
    signs.iter().product()
}

fn eps_f(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    frame: &TetFrame,
    i: u8,
    j: u8,
) -> i8 {
    eps.sign(t, tet, frame.vertex(i), frame.vertex(j))
}

/// The (u1, u2, eta) data of a tetrahedron in a canonical frame, from
/// per-edge-class logarithms. Repeated classes accumulate coefficients.
pub fn tet_u_eta(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    frame: &TetFrame,
    x: &[Complex64],
) -> Result<(Complex64, Complex64, EtaPair)> {
    if x.len() != t.edge_class_count() {
        return Err(Error::Precondition(format!(
            "x has {} entries for {} edge classes",
            x.len(),
            t.edge_class_count()
        )));
    }
    let xv = |i: u8, j: u8| x[t.edge_class(tet, frame.vertex(i), frame.vertex(j))];
    let u1 = xv(3, 0) - xv(0, 2) + xv(2, 1) - xv(1, 3);
    let u2 = xv(3, 2) - xv(2, 1) + xv(1, 0) - xv(0, 3);
    let eta1 = epsilon_sign_quad([
        eps_f(t, eps, tet, frame, 3, 0),
        eps_f(t, eps, tet, frame, 0, 2),
        eps_f(t, eps, tet, frame, 2, 1),
        eps_f(t, eps, tet, frame, 1, 3),
    ]);
    let eta2 = epsilon_sign_quad([
        eps_f(t, eps, tet, frame, 3, 2),
        eps_f(t, eps, tet, frame, 2, 1),
        eps_f(t, eps, tet, frame, 1, 0),
        eps_f(t, eps, tet, frame, 0, 3),
    ]);
    Ok((u1, u2, EtaPair::new(eta1, eta2)?))
}

/// The six directed signs of a framed tetrahedron in the key order of the
/// flip-constant table: (eps(0,2), eps(2,1), eps(1,3), eps(3,0), eps(1,0), eps(2,3)).
pub fn tet_eps_tuple(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    frame: &TetFrame,
) -> [i8; 6] {
    [
        eps_f(t, eps, tet, frame, 0, 2),
        eps_f(t, eps, tet, frame, 2, 1),
        eps_f(t, eps, tet, frame, 1, 3),
        eps_f(t, eps, tet, frame, 3, 0),
        eps_f(t, eps, tet, frame, 1, 0),
        eps_f(t, eps, tet, frame, 2, 3),
    ]
}

/// Pairing <e1, e2> of two edges of an oriented triangle given as a cycle.
/// Zero iff equal, antisymmetric; <e, f> = +1 when f is the pairing
/// successor of e (f immediately precedes e in the traversal order).
pub fn pairing_in_cycle(cycle: [u8; 3], e1: (u8, u8), e2: (u8, u8)) -> Result<i8> {
    let pos = |e: (u8, u8)| -> Result<usize> {
        for i in 0..3 {
            let (a, b) = (cycle[i], cycle[(i + 1) % 3]);
            if (a, b) == e || (b, a) == e {
                return Ok(i);
            }
        }
        Err(Error::Precondition(format!("edge {e:?} not on triangle {cycle:?}")))
    };
    let i = pos(e1)?;
    let j = pos(e2)?;
    Ok(match (3 + i - j) % 3 {
        0 => 0,
        1 => 1,
        _ => -1,
    })
}

/// The mismatch of the two marked edges induced on a glued face, evaluated on
/// the face oriented as boundary of `tet`. Independent of which abutting
/// tetrahedron is used as the base.
pub fn face_mismatch(t: &Triangulation3, marked: &MarkedPairs, tet: usize, f: u8) -> Result<i8> {
    let (other, this_triple, other_triple) = t.face_gluing(tet, f);
    let e1 = marked.marked_edge_on_face(tet, f);

    let other_face = {
        let mut seen = [false; 4];
        for &v in &other_triple {
            seen[v as usize] = true;
        }
        (0..4u8).find(|&v| !seen[v as usize]).unwrap()
    };
    let e2_other = marked.marked_edge_on_face(other, other_face);
    // Transport into this tet's labels through the triple correspondence.
    let map_back = |v: u8| -> Result<u8> {
        other_triple
            .iter()
            .position(|&w| w == v)
            .map(|i| this_triple[i])
            .ok_or_else(|| Error::Precondition(format!("vertex {v} not on glued face")))
    };
    let e2 = (map_back(e2_other.0)?, map_back(e2_other.1)?);

    let cycle = face_positive_cycle(f);
    pairing_in_cycle(cycle, e1, e2)
}

/// Iterate each glued face exactly once as (tet, face) with tet taken from
/// the `from` side of its gluing record.
pub fn faces_once(t: &Triangulation3) -> Vec<(usize, u8)> {
    t.gluings
        .iter()
        .map(|g| {
            let (tet, triple) = g.from;
            let mut seen = [false; 4];
            for &v in &triple {
                seen[v as usize] = true;
            }
            (tet, (0..4u8).find(|&v| !seen[v as usize]).unwrap())
        })
        .collect()
}

#[cfg(test)]
pub(crate) fn m003_decorated() -> (Triangulation3, EdgeOrientations, MarkedPairs) {
    let t = Triangulation3::from_input(&crate::triangulation::m003_input()).unwrap();
    let eps = EdgeOrientations::from_specs(
        &t,
        &[
            OrientationSpec { tet: 0, from: 0, to: 1 },
            OrientationSpec { tet: 0, from: 0, to: 3 },
        ],
    )
    .unwrap();
    let marked = MarkedPairs::uniform(2, [(0, 1), (2, 3)]).unwrap();
    (t, eps, marked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::TET_EDGES;

    #[test]
    fn eps_antisymmetry() {
        let (t, eps, _) = m003_decorated();
        for tet in 0..2 {
            for &(v, w) in &TET_EDGES {
                assert_eq!(eps.sign(&t, tet, v, w), -eps.sign(&t, tet, w, v));
            }
        }
    }

    #[test]
    fn m003_u_eta() {
        let (t, eps, marked) = m003_decorated();
        let x1 = Complex64::new(0.35, 1.21);
        let x2 = Complex64::new(-0.4, 0.7);
        let x = vec![x1, x2];
        for tet in 0..2 {
            let frame = TetFrame::from_marked(marked.pair(tet));
            let (u1, u2, eta) = tet_u_eta(&t, &eps, tet, &frame, &x).unwrap();
            assert!((u1 - (-x1 + x2)).norm() < 1e-14, "tet {tet}: u1 = {u1}");
            assert!((u2 - (2.0 * x1 - 2.0 * x2)).norm() < 1e-14, "tet {tet}: u2 = {u2}");
            assert_eq!((eta.eta1, eta.eta2), (1, 1), "tet {tet}");
        }
    }

    #[test]
    fn one_tet_zero_x_gives_zero_u() {
        // A bare tetrahedron has six distinct classes; x = 0 forces
        // u1 = u2 = 0 by linearity.
        let t = Triangulation3::from_gluings_allow_free(1, vec![], None).unwrap();
        assert_eq!(t.edge_class_count(), 6);
        let eps = EdgeOrientations::default_for(&t);
        let frame = TetFrame::from_marked([(0, 1), (2, 3)]);
        let x = vec![Complex64::new(0.0, 0.0); 6];
        let (u1, u2, _) = tet_u_eta(&t, &eps, 0, &frame, &x).unwrap();
        assert_eq!(u1, Complex64::new(0.0, 0.0));
        assert_eq!(u2, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn pairing_basics() {
        let cycle = [0u8, 1, 2];
        assert_eq!(pairing_in_cycle(cycle, (0, 1), (0, 1)).unwrap(), 0);
        for (e1, e2) in [((0u8, 1u8), (1u8, 2u8)), ((1, 2), (2, 0)), ((2, 0), (0, 1))] {
            let a = pairing_in_cycle(cycle, e1, e2).unwrap();
            let b = pairing_in_cycle(cycle, e2, e1).unwrap();
            assert_eq!(a, -b);
            assert_eq!(a.abs(), 1);
        }
        assert!(pairing_in_cycle(cycle, (0, 3), (0, 1)).is_err());
    }

    #[test]
    fn m003_face_mismatches() {
        let (t, _, marked) = m003_decorated();
        let faces = faces_once(&t);
        let ms: Vec<i8> =
            faces.iter().map(|&(tet, f)| face_mismatch(&t, &marked, tet, f).unwrap()).collect();
        assert_eq!(ms, vec![1, 0, 1, 0]);
    }

    #[test]
    fn face_mismatch_side_independent() {
        let (t, _, marked) = m003_decorated();
        for g in &t.gluings {
            let face_of = |triple: [u8; 3]| {
                let mut seen = [false; 4];
                for &v in &triple {
                    seen[v as usize] = true;
                }
                (0..4u8).find(|&v| !seen[v as usize]).unwrap()
            };
            let side_a = face_mismatch(&t, &marked, g.from.0, face_of(g.from.1)).unwrap();
            let side_b = face_mismatch(&t, &marked, g.to.0, face_of(g.to.1)).unwrap();
            assert_eq!(side_a, side_b);
        }
    }

    #[test]
    fn quad_sign_is_product() {
        assert_eq!(epsilon_sign_quad([1, 1, 1, 1]), 1);
        assert_eq!(epsilon_sign_quad([-1, 1, 1, 1]), -1);
        assert_eq!(epsilon_sign_quad([-1, -1, 1, 1]), 1);
        for m in 0..16u8 {
            let s: [i8; 4] = core::array::from_fn(|i| if m & (1 << i) != 0 { -1 } else { 1 });
            let total: i8 = s.iter().sum();
            let via_half_sum = if (total / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(epsilon_sign_quad(s), via_half_sum);
        }
    }

    #[test]
    fn marked_pairs_validation() {
        assert!(MarkedPairs::new(vec![[(0, 1), (2, 3)]]).is_ok());
        assert!(MarkedPairs::new(vec![[(0, 1), (1, 3)]]).is_err());
        assert!(MarkedPairs::new(vec![[(0, 1), (2, 2)]]).is_err());
    }

    #[test]
    fn frame_construction() {
        let f = TetFrame::from_marked([(2, 3), (0, 1)]);
        assert_eq!(f.verts[0], 0);
        assert_eq!(f.verts[1], 1);
        assert!(permutation_is_even(&f.verts));
        for g in f.admissible_relabelings() {
            assert!(permutation_is_even(&g.verts));
            let pair0: std::collections::BTreeSet<u8> = [g.verts[0], g.verts[1]].into();
            assert!(pair0 == [0u8, 1].into() || pair0 == [2u8, 3].into());
        }
    }
}
