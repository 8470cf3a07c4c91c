//! Glued-tetrahedra (3d) and glued-triangle (2d) complexes, with derived
//! edge and vertex equivalence classes and incidence data.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::{Error, Result};

/// The six edges of a tetrahedron in canonical order.
pub const TET_EDGES: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index of the undirected tetrahedron edge {v,w} in `TET_EDGES`.
pub fn edge_index(v: u8, w: u8) -> usize {
    let (a, b) = if v < w { (v, w) } else { (w, v) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not a tetrahedron edge: ({v},{w})"),
    }
}

/// Parity of a permutation of 0..n given as a slice.
pub fn permutation_is_even(perm: &[u8]) -> bool {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// True iff the ordered triple (a,b,c) on the face of a tetrahedron omitting
/// vertex d is positively oriented as part of the boundary.
pub fn face_triple_is_positive(triple: [u8; 3]) -> Result<bool> {
    let mut seen = [false; 4];
    for &v in &triple {
        if v > 3 || seen[v as usize] {
            return Err(Error::Parse(format!("invalid face triple {triple:?}")));
        }
        seen[v as usize] = true;
    }
    let omitted = (0..4).find(|&v| !seen[v as usize]).unwrap() as u8;
    let perm = [triple[0], triple[1], triple[2], omitted];
    Ok(permutation_is_even(&perm))
}

/// The positively oriented boundary cycle of the face opposite vertex `f`.
pub fn face_positive_cycle(f: u8) -> [u8; 3] {
    match f {
        0 => [1, 3, 2],
        1 => [0, 2, 3],
        2 => [0, 3, 1],
        3 => [0, 1, 2],
        _ => panic!("face index out of range"),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GluingSpec {
    pub from: (usize, [u8; 3]),
    pub to: (usize, [u8; 3]),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OrientationSpec {
    pub tet: usize,
    pub from: u8,
    pub to: u8,
}

/// On-disk JSON schema for a glued-tetrahedra complex and its decoration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputFile {
    pub tets: usize,
    pub gluings: Vec<GluingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_kinds: Option<Vec<VertexKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientations: Option<Vec<OrientationSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<Vec<[[u8; 2]; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Ideal,
    Interior,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A validated glued-tetrahedra complex. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Triangulation3 {
    pub tet_count: usize,
    pub gluings: Vec<GluingSpec>,
    pub vertex_kinds: Vec<VertexKind>,
    edge_class_of: Vec<[usize; 6]>,
    /// +1 if the directed slot (tet, lo->hi) lies in the reference directed
    /// class of its undirected class, -1 otherwise.
    ref_sign_lo_hi: Vec<[i8; 6]>,
    edge_incidences: Vec<Vec<(usize, (u8, u8))>>,
    vertex_class_of: Vec<[usize; 4]>,
    vertex_incidences: Vec<Vec<(usize, u8)>>,
    /// For each (tet, face) the gluing index and side (0 = from, 1 = to).
    face_slot: Vec<[(usize, u8); 4]>,
}

impl Triangulation3 {
    pub fn from_gluings(
        tet_count: usize,
        gluings: Vec<GluingSpec>,
        vertex_kinds: Option<Vec<VertexKind>>,
    ) -> Result<Self> {
        Self::build(tet_count, gluings, vertex_kinds, false)
    }

    /// Like [`from_gluings`](Self::from_gluings) but permitting unglued faces.
    /// Intended for partial complexes (a bare tetrahedron, search frontiers).
    pub fn from_gluings_allow_free(
        tet_count: usize,
        gluings: Vec<GluingSpec>,
        vertex_kinds: Option<Vec<VertexKind>>,
    ) -> Result<Self> {
        Self::build(tet_count, gluings, vertex_kinds, true)
    }

    fn build(
        tet_count: usize,
        gluings: Vec<GluingSpec>,
        vertex_kinds: Option<Vec<VertexKind>>,
        allow_free_faces: bool,
    ) -> Result<Self> {
        if tet_count == 0 {
            return Err(Error::Triangulation("empty complex".into()));
        }
        // Face matching: every face of every tetrahedron exactly once.
        let mut face_slot = vec![[(usize::MAX, 0u8); 4]; tet_count];
        for (gi, g) in gluings.iter().enumerate() {
            for (side, (tet, triple)) in [g.from, g.to].into_iter().enumerate() {
                if tet >= tet_count {
                    return Err(Error::Parse(format!("gluing {gi}: tet {tet} out of range")));
                }
                face_triple_is_positive(triple)?;
                let omitted = face_of_triple(triple);
                if face_slot[tet][omitted as usize].0 != usize::MAX {
                    return Err(Error::Triangulation(format!(
                        "face {omitted} of tet {tet} appears in more than one gluing"
                    )));
                }
                face_slot[tet][omitted as usize] = (gi, side as u8);
            }
            let p_from = face_triple_is_positive(g.from.1)?;
            let p_to = face_triple_is_positive(g.to.1)?;
            if p_from == p_to {
                return Err(Error::Triangulation(format!(
                    "gluing {gi}: orientation-incompatible gluing (both triples {} oriented)",
                    if p_from { "positively" } else { "negatively" }
                )));
            }
        }
        if !allow_free_faces {
            for (tet, slots) in face_slot.iter().enumerate() {
                for (f, slot) in slots.iter().enumerate() {
                    if slot.0 == usize::MAX {
                        return Err(Error::Triangulation(format!(
                            "unmatched face {f} of tet {tet}"
                        )));
                    }
                }
            }
        }

        // Directed edge classes: slot index = tet*12 + 2*edge + dir.
        let dir_slot = |tet: usize, v: u8, w: u8| -> usize {
            let e = edge_index(v, w);
            let dir = usize::from(v > w);
            tet * 12 + 2 * e + dir
        };
        let mut uf = UnionFind::new(tet_count * 12);
        let mut vf = UnionFind::new(tet_count * 4);
        for g in &gluings {
            let (t1, a) = g.from;
            let (t2, b) = g.to;
            for (i, j) in [(0usize, 1usize), (1, 2), (0, 2)] {
                uf.union(dir_slot(t1, a[i], a[j]), dir_slot(t2, b[i], b[j]));
                uf.union(dir_slot(t1, a[j], a[i]), dir_slot(t2, b[j], b[i]));
            }
            for i in 0..3 {
                vf.union(t1 * 4 + a[i] as usize, t2 * 4 + b[i] as usize);
            }
        }
        // Reject edges glued to themselves with reversed orientation.
        for tet in 0..tet_count {
            for &(v, w) in &TET_EDGES {
                if uf.find(dir_slot(tet, v, w)) == uf.find(dir_slot(tet, w, v)) {
                    return Err(Error::Triangulation(format!(
                        "edge ({v},{w}) of tet {tet} is identified with its own reversal"
                    )));
                }
            }
        }

        // Number undirected classes by first appearance, record a reference
        // direction (the lo->hi slot of the first appearance).
        let mut class_of_root: HashMap<usize, usize> = HashMap::new();
        let mut ref_root: Vec<usize> = Vec::new();
        let mut edge_class_of = vec![[usize::MAX; 6]; tet_count];
        let mut ref_sign_lo_hi = vec![[0i8; 6]; tet_count];
        let mut edge_incidences: Vec<Vec<(usize, (u8, u8))>> = Vec::new();
        for tet in 0..tet_count {
            for (e, &(v, w)) in TET_EDGES.iter().enumerate() {
                let r_fwd = uf.find(dir_slot(tet, v, w));
                let r_bwd = uf.find(dir_slot(tet, w, v));
                let key = r_fwd.min(r_bwd);
                let class = *class_of_root.entry(key).or_insert_with(|| {
                    ref_root.push(r_fwd);
                    edge_incidences.push(Vec::new());
                    ref_root.len() - 1
                });
                edge_class_of[tet][e] = class;
                ref_sign_lo_hi[tet][e] = if ref_root[class] == r_fwd { 1 } else { -1 };
                edge_incidences[class].push((tet, (v, w)));
            }
        }

        let mut vclass_of_root: HashMap<usize, usize> = HashMap::new();
        let mut vertex_class_of = vec![[usize::MAX; 4]; tet_count];
        let mut vertex_incidences: Vec<Vec<(usize, u8)>> = Vec::new();
        for tet in 0..tet_count {
            for v in 0..4u8 {
                let r = vf.find(tet * 4 + v as usize);
                let n = vclass_of_root.len();
                let class = *vclass_of_root.entry(r).or_insert(n);
                if class == vertex_incidences.len() {
                    vertex_incidences.push(Vec::new());
                }
                vertex_class_of[tet][v as usize] = class;
                vertex_incidences[class].push((tet, v));
            }
        }

        let vertex_kinds = match vertex_kinds {
            None => vec![VertexKind::Ideal; vertex_incidences.len()],
            Some(ks) => {
                if ks.len() != vertex_incidences.len() {
                    return Err(Error::Triangulation(format!(
                        "vertex_kinds has {} entries but there are {} vertex classes",
                        ks.len(),
                        vertex_incidences.len()
                    )));
                }
                ks
            }
        };

        Ok(Triangulation3 {
            tet_count,
            gluings,
            vertex_kinds,
            edge_class_of,
            ref_sign_lo_hi,
            edge_incidences,
            vertex_class_of,
            vertex_incidences,
            face_slot,
        })
    }

    pub fn from_input(input: &InputFile) -> Result<Self> {
        Self::from_gluings(input.tets, input.gluings.clone(), input.vertex_kinds.clone())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let input: InputFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_input(&input)
    }

    pub fn to_input(&self) -> InputFile {
        InputFile {
            tets: self.tet_count,
            gluings: self.gluings.clone(),
            vertex_kinds: Some(self.vertex_kinds.clone()),
            orientations: None,
            marked: None,
            x: None,
        }
    }

    pub fn edge_class_count(&self) -> usize {
        self.edge_incidences.len()
    }

    pub fn vertex_class_count(&self) -> usize {
        self.vertex_incidences.len()
    }

    pub fn edge_class(&self, tet: usize, v: u8, w: u8) -> usize {
        self.edge_class_of[tet][edge_index(v, w)]
    }

    pub fn vertex_class(&self, tet: usize, v: u8) -> usize {
        self.vertex_class_of[tet][v as usize]
    }

    /// All tetrahedron corners lying in the given edge class, one entry per
    /// incident tetrahedron edge (multiplicities preserved).
    pub fn edge_incidences(&self, class: usize) -> &[(usize, (u8, u8))] {
        &self.edge_incidences[class]
    }

    pub fn vertex_incidences(&self, class: usize) -> &[(usize, u8)] {
        &self.vertex_incidences[class]
    }

    /// +1 if the directed edge (v -> w) agrees with the reference direction
    /// of its class, -1 otherwise.
    pub fn reference_sign(&self, tet: usize, v: u8, w: u8) -> i8 {
        let s = self.ref_sign_lo_hi[tet][edge_index(v, w)];
        if v < w {
            s
        } else {
            -s
        }
    }

    /// Gluing data of the face opposite vertex `f` in `tet`:
    /// (other tet, this side's triple, other side's triple).
    pub fn face_gluing(&self, tet: usize, f: u8) -> (usize, [u8; 3], [u8; 3]) {
        let (gi, side) = self.face_slot[tet][f as usize];
        let g = &self.gluings[gi];
        if side == 0 {
            (g.to.0, g.from.1, g.to.1)
        } else {
            (g.from.0, g.to.1, g.from.1)
        }
    }

    pub fn all_ideal(&self) -> bool {
        self.vertex_kinds.iter().all(|&k| k == VertexKind::Ideal)
    }

    /// A stable signature of the edge-class partition: sorted list of sorted
    /// incidence lists. Invariant under permutations of the gluing rows.
    pub fn edge_partition_signature(&self) -> Vec<Vec<(usize, (u8, u8))>> {
        let mut classes: Vec<Vec<(usize, (u8, u8))>> = self
            .edge_incidences
            .iter()
            .map(|inc| {
                let mut v = inc.clone();
                v.sort_unstable();
                v
            })
            .collect();
        classes.sort();
        classes
    }
}

fn face_of_triple(triple: [u8; 3]) -> u8 {
    let mut seen = [false; 4];
    for &v in &triple {
        seen[v as usize] = true;
    }
    (0..4u8).find(|&v| !seen[v as usize]).unwrap()
}

/// A triangulated surface: oriented triangles over shared vertex ids.
/// Interior edges are shared by exactly two triangles with opposite
/// traversal; edges on one triangle only are boundary.
#[derive(Debug, Clone)]
pub struct Surface2 {
    pub vertex_count: usize,
    pub triangles: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    edge_of: HashMap<(usize, usize), usize>,
    tris_of_edge: Vec<Vec<usize>>,
}

impl Surface2 {
    pub fn new(vertex_count: usize, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut tris_of_edge: Vec<Vec<usize>> = Vec::new();
        let mut directed_seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (ti, tri) in triangles.iter().enumerate() {
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Triangulation(format!("degenerate triangle {ti}")));
            }
            for &v in tri {
                if v >= vertex_count {
                    return Err(Error::Triangulation(format!(
                        "triangle {ti} references vertex {v} out of range"
                    )));
                }
            }
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                if let Some(&other) = directed_seen.get(&(a, b)) {
                    return Err(Error::Triangulation(format!(
                        "edge ({a},{b}) traversed in the same direction by triangles {other} and {ti}: inconsistent orientation"
                    )));
                }
                directed_seen.insert((a, b), ti);
                let key = (a.min(b), a.max(b));
                let e = *edge_of.entry(key).or_insert_with(|| {
                    edges.push(key);
                    tris_of_edge.push(Vec::new());
                    edges.len() - 1
                });
                if tris_of_edge[e].len() >= 2 {
                    return Err(Error::Triangulation(format!(
                        "edge {key:?} lies on more than two triangles"
                    )));
                }
                tris_of_edge[e].push(ti);
            }
        }
        Ok(Surface2 { vertex_count, triangles, edges, edge_of, tris_of_edge })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_id(&self, v: usize, w: usize) -> Option<usize> {
        self.edge_of.get(&(v.min(w), v.max(w))).copied()
    }

    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn triangles_of_edge(&self, e: usize) -> &[usize] {
        &self.tris_of_edge[e]
    }

    pub fn is_interior(&self, e: usize) -> bool {
        self.tris_of_edge[e].len() == 2
    }
}

#[cfg(test)]
pub(crate) fn m003_input() -> InputFile {
    InputFile {
        tets: 2,
        gluings: vec![
            GluingSpec { from: (0, [0, 1, 2]), to: (1, [1, 3, 0]) },
            GluingSpec { from: (0, [0, 1, 3]), to: (1, [0, 1, 2]) },
            GluingSpec { from: (0, [0, 2, 3]), to: (1, [2, 3, 1]) },
            GluingSpec { from: (0, [1, 2, 3]), to: (1, [0, 2, 3]) },
        ],
        vertex_kinds: None,
        orientations: None,
        marked: None,
        x: None,
    }
}
