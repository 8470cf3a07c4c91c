//! Concrete C^2 linear algebra behind abelianization: projections between
//! lines, wall-crossing, branch monodromy, cross-ratios, shape parameters,
//! signed Ptolemy relations, and reconstruction of flat bundles from
//! Ptolemy data.

use num_complex::Complex64;
use serde::Serialize;

use crate::orientation::{tet_u_eta, EdgeOrientations, TetFrame};
use crate::triangulation::{face_positive_cycle, Triangulation3};
use crate::{Error, Result};

/// A nonzero vector in C^2 representing a decoration section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionVec {
    pub x: Complex64,
    pub y: Complex64,
}

impl SectionVec {
    pub fn new(x: Complex64, y: Complex64) -> Result<Self> {
        let v = SectionVec { x, y };
        if v.norm() == 0.0 {
            return Err(Error::Degenerate("zero section vector".into()));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr()).sqrt()
    }
}

/// The canonical volume form: s /\ s' = s_x s'_y - s_y s'_x.
pub fn wedge(a: SectionVec, b: SectionVec) -> Complex64 {
    a.x * b.y - a.y * b.x
}

fn line_angle_sine(a: SectionVec, b: SectionVec) -> f64 {
    wedge(a, b).norm() / (a.norm() * b.norm())
}

/// Projection of xi in the line `from` onto the line `to` with kernel
/// `kernel`: decompose xi = alpha * kernel + beta * to and keep beta * to.
pub fn proj(kernel: SectionVec, from: SectionVec, to: SectionVec, xi: SectionVec) -> Result<SectionVec> {
    let det = wedge(kernel, to);
    if det.norm() < 1e-14 * kernel.norm() * to.norm() {
        return Err(Error::Degenerate("projection between coincident lines".into()));
    }
    let _ = from;
    // Cramer: [kernel | to] (alpha, beta)^T = xi.
    let beta = wedge(kernel, xi) / det;
    Ok(SectionVec { x: beta * to.x, y: beta * to.y })
}

/// The unipotent wall-crossing map l1 (+) l2 -> l1 (+) l3 as a 2x2 matrix in
/// standard coordinates: fixes l1 pointwise, sends xi2 to proj with kernel l1.
pub fn wall_crossing_matrix(l1: SectionVec, l2: SectionVec, l3: SectionVec) -> Result<[[Complex64; 2]; 2]> {
    let e1 = l1;
    let p2 = proj(l1, l2, l3, l2)?;
    // Solve M * [e1 | l2] = [e1 | p2].
    let det = wedge(e1, l2);
    if det.norm() < 1e-14 * e1.norm() * l2.norm() {
        return Err(Error::Degenerate("coincident lines in wall crossing".into()));
    }
    // M = [e1 | p2] * [e1 | l2]^{-1}
    let inv = [
        [l2.y / det, -l2.x / det],
        [-e1.y / det, e1.x / det],
    ];
    let cols = [e1, p2];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let row_r = |v: SectionVec, i: usize| if i == 0 { v.x } else { v.y };
            m[r][c] = row_r(cols[0], r) * inv[0][c] + row_r(cols[1], r) * inv[1][c];
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonodromyResult {
    pub scalar_re: f64,
    pub scalar_im: f64,
    /// Smallest pairwise angle sine between the three lines; tiny values
    /// mean the -1 is computed from an ill-conditioned configuration.
    pub min_line_angle: f64,
    pub well_conditioned: bool,
}

impl MonodromyResult {
    pub fn scalar(&self) -> Complex64 {
        Complex64::new(self.scalar_re, self.scalar_im)
    }
}

/// Holonomy of the six-step projection loop l1 -> l3 -> l2 -> l1; the result
/// is -1 for any three pairwise distinct lines, computed rather than assumed.
pub fn branch_monodromy(l1: SectionVec, l2: SectionVec, l3: SectionVec) -> Result<MonodromyResult> {
    let xi1 = l1;
    let a = proj(l2, l1, l3, xi1)?;
    let b = proj(l1, l3, l2, a)?;
    let c = proj(l3, l2, l1, b)?;
    let scalar = if xi1.x.norm() > xi1.y.norm() { c.x / xi1.x } else { c.y / xi1.y };
    let min_angle = line_angle_sine(l1, l2)
        .min(line_angle_sine(l2, l3))
        .min(line_angle_sine(l1, l3));
    Ok(MonodromyResult {
        scalar_re: scalar.re,
        scalar_im: scalar.im,
        min_line_angle: min_angle,
        well_conditioned: min_angle > 1e-6,
    })
}

/// Cross-ratio (xi0 /\ xi3)(xi1 /\ xi2) / ((xi0 /\ xi2)(xi1 /\ xi3)).
pub fn cross_ratio(xi0: SectionVec, xi1: SectionVec, xi2: SectionVec, xi3: SectionVec) -> Result<Complex64> {
    let num = wedge(xi0, xi3) * wedge(xi1, xi2);
    let den = wedge(xi0, xi2) * wedge(xi1, xi3);
    if den.norm() == 0.0 {
        return Err(Error::Degenerate("cross-ratio of coincident lines".into()));
    }
    Ok(num / den)
}

/// The three shape parameters (z1, z2, z3) with z_{i+1} = 1 - 1/z_i.
pub fn shape_params(z1: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    if z1.norm() == 0.0 || (z1 - one).norm() == 0.0 {
        return Err(Error::Degenerate(format!("shape parameter {z1} in {{0,1}}")));
    }
    let z2 = one - z1.inv();
    let z3 = one - z2.inv();
    Ok((z1, z2, z3))
}

/// Residual of the signed Ptolemy relation of one tetrahedron:
/// eps(1,0)eps(3,2) X01 X23 - eps(2,0)eps(3,1) X02 X13 + eps(3,0)eps(2,1) X03 X12,
/// with X = exp(x) read per edge class. Zero iff section vectors realizing
/// the x data exist.
pub fn ptolemy_residual(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    x: &[Complex64],
) -> Complex64 {
    let big_x = |v: u8, w: u8| x[t.edge_class(tet, v, w)].exp();
    let s = |v: u8, w: u8| f64::from(eps.sign(t, tet, v, w));
    s(1, 0) * s(3, 2) * big_x(0, 1) * big_x(2, 3)
        - s(2, 0) * s(3, 1) * big_x(0, 2) * big_x(1, 3)
        + s(3, 0) * s(2, 1) * big_x(0, 3) * big_x(1, 2)
}

/// Relative scale of the Ptolemy monomials, for tolerance comparisons.
pub fn ptolemy_scale(t: &Triangulation3, tet: usize, x: &[Complex64]) -> f64 {
    let big_x = |v: u8, w: u8| x[t.edge_class(tet, v, w)].exp().norm();
    (big_x(0, 1) * big_x(2, 3))
        .max(big_x(0, 2) * big_x(1, 3))
        .max(big_x(0, 3) * big_x(1, 2))
        .max(1e-300)
}

/// Signed wedge targets: w_{vw} = eps(w,v) X_{vw} is the required value of
/// s_v /\ s_w for sections realizing the decoration.
fn wedge_target(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    x: &[Complex64],
    v: u8,
    w: u8,
) -> Complex64 {
    f64::from(eps.sign(t, tet, w, v)) * x[t.edge_class(tet, v, w)].exp()
}

/// Reconstruct four section vectors of one tetrahedron from its per-class
/// logarithms, in the gauge s0 = (1,0), s1 = (0, w01).
pub fn reconstruct_sections(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    x: &[Complex64],
    tol: f64,
) -> Result<[SectionVec; 4]> {
    for v in 0..4u8 {
        for w in (v + 1)..4u8 {
            if x[t.edge_class(tet, v, w)].exp().norm() < 1e-12 {
                return Err(Error::Degenerate(format!(
                    "vanishing Ptolemy coordinate on edge ({v},{w}) of tet {tet}"
                )));
            }
        }
    }
    let res = ptolemy_residual(t, eps, tet, x);
    let scale = ptolemy_scale(t, tet, x);
    if res.norm() > tol * scale {
        return Err(Error::Precondition(format!(
            "Ptolemy residual {:.3e} exceeds tolerance on tet {tet}",
            res.norm() / scale
        )));
    }
    let w01 = wedge_target(t, eps, tet, x, 0, 1);
    let w02 = wedge_target(t, eps, tet, x, 0, 2);
    let w03 = wedge_target(t, eps, tet, x, 0, 3);
    let w12 = wedge_target(t, eps, tet, x, 1, 2);
    let w13 = wedge_target(t, eps, tet, x, 1, 3);
    let w23 = wedge_target(t, eps, tet, x, 2, 3);

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let s0 = SectionVec { x: one, y: zero };
    let s1 = SectionVec { x: zero, y: w01 };
    // s_j = (a_j, w0j) with w1j = a_j * 0 - w01 * a_j ... solved from
    // w1j = s1 /\ s_j = -w01 * a_j.
    let s2 = SectionVec { x: -w12 / w01, y: w02 };
    let s3 = SectionVec { x: -w13 / w01, y: w03 };
    // Consistency of the remaining wedge (holds iff the Ptolemy relation does).
    let check = wedge(s2, s3);
    if (check - w23).norm() > 1e-8 * w23.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "section reconstruction inconsistent on tet {tet}: w23 residual {:.3e}",
            (check - w23).norm()
        )));
    }
    Ok([s0, s1, s2, s3])
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceGluingCheck {
    pub tet_from: usize,
    pub tet_to: usize,
    pub third_vertex_residual: f64,
    pub det_minus_one: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeCompositeKind {
    Identity,
    MinusIdentity,
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeCompositeCheck {
    pub edge_class: usize,
    pub kind: EdgeCompositeKind,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatBundleReport {
    pub face_checks: Vec<FaceGluingCheck>,
    pub edge_checks: Vec<EdgeCompositeCheck>,
    pub max_face_residual: f64,
    pub max_det_deviation: f64,
    pub verified: bool,
    pub lifting_obstruction: bool,
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    m
}

fn mat_det(a: &Mat2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn mat_apply(a: &Mat2, v: SectionVec) -> SectionVec {
    SectionVec {
        x: a[0][0] * v.x + a[0][1] * v.y,
        y: a[1][0] * v.x + a[1][1] * v.y,
    }
}

fn mat_inv(a: &Mat2) -> Result<Mat2> {
    let d = mat_det(a);
    if d.norm() < 1e-14 {
        return Err(Error::Degenerate("singular gluing matrix".into()));
    }
    Ok([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

/// The unique matrix sending two of the three section vectors on a glued face
/// to their partners, plus the residual of the third.
fn face_transition(
    from_sections: &[SectionVec; 4],
    to_sections: &[SectionVec; 4],
    this_triple: [u8; 3],
    other_triple: [u8; 3],
) -> Result<(Mat2, f64)> {
    let a = from_sections[this_triple[0] as usize];
    let b = from_sections[this_triple[1] as usize];
    let c = from_sections[this_triple[2] as usize];
    let a2 = to_sections[other_triple[0] as usize];
    let b2 = to_sections[other_triple[1] as usize];
    let c2 = to_sections[other_triple[2] as usize];
    let det = wedge(a, b);
    if det.norm() < 1e-14 {
        return Err(Error::Degenerate("degenerate sections on glued face".into()));
    }
    // M = [a2 | b2] [a | b]^{-1}
    let inv = [[b.y / det, -b.x / det], [-a.y / det, a.x / det]];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        let row = |v: SectionVec, i: usize| if i == 0 { v.x } else { v.y };
        for col in 0..2 {
            m[r][col] = row(a2, r) * inv[0][col] + row(b2, r) * inv[1][col];
        }
    }
    let image_c = mat_apply(&m, c);
    let resid = ((image_c.x - c2.x).norm_sqr() + (image_c.y - c2.y).norm_sqr()).sqrt()
        / c2.norm().max(1e-12);
    Ok((m, resid))
}

/// Build the flat bundle: per-tetrahedron sections, per-face transition
/// matrices, and edge-class composites compared against the identity.
pub fn build_flat_bundle(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    x: &[Complex64],
    tol: f64,
) -> Result<FlatBundleReport> {
    let sections: Vec<[SectionVec; 4]> = (0..t.tet_count)
        .map(|tet| reconstruct_sections(t, eps, tet, x, tol))
        .collect::<Result<Vec<_>>>()?;

    // Transition matrix for crossing each (tet, face) into its partner.
    let mut cross: Vec<[Option<(usize, Mat2, f64)>; 4]> = vec![[None; 4]; t.tet_count];
    let mut face_checks = Vec::new();
    for tet in 0..t.tet_count {
        for f in 0..4u8 {
            let (other, this_triple, other_triple) = t.face_gluing(tet, f);
            let (m, resid) =
                face_transition(&sections[tet], &sections[other], this_triple, other_triple)?;
            cross[tet][f as usize] = Some((other, m, resid));
            if tet < other || (tet == other && this_triple < other_triple) {
                face_checks.push(FaceGluingCheck {
                    tet_from: tet,
                    tet_to: other,
                    third_vertex_residual: resid,
                    det_minus_one: (mat_det(&m) - Complex64::new(1.0, 0.0)).norm(),
                });
            }
        }
    }

    // Around each edge class: alternate faces within a tetrahedron and
    // transitions across them until the walk returns to the start.
    let mut edge_checks = Vec::new();
    for class in 0..t.edge_class_count() {
        let &(tet0, (v0, w0)) = &t.edge_incidences(class)[0];
        // Walk: at (tet, edge {v,w}, face f containing v,w); cross f, continue
        // through the other face of the image tetrahedron containing the image edge.
        let faces_with_edge = |v: u8, w: u8| -> [u8; 2] {
            let others: Vec<u8> = (0..4u8).filter(|&y| y != v && y != w).collect();
            [others[0], others[1]]
        };
        let start_face = faces_with_edge(v0, w0)[0];
        let mut composite: Mat2 =
            [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
             [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
        let (mut tet, mut v, mut w, mut f) = (tet0, v0, w0, start_face);
        let mut steps = 0usize;
        loop {
            let (other, this_triple, other_triple) = t.face_gluing(tet, f);
            let (_, m, _) = cross[tet][f as usize].as_ref().unwrap();
            composite = mat_mul(m, &composite);
            // Image of the edge endpoints under the face correspondence.
            let map = |y: u8| -> u8 {
                let i = this_triple.iter().position(|&z| z == y).unwrap();
                other_triple[i]
            };
            let (nv, nw) = (map(v), map(w));
            // The face we entered through, seen from the other side.
            let entered = {
                let mut seen = [false; 4];
                for &z in &other_triple {
                    seen[z as usize] = true;
                }
                (0..4u8).find(|&z| !seen[z as usize]).unwrap()
            };
            let fs = faces_with_edge(nv, nw);
            let next_face = if fs[0] == entered { fs[1] } else { fs[0] };
            tet = other;
            v = nv;
            w = nw;
            f = next_face;
            steps += 1;
            if tet == tet0 && ((v, w) == (v0, w0) || (w, v) == (v0, w0)) && f == start_face {
                break;
            }
            if steps > 12 * t.tet_count {
                return Err(Error::CheckFailed(format!(
                    "edge walk around class {class} failed to close"
                )));
            }
        }
        let id_dev = mat_deviation_from(&composite, 1.0);
        let neg_dev = mat_deviation_from(&composite, -1.0);
        let (kind, deviation) = if id_dev < tol.max(1e-9) * 10.0 {
            (EdgeCompositeKind::Identity, id_dev)
        } else if neg_dev < tol.max(1e-9) * 10.0 {
            (EdgeCompositeKind::MinusIdentity, neg_dev)
        } else {
            (EdgeCompositeKind::Other, id_dev.min(neg_dev))
        };
        edge_checks.push(EdgeCompositeCheck { edge_class: class, kind, deviation });
    }

    let max_face_residual =
        face_checks.iter().map(|c| c.third_vertex_residual).fold(0.0f64, f64::max);
    let max_det_deviation = face_checks.iter().map(|c| c.det_minus_one).fold(0.0f64, f64::max);
    let lifting_obstruction =
        edge_checks.iter().any(|c| c.kind == EdgeCompositeKind::MinusIdentity);
    let verified = max_face_residual < tol
        && max_det_deviation < tol
        && edge_checks.iter().all(|c| c.kind == EdgeCompositeKind::Identity);
    Ok(FlatBundleReport {
        face_checks,
        edge_checks,
        max_face_residual,
        max_det_deviation,
        verified,
        lifting_obstruction,
    })
}

fn mat_deviation_from(m: &Mat2, scalar: f64) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let target = if r == c { Complex64::new(scalar, 0.0) } else { Complex64::new(0.0, 0.0) };
            dev = dev.max((m[r][c] - target).norm());
        }
    }
    dev
}

/// Shape parameter of the opposite-edge pair containing edge {v,w} in `tet`:
/// z = eta1 * exp(u1) for the frame putting that pair at {01, 23}.
pub fn corner_shape(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    v: u8,
    w: u8,
    x: &[Complex64],
) -> Result<Complex64> {
    let opposite: Vec<u8> = (0..4u8).filter(|&y| y != v && y != w).collect();
    let frame = TetFrame::from_marked([(v, w), (opposite[0], opposite[1])]);
    let (u1, _, eta) = tet_u_eta(t, eps, tet, &frame, x)?;
    Ok(f64::from(eta.eta1) * u1.exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct GluingEquationReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub passed: bool,
}

/// Thurston gluing equations: the product of the shape parameters attached to
/// an edge class over all its incidences equals 1.
pub fn gluing_equation_check(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    x: &[Complex64],
    tol: f64,
) -> Result<GluingEquationReport> {
    let mut residuals = Vec::with_capacity(t.edge_class_count());
    for class in 0..t.edge_class_count() {
        let mut product = Complex64::new(1.0, 0.0);
        for &(tet, (v, w)) in t.edge_incidences(class) {
            product *= corner_shape(t, eps, tet, v, w, x)?;
        }
        residuals.push((product - Complex64::new(1.0, 0.0)).norm());
    }
    let max_residual = residuals.iter().copied().fold(0.0f64, f64::max);
    Ok(GluingEquationReport { residuals, max_residual, passed: max_residual < tol })
}

/// Per-tetrahedron surface-constraint check eta1 e^{-u1} + eta2 e^{u2} = 1,
/// using the frames induced by marked pairs.
pub fn surface_constraint_max_residual(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    marked: &crate::orientation::MarkedPairs,
    x: &[Complex64],
) -> Result<f64> {
    let mut max_res: f64 = 0.0;
    for tet in 0..t.tet_count {
        let frame = TetFrame::from_marked(marked.pair(tet));
        let (u1, u2, eta) = tet_u_eta(t, eps, tet, &frame, x)?;
        max_res = max_res.max(eta.surface_residual(u1, u2));
    }
    Ok(max_res)
}

/// Verify the signed Ptolemy polynomial against explicit random sections:
/// build X from wedges, substitute, expect a zero residual.
#[cfg(test)]
pub(crate) fn x_from_sections(
    t: &Triangulation3,
    eps: &EdgeOrientations,
    tet: usize,
    sections: &[SectionVec; 4],
) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); t.edge_class_count()];
    for v in 0..4u8 {
        for w in (v + 1)..4u8 {
            let target = f64::from(eps.sign(t, tet, w, v))
                * wedge(sections[v as usize], sections[w as usize]);
            x[t.edge_class(tet, v, w)] = target.ln();
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orientation::m003_decorated;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng) -> SectionVec {
        loop {
            let v = SectionVec {
                x: c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                y: c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            };
            if v.norm() > 0.3 {
                return v;
            }
        }
    }

    #[test]
    fn proj_example() {
        // l1 = span(1,0), l2 = span(0,1), l3 = span(1,1); xi = (0,1) |-> (1,1).
        let l1 = SectionVec { x: c(1.0, 0.0), y: c(0.0, 0.0) };
        let l2 = SectionVec { x: c(0.0, 0.0), y: c(1.0, 0.0) };
        let l3 = SectionVec { x: c(1.0, 0.0), y: c(1.0, 0.0) };
        let img = proj(l1, l2, l3, l2).unwrap();
        assert!((img.x - c(1.0, 0.0)).norm() < 1e-15);
        assert!((img.y - c(1.0, 0.0)).norm() < 1e-15);
        // Linearity: projecting the zero vector gives zero.
        let zero = SectionVec { x: c(0.0, 0.0), y: c(0.0, 0.0) };
        let img0 = proj(l1, l2, l3, zero).unwrap();
        assert_eq!(img0.x, c(0.0, 0.0));
        assert_eq!(img0.y, c(0.0, 0.0));
        // Coincident lines rejected.
        assert!(proj(l1, l2, l1, l2).is_err());
    }

    #[test]
    fn wall_crossing_unipotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let l1 = random_vec(&mut rng);
            let l2 = random_vec(&mut rng);
            let l3 = random_vec(&mut rng);
            if line_angle_sine(l1, l2) < 0.05
                || line_angle_sine(l2, l3) < 0.05
                || line_angle_sine(l1, l3) < 0.05
            {
                continue;
            }
            let m = wall_crossing_matrix(l1, l2, l3).unwrap();
            // Fixes l1 pointwise.
            let fixed = mat_apply(&m, l1);
            assert!((fixed.x - l1.x).norm() + (fixed.y - l1.y).norm() < 1e-9 * l1.norm());
            // Unipotent: trace 2 and det 1.
            let tr = m[0][0] + m[1][1];
            assert!((tr - c(2.0, 0.0)).norm() < 1e-9);
            assert!((mat_det(&m) - c(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn monodromy_is_minus_one() {
        // Coordinate axes and the diagonal.
        let l1 = SectionVec { x: c(1.0, 0.0), y: c(0.0, 0.0) };
        let l2 = SectionVec { x: c(0.0, 0.0), y: c(1.0, 0.0) };
        let l3 = SectionVec { x: c(1.0, 0.0), y: c(1.0, 0.0) };
        let r = branch_monodromy(l1, l2, l3).unwrap();
        assert!((r.scalar() + c(1.0, 0.0)).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut counted = 0;
        while counted < 500 {
            let a = random_vec(&mut rng);
            let b = random_vec(&mut rng);
            let cc = random_vec(&mut rng);
            if line_angle_sine(a, b) < 0.02
                || line_angle_sine(b, cc) < 0.02
                || line_angle_sine(a, cc) < 0.02
            {
                continue;
            }
            let r = branch_monodromy(a, b, cc).unwrap();
            assert!((r.scalar() + c(1.0, 0.0)).norm() < 1e-12);
            counted += 1;
        }
    }

    #[test]
    fn monodromy_near_coincident_warns() {
        let l1 = SectionVec { x: c(1.0, 0.0), y: c(0.0, 0.0) };
        let l2 = SectionVec { x: c(1.0, 0.0), y: c(1e-8, 0.0) };
        let l3 = SectionVec { x: c(0.0, 0.0), y: c(1.0, 0.0) };
        let r = branch_monodromy(l1, l2, l3).unwrap();
        assert!(!r.well_conditioned);
        assert!((r.scalar() + c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn cross_ratio_normalization() {
        let xi0 = SectionVec { x: c(1.0, 0.0), y: c(0.0, 0.0) };
        let xi1 = SectionVec { x: c(0.0, 0.0), y: c(1.0, 0.0) };
        let xi2 = SectionVec { x: c(1.0, 0.0), y: c(1.0, 0.0) };
        let lambda = c(0.7, -1.3);
        let xi3 = SectionVec { x: c(1.0, 0.0), y: lambda };
        let z = cross_ratio(xi0, xi1, xi2, xi3).unwrap();
        assert!((z - lambda).norm() < 1e-14);

        // Scale invariance in each slot.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let scales: [Complex64; 4] =
            core::array::from_fn(|_| c(rng.gen_range(0.2..2.0), rng.gen_range(-1.0..1.0)));
        let scale = |v: SectionVec, s: Complex64| SectionVec { x: v.x * s, y: v.y * s };
        let z2 = cross_ratio(
            scale(xi0, scales[0]),
            scale(xi1, scales[1]),
            scale(xi2, scales[2]),
            scale(xi3, scales[3]),
        )
        .unwrap();
        assert!((z - z2).norm() < 1e-12);
    }

    #[test]
    fn shape_param_recursion() {
        let (z1, z2, z3) = shape_params(c(2.0, 0.0)).unwrap();
        assert!((z2 - c(0.5, 0.0)).norm() < 1e-15);
        assert!((z3 + c(1.0, 0.0)).norm() < 1e-15);
        let (a, b, cc) = shape_params(c(3.0, 0.0)).unwrap();
        assert!((a * b * cc + c(1.0, 0.0)).norm() < 1e-14);
        // Fixed point of the recursion at the hexagonal point.
        let w = Complex64::from_polar(1.0, PI / 3.0);
        let (f1, f2, f3) = shape_params(w).unwrap();
        assert!((f1 - f2).norm() < 1e-14 && (f2 - f3).norm() < 1e-14);
        assert!(shape_params(c(0.0, 0.0)).is_err());
        assert!(shape_params(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn ptolemy_reduces_to_worked_relation() {
        // On tet 0 of the two-tetrahedron fixture the signed polynomial must
        // reduce to -X1^2 - X1 X2 + X2^2 in the class coordinates.
        let (t, eps, _) = m003_decorated();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..20 {
            let x1 = c(rng.gen_range(-0.5..0.5), rng.gen_range(-2.0..2.0));
            let x2 = c(rng.gen_range(-0.5..0.5), rng.gen_range(-2.0..2.0));
            let x = vec![x1, x2];
            for tet in 0..2 {
                let r = ptolemy_residual(&t, &eps, tet, &x);
                let (big1, big2) = (x1.exp(), x2.exp());
                let expected = -big1 * big1 - big1 * big2 + big2 * big2;
                assert!(
                    (r - expected).norm() < 1e-10 * ptolemy_scale(&t, tet, &x),
                    "tet {tet}: {r} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn ptolemy_roots_are_solutions() {
        let (t, eps, _) = m003_decorated();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        // Minus root: X1 = -phi, X2 = 1.
        let x = vec![c(phi.ln(), PI), c(0.0, 0.0)];
        for tet in 0..2 {
            let r = ptolemy_residual(&t, &eps, tet, &x);
            assert!(r.norm() < 1e-12 * ptolemy_scale(&t, tet, &x));
        }
        // Plus root: X1 = 1/phi.
        let x = vec![c(-phi.ln(), 0.0), c(0.0, 0.0)];
        for tet in 0..2 {
            let r = ptolemy_residual(&t, &eps, tet, &x);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn ptolemy_validated_against_sections() {
        // Build X from explicit random sections; residual must vanish, and
        // reconstruction must round-trip.
        let t = Triangulation3::from_gluings_allow_free(1, vec![], None).unwrap();
        let eps = EdgeOrientations::default_for(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let sections: [SectionVec; 4] = core::array::from_fn(|_| random_vec(&mut rng));
            let mut degenerate = false;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if line_angle_sine(sections[i], sections[j]) < 0.05 {
                        degenerate = true;
                    }
                }
            }
            if degenerate {
                continue;
            }
            let x = x_from_sections(&t, &eps, 0, &sections);
            let r = ptolemy_residual(&t, &eps, 0, &x);
            assert!(r.norm() < 1e-10 * ptolemy_scale(&t, 0, &x), "residual {r}");

            let rec = reconstruct_sections(&t, &eps, 0, &x, 1e-9).unwrap();
            // Recomputed wedges match the signed targets.
            for v in 0..4u8 {
                for w in (v + 1)..4u8 {
                    let target = f64::from(eps.sign(&t, 0, w, v))
                        * x[t.edge_class(0, v, w)].exp();
                    let got = wedge(rec[v as usize], rec[w as usize]);
                    assert!((got - target).norm() < 1e-9 * target.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn reconstruction_rejects_off_variety() {
        let (t, eps, _) = m003_decorated();
        let x = vec![c(1.0, 0.3), c(0.2, -0.4)];
        let r = ptolemy_residual(&t, &eps, 0, &x);
        assert!(r.norm() > 1e-3);
        assert!(reconstruct_sections(&t, &eps, 0, &x, 1e-9).is_err());
    }

    #[test]
    fn cross_ratio_matches_surface_constraint() {
        // At a Ptolemy point the reconstructed sections satisfy
        // eta1 e^{-u1} + eta2 e^{u2} = 1 and z1 = eta1 e^{u1} matches the
        // cross-ratio route (via corner_shape).
        let (t, eps, marked) = m003_decorated();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        for x in [vec![c(phi.ln(), PI), c(0.0, 0.0)], vec![c(-phi.ln(), 0.0), c(0.0, 0.0)]] {
            let res = surface_constraint_max_residual(&t, &eps, &marked, &x).unwrap();
            assert!(res < 1e-12, "surface residual {res}");
            for tet in 0..2 {
                let frame = TetFrame::from_marked(marked.pair(tet));
                let (u1, _, eta) = tet_u_eta(&t, &eps, tet, &frame, &x).unwrap();
                let z_direct = f64::from(eta.eta1) * u1.exp();
                let z_shape = corner_shape(&t, &eps, tet, 0, 1, &x).unwrap();
                assert!((z_direct - z_shape).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn m003_flat_bundle_and_gluing() {
        let (t, eps, _) = m003_decorated();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        for x in [vec![c(phi.ln(), PI), c(0.0, 0.0)], vec![c(-phi.ln(), 0.0), c(0.0, 0.0)]] {
            let report = build_flat_bundle(&t, &eps, &x, 1e-9).unwrap();
            assert!(report.verified, "{report:?}");
            assert!(!report.lifting_obstruction);
            for e in &report.edge_checks {
                assert_eq!(e.kind, EdgeCompositeKind::Identity);
                assert!(e.deviation < 1e-9);
            }
            let ge = gluing_equation_check(&t, &eps, &x, 1e-9).unwrap();
            assert!(ge.passed, "{ge:?}");
        }
    }

    #[test]
    fn off_variety_reported_not_verified() {
        let (t, eps, _) = m003_decorated();
        let x = vec![c(0.9, 0.1), c(0.0, 0.0)];
        // Off the variety: reconstruction itself refuses.
        assert!(build_flat_bundle(&t, &eps, &x, 1e-9).is_err());
    }

    #[test]
    fn gluing_equation_vacuous_on_free_tet() {
        let t = Triangulation3::from_gluings_allow_free(1, vec![], None).unwrap();
        let eps = EdgeOrientations::default_for(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let sections: [SectionVec; 4] = core::array::from_fn(|_| random_vec(&mut rng));
        let x = x_from_sections(&t, &eps, 0, &sections);
        // Each edge class has a single incidence; products are single shapes,
        // generically not 1, so this is a report, not an assertion.
        let ge = gluing_equation_check(&t, &eps, &x, 1e-9).unwrap();
        assert_eq!(ge.residuals.len(), 6);
    }

    #[test]
    fn minus_identity_composite_detected() {
        // Synthetic check of the composite classifier.
        let m: Mat2 = [
            [c(-1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0)],
        ];
        assert!(mat_deviation_from(&m, -1.0) < 1e-15);
        assert!(mat_deviation_from(&m, 1.0) > 1.0);
        let inv = mat_inv(&m).unwrap();
        assert!((mat_det(&inv) - c(1.0, 0.0)).norm() < 1e-15);
    }
}
