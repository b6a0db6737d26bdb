//! Problem geometry: subdomain polygons, boundary and interface segments
//! with their condition kinds, and deterministic collocation sampling.
//!
//! Cracked domains are built by cutting the plate along the full line
//! containing the crack. The crack portion of the cut becomes traction-free
//! crack faces (one per side); the remainder becomes interface segments
//! carrying displacement-continuity and traction-equilibrium conditions.

use serde::{Deserialize, Serialize};

use crate::elasticity::Material;
use crate::{Error, Result};

const GEOM_TOL: f64 = 1e-9;

/// Simple polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices }
    }

    /// Signed area (positive for counter-clockwise orientation).
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * acc
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0, 0.0];
        for v in &self.vertices {
            c[0] += v[0];
            c[1] += v[1];
        }
        [c[0] / n, c[1] / n]
    }

    /// Distance from `x` to the polygon boundary.
    pub fn boundary_distance(&self, x: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let d = point_segment_distance(x, self.vertices[i], self.vertices[(i + 1) % n]);
            best = best.min(d);
        }
        best
    }

    /// Strict interior test: inside by crossing number and farther than
    /// `tol` from every edge.
    pub fn contains_strict(&self, x: [f64; 2], tol: f64) -> bool {
        self.boundary_distance(x) > tol && self.crossing_inside(x)
    }

    /// Inside or within `tol` of the boundary.
    pub fn contains_with_tol(&self, x: [f64; 2], tol: f64) -> bool {
        self.boundary_distance(x) <= tol || self.crossing_inside(x)
    }

    fn crossing_inside(&self, x: [f64; 2]) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let vi = self.vertices[i];
            let vj = self.vertices[j];
            if (vi[1] > x[1]) != (vj[1] > x[1]) {
                let t = (x[1] - vi[1]) / (vj[1] - vi[1]);
                if x[0] < vi[0] + t * (vj[0] - vi[0]) {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Keep the part of the polygon where `sign · n·(x − p0) ≥ 0`
    /// (Sutherland–Hodgman against one half-plane).
    fn clip_halfplane(&self, p0: [f64; 2], n: [f64; 2], sign: f64) -> Polygon {
        let dist = |v: [f64; 2]| sign * (n[0] * (v[0] - p0[0]) + n[1] * (v[1] - p0[1]));
        let m = self.vertices.len();
        let mut out = Vec::new();
        for i in 0..m {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % m];
            let da = dist(a);
            let db = dist(b);
            if da >= -GEOM_TOL {
                out.push(a);
            }
            if (da > GEOM_TOL && db < -GEOM_TOL) || (da < -GEOM_TOL && db > GEOM_TOL) {
                let t = da / (da - db);
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        // drop duplicate consecutive vertices introduced by on-line points
        let mut dedup: Vec<[f64; 2]> = Vec::with_capacity(out.len());
        for v in out {
            if dedup
                .last()
                .map_or(true, |l| (l[0] - v[0]).abs() > GEOM_TOL || (l[1] - v[1]).abs() > GEOM_TOL)
            {
                dedup.push(v);
            }
        }
        if dedup.len() >= 2 {
            let first = dedup[0];
            let last = *dedup.last().unwrap();
            if (first[0] - last[0]).abs() <= GEOM_TOL && (first[1] - last[1]).abs() <= GEOM_TOL {
                dedup.pop();
            }
        }
        Polygon::new(dedup)
    }
}

fn point_segment_distance(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ax = [x[0] - a[0], x[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ax[0] * ab[0] + ax[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let p = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt()
}

/// One subdomain: a simple polygon owning the network with the same index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdomainSpec {
    pub id: usize,
    pub polygon: Polygon,
}

/// Condition attached to a boundary segment. Dirichlet and traction
/// conditions may be prescribed per component so that symmetry reductions
/// (one displacement component pinned, the complementary traction zero) can
/// be expressed on a single segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SegmentCondition {
    DirichletU1(f64),
    DirichletU2(f64),
    Traction([f64; 2]),
    Traction1(f64),
    Traction2(f64),
    /// Traction-free crack face (lies on the branch cut).
    CrackFace,
}

/// Straight boundary segment of one subdomain with its outward unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub subdomain: usize,
    pub normal: [f64; 2],
    pub conditions: Vec<SegmentCondition>,
}

impl BoundarySegment {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }
}

/// Matched pair of geometrically identical segments bounding two
/// subdomains, carrying continuity and traction-equilibrium conditions.
/// `normal_upper` is the outward normal of the `upper` subdomain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfacePair {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub upper: usize,
    pub lower: usize,
    pub normal_upper: [f64; 2],
}

/// Crack tip location and ahead direction (see
/// [`crate::kinematics::CrackTip`] for the trainable counterpart).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipSpec {
    pub position: [f64; 2],
    pub orientation: f64,
}

/// The crack as a straight segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrackGeometry {
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl CrackGeometry {
    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }
}

/// A fully assembled problem: material, subdomains, classified boundary and
/// interface segments, crack description and loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDefinition {
    pub material: Material,
    pub subdomains: Vec<SubdomainSpec>,
    pub boundaries: Vec<BoundarySegment>,
    pub interfaces: Vec<InterfacePair>,
    pub tips: Vec<TipSpec>,
    pub crack: CrackGeometry,
    pub body_force: [f64; 2],
    /// Characteristic crack length `a` (sets the tip exclusion radius).
    pub char_length: f64,
    /// When false the model carries no enrichment terms (standard PINN).
    pub enrichment: bool,
}

impl ProblemDefinition {
    /// Tip exclusion radius: `1e-3 · a`.
    pub fn eps_tip(&self) -> f64 {
        1e-3 * self.char_length
    }

    /// Subdomain strictly containing `x`, if any.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        self.subdomains.iter().find(|s| s.polygon.contains_strict(x, 1e-12)).map(|s| s.id)
    }

    /// Length of the crack face behind a tip (distance from the tip to the
    /// far end of the crack).
    pub fn face_length(&self, tip: &TipSpec) -> f64 {
        let ds = (tip.position[0] - self.crack.start[0]).hypot(tip.position[1] - self.crack.start[1]);
        let de = (tip.position[0] - self.crack.end[0]).hypot(tip.position[1] - self.crack.end[1]);
        ds.max(de)
    }
}

/// Which crack endpoints carry tips (the other endpoint is a mouth on the
/// outer boundary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TipSelection {
    Start,
    End,
    Both,
}

/// Conditions on the four sides of a rectangular plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeConditions {
    pub left: Vec<SegmentCondition>,
    pub right: Vec<SegmentCondition>,
    pub bottom: Vec<SegmentCondition>,
    pub top: Vec<SegmentCondition>,
}

/// Inputs for [`build_problem`]: a rectangular plate with one straight
/// crack.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSpec {
    pub material: Material,
    /// `[x_min, x_max, y_min, y_max]`.
    pub rect: [f64; 4],
    pub crack: CrackGeometry,
    pub tips: TipSelection,
    pub edges: EdgeConditions,
    pub body_force: [f64; 2],
    /// Characteristic crack length; defaults to the crack length (one tip)
    /// or its half (two tips).
    pub char_length: Option<f64>,
    pub enrichment: bool,
}

/// Cut the plate along the full crack line and classify every resulting
/// segment. Subdomain 0 is the positive side of the cut normal
/// `(−d_y, d_x)` for crack direction `d`.
pub fn build_problem(spec: &PlateSpec) -> Result<ProblemDefinition> {
    let [x_min, x_max, y_min, y_max] = spec.rect;
    if !(x_max > x_min && y_max > y_min) {
        return Err(Error::Config(format!("degenerate plate rectangle {:?}", spec.rect)));
    }
    let crack = spec.crack;
    let clen = crack.length();
    if clen <= GEOM_TOL {
        return Err(Error::Config("crack has zero length".into()));
    }
    let d = [(crack.end[0] - crack.start[0]) / clen, (crack.end[1] - crack.start[1]) / clen];
    let m = [-d[1], d[0]];

    let rect_poly = Polygon::new(vec![
        [x_min, y_min],
        [x_max, y_min],
        [x_max, y_max],
        [x_min, y_max],
    ]);
    let poly_pos = rect_poly.clip_halfplane(crack.start, m, 1.0);
    let poly_neg = rect_poly.clip_halfplane(crack.start, m, -1.0);
    if poly_pos.vertices.len() < 3 || poly_neg.vertices.len() < 3 {
        return Err(Error::Config(
            "crack line does not cut the plate into two subdomains".into(),
        ));
    }

    // chord of the cut line across the rectangle, parametrized by the
    // signed distance t from crack.start along d
    let param = |p: [f64; 2]| (p[0] - crack.start[0]) * d[0] + (p[1] - crack.start[1]) * d[1];
    let (t_lo, t_hi) = chord_range(&rect_poly, crack.start, d)?;
    let (t_s, t_e) = (0.0, clen);
    if t_s < t_lo - GEOM_TOL || t_e > t_hi + GEOM_TOL {
        return Err(Error::Config("crack extends outside the plate".into()));
    }
    let at = |t: f64| [crack.start[0] + t * d[0], crack.start[1] + t * d[1]];

    // tips must be interior; mouths must touch the outer boundary
    let mut tips = Vec::new();
    let mut add_tip = |pos: [f64; 2], ahead: [f64; 2]| {
        tips.push(TipSpec { position: pos, orientation: ahead[1].atan2(ahead[0]) });
    };
    match spec.tips {
        TipSelection::Start => add_tip(crack.start, [-d[0], -d[1]]),
        TipSelection::End => add_tip(crack.end, d),
        TipSelection::Both => {
            add_tip(crack.start, [-d[0], -d[1]]);
            add_tip(crack.end, d);
        }
    }
    for tip in &tips {
        let t = param(tip.position);
        if t < t_lo + GEOM_TOL || t > t_hi - GEOM_TOL {
            return Err(Error::Config(format!(
                "crack tip at ({}, {}) must lie strictly inside the plate",
                tip.position[0], tip.position[1]
            )));
        }
    }
    if !matches!(spec.tips, TipSelection::Both) {
        let mouth_t = if matches!(spec.tips, TipSelection::End) { t_s } else { t_e };
        if (mouth_t - t_lo).abs() > GEOM_TOL && (mouth_t - t_hi).abs() > GEOM_TOL {
            return Err(Error::Config(
                "the crack end without a tip must open on the outer boundary".into(),
            ));
        }
    }

    let mut boundaries = Vec::new();
    let mut interfaces = Vec::new();
    // crack faces, per side
    for (sub, normal) in [(0usize, [-m[0], -m[1]]), (1usize, m)] {
        boundaries.push(BoundarySegment {
            a: at(t_s),
            b: at(t_e),
            subdomain: sub,
            normal,
            conditions: vec![SegmentCondition::CrackFace],
        });
    }
    // ligament pieces become interfaces
    for (lo, hi) in [(t_lo, t_s), (t_e, t_hi)] {
        if hi - lo > GEOM_TOL {
            interfaces.push(pair_interfaces(
                &BoundarySegment {
                    a: at(lo),
                    b: at(hi),
                    subdomain: 0,
                    normal: [-m[0], -m[1]],
                    conditions: Vec::new(),
                },
                &BoundarySegment {
                    a: at(lo),
                    b: at(hi),
                    subdomain: 1,
                    normal: m,
                    conditions: Vec::new(),
                },
            )?);
        }
    }

    // outer edges: walk each polygon, match non-cut edges to plate sides
    let sides: [([f64; 2], &Vec<SegmentCondition>, f64, usize); 4] = [
        ([-1.0, 0.0], &spec.edges.left, x_min, 0),
        ([1.0, 0.0], &spec.edges.right, x_max, 0),
        ([0.0, -1.0], &spec.edges.bottom, y_min, 1),
        ([0.0, 1.0], &spec.edges.top, y_max, 1),
    ];
    for (sub, poly) in [(0usize, &poly_pos), (1usize, &poly_neg)] {
        let n = poly.vertices.len();
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            if (a[0] - b[0]).hypot(a[1] - b[1]) <= GEOM_TOL {
                continue;
            }
            let on_cut = |p: [f64; 2]| {
                (m[0] * (p[0] - crack.start[0]) + m[1] * (p[1] - crack.start[1])).abs() <= GEOM_TOL
            };
            if on_cut(a) && on_cut(b) {
                continue; // handled above
            }
            let mut matched = false;
            for (normal, conditions, coord, axis) in &sides {
                if (a[*axis] - coord).abs() <= GEOM_TOL && (b[*axis] - coord).abs() <= GEOM_TOL {
                    boundaries.push(BoundarySegment {
                        a,
                        b,
                        subdomain: sub,
                        normal: *normal,
                        conditions: (*conditions).clone(),
                    });
                    matched = true;
                    break;
                }
            }
            if !matched {
                return Err(Error::Config(format!(
                    "polygon edge ({a:?} → {b:?}) lies on no plate side and not on the cut"
                )));
            }
        }
    }

    let char_length = spec.char_length.unwrap_or(match spec.tips {
        TipSelection::Both => clen / 2.0,
        _ => clen,
    });

    Ok(ProblemDefinition {
        material: spec.material,
        subdomains: vec![
            SubdomainSpec { id: 0, polygon: poly_pos },
            SubdomainSpec { id: 1, polygon: poly_neg },
        ],
        boundaries,
        interfaces,
        tips,
        crack,
        body_force: spec.body_force,
        char_length,
        enrichment: spec.enrichment,
    })
}

/// Parameter range of the cut line chord across a convex polygon.
fn chord_range(poly: &Polygon, p0: [f64; 2], d: [f64; 2]) -> Result<(f64, f64)> {
    let n = poly.vertices.len();
    let mut t_lo = f64::INFINITY;
    let mut t_hi = f64::NEG_INFINITY;
    let normal = [-d[1], d[0]];
    let side = |p: [f64; 2]| normal[0] * (p[0] - p0[0]) + normal[1] * (p[1] - p0[1]);
    for i in 0..n {
        let a = poly.vertices[i];
        let b = poly.vertices[(i + 1) % n];
        let (sa, sb) = (side(a), side(b));
        if (sa > GEOM_TOL && sb > GEOM_TOL) || (sa < -GEOM_TOL && sb < -GEOM_TOL) {
            continue;
        }
        let pt = if (sa - sb).abs() <= GEOM_TOL {
            // edge collinear with the cut line: take both endpoints
            for p in [a, b] {
                let t = (p[0] - p0[0]) * d[0] + (p[1] - p0[1]) * d[1];
                t_lo = t_lo.min(t);
                t_hi = t_hi.max(t);
            }
            continue;
        } else {
            let t = sa / (sa - sb);
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        };
        let t = (pt[0] - p0[0]) * d[0] + (pt[1] - p0[1]) * d[1];
        t_lo = t_lo.min(t);
        t_hi = t_hi.max(t);
    }
    if !t_lo.is_finite() || !t_hi.is_finite() || t_hi - t_lo <= GEOM_TOL {
        return Err(Error::Config("crack line does not cross the plate".into()));
    }
    Ok((t_lo, t_hi))
}

/// Validate that two segments are geometric twins with opposite normals and
/// merge them into an [`InterfacePair`].
pub fn pair_interfaces(sa: &BoundarySegment, sb: &BoundarySegment) -> Result<InterfacePair> {
    let same = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12;
    let aligned = same(sa.a, sb.a) && same(sa.b, sb.b);
    let reversed = same(sa.a, sb.b) && same(sa.b, sb.a);
    if !aligned && !reversed {
        return Err(Error::MismatchedInterface(format!(
            "segments ({:?} → {:?}) and ({:?} → {:?}) differ",
            sa.a, sa.b, sb.a, sb.b
        )));
    }
    let nsum = [sa.normal[0] + sb.normal[0], sa.normal[1] + sb.normal[1]];
    if nsum[0].abs() > 1e-12 || nsum[1].abs() > 1e-12 {
        return Err(Error::MismatchedInterface("normals are not opposite".into()));
    }
    Ok(InterfacePair { a: sa.a, b: sa.b, upper: sa.subdomain, lower: sb.subdomain, normal_upper: sa.normal })
}

/// An interior collocation point assigned to one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub subdomain: usize,
    pub x: [f64; 2],
}

/// A pointwise boundary condition baked for loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointCondition {
    U1(f64),
    U2(f64),
    T1(f64),
    T2(f64),
}

/// A boundary collocation point with its normal and baked conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub subdomain: usize,
    pub x: [f64; 2],
    pub normal: [f64; 2],
    pub conditions: Vec<PointCondition>,
}

/// Coincident interface point evaluated from both subdomains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub x: [f64; 2],
    pub upper: usize,
    pub lower: usize,
    pub normal_upper: [f64; 2],
}

/// All training points of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollocationSet {
    pub interior: Vec<InteriorPoint>,
    pub boundary: Vec<BoundaryPoint>,
    pub interface: Vec<InterfacePoint>,
}

/// Per-term batch sizes of a collocation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchCounts {
    pub n_pde: usize,
    pub n_u1: usize,
    pub n_u2: usize,
    pub n_t1: usize,
    pub n_t2: usize,
    pub n_interface: usize,
}

impl CollocationSet {
    pub fn counts(&self) -> BatchCounts {
        let mut c = BatchCounts {
            n_pde: self.interior.len(),
            n_u1: 0,
            n_u2: 0,
            n_t1: 0,
            n_t2: 0,
            n_interface: self.interface.len(),
        };
        for bp in &self.boundary {
            for cond in &bp.conditions {
                match cond {
                    PointCondition::U1(_) => c.n_u1 += 1,
                    PointCondition::U2(_) => c.n_u2 += 1,
                    PointCondition::T1(_) => c.n_t1 += 1,
                    PointCondition::T2(_) => c.n_t2 += 1,
                }
            }
        }
        c
    }
}

/// Uniform `m×n` lattice over the bounding box of all subdomains. Points
/// strictly inside a subdomain are kept (row-major order: `x2` rows outer,
/// `x1` inner); points within the tip exclusion radius are dropped.
pub fn sample_grid(
    subdomains: &[SubdomainSpec],
    m: usize,
    n: usize,
    tips: &[TipSpec],
    eps_tip: f64,
) -> Result<Vec<InteriorPoint>> {
    if m < 2 || n < 2 {
        return Err(Error::Config(format!("grid must be at least 2×2, got {m}×{n}")));
    }
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in subdomains {
        for v in &s.polygon.vertices {
            x_min = x_min.min(v[0]);
            x_max = x_max.max(v[0]);
            y_min = y_min.min(v[1]);
            y_max = y_max.max(v[1]);
        }
    }
    let mut points = Vec::new();
    for j in 0..n {
        let y = y_min + (y_max - y_min) * j as f64 / (n - 1) as f64;
        for i in 0..m {
            let x = x_min + (x_max - x_min) * i as f64 / (m - 1) as f64;
            let p = [x, y];
            if tips
                .iter()
                .any(|t| (p[0] - t.position[0]).hypot(p[1] - t.position[1]) < eps_tip)
            {
                continue;
            }
            if let Some(sub) =
                subdomains.iter().find(|s| s.polygon.contains_strict(p, 1e-12)).map(|s| s.id)
            {
                points.push(InteriorPoint { subdomain: sub, x: p });
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySamples("no interior lattice point falls inside the domain".into()));
    }
    Ok(points)
}

fn segment_point_count(length: f64, density: f64) -> usize {
    (length * density).round() as usize
}

/// Equally spaced points on each segment, endpoints excluded, carrying the
/// segment's normal and baked conditions.
pub fn sample_boundary(segments: &[BoundarySegment], density: f64) -> Vec<BoundaryPoint> {
    let mut out = Vec::new();
    for seg in segments {
        let count = segment_point_count(seg.length(), density);
        let conditions: Vec<PointCondition> = seg
            .conditions
            .iter()
            .flat_map(|c| match c {
                SegmentCondition::DirichletU1(v) => vec![PointCondition::U1(*v)],
                SegmentCondition::DirichletU2(v) => vec![PointCondition::U2(*v)],
                SegmentCondition::Traction(t) => {
                    vec![PointCondition::T1(t[0]), PointCondition::T2(t[1])]
                }
                SegmentCondition::Traction1(v) => vec![PointCondition::T1(*v)],
                SegmentCondition::Traction2(v) => vec![PointCondition::T2(*v)],
                SegmentCondition::CrackFace => {
                    vec![PointCondition::T1(0.0), PointCondition::T2(0.0)]
                }
            })
            .collect();
        for k in 1..=count {
            let t = k as f64 / (count + 1) as f64;
            out.push(BoundaryPoint {
                subdomain: seg.subdomain,
                x: [
                    seg.a[0] + t * (seg.b[0] - seg.a[0]),
                    seg.a[1] + t * (seg.b[1] - seg.a[1]),
                ],
                normal: seg.normal,
                conditions: conditions.clone(),
            });
        }
    }
    out
}

/// Matched point pairs along an interface (identical coordinates, both
/// owners, opposite normals).
pub fn sample_interface(pair: &InterfacePair, density: f64) -> Vec<InterfacePoint> {
    let length = (pair.b[0] - pair.a[0]).hypot(pair.b[1] - pair.a[1]);
    let count = segment_point_count(length, density);
    (1..=count)
        .map(|k| {
            let t = k as f64 / (count + 1) as f64;
            InterfacePoint {
                x: [
                    pair.a[0] + t * (pair.b[0] - pair.a[0]),
                    pair.a[1] + t * (pair.b[1] - pair.a[1]),
                ],
                upper: pair.upper,
                lower: pair.lower,
                normal_upper: pair.normal_upper,
            }
        })
        .collect()
}

/// Generate the full collocation set of a problem. `boundary_density`
/// defaults to one point per interior lattice spacing (finer axis).
pub fn generate_collocation(
    problem: &ProblemDefinition,
    m: usize,
    n: usize,
    boundary_density: Option<f64>,
) -> Result<CollocationSet> {
    let interior = sample_grid(&problem.subdomains, m, n, &problem.tips, problem.eps_tip())?;
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &problem.subdomains {
        for v in &s.polygon.vertices {
            x_min = x_min.min(v[0]);
            x_max = x_max.max(v[0]);
            y_min = y_min.min(v[1]);
            y_max = y_max.max(v[1]);
        }
    }
    let spacing = ((x_max - x_min) / (m - 1) as f64).min((y_max - y_min) / (n - 1) as f64);
    let density = boundary_density.unwrap_or(1.0 / spacing);
    let boundary = sample_boundary(&problem.boundaries, density);
    let interface: Vec<InterfacePoint> =
        problem.interfaces.iter().flat_map(|p| sample_interface(p, density)).collect();
    Ok(CollocationSet { interior, boundary, interface })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::PlaneAssumption;

    fn center_tension_like() -> PlateSpec {
        PlateSpec {
            material: Material::new(1.0, 0.3, PlaneAssumption::PlaneStrain).unwrap(),
            rect: [0.0, 2.0, -6.0, 6.0],
            crack: CrackGeometry { start: [0.0, 0.0], end: [1.0, 0.0] },
            tips: TipSelection::End,
            edges: EdgeConditions {
                left: vec![SegmentCondition::DirichletU1(0.0), SegmentCondition::Traction2(0.0)],
                right: vec![SegmentCondition::Traction([0.0, 0.0])],
                bottom: vec![SegmentCondition::Traction([0.0, -1.0])],
                top: vec![SegmentCondition::Traction([0.0, 1.0])],
            },
            body_force: [0.0, 0.0],
            char_length: None,
            enrichment: true,
        }
    }

    #[test]
    fn unit_square_grid_3x3_has_single_interior_point() {
        let subs = vec![SubdomainSpec {
            id: 0,
            polygon: Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        }];
        let pts = sample_grid(&subs, 3, 3, &[], 1e-3).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].x, [0.5, 0.5]);
    }

    #[test]
    fn tip_on_lattice_point_is_excluded() {
        let subs = vec![SubdomainSpec {
            id: 0,
            polygon: Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        }];
        let tips = vec![TipSpec { position: [0.5, 0.5], orientation: 0.0 }];
        let err = sample_grid(&subs, 3, 3, &tips, 1e-3);
        assert!(matches!(err, Err(Error::EmptySamples(_))));
    }

    #[test]
    fn boundary_sampling_rule() {
        let seg = BoundarySegment {
            a: [0.0, 0.0],
            b: [1.0, 0.0],
            subdomain: 0,
            normal: [0.0, -1.0],
            conditions: vec![SegmentCondition::Traction([0.0, -1.0])],
        };
        let pts = sample_boundary(&[seg], 4.0);
        assert_eq!(pts.len(), 4);
        let xs: Vec<f64> = pts.iter().map(|p| p.x[0]).collect();
        for (got, want) in xs.iter().zip([0.2, 0.4, 0.6, 0.8]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(pts.iter().all(|p| p.normal == [0.0, -1.0]));
        assert!(pts.iter().all(|p| p.conditions
            == vec![PointCondition::T1(0.0), PointCondition::T2(-1.0)]));
    }

    #[test]
    fn crack_face_bakes_traction_free() {
        let seg = BoundarySegment {
            a: [0.0, 0.0],
            b: [1.0, 0.0],
            subdomain: 0,
            normal: [0.0, -1.0],
            conditions: vec![SegmentCondition::CrackFace],
        };
        let pts = sample_boundary(&[seg], 2.0);
        assert!(pts
            .iter()
            .all(|p| p.conditions == vec![PointCondition::T1(0.0), PointCondition::T2(0.0)]));
    }

    #[test]
    fn build_center_tension_geometry() {
        let problem = build_problem(&center_tension_like()).unwrap();
        assert_eq!(problem.subdomains.len(), 2);
        // positive side of the cut normal (0,1) is the upper half
        assert!(problem.subdomains[0].polygon.centroid()[1] > 0.0);
        assert!(problem.subdomains[1].polygon.centroid()[1] < 0.0);
        assert!((problem.subdomains[0].polygon.area().abs() - 12.0).abs() < 1e-9);
        assert_eq!(problem.tips.len(), 1);
        assert_eq!(problem.tips[0].position, [1.0, 0.0]);
        assert_eq!(problem.tips[0].orientation, 0.0);
        // one ligament interface from (1,0) to (2,0)
        assert_eq!(problem.interfaces.len(), 1);
        let iface = &problem.interfaces[0];
        assert!((iface.a[0] - 1.0).abs() < 1e-9 && (iface.b[0] - 2.0).abs() < 1e-9);
        // two crack faces + 2×4 outer edges
        let faces: Vec<_> = problem
            .boundaries
            .iter()
            .filter(|b| b.conditions == vec![SegmentCondition::CrackFace])
            .collect();
        assert_eq!(faces.len(), 2);
        assert_eq!(problem.char_length, 1.0);
        // upper face normal points down
        let upper_face = faces.iter().find(|f| f.subdomain == 0).unwrap();
        assert_eq!(upper_face.normal, [0.0, -1.0]);
    }

    #[test]
    fn build_slant_geometry() {
        let alpha = std::f64::consts::FRAC_PI_4;
        let (s, c) = alpha.sin_cos();
        let spec = PlateSpec {
            material: Material::new(1.0, 0.3, PlaneAssumption::PlaneStress).unwrap(),
            rect: [-2.0, 2.0, -4.0, 4.0],
            crack: CrackGeometry { start: [-c, -s], end: [c, s] },
            tips: TipSelection::Both,
            edges: EdgeConditions {
                left: vec![SegmentCondition::Traction([0.0, 0.0])],
                right: vec![SegmentCondition::Traction([0.0, 0.0])],
                bottom: vec![SegmentCondition::Traction([0.0, -1.0])],
                top: vec![SegmentCondition::Traction([0.0, 1.0])],
            },
            body_force: [0.0, 0.0],
            char_length: None,
            enrichment: true,
        };
        let problem = build_problem(&spec).unwrap();
        assert_eq!(problem.tips.len(), 2);
        assert_eq!(problem.interfaces.len(), 2);
        assert!((problem.char_length - 1.0).abs() < 1e-12);
        // both tips strictly inside, orientations opposite
        let o0 = problem.tips[0].orientation;
        let o1 = problem.tips[1].orientation;
        assert!((crate::kinematics::normalize_angle(o0 - o1).abs() - std::f64::consts::PI).abs() < 1e-12);
        // areas sum to the plate
        let total: f64 = problem.subdomains.iter().map(|s| s.polygon.area().abs()).sum();
        assert!((total - 32.0).abs() < 1e-9);
        // membership of sampled points
        let set = generate_collocation(&problem, 20, 40, None).unwrap();
        for p in &set.interior {
            assert!(problem.subdomains[p.subdomain].polygon.contains_strict(p.x, 1e-12));
        }
        for p in &set.boundary {
            let poly = &problem.subdomains[p.subdomain].polygon;
            assert!(poly.boundary_distance(p.x) <= 1e-12);
        }
    }

    #[test]
    fn interface_pairs_validate_geometry() {
        let sa = BoundarySegment {
            a: [1.0, 0.0],
            b: [2.0, 0.0],
            subdomain: 0,
            normal: [0.0, -1.0],
            conditions: Vec::new(),
        };
        let mut sb = sa.clone();
        sb.subdomain = 1;
        sb.normal = [0.0, 1.0];
        let pair = pair_interfaces(&sa, &sb).unwrap();
        assert_eq!(pair.upper, 0);
        assert_eq!(pair.normal_upper, [0.0, -1.0]);
        let pts = sample_interface(&pair, 10.0);
        assert_eq!(pts.len(), 10);
        // identical coordinates by construction
        assert!(pts.iter().all(|p| p.x[1] == 0.0));

        let mut bad = sb.clone();
        bad.b = [2.0, 0.5];
        assert!(pair_interfaces(&sa, &bad).is_err());
        let mut bad_normal = sb.clone();
        bad_normal.normal = [0.0, -1.0];
        assert!(pair_interfaces(&sa, &bad_normal).is_err());
    }

    #[test]
    fn degenerate_interface_is_empty() {
        let pair = InterfacePair {
            a: [1.0, 0.0],
            b: [1.0, 0.0],
            upper: 0,
            lower: 1,
            normal_upper: [0.0, -1.0],
        };
        assert!(sample_interface(&pair, 10.0).is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let problem = build_problem(&center_tension_like()).unwrap();
        let a = generate_collocation(&problem, 15, 60, None).unwrap();
        let b = generate_collocation(&problem, 15, 60, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counts_match_set_sizes() {
        let problem = build_problem(&center_tension_like()).unwrap();
        let set = generate_collocation(&problem, 15, 60, None).unwrap();
        let c = set.counts();
        assert_eq!(c.n_pde, set.interior.len());
        assert_eq!(c.n_interface, set.interface.len());
        // symmetry edge carries one u1 and one t2 condition per point
        assert!(c.n_u1 > 0);
        assert!(c.n_t2 > c.n_t1);
        let total_conds: usize = set.boundary.iter().map(|b| b.conditions.len()).sum();
        assert_eq!(total_conds, c.n_u1 + c.n_u2 + c.n_t1 + c.n_t2);
    }
}
