//! Poincaré-disk primitives.
//!
//! Points live in the open unit disk, isometries are SU(1,1) pairs `(a, b)`
//! acting by `z ↦ (a z + b) / (conj(b) z + conj(a))`. Two pairs that differ by a
//! global sign describe the same isometry.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::GeometryError;

/// Tolerance for pure arithmetic identities.
pub const ARITH_TOL: f64 = 1e-12;
/// Tolerance for constructions that chain many transforms.
pub const GEOM_TOL: f64 = 1e-9;

/// A point strictly inside the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(re: f64, im: f64) -> Result<Self, GeometryError> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self, GeometryError> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() >= 1.0 {
            return Err(GeometryError::OutsideDisk { re: z.re, im: z.im });
        }
        Ok(DiskPoint(z))
    }

    /// Point at Euclidean radius `r` and angle `theta`.
    pub fn polar(r: f64, theta: f64) -> Result<Self, GeometryError> {
        Self::from_complex(Complex64::from_polar(r, theta))
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn as_complex(&self) -> Complex64 {
        self.0
    }

    /// Euclidean modulus.
    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    pub fn arg(&self) -> f64 {
        self.0.arg()
    }

    /// Point at hyperbolic distance `d` from the origin in direction `theta`.
    pub fn at_distance(d: f64, theta: f64) -> Result<Self, GeometryError> {
        Self::polar((d / 2.0).tanh(), theta)
    }
}

impl fmt::Display for DiskPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.12}, {:.12})", self.0.re, self.0.im)
    }
}

/// Hyperbolic distance in the Poincaré disk.
pub fn hyperbolic_distance(z1: DiskPoint, z2: DiskPoint) -> f64 {
    let num = 2.0 * (z1.0 - z2.0).norm_sqr();
    let den = (1.0 - z1.0.norm_sqr()) * (1.0 - z2.0.norm_sqr());
    (1.0 + num / den).acosh()
}

/// Trace classification of a disk isometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsometryKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// An orientation-preserving isometry of the disk, stored as an SU(1,1) pair.
#[derive(Clone, Copy, Debug)]
pub struct MobiusTransform {
    a: Complex64,
    b: Complex64,
}

impl MobiusTransform {
    pub const IDENTITY: MobiusTransform = MobiusTransform {
        a: Complex64 { re: 1.0, im: 0.0 },
        b: Complex64 { re: 0.0, im: 0.0 },
    };

    /// Builds a transform from `(a, b)`, rescaling so that `|a|² − |b|² = 1`.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self, GeometryError> {
        let det = a.norm_sqr() - b.norm_sqr();
        if !(det.is_finite() && det > 0.0) {
            return Err(GeometryError::NotInSu11 { det });
        }
        let s = det.sqrt();
        Ok(MobiusTransform { a: a / s, b: b / s })
    }

    /// Builds a transform whose pair must already satisfy the SU(1,1) constraint.
    pub fn from_su11(a: Complex64, b: Complex64) -> Result<Self, GeometryError> {
        let det = a.norm_sqr() - b.norm_sqr();
        if (det - 1.0).abs() > ARITH_TOL {
            return Err(GeometryError::NotInSu11 { det });
        }
        Ok(MobiusTransform { a, b })
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Rotation about the origin by `theta`.
    pub fn rotation(theta: f64) -> Self {
        MobiusTransform {
            a: Complex64::from_polar(1.0, theta / 2.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Translation along the real axis moving the origin to `tanh(eta/2)`.
    pub fn boost(eta: f64) -> Self {
        MobiusTransform {
            a: Complex64::new((eta / 2.0).cosh(), 0.0),
            b: Complex64::new((eta / 2.0).sinh(), 0.0),
        }
    }

    /// The isometry sending `z` to the origin with no extra rotation.
    pub fn to_origin(z: DiskPoint) -> Self {
        // (w - z) / (1 - conj(z) w), rescaled into SU(1,1)
        Self::new(Complex64::new(1.0, 0.0), -z.0).expect("point inside disk")
    }

    /// Rotation by `theta` about an arbitrary centre.
    pub fn rotation_about(center: DiskPoint, theta: f64) -> Self {
        let t = Self::to_origin(center);
        t.inverse().compose(&Self::rotation(theta)).compose(&t)
    }

    pub fn apply(&self, z: DiskPoint) -> DiskPoint {
        let num = self.a * z.0 + self.b;
        let den = self.b.conj() * z.0 + self.a.conj();
        let w = num / den;
        // |w| < 1 holds analytically; clamp round-off for points near the rim
        let n = w.norm();
        if n >= 1.0 {
            DiskPoint(w * ((1.0 - f64::EPSILON) / n))
        } else {
            DiskPoint(w)
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &MobiusTransform) -> MobiusTransform {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        let det = a.norm_sqr() - b.norm_sqr();
        let s = det.sqrt();
        MobiusTransform { a: a / s, b: b / s }
    }

    pub fn inverse(&self) -> MobiusTransform {
        MobiusTransform {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Trace of the 2×2 matrix representative, `2 Re(a)`.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn classify(&self) -> IsometryKind {
        let t = self.trace().abs();
        if (t - 2.0).abs() <= GEOM_TOL {
            if self.b.norm() <= GEOM_TOL {
                // identity (and ±identity) counts as a degenerate rotation
                IsometryKind::Elliptic
            } else {
                IsometryKind::Parabolic
            }
        } else if t < 2.0 {
            IsometryKind::Elliptic
        } else {
            IsometryKind::Hyperbolic
        }
    }

    /// Translation length of a hyperbolic element, `2 arcosh(|tr|/2)`.
    pub fn translation_length(&self) -> f64 {
        2.0 * (self.trace().abs() / 2.0).max(1.0).acosh()
    }

    /// Largest entry deviation from `±identity`.
    pub fn deviation_from_identity(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let plus = (self.a - one).norm().max(self.b.norm());
        let minus = (self.a + one).norm().max(self.b.norm());
        plus.min(minus)
    }

    /// Largest entry deviation from `other`, modulo the global sign.
    pub fn distance_to(&self, other: &MobiusTransform) -> f64 {
        let plus = (self.a - other.a).norm().max((self.b - other.b).norm());
        let minus = (self.a + other.a).norm().max((self.b + other.b).norm());
        plus.min(minus)
    }

    pub fn approx_eq(&self, other: &MobiusTransform, tol: f64) -> bool {
        self.distance_to(other) <= tol
    }
}

impl Default for MobiusTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// A regular hyperbolic p-gon centred at the origin, sized so that q copies
/// meet at every vertex.
#[derive(Clone, Debug)]
pub struct RegularPolygon {
    pub p: usize,
    pub q: usize,
    pub radius: f64,
    pub phase: f64,
    pub vertices: Vec<DiskPoint>,
}

/// `(p − 2)(q − 2) > 4`.
pub fn is_hyperbolic(p: usize, q: usize) -> bool {
    p >= 3 && q >= 3 && (p - 2) * (q - 2) > 4
}

/// Euclidean circumradius of the central `{p,q}` polygon.
pub fn polygon_radius(p: usize, q: usize) -> Result<f64, GeometryError> {
    if !is_hyperbolic(p, q) {
        return Err(GeometryError::NonHyperbolicPattern { p, q });
    }
    let (p, q) = (p as f64, q as f64);
    Ok(((PI / p + PI / q).cos() / (PI / p - PI / q).cos()).sqrt())
}

/// Phase that puts the midpoint of one edge on the positive real axis.
pub fn default_phase(p: usize) -> f64 {
    PI / p as f64
}

pub fn regular_polygon(p: usize, q: usize, phase: f64) -> Result<RegularPolygon, GeometryError> {
    let radius = polygon_radius(p, q)?;
    let vertices = (1..=p)
        .map(|k| DiskPoint::polar(radius, 2.0 * PI * k as f64 / p as f64 + phase))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegularPolygon {
        p,
        q,
        radius,
        phase,
        vertices,
    })
}

impl RegularPolygon {
    /// Hyperbolic length of every side.
    pub fn edge_length(&self) -> f64 {
        hyperbolic_distance(self.vertices[0], self.vertices[1])
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.p)
            .map(|k| hyperbolic_distance(self.vertices[k], self.vertices[(k + 1) % self.p]))
            .collect()
    }

    /// Interior angle at each vertex, measured between geodesic tangents.
    pub fn interior_angles(&self) -> Vec<f64> {
        (0..self.p)
            .map(|k| {
                let prev = self.vertices[(k + self.p - 1) % self.p];
                let next = self.vertices[(k + 1) % self.p];
                geodesic_angle(self.vertices[k], prev, next)
            })
            .collect()
    }

    /// Hyperbolic distance from the centre to an edge midpoint.
    pub fn inradius(&self) -> f64 {
        let m = geodesic_midpoint(self.vertices[0], self.vertices[1]);
        hyperbolic_distance(DiskPoint::ORIGIN, m)
    }
}

/// Angle at `at` between the geodesics towards `u` and `v`, in `[0, π]`.
pub fn geodesic_angle(at: DiskPoint, u: DiskPoint, v: DiskPoint) -> f64 {
    let t = MobiusTransform::to_origin(at);
    // geodesics through the origin are diameters, so tangent = direction
    let du = t.apply(u).as_complex();
    let dv = t.apply(v).as_complex();
    let c = (du.conj() * dv).arg().abs();
    c.min(2.0 * PI - c)
}

/// Direction (argument) of the geodesic from `at` towards `to`.
pub fn geodesic_direction(at: DiskPoint, to: DiskPoint) -> f64 {
    MobiusTransform::to_origin(at).apply(to).arg()
}

pub fn geodesic_midpoint(u: DiskPoint, v: DiskPoint) -> DiskPoint {
    let t = MobiusTransform::to_origin(u);
    let w = t.apply(v);
    let d = hyperbolic_distance(DiskPoint::ORIGIN, w);
    let mid = DiskPoint::at_distance(d / 2.0, w.arg()).expect("finite distance");
    t.inverse().apply(mid)
}

/// The isometry taking `z_a ↦ w_a` and `z_b ↦ w_b`.
pub fn isometry_from_point_pairs(
    z_a: DiskPoint,
    z_b: DiskPoint,
    w_a: DiskPoint,
    w_b: DiskPoint,
) -> Result<MobiusTransform, GeometryError> {
    let source = hyperbolic_distance(z_a, z_b);
    let target = hyperbolic_distance(w_a, w_b);
    if (source - target).abs() > GEOM_TOL {
        return Err(GeometryError::DistanceMismatch {
            from: source,
            to: target,
        });
    }
    Ok(normalizer(w_a, w_b).inverse().compose(&normalizer(z_a, z_b)))
}

/// Sends `x ↦ 0` and `y` onto the positive real axis.
fn normalizer(x: DiskPoint, y: DiskPoint) -> MobiusTransform {
    let t = MobiusTransform::to_origin(x);
    let w = t.apply(y);
    let theta = if w.modulus() == 0.0 { 0.0 } else { w.arg() };
    MobiusTransform::rotation(-theta).compose(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hyperbolic_distance(DiskPoint::ORIGIN, DiskPoint::ORIGIN), 0.0);
        let oracle = 2.0 * 0.5f64.atanh();
        let d = hyperbolic_distance(DiskPoint::ORIGIN, pt(0.5, 0.0));
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - 3f64.ln()).abs() < 1e-12);
        let d2 = hyperbolic_distance(pt(-0.5, 0.0), pt(0.5, 0.0));
        assert!((d2 - 2.0 * oracle).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_rejected() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn rotation_acts_by_angle() {
        let z = pt(0.3, -0.2);
        let theta = 1.1;
        let w = MobiusTransform::rotation(theta).apply(z);
        let expected = z.as_complex() * Complex64::from_polar(1.0, theta);
        assert!((w.as_complex() - expected).norm() < 1e-12);
        let id = MobiusTransform::IDENTITY.apply(z);
        assert_eq!(id, z);
    }

    #[test]
    fn compose_examples() {
        let g = MobiusTransform::new(Complex64::new(1.3, 0.4), Complex64::new(-0.2, 0.9)).unwrap();
        assert!(g.compose(&MobiusTransform::IDENTITY).approx_eq(&g, 1e-12));
        assert!(g.compose(&g.inverse()).deviation_from_identity() < 1e-12);
        let r = MobiusTransform::rotation(0.4).compose(&MobiusTransform::rotation(1.3));
        assert!(r.approx_eq(&MobiusTransform::rotation(1.7), 1e-12));
        // a full turn is -identity in SU(1,1), identity in PSU(1,1)
        let full = MobiusTransform::rotation(2.0 * PI);
        assert!(full.deviation_from_identity() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(MobiusTransform::rotation(PI / 4.0).classify(), IsometryKind::Elliptic);
        assert_eq!(MobiusTransform::IDENTITY.classify(), IsometryKind::Elliptic);
        let boost = MobiusTransform::new(Complex64::new(1f64.cosh(), 0.0), Complex64::new(1f64.sinh(), 0.0)).unwrap();
        assert_eq!(boost.classify(), IsometryKind::Hyperbolic);
        let parabolic = MobiusTransform::new(Complex64::new(1.0, 0.5), Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(parabolic.classify(), IsometryKind::Parabolic);
    }

    #[test]
    fn su11_constraint_enforced() {
        assert!(MobiusTransform::from_su11(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)).is_err());
        assert!(MobiusTransform::new(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn polygon_radius_examples() {
        let poly = regular_polygon(8, 8, 0.0).unwrap();
        assert!((poly.radius - 2f64.powf(-0.25)).abs() < 1e-12);
        let oracle = ((82.5f64).to_radians().cos() / (37.5f64).to_radians().cos()).sqrt();
        let poly = regular_polygon(8, 3, 0.0).unwrap();
        assert!((poly.radius - oracle).abs() < 1e-12);
        assert!((poly.radius - 0.40563).abs() < 1e-4);
        assert!(matches!(
            regular_polygon(4, 4, 0.3),
            Err(GeometryError::NonHyperbolicPattern { p: 4, q: 4 })
        ));
        assert!(regular_polygon(6, 3, 0.0).is_err());
        assert!(regular_polygon(3, 5, 0.0).is_err());
    }

    #[test]
    fn polygons_are_regular_with_expected_angles() {
        for &(p, q) in &[(8, 3), (10, 3), (8, 8), (10, 5), (4, 5), (7, 3)] {
            let poly = regular_polygon(p, q, default_phase(p)).unwrap();
            let lengths = poly.edge_lengths();
            for l in &lengths {
                assert!((l - lengths[0]).abs() < 1e-9);
            }
            for a in poly.interior_angles() {
                assert!((a - 2.0 * PI / q as f64).abs() < 1e-9, "{p},{q}: {a}");
            }
            for v in &poly.vertices {
                assert!((v.modulus() - poly.radius).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn default_phase_puts_edge_midpoint_on_axis() {
        let poly = regular_polygon(8, 8, default_phase(8)).unwrap();
        let m = geodesic_midpoint(poly.vertices[6], poly.vertices[7]);
        assert!(m.im().abs() < 1e-12 && m.re() > 0.0);
    }

    #[test]
    fn point_pair_isometry_examples() {
        let a = pt(0.1, 0.2);
        let b = pt(-0.3, 0.4);
        let g = isometry_from_point_pairs(a, b, a, b).unwrap();
        assert!(g.deviation_from_identity() < 1e-9);

        let g = isometry_from_point_pairs(DiskPoint::ORIGIN, pt(0.5, 0.0), DiskPoint::ORIGIN, pt(-0.5, 0.0)).unwrap();
        assert!(g.approx_eq(&MobiusTransform::rotation(PI), 1e-9));

        let t = 0.3;
        let d = hyperbolic_distance(DiskPoint::ORIGIN, pt(t, 0.0));
        let u = DiskPoint::at_distance(3.0 * d, 0.0).unwrap();
        let g = isometry_from_point_pairs(pt(-t, 0.0), pt(t, 0.0), pt(t, 0.0), u).unwrap();
        assert!(g.a().im.abs() < 1e-9 && g.b().im.abs() < 1e-9);
        assert_eq!(g.classify(), IsometryKind::Hyperbolic);
        assert!((g.translation_length() - 2.0 * d).abs() < 1e-9);
        assert!(hyperbolic_distance(g.apply(pt(-t, 0.0)), pt(t, 0.0)) < 1e-9);
        assert!(hyperbolic_distance(g.apply(pt(t, 0.0)), u) < 1e-9);
    }

    #[test]
    fn point_pair_isometry_rejects_mismatch() {
        let err =
            isometry_from_point_pairs(DiskPoint::ORIGIN, pt(0.5, 0.0), DiskPoint::ORIGIN, pt(0.6, 0.0)).unwrap_err();
        match err {
            GeometryError::DistanceMismatch {
                from: source,
                to: target,
            } => {
                assert!((source - 3f64.ln()).abs() < 1e-12);
                assert!(target > source);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn arb_point() -> impl Strategy<Value = DiskPoint> {
        (0.0f64..0.95, 0.0f64..(2.0 * PI)).prop_map(|(r, t)| DiskPoint::polar(r, t).unwrap())
    }

    fn arb_transform() -> impl Strategy<Value = MobiusTransform> {
        (arb_point(), 0.0f64..(2.0 * PI))
            .prop_map(|(z, t)| MobiusTransform::rotation(t).compose(&MobiusTransform::to_origin(z)))
    }

    proptest! {
        #[test]
        fn isometry_preserves_distance(g in arb_transform(), z1 in arb_point(), z2 in arb_point()) {
            let before = hyperbolic_distance(z1, z2);
            let after = hyperbolic_distance(g.apply(z1), g.apply(z2));
            prop_assert!((before - after).abs() < 1e-12 * before.max(1.0) * 100.0);
        }

        #[test]
        fn compose_matches_sequential_application(g in arb_transform(), h in arb_transform(), z in arb_point()) {
            let lhs = g.compose(&h).apply(z);
            let rhs = g.apply(h.apply(z));
            prop_assert!(hyperbolic_distance(lhs, rhs) < 1e-9);
            let gh = g.compose(&h);
            prop_assert!((gh.a().norm_sqr() - gh.b().norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn compose_is_associative(f in arb_transform(), g in arb_transform(), h in arb_transform()) {
            let l = f.compose(&g).compose(&h);
            let r = f.compose(&g.compose(&h));
            prop_assert!(l.approx_eq(&r, 1e-12 * 1e3));
            prop_assert!(g.inverse().compose(&g).deviation_from_identity() < 1e-12);
        }

        #[test]
        fn classification_is_conjugation_invariant(h in arb_transform(), eta in 0.1f64..3.0, theta in 0.1f64..3.0) {
            let conj = |g: &MobiusTransform| h.compose(g).compose(&h.inverse());
            let boost = MobiusTransform::boost(eta);
            let rot = MobiusTransform::rotation(theta);
            prop_assert_eq!(conj(&boost).classify(), boost.classify());
            prop_assert_eq!(conj(&rot).classify(), rot.classify());
        }

        #[test]
        fn point_pair_isometry_hits_targets(g in arb_transform(), z1 in arb_point(), z2 in arb_point()) {
            prop_assume!(hyperbolic_distance(z1, z2) > 1e-3);
            let (w1, w2) = (g.apply(z1), g.apply(z2));
            let found = isometry_from_point_pairs(z1, z2, w1, w2).unwrap();
            prop_assert!(hyperbolic_distance(found.apply(z1), w1) < 1e-9);
            prop_assert!(hyperbolic_distance(found.apply(z2), w2) < 1e-9);
        }
    }
}
