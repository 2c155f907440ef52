//! Vertex-mapped pyramids.
//!
//! Base vertices `v1..v4` sit at the cube corners `(a, b) = (0,0), (1,0),
//! (1,1), (0,1)` of the `c = 0` face, counterclockwise seen from the apex
//! side, and `v5` is the apex. The map is
//!
//! ```text
//! x(a, b, c) = (1 - c) [(1-a)(1-b) v1 + a(1-b) v2 + a b v3 + (1-a) b v4] + c v5
//! ```
//!
//! Its derivatives with respect to the pyramid coordinates `(r, s, t)` do not
//! depend on `c`, and the Jacobian determinant is bilinear in `(a, b)`.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quadrature::{Domain, Rule3D};

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexPyramid {
    pub vertices: [Point3; 5],
}

impl VertexPyramid {
    /// The unit right pyramid: base `[0,1]²` at `z = 0`, apex `(0, 0, 1)`.
    /// Its map is `(a, b, c) -> (a(1-c), b(1-c), c)`.
    pub fn reference() -> Self {
        Self {
            vertices: [
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
        }
    }

    /// Builds a pyramid and checks that the map is orientation preserving.
    pub fn new(vertices: [Point3; 5]) -> Result<Self> {
        let p = Self { vertices };
        p.validate()?;
        Ok(p)
    }

    /// Parses `{"vertices": [[x, y, z], ...]}` with exactly five vertices.
    ///
    /// Malformed documents give [`Error::Parse`]; well-formed but inverted or
    /// flat pyramids give [`Error::Geometry`].
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            vertices: Vec<Point3>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let vertices: [Point3; 5] = doc
            .vertices
            .try_into()
            .map_err(|v: Vec<Point3>| Error::Parse(format!("expected 5 vertices, found {}", v.len())))?;
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("vertex coordinates must be finite".into()));
        }
        Self::new(vertices)
    }

    /// J is bilinear in `(a, b)`, so it is positive everywhere iff it is
    /// positive at the four base corners.
    pub fn validate(&self) -> Result<()> {
        for [a, b] in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
            self.jacobian_det(a, b, 0.0)?;
        }
        Ok(())
    }

    pub fn base_point(&self, a: f64, b: f64) -> Vector3<f64> {
        let [v1, v2, v3, v4, _] = self.vecs();
        v1 * ((1.0 - a) * (1.0 - b)) + v2 * (a * (1.0 - b)) + v3 * (a * b) + v4 * ((1.0 - a) * b)
    }

    pub fn map_point(&self, a: f64, b: f64, c: f64) -> Point3 {
        let v5 = Vector3::from(self.vertices[4]);
        let x = self.base_point(a, b) * (1.0 - c) + v5 * c;
        [x.x, x.y, x.z]
    }

    /// `∂(x, y, z) / ∂(r, s, t)`, columns `x_r, x_s, x_t`. Independent of `c`.
    pub fn jacobian_matrix(&self, a: f64, b: f64) -> Matrix3<f64> {
        let [v1, v2, v3, v4, v5] = self.vecs();
        let twist = v1 - v2 + v3 - v4;
        let x_r = (v2 - v1) + twist * b;
        let x_s = (v4 - v1) + twist * a;
        let x_t = v5 - self.base_point(a, b) + x_r * a + x_s * b;
        Matrix3::from_columns(&[x_r, x_s, x_t])
    }

    /// Determinant of the map from the reference pyramid, in the `(r, s, t)`
    /// measure. Fails with a geometry error where it is not positive.
    pub fn jacobian_det(&self, a: f64, b: f64, c: f64) -> Result<f64> {
        if !(c < 1.0) {
            return Err(Error::domain(format!("Jacobian requested at c = {c} (apex)")));
        }
        let det = self.jacobian_matrix(a, b).determinant();
        if !(det > 0.0) {
            return Err(Error::Geometry {
                message: format!("non-positive Jacobian determinant {det}"),
                a,
                b,
                c,
            });
        }
        Ok(det)
    }

    /// True when `v3 - v2 = v4 - v1`, i.e. the map is affine and J is constant.
    pub fn has_parallelogram_base(&self, tol: f64) -> bool {
        let [v1, v2, v3, v4, _] = self.vecs();
        (v1 - v2 + v3 - v4).norm() <= tol * (v2 - v1).norm().max((v4 - v1).norm())
    }

    /// Hex SHA-256 of the vertex coordinates' bit patterns.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for x in self.vertices.iter().flatten() {
            h.update(x.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    fn vecs(&self) -> [Vector3<f64>; 5] {
        self.vertices.map(Vector3::from)
    }
}

/// Shape of the base of a randomly generated pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    /// `v3 - v2 = v4 - v1`: the map is affine.
    Parallelogram,
    /// Flat but otherwise general quadrilateral.
    Planar,
    /// Base vertices displaced out of plane.
    NonPlanar,
}

/// A randomly perturbed, valid pyramid. Vertices move by up to 0.25 from the
/// reference positions; the draw is repeated until the map is orientation
/// preserving.
pub fn random_pyramid<R: Rng>(rng: &mut R, base: BaseKind) -> VertexPyramid {
    loop {
        let mut jitter = |s: f64| rng.gen_range(-s..s);
        let mut v = VertexPyramid::reference().vertices;
        for vert in v.iter_mut().take(4) {
            vert[0] += jitter(0.25);
            vert[1] += jitter(0.25);
            if base == BaseKind::NonPlanar {
                vert[2] += jitter(0.25);
            }
        }
        if base == BaseKind::Parallelogram {
            for d in 0..3 {
                v[2][d] = v[1][d] + v[3][d] - v[0][d];
            }
        }
        v[4] = [0.5 + jitter(0.5), 0.5 + jitter(0.5), 1.0 + jitter(0.25)];
        let scale = 0.5 + jitter(0.5).abs() * 2.0;
        let shift = [jitter(1.0), jitter(1.0), jitter(1.0)];
        for vert in v.iter_mut() {
            for d in 0..3 {
                vert[d] = vert[d] * scale + shift[d];
            }
        }
        if let Ok(p) = VertexPyramid::new(v) {
            return p;
        }
    }
}

/// Jacobian determinants and inverse Jacobians at the nodes of a pyramid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFactors {
    /// `J` at each node.
    pub jacobian: Vec<f64>,
    /// `∂(x, y, z) / ∂(r, s, t)` at each node.
    pub forward: Vec<Matrix3<f64>>,
    /// `∂(r, s, t) / ∂(x, y, z)` at each node: row = reference coordinate,
    /// column = physical coordinate.
    pub inverse: Vec<Matrix3<f64>>,
}

impl MetricFactors {
    pub fn len(&self) -> usize {
        self.jacobian.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jacobian.is_empty()
    }
}

pub fn metric_factors(p: &VertexPyramid, rule: &Rule3D) -> Result<MetricFactors> {
    if rule.domain() != Domain::PyramidCube {
        return Err(Error::usage("metric factors need a pyramid cube rule"));
    }
    let mut out = MetricFactors {
        jacobian: Vec::with_capacity(rule.len()),
        forward: Vec::with_capacity(rule.len()),
        inverse: Vec::with_capacity(rule.len()),
    };
    for &[a, b, c] in rule.nodes() {
        let det = p.jacobian_det(a, b, c)?;
        let fwd = p.jacobian_matrix(a, b);
        let inv = fwd.try_inverse().ok_or_else(|| Error::Geometry {
            message: "singular Jacobian".into(),
            a,
            b,
            c,
        })?;
        out.jacobian.push(det);
        out.forward.push(fwd);
        out.inverse.push(inv);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::pyramid_rule;
    use approx::assert_relative_eq;

    fn scaled(f: f64) -> VertexPyramid {
        let mut p = VertexPyramid::reference();
        for v in p.vertices.iter_mut() {
            for x in v.iter_mut() {
                *x *= f;
            }
        }
        p
    }

    #[test]
    fn reference_map_is_collapsed_coordinates() {
        let p = VertexPyramid::reference();
        for &(a, b, c) in &[(0.2, 0.7, 0.4), (1.0, 0.0, 0.9), (0.5, 0.5, 0.0)] {
            let x = p.map_point(a, b, c);
            assert_relative_eq!(x[0], a * (1.0 - c), epsilon = 1e-15);
            assert_relative_eq!(x[1], b * (1.0 - c), epsilon = 1e-15);
            assert_relative_eq!(x[2], c, epsilon = 1e-15);
            assert_relative_eq!(p.jacobian_det(a, b, c.min(0.5)).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert_eq!(p.map_point(0.3, 0.9, 1.0), p.vertices[4]);
    }

    #[test]
    fn scaled_pyramid_jacobian() {
        let p = scaled(2.0);
        assert_relative_eq!(p.jacobian_det(0.3, 0.6, 0.2).unwrap(), 8.0, epsilon = 1e-14);
    }

    #[test]
    fn inverted_pyramid_is_rejected() {
        let mut v = VertexPyramid::reference().vertices;
        v[4] = [0.0, 0.0, -1.0];
        assert!(matches!(VertexPyramid::new(v), Err(Error::Geometry { .. })));
        let mut v = VertexPyramid::reference().vertices;
        v[4] = [0.3, 0.3, 0.0];
        assert!(VertexPyramid::new(v).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let p = VertexPyramid::reference();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(VertexPyramid::from_json(&text).unwrap(), p);
        assert!(matches!(VertexPyramid::from_json("{"), Err(Error::Parse(_))));
        assert!(matches!(
            VertexPyramid::from_json(r#"{"vertices": [[0,0,0],[1,0,0]]}"#),
            Err(Error::Parse(_))
        ));
        let flat = r#"{"vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0],[0.5,0.5,0]]}"#;
        assert!(matches!(VertexPyramid::from_json(flat), Err(Error::Geometry { .. })));
    }

    #[test]
    fn reference_metric_is_identity() {
        let rule = pyramid_rule(3).unwrap();
        let m = metric_factors(&VertexPyramid::reference(), &rule).unwrap();
        assert_eq!(m.len(), 27);
        for inv in &m.inverse {
            assert!((inv - Matrix3::identity()).norm() < 1e-15);
        }
    }

    #[test]
    fn translation_does_not_change_metric() {
        let base = VertexPyramid::new([
            [0.0, 0.0, 0.0],
            [2.0, 0.1, 0.0],
            [1.8, 1.5, 0.2],
            [-0.1, 1.0, 0.0],
            [0.7, 0.6, 1.4],
        ])
        .unwrap();
        let mut moved = base;
        for v in moved.vertices.iter_mut() {
            v[0] += 3.0;
            v[1] -= 1.25;
            v[2] += 0.5;
        }
        let rule = pyramid_rule(3).unwrap();
        let m0 = metric_factors(&base, &rule).unwrap();
        let m1 = metric_factors(&moved, &rule).unwrap();
        for q in 0..rule.len() {
            assert_relative_eq!(m0.jacobian[q], m1.jacobian[q], max_relative = 1e-14);
            assert!((m0.inverse[q] - m1.inverse[q]).norm() < 1e-13);
        }
    }

    #[test]
    fn non_pyramid_rule_rejected() {
        let rule = crate::quadrature::tet_rule(2).unwrap();
        assert!(matches!(
            metric_factors(&VertexPyramid::reference(), &rule),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn parallelogram_detection() {
        assert!(VertexPyramid::reference().has_parallelogram_base(1e-12));
        let mut v = VertexPyramid::reference().vertices;
        v[2] = [1.2, 1.1, 0.0];
        assert!(!VertexPyramid::new(v).unwrap().has_parallelogram_base(1e-12));
    }

    #[test]
    fn random_pyramids_are_valid_and_typed() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let par = random_pyramid(&mut rng, BaseKind::Parallelogram);
            assert!(par.has_parallelogram_base(1e-12));
            let flat = random_pyramid(&mut rng, BaseKind::Planar);
            let z = flat.vertices[0][2];
            assert!(flat.vertices[..4].iter().all(|v| (v[2] - z).abs() < 1e-12));
            let bent = random_pyramid(&mut rng, BaseKind::NonPlanar);
            for p in [&par, &flat, &bent] {
                p.validate().unwrap();
            }
        }
    }
}
