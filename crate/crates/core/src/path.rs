//! Polygonal paths and loops in the plane, with exact winding numbers about
//! real points and declared crossings of the Cantor set.

use num::complex::Complex64;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{address_of, classify_point, PointClass};
use crate::rational::{fmt_ratio, from_f64, parse_ratio, to_f64, Rational};

/// Minimum angle between a crossing segment and the real axis.
pub const MIN_CROSSING_ANGLE_DEG: f64 = 10.0;

/// Piecewise-linear path. A closed path has an implicit last segment back to
/// the first vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPath {
    vertices: Vec<Complex64>,
    closed: bool,
}

impl PolyPath {
    pub fn new(vertices: Vec<Complex64>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::DegeneratePath("need at least two vertices".into()));
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::DegeneratePath("non-finite vertex".into()));
        }
        let mut v = vertices;
        if closed && v.len() > 2 && v.first() == v.last() {
            v.pop();
        }
        if v.windows(2).any(|w| w[0] == w[1]) || (closed && v.first() == v.last()) {
            return Err(Error::DegeneratePath("consecutive vertices coincide".into()));
        }
        Ok(PolyPath { vertices: v, closed })
    }

    pub fn open(vertices: Vec<Complex64>) -> Result<Self> {
        Self::new(vertices, false)
    }

    pub fn closed(vertices: Vec<Complex64>) -> Result<Self> {
        Self::new(vertices, true)
    }

    /// Regular polygon of `n` vertices around `center`, counter-clockwise,
    /// starting at angle `phase`.
    pub fn circle(center: Complex64, radius: f64, n: usize, phase: f64) -> Self {
        let verts = (0..n)
            .map(|j| {
                let t = phase + std::f64::consts::TAU * j as f64 / n as f64;
                center + Complex64::from_polar(radius, t)
            })
            .collect();
        PolyPath { vertices: verts, closed: true }
    }

    /// Axis-aligned rectangle, counter-clockwise from the lower-left corner.
    pub fn rectangle(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        Self::closed(vec![
            Complex64::new(re_min, im_min),
            Complex64::new(re_max, im_min),
            Complex64::new(re_max, im_max),
            Complex64::new(re_min, im_max),
        ])
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        if self.closed {
            self.vertices[0]
        } else {
            *self.vertices.last().unwrap()
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        if self.closed {
            v[1..].reverse();
        } else {
            v.reverse();
        }
        PolyPath { vertices: v, closed: self.closed }
    }

    /// Concatenation; `other` must start where `self` ends. Two closed loops
    /// at a common base point give a closed loop.
    pub fn concat(&self, other: &PolyPath) -> Result<Self> {
        if (self.end() - other.start()).norm() > 1e-12 {
            return Err(Error::Invalid("paths do not join".into()));
        }
        let mut v = self.vertices.clone();
        if self.closed {
            v.push(self.vertices[0]);
        }
        v.extend_from_slice(&other.vertices[1..]);
        if other.closed {
            v.push(other.vertices[0]);
        }
        let closed = self.closed && other.closed;
        if closed {
            v.pop();
        }
        // drop zero-length joins
        v.dedup();
        PolyPath::new(v, closed)
    }

    /// Open path walking around the closed loop from its first vertex back to
    /// it.
    pub fn unrolled(&self) -> Self {
        if !self.closed {
            return self.clone();
        }
        let mut v = self.vertices.clone();
        v.push(self.vertices[0]);
        PolyPath { vertices: v, closed: false }
    }

    /// Brute-force test for proper self-intersections of non-adjacent
    /// segments.
    pub fn is_self_intersecting(&self) -> bool {
        let segs: Vec<_> = self.segments().collect();
        let n = segs.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (self.closed && i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(segs[i], segs[j]) {
                    return true;
                }
            }
        }
        false
    }

    /// Minimum distance from the path to a set of real points.
    pub fn min_distance_to_reals(&self, xs: &[f64]) -> f64 {
        self.segments()
            .map(|(a, b)| xs.iter().map(|&x| point_segment_distance(Complex64::new(x, 0.0), a, b)).fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    let t = if len2 == 0.0 { 0.0 } else { (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0) };
    (a + d * t - p).norm()
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

pub fn segments_intersect(s: (Complex64, Complex64), t: (Complex64, Complex64)) -> bool {
    let (a, b) = s;
    let (c, d) = t;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Complex64, q: Complex64, r: Complex64| {
        r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// A vertex in exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPoint {
    pub re: Rational,
    pub im: Rational,
}

impl ExactPoint {
    pub fn from_complex(z: Complex64) -> Result<Self> {
        Ok(ExactPoint { re: from_f64(z.re)?, im: from_f64(z.im)? })
    }
}

/// Closed polyline in exact rational coordinates, used for winding numbers.
#[derive(Clone, Debug)]
pub struct ExactLoop {
    pub vertices: Vec<ExactPoint>,
}

impl ExactLoop {
    pub fn from_path(path: &PolyPath) -> Result<Self> {
        if !path.is_closed() {
            return Err(Error::Invalid("winding numbers need a closed loop".into()));
        }
        Ok(ExactLoop { vertices: path.vertices().iter().map(|&z| ExactPoint::from_complex(z)).collect::<Result<_>>()? })
    }

    fn edges(&self) -> impl Iterator<Item = (&ExactPoint, &ExactPoint)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Winding number about the real point `x`, by signed crossings of the
    /// upward vertical ray from `x`. Errors when `x` lies on the loop.
    pub fn winding_number(&self, x: &Rational) -> Result<i64> {
        let mut w = 0i64;
        for (p, q) in self.edges() {
            if on_segment_real(p, q, x) {
                return Err(Error::AtomOnBoundary { atom: fmt_ratio(x) });
            }
            // half-open rule on x-coordinates: count edges with p.re <= x < q.re
            // or q.re <= x < p.re
            let rightward = &p.re <= x && x < &q.re;
            let leftward = &q.re <= x && x < &p.re;
            if !(rightward || leftward) {
                continue;
            }
            // height of the edge above x
            let t_num = x - &p.re;
            let t_den = &q.re - &p.re;
            let y = &p.im + (&q.im - &p.im) * t_num / t_den;
            if y.is_positive() {
                // a counter-clockwise loop passes above its interior leftward
                if leftward {
                    w += 1;
                } else {
                    w -= 1;
                }
            }
        }
        Ok(w)
    }

    /// Points where the loop meets the real axis, in order along the loop.
    /// Edges lying on the real axis are rejected.
    pub fn real_axis_hits(&self) -> Result<Vec<Rational>> {
        let mut hits = Vec::new();
        for (p, q) in self.edges() {
            if p.im.is_zero() && q.im.is_zero() {
                return Err(Error::Invalid("loop has an edge along the real axis".into()));
            }
            if p.im.is_zero() {
                hits.push(p.re.clone());
            } else if !q.im.is_zero() && (p.im.is_positive() != q.im.is_positive()) {
                let t = &p.im / (&p.im - &q.im);
                hits.push(&p.re + (&q.re - &p.re) * t);
            }
        }
        Ok(hits)
    }
}

fn on_segment_real(p: &ExactPoint, q: &ExactPoint, x: &Rational) -> bool {
    // is (x, 0) on the segment pq?
    let cross = (&q.re - &p.re) * (-&p.im) - (&q.im - &p.im) * (x - &p.re);
    if !cross.is_zero() {
        return false;
    }
    let (lo_x, hi_x) = if p.re <= q.re { (&p.re, &q.re) } else { (&q.re, &p.re) };
    let (lo_y, hi_y) = if p.im <= q.im { (&p.im, &q.im) } else { (&q.im, &p.im) };
    lo_x <= x && x <= hi_x && lo_y <= &Rational::zero() && &Rational::zero() <= hi_y
}

/// A declared crossing of the Cantor set at an exact point. `dir = +1` means
/// the path crosses downward (upper to lower half plane).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub x: Rational,
    pub dir: i8,
}

/// Polyline with its declared crossings of `K`. Each crossing is a vertex
/// lying on the real axis.
#[derive(Clone, Debug)]
pub struct CrossingPath {
    pub path: PolyPath,
    pub crossings: Vec<Crossing>,
}

/// Where a segment endpoint sits relative to the real axis, in exact terms.
#[derive(Clone, Debug)]
pub struct CrossingVertex {
    pub vertex_index: usize,
    pub x: Rational,
    pub dir: i8,
}

impl CrossingPath {
    pub fn new(path: PolyPath, crossings: Vec<Crossing>) -> Self {
        CrossingPath { path, crossings }
    }

    pub fn without_crossings(path: PolyPath) -> Self {
        CrossingPath { path, crossings: Vec::new() }
    }

    pub fn reversed(&self) -> Self {
        let mut crossings: Vec<Crossing> = self.crossings.iter().map(|c| Crossing { x: c.x.clone(), dir: -c.dir }).collect();
        crossings.reverse();
        CrossingPath { path: self.path.reversed(), crossings }
    }

    pub fn concat(&self, other: &CrossingPath) -> Result<Self> {
        let mut crossings = self.crossings.clone();
        crossings.extend(other.crossings.iter().cloned());
        Ok(CrossingPath { path: self.path.concat(&other.path)?, crossings })
    }

    /// Matches declared crossings to on-axis vertices and checks that the
    /// path meets `K` nowhere else. Returns the matched vertices and, per
    /// vertex, its exact real coordinate when it lies on the axis.
    pub fn validate(&self) -> Result<Vec<CrossingVertex>> {
        let verts = self.path.vertices();
        let n = verts.len();
        let mut matched = Vec::new();
        let mut next = 0usize;
        for (i, v) in verts.iter().enumerate() {
            if v.im != 0.0 {
                continue;
            }
            let exact = from_f64(v.re)?;
            if let Some(c) = self.crossings.get(next) {
                if (to_f64(&c.x) - v.re).abs() <= 1e-12 * (1.0 + v.re.abs()) {
                    let prev = if i > 0 { Some(verts[i - 1]) } else if self.path.is_closed() { Some(verts[n - 1]) } else { None };
                    let nxt = if i + 1 < n { Some(verts[i + 1]) } else if self.path.is_closed() { Some(verts[0]) } else { None };
                    let (prev, nxt) = match (prev, nxt) {
                        (Some(p), Some(q)) => (p, q),
                        _ => return Err(Error::Invalid("crossing at a path endpoint".into())),
                    };
                    let dir = if prev.im > 0.0 && nxt.im < 0.0 {
                        1
                    } else if prev.im < 0.0 && nxt.im > 0.0 {
                        -1
                    } else {
                        return Err(Error::Invalid(format!("path does not cross the axis at {}", fmt_ratio(&c.x))));
                    };
                    if dir != c.dir {
                        return Err(Error::Invalid(format!("declared direction {} at {} but path goes {}", c.dir, fmt_ratio(&c.x), dir)));
                    }
                    for other in [prev, nxt] {
                        let d = other - v;
                        let angle = d.im.abs().atan2(d.re.abs()).to_degrees();
                        if angle < MIN_CROSSING_ANGLE_DEG {
                            return Err(Error::NotTransversal { x: fmt_ratio(&c.x), angle_deg: angle, min_deg: MIN_CROSSING_ANGLE_DEG });
                        }
                    }
                    matched.push(CrossingVertex { vertex_index: i, x: c.x.clone(), dir });
                    next += 1;
                    continue;
                }
            }
            check_off_k(&exact)?;
        }
        if next != self.crossings.len() {
            return Err(Error::Invalid(format!("{} declared crossings but {} matched vertices", self.crossings.len(), next)));
        }
        // transversal hits strictly inside segments must fall in gaps
        for (a, b) in self.path.segments() {
            if (a.im > 0.0 && b.im < 0.0) || (a.im < 0.0 && b.im > 0.0) {
                let pa = ExactPoint::from_complex(a)?;
                let pb = ExactPoint::from_complex(b)?;
                let t = &pa.im / (&pa.im - &pb.im);
                let x = &pa.re + (&pb.re - &pa.re) * t;
                check_off_k(&x)?;
            } else if a.im == 0.0 && b.im == 0.0 {
                return Err(Error::Invalid("segment along the real axis".into()));
            }
        }
        Ok(matched)
    }
}

fn check_off_k(x: &Rational) -> Result<()> {
    match classify_point(x)? {
        PointClass::InGap | PointClass::Outside => Ok(()),
        _ => Err(Error::UndeclaredCrossing(fmt_ratio(x))),
    }
}

/// Exact loop with declared crossing vertices replaced by their exact
/// coordinates.
pub fn exact_loop_with_crossings(path: &CrossingPath, matched: &[CrossingVertex]) -> Result<ExactLoop> {
    let mut lp = ExactLoop::from_path(&path.path)?;
    for m in matched {
        lp.vertices[m.vertex_index] = ExactPoint { re: m.x.clone(), im: Rational::zero() };
    }
    Ok(lp)
}

// --- JSON wire format -------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CrossingJson {
    pub x: String,
    pub dir: i8,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PathJson {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default)]
    pub crossings: Vec<CrossingJson>,
    #[serde(default)]
    pub closed: bool,
}

impl PathJson {
    pub fn from_crossing_path(p: &CrossingPath) -> Self {
        PathJson {
            vertices: p.path.vertices().iter().map(|z| [z.re, z.im]).collect(),
            crossings: p.crossings.iter().map(|c| CrossingJson { x: fmt_ratio(&c.x), dir: c.dir }).collect(),
            closed: p.path.is_closed(),
        }
    }

    pub fn to_crossing_path(&self) -> Result<CrossingPath> {
        let verts = self.vertices.iter().map(|v| Complex64::new(v[0], v[1])).collect();
        let path = PolyPath::new(verts, self.closed)?;
        let crossings = self
            .crossings
            .iter()
            .map(|c| {
                if c.dir != 1 && c.dir != -1 {
                    return Err(Error::Parse(format!("crossing direction must be +1 or -1, got {}", c.dir)));
                }
                Ok(Crossing { x: parse_ratio(&c.x)?, dir: c.dir })
            })
            .collect::<Result<_>>()?;
        Ok(CrossingPath { path, crossings })
    }
}

/// Builds the canonical single-crossing Jordan loop through 0 that crosses
/// `K` downward at `x` (`dir = +1`) or upward (`dir = -1`). Both halves stay
/// within `height` of the axis.
pub fn crossing_loop(x: &Rational, dir: i8, height: f64) -> Result<CrossingPath> {
    let xf = to_f64(x);
    if xf == 0.0 {
        return Err(Error::Invalid("crossing at the base point".into()));
    }
    let up = Complex64::new(xf, height);
    let down = Complex64::new(xf, -height);
    let z0 = Complex64::new(0.0, 0.0);
    // 0 -> above x -> x -> below x -> 0 crosses downward
    let verts = if dir > 0 { vec![z0, up, Complex64::new(xf, 0.0), down] } else { vec![z0, down, Complex64::new(xf, 0.0), up] };
    let path = PolyPath::closed(verts)?;
    Ok(CrossingPath { path, crossings: vec![Crossing { x: x.clone(), dir }] })
}

/// Shortcut for [`address_of`]-based membership used in validations.
pub fn is_inner_point(x: &Rational) -> Result<bool> {
    Ok(matches!(address_of(x)?, Some(a) if !a.is_eventually_constant()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn winding_of_square() {
        let sq = PolyPath::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let lp = ExactLoop::from_path(&sq).unwrap();
        assert_eq!(lp.winding_number(&int(0)).unwrap(), 1);
        assert_eq!(lp.winding_number(&ratio(1, 2)).unwrap(), 1);
        assert_eq!(lp.winding_number(&int(2)).unwrap(), 0);
        assert!(matches!(lp.winding_number(&int(1)), Err(Error::AtomOnBoundary { .. })));
        let rev = ExactLoop::from_path(&sq.reversed()).unwrap();
        assert_eq!(rev.winding_number(&int(0)).unwrap(), -1);
    }

    #[test]
    fn winding_through_vertices() {
        // diamond whose vertices lie on the vertical ray above 0
        let d = PolyPath::closed(vec![c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        let lp = ExactLoop::from_path(&d).unwrap();
        assert_eq!(lp.winding_number(&int(0)).unwrap(), 1);
        assert_eq!(lp.winding_number(&ratio(1, 2)).unwrap(), 1);
        assert_eq!(lp.winding_number(&ratio(-1, 2)).unwrap(), 1);
    }

    #[test]
    fn double_loop_winds_twice() {
        let mut v = Vec::new();
        for j in 0..16 {
            let t = std::f64::consts::TAU * 2.0 * j as f64 / 16.0 + 0.1;
            v.push(c(0.5 * t.cos() * (1.0 + 0.1 * j as f64), 0.5 * t.sin() * (1.0 + 0.1 * j as f64)));
        }
        let p = PolyPath::closed(v).unwrap();
        let lp = ExactLoop::from_path(&p).unwrap();
        assert_eq!(lp.winding_number(&int(0)).unwrap(), 2);
    }

    #[test]
    fn reverse_and_concat() {
        let sq = PolyPath::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        let r = sq.reversed();
        assert_eq!(r.start(), sq.start());
        let twice = sq.concat(&sq).unwrap();
        assert!(twice.is_closed());
        assert!((twice.length() - 2.0 * sq.length()).abs() < 1e-12);
        let o = PolyPath::open(vec![c(0.0, 0.0), c(1.0, 1.0)]).unwrap();
        assert!(o.concat(&sq).is_err());
    }

    #[test]
    fn self_intersection() {
        let bow = PolyPath::closed(vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(bow.is_self_intersecting());
        assert!(!PolyPath::rectangle(0.0, 1.0, 0.0, 1.0).unwrap().is_self_intersecting());
    }

    #[test]
    fn crossing_validation() {
        let x = ratio(-1, 4);
        let lp = crossing_loop(&x, 1, 0.5).unwrap();
        let m = lp.validate().unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].dir, 1);
        // wrong declared direction
        let mut bad = lp.clone();
        bad.crossings[0].dir = -1;
        assert!(bad.validate().is_err());
        // undeclared crossing through K
        let undeclared = CrossingPath::without_crossings(lp.path.clone());
        assert!(matches!(undeclared.validate(), Err(Error::UndeclaredCrossing(_))));
        // shallow crossing
        let shallow = CrossingPath::new(
            PolyPath::closed(vec![c(0.0, 0.0), c(0.5, 0.01), c(-0.25, 0.0), c(-1.0, -0.01)]).unwrap(),
            vec![Crossing { x, dir: 1 }],
        );
        assert!(matches!(shallow.validate(), Err(Error::NotTransversal { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let lp = crossing_loop(&ratio(1, 4), -1, 0.3).unwrap();
        let j = PathJson::from_crossing_path(&lp);
        let s = serde_json::to_string(&j).unwrap();
        let back: PathJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
        let p = back.to_crossing_path().unwrap();
        assert_eq!(p.crossings, lp.crossings);
    }
}
