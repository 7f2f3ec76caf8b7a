//! Cauchy transforms `f(z) = (1/2πi) Σ m/(z - t)` of atomic truncations,
//! their primitives along paths and certified truncation tails.

use std::f64::consts::PI;

use num::complex::Complex64;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_pieces, segment_distance_to_pieces, GoodPoint};
use crate::measures::{enclosed_mass, AtomicMeasure, Base, MeasureTruncation};
use crate::path::{point_segment_distance, PathJson, PolyPath};
use crate::quadrature::{integrate_path as quad_path, QuadOptions};
use crate::rational::{fmt_ratio, from_f64, to_f64, Rational};

/// Paths must keep at least this distance from atoms, except on segments
/// ending at a declared crossing.
pub const GUARD_DISTANCE: f64 = 1e-6;

/// Level used for lower bounds on `dist(z, K)`.
const DIST_LEVEL: u32 = 40;

/// Complex sum with Neumaier compensation on both components.
#[derive(Clone, Copy, Debug, Default)]
struct CompSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompSum {
    #[inline]
    fn add(&mut self, re: f64, im: f64) {
        let t = self.re + re;
        self.re_c += if self.re.abs() >= re.abs() { (self.re - t) + re } else { (re - t) + self.re };
        self.re = t;
        let t = self.im + im;
        self.im_c += if self.im.abs() >= im.abs() { (self.im - t) + im } else { (im - t) + self.im };
        self.im = t;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: Complex64,
    pub tail_bound: f64,
    pub quad_error: f64,
    pub depth_used: u32,
    pub flags: Vec<String>,
}

impl EvalResult {
    /// Bound on the distance to the infinite-depth value.
    pub fn total_error(&self) -> f64 {
        self.tail_bound + self.quad_error
    }
}

/// Floating image of an atomic measure, with what is needed to bound the
/// distance to the untruncated measure.
#[derive(Clone, Debug)]
pub struct CauchyEvaluator {
    xs: Vec<f64>,
    ms: Vec<f64>,
    exact: Vec<Rational>,
    pub base: Option<Base>,
    pub depth: u32,
    /// Missing mass of a `ν` truncation.
    pub tail_mass: f64,
    /// `Σ_{k > depth} λ_k (2κ)^k`, for `ν`.
    pub line_tail: Option<f64>,
    /// κ of the rule behind `line_tail`.
    pub kappa: Option<Rational>,
}

impl CauchyEvaluator {
    pub fn new(t: &MeasureTruncation) -> Self {
        let mut ev = Self::from_measure(&t.measure);
        ev.base = Some(t.base);
        ev.depth = t.depth;
        ev.tail_mass = to_f64(&t.tail_mass);
        if let (Base::Nu, Some(rule)) = (t.base, t.rule.as_ref()) {
            ev.line_tail = Some(to_f64(&rule.line_tail(t.depth as i64)));
            ev.kappa = Some(rule.kappa.clone());
        }
        ev
    }

    /// Evaluator for a bare measure; tail bounds are zero.
    pub fn from_measure(m: &AtomicMeasure) -> Self {
        CauchyEvaluator {
            xs: m.positions_f64(),
            ms: m.masses_f64(),
            exact: m.atoms().iter().map(|a| a.x.clone()).collect(),
            base: None,
            depth: 0,
            tail_mass: 0.0,
            line_tail: None,
            kappa: None,
        }
    }

    /// `μ_n` built directly in floating point, for depths where the exact
    /// atom list is too large. Pole tests are floating point only.
    pub fn mu_float(n: u32) -> Result<Self> {
        if n == 0 || n > 26 {
            return Err(Error::Invalid(format!("float mu_n supports 1 <= n <= 26, got {n}")));
        }
        let mut los = vec![-0.5f64];
        let mut width = 1.0f64;
        for _ in 1..n {
            width /= 3.0;
            los = los.iter().flat_map(|&lo| [lo, lo + 2.0 * width]).collect();
        }
        let xs: Vec<f64> = los.iter().flat_map(|&lo| [lo, lo + width]).collect();
        let m = 0.5f64.powi(n as i32);
        Ok(CauchyEvaluator {
            ms: vec![m; xs.len()],
            xs,
            exact: Vec::new(),
            base: Some(Base::Mu),
            depth: n,
            tail_mass: 0.0,
            line_tail: None,
            kappa: None,
        })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ms.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.ms.iter().sum()
    }

    /// `(1/2πi) Σ m/(z - t)`.
    pub fn f(&self, z: Complex64) -> Complex64 {
        let mut s = CompSum::default();
        let y = z.im;
        let y2 = y * y;
        for (&t, &m) in self.xs.iter().zip(&self.ms) {
            let dx = z.re - t;
            let d2 = dx * dx + y2;
            s.add(m * dx / d2, -m * y / d2);
        }
        // multiply by 1/(2πi) = -i/(2π)
        let v = s.value();
        Complex64::new(v.im, -v.re) / (2.0 * PI)
    }

    /// Distance from `z` to the nearest atom.
    pub fn atom_distance(&self, z: Complex64) -> f64 {
        if self.xs.is_empty() {
            return f64::INFINITY;
        }
        let i = self.xs.partition_point(|&t| t < z.re);
        let mut best = f64::INFINITY;
        for j in [i.wrapping_sub(1), i] {
            if let Some(&t) = self.xs.get(j) {
                best = best.min((z.re - t).hypot(z.im));
            }
        }
        best
    }

    fn segment_atom_distance(&self, a: Complex64, b: Complex64) -> f64 {
        let lo = a.re.min(b.re);
        let hi = a.re.max(b.re);
        let mut best = f64::INFINITY;
        let i = self.xs.partition_point(|&t| t < lo);
        // atoms under the segment's shadow plus one on each side
        let start = i.saturating_sub(1);
        for &t in &self.xs[start..] {
            best = best.min(point_segment_distance(Complex64::new(t, 0.0), a, b));
            if t > hi {
                break;
            }
        }
        best
    }

    /// True when `z` coincides with an atom: exactly in floating point, or
    /// in exact arithmetic when `z` is real.
    pub fn is_pole(&self, z: Complex64) -> bool {
        if z.im != 0.0 {
            return false;
        }
        if self.xs.binary_search_by(|t| t.total_cmp(&z.re)).is_ok() {
            return true;
        }
        match from_f64(z.re) {
            Ok(x) => self.exact.binary_search(&x).is_ok(),
            Err(_) => false,
        }
    }

    /// Bound on `|f_full(z) - f_trunc(z)|` from the distance to `K`.
    pub fn tail_bound(&self, z: Complex64) -> f64 {
        match self.base {
            None => 0.0,
            Some(Base::Mu) => {
                if self.depth == 0 {
                    return f64::INFINITY;
                }
                // μ and μ_N give every level-(N-1) piece the same mass
                let d = distance_to_pieces(z.re, z.im, self.depth - 1);
                3f64.powi(1 - self.depth as i32) / (2.0 * PI * d * d)
            }
            Some(Base::Nu) => {
                let d = distance_to_pieces(z.re, z.im, DIST_LEVEL);
                self.tail_mass / (2.0 * PI * d)
            }
        }
    }

    /// Bound valid on every line through the good point `x0` meeting the
    /// axis at angle `alpha` (radians); `None` when it does not apply.
    pub fn line_bound(&self, good: &GoodPoint, alpha: f64) -> Option<f64> {
        let lt = self.line_tail?;
        let kappa = self.kappa.as_ref()?;
        // the bound needs every order above the depth to be tested, at a
        // radius no smaller than the rule's
        if self.depth + 1 < good.k0 || &good.kappa > kappa {
            return None;
        }
        Some(lt / (2.0 * PI * alpha.sin().abs()))
    }

    /// Primitive from 0 by analytic continuation along a polyline: the
    /// logarithms are followed segment by segment, so no quadrature is
    /// involved.
    pub fn continue_along(&self, path: &PolyPath) -> Result<Complex64> {
        let verts: Vec<Complex64> = path.vertices().to_vec();
        let mut pts = verts.clone();
        if path.is_closed() {
            pts.push(verts[0]);
        }
        let start = pts[0];
        let end = *pts.last().expect("non-empty path");
        let mut s = CompSum::default();
        for (&t, &m) in self.xs.iter().zip(&self.ms) {
            let tz = Complex64::new(t, 0.0);
            let mut darg = 0.0;
            for w in pts.windows(2) {
                let a = w[0] - tz;
                let b = w[1] - tz;
                if a.is_zero() || b.is_zero() {
                    return Err(Error::Pole(format!("{t}")));
                }
                darg += (b / a).arg();
            }
            let dlog = (end - tz).norm().ln() - (start - tz).norm().ln();
            s.add(m * dlog, m * darg);
        }
        // (1/2πi)(log-modulus + i arg)
        let v = s.value();
        Ok(Complex64::new(v.im, -v.re) / (2.0 * PI))
    }

    /// Primitive from 0 to `z` along any path that leaves 0 into the half
    /// plane containing `z` and stays there (`z` off the real axis).
    pub fn primitive_direct(&self, z: Complex64) -> Complex64 {
        let up = z.im >= 0.0;
        let mut s = CompSum::default();
        for (&t, &m) in self.xs.iter().zip(&self.ms) {
            let w = z - Complex64::new(t, 0.0);
            let base_arg = if t > 0.0 {
                if up {
                    PI
                } else {
                    -PI
                }
            } else {
                0.0
            };
            let dlog = w.norm().ln() - t.abs().ln();
            s.add(m * dlog, m * (w.arg() - base_arg));
        }
        let v = s.value();
        Complex64::new(v.im, -v.re) / (2.0 * PI)
    }

    /// `Im F = -(1/2π) Σ m ln|z - t|/|t|`, single valued.
    pub fn im_primitive(&self, z: Complex64) -> f64 {
        let mut s = CompSum::default();
        for (&t, &m) in self.xs.iter().zip(&self.ms) {
            let w = z - Complex64::new(t, 0.0);
            s.add(m * (w.norm().ln() - t.abs().ln()), 0.0);
        }
        -s.value().re / (2.0 * PI)
    }

    /// Angle coordinate `(1/2π) Σ m Arg(z - t)`: `Re F` shifted so that it
    /// behaves like `arg(z)/2π` in the far field.
    pub fn angle(&self, z: Complex64) -> f64 {
        let mut s = CompSum::default();
        for (&t, &m) in self.xs.iter().zip(&self.ms) {
            let w = z - Complex64::new(t, 0.0);
            s.add(m * w.arg(), 0.0);
        }
        s.value().re / (2.0 * PI)
    }
}

/// `f` at `z` with its truncation tail.
pub fn eval_cauchy(m: &MeasureTruncation, z: Complex64) -> Result<EvalResult> {
    let ev = CauchyEvaluator::new(m);
    eval_with(&ev, z)
}

pub fn eval_with(ev: &CauchyEvaluator, z: Complex64) -> Result<EvalResult> {
    if ev.is_pole(z) {
        return Err(Error::Pole(format!("{z}")));
    }
    let value = ev.f(z);
    let mut tail = ev.tail_bound(z);
    let mut flags = Vec::new();
    if !tail.is_finite() || tail > 1e6 {
        flags.push("NEAR_K".to_string());
        if !tail.is_finite() {
            tail = f64::MAX;
        }
    }
    Ok(EvalResult { value, tail_bound: tail, quad_error: 0.0, depth_used: ev.depth, flags })
}

/// `f` on the vertical line through a certified good point, where the
/// line-uniform bound applies.
pub fn eval_on_good_line(ev: &CauchyEvaluator, good: &GoodPoint, y: f64) -> Result<EvalResult> {
    let z = Complex64::new(to_f64(&good.x), y);
    let mut r = eval_with(ev, z)?;
    if let Some(lb) = ev.line_bound(good, PI / 2.0) {
        if lb < r.tail_bound {
            r.tail_bound = lb;
            r.flags.retain(|f| f != "NEAR_K");
        }
    }
    Ok(r)
}

/// A path vertex lying on a certified good point of `K`.
#[derive(Clone, Debug)]
pub struct GoodVertex {
    pub index: usize,
    pub point: GoodPoint,
}

/// Sum over segments of `length × sup tail bound`, using the line bound on
/// segments that end at a good vertex.
pub fn path_tail_bound(ev: &CauchyEvaluator, path: &PolyPath, good: &[GoodVertex]) -> f64 {
    if ev.base.is_none() {
        return 0.0;
    }
    let verts = path.vertices();
    let n = verts.len();
    let mut total = 0.0;
    for (i, (a, b)) in path.segments().enumerate() {
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let j = (i + 1) % n;
        let touching = good.iter().find(|g| g.index == i || g.index == j);
        let per_len = match touching {
            Some(g) => {
                let d = if g.index == i { b - a } else { a - b };
                let alpha = d.im.atan2(d.re);
                ev.line_bound(&g.point, alpha).unwrap_or(f64::INFINITY)
            }
            None => segment_tail(ev, a, b),
        };
        total += len * per_len;
    }
    total
}

fn segment_tail(ev: &CauchyEvaluator, a: Complex64, b: Complex64) -> f64 {
    match ev.base {
        None => 0.0,
        Some(Base::Mu) => {
            if ev.depth == 0 {
                return f64::INFINITY;
            }
            let d = segment_distance_to_pieces((a.re, a.im), (b.re, b.im), ev.depth - 1);
            3f64.powi(1 - ev.depth as i32) / (2.0 * PI * d * d)
        }
        Some(Base::Nu) => {
            let d = segment_distance_to_pieces((a.re, a.im), (b.re, b.im), DIST_LEVEL);
            ev.tail_mass / (2.0 * PI * d)
        }
    }
}

/// `∫_path f dz` for the truncation, refusing paths that pass within
/// [`GUARD_DISTANCE`] of an atom except on segments ending at a good vertex.
pub fn integrate_cauchy(ev: &CauchyEvaluator, path: &PolyPath, good: &[GoodVertex], opts: &QuadOptions) -> Result<EvalResult> {
    let n = path.vertices().len();
    for (i, (a, b)) in path.segments().enumerate() {
        let j = (i + 1) % n;
        if good.iter().any(|g| g.index == i || g.index == j) {
            continue;
        }
        let d = ev.segment_atom_distance(a, b);
        if d < GUARD_DISTANCE {
            return Err(Error::Pole(format!("segment {a} -> {b} passes within {d:e} of an atom")));
        }
    }
    let q = quad_path(|z| ev.f(z), path, opts)?;
    let tail = path_tail_bound(ev, path, good);
    let mut flags = Vec::new();
    if !tail.is_finite() {
        flags.push("TAIL_UNBOUNDED".to_string());
    }
    Ok(EvalResult { value: q.value, tail_bound: tail, quad_error: q.error, depth_used: ev.depth, flags })
}

/// Generic path integral of an arbitrary integrand.
pub fn integrate_fn<F: Fn(Complex64) -> Complex64>(f: F, path: &PolyPath, opts: &QuadOptions) -> Result<EvalResult> {
    let q = quad_path(f, path, opts)?;
    Ok(EvalResult { value: q.value, tail_bound: 0.0, quad_error: q.error, depth_used: 0, flags: Vec::new() })
}

/// `F(z₁)` along `path`, which must start at 0.
pub fn primitive_at(m: &MeasureTruncation, path: &PolyPath, tol: f64) -> Result<EvalResult> {
    if path.start() != Complex64::new(0.0, 0.0) {
        return Err(Error::Invalid(format!("primitive paths start at 0, got {}", path.start())));
    }
    let ev = CauchyEvaluator::new(m);
    integrate_cauchy(&ev, path, &[], &QuadOptions::with_tol(tol))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResidueReport {
    #[serde(rename = "loop")]
    pub loop_: PathJson,
    pub exact: String,
    pub numeric: [f64; 2],
    pub diff: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Numeric loop integral against the exact enclosed mass of the truncation.
pub fn residue_check(lp: &PolyPath, m: &AtomicMeasure, tol: f64) -> Result<ResidueReport> {
    let exact = enclosed_mass(lp, m)?;
    let ev = CauchyEvaluator::from_measure(m);
    let opts = QuadOptions::with_tol(tol * 0.1);
    let r = integrate_cauchy(&ev, lp, &[], &opts)?;
    let diff = (r.value - Complex64::new(to_f64(&exact), 0.0)).norm();
    Ok(ResidueReport {
        loop_: PathJson { vertices: lp.vertices().iter().map(|z| [z.re, z.im]).collect(), crossings: Vec::new(), closed: true },
        exact: fmt_ratio(&exact),
        numeric: [r.value.re, r.value.im],
        diff,
        tol,
        pass: diff <= tol,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProfileRow {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "ReF")]
    pub re_f: f64,
    #[serde(rename = "ImF")]
    pub im_f: f64,
    pub tail_bound: f64,
}

/// `F(x₀ + iy)` for each `y > 0`, continued from 0 through the upper half
/// plane. With `good` given the tail uses the line bound along the vertical
/// part of the path `0 → x₀ + i → x₀ + iy`.
pub fn vertical_profile(ev: &CauchyEvaluator, x0: f64, ys: &[f64], good: Option<&GoodPoint>) -> Result<Vec<ProfileRow>> {
    let mut rows = Vec::with_capacity(ys.len());
    let anchor = Complex64::new(x0, 1.0);
    let lead = PolyPath::open(vec![Complex64::new(0.0, 0.0), anchor])?;
    let lead_tail = path_tail_bound(ev, &lead, &[]);
    for &y in ys {
        if y <= 0.0 {
            return Err(Error::Invalid(format!("profile heights must be positive, got {y}")));
        }
        let z = Complex64::new(x0, y);
        let value = ev.primitive_direct(z);
        let vertical = (1.0 - y).abs();
        let line = good.and_then(|g| ev.line_bound(g, PI / 2.0));
        let seg_tail = match line {
            Some(lb) => lb * vertical,
            None if vertical == 0.0 => 0.0,
            None => vertical * segment_tail(ev, anchor, z),
        };
        rows.push(ProfileRow { x: x0, y, re_f: value.re, im_f: value.im, tail_bound: lead_tail + seg_tail });
    }
    Ok(rows)
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("x,y,ReF,ImF,tail_bound\n");
    for r in rows {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e},{:.6e}\n", r.x, r.y, r.re_f, r.im_f, r.tail_bound));
    }
    out
}

/// Rational function given by its simple poles and residues.
#[derive(Clone, Debug)]
pub struct PolarForm {
    pub poles: Vec<(Complex64, Complex64)>,
    /// Upper bound on `Σ |residue|`.
    pub mass_bound: f64,
}

impl PolarForm {
    pub fn new(poles: Vec<(Complex64, Complex64)>, mass_bound: f64) -> Result<Self> {
        let tv: f64 = poles.iter().map(|(_, r)| r.norm()).sum();
        if tv > mass_bound * (1.0 + 1e-12) {
            return Err(Error::Invalid(format!("total residue {tv} exceeds the bound {mass_bound}")));
        }
        Ok(PolarForm { poles, mass_bound })
    }

    /// The transform of an atomic measure as a rational function: residue
    /// `m/(2πi)` at each atom.
    pub fn from_cauchy(m: &AtomicMeasure) -> Self {
        let k = Complex64::new(0.0, -1.0 / (2.0 * PI));
        let poles: Vec<_> = m.atoms().iter().map(|a| (Complex64::new(to_f64(&a.x), 0.0), k * to_f64(&a.mass))).collect();
        let tv = poles.iter().map(|(_, r)| r.norm()).sum();
        PolarForm { poles, mass_bound: tv }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.poles.iter().map(|(p, r)| r / (z - p)).sum()
    }
}

/// Complex atomic measure carried by the poles of a rational function.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarMeasure {
    pub atoms: Vec<(Complex64, Complex64)>,
    pub total_variation: f64,
}

pub fn polar_measure(r: &PolarForm) -> Result<PolarMeasure> {
    let mut atoms = r.poles.clone();
    atoms.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    for w in atoms.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::RepeatedPole(format!("{}", w[0].0)));
        }
    }
    let total_variation = atoms.iter().map(|(_, r)| r.norm()).sum();
    Ok(PolarMeasure { atoms, total_variation })
}

/// Residue of `f` at `pole` by a small circular contour.
pub fn residue_by_contour<F: Fn(Complex64) -> Complex64>(f: F, pole: Complex64, radius: f64, tol: f64) -> Result<Complex64> {
    let c = PolyPath::circle(pole, radius, 16, 0.1);
    let q = quad_path(f, &c, &QuadOptions::with_tol(tol))?;
    Ok(q.value / Complex64::new(0.0, 2.0 * PI))
}
