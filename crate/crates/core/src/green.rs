//! Green lines of `F_μ`: level lines of the angle coordinate traced from
//! the far field down to the real axis.

use num::{Signed, Zero};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::CauchyEvaluator;
use crate::error::{Error, Result};
use crate::measures::truncate_mu;
use crate::path::segments_intersect;
use crate::rational::{dyadic_exponent, fmt_ratio, modulo, ratio, to_f64, Rational};

/// Radius of the circle the traces start from.
pub const START_RADIUS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceStatus {
    /// Reached the real axis at a non-dyadic angle.
    Landed,
    /// Dyadic angle: the line ends in a gap or at a critical point.
    NonLanding,
    /// Step budget exhausted before reaching the axis.
    Stalled,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreenLineTrace {
    pub theta: String,
    pub polyline: Vec<[f64; 2]>,
    /// Real part of the last point.
    pub landing: f64,
    /// Height of the last point above the axis.
    pub landing_height: f64,
    /// Largest `|angle − θ|` seen along the trace.
    pub residual: f64,
    pub status: TraceStatus,
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub depth: u32,
    /// Largest step length.
    pub step: f64,
    /// Corrector tolerance on the angle coordinate.
    pub tol: f64,
    /// Stop once `|Im z|` drops below this.
    pub landing_tol: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { depth: 10, step: 0.05, tol: 1e-12, landing_tol: 1e-9, max_steps: 20_000 }
    }
}

/// Representative of `θ` in `(-1/2, 1/2]`.
pub fn normalize_theta(theta: &Rational) -> Rational {
    let t = modulo(theta, &Rational::from_integer(1.into()));
    if t > ratio(1, 2) {
        t - Rational::from_integer(1.into())
    } else {
        t
    }
}

pub fn is_dyadic(theta: &Rational) -> bool {
    dyadic_exponent(theta).is_some()
}

fn wrap(d: f64) -> f64 {
    d - d.round()
}

/// Point of the start circle where the angle coordinate equals `theta`.
fn start_point(ev: &CauchyEvaluator, theta: f64) -> Complex64 {
    let (mut lo, mut hi) = if theta > 0.0 { (0.0, std::f64::consts::PI) } else { (-std::f64::consts::PI, 0.0) };
    let g = |phi: f64| ev.angle(Complex64::from_polar(START_RADIUS, phi));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < theta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Complex64::from_polar(START_RADIUS, 0.5 * (lo + hi))
}

fn correct(ev: &CauchyEvaluator, mut z: Complex64, theta: f64, tol: f64) -> (Complex64, f64) {
    let mut r = wrap(ev.angle(z) - theta);
    for _ in 0..12 {
        if r.abs() <= tol {
            break;
        }
        let f = ev.f(z);
        let n2 = f.norm_sqr();
        if n2 == 0.0 {
            break;
        }
        // d(angle) = Re(f dz)
        let dz = -r * f.conj() / n2;
        let cap = 0.25 * z.im.abs();
        z += if dz.norm() > cap { dz * (cap / dz.norm()) } else { dz };
        r = wrap(ev.angle(z) - theta);
    }
    (z, r.abs())
}

/// Follows the Green line of `theta` for the truncation `μ_depth`.
pub fn trace_green_line(theta: &Rational, opts: &TraceOptions) -> Result<GreenLineTrace> {
    if !(opts.step > 0.0 && opts.tol > 0.0 && opts.landing_tol > 0.0) {
        return Err(Error::Invalid("step and tolerances must be positive".into()));
    }
    let t = normalize_theta(theta);
    let dyadic = is_dyadic(&t);
    let label = fmt_ratio(&t);
    if t.is_zero() || t == ratio(1, 2) {
        // along the real axis to the end of the hull
        let sign = if t.is_zero() { 1.0 } else { -1.0 };
        let n = (((START_RADIUS - 0.5) / opts.step).ceil() as usize).max(1);
        let polyline = (0..=n)
            .map(|i| [sign * (START_RADIUS - (START_RADIUS - 0.5) * i as f64 / n as f64), 0.0])
            .collect();
        return Ok(GreenLineTrace {
            theta: label,
            polyline,
            landing: sign * 0.5,
            landing_height: 0.0,
            residual: 0.0,
            status: TraceStatus::NonLanding,
        });
    }
    let ev = CauchyEvaluator::new(&truncate_mu(opts.depth)?);
    let th = to_f64(&t);
    let (mut z, mut residual) = correct(&ev, start_point(&ev, th), th, opts.tol);
    let mut polyline = vec![[z.re, z.im]];
    let mut steps = 0;
    while z.im.abs() >= opts.landing_tol {
        if steps == opts.max_steps {
            return Ok(GreenLineTrace {
                theta: label,
                polyline,
                landing: z.re,
                landing_height: z.im.abs(),
                residual,
                status: TraceStatus::Stalled,
            });
        }
        steps += 1;
        let f = ev.f(z);
        let norm = f.norm();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let h = opts.step.min(0.5 * z.im.abs()).min(0.5 * ev.atom_distance(z));
        // tangent to the level line, pointing towards increasing Im F
        let dir = Complex64::i() * f.conj() / norm;
        let (next, r) = correct(&ev, z + dir * h, th, opts.tol);
        residual = residual.max(r);
        z = next;
        polyline.push([z.re, z.im]);
    }
    Ok(GreenLineTrace {
        theta: label,
        polyline,
        landing: z.re,
        landing_height: z.im.abs(),
        residual,
        status: if dyadic { TraceStatus::NonLanding } else { TraceStatus::Landed },
    })
}

/// Smallest distance from `p` to the trace polyline.
pub fn distance_to_trace(trace: &GreenLineTrace, p: Complex64) -> f64 {
    let pts: Vec<Complex64> = trace.polyline.iter().map(|q| Complex64::new(q[0], q[1])).collect();
    if pts.len() == 1 {
        return (pts[0] - p).norm();
    }
    pts.windows(2).map(|w| crate::path::point_segment_distance(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
}

/// Whether two traces cross anywhere.
pub fn traces_cross(a: &GreenLineTrace, b: &GreenLineTrace) -> bool {
    let pa: Vec<Complex64> = a.polyline.iter().map(|q| Complex64::new(q[0], q[1])).collect();
    let pb: Vec<Complex64> = b.polyline.iter().map(|q| Complex64::new(q[0], q[1])).collect();
    for s in pa.windows(2) {
        let (lo, hi) = (s[0].re.min(s[1].re), s[0].re.max(s[1].re));
        for t in pb.windows(2) {
            if t[0].re.max(t[1].re) < lo || t[0].re.min(t[1].re) > hi {
                continue;
            }
            if segments_intersect((s[0], s[1]), (t[0], t[1])) {
                return true;
            }
        }
    }
    false
}

/// Whether the angle is admissible for a landing claim.
pub fn landing_angle(theta: &Rational) -> bool {
    let t = normalize_theta(theta);
    !t.is_zero() && !is_dyadic(&t) && t.abs() < ratio(1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_hit_origin() {
        let opts = TraceOptions::default();
        for t in [ratio(1, 4), ratio(-1, 4), ratio(3, 4)] {
            let tr = trace_green_line(&t, &opts).unwrap();
            assert_eq!(tr.status, TraceStatus::NonLanding);
            assert!(distance_to_trace(&tr, Complex64::zero()) < 1e-6, "{}", tr.landing);
        }
    }

    #[test]
    fn conjugate_angles_share_landing() {
        let opts = TraceOptions::default();
        let a = trace_green_line(&ratio(1, 3), &opts).unwrap();
        let b = trace_green_line(&ratio(-1, 3), &opts).unwrap();
        assert_eq!(a.status, TraceStatus::Landed);
        assert!((a.landing - b.landing).abs() < 1e-3);
        assert!(a.residual < 1e-9);
        assert!(!traces_cross(&a, &b));
    }

    #[test]
    fn dyadic_and_axis_cases() {
        let opts = TraceOptions::default();
        let half = trace_green_line(&ratio(1, 2), &opts).unwrap();
        assert_eq!(half.status, TraceStatus::NonLanding);
        assert_eq!(half.landing, -0.5);
        let eighth = trace_green_line(&ratio(1, 8), &opts).unwrap();
        assert_eq!(eighth.status, TraceStatus::NonLanding);
        assert!(!landing_angle(&ratio(1, 8)));
        assert!(landing_angle(&ratio(1, 3)));
    }

    #[test]
    fn distinct_angles_do_not_cross() {
        let opts = TraceOptions::default();
        let traces: Vec<_> = [ratio(1, 3), ratio(1, 5), ratio(2, 5), ratio(1, 7), ratio(-1, 3)]
            .iter()
            .map(|t| trace_green_line(t, &opts).unwrap())
            .collect();
        for i in 0..traces.len() {
            for j in i + 1..traces.len() {
                assert!(!traces_cross(&traces[i], &traces[j]), "{} {}", traces[i].theta, traces[j].theta);
            }
        }
    }
}
