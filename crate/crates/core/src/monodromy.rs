//! Monodromy of the primitive: exact loop values, membership in the
//! generated groups, and the Borel extension across good points.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cauchy::{integrate_cauchy, CauchyEvaluator, GoodVertex};
use crate::error::{Error, Result};
use crate::geometry::{certify_good_rational, BinaryWord, EndpointScheme, GoodPointConfig};
use crate::measures::{enclosed_mass, enclosed_mass_cdf, make_nu, truncate_mu, Base, ExactCdf, HaarCdf, LambdaRule, NuCdf};
use crate::path::{CrossingPath, PolyPath};
use crate::quadrature::QuadOptions;
use crate::rational::{fmt_ratio, int, modulo, pow2_inv, rational_gcd, to_f64, Rational};

/// Exact rational with a rational error radius.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonoValue {
    pub center: Rational,
    pub radius: Rational,
}

impl MonoValue {
    pub fn exact(center: Rational) -> Self {
        MonoValue { center, radius: Rational::zero() }
    }

    pub fn new(center: Rational, radius: Rational) -> Result<Self> {
        if radius.is_negative() {
            return Err(Error::Invalid("negative radius".into()));
        }
        Ok(MonoValue { center, radius })
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.center)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        (x - &self.center).abs() <= self.radius
    }

    pub fn to_json(&self) -> MonoJson {
        MonoJson { value: fmt_ratio(&self.center), radius: fmt_ratio(&self.radius) }
    }
}

impl fmt::Display for MonoValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", fmt_ratio(&self.center))
        } else {
            write!(f, "{} ± {}", fmt_ratio(&self.center), fmt_ratio(&self.radius))
        }
    }
}

impl Add for &MonoValue {
    type Output = MonoValue;

    fn add(self, o: &MonoValue) -> MonoValue {
        MonoValue { center: &self.center + &o.center, radius: &self.radius + &o.radius }
    }
}

impl Sub for &MonoValue {
    type Output = MonoValue;

    fn sub(self, o: &MonoValue) -> MonoValue {
        MonoValue { center: &self.center - &o.center, radius: &self.radius + &o.radius }
    }
}

impl Neg for &MonoValue {
    type Output = MonoValue;

    fn neg(self) -> MonoValue {
        MonoValue { center: -&self.center, radius: self.radius.clone() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MonoJson {
    pub value: String,
    pub radius: String,
}

/// Subgroups of `ℚ` the monodromy values are tested against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    /// Generators `2^{-k}`.
    DyadicMu,
    /// Generators `2^{-k} λ_k`.
    LambdaWeighted(LambdaRule),
    /// Generators: exact `ν`-masses of all pieces.
    PieceGenerated { rule: LambdaRule, scheme: EndpointScheme },
}

/// Enumerating pieces is exponential in the level.
pub const MAX_PIECE_DEPTH: u32 = 16;

impl GroupSpec {
    /// Distinct non-zero generators up to `depth`, largest first.
    pub fn generators(&self, depth: u32) -> Result<Vec<Rational>> {
        let mut set = BTreeSet::new();
        match self {
            GroupSpec::DyadicMu => {
                for k in 0..=depth {
                    set.insert(pow2_inv(k));
                }
            }
            GroupSpec::LambdaWeighted(rule) => {
                for k in 0..=depth {
                    let g = rule.lambda(k) * pow2_inv(k);
                    if !g.is_zero() {
                        set.insert(g);
                    }
                }
            }
            GroupSpec::PieceGenerated { rule, scheme } => {
                if depth > MAX_PIECE_DEPTH {
                    return Err(Error::Invalid(format!("piece-generated groups are enumerated up to level {MAX_PIECE_DEPTH}")));
                }
                for level in 0..=depth as usize {
                    for w in BinaryWord::all_of_level(level) {
                        let m = crate::measures::piece_mass(&w, Base::Nu, rule, *scheme).center;
                        if !m.is_zero() {
                            set.insert(m);
                        }
                    }
                }
            }
        }
        Ok(set.into_iter().rev().collect())
    }

    /// Positive generator of the (cyclic) group spanned at `depth`.
    pub fn lattice_step(&self, depth: u32) -> Result<Rational> {
        let gens = self.generators(depth)?;
        Ok(gens.iter().fold(Rational::zero(), |g, x| rational_gcd(&g, x)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// `v = Σ c_i g_i` with the listed `(g_i, c_i)`.
    Member(Vec<(Rational, BigInt)>),
    NotMemberUpTo(u32),
    Unknown(String),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

pub fn group_membership(v: &MonoValue, g: &GroupSpec, depth: u32) -> Result<Membership> {
    let gens = g.generators(depth)?;
    let step = gens.iter().fold(Rational::zero(), |acc, x| rational_gcd(&acc, x));
    if step.is_zero() {
        return Ok(if v.contains(&Rational::zero()) { Membership::Member(Vec::new()) } else { Membership::NotMemberUpTo(depth) });
    }
    let target = if v.is_exact() {
        if !(&v.center / &step).is_integer() {
            return Ok(Membership::NotMemberUpTo(depth));
        }
        v.center.clone()
    } else {
        if &v.radius * int(2) >= step {
            return Ok(Membership::Unknown(format!(
                "radius {} does not separate lattice points {} apart",
                fmt_ratio(&v.radius),
                fmt_ratio(&step)
            )));
        }
        let nearest = (&v.center / &step).round() * &step;
        if !v.contains(&nearest) {
            return Ok(Membership::NotMemberUpTo(depth));
        }
        nearest
    };
    let coeffs = express(&target, &gens);
    debug_assert_eq!(coeffs.iter().fold(Rational::zero(), |a, (g, c)| a + g * Rational::from_integer(c.clone())), target);
    Ok(Membership::Member(coeffs))
}

/// Integer coefficients writing `v` over `gens` (largest first), assuming
/// `v` lies in the group they span.
fn express(v: &Rational, gens: &[Rational]) -> Vec<(Rational, BigInt)> {
    let zero = BigInt::zero();
    if let Some(i) = gens.iter().position(|g| g == v) {
        return gens.iter().enumerate().map(|(j, g)| (g.clone(), if i == j { BigInt::one() } else { zero.clone() })).collect();
    }
    let chain = gens.windows(2).all(|w| (&w[0] / &w[1]).is_integer());
    if chain {
        let mut rem = v.clone();
        let mut out = Vec::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            let q = if i + 1 == gens.len() { &rem / g } else { (&rem / g).floor() };
            rem -= g * &q;
            out.push((g.clone(), q.to_integer()));
        }
        return out;
    }
    // Bezout over a common denominator
    let den = gens.iter().fold(BigInt::one(), |l, g| l.lcm(g.denom()));
    let ints: Vec<BigInt> = gens.iter().map(|g| (g * Rational::from_integer(den.clone())).to_integer()).collect();
    let mut acc_g = BigInt::zero();
    let mut acc_c: Vec<BigInt> = vec![zero.clone(); gens.len()];
    for (i, a) in ints.iter().enumerate() {
        let e = acc_g.extended_gcd(a);
        // e.gcd = e.x * acc_g + e.y * a
        for c in acc_c.iter_mut() {
            *c *= &e.x;
        }
        acc_c[i] += &e.y;
        acc_g = e.gcd;
    }
    if acc_g.is_negative() {
        acc_g = -acc_g;
        for c in acc_c.iter_mut() {
            *c = -c.clone();
        }
    }
    let q = (v * Rational::from_integer(den) / Rational::from_integer(acc_g)).to_integer();
    gens.iter().cloned().zip(acc_c.into_iter().map(|c| c * &q)).collect()
}

/// `v` modulo the lattice spanned by `2^{-k} λ_k`, `k <= depth`, with the
/// representative in `[0, step)`.
pub fn reduce_mod_dyadic(v: &MonoValue, rule: &LambdaRule, depth: u32) -> Result<MonoValue> {
    let step = GroupSpec::LambdaWeighted(rule.clone()).lattice_step(depth)?;
    reduce_mod(v, &step)
}

pub fn reduce_mod(v: &MonoValue, step: &Rational) -> Result<MonoValue> {
    if &v.radius * int(2) >= *step {
        return Err(Error::Invalid(format!(
            "radius {} too wide for lattice step {}",
            fmt_ratio(&v.radius),
            fmt_ratio(step)
        )));
    }
    Ok(MonoValue { center: modulo(&v.center, step), radius: v.radius.clone() })
}

pub fn cdf_for(base: Base, rule: &LambdaRule, scheme: EndpointScheme) -> Box<dyn ExactCdf> {
    match base {
        Base::Mu => Box::new(HaarCdf),
        Base::Nu => Box::new(NuCdf { rule: rule.clone(), scheme }),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeierstrassReport {
    pub base: Base,
    pub depth: u32,
    /// Enclosed mass of the full measure.
    pub exact: String,
    pub radius: String,
    /// Enclosed mass of the depth-`N` truncation.
    pub truncated: String,
    pub numeric: [f64; 2],
    pub quad_error: f64,
    pub tail_bound: f64,
    pub diff: f64,
}

/// Monodromy of a loop through 0 that avoids `K`.
pub fn weierstrass_monodromy(lp: &PolyPath, base: Base, rule: &LambdaRule, depth: u32, tol: f64) -> Result<(MonoValue, WeierstrassReport)> {
    if !lp.is_closed() {
        return Err(Error::Invalid("monodromy needs a closed loop".into()));
    }
    if lp.start() != Complex64::new(0.0, 0.0) {
        return Err(Error::Invalid("loops are based at 0".into()));
    }
    let cp = CrossingPath::without_crossings(lp.clone());
    let cdf = cdf_for(base, rule, EndpointScheme::default());
    let exact = enclosed_mass_cdf(&cp, cdf.as_ref())?;
    let trunc = match base {
        Base::Mu => truncate_mu(depth.max(1))?,
        Base::Nu => make_nu(rule, depth)?,
    };
    let truncated = enclosed_mass(lp, &trunc.measure)?;
    let ev = CauchyEvaluator::new(&trunc);
    let r = integrate_cauchy(&ev, lp, &[], &QuadOptions::with_tol(tol * 0.1))?;
    let diff = (r.value - Complex64::new(to_f64(&exact), 0.0)).norm();
    let value = MonoValue::exact(exact);
    let report = WeierstrassReport {
        base,
        depth: trunc.depth,
        exact: fmt_ratio(&value.center),
        radius: fmt_ratio(&value.radius),
        truncated: fmt_ratio(&truncated),
        numeric: [r.value.re, r.value.im],
        quad_error: r.quad_error,
        tail_bound: r.tail_bound,
        diff,
    };
    Ok((value, report))
}

#[derive(Clone, Debug)]
pub struct BorelOptions {
    /// Truncation depths tried in order.
    pub schedule: Vec<u32>,
    /// Stop when successive values differ by less than this.
    pub tol: f64,
    pub quad_tol: f64,
    pub good: GoodPointConfig,
}

impl BorelOptions {
    pub fn new(rule: &LambdaRule, tol: f64) -> Self {
        BorelOptions {
            schedule: (2..=7).map(|j| 2 * j).collect(),
            tol,
            quad_tol: tol * 0.01,
            good: GoodPointConfig::new(rule.kappa.clone(), 30),
        }
    }

    pub fn with_schedule(mut self, schedule: Vec<u32>) -> Self {
        self.schedule = schedule;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BorelReport {
    pub value: [f64; 2],
    pub partials: Vec<(u32, [f64; 2])>,
    pub last_diff: f64,
    /// Line-bound certificate for the final depth.
    pub tail_bound: f64,
    pub quad_error: f64,
    pub depth_used: u32,
}

impl BorelReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value[0], self.value[1])
    }
}

/// Certifies every declared crossing and pairs it with its vertex.
pub fn good_vertices(path: &CrossingPath, cfg: &GoodPointConfig) -> Result<Vec<GoodVertex>> {
    let matched = path.validate()?;
    matched
        .into_iter()
        .map(|m| Ok(GoodVertex { index: m.vertex_index, point: certify_good_rational(&m.x, cfg)? }))
        .collect()
}

/// `lim_N ∫_path f_{ν_N}` along a path that may cross `K` at certified good
/// points.
pub fn borel_extension(rule: &LambdaRule, path: &CrossingPath, opts: &BorelOptions) -> Result<BorelReport> {
    if opts.schedule.is_empty() {
        return Err(Error::Invalid("empty truncation schedule".into()));
    }
    let good = good_vertices(path, &opts.good)?;
    let qopts = QuadOptions { tol: opts.quad_tol, max_intervals: 200_000, min_length: 1e-15 };
    let mut partials = Vec::new();
    let mut prev: Option<Complex64> = None;
    let mut last_diff = f64::INFINITY;
    for &n in &opts.schedule {
        let t = make_nu(rule, n)?;
        let ev = CauchyEvaluator::new(&t);
        let r = integrate_cauchy(&ev, &path.path, &good, &qopts)?;
        partials.push((n, [r.value.re, r.value.im]));
        if let Some(p) = prev {
            last_diff = (r.value - p).norm();
            if last_diff < opts.tol {
                return Ok(BorelReport {
                    value: [r.value.re, r.value.im],
                    partials,
                    last_diff,
                    tail_bound: r.tail_bound,
                    quad_error: r.quad_error,
                    depth_used: n,
                });
            }
        }
        prev = Some(r.value);
    }
    Err(Error::NotCauchy { last_diff, depth: *opts.schedule.last().unwrap() as usize })
}

/// Exact Borel monodromy of a closed path through 0: the winding-weighted
/// `ν`-mass, cut at the crossings. Crossings must be certified good.
pub fn borel_monodromy(lp: &CrossingPath, rule: &LambdaRule, cfg: &GoodPointConfig) -> Result<MonoValue> {
    if !lp.path.is_closed() {
        return Err(Error::Invalid("monodromy needs a closed loop".into()));
    }
    if lp.path.start() != Complex64::new(0.0, 0.0) {
        return Err(Error::Invalid("loops are based at 0".into()));
    }
    good_vertices(lp, cfg)?;
    let cdf = NuCdf { rule: rule.clone(), scheme: cfg.scheme };
    Ok(MonoValue::exact(enclosed_mass_cdf(lp, &cdf)?))
}

/// Value of one crossing at `x` in direction `dir` (`+1` downward):
/// `dir · (CDF(0) - CDF(x))`, the monodromy of the single-crossing loop.
pub fn crossing_value(cdf: &dyn ExactCdf, x: &Rational, dir: i8) -> Result<Rational> {
    let m = cdf.cdf(&Rational::zero())? - cdf.cdf(x)?;
    Ok(if dir > 0 { m } else { -m })
}

/// Positively oriented loop from 0 enclosing exactly the piece `w`. It
/// crosses the axis in the gaps on either side of the piece, at half a piece
/// width from it, and touches the axis at 0.
pub fn piece_loop(w: &BinaryWord, height: f64) -> Result<PolyPath> {
    if w.level() == 0 {
        return Err(Error::Invalid("the root piece contains the base point".into()));
    }
    let p = crate::geometry::piece_interval(w);
    let lo = to_f64(&p.lo);
    let hi = to_f64(&p.hi);
    let half = (hi - lo) / 2.0;
    let (near, far) = if hi < 0.0 { (hi + half, lo - half) } else { (lo - half, hi + half) };
    let z = |re: f64, im: f64| Complex64::new(re, im);
    // left of 0 the top edge runs leftward; right of 0 the bottom edge runs
    // rightward
    let h = if hi < 0.0 { height } else { -height };
    PolyPath::closed(vec![z(0.0, 0.0), z(near, h), z(far, h), z(far, -h), z(near, -h), z(near, h / 2.0)])
}

/// Partial values as floats, for reports.
pub fn partial_diffs(rep: &BorelReport) -> Vec<f64> {
    rep.partials
        .windows(2)
        .map(|w| (Complex64::new(w[1].1[0], w[1].1[1]) - Complex64::new(w[0].1[0], w[0].1[1])).norm())
        .collect()
}

/// Exponent-free view of a coefficient for reports.
pub fn coefficient_i64(c: &BigInt) -> Option<i64> {
    c.to_i64()
}
