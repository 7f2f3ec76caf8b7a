//! Exact geometry of the translated triadic Cantor set `K = C - 1/2`.
//!
//! A piece of level `n` is addressed by a binary word of length `n`; digit `0`
//! selects the left third and digit `1` the right third. Points of `K` are
//! addressed by infinite binary sequences; the eventually periodic ones are
//! exactly the rational points of `K` and are represented by
//! [`CantorAddress`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num::{One, Signed};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_ratio, int, pow3_inv, ratio, Rational};

/// Finite word over `{0, 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryWord(Vec<u8>);

impl BinaryWord {
    pub fn empty() -> Self {
        BinaryWord(Vec::new())
    }

    pub fn from_digits(digits: Vec<u8>) -> Result<Self> {
        if digits.iter().any(|&d| d > 1) {
            return Err(Error::Invalid(format!("binary word with digit outside 0/1: {digits:?}")));
        }
        Ok(BinaryWord(digits))
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn child(&self, d: u8) -> Self {
        let mut v = self.0.clone();
        v.push(d & 1);
        BinaryWord(v)
    }

    pub fn prefix(&self, n: usize) -> Self {
        BinaryWord(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    /// Binary value of the word, i.e. the index of its piece among the
    /// `2^level` pieces of that level, counted from the left.
    pub fn index(&self) -> u128 {
        self.0.iter().fold(0u128, |acc, &d| (acc << 1) | d as u128)
    }

    /// All words of the given level in left-to-right order.
    pub fn all_of_level(level: usize) -> impl Iterator<Item = BinaryWord> {
        assert!(level < 64, "level too large to enumerate");
        (0u64..(1u64 << level)).map(move |i| {
            BinaryWord((0..level).rev().map(|b| ((i >> b) & 1) as u8).collect())
        })
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for BinaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("binary word {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BinaryWord)
    }
}

/// Eventually periodic address `preperiod · period^∞`. An empty period is read
/// as `0^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CantorAddress {
    pub preperiod: BinaryWord,
    pub period: BinaryWord,
}

impl CantorAddress {
    pub fn new(preperiod: BinaryWord, period: BinaryWord) -> Self {
        CantorAddress { preperiod, period }
    }

    pub fn periodic(period: &str) -> Result<Self> {
        Ok(CantorAddress::new(BinaryWord::empty(), period.parse()?))
    }

    /// Digit `j` (0-based) of the infinite sequence.
    pub fn digit(&self, j: usize) -> u8 {
        let p = self.preperiod.level();
        if j < p {
            self.preperiod.0[j]
        } else if self.period.0.is_empty() {
            0
        } else {
            self.period.0[(j - p) % self.period.level()]
        }
    }

    pub fn prefix(&self, n: usize) -> BinaryWord {
        BinaryWord((0..n).map(|j| self.digit(j)).collect())
    }

    /// Eventually constant addresses are exactly the piece endpoints.
    pub fn is_eventually_constant(&self) -> bool {
        self.period.is_constant()
    }

    pub fn coordinate(&self) -> Rational {
        point_of_address(self)
    }

    /// Canonical form: shortest period, then shortest preperiod.
    pub fn normalized(&self) -> Self {
        let mut period = if self.period.0.is_empty() { vec![0] } else { self.period.0.clone() };
        let n = period.len();
        for d in 1..=n {
            if n % d == 0 && (0..n).all(|i| period[i] == period[i % d]) {
                period.truncate(d);
                break;
            }
        }
        let mut pre = self.preperiod.0.clone();
        // rotate the period into the preperiod while the last preperiod digit
        // equals the last period digit
        while let Some(&last) = pre.last() {
            if last == *period.last().unwrap() {
                pre.pop();
                period.rotate_right(1);
            } else {
                break;
            }
        }
        CantorAddress::new(BinaryWord(pre), BinaryWord(period))
    }
}

impl fmt::Display for CantorAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.preperiod, self.period)
    }
}

impl FromStr for CantorAddress {
    type Err = Error;

    /// `"01(10)"`: preperiod followed by the period in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (pre, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Parse(format!("address {s:?} needs a parenthesised period")))?;
        let per = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("address {s:?} missing ')'")))?;
        Ok(CantorAddress::new(pre.parse()?, per.parse()?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceInterval {
    pub word: BinaryWord,
    pub lo: Rational,
    pub hi: Rational,
}

impl PieceInterval {
    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// How the `2^k` "end-points of order k" are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointScheme {
    /// Order 0 is `{-1/2}`; order `k >= 1` is both endpoints of every
    /// level-`(k-1)` piece.
    #[default]
    CumulativePieceEndpoints,
    /// Order 0 is `{-1/2}`; order `k >= 1` is the left endpoint of every
    /// level-`k` piece.
    LeftEndpoints,
}

impl FromStr for EndpointScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cumulative" | "cumulative_piece_endpoints" => Ok(EndpointScheme::CumulativePieceEndpoints),
            "left" | "left_endpoints" => Ok(EndpointScheme::LeftEndpoints),
            other => Err(Error::Parse(format!("unknown endpoint scheme {other:?}"))),
        }
    }
}

fn minus_half() -> Rational {
    ratio(-1, 2)
}

/// Left endpoint of the piece addressed by `digits`.
fn piece_lo(digits: &[u8]) -> Rational {
    let mut lo = minus_half();
    let mut scale = Rational::one();
    let third = ratio(1, 3);
    for &d in digits {
        scale *= &third;
        if d == 1 {
            lo += &scale * int(2);
        }
    }
    lo
}

pub fn piece_interval(w: &BinaryWord) -> PieceInterval {
    let lo = piece_lo(w.digits());
    let hi = &lo + pow3_inv(w.level() as u32);
    PieceInterval { word: w.clone(), lo, hi }
}

pub fn point_of_address(a: &CantorAddress) -> Rational {
    let p = a.preperiod.level() as u32;
    let head = piece_lo(a.preperiod.digits()) + ratio(1, 2);
    if a.period.0.is_empty() || a.period.0.iter().all(|&d| d == 0) {
        return head - ratio(1, 2);
    }
    let l = a.period.level() as u32;
    // one period as a triadic fraction, then the geometric series over repeats
    let block = piece_lo(a.period.digits()) + ratio(1, 2);
    let series = block / (Rational::one() - pow3_inv(l));
    head + series * pow3_inv(p) - ratio(1, 2)
}

/// Triadic-digit walk of `x + 1/2`. Returns the address, `Ok(None)` when `x`
/// falls in a gap or outside `[-1/2, 1/2]`.
pub fn address_of(x: &Rational) -> Result<Option<CantorAddress>> {
    const MAX_STEPS: usize = 200_000;
    let mut y = x + ratio(1, 2);
    if y.is_negative() || y > Rational::one() {
        return Ok(None);
    }
    let one_third = ratio(1, 3);
    let two_thirds = ratio(2, 3);
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut digits = Vec::new();
    for step in 0..MAX_STEPS {
        if let Some(&start) = seen.get(&y) {
            let pre = digits[..start].to_vec();
            let per = digits[start..].to_vec();
            return Ok(Some(CantorAddress::new(BinaryWord(pre), BinaryWord(per)).normalized()));
        }
        seen.insert(y.clone(), step);
        if y <= one_third {
            digits.push(0);
            y *= int(3);
        } else if y >= two_thirds {
            digits.push(1);
            y = y * int(3) - int(2);
        } else {
            return Ok(None);
        }
    }
    Err(Error::Invalid(format!(
        "triadic expansion of {} did not become periodic within {MAX_STEPS} digits",
        fmt_ratio(x)
    )))
}

pub fn endpoints_of_order(k: u32, scheme: EndpointScheme) -> Vec<Rational> {
    if k == 0 {
        return vec![minus_half()];
    }
    match scheme {
        EndpointScheme::CumulativePieceEndpoints => BinaryWord::all_of_level(k as usize - 1)
            .flat_map(|w| {
                let p = piece_interval(&w);
                [p.lo, p.hi]
            })
            .collect(),
        EndpointScheme::LeftEndpoints => BinaryWord::all_of_level(k as usize)
            .map(|w| piece_interval(&w).lo)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointClass {
    InGap,
    /// Endpoint of a removed interval, with its minimal order under the
    /// cumulative scheme.
    Endpoint(u32),
    InnerPoint,
    Outside,
}

pub fn classify_point(x: &Rational) -> Result<PointClass> {
    if x < &minus_half() || x > &ratio(1, 2) {
        return Ok(PointClass::Outside);
    }
    match address_of(x)? {
        None => Ok(PointClass::InGap),
        Some(a) if a.is_eventually_constant() => Ok(PointClass::Endpoint(endpoint_order(&a))),
        Some(_) => Ok(PointClass::InnerPoint),
    }
}

/// Minimal cumulative order of an endpoint address (`w 0^∞` or `w 1^∞`).
fn endpoint_order(a: &CantorAddress) -> u32 {
    let a = a.normalized();
    let tail = a.period.digits().first().copied().unwrap_or(0);
    let mut stripped = a.preperiod.0.clone();
    while stripped.last() == Some(&tail) {
        stripped.pop();
    }
    match (stripped.len(), tail) {
        (0, 0) => 0,
        (len, _) => len as u32 + 1,
    }
}

/// Outcome of the κ-badly-approximable test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoodVerdict {
    /// `|x - x_{k,l}| >= κ^{-k}` for every `k0 <= k <= depth`.
    GoodUpTo(u32),
    /// First violation: order `k`, index `l` in `endpoints_of_order(k)`.
    Bad { k: u32, l: u64, distance: Rational },
}

#[derive(Clone, Debug)]
pub struct GoodPointConfig {
    pub kappa: Rational,
    pub depth: u32,
    pub k0: u32,
    pub scheme: EndpointScheme,
}

impl GoodPointConfig {
    pub fn new(kappa: Rational, depth: u32) -> Self {
        GoodPointConfig { kappa, depth, k0: DEFAULT_K0, scheme: EndpointScheme::default() }
    }
}

/// No point of `K` survives the order-1 ball for any κ > 3 (the order-1
/// endpoints are ±1/2), so the test starts at order 2.
pub const DEFAULT_K0: u32 = 2;

/// A point that passed [`good_point_test`], with the parameters it passed at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodPoint {
    pub x: Rational,
    pub address: CantorAddress,
    pub kappa: Rational,
    pub k0: u32,
    pub depth: u32,
}

pub fn good_point_test(x: &Rational, cfg: &GoodPointConfig) -> Result<GoodVerdict> {
    let addr = address_of(x)?.ok_or_else(|| Error::NotInCantorSet(fmt_ratio(x)))?;
    good_point_test_address(&addr, cfg)
}

pub fn good_point_test_address(addr: &CantorAddress, cfg: &GoodPointConfig) -> Result<GoodVerdict> {
    if cfg.kappa <= int(3) {
        return Err(Error::InvalidLambda(format!("kappa must exceed 3, got {}", fmt_ratio(&cfg.kappa))));
    }
    let x = addr.coordinate();
    let inv_kappa = cfg.kappa.recip();
    let mut radius = crate::rational::pow(&inv_kappa, cfg.k0);
    let third = ratio(1, 3);

    // lo/width of the level-j piece containing x, updated incrementally
    let mut lo = minus_half();
    let mut width = Rational::one();
    let mut index: u64 = 0;
    let mut level = 0u32;
    let descend_to = |target: u32, lo: &mut Rational, width: &mut Rational, index: &mut u64, level: &mut u32| {
        while *level < target {
            let d = addr.digit(*level as usize);
            *width *= &third;
            if d == 1 {
                *lo += &*width * int(2);
            }
            *index = (*index << 1) | d as u64;
            *level += 1;
        }
    };

    for k in cfg.k0..=cfg.depth {
        let (dist, l) = if k == 0 {
            ((&x - minus_half()).abs(), 0)
        } else {
            match cfg.scheme {
                EndpointScheme::CumulativePieceEndpoints => {
                    descend_to(k - 1, &mut lo, &mut width, &mut index, &mut level);
                    let hi = &lo + &width;
                    let dl = &x - &lo;
                    let dr = &hi - &x;
                    if dl <= dr {
                        (dl, 2 * index)
                    } else {
                        (dr, 2 * index + 1)
                    }
                }
                EndpointScheme::LeftEndpoints => {
                    descend_to(k, &mut lo, &mut width, &mut index, &mut level);
                    let dl = &x - &lo;
                    // left endpoint of the next piece to the right, across a gap
                    let next = next_piece_lo(addr, k);
                    match next {
                        Some(n) if &n - &x < dl => (&n - &x, index + 1),
                        _ => (dl, index),
                    }
                }
            }
        };
        if dist < radius {
            return Ok(GoodVerdict::Bad { k, l, distance: dist });
        }
        radius *= &inv_kappa;
    }
    Ok(GoodVerdict::GoodUpTo(cfg.depth))
}

fn next_piece_lo(addr: &CantorAddress, level: u32) -> Option<Rational> {
    let w = addr.prefix(level as usize);
    let idx = w.index();
    if idx + 1 >= (1u128 << level) {
        return None;
    }
    let next = idx + 1;
    let digits: Vec<u8> = (0..level).rev().map(|b| ((next >> b) & 1) as u8).collect();
    Some(piece_lo(&digits))
}

/// Runs the test and wraps a passing point as a [`GoodPoint`].
pub fn certify_good(addr: &CantorAddress, cfg: &GoodPointConfig) -> Result<GoodPoint> {
    match good_point_test_address(addr, cfg)? {
        GoodVerdict::GoodUpTo(depth) => Ok(GoodPoint {
            x: addr.coordinate(),
            address: addr.normalized(),
            kappa: cfg.kappa.clone(),
            k0: cfg.k0,
            depth,
        }),
        GoodVerdict::Bad { k, distance, .. } => Err(Error::not_good(
            &addr.coordinate(),
            format!("within kappa^-{k} of an order-{k} endpoint (distance {})", fmt_ratio(&distance)),
        )),
    }
}

pub fn certify_good_rational(x: &Rational, cfg: &GoodPointConfig) -> Result<GoodPoint> {
    let addr = address_of(x)?.ok_or_else(|| Error::NotInCantorSet(fmt_ratio(x)))?;
    certify_good(&addr, cfg)
}

/// Rejection-samples `count` distinct good points with random eventually
/// periodic addresses (preperiod length up to `max_pre`, non-constant period
/// of length 2..=`max_period`). Digits flip with probability 3/4, since runs
/// of equal digits near the root fail the test.
pub fn sample_good_points<R: Rng>(
    rng: &mut R,
    count: usize,
    cfg: &GoodPointConfig,
    max_pre: usize,
    max_period: usize,
) -> Result<Vec<GoodPoint>> {
    let max_period = max_period.max(2);
    let mut out: Vec<GoodPoint> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let limit = 20_000 * count.max(1);
    while out.len() < count {
        attempts += 1;
        if attempts > limit {
            return Err(Error::Invalid(format!(
                "found only {} good points after {attempts} attempts",
                out.len()
            )));
        }
        let pre_len = rng.gen_range(0..=max_pre);
        let per_len = rng.gen_range(2..=max_period);
        let mut digit: u8 = rng.gen_range(0..=1);
        let mut next = |rng: &mut R| {
            if rng.gen_bool(0.75) {
                digit ^= 1;
            }
            digit
        };
        let pre: Vec<u8> = (0..pre_len).map(|_| next(rng)).collect();
        let per: Vec<u8> = (0..per_len).map(|_| next(rng)).collect();
        let addr = CantorAddress::new(BinaryWord(pre), BinaryWord(per));
        if addr.is_eventually_constant() {
            continue;
        }
        if let Ok(g) = certify_good(&addr, cfg) {
            if out.iter().all(|p| p.x != g.x) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Pieces narrower than this fraction of their distance are not refined:
/// the true distance to `K` is then within that factor of the bound.
const RELATIVE_CUTOFF: f64 = 1e-3;

/// Lower bound on the distance from `(re, im)` to `K`: the exact distance to
/// the union of level-`level` pieces, which contains `K`.
pub fn distance_to_pieces(re: f64, im: f64, level: u32) -> f64 {
    fn rec(re: f64, im: f64, lo: f64, width: f64, level: u32, best: &mut f64) {
        let hi = lo + width;
        let dx = if re < lo { lo - re } else if re > hi { re - hi } else { 0.0 };
        let d = dx.hypot(im);
        if d >= *best {
            return;
        }
        // deeper levels cannot raise the bound by more than the width
        if level == 0 || width <= RELATIVE_CUTOFF * d {
            *best = d;
            return;
        }
        let w = width / 3.0;
        // visit the nearer child first
        let mid = lo + width / 2.0;
        if re < mid {
            rec(re, im, lo, w, level - 1, best);
            rec(re, im, hi - w, w, level - 1, best);
        } else {
            rec(re, im, hi - w, w, level - 1, best);
            rec(re, im, lo, w, level - 1, best);
        }
    }
    let mut best = f64::INFINITY;
    rec(re, im, -0.5, 1.0, level, &mut best);
    best
}

/// Lower bound on the distance from the segment `a -> b` to `K` (via the
/// level-`level` pieces).
pub fn segment_distance_to_pieces(a: (f64, f64), b: (f64, f64), level: u32) -> f64 {
    fn seg_interval(a: (f64, f64), b: (f64, f64), lo: f64, hi: f64) -> f64 {
        // distance between segment ab and the real interval [lo, hi]
        let (ax, ay) = a;
        let (bx, by) = b;
        if (ay <= 0.0 && by >= 0.0) || (ay >= 0.0 && by <= 0.0) {
            if ay != by {
                let t = ay / (ay - by);
                let x = ax + t * (bx - ax);
                if x >= lo && x <= hi {
                    return 0.0;
                }
            } else if ay == 0.0 && ax.max(bx) >= lo && ax.min(bx) <= hi {
                return 0.0;
            }
        }
        let pt_seg = |px: f64, py: f64| {
            let (dx, dy) = (bx - ax, by - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 { 0.0 } else { (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0) };
            (ax + t * dx - px).hypot(ay + t * dy - py)
        };
        let pt_int = |px: f64, py: f64| {
            let dx = if px < lo { lo - px } else if px > hi { px - hi } else { 0.0 };
            dx.hypot(py)
        };
        pt_seg(lo, 0.0).min(pt_seg(hi, 0.0)).min(pt_int(ax, ay)).min(pt_int(bx, by))
    }
    fn rec(a: (f64, f64), b: (f64, f64), lo: f64, width: f64, level: u32, best: &mut f64) {
        let d = seg_interval(a, b, lo, lo + width);
        if d >= *best {
            return;
        }
        if level == 0 || width <= RELATIVE_CUTOFF * d {
            *best = d;
            return;
        }
        let w = width / 3.0;
        rec(a, b, lo, w, level - 1, best);
        rec(a, b, lo + width - w, w, level - 1, best);
    }
    let mut best = f64::INFINITY;
    rec(a, b, -0.5, 1.0, level, &mut best);
    best
}

/// Exact membership of a rational in the union of level-`n` pieces.
pub fn in_pieces_of_level(x: &Rational, n: u32) -> bool {
    let mut y = x + ratio(1, 2);
    if y.is_negative() || y > Rational::one() {
        return false;
    }
    for _ in 0..n {
        // inverse of the IFS maps A0(y) = 3y, A1(y) = 3y - 2
        if y <= ratio(1, 3) {
            y *= int(3);
        } else if y >= ratio(2, 3) {
            y = y * int(3) - int(2);
        } else {
            return false;
        }
    }
    true
}
