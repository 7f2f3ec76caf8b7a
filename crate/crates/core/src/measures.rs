//! Atomic measures on `K`: the Haar approximants `μ_n`, truncations of the
//! singular measure `ν = Σ_k λ_k Σ_l δ_{x_{k,l}}`, exact piece masses,
//! cumulative distribution values and enclosed masses of loops.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{address_of, endpoints_of_order, BinaryWord, CantorAddress, EndpointScheme};
use crate::monodromy::MonoValue;
use crate::path::{exact_loop_with_crossings, CrossingPath, ExactLoop, PolyPath};
use crate::rational::{fmt_ratio, int, parse_ratio, pow, pow2_inv, ratio, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub x: Rational,
    pub mass: Rational,
}

/// Finite positive measure on the real line. Atoms are sorted by position and
/// merged; the per-order multiset is kept alongside.
#[derive(Clone, Debug)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    total: Rational,
    by_order: Vec<(u32, Vec<Rational>, Rational)>,
}

impl AtomicMeasure {
    /// Builds a measure from `(order, positions, mass per atom)` groups.
    pub fn from_orders(groups: Vec<(u32, Vec<Rational>, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (_, xs, m) in &groups {
            if !m.is_positive() {
                return Err(Error::Invalid(format!("atom mass must be positive, got {}", fmt_ratio(m))));
            }
            for x in xs {
                *merged.entry(x.clone()).or_insert_with(Rational::zero) += m;
            }
        }
        let atoms: Vec<Atom> = merged.into_iter().map(|(x, mass)| Atom { x, mass }).collect();
        let total = atoms.iter().fold(Rational::zero(), |acc, a| acc + &a.mass);
        Ok(AtomicMeasure { atoms, total, by_order: groups })
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        let groups = atoms.into_iter().map(|a| (0, vec![a.x], a.mass)).collect();
        Self::from_orders(groups)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Pre-merge atoms of one construction order.
    pub fn order(&self, k: u32) -> Option<(&[Rational], &Rational)> {
        self.by_order.iter().find(|(o, _, _)| *o == k).map(|(_, xs, m)| (xs.as_slice(), m))
    }

    pub fn positions_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| to_f64(&a.x)).collect()
    }

    pub fn masses_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| to_f64(&a.mass)).collect()
    }

    pub fn mass_in(&self, lo: &Rational, hi: &Rational) -> Rational {
        self.atoms.iter().filter(|a| &a.x >= lo && &a.x <= hi).fold(Rational::zero(), |acc, a| acc + &a.mass)
    }

    pub fn contains_atom(&self, x: &Rational) -> bool {
        self.atoms.binary_search_by(|a| a.x.cmp(x)).is_ok()
    }

    /// Pushforward under `x -> -x`.
    pub fn reflected(&self) -> Self {
        let groups = self
            .by_order
            .iter()
            .map(|(k, xs, m)| (*k, xs.iter().map(|x| -x).collect(), m.clone()))
            .collect();
        Self::from_orders(groups).expect("reflection keeps masses positive")
    }

    pub fn to_json(&self) -> Vec<AtomJson> {
        self.atoms.iter().map(|a| AtomJson { x: fmt_ratio(&a.x), mass: fmt_ratio(&a.mass) }).collect()
    }

    pub fn from_json(atoms: &[AtomJson]) -> Result<Self> {
        let atoms = atoms
            .iter()
            .map(|a| Ok(Atom { x: parse_ratio(&a.x)?, mass: parse_ratio(&a.mass)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(atoms)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AtomJson {
    pub x: String,
    pub mass: String,
}

/// Weight sequence `λ_k` of `ν`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaKind {
    /// `λ_k = coeff · ratio^k`.
    Geometric { coeff: Rational, ratio: Rational },
    /// Finitely many weights; `λ_k = 0` beyond the list.
    Custom(Vec<Rational>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaRule {
    pub kind: LambdaKind,
    pub kappa: Rational,
}

impl Default for LambdaRule {
    /// `λ_k = (3/4) 8^{-k}` with `κ = 7/2`.
    fn default() -> Self {
        LambdaRule::geometric(ratio(1, 8), ratio(7, 2))
    }
}

impl LambdaRule {
    /// Geometric rule normalised so that `Σ 2^k λ_k = 1`, i.e. with
    /// coefficient `1 - 2r`.
    pub fn geometric(r: Rational, kappa: Rational) -> Self {
        let coeff = Rational::one() - int(2) * &r;
        LambdaRule { kind: LambdaKind::Geometric { coeff, ratio: r }, kappa }
    }

    pub fn lambda(&self, k: u32) -> Rational {
        match &self.kind {
            LambdaKind::Geometric { coeff, ratio } => coeff * pow(ratio, k),
            LambdaKind::Custom(v) => v.get(k as usize).cloned().unwrap_or_else(Rational::zero),
        }
    }

    /// `Σ_{k > n} 2^k λ_k`, exactly. `n = -1` gives the full sum.
    pub fn tail_mass(&self, n: i64) -> Rational {
        let start = (n + 1).max(0) as u32;
        match &self.kind {
            LambdaKind::Geometric { coeff, ratio } => {
                let q = int(2) * ratio;
                coeff * pow(&q, start) / (Rational::one() - q)
            }
            LambdaKind::Custom(v) => (start as usize..v.len())
                .map(|k| &v[k] * pow(&int(2), k as u32))
                .fold(Rational::zero(), |a, b| a + b),
        }
    }

    /// `Σ_{k > n} λ_k (2κ)^k`, exactly.
    pub fn line_tail(&self, n: i64) -> Rational {
        let start = (n + 1).max(0) as u32;
        let two_kappa = int(2) * &self.kappa;
        match &self.kind {
            LambdaKind::Geometric { coeff, ratio } => {
                let q = &two_kappa * ratio;
                coeff * pow(&q, start) / (Rational::one() - q)
            }
            LambdaKind::Custom(v) => (start as usize..v.len())
                .map(|k| &v[k] * pow(&two_kappa, k as u32))
                .fold(Rational::zero(), |a, b| a + b),
        }
    }

    /// Number of explicit terms for custom rules.
    pub fn support_len(&self) -> Option<usize> {
        match &self.kind {
            LambdaKind::Geometric { .. } => None,
            LambdaKind::Custom(v) => Some(v.len()),
        }
    }
}

impl fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LambdaKind::Geometric { coeff, ratio } => write!(f, "geometric:{}:{}", fmt_ratio(coeff), fmt_ratio(ratio)),
            LambdaKind::Custom(v) => {
                write!(f, "custom:")?;
                let parts: Vec<String> = v.iter().map(fmt_ratio).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// Parses `geometric:<coeff>:<ratio>` or `custom:<l0>,<l1>,...` (κ given
/// separately).
pub fn parse_lambda(s: &str, kappa: Rational) -> Result<LambdaRule> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("geometric:") {
        let (c, r) = rest.split_once(':').ok_or_else(|| Error::Parse(format!("lambda {s:?}: expected geometric:<coeff>:<ratio>")))?;
        return Ok(LambdaRule {
            kind: LambdaKind::Geometric { coeff: parse_ratio(c)?, ratio: parse_ratio(r)? },
            kappa,
        });
    }
    if let Some(rest) = s.strip_prefix("custom:") {
        let v = rest.split(',').map(parse_ratio).collect::<Result<Vec<_>>>()?;
        return Ok(LambdaRule { kind: LambdaKind::Custom(v), kappa });
    }
    Err(Error::Parse(format!("unknown lambda rule {s:?}")))
}

/// Exact quantities certifying a λ rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaCertificate {
    /// `Σ 2^k λ_k`.
    pub mass_sum: Rational,
    /// `2κr` for geometric rules.
    pub line_ratio: Option<Rational>,
    /// `Σ λ_k (2κ)^k`.
    pub line_bound: Rational,
}

pub fn check_lambda(rule: &LambdaRule) -> Result<LambdaCertificate> {
    if rule.kappa <= int(3) {
        return Err(Error::InvalidLambda(format!("kappa > 3 required, got {}", fmt_ratio(&rule.kappa))));
    }
    let two_kappa = int(2) * &rule.kappa;
    match &rule.kind {
        LambdaKind::Geometric { coeff, ratio } => {
            if !ratio.is_positive() {
                return Err(Error::InvalidLambda("geometric ratio must be positive".into()));
            }
            let q = int(2) * ratio;
            if q >= Rational::one() {
                return Err(Error::InvalidLambda(format!(
                    "sum of 2^k lambda_k diverges: 2r = {} >= 1",
                    fmt_ratio(&q)
                )));
            }
            if !coeff.is_positive() {
                return Err(Error::InvalidLambda("geometric weights must be positive".into()));
            }
            let mass_sum = coeff / (Rational::one() - &q);
            if !mass_sum.is_one() {
                return Err(Error::InvalidLambda(format!("sum of 2^k lambda_k = {} != 1", fmt_ratio(&mass_sum))));
            }
            let line_ratio = &two_kappa * ratio;
            if line_ratio >= Rational::one() {
                return Err(Error::InvalidLambda(format!(
                    "sum of lambda_k (2 kappa)^k diverges: 2 kappa r = {} >= 1",
                    fmt_ratio(&line_ratio)
                )));
            }
            let line_bound = coeff / (Rational::one() - &line_ratio);
            Ok(LambdaCertificate { mass_sum, line_ratio: Some(line_ratio), line_bound })
        }
        LambdaKind::Custom(v) => {
            if v.is_empty() || v.iter().any(|l| !l.is_positive()) {
                return Err(Error::InvalidLambda("custom weights must be a non-empty list of positive values".into()));
            }
            if v.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::InvalidLambda("custom weights must be non-increasing".into()));
            }
            let mass_sum = rule.tail_mass(-1);
            if !mass_sum.is_one() {
                return Err(Error::InvalidLambda(format!("sum of 2^k lambda_k = {} != 1", fmt_ratio(&mass_sum))));
            }
            Ok(LambdaCertificate { mass_sum, line_ratio: None, line_bound: rule.line_tail(-1) })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Mu,
    Nu,
}

impl FromStr for Base {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mu" => Ok(Base::Mu),
            "nu" => Ok(Base::Nu),
            other => Err(Error::Parse(format!("base must be mu or nu, got {other:?}"))),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Mu => "mu",
            Base::Nu => "nu",
        })
    }
}

/// Depth-`N` truncation of `μ` or `ν` together with the missing mass.
#[derive(Clone, Debug)]
pub struct MeasureTruncation {
    pub base: Base,
    pub depth: u32,
    pub measure: AtomicMeasure,
    pub tail_mass: Rational,
    pub rule: Option<LambdaRule>,
    pub scheme: EndpointScheme,
}

pub fn make_mu_n(n: u32) -> Result<AtomicMeasure> {
    make_mu_n_with(n, EndpointScheme::default())
}

pub fn make_mu_n_with(n: u32, scheme: EndpointScheme) -> Result<AtomicMeasure> {
    if n == 0 {
        return Err(Error::Invalid("mu_n needs n >= 1".into()));
    }
    AtomicMeasure::from_orders(vec![(n, endpoints_of_order(n, scheme), pow2_inv(n))])
}

pub fn truncate_mu(n: u32) -> Result<MeasureTruncation> {
    Ok(MeasureTruncation {
        base: Base::Mu,
        depth: n,
        measure: make_mu_n(n)?,
        tail_mass: Rational::zero(),
        rule: None,
        scheme: EndpointScheme::default(),
    })
}

pub fn make_nu(rule: &LambdaRule, depth: u32) -> Result<MeasureTruncation> {
    make_nu_with(rule, depth, EndpointScheme::default())
}

pub fn make_nu_with(rule: &LambdaRule, depth: u32, scheme: EndpointScheme) -> Result<MeasureTruncation> {
    check_lambda(rule)?;
    let top = match rule.support_len() {
        Some(len) => depth.min(len as u32 - 1),
        None => depth,
    };
    let groups = (0..=top).map(|k| (k, endpoints_of_order(k, scheme), rule.lambda(k))).collect();
    Ok(MeasureTruncation {
        base: Base::Nu,
        depth,
        measure: AtomicMeasure::from_orders(groups)?,
        tail_mass: rule.tail_mass(depth as i64),
        rule: Some(rule.clone()),
        scheme,
    })
}

/// Measure spec file: `key=value` lines (`base`, `depth`, `lambda`, `kappa`,
/// `scheme`). Blank lines and `#` comments are ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureSpec {
    pub base: Base,
    pub depth: u32,
    pub rule: LambdaRule,
    pub scheme: EndpointScheme,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec { base: Base::Mu, depth: 8, rule: LambdaRule::default(), scheme: EndpointScheme::default() }
    }
}

impl MeasureSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = MeasureSpec::default();
        let mut lambda: Option<String> = None;
        let mut kappa = ratio(7, 2);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            match k.trim() {
                "base" => spec.base = v.parse()?,
                "depth" => spec.depth = v.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad depth", lineno + 1)))?,
                "lambda" => lambda = Some(v.trim().to_string()),
                "kappa" => kappa = parse_ratio(v)?,
                "scheme" => spec.scheme = v.parse()?,
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        spec.rule = match lambda {
            Some(l) => parse_lambda(&l, kappa)?,
            None => LambdaRule { kappa, ..LambdaRule::default() },
        };
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        format!(
            "base={}\ndepth={}\nlambda={}\nkappa={}\nscheme={}\n",
            self.base,
            self.depth,
            self.rule,
            fmt_ratio(&self.rule.kappa),
            match self.scheme {
                EndpointScheme::CumulativePieceEndpoints => "cumulative",
                EndpointScheme::LeftEndpoints => "left",
            }
        )
    }

    pub fn build(&self) -> Result<MeasureTruncation> {
        match self.base {
            Base::Mu => Ok(MeasureTruncation {
                base: Base::Mu,
                depth: self.depth,
                measure: make_mu_n_with(self.depth, self.scheme)?,
                tail_mass: Rational::zero(),
                rule: None,
                scheme: self.scheme,
            }),
            Base::Nu => make_nu_with(&self.rule, self.depth, self.scheme),
        }
    }
}

/// Number of order-`k` endpoints inside the piece `w` (cumulative scheme).
fn order_count_in_piece(w: &BinaryWord, k: u32) -> u64 {
    let level = w.level() as u32;
    if k == 0 {
        return w.digits().iter().all(|&d| d == 0) as u64;
    }
    if k > level {
        return 1u64 << (k - level);
    }
    // endpoints of level-(k-1) pieces: inside w iff w continues that piece
    // by a constant run
    let tail = &w.digits()[(k - 1) as usize..];
    (tail.iter().all(|&d| d == 0) as u64) + (tail.iter().all(|&d| d == 1) as u64)
}

fn order_count_in_piece_left(w: &BinaryWord, k: u32) -> u64 {
    let level = w.level() as u32;
    if k == 0 {
        return w.digits().iter().all(|&d| d == 0) as u64;
    }
    if k >= level {
        return 1u64 << (k - level);
    }
    w.digits()[k as usize..].iter().all(|&d| d == 0) as u64
}

/// Exact mass of the piece `w`. For `μ` this is `2^{-level}`. For `ν` with
/// a geometric or finite rule the full infinite sum is returned in closed
/// form with zero radius.
pub fn piece_mass(w: &BinaryWord, base: Base, rule: &LambdaRule, scheme: EndpointScheme) -> MonoValue {
    match base {
        Base::Mu => MonoValue::exact(pow2_inv(w.level() as u32)),
        Base::Nu => MonoValue::exact(nu_piece_mass(w, rule, scheme)),
    }
}

fn nu_piece_mass(w: &BinaryWord, rule: &LambdaRule, scheme: EndpointScheme) -> Rational {
    let level = w.level() as u32;
    let count = |k: u32| match scheme {
        EndpointScheme::CumulativePieceEndpoints => order_count_in_piece(w, k),
        EndpointScheme::LeftEndpoints => order_count_in_piece_left(w, k),
    };
    // orders whose count is not simply 2^{k-level}
    let split = match scheme {
        EndpointScheme::CumulativePieceEndpoints => level,
        EndpointScheme::LeftEndpoints => level.saturating_sub(1),
    };
    let last_explicit = match rule.support_len() {
        Some(len) => split.min(len as u32 - 1),
        None => split,
    };
    let mut m = Rational::zero();
    for k in 0..=last_explicit {
        m += rule.lambda(k) * int(count(k) as i64);
    }
    if rule.support_len().map_or(true, |len| split + 1 < len as u32) {
        // Σ_{k > split} λ_k 2^{k-level}
        m += rule.tail_mass(split as i64) * pow2_inv(level);
    }
    if scheme == EndpointScheme::LeftEndpoints && level == 0 {
        // split underflow: the root holds everything
        return rule.tail_mass(-1);
    }
    m
}

/// `Σ_i ε_i r^i` over the digits of an eventually periodic address.
fn digit_series(a: &CantorAddress, r: &Rational) -> Rational {
    let mut s = Rational::zero();
    let mut rp = Rational::one();
    for &d in a.preperiod.digits() {
        rp *= r;
        if d == 1 {
            s += &rp;
        }
    }
    if a.period.level() == 0 {
        return s;
    }
    let mut block = Rational::zero();
    let mut rq = Rational::one();
    for &d in a.period.digits() {
        rq *= r;
        if d == 1 {
            block += &rq;
        }
    }
    s + rp * block / (Rational::one() - rq)
}

/// Cumulative distribution `m([-1/2, x))` of the full (untruncated) measure
/// at a rational point off the atoms.
pub trait ExactCdf {
    fn cdf(&self, x: &Rational) -> Result<Rational>;

    fn total(&self) -> Rational;

    fn piece_mass(&self, w: &BinaryWord) -> Rational;

    /// Mass of the open interval between two non-atom points.
    fn mass_between(&self, a: &Rational, b: &Rational) -> Result<Rational> {
        Ok(self.cdf(b)? - self.cdf(a)?)
    }
}

/// The Cantor measure `μ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HaarCdf;

/// The measure `ν` for a given rule and scheme.
#[derive(Clone, Debug)]
pub struct NuCdf {
    pub rule: LambdaRule,
    pub scheme: EndpointScheme,
}

impl NuCdf {
    pub fn new(rule: LambdaRule) -> Self {
        NuCdf { rule, scheme: EndpointScheme::default() }
    }
}

fn cdf_by_walk(x: &Rational, piece: impl Fn(&BinaryWord) -> Rational, total: Rational, inner: impl Fn(&CantorAddress) -> Result<Rational>) -> Result<Rational> {
    if x < &ratio(-1, 2) {
        return Ok(Rational::zero());
    }
    if x > &ratio(1, 2) {
        return Ok(total);
    }
    match address_of(x)? {
        Some(a) => {
            if a.is_eventually_constant() {
                return Err(Error::AtomOnBoundary { atom: fmt_ratio(x) });
            }
            inner(&a)
        }
        None => {
            // x in a gap: add the masses of the left siblings along the walk
            let mut y = x + ratio(1, 2);
            let mut w = BinaryWord::empty();
            let mut acc = Rational::zero();
            loop {
                if y <= ratio(1, 3) {
                    w = w.child(0);
                    y *= int(3);
                } else if y >= ratio(2, 3) {
                    acc += piece(&w.child(0));
                    w = w.child(1);
                    y = y * int(3) - int(2);
                } else {
                    acc += piece(&w.child(0));
                    return Ok(acc);
                }
            }
        }
    }
}

impl ExactCdf for HaarCdf {
    fn cdf(&self, x: &Rational) -> Result<Rational> {
        cdf_by_walk(x, |w| pow2_inv(w.level() as u32), Rational::one(), |a| Ok(digit_series(a, &ratio(1, 2))))
    }

    fn total(&self) -> Rational {
        Rational::one()
    }

    fn piece_mass(&self, w: &BinaryWord) -> Rational {
        pow2_inv(w.level() as u32)
    }
}

impl ExactCdf for NuCdf {
    fn cdf(&self, x: &Rational) -> Result<Rational> {
        cdf_by_walk(x, |w| nu_piece_mass(w, &self.rule, self.scheme), self.total(), |a| self.inner_cdf(a))
    }

    fn total(&self) -> Rational {
        self.rule.tail_mass(-1)
    }

    fn piece_mass(&self, w: &BinaryWord) -> Rational {
        nu_piece_mass(w, &self.rule, self.scheme)
    }
}

impl NuCdf {
    /// Closed form at an inner point. With `n_j` the index of the level-`j`
    /// piece holding `x`, the order-`k` endpoints left of `x` number
    /// `2 n_{k-1} + 1` (cumulative) or `n_k + 1` (left endpoints).
    fn inner_cdf(&self, a: &CantorAddress) -> Result<Rational> {
        match &self.rule.kind {
            LambdaKind::Geometric { coeff, ratio: r } => {
                let s = digit_series(a, r);
                let one = Rational::one();
                let two_r = int(2) * r;
                Ok(match self.scheme {
                    EndpointScheme::CumulativePieceEndpoints => {
                        coeff + coeff * r / (&one - r) + int(2) * coeff * r / (&one - &two_r) * s
                    }
                    EndpointScheme::LeftEndpoints => coeff / (&one - r) + coeff * s / (&one - &two_r),
                })
            }
            LambdaKind::Custom(v) => {
                let mut acc = Rational::zero();
                // index of the level-(k-1) piece holding x
                let mut n_prev: i64 = 0;
                for (k, lam) in v.iter().enumerate() {
                    let count = match (k, self.scheme) {
                        (0, _) => 1,
                        (_, EndpointScheme::CumulativePieceEndpoints) => 2 * n_prev + 1,
                        (_, EndpointScheme::LeftEndpoints) => 2 * n_prev + a.digit(k - 1) as i64 + 1,
                    };
                    acc += lam * int(count);
                    if k >= 1 {
                        n_prev = 2 * n_prev + a.digit(k - 1) as i64;
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// `Σ winding(loop, atom) · mass` with exact winding numbers.
pub fn enclosed_mass(path: &PolyPath, m: &AtomicMeasure) -> Result<Rational> {
    let lp = ExactLoop::from_path(path)?;
    enclosed_mass_exact(&lp, m)
}

pub fn enclosed_mass_exact(lp: &ExactLoop, m: &AtomicMeasure) -> Result<Rational> {
    // the winding number is constant between consecutive axis hits
    let mut cuts = lp.real_axis_hits()?;
    cuts.sort();
    cuts.dedup();
    let mut windings = vec![0i64; cuts.len() + 1];
    for (i, pair) in cuts.windows(2).enumerate() {
        windings[i + 1] = lp.winding_number(&((&pair[0] + &pair[1]) / int(2)))?;
    }
    let mut acc = Rational::zero();
    for a in m.atoms() {
        match cuts.binary_search(&a.x) {
            Ok(_) => return Err(Error::AtomOnBoundary { atom: fmt_ratio(&a.x) }),
            Err(i) if windings[i] != 0 => acc += &a.mass * int(windings[i]),
            Err(_) => {}
        }
    }
    Ok(acc)
}

/// Winding-weighted mass of the full measure enclosed by a loop that may
/// cross `K` at declared points: the real line is cut at every point where
/// the loop meets it and each piece contributes `winding × mass`.
pub fn enclosed_mass_cdf(path: &CrossingPath, cdf: &dyn ExactCdf) -> Result<Rational> {
    let matched = path.validate()?;
    let lp = exact_loop_with_crossings(path, &matched)?;
    let mut cuts = lp.real_axis_hits()?;
    cuts.sort();
    cuts.dedup();
    let mut acc = Rational::zero();
    for pair in cuts.windows(2) {
        let mid = (&pair[0] + &pair[1]) / int(2);
        let w = lp.winding_number(&mid)?;
        if w != 0 {
            acc += cdf.mass_between(&pair[0], &pair[1])? * int(w);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::complex::Complex64;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    #[test]
    fn mu_examples() {
        let m1 = make_mu_n(1).unwrap();
        assert_eq!(m1.atoms(), &[Atom { x: ratio(-1, 2), mass: ratio(1, 2) }, Atom { x: ratio(1, 2), mass: ratio(1, 2) }]);
        let m2 = make_mu_n(2).unwrap();
        let xs: Vec<_> = m2.atoms().iter().map(|a| a.x.clone()).collect();
        assert_eq!(xs, vec![ratio(-1, 2), ratio(-1, 6), ratio(1, 6), ratio(1, 2)]);
        assert!(m2.atoms().iter().all(|a| a.mass == ratio(1, 4)));
        let m3 = make_mu_n(3).unwrap();
        assert_eq!(m3.len(), 8);
        assert!(m3.contains_atom(&(ratio(1, 9) - ratio(1, 2))));
        assert!(m3.atoms().iter().all(|a| a.mass == ratio(1, 8)));
    }

    #[test]
    fn mu_totals_and_symmetry() {
        for n in 1..=14 {
            let m = make_mu_n(n).unwrap();
            assert!(m.total().is_one(), "n = {n}");
            let r = m.reflected();
            assert_eq!(r.atoms(), m.atoms());
        }
    }

    #[test]
    fn nu_depth_zero() {
        let t = make_nu(&LambdaRule::default(), 0).unwrap();
        assert_eq!(t.measure.atoms(), &[Atom { x: ratio(-1, 2), mass: ratio(3, 4) }]);
        assert_eq!(t.tail_mass, ratio(1, 4));
    }

    #[test]
    fn nu_totals_plus_tail() {
        let rule = LambdaRule::default();
        for n in 0..10 {
            let t = make_nu(&rule, n).unwrap();
            assert!((t.measure.total() + &t.tail_mass).is_one());
        }
        // N = 2: 1 - Σ_{k>2} (3/4) 4^{-k} = 1 - 1/64
        let t = make_nu(&rule, 2).unwrap();
        assert_eq!(t.measure.total(), &ratio(63, 64));
    }

    #[test]
    fn nu_merges_atoms_across_orders() {
        let t = make_nu(&LambdaRule::default(), 3).unwrap();
        // -1/2 carries orders 0..=3
        let m = &t.measure.atoms()[0];
        assert_eq!(m.x, ratio(-1, 2));
        let expected: Rational = (0..=3).map(|k| LambdaRule::default().lambda(k)).sum();
        assert_eq!(m.mass, expected);
        assert_eq!(t.measure.order(2).unwrap().0.len(), 4);
    }

    #[test]
    fn default_piece_masses() {
        let rule = LambdaRule::default();
        let s = EndpointScheme::default();
        assert_eq!(piece_mass(&w("0"), Base::Mu, &rule, s).center, ratio(1, 2));
        assert_eq!(piece_mass(&w("0"), Base::Nu, &rule, s).center, ratio(7, 8));
        assert_eq!(piece_mass(&w("1"), Base::Nu, &rule, s).center, ratio(1, 8));
        assert_eq!(piece_mass(&BinaryWord::empty(), Base::Nu, &rule, s).center, int(1));
    }

    #[test]
    fn lambda_certificates() {
        let cert = check_lambda(&LambdaRule::default()).unwrap();
        assert!(cert.mass_sum.is_one());
        assert_eq!(cert.line_bound, int(6));
        assert_eq!(cert.line_ratio, Some(ratio(7, 8)));
        assert!(check_lambda(&LambdaRule::geometric(ratio(1, 2), ratio(7, 2))).is_err());
        assert!(check_lambda(&LambdaRule::geometric(ratio(1, 8), int(3))).is_err());
        // 2κr >= 1
        assert!(check_lambda(&LambdaRule::geometric(ratio(1, 8), int(4))).is_err());
        // wrong normalisation
        let bad = LambdaRule { kind: LambdaKind::Geometric { coeff: ratio(1, 2), ratio: ratio(1, 8) }, kappa: ratio(7, 2) };
        assert!(check_lambda(&bad).is_err());
        let custom = LambdaRule { kind: LambdaKind::Custom(vec![ratio(1, 2), ratio(1, 8), ratio(1, 16)]), kappa: ratio(7, 2) };
        assert!(check_lambda(&custom).unwrap().mass_sum.is_one());
    }

    #[test]
    fn spec_file_roundtrip() {
        let text = "# measure\nbase=nu\ndepth=6\nlambda=geometric:3/4:1/8\nkappa=7/2\nscheme=cumulative\n";
        let spec = MeasureSpec::parse(text).unwrap();
        assert_eq!(spec.base, Base::Nu);
        assert_eq!(spec.depth, 6);
        assert_eq!(spec.rule, LambdaRule::default());
        assert_eq!(MeasureSpec::parse(&spec.to_text()).unwrap(), spec);
        assert!(MeasureSpec::parse("base=xi").is_err());
        assert!(MeasureSpec::parse("depth").is_err());
    }

    #[test]
    fn enclosed_mass_rectangles() {
        let m2 = make_mu_n(2).unwrap();
        let circle = PolyPath::circle(Complex64::new(0.0, 0.0), 1.0, 64, 0.1);
        assert_eq!(enclosed_mass(&circle, &m2).unwrap(), int(1));
        let m3 = make_mu_n(3).unwrap();
        let rect = PolyPath::rectangle(-0.6, -0.1, -0.2, 0.2).unwrap();
        assert_eq!(enclosed_mass(&rect, &m3).unwrap(), ratio(1, 2));
        let rev = rect.reversed();
        assert_eq!(enclosed_mass(&rev, &m3).unwrap(), ratio(-1, 2));
        let twice = rect.concat(&rect).unwrap();
        assert_eq!(enclosed_mass(&twice, &m3).unwrap(), int(1));
        let touching = PolyPath::rectangle(-0.5, 0.0, -0.2, 0.2).unwrap();
        assert!(enclosed_mass(&touching, &m3).is_err());
    }

    #[test]
    fn cdf_values() {
        let nu = NuCdf::new(LambdaRule::default());
        // gap point 0 splits off the left piece
        assert_eq!(nu.cdf(&int(0)).unwrap(), ratio(7, 8));
        assert_eq!(HaarCdf.cdf(&int(0)).unwrap(), ratio(1, 2));
        // Cantor function at -1/4 (address 0101...) is 1/3
        assert_eq!(HaarCdf.cdf(&ratio(-1, 4)).unwrap(), ratio(1, 3));
        assert!(nu.cdf(&ratio(-1, 2)).is_err());
        assert_eq!(nu.cdf(&int(2)).unwrap(), int(1));
        assert_eq!(nu.cdf(&int(-2)).unwrap(), int(0));
    }
}
