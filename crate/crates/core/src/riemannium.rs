//! Finite model of the surface on which the Borel extension is single
//! valued: sheets labelled by exact monodromy classes, glued over good
//! crossings.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{certify_good_rational, BinaryWord, CantorAddress, GoodPointConfig};
use crate::measures::{LambdaRule, NuCdf};
use crate::monodromy::{crossing_value, GroupSpec};
use crate::path::{Crossing, CrossingPath};
use crate::rational::{fmt_ratio, modulo, Rational};

/// Identification applied to sheet labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quotient {
    /// Raw monodromy value.
    H0,
    /// Everything identified: the base surface itself.
    H1,
    /// Modulo the lattice spanned by `2^{-k} λ_k`.
    H2,
    /// Same lattice as `H2`.
    H3,
    /// Modulo the lattice of loops avoiding `K` (piece masses).
    H4,
}

impl FromStr for Quotient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H0" => Ok(Quotient::H0),
            "H1" => Ok(Quotient::H1),
            "H2" => Ok(Quotient::H2),
            "H3" => Ok(Quotient::H3),
            "H4" => Ok(Quotient::H4),
            other => Err(Error::Parse(format!("unknown quotient {other:?}"))),
        }
    }
}

impl fmt::Display for Quotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SheetId {
    pub label: Rational,
}

impl SheetId {
    pub fn principal() -> Self {
        SheetId { label: Rational::zero() }
    }
}

impl fmt::Display for SheetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_ratio(&self.label))
    }
}

/// Ordered crossings of `K`, each at a good point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ThetaSequence {
    pub crossings: Vec<Crossing>,
}

impl ThetaSequence {
    pub fn new(crossings: Vec<Crossing>) -> Self {
        ThetaSequence { crossings }
    }

    pub fn inverse(&self) -> Self {
        ThetaSequence { crossings: self.crossings.iter().rev().map(|c| Crossing { x: c.x.clone(), dir: -c.dir }).collect() }
    }

    pub fn then(&self, other: &ThetaSequence) -> Self {
        let mut crossings = self.crossings.clone();
        crossings.extend(other.crossings.iter().cloned());
        ThetaSequence { crossings }
    }
}

/// Exact data needed to label sheets: the measure, the good-point test and
/// the lattice depth for the reduced quotients.
#[derive(Clone, Debug)]
pub struct SheetModel {
    pub rule: LambdaRule,
    pub cfg: GoodPointConfig,
    pub lattice_depth: u32,
    cdf: NuCdf,
    dyadic_step: Rational,
    piece_step: Rational,
}

/// Piece-generated lattices are enumerated up to this level.
const PIECE_LATTICE_DEPTH: u32 = 10;

impl SheetModel {
    pub fn new(rule: LambdaRule, cfg: GoodPointConfig, lattice_depth: u32) -> Result<Self> {
        crate::measures::check_lambda(&rule)?;
        let dyadic_step = GroupSpec::LambdaWeighted(rule.clone()).lattice_step(lattice_depth)?;
        let piece_step = GroupSpec::PieceGenerated { rule: rule.clone(), scheme: cfg.scheme }
            .lattice_step(lattice_depth.min(PIECE_LATTICE_DEPTH))?;
        let cdf = NuCdf { rule: rule.clone(), scheme: cfg.scheme };
        Ok(SheetModel { rule, cfg, lattice_depth, cdf, dyadic_step, piece_step })
    }

    pub fn with_defaults() -> Self {
        let rule = LambdaRule::default();
        let cfg = GoodPointConfig::new(rule.kappa.clone(), 30);
        Self::new(rule, cfg, 10).expect("default rule is valid")
    }

    pub fn cdf(&self) -> &NuCdf {
        &self.cdf
    }

    pub fn dyadic_step(&self) -> &Rational {
        &self.dyadic_step
    }

    pub fn piece_step(&self) -> &Rational {
        &self.piece_step
    }

    /// Monodromy increment of crossing at a certified good point.
    pub fn crossing_value(&self, c: &Crossing) -> Result<Rational> {
        certify_good_rational(&c.x, &self.cfg)?;
        crossing_value(&self.cdf, &c.x, c.dir)
    }

    pub fn reduce(&self, v: &Rational, q: Quotient) -> Rational {
        match q {
            Quotient::H0 => v.clone(),
            Quotient::H1 => Rational::zero(),
            Quotient::H2 | Quotient::H3 => modulo(v, &self.dyadic_step),
            Quotient::H4 => modulo(v, &self.piece_step),
        }
    }

    /// Exact monodromy of the sequence, before any quotient.
    pub fn monodromy(&self, ts: &ThetaSequence) -> Result<Rational> {
        let mut acc = Rational::zero();
        for c in &ts.crossings {
            acc += self.crossing_value(c)?;
        }
        Ok(acc)
    }

    pub fn sheet_of(&self, ts: &ThetaSequence, q: Quotient) -> Result<SheetId> {
        Ok(SheetId { label: self.reduce(&self.monodromy(ts)?, q) })
    }

    /// Follows `p` from `start`, switching sheets at each declared crossing.
    pub fn lift_path(&self, p: &CrossingPath, start: &SheetId, q: Quotient) -> Result<LiftedPath> {
        let matched = p.validate()?;
        let n = p.path.vertices().len();
        let mut pieces = Vec::with_capacity(matched.len() + 1);
        let mut sheet = SheetId { label: self.reduce(&start.label, q) };
        let mut from = 0usize;
        for m in &matched {
            pieces.push(LiftedPiece { from_vertex: from, to_vertex: m.vertex_index, sheet: sheet.clone() });
            let inc = self.crossing_value(&Crossing { x: m.x.clone(), dir: m.dir })?;
            sheet = SheetId { label: self.reduce(&(&sheet.label + inc), q) };
            from = m.vertex_index;
        }
        let last = if p.path.is_closed() { n } else { n - 1 };
        pieces.push(LiftedPiece { from_vertex: from, to_vertex: last, sheet: sheet.clone() });
        Ok(LiftedPath { pieces, end: sheet })
    }

    /// Breadth-first exploration of crossing sequences up to `budget`
    /// crossings. Directions alternate starting downward: between two
    /// crossings of `K` the path stays in one half plane, and any return
    /// through a gap does not change the sheet.
    pub fn build_sheet_graph(&self, pool: &[Rational], budget: usize, q: Quotient) -> Result<SheetGraph> {
        let mut values = Vec::with_capacity(pool.len());
        for x in pool {
            let down = self.crossing_value(&Crossing { x: x.clone(), dir: 1 })?;
            values.push((x.clone(), down));
        }
        let principal = SheetId::principal();
        let mut nodes: BTreeSet<SheetId> = BTreeSet::new();
        let mut edges: BTreeSet<SheetEdge> = BTreeSet::new();
        nodes.insert(principal.clone());
        if q == Quotient::H1 {
            return Ok(SheetGraph { quotient: q, principal, nodes, edges, budget, pool_size: pool.len() });
        }
        // state: (sheet, direction of the next crossing)
        let mut seen: BTreeSet<(SheetId, i8)> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert((principal.clone(), 1));
        queue.push_back((principal.clone(), 1i8, 0usize));
        while let Some((sheet, dir, used)) = queue.pop_front() {
            if used == budget {
                continue;
            }
            for (x, down) in &values {
                let inc = if dir > 0 { down.clone() } else { -down.clone() };
                let next = SheetId { label: self.reduce(&(&sheet.label + inc), q) };
                nodes.insert(next.clone());
                edges.insert(SheetEdge { from: sheet.clone(), to: next.clone(), x: x.clone(), dir });
                // crossing back returns
                edges.insert(SheetEdge { from: next.clone(), to: sheet.clone(), x: x.clone(), dir: -dir });
                if seen.insert((next.clone(), -dir)) {
                    queue.push_back((next, -dir, used + 1));
                }
            }
        }
        Ok(SheetGraph { quotient: q, principal, nodes, edges, budget, pool_size: pool.len() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPiece {
    pub from_vertex: usize,
    pub to_vertex: usize,
    pub sheet: SheetId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPath {
    pub pieces: Vec<LiftedPiece>,
    pub end: SheetId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SheetEdge {
    pub from: SheetId,
    pub to: SheetId,
    pub x: Rational,
    pub dir: i8,
}

#[derive(Clone, Debug)]
pub struct SheetGraph {
    pub quotient: Quotient,
    pub principal: SheetId,
    pub nodes: BTreeSet<SheetId>,
    pub edges: BTreeSet<SheetEdge>,
    pub budget: usize,
    pub pool_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeJson {
    pub label: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub x: String,
    pub dir: i8,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub quotient: Quotient,
    pub principal: String,
    pub budget: usize,
    pub pool_size: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

impl SheetGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_label(&self, v: &Rational) -> bool {
        self.nodes.contains(&SheetId { label: v.clone() })
    }

    /// Every edge has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|e| {
            self.edges.contains(&SheetEdge { from: e.to.clone(), to: e.from.clone(), x: e.x.clone(), dir: -e.dir })
        })
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            quotient: self.quotient,
            principal: self.principal.to_string(),
            budget: self.budget,
            pool_size: self.pool_size,
            node_count: self.node_count(),
            edge_count: self.edge_count(),
            nodes: self.nodes.iter().map(|n| NodeJson { label: n.to_string() }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson { from: e.from.to_string(), to: e.to.to_string(), x: fmt_ratio(&e.x), dir: e.dir })
                .collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let ids: BTreeMap<&SheetId, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut out = String::from("digraph sheets {\n  node [shape=ellipse];\n");
        for (n, i) in &ids {
            let style = if **n == self.principal { ", style=bold" } else { "" };
            out.push_str(&format!("  s{i} [label=\"{n}\"{style}];\n"));
        }
        for e in &self.edges {
            // draw each glued pair once, from its downward crossing
            if e.dir > 0 {
                out.push_str(&format!("  s{} -> s{} [label=\"{}\"];\n", ids[&e.from], ids[&e.to], fmt_ratio(&e.x)));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Number of sheets reached with `budget` alternating crossings from a pool
/// of `k` points whose masses satisfy no integer relation: pairs of
/// multisets `(P, N)` with disjoint supports, `|P| - |N| ∈ {0, 1}` and
/// `|P| + |N| <= budget`.
pub fn generic_node_count(k: usize, budget: usize) -> u128 {
    fn binom(n: usize, r: usize) -> u128 {
        if r > n {
            return 0;
        }
        let r = r.min(n - r);
        let mut acc: u128 = 1;
        for i in 0..r {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    }
    // multisets of size `size` whose support is exactly a given `support`-set
    fn exact_support(size: usize, support: usize) -> u128 {
        match (size, support) {
            (0, 0) => 1,
            (_, 0) | (0, _) => 0,
            _ => binom(size - 1, support - 1),
        }
    }
    let mut total = 0u128;
    for p in 0..=budget {
        for n in [p.wrapping_sub(1), p] {
            if n > p || p + n > budget {
                continue;
            }
            for i in 0..=k.min(p) {
                for j in 0..=(k - i).min(n) {
                    total += binom(k, i) * binom(k - i, j) * exact_support(p, i) * exact_support(n, j);
                }
            }
        }
    }
    total
}

/// `1 + k + k² + … + k^budget`.
pub fn node_count_bound(k: usize, budget: usize) -> u128 {
    (0..=budget as u32).map(|e| (k as u128).pow(e)).sum()
}

/// A point of the fiber over a good point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberPoint {
    pub base: Rational,
    pub sheet: SheetId,
}

pub fn fiber_distance(a: &FiberPoint, b: &FiberPoint) -> Result<Rational> {
    if a.base != b.base {
        return Err(Error::BaseMismatch(fmt_ratio(&a.base), fmt_ratio(&b.base)));
    }
    Ok((&a.sheet.label - &b.sheet.label).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeVerdict {
    CompleteTrivial,
    IncompleteWitness,
    NotCauchy,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeReport {
    pub verdict: ProbeVerdict,
    /// Labels after each crossing.
    pub labels: Vec<String>,
    /// `d₀` between consecutive labels on the same side of the axis.
    pub same_side_steps: Vec<f64>,
    /// Last label on each side, as the estimate of the limit.
    pub limit_estimate: [f64; 2],
}

/// Relative size the same-side steps must shrink to for the label sequence
/// to count as Cauchy.
const CAUCHY_SHRINK: f64 = 1e-3;

/// Crosses at `schedule[0]` downward, `schedule[1]` upward, and so on, and
/// studies the labels as the crossings approach `x_inf`.
pub fn completeness_probe(model: &SheetModel, x_inf: &Rational, schedule: &[Rational]) -> Result<ProbeReport> {
    if schedule.len() < 4 {
        return Err(Error::Invalid("a probe needs at least four crossings".into()));
    }
    certify_good_rational(x_inf, &model.cfg)?;
    let dist: Vec<Rational> = schedule.iter().map(|x| (x - x_inf).abs()).collect();
    let half = dist.len() / 2;
    let first = dist[..half].iter().max().expect("non-empty").clone();
    let last = dist[half..].iter().max().expect("non-empty").clone();
    if last > first {
        return Err(Error::Invalid(format!("schedule moves away from {}", fmt_ratio(x_inf))));
    }
    let mut labels = Vec::with_capacity(schedule.len());
    let mut acc = Rational::zero();
    for (i, x) in schedule.iter().enumerate() {
        let dir = if i % 2 == 0 { 1 } else { -1 };
        acc += model.crossing_value(&Crossing { x: x.clone(), dir })?;
        labels.push(acc.clone());
    }
    let steps: Vec<Rational> = labels.windows(3).map(|w| (&w[2] - &w[0]).abs()).collect();
    let steps_f: Vec<f64> = steps.iter().map(crate::rational::to_f64).collect();
    let n = labels.len();
    let estimate = [crate::rational::to_f64(&labels[n - 2]), crate::rational::to_f64(&labels[n - 1])];

    // eventually periodic: the second half repeats with period two
    let periodic = (n / 2..n).all(|i| i < 2 || labels[i] == labels[i - 2]);
    let verdict = if periodic {
        ProbeVerdict::CompleteTrivial
    } else {
        let head = steps_f[..steps_f.len() / 4 + 1].iter().cloned().fold(0.0, f64::max);
        let tail = steps_f[3 * steps_f.len() / 4..].iter().cloned().fold(0.0, f64::max);
        let cauchy = tail <= CAUCHY_SHRINK * head;
        // strictly monotone on each side: no label repeats the limit
        let monotone = |parity: usize| {
            let side: Vec<&Rational> = labels.iter().skip(parity).step_by(2).collect();
            let up = side.windows(2).all(|w| w[1] > w[0]);
            let down = side.windows(2).all(|w| w[1] < w[0]);
            up || down
        };
        if !cauchy {
            ProbeVerdict::NotCauchy
        } else if monotone(0) && monotone(1) {
            ProbeVerdict::IncompleteWitness
        } else {
            ProbeVerdict::CompleteTrivial
        }
    };
    Ok(ProbeReport { verdict, labels: labels.iter().map(fmt_ratio).collect(), same_side_steps: steps_f, limit_estimate: estimate })
}

/// Good points with addresses `(01)^j 11 (01)^∞` for increasing `j`,
/// decreasing to `-1/4`. Candidates failing the good-point test are skipped.
pub fn wiggle_schedule(model: &SheetModel, count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut j = 0usize;
    while out.len() < count && j < 200 {
        j += 1;
        let mut pre: Vec<u8> = [0u8, 1].repeat(j);
        pre.extend([1, 1]);
        let addr = CantorAddress::new(
            BinaryWord::from_digits(pre).expect("binary digits"),
            BinaryWord::from_digits(vec![0, 1]).expect("binary digits"),
        );
        if let Ok(g) = crate::geometry::certify_good(&addr, &model.cfg) {
            out.push(g.x);
        }
    }
    out
}
