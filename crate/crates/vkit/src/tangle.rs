//! The event calculus: evaluating the universal invariant on
//! parenthesized-tangle presentations of knots.
//!
//! A presentation is a sequence of events acting on a parenthesized word of
//! oriented strands: pair creation/annihilation (cups and caps), braiding
//! of two neighboring blocks, and one application of the associative law.
//! Cups and caps carry the identity morphism; braidings contribute a
//! Δ-cabled R^{±1}; associativity events contribute a cabled Φ^{±1}. The
//! whole evaluation happens on the final circle: the knot is traced once,
//! every chord placed by an event lands at a definite pair of circle
//! positions, and the accumulated diagrams are reduced modulo 4T (and FI in
//! the reduced variant) at the end. A chord endpoint on a downward strand
//! contributes a factor -1, matching the (-1)^{#P↓} of the analytic
//! integral.
//!
//! The correction divides by powers of the value of the built-in
//! ∞-presentation: corrected = raw / hump^(c/2), with c the number of
//! cups and caps.

use num::{One, Zero};
use std::collections::HashMap;
use std::fmt;

use crate::assoc::{solve_associator, FreeElement};
use crate::diagrams::ChordDiagram;
use crate::qlinalg::Rat;
use crate::spaces::{DiagramVector, QuotientSpace, Variant};
use crate::{Error, Result};

/// A parenthesized word: a binary tree whose leaves are strands.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParenWord {
    Leaf(u32),
    Node(Box<ParenWord>, Box<ParenWord>),
}

impl ParenWord {
    fn leaves(&self, out: &mut Vec<u32>) {
        match self {
            ParenWord::Leaf(s) => out.push(*s),
            ParenWord::Node(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }

    pub fn leaf_list(&self) -> Vec<u32> {
        let mut v = Vec::new();
        self.leaves(&mut v);
        v
    }

    fn get(&self, path: &[u8]) -> Option<&ParenWord> {
        match (self, path) {
            (t, []) => Some(t),
            (ParenWord::Node(l, r), [d, rest @ ..]) => {
                if *d == 0 {
                    l.get(rest)
                } else {
                    r.get(rest)
                }
            }
            _ => None,
        }
    }

    fn replace(&mut self, path: &[u8], new: ParenWord) -> bool {
        match path {
            [] => {
                *self = new;
                true
            }
            [d, rest @ ..] => match self {
                ParenWord::Node(l, r) => {
                    if *d == 0 {
                        l.replace(rest, new)
                    } else {
                        r.replace(rest, new)
                    }
                }
                ParenWord::Leaf(_) => false,
            },
        }
    }
}

impl fmt::Display for ParenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParenWord::Leaf(s) => write!(f, "{s}"),
            ParenWord::Node(l, r) => write!(f, "({l} {r})"),
        }
    }
}

/// A path in the paren tree: "." is the root, "0.1" the right child of the
/// left child.
pub fn parse_path(s: &str) -> Result<Vec<u8>> {
    let s = s.trim();
    if s == "." {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|c| match c {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            other => Err(Error::Invalid(format!("bad path component {other:?}"))),
        })
        .collect()
}

pub fn fmt_path(p: &[u8]) -> String {
    if p.is_empty() {
        ".".into()
    } else {
        p.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AssocDir {
    /// (A (B C)) -> ((A B) C)
    L,
    /// ((A B) C) -> (A (B C))
    R,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EventKind {
    /// Create a pair of neighboring strands; the locator is the path the
    /// new pair will occupy.
    Cup,
    /// Annihilate the pair at the locator.
    Cap,
    /// Braid the two children of the node at the locator. `sign` is the
    /// crossing sign; `singular` marks a double point.
    Braid { positive: bool, singular: bool },
    /// Re-bracket the node at the locator.
    Assoc(AssocDir),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Event {
    pub kind: EventKind,
    pub path: Vec<u8>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EventSequence {
    pub events: Vec<Event>,
}

impl EventSequence {
    /// Line-oriented text: one event per line, e.g. "cup AT 0.1",
    /// "braid + AT 1.0" (+, - or * for singular), "assoc L AT .".
    pub fn parse(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let (kind, at) = match parts.as_slice() {
                ["cup", "AT", p] => (EventKind::Cup, p),
                ["cap", "AT", p] => (EventKind::Cap, p),
                ["braid", s, "AT", p] => {
                    let kind = match *s {
                        "+" => EventKind::Braid {
                            positive: true,
                            singular: false,
                        },
                        "-" => EventKind::Braid {
                            positive: false,
                            singular: false,
                        },
                        "*" => EventKind::Braid {
                            positive: true,
                            singular: true,
                        },
                        other => {
                            return Err(Error::Invalid(format!("bad braid sign {other:?}")))
                        }
                    };
                    (kind, p)
                }
                ["assoc", d, "AT", p] => {
                    let dir = match *d {
                        "L" => AssocDir::L,
                        "R" => AssocDir::R,
                        other => {
                            return Err(Error::Invalid(format!("bad assoc direction {other:?}")))
                        }
                    };
                    (EventKind::Assoc(dir), p)
                }
                _ => return Err(Error::Invalid(format!("unparseable event {line:?}"))),
            };
            events.push(Event {
                kind,
                path: parse_path(at)?,
            });
        }
        Ok(Self { events })
    }

    pub fn singular_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Braid { singular: true, .. }))
            .count()
    }

    /// Replace the singular braids by concrete crossings according to the
    /// resolution bits (true = overcrossing).
    fn resolved(&self, bits: &[bool]) -> Self {
        let mut k = 0;
        let events = self
            .events
            .iter()
            .map(|e| {
                let kind = match e.kind {
                    EventKind::Braid {
                        singular: true, ..
                    } => {
                        let positive = bits[k];
                        k += 1;
                        EventKind::Braid {
                            positive,
                            singular: false,
                        }
                    }
                    ref other => other.clone(),
                };
                Event {
                    kind,
                    path: e.path.clone(),
                }
            })
            .collect();
        assert_eq!(k, bits.len());
        Self { events }
    }
}

impl fmt::Display for EventSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            match &e.kind {
                EventKind::Cup => writeln!(f, "cup AT {}", fmt_path(&e.path))?,
                EventKind::Cap => writeln!(f, "cap AT {}", fmt_path(&e.path))?,
                EventKind::Braid { positive, singular } => {
                    let s = if *singular {
                        "*"
                    } else if *positive {
                        "+"
                    } else {
                        "-"
                    };
                    writeln!(f, "braid {s} AT {}", fmt_path(&e.path))?
                }
                EventKind::Assoc(d) => {
                    let s = if *d == AssocDir::L { "L" } else { "R" };
                    writeln!(f, "assoc {s} AT {}", fmt_path(&e.path))?
                }
            }
        }
        Ok(())
    }
}

/// What each event contributes to the evaluation.
#[derive(Clone, Debug)]
enum EventInfo {
    Identity,
    Braid {
        left: Vec<u32>,
        right: Vec<u32>,
        positive: bool,
    },
    Assoc {
        blocks: [Vec<u32>; 3],
        inverse: bool,
    },
}

/// The strand-tracing report of a validated presentation.
#[derive(Clone, Debug)]
pub struct TraceReport {
    pub strands: usize,
    /// Number of cup events plus cap events (always even).
    pub critical_points: usize,
    /// Traversal order of the strands along the closed curve, with their
    /// direction (true = upward).
    circle: Vec<(u32, bool)>,
    /// Per-strand direction.
    up: Vec<bool>,
    infos: Vec<EventInfo>,
}

impl TraceReport {
    pub fn is_up(&self, strand: u32) -> bool {
        self.up[strand as usize]
    }

    pub fn circle_order(&self) -> &[(u32, bool)] {
        &self.circle
    }
}

/// Confirm the word-shape transitions event by event, trace the closed
/// curve, and require a single component.
pub fn validate(seq: &EventSequence) -> Result<TraceReport> {
    let mut tree: Option<ParenWord> = None;
    let mut next_strand: u32 = 0;
    let mut cups: Vec<(u32, u32)> = Vec::new();
    let mut caps: Vec<(u32, u32)> = Vec::new();
    let mut infos: Vec<EventInfo> = Vec::new();

    let bad = |k: usize, msg: String| -> Error {
        Error::Invalid(format!("event {} inapplicable: {msg}", k + 1))
    };

    for (k, e) in seq.events.iter().enumerate() {
        match &e.kind {
            EventKind::Cup => {
                let a = next_strand;
                let b = next_strand + 1;
                next_strand += 2;
                cups.push((a, b));
                let pair = ParenWord::Node(
                    Box::new(ParenWord::Leaf(a)),
                    Box::new(ParenWord::Leaf(b)),
                );
                match (&mut tree, e.path.as_slice()) {
                    (t @ None, []) => *t = Some(pair),
                    (None, _) => {
                        return Err(bad(k, "cup into an empty word must target the root".into()))
                    }
                    (Some(t), path) => {
                        let Some((d, parent)) = path.split_last() else {
                            return Err(bad(
                                k,
                                "cup into a nonempty word needs a non-root path".into(),
                            ));
                        };
                        let Some(s) = t.get(parent).cloned() else {
                            return Err(bad(k, format!("no subtree at {}", fmt_path(parent))));
                        };
                        let node = if *d == 0 {
                            ParenWord::Node(Box::new(pair), Box::new(s))
                        } else {
                            ParenWord::Node(Box::new(s), Box::new(pair))
                        };
                        t.replace(parent, node);
                    }
                }
                infos.push(EventInfo::Identity);
            }
            EventKind::Cap => {
                let Some(t) = &mut tree else {
                    return Err(bad(k, "cap on an empty word".into()));
                };
                let Some(sub) = t.get(&e.path) else {
                    return Err(bad(k, format!("no subtree at {}", fmt_path(&e.path))));
                };
                let ParenWord::Node(l, r) = sub else {
                    return Err(bad(k, "cap requires a paired node, found a leaf".into()));
                };
                let (ParenWord::Leaf(x), ParenWord::Leaf(y)) = (l.as_ref(), r.as_ref()) else {
                    return Err(bad(
                        k,
                        "cap requires a pair of single strands, found blocks".into(),
                    ));
                };
                caps.push((*x, *y));
                if e.path.is_empty() {
                    tree = None;
                } else {
                    let (d, parent) = e.path.split_last().unwrap();
                    let ParenWord::Node(pl, pr) = t.get(parent).unwrap() else {
                        unreachable!()
                    };
                    let sibling = if *d == 0 {
                        pr.as_ref().clone()
                    } else {
                        pl.as_ref().clone()
                    };
                    t.replace(parent, sibling);
                }
                infos.push(EventInfo::Identity);
            }
            EventKind::Braid { positive, singular } => {
                let Some(t) = &mut tree else {
                    return Err(bad(k, "braid on an empty word".into()));
                };
                let Some(sub) = t.get(&e.path) else {
                    return Err(bad(k, format!("no subtree at {}", fmt_path(&e.path))));
                };
                let ParenWord::Node(l, r) = sub else {
                    return Err(bad(k, "braid requires a paired node".into()));
                };
                infos.push(EventInfo::Braid {
                    left: l.leaf_list(),
                    right: r.leaf_list(),
                    positive: *positive,
                });
                let _ = singular; // resolution handled by the caller
                let swapped = ParenWord::Node(Box::new(r.as_ref().clone()), Box::new(l.as_ref().clone()));
                t.replace(&e.path, swapped);
            }
            EventKind::Assoc(dir) => {
                let Some(t) = &mut tree else {
                    return Err(bad(k, "assoc on an empty word".into()));
                };
                let Some(sub) = t.get(&e.path) else {
                    return Err(bad(k, format!("no subtree at {}", fmt_path(&e.path))));
                };
                let (blocks, new_sub, inverse) = match (dir, sub) {
                    (AssocDir::R, ParenWord::Node(ab, c)) => {
                        let ParenWord::Node(a, b) = ab.as_ref() else {
                            return Err(bad(k, "assoc R requires shape ((A B) C)".into()));
                        };
                        let blocks =
                            [a.leaf_list(), b.leaf_list(), c.leaf_list()];
                        let new_sub = ParenWord::Node(
                            Box::new(a.as_ref().clone()),
                            Box::new(ParenWord::Node(
                                Box::new(b.as_ref().clone()),
                                Box::new(c.as_ref().clone()),
                            )),
                        );
                        (blocks, new_sub, true)
                    }
                    (AssocDir::L, ParenWord::Node(a, bc)) => {
                        let ParenWord::Node(b, c) = bc.as_ref() else {
                            return Err(bad(k, "assoc L requires shape (A (B C))".into()));
                        };
                        let blocks =
                            [a.leaf_list(), b.leaf_list(), c.leaf_list()];
                        let new_sub = ParenWord::Node(
                            Box::new(ParenWord::Node(
                                Box::new(a.as_ref().clone()),
                                Box::new(b.as_ref().clone()),
                            )),
                            Box::new(c.as_ref().clone()),
                        );
                        (blocks, new_sub, false)
                    }
                    _ => return Err(bad(k, "assoc requires a paired node".into())),
                };
                infos.push(EventInfo::Assoc { blocks, inverse });
                t.replace(&e.path, new_sub);
            }
        }
    }
    if let Some(t) = &tree {
        return Err(Error::Invalid(format!(
            "sequence ends with nonempty word {t}"
        )));
    }

    // trace the closed curve: strands are edges, cups join bottoms, caps
    // join tops
    let n = next_strand as usize;
    if n == 0 {
        return Err(Error::Invalid("empty sequence".into()));
    }
    let mut cup_partner = vec![u32::MAX; n];
    let mut cap_partner = vec![u32::MAX; n];
    for &(a, b) in &cups {
        cup_partner[a as usize] = b;
        cup_partner[b as usize] = a;
    }
    for &(x, y) in &caps {
        cap_partner[x as usize] = y;
        cap_partner[y as usize] = x;
    }
    if cap_partner.iter().any(|&x| x == u32::MAX) {
        return Err(Error::Invalid("some strands are never annihilated".into()));
    }

    let mut circle: Vec<(u32, bool)> = Vec::new();
    let mut up = vec![false; n];
    let mut seen = vec![false; n];
    let (mut s, mut dir_up) = (0u32, true);
    loop {
        if seen[s as usize] {
            return Err(Error::Invalid("strand visited twice while tracing".into()));
        }
        seen[s as usize] = true;
        up[s as usize] = dir_up;
        circle.push((s, dir_up));
        // continue through the end we arrive at
        let next = if dir_up {
            cap_partner[s as usize]
        } else {
            cup_partner[s as usize]
        };
        dir_up = !dir_up;
        s = next;
        if s == 0 && dir_up {
            break;
        }
    }
    if seen.iter().any(|&x| !x) {
        return Err(Error::Invalid(
            "the strands do not form a single closed component".into(),
        ));
    }

    Ok(TraceReport {
        strands: n,
        critical_points: cups.len() + caps.len(),
        circle,
        up,
        infos,
    })
}

/// Evaluation context: the quotient spaces per degree, the associator, and
/// the truncation.
pub struct TangleCtx {
    pub trunc: usize,
    pub variant: Variant,
    spaces: Vec<QuotientSpace>,
    phi: FreeElement,
    phi_inv: FreeElement,
}

impl TangleCtx {
    pub fn new(trunc: usize, variant: Variant) -> Result<Self> {
        let assoc = solve_associator(trunc.max(2))?;
        Self::with_phi(trunc, variant, assoc.phi)
    }

    /// Reuse an already-solved associator (must be truncated at least to
    /// `trunc`).
    pub fn with_phi(trunc: usize, variant: Variant, phi: FreeElement) -> Result<Self> {
        if phi.trunc < trunc {
            return Err(Error::Invalid(format!(
                "associator truncated at {} cannot drive a degree-{trunc} evaluation",
                phi.trunc
            )));
        }
        let phi_inv = phi.inverse()?;
        let spaces = (0..=trunc)
            .map(|m| QuotientSpace::build(m, variant))
            .collect();
        Ok(Self {
            trunc,
            variant,
            spaces,
            phi,
            phi_inv,
        })
    }

    pub fn space(&self, m: usize) -> &QuotientSpace {
        &self.spaces[m]
    }
}

/// An element of the truncated quotient (A or A^r) on the circle: one
/// reduced vector per degree, expressed over the quotient basis diagrams.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AValue {
    pub trunc: usize,
    pub variant: Variant,
    comps: Vec<DiagramVector<ChordDiagram>>,
}

impl AValue {
    fn reduce_from(ctx: &TangleCtx, raw: Vec<DiagramVector<ChordDiagram>>) -> Self {
        let comps = raw
            .into_iter()
            .enumerate()
            .map(|(m, v)| {
                let q = ctx.space(m);
                let coords = q.reduce(&v);
                let mut out = DiagramVector::zero();
                for (d, c) in q.basis_diagrams().zip(coords) {
                    out.add_term(d.clone(), c);
                }
                out
            })
            .collect();
        Self {
            trunc: ctx.trunc,
            variant: ctx.variant,
            comps,
        }
    }

    pub fn one(ctx: &TangleCtx) -> Self {
        let mut raw: Vec<DiagramVector<ChordDiagram>> =
            vec![DiagramVector::zero(); ctx.trunc + 1];
        raw[0] = DiagramVector::singleton(ChordDiagram::empty(), Rat::one());
        Self::reduce_from(ctx, raw)
    }

    pub fn component(&self, m: usize) -> &DiagramVector<ChordDiagram> {
        &self.comps[m]
    }

    pub fn is_one(&self) -> bool {
        self.component(0).coeff(&ChordDiagram::empty()).is_one()
            && self.comps[1..].iter().all(|c| c.is_zero())
    }

    /// Product in the circle algebra: connected sum of representatives,
    /// then reduction (the relation ideal is a product ideal).
    pub fn mul(&self, other: &Self, ctx: &TangleCtx) -> Self {
        assert_eq!(self.variant, other.variant);
        let mut raw = vec![DiagramVector::zero(); ctx.trunc + 1];
        for da in 0..=self.trunc {
            for db in 0..=(ctx.trunc.saturating_sub(da)).min(other.trunc) {
                for (x, cx) in self.comps[da].iter() {
                    for (y, cy) in other.comps[db].iter() {
                        raw[da + db].add_term(x.connect(y), cx * cy);
                    }
                }
            }
        }
        Self::reduce_from(ctx, raw)
    }

    /// Power-series inverse; requires constant term 1.
    pub fn inverse(&self, ctx: &TangleCtx) -> Result<Self> {
        if !self.component(0).coeff(&ChordDiagram::empty()).is_one() {
            return Err(Error::Invalid(
                "inversion requires constant term 1".into(),
            ));
        }
        // h = self - 1; inverse = sum (-h)^j
        let mut h = self.clone();
        h.comps[0].add_term(ChordDiagram::empty(), -Rat::one());
        let mut out = AValue::one(ctx);
        let mut power = AValue::one(ctx);
        let mut sign = -Rat::one();
        for _ in 1..=ctx.trunc {
            power = power.mul(&h, ctx);
            let mut term = power.clone();
            for c in &mut term.comps {
                c.scale(&sign);
            }
            for (m, c) in term.comps.iter().enumerate() {
                out.comps[m].add_scaled(c, &Rat::one());
            }
            sign = -sign;
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize, ctx: &TangleCtx) -> Self {
        let mut out = AValue::one(ctx);
        for _ in 0..k {
            out = out.mul(self, ctx);
        }
        out
    }
}

impl fmt::Display for AValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            writeln!(f, "degree {m}:")?;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

type EndKey = (u32, u32, u32); // (strand, event, letter)
type ChordSet = Vec<(EndKey, EndKey)>;

/// One event's series: coefficient and word of strand-pair letters, with
/// orientation signs already folded into the coefficients.
fn event_factor(
    info: &EventInfo,
    trace: &TraceReport,
    phi: &FreeElement,
    phi_inv: &FreeElement,
    trunc: usize,
) -> Vec<(Rat, Vec<(u32, u32)>)> {
    let sign_of = |s: u32| if trace.is_up(s) { 1i64 } else { -1 };
    match info {
        EventInfo::Identity => vec![(Rat::one(), Vec::new())],
        EventInfo::Braid {
            left,
            right,
            positive,
        } => {
            // exp(sigma/2 * sum s_a s_b t_ab), expanded as words
            let pairs: Vec<((u32, u32), i64)> = left
                .iter()
                .flat_map(|&a| {
                    right
                        .iter()
                        .map(move |&b| ((a, b), sign_of(a) * sign_of(b)))
                })
                .collect();
            let sigma = if *positive { 1i64 } else { -1 };
            let mut out = vec![(Rat::one(), Vec::new())];
            let mut factorial = Rat::one();
            let mut level: Vec<(Rat, Vec<(u32, u32)>)> = vec![(Rat::one(), Vec::new())];
            for q in 1..=trunc {
                factorial *= Rat::from(num::BigInt::from(q as i64));
                let mut next = Vec::new();
                for (c, w) in &level {
                    for ((a, b), s) in &pairs {
                        let mut w2 = w.clone();
                        w2.push((*a, *b));
                        next.push((
                            c * Rat::new(num::BigInt::from(sigma * s), num::BigInt::from(2)),
                            w2,
                        ));
                    }
                }
                level = next;
                for (c, w) in &level {
                    out.push((c / factorial.clone(), w.clone()));
                }
            }
            out
        }
        EventInfo::Assoc { blocks, inverse } => {
            let element = if *inverse { phi_inv } else { phi };
            let mut out = Vec::new();
            for k in 0..=trunc.min(element.trunc) {
                for (word, coef) in element.component(k) {
                    // cable each letter into the sum over block strands
                    let mut terms: Vec<(i64, Vec<(u32, u32)>)> = vec![(1, Vec::new())];
                    for &(i, j) in word.iter() {
                        let bi = &blocks[i as usize - 1];
                        let bj = &blocks[j as usize - 1];
                        let mut next = Vec::with_capacity(terms.len() * bi.len() * bj.len());
                        for (s, w) in &terms {
                            for &a in bi {
                                for &b in bj {
                                    let mut w2 = w.clone();
                                    w2.push((a, b));
                                    next.push((s * sign_of(a) * sign_of(b), w2));
                                }
                            }
                        }
                        terms = next;
                    }
                    for (s, w) in terms {
                        out.push((coef * Rat::from(num::BigInt::from(s)), w));
                    }
                }
            }
            out
        }
    }
}

/// Expand the product of the event factors over a range of events into
/// chord placements with coefficients.
fn expand_events(
    trace: &TraceReport,
    ctx: &TangleCtx,
    range: std::ops::Range<usize>,
) -> HashMap<ChordSet, Rat> {
    let mut acc: HashMap<ChordSet, Rat> = HashMap::new();
    acc.insert(Vec::new(), Rat::one());
    for e in range {
        let factor = event_factor(&trace.infos[e], trace, &ctx.phi, &ctx.phi_inv, ctx.trunc);
        if factor.len() == 1 && factor[0].1.is_empty() && factor[0].0.is_one() {
            continue;
        }
        let mut next: HashMap<ChordSet, Rat> = HashMap::new();
        for (set, coef) in &acc {
            for (fc, word) in &factor {
                if set.len() + word.len() > ctx.trunc {
                    continue;
                }
                let mut set2 = set.clone();
                for (l, &(a, b)) in word.iter().enumerate() {
                    set2.push(((a, e as u32, l as u32), (b, e as u32, l as u32)));
                }
                set2.sort_unstable();
                let c = coef * fc;
                let slot = next.entry(set2).or_insert_with(Rat::zero);
                *slot += c;
            }
        }
        next.retain(|_, v| !v.is_zero());
        acc = next;
    }
    acc
}

/// Merge two blockwise expansions (used by the multiplicativity check).
#[cfg_attr(not(test), allow(dead_code))]
fn merge_expansions(
    a: &HashMap<ChordSet, Rat>,
    b: &HashMap<ChordSet, Rat>,
    trunc: usize,
) -> HashMap<ChordSet, Rat> {
    let mut out: HashMap<ChordSet, Rat> = HashMap::new();
    for (sa, ca) in a {
        for (sb, cb) in b {
            if sa.len() + sb.len() > trunc {
                continue;
            }
            let mut s = sa.clone();
            s.extend(sb.iter().cloned());
            s.sort_unstable();
            let slot = out.entry(s).or_insert_with(Rat::zero);
            *slot += ca * cb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Close the placements onto the circle: endpoints ordered by the knot
/// traversal (ascending time on upward strands, descending on downward).
fn close_to_circle(
    trace: &TraceReport,
    terms: &HashMap<ChordSet, Rat>,
    trunc: usize,
) -> Vec<DiagramVector<ChordDiagram>> {
    let rank_of: HashMap<u32, usize> = trace
        .circle
        .iter()
        .enumerate()
        .map(|(i, &(s, _))| (s, i))
        .collect();
    let mut out = vec![DiagramVector::zero(); trunc + 1];
    for (set, coef) in terms {
        let m = set.len();
        // circle sort key per endpoint
        let key = |&(s, e, l): &EndKey| -> (usize, i64, i64) {
            let up = trace.is_up(s);
            if up {
                (rank_of[&s], e as i64, l as i64)
            } else {
                (rank_of[&s], -(e as i64), -(l as i64))
            }
        };
        let mut ends: Vec<(EndKey, usize)> = Vec::with_capacity(2 * m);
        for (i, (p, q)) in set.iter().enumerate() {
            ends.push((*p, i));
            ends.push((*q, i));
        }
        ends.sort_by(|(a, _), (b, _)| key(a).cmp(&key(b)));
        let mut first_pos: Vec<Option<usize>> = vec![None; m];
        let mut pairs: Vec<(usize, usize)> = vec![(0, 0); m];
        for (pos, &(_, chord)) in ends.iter().enumerate() {
            match first_pos[chord] {
                None => first_pos[chord] = Some(pos),
                Some(p0) => pairs[chord] = (p0, pos),
            }
        }
        let d = ChordDiagram::from_pairs(&pairs).expect("valid chord placement");
        out[m].add_term(d, coef.clone());
    }
    out
}

/// The raw evaluation: compose the event morphisms, close onto the circle,
/// and reduce modulo the variant's relations.
pub fn evaluate_raw(ctx: &TangleCtx, seq: &EventSequence) -> Result<AValue> {
    if seq.singular_count() > 0 {
        return Err(Error::Invalid(
            "evaluate_raw requires a presentation without singular events".into(),
        ));
    }
    let trace = validate(seq)?;
    let terms = expand_events(&trace, ctx, 0..trace.infos.len());
    Ok(AValue::reduce_from(
        ctx,
        close_to_circle(&trace, &terms, ctx.trunc),
    ))
}

/// The built-in ∞-presentation: four critical points and one
/// associativity event.
pub const INFTY: &str = "\
cup AT .
cup AT 0.1
assoc L AT 0
cap AT 0.0
cap AT .
";

/// Z(∞): the raw value of the built-in ∞-presentation; 1 plus higher
/// order terms.
pub fn hump_value(ctx: &TangleCtx) -> Result<AValue> {
    evaluate_raw(ctx, &EventSequence::parse(INFTY)?)
}

/// Corrected evaluation: raw divided by hump^(c/2).
pub fn evaluate_corrected(ctx: &TangleCtx, seq: &EventSequence) -> Result<AValue> {
    let trace = validate(seq)?;
    let raw = evaluate_raw(ctx, seq)?;
    let hump = hump_value(ctx)?;
    let inv = hump.inverse(ctx)?;
    Ok(raw.mul(&inv.pow(trace.critical_points / 2, ctx), ctx))
}

/// The alternating sum over the 2^s resolutions (overcrossing minus
/// undercrossing per singular event) of the corrected evaluation.
pub fn evaluate_singular(ctx: &TangleCtx, seq: &EventSequence) -> Result<AValue> {
    let s = seq.singular_count();
    if s == 0 {
        return Err(Error::Invalid(
            "evaluate_singular requires at least one singular event".into(),
        ));
    }
    let mut total: Option<AValue> = None;
    for mask in 0..(1u32 << s) {
        let bits: Vec<bool> = (0..s).map(|i| mask >> i & 1 == 1).collect();
        let sign = if bits.iter().filter(|&&b| !b).count() % 2 == 0 {
            Rat::one()
        } else {
            -Rat::one()
        };
        let mut val = evaluate_corrected(ctx, &seq.resolved(&bits))?;
        for c in &mut val.comps {
            c.scale(&sign);
        }
        total = Some(match total {
            None => val,
            Some(mut t) => {
                for (m, c) in val.comps.iter().enumerate() {
                    t.comps[m].add_scaled(c, &Rat::one());
                }
                t
            }
        });
    }
    Ok(total.unwrap())
}

/// Bundled presentations.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "round-unknot" => Some("cup AT .\ncap AT .\n"),
        "humped-unknot" => Some(
            "cup AT .\ncup AT 1.0\nassoc R AT 1\ncap AT 1.1\ncap AT .\n",
        ),
        "infty" => Some(INFTY),
        "trefoil-13slice" => Some(
            "cup AT .\n\
             cup AT 1\n\
             assoc R AT .\n\
             assoc L AT 1\n\
             braid + AT 1.0\n\
             braid + AT 1.0\n\
             assoc R AT 1\n\
             assoc L AT 1\n\
             braid + AT 1.0\n\
             assoc R AT 1\n\
             cap AT 1.1\n\
             cap AT .\n",
        ),
        "trefoil-alt" => Some(
            "cup AT .\n\
             cup AT 1\n\
             assoc R AT .\n\
             assoc L AT 1\n\
             braid + AT 1.0\n\
             braid + AT 1.0\n\
             braid + AT 1.0\n\
             assoc R AT 1\n\
             assoc L AT .\n\
             cap AT 0\n\
             cap AT .\n",
        ),
        "sing1" => Some(
            "cup AT .\ncup AT 0.1\nbraid * AT 0.1\nassoc L AT 0\ncap AT 0.0\ncap AT .\n",
        ),
        "sing1-alt" => Some(
            "cup AT .\ncup AT 1.0\nbraid * AT 1.0\nassoc R AT 1\ncap AT 1.1\ncap AT .\n",
        ),
        "sing2" => Some(
            "cup AT .\n\
             cup AT 1\n\
             assoc R AT .\n\
             assoc L AT 1\n\
             braid * AT 1.0\n\
             braid * AT 1.0\n\
             braid + AT 1.0\n\
             assoc R AT 1\n\
             assoc L AT .\n\
             cap AT 0\n\
             cap AT .\n",
        ),
        "sing2-alt" => Some(
            "cup AT .\n\
             cup AT 1\n\
             assoc R AT .\n\
             assoc L AT 1\n\
             braid * AT 1.0\n\
             braid + AT 1.0\n\
             braid * AT 1.0\n\
             assoc R AT 1\n\
             assoc L AT .\n\
             cap AT 0\n\
             cap AT .\n",
        ),
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &[
        "round-unknot",
        "humped-unknot",
        "infty",
        "trefoil-13slice",
        "trefoil-alt",
        "sing1",
        "sing1-alt",
        "sing2",
        "sing2-alt",
    ]
}
