//! Cost formulas: Boolean combinations of `x <= B`.
//!
//! ```text
//! atom := "x<=" INT | "x>=" INT | "x=" INT | INT "<=" "x" ["<=" INT]
//! expr := atom | "!" expr | expr "&" expr | expr "|" expr | "(" expr ")"
//! ```
//!
//! `!` binds tighter than `&`, which binds tighter than `|`. The sugared
//! atoms are rewritten into `x <= B` atoms while parsing.

use std::fmt;

use num_traits::Zero;

use crate::error::ParseError;
use crate::rational::Cost;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CostFormula {
    /// `x <= B`
    Atom(Cost),
    Not(Box<CostFormula>),
    And(Box<CostFormula>, Box<CostFormula>),
    Or(Box<CostFormula>, Box<CostFormula>),
}

impl CostFormula {
    pub fn le(b: impl Into<Cost>) -> Self {
        CostFormula::Atom(b.into())
    }

    /// `x >= b`
    pub fn ge(b: impl Into<Cost>) -> Self {
        let b = b.into();
        if b.is_zero() {
            Self::truth()
        } else {
            Self::le(b - 1u32).not()
        }
    }

    /// `x = b`
    pub fn eq(b: impl Into<Cost>) -> Self {
        let b = b.into();
        if b.is_zero() {
            Self::le(b)
        } else {
            Self::le(b.clone()).and(Self::ge(b))
        }
    }

    /// `lo <= x <= hi`
    pub fn between(lo: impl Into<Cost>, hi: impl Into<Cost>) -> Self {
        let lo = lo.into();
        if lo.is_zero() {
            Self::le(hi)
        } else {
            Self::ge(lo).and(Self::le(hi))
        }
    }

    /// `x <= 0 | !(x <= 0)`
    pub fn truth() -> Self {
        Self::le(0u32).or(Self::le(0u32).not())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        CostFormula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        CostFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        CostFormula::Or(Box::new(self), Box::new(other))
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text).parse()
    }

    /// `n ⊨ φ`
    pub fn satisfies(&self, n: &Cost) -> bool {
        match self {
            CostFormula::Atom(b) => n <= b,
            CostFormula::Not(f) => !f.satisfies(n),
            CostFormula::And(a, b) => a.satisfies(n) && b.satisfies(n),
            CostFormula::Or(a, b) => a.satisfies(n) || b.satisfies(n),
        }
    }

    pub fn normalize(&self) -> IntervalSet {
        match self {
            CostFormula::Atom(b) => IntervalSet::up_to(b.clone()),
            CostFormula::Not(f) => f.normalize().complement(),
            CostFormula::And(a, b) => a.normalize().intersect(&b.normalize()),
            CostFormula::Or(a, b) => a.normalize().union(&b.normalize()),
        }
    }

    /// Largest atom bound, plus whether the formula is constant (its
    /// satisfying set is empty or all of ℕ).
    pub fn max_constant(&self) -> MaxConstant {
        let set = self.normalize();
        let constant = set.is_empty() || set.is_everything();
        MaxConstant { value: self.largest_atom(), constant }
    }

    fn largest_atom(&self) -> Cost {
        match self {
            CostFormula::Atom(b) => b.clone(),
            CostFormula::Not(f) => f.largest_atom(),
            CostFormula::And(a, b) | CostFormula::Or(a, b) => a.largest_atom().max(b.largest_atom()),
        }
    }

    /// Everything a solver needs to know about the formula.
    pub fn query(&self) -> Query {
        let set = self.normalize();
        let b_max = self.largest_atom();
        let tail = set.contains(&(b_max.clone() + 1u32));
        let constant = if set.is_empty() {
            Some(false)
        } else if set.is_everything() {
            Some(true)
        } else {
            None
        };
        Query { set, b_max, tail, constant }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxConstant {
    pub value: Cost,
    pub constant: bool,
}

/// Normalized view of a formula used by the solvers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub set: IntervalSet,
    /// Largest atom bound; costs above it all behave alike.
    pub b_max: Cost,
    /// Verdict for every cost strictly above `b_max`.
    pub tail: bool,
    /// `Some(v)` if the formula is constantly `v`.
    pub constant: Option<bool>,
}

impl Query {
    pub fn holds(&self, c: &Cost) -> bool {
        self.set.contains(c)
    }
}

impl fmt::Display for CostFormula {
    /// Fully parenthesised; the output parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFormula::Atom(b) => write!(f, "x<={b}"),
            CostFormula::Not(a) => write!(f, "!({a})"),
            CostFormula::And(a, b) => write!(f, "({a} & {b})"),
            CostFormula::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

/// Closed interval `[lo, hi]`; `hi = None` means unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Cost,
    pub hi: Option<Cost>,
}

/// Sorted, pairwise disjoint, non-adjacent intervals over ℕ.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    pub fn everything() -> Self {
        IntervalSet { intervals: vec![Interval { lo: Cost::zero(), hi: None }] }
    }

    pub fn up_to(b: Cost) -> Self {
        IntervalSet { intervals: vec![Interval { lo: Cost::zero(), hi: Some(b) }] }
    }

    /// Builds the canonical set from arbitrary (possibly overlapping)
    /// intervals. Intervals with `lo > hi` are dropped.
    pub fn from_intervals(mut raw: Vec<Interval>) -> Self {
        raw.retain(|i| i.hi.as_ref().is_none_or(|h| i.lo <= *h));
        raw.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(raw.len());
        for i in raw {
            if let Some(last) = out.last_mut() {
                let touches = match &last.hi {
                    None => true,
                    Some(h) => i.lo <= h.clone() + 1u32,
                };
                if touches {
                    last.hi = match (&last.hi, &i.hi) {
                        (Some(a), Some(b)) => Some(a.max(b).clone()),
                        _ => None,
                    };
                    continue;
                }
            }
            out.push(i);
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_everything(&self) -> bool {
        matches!(self.intervals.as_slice(), [Interval { lo, hi: None }] if lo.is_zero())
    }

    pub fn contains(&self, n: &Cost) -> bool {
        self.intervals
            .iter()
            .any(|i| i.lo <= *n && i.hi.as_ref().is_none_or(|h| n <= h))
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut next = Some(Cost::zero());
        for i in &self.intervals {
            let start = next.take().expect("only the last interval is unbounded");
            if start < i.lo {
                out.push(Interval { lo: start, hi: Some(i.lo.clone() - 1u32) });
            }
            next = i.hi.as_ref().map(|h| h.clone() + 1u32);
        }
        if let Some(start) = next {
            out.push(Interval { lo: start, hi: None });
        }
        IntervalSet { intervals: out }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        IntervalSet::from_intervals(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.complement().union(&other.complement()).complement()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.intersect(&other.complement()).is_empty()
    }

    /// A formula whose satisfying set is exactly `self`.
    pub fn to_formula(&self) -> CostFormula {
        let parts = self.intervals.iter().map(|i| match &i.hi {
            Some(h) => CostFormula::between(i.lo.clone(), h.clone()),
            None => CostFormula::ge(i.lo.clone()),
        });
        parts
            .reduce(CostFormula::or)
            .unwrap_or_else(|| CostFormula::le(0u32).and(CostFormula::le(0u32).not()))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            match &i.hi {
                Some(h) => write!(f, "[{}, {}]", i.lo, h)?,
                None => write!(f, "[{}, inf]", i.lo)?,
            }
        }
        write!(f, "}}")
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Formula { pos: self.pos + 1, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn parse(mut self) -> Result<CostFormula, ParseError> {
        let f = self.or_expr()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(f)
    }

    fn or_expr(&mut self) -> Result<CostFormula, ParseError> {
        let mut f = self.and_expr()?;
        while self.eat("|") {
            f = f.or(self.and_expr()?);
        }
        Ok(f)
    }

    fn and_expr(&mut self) -> Result<CostFormula, ParseError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<CostFormula, ParseError> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.or_expr()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(b'x') => {
                self.pos += 1;
                if self.eat("<=") {
                    Ok(CostFormula::le(self.int()?))
                } else if self.eat(">=") {
                    Ok(CostFormula::ge(self.int()?))
                } else if self.eat("=") {
                    Ok(CostFormula::eq(self.int()?))
                } else {
                    self.err("expected `<=`, `>=` or `=` after `x`")
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'-' => {
                let lo = self.int()?;
                self.expect("<=")?;
                self.expect("x")?;
                if self.eat("<=") {
                    let hi = self.int()?;
                    Ok(CostFormula::between(lo, hi))
                } else {
                    Ok(CostFormula::ge(lo))
                }
            }
            Some(_) => self.err("expected an atom, `!` or `(`"),
            None => self.err("unexpected end of formula"),
        }
    }

    fn int(&mut self) -> Result<Cost, ParseError> {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&b'-') {
            return self.err("bounds must be non-negative");
        }
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a non-negative integer");
        }
        if matches!(self.text.get(self.pos), Some(b'.') | Some(b'e') | Some(b'E')) {
            return self.err("bounds must be integers");
        }
        let digits = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits form a natural number"))
    }
}

impl std::str::FromStr for CostFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        CostFormula::parse(s)
    }
}
