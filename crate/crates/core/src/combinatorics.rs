//! Continued fractions, the Gauss map and bounded-type symbol words.
//!
//! Continued fractions here are always of numbers in `(0, 1)`:
//! `[a1, a2, ...] = 1 / (a1 + 1 / (a2 + ...))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest expansion trusted in binary64.
pub const MAX_CF_DEPTH: usize = 40;

/// Remainder below which an expansion is treated as terminated.
pub const RATIONAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfExpansion {
    pub entries: Vec<u32>,
    /// False when the remainder vanished before the requested depth.
    pub exact: bool,
}

/// Fractional part of `1/x`.
pub fn gauss(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::ContinuedFraction(format!("gauss map undefined at {x}")));
    }
    let inv = 1.0 / x;
    Ok(inv - inv.floor())
}

pub fn cf_expand(x: f64, depth: usize) -> Result<CfExpansion> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::ContinuedFraction(format!("{x} is not in (0, 1)")));
    }
    if depth > MAX_CF_DEPTH {
        return Err(Error::ContinuedFraction(format!(
            "depth {depth} exceeds the binary64 limit {MAX_CF_DEPTH}"
        )));
    }
    let mut entries = Vec::with_capacity(depth);
    let mut r = x;
    for _ in 0..depth {
        if r < RATIONAL_EPS {
            return Ok(CfExpansion { entries, exact: false });
        }
        let inv = 1.0 / r;
        let mut a = inv.floor();
        // 1/r landing a hair below an integer is a rounding artefact
        if inv - a > 1.0 - RATIONAL_EPS {
            a += 1.0;
        }
        if a > u32::MAX as f64 {
            return Ok(CfExpansion { entries, exact: false });
        }
        entries.push(a as u32);
        r = (inv - a).max(0.0);
    }
    Ok(CfExpansion { entries, exact: true })
}

/// Value of a finite continued fraction, evaluated backwards.
pub fn cf_value(entries: &[u32]) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::ContinuedFraction("empty continued fraction".into()));
    }
    if entries.contains(&0) {
        return Err(Error::Alphabet("continued fraction entries must be >= 1".into()));
    }
    let mut x = 0.0;
    for &a in entries.iter().rev() {
        x = 1.0 / (a as f64 + x);
    }
    Ok(x)
}

/// Convergents `(p_k, q_k)` for `k = 0..count`, starting from `0/1`.
pub fn convergents<I: IntoIterator<Item = u32>>(entries: I, count: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::with_capacity(count);
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let (mut p, mut q) = (0u64, 1u64);
    out.push((p, q));
    for a in entries.into_iter().take(count.saturating_sub(1)) {
        let a = a as u64;
        let (Some(pn), Some(qn)) = (
            a.checked_mul(p).and_then(|v| v.checked_add(p_prev)),
            a.checked_mul(q).and_then(|v| v.checked_add(q_prev)),
        ) else {
            break;
        };
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
        out.push((p, q));
    }
    out
}

/// The `x in (0,1)` whose continued fraction is `period` repeated forever.
///
/// Writing `h_k/k_k` for the convergents of one period, `x` is the positive root of
/// `k_{p-1} x^2 + (k_p - h_{p-1}) x - h_p = 0`; the coefficients are exact integers.
pub fn quadratic_irrational(period: &[u32]) -> Result<f64> {
    if period.is_empty() {
        return Err(Error::ContinuedFraction("empty period".into()));
    }
    if period.contains(&0) {
        return Err(Error::Alphabet("symbols must be >= 1".into()));
    }
    let (mut h_prev, mut k_prev) = (1i128, 0i128);
    let (mut h, mut k) = (0i128, 1i128);
    for &a in period {
        let a = a as i128;
        let (hn, kn) = (a * h + h_prev, a * k + k_prev);
        h_prev = h;
        k_prev = k;
        h = hn;
        k = kn;
        if k > (1i128 << 50) {
            return Err(Error::ContinuedFraction("period too long for exact coefficients".into()));
        }
    }
    let a = k_prev;
    let b = k - h_prev;
    let c = h;
    let disc = b * b + 4 * a * c;
    let root = (disc as f64).sqrt();
    // 2c / (b + sqrt(disc)) avoids cancellation for b > 0
    Ok(2.0 * c as f64 / (b as f64 + root))
}

pub fn is_bounded_type(entries: &[u32], n: u32) -> bool {
    entries.iter().all(|&a| a >= 1 && a <= n)
}

/// Word over the alphabet `{1, ..., n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolWord {
    symbols: Vec<u32>,
    alphabet: u32,
}

impl SymbolWord {
    pub fn new(symbols: Vec<u32>, alphabet: u32) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Alphabet("empty word".into()));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s == 0 || s > alphabet) {
            return Err(Error::Alphabet(format!("symbol {bad} outside {{1, ..., {alphabet}}}")));
        }
        Ok(SymbolWord { symbols, alphabet })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Cyclic left shift by `k`.
    pub fn rotated(&self, k: usize) -> SymbolWord {
        let n = self.symbols.len();
        let symbols = (0..n).map(|i| self.symbols[(i + k) % n]).collect();
        SymbolWord { symbols, alphabet: self.alphabet }
    }

    /// Quadratic irrational with this word as its period.
    pub fn quadratic_irrational(&self) -> f64 {
        quadratic_irrational(&self.symbols).expect("validated word")
    }
}

/// Eventually periodic continued fraction: `prefix` followed by `period` forever.
///
/// Text form is a comma list with the period in parentheses, e.g. `"(1)"`,
/// `"(1,2)"`, `"3,(1)"`. A word without a period is rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfWord {
    pub prefix: Vec<u32>,
    pub period: Vec<u32>,
}

impl CfWord {
    pub fn periodic(period: Vec<u32>) -> Self {
        CfWord { prefix: Vec::new(), period }
    }

    pub fn is_rational(&self) -> bool {
        self.period.is_empty()
    }

    /// Entry `a_{k+1}` (0-based `k`).
    pub fn entry(&self, k: usize) -> u32 {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.period[(k - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = u32> + '_ {
        (0..).map(move |k| self.entry(k))
    }

    pub fn max_entry(&self) -> u32 {
        self.prefix.iter().chain(&self.period).copied().max().unwrap_or(0)
    }

    /// Errors unless the word is infinite and all entries lie in `{1, ..., n}`.
    pub fn check(&self, n: u32) -> Result<()> {
        if self.is_rational() {
            return Err(Error::RationalTarget(self.to_string()));
        }
        if let Some(&bad) = self.prefix.iter().chain(&self.period).find(|&&a| a == 0 || a > n) {
            return Err(Error::Alphabet(format!("entry {bad} outside {{1, ..., {n}}}")));
        }
        Ok(())
    }

    /// Exact-coefficient value of the (irrational) word.
    pub fn value(&self) -> Result<f64> {
        if self.is_rational() {
            return Err(Error::RationalTarget(self.to_string()));
        }
        let mut x = quadratic_irrational(&self.period)?;
        for &a in self.prefix.iter().rev() {
            if a == 0 {
                return Err(Error::Alphabet("continued fraction entries must be >= 1".into()));
            }
            x = 1.0 / (a as f64 + x);
        }
        Ok(x)
    }

    /// The word of `gauss(x)`.
    pub fn shifted(&self) -> CfWord {
        if let Some((_, rest)) = self.prefix.split_first() {
            CfWord { prefix: rest.to_vec(), period: self.period.clone() }
        } else {
            let n = self.period.len();
            CfWord {
                prefix: Vec::new(),
                period: (0..n).map(|i| self.period[(i + 1) % n]).collect(),
            }
        }
    }
}

impl fmt::Display for CfWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        match (self.prefix.is_empty(), self.period.is_empty()) {
            (_, true) => write!(f, "{}", join(&self.prefix)),
            (true, false) => write!(f, "({})", join(&self.period)),
            (false, false) => write!(f, "{},({})", join(&self.prefix), join(&self.period)),
        }
    }
}

impl FromStr for CfWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::ContinuedFraction(format!("cannot parse {s:?}: {why}"));
        let parse_list = |t: &str| -> Result<Vec<u32>> {
            t.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<u32>().map_err(|_| bad(&format!("bad entry {x:?}"))))
                .collect()
        };
        let s = s.trim();
        let (prefix, period) = match s.find('(') {
            Some(open) => {
                let close = s.rfind(')').ok_or_else(|| bad("unclosed '('"))?;
                if close != s.len() - 1 || close < open {
                    return Err(bad("the periodic part must come last"));
                }
                let head = s[..open].trim().trim_end_matches(',');
                (parse_list(head)?, parse_list(&s[open + 1..close])?)
            }
            None => (parse_list(s)?, Vec::new()),
        };
        if prefix.is_empty() && period.is_empty() {
            return Err(bad("empty word"));
        }
        if s.contains('(') && period.is_empty() {
            return Err(bad("empty period"));
        }
        Ok(CfWord { prefix, period })
    }
}
