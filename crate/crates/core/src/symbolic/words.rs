//! Finite symbol sequences over the bumps.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::Orbit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WordKind {
    Periodic,
    Segment,
}

/// Bump indices (0-based internally, 1-based in text form).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Word {
    pub symbols: Vec<usize>,
    pub kind: WordKind,
}

impl Word {
    pub fn periodic(symbols: Vec<usize>) -> Self {
        Word {
            symbols,
            kind: WordKind::Periodic,
        }
    }

    pub fn segment(symbols: Vec<usize>) -> Self {
        Word {
            symbols,
            kind: WordKind::Segment,
        }
    }

    /// Parses `"1,2,3"` (1-based, whitespace allowed). The empty string is
    /// the empty word.
    pub fn parse(text: &str, kind: WordKind) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Word {
                symbols: vec![],
                kind,
            });
        }
        let symbols = text
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(Error::NotAdmissible(format!(
                    "bad symbol {:?} (expected 1, 2, ...)",
                    t.trim()
                ))),
            })
            .collect::<Result<_>>()?;
        Ok(Word { symbols, kind })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Consecutive symbols differ; periodic words also need last != first.
    pub fn is_admissible(&self) -> bool {
        let consecutive = self.symbols.windows(2).all(|w| w[0] != w[1]);
        match self.kind {
            WordKind::Segment => consecutive,
            WordKind::Periodic => {
                consecutive
                    && self.symbols.len() >= 2
                    && self.symbols.first() != self.symbols.last()
            }
        }
    }

    /// Left shift by one symbol (rotation for periodic words).
    pub fn shifted(&self) -> Self {
        let mut symbols = self.symbols.clone();
        if !symbols.is_empty() {
            match self.kind {
                WordKind::Periodic => symbols.rotate_left(1),
                WordKind::Segment => {
                    symbols.remove(0);
                }
            }
        }
        Word {
            symbols,
            kind: self.kind,
        }
    }

    /// Largest symbol index plus one.
    pub fn alphabet_size(&self) -> usize {
        self.symbols.iter().map(|&s| s + 1).max().unwrap_or(0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.symbols.iter().map(|s| (s + 1).to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s, WordKind::Periodic)
    }
}

pub fn is_admissible(word: &Word) -> bool {
    word.is_admissible()
}

/// Visited bumps in order.
pub fn itinerary(orbit: &Orbit) -> Result<Word> {
    let symbols = orbit.itinerary();
    if symbols.is_empty() {
        return Err(Error::NoEvents);
    }
    Ok(Word::segment(symbols))
}

/// All cyclically admissible periodic words of period `p` over `n` symbols,
/// in lexicographic order.
pub fn periodic_words(n: usize, p: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n < 2 || p < 2 {
        return out;
    }
    let mut cur = vec![0usize; p];
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Word>) {
        let p = cur.len();
        if k == p {
            if cur[p - 1] != cur[0] {
                out.push(Word::periodic(cur.clone()));
            }
            return;
        }
        for s in 0..n {
            if k > 0 && cur[k - 1] == s {
                continue;
            }
            cur[k] = s;
            rec(k + 1, n, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// `trace((1 - I)^p)` for the all-ones `n x n` matrix `1`, i.e. the number of
/// closed walks of length `p` on the complete graph.
pub fn periodic_word_count(n: usize, p: usize) -> u64 {
    let m = n as i64 - 1;
    let sign = if p.is_multiple_of(2) { 1 } else { -1 };
    (m.pow(p as u32) + sign * m) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_examples() {
        assert!(Word::parse("1,2,3", WordKind::Periodic)
            .unwrap()
            .is_admissible());
        assert!(!Word::parse("1,1,2", WordKind::Segment)
            .unwrap()
            .is_admissible());
        assert!(!Word::parse("1,2,1", WordKind::Periodic)
            .unwrap()
            .is_admissible());
        assert!(Word::parse("1,2,1", WordKind::Segment)
            .unwrap()
            .is_admissible());
        assert!(Word::parse("1, 0", WordKind::Segment).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let w: Word = "3,1,2".parse().unwrap();
        assert_eq!(w.symbols, vec![2, 0, 1]);
        assert_eq!(w.to_string(), "3,1,2");
        assert_eq!(w.shifted().to_string(), "1,2,3");
    }

    #[test]
    fn counts_match_transfer_matrix() {
        for n in 2..6 {
            for p in 2..7 {
                assert_eq!(
                    periodic_words(n, p).len() as u64,
                    periodic_word_count(n, p),
                    "n={n} p={p}"
                );
            }
        }
        assert_eq!(periodic_word_count(3, 2), 6);
        assert_eq!(periodic_word_count(3, 3), 6);
        assert_eq!(periodic_word_count(3, 4), 18);
    }
}
