use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::matrix::{op_norm_2x2, UnimodularMatrix};
use crate::error::{Error, Result};

/// Word length to which every shipped generator pair is certified.
pub const CERTIFIED_LENGTH: usize = 12;

/// The shipped pair. [`search_generators`] over entries in `[-4, 4]` finds no
/// certified pair below distortion `3.8643`; this is a nonnegative pair at
/// that minimum.
pub const DEFAULT_A: [[i64; 2]; 2] = [[2, 1], [1, 1]];
pub const DEFAULT_B: [[i64; 2]; 2] = [[1, 2], [1, 3]];

/// The four letters `a, a^-1, b, b^-1`, indexed `0..4`; the inverse of
/// letter `i` is `i ^ 1`.
pub const LETTER_NAMES: [&str; 4] = ["a", "a^-1", "b", "b^-1"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub max_word_length_checked: usize,
    pub all_traces_ne_2: bool,
    pub no_relation_found: bool,
    pub words_checked: u64,
}

/// A certified pair of `2 x 2` generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub a: UnimodularMatrix,
    pub b: UnimodularMatrix,
    pub certificate: Certificate,
}

impl GeneratorSet {
    /// `[a, a^-1, b, b^-1]`.
    pub fn letters(&self) -> [UnimodularMatrix; 4] {
        [self.a.clone(), self.a.inverse(), self.b.clone(), self.b.inverse()]
    }

    /// Largest operator norm among the four letters.
    pub fn distortion(&self) -> f64 {
        self.letters().iter().map(|m| m.op_norm()).fold(0.0, f64::max)
    }

    pub fn is_usable(&self) -> bool {
        let c = &self.certificate;
        c.max_word_length_checked >= CERTIFIED_LENGTH && c.all_traces_ne_2 && c.no_relation_found
    }

    /// Rejects a set whose certificate falls short of [`CERTIFIED_LENGTH`].
    pub fn ensure_usable(&self) -> Result<()> {
        if self.is_usable() {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "generator set certified only to length {}",
                self.certificate.max_word_length_checked
            )))
        }
    }

    /// SHA-256 of the generator entries, as hex.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for m in [&self.a, &self.b] {
            for row in m.rows() {
                for x in row {
                    h.update(x.to_le_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }
}

/// Generator pair as plain JSON `{"a": [[..],[..]], "b": [[..],[..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorPair {
    pub a: UnimodularMatrix,
    pub b: UnimodularMatrix,
}

/// A word over the four generator letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterWord(pub Vec<usize>);

impl fmt::Display for LetterWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "(empty)");
        }
        let names: Vec<&str> = self.0.iter().map(|&l| LETTER_NAMES[l]).collect();
        write!(f, "{}", names.join(" "))
    }
}

#[derive(Clone, Copy)]
struct M2 {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl M2 {
    fn of(m: &UnimodularMatrix) -> Self {
        M2 { a: m.get(0, 0), b: m.get(0, 1), c: m.get(1, 0), d: m.get(1, 1) }
    }

    fn mul(self, o: M2) -> Option<M2> {
        let dot = |x: i64, y: i64, z: i64, w: i64| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some(M2 {
            a: dot(self.a, o.a, self.b, o.c)?,
            b: dot(self.a, o.b, self.b, o.d)?,
            c: dot(self.c, o.a, self.d, o.c)?,
            d: dot(self.c, o.b, self.d, o.d)?,
        })
    }

    fn is_identity(self) -> bool {
        self.a == 1 && self.b == 0 && self.c == 0 && self.d == 1
    }

    fn trace(self) -> i64 {
        self.a + self.d
    }
}

/// Enumerates every reduced word of length `1..=max_len` over `{a, a^-1, b, b^-1}`
/// and checks that none is the identity and none has trace 2.
pub fn certify_generators(a: &UnimodularMatrix, b: &UnimodularMatrix, max_len: usize) -> Result<GeneratorSet> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::usage("generators must be 2 x 2"));
    }
    let letters = [M2::of(a), M2::of(&a.inverse()), M2::of(b), M2::of(&b.inverse())];
    let mut word = Vec::with_capacity(max_len);
    let mut checked = 0u64;
    for first in 0..4 {
        word.push(first);
        descend(&letters, letters[first], &mut word, max_len, &mut checked)?;
        word.pop();
    }
    Ok(GeneratorSet {
        a: a.clone(),
        b: b.clone(),
        certificate: Certificate {
            max_word_length_checked: max_len,
            all_traces_ne_2: true,
            no_relation_found: true,
            words_checked: checked,
        },
    })
}

fn descend(letters: &[M2; 4], value: M2, word: &mut Vec<usize>, max_len: usize, checked: &mut u64) -> Result<()> {
    *checked += 1;
    if value.is_identity() {
        return Err(Error::Certification {
            word: LetterWord(word.clone()).to_string(),
            reason: "word evaluates to the identity".into(),
        });
    }
    if value.trace() == 2 {
        return Err(Error::Certification {
            word: LetterWord(word.clone()).to_string(),
            reason: "trace 2 (eigenvalue 1)".into(),
        });
    }
    if word.len() == max_len {
        return Ok(());
    }
    let last = *word.last().expect("descend is called on non-empty words");
    for next in (0..4).filter(|&l| l != last ^ 1) {
        let v = value.mul(letters[next]).ok_or_else(|| {
            Error::Overflow(format!("word {} {}", LetterWord(word.clone()), LETTER_NAMES[next]))
        })?;
        word.push(next);
        descend(letters, v, word, max_len, checked)?;
        word.pop();
    }
    Ok(())
}

/// The shipped default pair, certified once per process.
pub fn default_generators() -> &'static GeneratorSet {
    static CELL: OnceLock<GeneratorSet> = OnceLock::new();
    CELL.get_or_init(|| {
        let a = UnimodularMatrix::new(DEFAULT_A.iter().map(|r| r.to_vec()).collect()).expect("default a");
        let b = UnimodularMatrix::new(DEFAULT_B.iter().map(|r| r.to_vec()).collect()).expect("default b");
        certify_generators(&a, &b, CERTIFIED_LENGTH).expect("shipped generator pair certifies")
    })
}

/// A candidate found by [`search_generators`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchHit {
    pub a: UnimodularMatrix,
    pub b: UnimodularMatrix,
    pub distortion: f64,
    pub certificate: Certificate,
}

/// Scans pairs of hyperbolic matrices with entries in `[-max_entry, max_entry]`
/// in order of increasing distortion and returns up to `limit` pairs that
/// certify to `max_len`.
pub fn search_generators(max_entry: i64, max_len: usize, limit: usize) -> Vec<SearchHit> {
    let mut mats = Vec::new();
    for a in -max_entry..=max_entry {
        for b in -max_entry..=max_entry {
            for c in -max_entry..=max_entry {
                for d in -max_entry..=max_entry {
                    if a * d - b * c == 1 && (a + d).abs() > 2 {
                        mats.push(UnimodularMatrix::new(vec![vec![a, b], vec![c, d]]).expect("det checked"));
                    }
                }
            }
        }
    }
    let norm = |m: &UnimodularMatrix| op_norm_2x2(m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let mut pairs = Vec::new();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            if mats[j] == mats[i].inverse() {
                continue;
            }
            pairs.push((norm(&mats[i]).max(norm(&mats[j])), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut hits = Vec::new();
    for (k, i, j) in pairs {
        if hits.len() >= limit {
            break;
        }
        if let Ok(set) = certify_generators(&mats[i], &mats[j], max_len) {
            hits.push(SearchHit { a: set.a, b: set.b, distortion: k, certificate: set.certificate });
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: [[i64; 2]; 2]) -> UnimodularMatrix {
        UnimodularMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identity_fails_at_length_one() {
        let id = UnimodularMatrix::identity(2);
        let hyp = m([[2, 1], [1, 1]]);
        match certify_generators(&id, &hyp, 12) {
            Err(Error::Certification { word, .. }) => assert_eq!(word, "a"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn parabolic_fails_on_trace() {
        let p = m([[1, 1], [0, 1]]);
        let hyp = m([[2, 1], [1, 1]]);
        match certify_generators(&p, &hyp, 12) {
            Err(Error::Certification { word, reason }) => {
                assert_eq!(word, "a");
                assert!(reason.contains("trace 2"));
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn sanov_pair_fails() {
        let a = m([[1, 2], [0, 1]]);
        let b = m([[1, 0], [2, 1]]);
        assert!(certify_generators(&a, &b, 12).is_err());
    }

    #[test]
    fn commuting_pair_fails_with_relation() {
        let a = m([[2, 1], [1, 1]]);
        let b = a.checked_mul(&a).unwrap();
        assert!(matches!(certify_generators(&a, &b, 4), Err(Error::Certification { .. })));
    }

    #[test]
    fn default_pair_certifies() {
        let g = default_generators();
        assert!(g.is_usable());
        assert_eq!(g.certificate.words_checked, 2 * 3u64.pow(12) - 2);
    }

    #[test]
    fn search_finds_minimal_distortion() {
        let hits = search_generators(3, 8, 1);
        assert_eq!(hits.len(), 1);
        assert!(hits[0].distortion > 3.86 && hits[0].distortion < 3.87);
        let g = default_generators();
        assert!((g.distortion() - op_norm_2x2(1, 2, 1, 3)).abs() < 1e-12);
    }

    #[test]
    fn word_count_matches_reduced_word_formula() {
        let g = certify_generators(&default_generators().a, &default_generators().b, 5).unwrap();
        assert_eq!(g.certificate.words_checked, (1..=5).map(|l| 4 * 3u64.pow(l - 1)).sum::<u64>());
        assert!(!g.is_usable());
    }
}
