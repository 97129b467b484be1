//! Sentence-level ROUGE-L (LCS-based, β = 1).

use serde::{Deserialize, Serialize};

/// Lowercased alphanumeric runs. A `.` between two digits stays inside the
/// token, so `30.86` is one token while the period in `Priority 1.` is not.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let decimal_point = c == '.'
            && current.chars().last().is_some_and(|p| p.is_ascii_digit())
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c.is_alphanumeric() || decimal_point {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Length of the longest common subsequence.
///
/// Bit-parallel over the shorter list (Hyyrö's formulation of Allison–Dix):
/// each bit of `v` tracks one position of `b`, and a cleared bit marks a
/// position used by the current best alignment.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return 0;
    }
    // section-sized inputs stay on the stack
    const STACK_WORDS: usize = 4;
    let words = b.len().div_ceil(64);
    if words <= STACK_WORDS {
        lcs_bits(a, b, &mut [u64::MAX; STACK_WORDS][..words])
    } else {
        lcs_bits(a, b, &mut vec![u64::MAX; words])
    }
}

fn lcs_bits<T: PartialEq>(a: &[T], b: &[T], v: &mut [u64]) -> usize {
    for x in a {
        let mut carry = false;
        for (word, chunk) in v.iter_mut().zip(b.chunks(64)) {
            let matches = chunk.iter().enumerate().fold(0u64, |m, (j, y)| m | (u64::from(x == y) << j));
            let u = *word & matches;
            let (sum, c1) = word.overflowing_add(u);
            let (sum, c2) = sum.overflowing_add(u64::from(carry));
            carry = c1 || c2;
            *word = sum | (*word & !matches);
        }
    }
    // bits past b.len() in the last word only ever receive carries from below
    let tail = b.len() % 64;
    let ones: usize = v.iter().map(|w| w.count_ones() as usize).sum::<usize>()
        - if tail == 0 { 0 } else { (v[v.len() - 1] >> tail).count_ones() as usize };
    b.len() - ones
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub lcs_length: usize,
}

impl RougeScore {
    pub fn from_lcs(lcs: usize, candidate_len: usize, reference_len: usize) -> RougeScore {
        if candidate_len == 0 || reference_len == 0 {
            return RougeScore::default();
        }
        let precision = lcs as f64 / candidate_len as f64;
        let recall = lcs as f64 / reference_len as f64;
        let f_measure = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        RougeScore { precision, recall, f_measure, lcs_length: lcs }
    }
}

pub fn rouge_l_tokens<T: PartialEq>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore::from_lcs(lcs_length(candidate, reference), candidate.len(), reference.len())
}

pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    rouge_l_tokens(&tokenize(candidate), &tokenize(reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("Vehicle V2432: Priority 1."), ["vehicle", "v2432", "priority", "1"]);
        assert_eq!(tokenize("at 30.86 km/h, 1.5.x"), ["at", "30.86", "km", "h", "1.5", "x"]);
        assert_eq!(tokenize("**Actions & Decisions**"), ["actions", "decisions"]);
        assert!(tokenize(" ... ").is_empty());
    }

    #[test]
    fn three_token_example() {
        let s = rouge_l("the cat sat", "the cat ran");
        assert_eq!(s.lcs_length, 2);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.f_measure - 2.0 / 3.0).abs() < 1e-12);
    }

    fn table_lcs(a: &[u32], b: &[u32]) -> usize {
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
            }
        }
        t[a.len()][b.len()]
    }

    #[test]
    fn multiword_lengths() {
        // word boundaries at 64, 128 and beyond the stack buffer
        let mut state = 0x9e37_79b9_u32;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 17;
            state ^= state << 5;
            state % 5
        };
        for (m, n) in [(1, 64), (64, 64), (65, 63), (130, 129), (300, 257), (700, 400), (3, 1000)] {
            let a: Vec<u32> = (0..m).map(|_| next()).collect();
            let b: Vec<u32> = (0..n).map(|_| next()).collect();
            assert_eq!(lcs_length(&a, &b), table_lcs(&a, &b), "{m}x{n}");
            assert_eq!(lcs_length(&b, &a), table_lcs(&a, &b), "{n}x{m}");
        }
        let same: Vec<u32> = (0..200).collect();
        assert_eq!(lcs_length(&same, &same), 200);
    }

    #[test]
    fn identity_disjoint_empty() {
        assert_eq!(rouge_l("Number of conflicts: 4.", "number OF conflicts 4").f_measure, 1.0);
        assert_eq!(rouge_l("alpha beta", "gamma delta").f_measure, 0.0);
        assert_eq!(rouge_l("", "x"), RougeScore::default());
        assert_eq!(rouge_l("x", ""), RougeScore::default());
    }
}
