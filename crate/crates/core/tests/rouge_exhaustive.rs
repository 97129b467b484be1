//! Every pair of token lists of length 0..=8 over a three-letter alphabet,
//! scored by the library and by the textbook LCS table.

use std::time::Instant;

use junction_core::eval::{rouge_l, rouge_l_tokens};
use rayon::prelude::*;

const MAX_LEN: usize = 8;
const ALPHABET: u8 = 3;

fn all_lists() -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..MAX_LEN {
        frontier = frontier
            .iter()
            .flat_map(|w: &Vec<u8>| {
                (0..ALPHABET).map(move |c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Textbook LCS table, one column per prefix of `b`: `col[i]` is the LCS of
/// `a[..i]` with the prefix. Visiting every list `b` depth-first lets each
/// column extend its parent's, so a sweep over all `b` for one `a` costs
/// O(|a|) per list instead of O(|a|·|b|).
fn table_column(a: &[u8], parent: &[usize; MAX_LEN + 1], y: u8) -> [usize; MAX_LEN + 1] {
    let mut col = [0; MAX_LEN + 1];
    for i in 1..=a.len() {
        col[i] = if a[i - 1] == y { parent[i - 1] + 1 } else { parent[i].max(col[i - 1]) };
    }
    col
}

/// Calls `visit(b, lcs(a, b))` for every list `b` up to `MAX_LEN`.
fn sweep(a: &[u8], visit: &mut impl FnMut(&[u8], usize)) {
    fn go(a: &[u8], b: &mut Vec<u8>, col: &[usize; MAX_LEN + 1], visit: &mut impl FnMut(&[u8], usize)) {
        visit(b, col[a.len()]);
        if b.len() == MAX_LEN {
            return;
        }
        for y in 0..ALPHABET {
            let next = table_column(a, col, y);
            b.push(y);
            go(a, b, &next, visit);
            b.pop();
        }
    }
    go(a, &mut Vec::with_capacity(MAX_LEN), &[0; MAX_LEN + 1], visit);
}

/// Longest common subsequence by trying every subsequence of `a`.
fn subset_lcs(a: &[u8], b: &[u8]) -> usize {
    let is_subseq = |sub: &[u8]| {
        let mut it = b.iter();
        sub.iter().all(|x| it.any(|y| y == x))
    };
    (0u32..1 << a.len())
        .filter_map(|bits| {
            let sub: Vec<u8> = (0..a.len()).filter(|i| bits >> i & 1 == 1).map(|i| a[i]).collect();
            is_subseq(&sub).then_some(sub.len())
        })
        .max()
        .unwrap_or(0)
}

fn f_measure(lcs: usize, c: usize, r: usize) -> f64 {
    if c == 0 || r == 0 {
        return 0.0;
    }
    let (p, rec) = (lcs as f64 / c as f64, lcs as f64 / r as f64);
    if p + rec > 0.0 {
        2.0 * p * rec / (p + rec)
    } else {
        0.0
    }
}

#[test]
fn table_agrees_with_subsequence_search() {
    for a in all_lists().iter().filter(|l| l.len() <= 5) {
        sweep(a, &mut |b, lcs| {
            if b.len() <= 5 {
                assert_eq!(lcs, subset_lcs(a, b), "{a:?} {b:?}");
            }
        });
    }
}

#[test]
fn exhaustive_equivalence_up_to_length_eight() {
    let lists = all_lists();
    assert_eq!(lists.len(), (0..=MAX_LEN as u32).map(|k| 3usize.pow(k)).sum::<usize>());
    let start = Instant::now();
    let (pairs, mismatches) = lists
        .par_iter()
        .map(|a| {
            let (mut seen, mut bad) = (0usize, 0usize);
            sweep(a, &mut |b, want| {
                seen += 1;
                let score = rouge_l_tokens(a, b);
                if score.lcs_length != want || score.f_measure != f_measure(want, a.len(), b.len()) {
                    bad += 1;
                }
            });
            (seen, bad)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let elapsed = start.elapsed();
    assert_eq!(pairs, lists.len() * lists.len());
    assert_eq!(mismatches, 0);
    assert!(elapsed.as_secs_f64() < 10.0, "sweep took {elapsed:?}");
    eprintln!("{pairs} pairs checked in {elapsed:?}");
}

#[test]
fn identical_and_disjoint_texts() {
    let text = "**Conflict Status**: Conflict detected. Vehicle V2432: Priority 1.";
    assert_eq!(rouge_l(text, text).f_measure, 1.0);
    assert_eq!(rouge_l("north east south", "west lane yield").f_measure, 0.0);
}
