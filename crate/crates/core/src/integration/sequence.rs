//! Order-preserving merging of statement sequences.
//!
//! The super-sequence of two sequences contains both as (order-preserving)
//! subsequences while sharing as much as possible: elements of a longest
//! common subsequence act as anchors appearing once, and the unmatched
//! runs between anchors are emitted pairwise, first side then second side.
//! When that forces the same identity to appear at two positions, the
//! copies are distinguished by duplicate numbers — a super-sequence never
//! drops an element.

use crate::artefact::ArtefactId;
use std::collections::BTreeMap;

/// Index pairs `(i, j)` of a longest common subsequence of `a` and `b`.
///
/// Computed over a suffix-length table and extracted by a forward walk.
/// Ties (both directions preserve the optimum) skip the element of `a`,
/// i.e. prefer matching the current element of `b` against a later element
/// of `a`. This specific tie-break is pinned by fixtures: it makes
/// `lcs([x, a], [a, x])` anchor `[a]`, keeping the first sequence's prefix
/// run intact, which is the behaviour the rest of the crate (and its
/// expected merge outputs) is built around.
pub(crate) fn lcs_pairs<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    // len[i][j] = LCS length of a[i..] and b[j..], flattened row-major.
    let width = m + 1;
    let mut len = vec![0u32; (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            len[i * width + j] = if a[i] == b[j] {
                1 + len[(i + 1) * width + j + 1]
            } else {
                len[(i + 1) * width + j].max(len[i * width + j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(len[0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if len[(i + 1) * width + j] >= len[i * width + j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Longest common subsequence of two id sequences (full-id equality).
pub fn longest_common_subsequence(s1: &[ArtefactId], s2: &[ArtefactId]) -> Vec<ArtefactId> {
    lcs_pairs(s1, s2).into_iter().map(|(i, _)| s1[i]).collect()
}

/// Merge two id sequences into their super-sequence.
///
/// Anchors (the LCS) appear once; before the first anchor and after every
/// anchor the leftover runs are emitted with `s1`'s run before `s2`'s.
/// The output may repeat an id — callers disambiguate repeats with
/// [`mint_duplicates`].
pub fn super_sequence(s1: &[ArtefactId], s2: &[ArtefactId]) -> Vec<ArtefactId> {
    let anchors = lcs_pairs(s1, s2);
    let mut out = Vec::with_capacity(s1.len() + s2.len() - anchors.len());
    let (first_i, first_j) = anchors
        .first()
        .copied()
        .unwrap_or((s1.len(), s2.len()));
    out.extend_from_slice(&s1[..first_i]);
    out.extend_from_slice(&s2[..first_j]);
    for (k, &(i, j)) in anchors.iter().enumerate() {
        out.push(s1[i]);
        let (next_i, next_j) = anchors
            .get(k + 1)
            .copied()
            .unwrap_or((s1.len(), s2.len()));
        out.extend_from_slice(&s1[i + 1..next_i]);
        out.extend_from_slice(&s2[j + 1..next_j]);
    }
    out
}

/// Re-number duplicate occurrences: the k-th element sharing a
/// (base, twin) pair receives dup = k, so all ids in the result are
/// distinct while bases and twins are preserved.
pub fn mint_duplicates(seq: &[ArtefactId]) -> Vec<ArtefactId> {
    let mut seen: BTreeMap<(u64, u32), u32> = BTreeMap::new();
    seq.iter()
        .map(|id| {
            let count = seen.entry((id.base, id.twin)).or_insert(0);
            *count += 1;
            ArtefactId {
                base: id.base,
                twin: id.twin,
                dup: *count,
            }
        })
        .collect()
}
