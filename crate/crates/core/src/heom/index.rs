//! Multi-index enumeration for the truncated hierarchy.
//!
//! Indices are ordered graded-lexicographically: by total depth first, then
//! lexicographically within a depth band. Position 0 is always the physical
//! element `(0, …, 0)`.

use std::collections::HashMap;

use crate::error::{HeomError, Result};

/// Sentinel in the neighbour tables for "outside the truncated hierarchy".
pub const NONE: usize = usize::MAX;

/// Maximum number of channels the hierarchy supports (Ω, ξ1, ξ2, two bath branches).
pub const MAX_CHANNELS: usize = 5;

/// `C(n, k)` without overflow for the sizes we care about; `None` past `u128`.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of multi-indices with `k` channels and depth at most `depth`.
pub fn hierarchy_size(channels: usize, depth: usize) -> Option<u128> {
    binomial((depth + channels) as u128, channels as u128)
}

/// A multi-index: one occupation count per channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HierarchyIndex(pub Vec<u16>);

impl HierarchyIndex {
    pub fn depth(&self) -> usize {
        self.0.iter().map(|&m| m as usize).sum()
    }
}

/// The ordered index set of a truncated hierarchy plus its neighbour tables.
#[derive(Debug, Clone)]
pub struct IndexSet {
    channels: usize,
    depth: usize,
    len: usize,
    counts: Vec<u16>,
    position: HashMap<Vec<u16>, usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    band_start: Vec<usize>,
}

impl IndexSet {
    /// Enumerates every multi-index of `channels` entries with depth ≤ `depth`.
    pub fn enumerate(channels: usize, depth: usize, max_indices: usize) -> Result<Self> {
        if channels > MAX_CHANNELS {
            return Err(HeomError::InvalidParameter(format!(
                "hierarchy supports at most {MAX_CHANNELS} channels, got {channels}"
            )));
        }
        if channels == 0 {
            // Free evolution: only the physical element exists.
            return Ok(Self {
                channels,
                depth,
                len: 1,
                counts: Vec::new(),
                position: HashMap::from([(Vec::new(), 0)]),
                up: Vec::new(),
                down: Vec::new(),
                band_start: std::iter::once(0).chain(std::iter::repeat_n(1, depth + 1)).collect(),
            });
        }
        if depth > u16::MAX as usize {
            return Err(HeomError::InvalidParameter(format!("depth {depth} is too large")));
        }
        let requested = hierarchy_size(channels, depth).unwrap_or(u128::MAX);
        if requested > max_indices as u128 {
            return Err(HeomError::TooManyIndices { requested, max: max_indices });
        }
        let n = requested as usize;

        let mut counts = Vec::with_capacity(n * channels);
        let mut band_start = Vec::with_capacity(depth + 2);
        let mut scratch = vec![0u16; channels];
        for d in 0..=depth {
            band_start.push(counts.len() / channels);
            compositions(d, 0, &mut scratch, &mut counts);
        }
        band_start.push(n);
        debug_assert_eq!(counts.len(), n * channels);

        let position: HashMap<Vec<u16>, usize> = counts
            .chunks_exact(channels)
            .enumerate()
            .map(|(i, m)| (m.to_vec(), i))
            .collect();

        let mut up = vec![NONE; n * channels];
        let mut down = vec![NONE; n * channels];
        let mut key = vec![0u16; channels];
        for i in 0..n {
            let m = &counts[i * channels..(i + 1) * channels];
            let d: usize = m.iter().map(|&x| x as usize).sum();
            for k in 0..channels {
                key.copy_from_slice(m);
                if d < depth {
                    key[k] += 1;
                    up[i * channels + k] = position[&key];
                    key[k] -= 1;
                }
                if m[k] > 0 {
                    key[k] -= 1;
                    down[i * channels + k] = position[&key];
                }
            }
        }

        Ok(Self { channels, depth, len: n, counts, position, up, down, band_start })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Occupation counts of the index at `pos`.
    pub fn counts(&self, pos: usize) -> &[u16] {
        &self.counts[pos * self.channels..(pos + 1) * self.channels]
    }

    pub fn index(&self, pos: usize) -> HierarchyIndex {
        HierarchyIndex(self.counts(pos).to_vec())
    }

    pub fn position(&self, counts: &[u16]) -> Option<usize> {
        self.position.get(counts).copied()
    }

    /// Position of `m + e_k`, or [`NONE`] beyond the truncation depth.
    #[inline]
    pub fn raised(&self, pos: usize, k: usize) -> usize {
        self.up[pos * self.channels + k]
    }

    /// Position of `m - e_k`, or [`NONE`] when `m_k = 0`.
    #[inline]
    pub fn lowered(&self, pos: usize, k: usize) -> usize {
        self.down[pos * self.channels + k]
    }

    /// Positions `start..end` of the indices at exactly depth `d`.
    pub fn band(&self, d: usize) -> std::ops::Range<usize> {
        self.band_start[d]..self.band_start[d + 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> {
        (0..self.len).map(move |pos| self.counts(pos))
    }
}

/// Appends all compositions of `remaining` into `scratch[slot..]`, lexicographically ascending.
fn compositions(remaining: usize, slot: usize, scratch: &mut [u16], out: &mut Vec<u16>) {
    if slot + 1 == scratch.len() {
        scratch[slot] = remaining as u16;
        out.extend_from_slice(scratch);
        return;
    }
    for first in 0..=remaining {
        scratch[slot] = first as u16;
        compositions(remaining - first, slot + 1, scratch, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example_order() {
        let set = IndexSet::enumerate(2, 1, 100).unwrap();
        let all: Vec<Vec<u16>> = set.iter().map(|m| m.to_vec()).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn sizes() {
        assert_eq!(IndexSet::enumerate(5, 4, 1000).unwrap().len(), 126);
        assert_eq!(IndexSet::enumerate(1, 20, 1000).unwrap().len(), 21);
        assert_eq!(hierarchy_size(5, 12), Some(6188));
        assert_eq!(binomial(9, 5), Some(126));
    }

    #[test]
    fn overflow_guard() {
        let err = IndexSet::enumerate(5, 40, 10_000).unwrap_err();
        assert!(matches!(err, HeomError::TooManyIndices { requested: 1_221_759, max: 10_000 }));
        assert_eq!(IndexSet::enumerate(0, 3, 10).unwrap().len(), 1);
        assert!(IndexSet::enumerate(6, 3, 10_000).is_err());
    }

    #[test]
    fn neighbours_and_bands_are_consistent() {
        let set = IndexSet::enumerate(3, 5, 10_000).unwrap();
        assert_eq!(set.counts(0), &[0, 0, 0]);
        for pos in 0..set.len() {
            let m = set.index(pos);
            assert!(set.band(m.depth()).contains(&pos));
            assert_eq!(set.position(&m.0), Some(pos));
            for k in 0..3 {
                let up = set.raised(pos, k);
                if m.depth() < 5 {
                    let mut expect = m.0.clone();
                    expect[k] += 1;
                    assert_eq!(set.counts(up), expect.as_slice());
                    assert_eq!(set.lowered(up, k), pos);
                } else {
                    assert_eq!(up, NONE);
                }
                if m.0[k] == 0 {
                    assert_eq!(set.lowered(pos, k), NONE);
                }
            }
        }
        // graded-lexicographic: depth never decreases, lexicographic inside a band
        let all: Vec<Vec<u16>> = set.iter().map(|m| m.to_vec()).collect();
        for w in all.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let (da, db) = (HierarchyIndex(a.clone()).depth(), HierarchyIndex(b.clone()).depth());
            assert!(da < db || (da == db && a < b));
        }
    }
}
