//! Chord diagrams: perfect matchings of 2m points on an oriented circle.

use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// A degree-m chord diagram, stored as its canonical code: the
/// lexicographically least sequence over all 2m rotations after renumbering
/// labels by first occurrence.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ChordDiagram {
    code: Vec<u32>,
}

impl ChordDiagram {
    /// Build from any valid pairing code; canonicalizes.
    pub fn new(code: &[u32]) -> Result<Self> {
        Ok(Self {
            code: canonical_code(code)?,
        })
    }

    pub fn empty() -> Self {
        Self { code: Vec::new() }
    }

    /// Build from a perfect matching given as position pairs on `2m` points.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let n = 2 * pairs.len();
        let mut code = vec![0u32; n];
        for (label, &(a, b)) in pairs.iter().enumerate() {
            for p in [a, b] {
                if p >= n || code[p] != 0 {
                    return Err(Error::Invalid(format!(
                        "bad matching: position {p} out of range or reused"
                    )));
                }
                code[p] = label as u32 + 1;
            }
        }
        Self::new(&code)
    }

    pub fn degree(&self) -> usize {
        self.code.len() / 2
    }

    pub fn code(&self) -> &[u32] {
        &self.code
    }

    /// Endpoint position pairs (a, b) with a < b, sorted by a.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let m = self.degree();
        let mut first = vec![usize::MAX; m + 1];
        let mut out = Vec::with_capacity(m);
        for (pos, &label) in self.code.iter().enumerate() {
            let slot = &mut first[label as usize];
            if *slot == usize::MAX {
                *slot = pos;
            } else {
                out.push((*slot, pos));
            }
        }
        out.sort_unstable();
        out
    }

    /// A chord is isolated when its endpoints are adjacent on the circle
    /// (including the wraparound position).
    pub fn has_isolated_chord(&self) -> bool {
        let n = self.code.len();
        if n == 0 {
            return false;
        }
        (0..n).any(|i| self.code[i] == self.code[(i + 1) % n])
    }

    /// Connected-sum with another diagram: cut both circles at their code
    /// basepoints and concatenate. Well-defined on the quotient modulo 4T.
    pub fn connect(&self, other: &ChordDiagram) -> ChordDiagram {
        let shift = self.degree() as u32;
        let mut code = self.code.clone();
        code.extend(other.code.iter().map(|&l| l + shift));
        ChordDiagram {
            code: canonical_dense(&code),
        }
    }
}

impl fmt::Display for ChordDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.code {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for ChordDiagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let code: Vec<u32> = s
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Invalid(format!("bad chord label {t:?}")))
            })
            .collect::<Result<_>>()?;
        Self::new(&code)
    }
}

/// Canonical representative of a pairing code under rotation plus
/// relabeling by first occurrence. Idempotent.
pub fn canonical_code(code: &[u32]) -> Result<Vec<u32>> {
    if code.len() % 2 != 0 {
        return Err(Error::Invalid(format!(
            "code has odd length {}",
            code.len()
        )));
    }
    // validate: every label appears exactly twice
    let mut counts: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    for &l in code {
        *counts.entry(l).or_insert(0) += 1;
    }
    for (l, c) in &counts {
        if *c != 2 {
            return Err(Error::Invalid(format!(
                "label {l} appears {c} times, expected exactly 2"
            )));
        }
    }
    // densify labels so the fast path below can use flat arrays
    let mut dense = Vec::with_capacity(code.len());
    let mut map: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    for &l in code {
        let next = map.len() as u32 + 1;
        dense.push(*map.entry(l).or_insert(next));
    }
    Ok(canonical_dense(&dense))
}

/// Fast canonicalization of a code whose labels are dense in 1..=m.
fn canonical_dense(code: &[u32]) -> Vec<u32> {
    let n = code.len();
    if n == 0 {
        return Vec::new();
    }
    let m = n / 2;
    let mut best: Option<Vec<u32>> = None;
    let mut relabel = vec![0u32; m + 1];
    let mut cur = vec![0u32; n];
    for r in 0..n {
        relabel.iter_mut().for_each(|x| *x = 0);
        let mut next = 0u32;
        for i in 0..n {
            let l = code[(i + r) % n] as usize;
            if relabel[l] == 0 {
                next += 1;
                relabel[l] = next;
            }
            cur[i] = relabel[l];
        }
        if best.as_ref().map_or(true, |b| cur < *b) {
            best = Some(cur.clone());
        }
    }
    best.unwrap()
}

/// All canonical degree-m chord diagrams, sorted and duplicate-free.
pub fn enumerate_chord_diagrams(m: usize) -> Vec<ChordDiagram> {
    if m == 0 {
        return vec![ChordDiagram::empty()];
    }
    let n = 2 * m;
    // point 0 pairs with each other point; branches explored in parallel
    let sets: Vec<BTreeSet<Vec<u32>>> = (1..n)
        .into_par_iter()
        .map(|q| {
            let mut set = BTreeSet::new();
            let mut code = vec![0u32; n];
            code[0] = 1;
            code[q] = 1;
            fill_matchings(&mut code, 2, &mut set);
            set
        })
        .collect();
    let mut all = BTreeSet::new();
    for s in sets {
        all.extend(s);
    }
    all.into_iter().map(|code| ChordDiagram { code }).collect()
}

fn fill_matchings(code: &mut Vec<u32>, next_label: u32, out: &mut BTreeSet<Vec<u32>>) {
    let Some(p) = code.iter().position(|&l| l == 0) else {
        out.insert(canonical_dense(code));
        return;
    };
    code[p] = next_label;
    for q in (p + 1)..code.len() {
        if code[q] == 0 {
            code[q] = next_label;
            fill_matchings(code, next_label + 1, out);
            code[q] = 0;
        }
    }
    code[p] = 0;
}

/// Orbit count oracle: number of rotation orbits of all (2m-1)!! pairings,
/// counted directly without canonical forms (Burnside over the rotation
/// group). Test-only cross-check for the enumerator.
#[cfg(test)]
pub fn orbit_count_oracle(m: usize) -> usize {
    if m == 0 {
        return 1;
    }
    let n = 2 * m;
    let mut all: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut pairs = Vec::new();
    let mut used = vec![false; n];
    collect_pairings(n, &mut used, &mut pairs, &mut all);
    // mark orbit representatives by exploring rotations
    let key = |pairs: &[(usize, usize)]| {
        let mut k: Vec<(usize, usize)> = pairs.to_vec();
        k.sort_unstable();
        k
    };
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut orbits = 0;
    for p in &all {
        if seen.contains(&key(p)) {
            continue;
        }
        orbits += 1;
        for r in 0..n {
            let rotated: Vec<(usize, usize)> = p
                .iter()
                .map(|&(a, b)| {
                    let (a, b) = ((a + r) % n, (b + r) % n);
                    (a.min(b), a.max(b))
                })
                .collect();
            seen.insert(key(&rotated));
        }
    }
    orbits
}

#[cfg(test)]
fn collect_pairings(
    n: usize,
    used: &mut Vec<bool>,
    pairs: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let Some(p) = used.iter().position(|&u| !u) else {
        out.push(pairs.clone());
        return;
    };
    used[p] = true;
    for q in (p + 1)..n {
        if !used[q] {
            used[q] = true;
            pairs.push((p, q));
            collect_pairings(n, used, pairs, out);
            pairs.pop();
            used[q] = false;
        }
    }
    used[p] = false;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_code(&[]).unwrap(), Vec::<u32>::new());
        assert_eq!(canonical_code(&[2, 1, 2, 1]).unwrap(), vec![1, 2, 1, 2]);
        // brute-force minimum over all 4 rotations of "1 2 2 1"
        assert_eq!(canonical_code(&[1, 2, 2, 1]).unwrap(), vec![1, 1, 2, 2]);
    }

    #[test]
    fn canonical_rejects_malformed() {
        assert!(canonical_code(&[1, 1, 2]).is_err());
        let err = canonical_code(&[1, 1, 2, 3]).unwrap_err();
        assert!(err.to_string().contains('2') || err.to_string().contains('3'));
    }

    #[test]
    fn canonical_idempotent_and_rotation_invariant() {
        for m in 0..=6 {
            for d in enumerate_chord_diagrams(m) {
                let c = d.code().to_vec();
                assert_eq!(canonical_code(&c).unwrap(), c);
                let n = c.len().max(1);
                for r in 0..n {
                    let rot: Vec<u32> = (0..c.len()).map(|i| c[(i + r) % c.len()]).collect();
                    assert_eq!(canonical_code(&rot).unwrap(), c);
                }
            }
        }
    }

    #[test]
    fn enumeration_small_degrees() {
        assert_eq!(enumerate_chord_diagrams(0).len(), 1);
        assert_eq!(enumerate_chord_diagrams(1).len(), 1);
        let d2 = enumerate_chord_diagrams(2);
        let codes: Vec<String> = d2.iter().map(|d| d.to_string()).collect();
        assert_eq!(codes, vec!["1 1 2 2", "1 2 1 2"]);
        assert_eq!(enumerate_chord_diagrams(3).len(), 5);
    }

    #[test]
    fn enumeration_matches_orbit_count() {
        for m in 0..=6 {
            assert_eq!(enumerate_chord_diagrams(m).len(), orbit_count_oracle(m), "m={m}");
        }
    }

    #[test]
    fn parse_display_roundtrip() {
        for m in 0..=4 {
            for d in enumerate_chord_diagrams(m) {
                let s = d.to_string();
                let d2: ChordDiagram = s.parse().unwrap();
                assert_eq!(d, d2);
            }
        }
        assert!("1 2 x".parse::<ChordDiagram>().is_err());
    }

    #[test]
    fn isolated_chord_detection() {
        let iso: ChordDiagram = "1 1 2 2".parse().unwrap();
        assert!(iso.has_isolated_chord());
        let cross: ChordDiagram = "1 2 1 2".parse().unwrap();
        assert!(!cross.has_isolated_chord());
        // wraparound adjacency: "1 2 2 1" canonicalizes to "1 1 2 2"
        let wrap = ChordDiagram::new(&[1, 2, 2, 1]).unwrap();
        assert!(wrap.has_isolated_chord());
    }

    #[test]
    fn pairs_roundtrip() {
        for d in enumerate_chord_diagrams(3) {
            let d2 = ChordDiagram::from_pairs(&d.pairs()).unwrap();
            assert_eq!(d, d2);
        }
    }
}
