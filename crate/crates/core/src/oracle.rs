//! Brute-force ground truth at small depth.
//!
//! Depth-`n` portraits with `n <= 5` fit in 31 bits and are packed into a
//! `u32`, bit `2^|u| - 1 + index(u)` holding the activity at `u`. These keys
//! identify cosets of the level-`n` stabilizer.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closure::{complete_window, free_bit_count, in_closure_up_to, FREE_SLOTS};
use crate::error::{Error, Result};
use crate::tree::{level_offset, Automorphism, Portrait};
use crate::words::{GenWord, Letter};

pub const MAX_LEVEL: usize = 5;

fn check_level(n: usize) -> Result<()> {
    if (1..=MAX_LEVEL).contains(&n) {
        Ok(())
    } else {
        Err(Error::LevelOutOfRange {
            got: n,
            min: 1,
            max: MAX_LEVEL,
        })
    }
}

/// Packs a portrait of depth at most 5.
pub fn pack(portrait: &Portrait) -> u32 {
    assert!(portrait.depth() <= MAX_LEVEL);
    portrait
        .bits()
        .iter()
        .enumerate()
        .fold(0u32, |acc, (i, b)| acc | ((*b as u32) << i))
}

pub fn unpack(key: u32, depth: usize) -> Portrait {
    assert!(depth <= MAX_LEVEL);
    let mut p = Portrait::identity(depth);
    for level in 0..depth {
        for k in 0..1 << level {
            p.set(level, k, (key >> (level_offset(level) + k)) & 1 == 1);
        }
    }
    p
}

/// Packed portrait of `gh`: `alpha_u(gh) = alpha_u(g) + alpha_{u^g}(h)`.
pub fn compose_packed(g: u32, h: u32, depth: usize) -> u32 {
    let mut out = 0u32;
    let mut images = [0u32; 1 << MAX_LEVEL];
    let mut next = [0u32; 1 << MAX_LEVEL];
    for level in 0..depth {
        let offset = level_offset(level);
        for k in 0..1usize << level {
            let image = images[k];
            let ag = (g >> (offset + k)) & 1;
            let ah = (h >> (offset + image as usize)) & 1;
            out |= (ag ^ ah) << (offset + k);
            next[2 * k] = (image << 1) | ag;
            next[2 * k + 1] = (image << 1) | (ag ^ 1);
        }
        std::mem::swap(&mut images, &mut next);
    }
    out
}

/// Packed depth-`depth` portraits of `a, b, c, d`.
pub fn generator_keys(depth: usize) -> [u32; 4] {
    Letter::ALL.map(|l| pack(&Automorphism::word(GenWord::from_letters(vec![l])).portrait(depth)))
}

/// The image of the group in the level-`n` congruence quotient, as packed
/// depth-`n` portraits in ascending order.
#[derive(Clone, Debug)]
pub struct QuotientSet {
    level: usize,
    keys: Vec<u32>,
    witnesses: Option<HashMap<u32, GenWord>>,
}

impl QuotientSet {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    pub fn contains_key(&self, key: u32) -> bool {
        self.keys.binary_search(&key).is_ok()
    }

    /// Membership of the depth-`level` truncation of `portrait`.
    pub fn contains(&self, portrait: &Portrait) -> bool {
        portrait.depth() >= self.level && self.contains_key(pack(&portrait.truncate(self.level)))
    }

    /// A generator word with the given packed portrait, when recorded.
    pub fn witness(&self, key: u32) -> Option<&GenWord> {
        self.witnesses.as_ref()?.get(&key)
    }

    pub fn has_witnesses(&self) -> bool {
        self.witnesses.is_some()
    }

    pub fn portraits(&self) -> impl Iterator<Item = Portrait> + '_ {
        self.keys.iter().map(|&k| unpack(k, self.level))
    }

    fn key_width(level: usize) -> usize {
        level_offset(level).div_ceil(8).max(1)
    }

    /// Binary layout: `level: u32`, `count: u32`, then `count` keys of
    /// `ceil((2^level - 1) / 8)` bytes each, all little-endian, ascending.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.level as u32).to_le_bytes())?;
        out.write_all(&(self.keys.len() as u32).to_le_bytes())?;
        let width = Self::key_width(self.level);
        for key in &self.keys {
            out.write_all(&key.to_le_bytes()[..width])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let level = u32::from_le_bytes(word) as usize;
        check_level(level)?;
        input.read_exact(&mut word)?;
        let count = u32::from_le_bytes(word) as usize;
        let width = Self::key_width(level);
        let mut keys = Vec::with_capacity(count);
        for _ in 0..count {
            let mut buf = [0u8; 4];
            input.read_exact(&mut buf[..width])?;
            keys.push(u32::from_le_bytes(buf));
        }
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse {
                line: 0,
                message: "quotient keys are not strictly ascending".to_owned(),
            });
        }
        Ok(QuotientSet {
            level,
            keys,
            witnesses: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Breadth-first search of the level-`n` quotient from the identity by
/// right multiplication with `a, b, c, d`. Witness words are recorded for
/// `n <= 4`.
pub fn enumerate_quotient(n: usize) -> Result<QuotientSet> {
    enumerate_quotient_with(n, n <= 4)
}

pub fn enumerate_quotient_with(n: usize, witnesses: bool) -> Result<QuotientSet> {
    check_level(n)?;
    let generators = generator_keys(n);
    let expected = 1usize << free_bit_count(n);
    let mut seen: HashSet<u32> = HashSet::with_capacity(expected);
    let mut words: HashMap<u32, GenWord> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(0);
    queue.push_back(0u32);
    if witnesses {
        words.insert(0, GenWord::new());
    }
    while let Some(key) = queue.pop_front() {
        for (letter, &gen) in Letter::ALL.iter().zip(&generators) {
            let product = compose_packed(key, gen, n);
            if seen.insert(product) {
                queue.push_back(product);
                if witnesses {
                    let mut w = words[&key].clone();
                    w.push(*letter);
                    words.insert(product, w);
                }
            }
        }
    }
    let mut keys: Vec<u32> = seen.into_iter().collect();
    keys.sort_unstable();
    Ok(QuotientSet {
        level: n,
        keys,
        witnesses: witnesses.then_some(words),
    })
}

/// Builds the packed decoration determined by the free bits `free`
/// (least significant first): levels `0..3` are free, and below them the
/// five free slots of each window, in [`FREE_SLOTS`] order, with windows
/// taken left to right within a level.
pub fn decoration_from_free_bits(free: u64, n: usize) -> u32 {
    assert!(n <= MAX_LEVEL);
    let mut cursor = 0;
    let mut take = || {
        let bit = (free >> cursor) & 1 == 1;
        cursor += 1;
        bit
    };
    let mut key = 0u32;
    for i in 0..level_offset(n.min(3)) {
        key |= (take() as u32) << i;
    }
    let get = |key: u32, level: usize, k: usize| (key >> (level_offset(level) + k)) & 1 == 1;
    for level in 3..n {
        let top = level - 3;
        for root in 0..1usize << top {
            let level1 = [0, 1].map(|k| get(key, top + 1, (root << 1) + k));
            let level2 = [0, 1, 2, 3].map(|k| get(key, top + 2, (root << 2) + k));
            let free = [(); FREE_SLOTS.len()].map(|_| take());
            let window = complete_window(level1, level2, free);
            for (slot, bit) in window.level3().into_iter().enumerate() {
                key |= (bit as u32) << (level_offset(level) + (root << 3) + slot);
            }
        }
    }
    key
}

/// All depth-`n` decorations whose complete windows all satisfy the
/// constraint table, generated from their free bits; ascending packed keys.
pub fn enumerate_admissible_decorations(n: usize) -> Result<Vec<u32>> {
    check_level(n)?;
    let free = free_bit_count(n);
    let mut keys: Vec<u32> = (0..1u64 << free)
        .map(|f| decoration_from_free_bits(f, n))
        .collect();
    keys.sort_unstable();
    Ok(keys)
}

/// A uniformly random word: length uniform in `0..=max_len`, letters uniform.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> GenWord {
    let len = rng.random_range(0..=max_len);
    GenWord::from_letters((0..len).map(|_| Letter::ALL[rng.random_range(0..4)]).collect())
}

/// Seeded generator used for all reproducible sampling.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem1Report {
    pub seed: u64,
    pub samples: usize,
    pub max_len: usize,
    pub depth: usize,
    pub violations: Vec<GenWord>,
}

impl Theorem1Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the constraint table on every window of depth-8 portraits of
/// random group elements.
pub fn verify_theorem1(samples: usize, max_len: usize, seed: u64) -> Theorem1Report {
    const DEPTH: usize = 8;
    let mut rng = seeded_rng(seed);
    let violations = (0..samples)
        .map(|_| random_word(&mut rng, max_len))
        .filter(|w| {
            !in_closure_up_to(&Automorphism::word(w.clone()), DEPTH)
                .expect("depth 8 >= 4")
                .is_ok()
        })
        .collect();
    Theorem1Report {
        seed,
        samples,
        max_len,
        depth: DEPTH,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::check_portrait;

    #[test]
    fn pack_round_trip() {
        let p = Automorphism::word("abcadab".parse().unwrap()).portrait(5);
        assert_eq!(unpack(pack(&p), 5), p);
        assert_eq!(pack(&Portrait::identity(4)), 0);
    }

    #[test]
    fn packed_composition_matches_portraits() {
        let words = ["a", "bac", "dabac", "cadabacab", "abababab"];
        for x in words {
            for y in words {
                let g = Automorphism::word(x.parse().unwrap());
                let h = Automorphism::word(y.parse().unwrap());
                for n in 1..=5 {
                    let expected = pack(&g.compose(&h).portrait(n));
                    assert_eq!(compose_packed(pack(&g.portrait(n)), pack(&h.portrait(n)), n), expected);
                }
            }
        }
    }

    #[test]
    fn small_quotients() {
        assert_eq!(enumerate_quotient(1).unwrap().len(), 2);
        assert_eq!(enumerate_quotient(2).unwrap().len(), 8);
        assert_eq!(enumerate_quotient(3).unwrap().len(), 128);
        assert!(enumerate_quotient(0).is_err());
        assert!(enumerate_quotient(6).is_err());
    }

    #[test]
    fn witnesses_are_valid() {
        let q = enumerate_quotient(4).unwrap();
        for &key in q.keys() {
            let w = q.witness(key).unwrap();
            assert_eq!(pack(&Automorphism::word(w.clone()).portrait(4)), key);
        }
    }

    #[test]
    fn quotient_is_closed() {
        let q = enumerate_quotient(4).unwrap();
        let gens = generator_keys(4);
        assert!(q.contains_key(0));
        for &key in q.keys() {
            for &g in &gens {
                assert!(q.contains_key(compose_packed(key, g, 4)));
            }
        }
    }

    #[test]
    fn admissible_small_levels() {
        assert_eq!(enumerate_admissible_decorations(3).unwrap(), (0..128).collect::<Vec<u32>>());
        let four = enumerate_admissible_decorations(4).unwrap();
        assert_eq!(four.len(), 4096);
        for &key in &four {
            assert!(check_portrait(&unpack(key, 4)).unwrap().is_ok());
        }
    }

    #[test]
    fn file_round_trip() {
        let q = enumerate_quotient(3).unwrap();
        let mut buf = Vec::new();
        q.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 128);
        let back = QuotientSet::read_from(&buf[..]).unwrap();
        assert_eq!(back.keys(), q.keys());
        assert_eq!(back.level(), 3);
        assert!(QuotientSet::read_from(&buf[..10]).is_err());
    }

    #[test]
    fn window_check_on_random_words() {
        for s in ["-", "a", "b", "c", "d"] {
            let g = Automorphism::word(s.parse().unwrap());
            assert!(in_closure_up_to(&g, 8).unwrap().is_ok(), "{s}");
        }
        let report = verify_theorem1(50, 60, 3);
        assert!(report.passed());
        assert_eq!(report.seed, 3);
    }
}
