//! Portrait constraints for the closure of the Grigorchuk group.
//!
//! Everything here works on depth-3 windows: the 14 activities on the three
//! levels strictly below some vertex `u`. Writing `x, y, z` for letters, a
//! window carries `alpha_x`, `alpha_xy` and `alpha_xyz` relative to `u`, and
//! the four parities
//!
//! ```text
//! beta_xy = alpha_xy + alpha_{x(1-y)0} + alpha_{x(1-y)1}   (mod 2)
//! ```
//!
//! An automorphism lies in the closure iff every one of its windows has
//! `(alpha_0, alpha_1, beta_00, beta_01, beta_10, beta_11)` among the eight
//! rows of [`ConstraintTable`].

use std::fmt;

use num_rational::Ratio;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::QuotientSet;
use crate::scalar::BitRatio;
use crate::tree::{Automorphism, Portrait, Vertex};

/// The activities of levels 1 to 3 below a vertex, packed into 14 bits:
/// bits `0..2` hold level 1, bits `2..6` level 2 and bits `6..14` level 3,
/// each in lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowDecoration(u16);

impl WindowDecoration {
    pub const BITS: u32 = 14;

    pub fn from_bits(bits: u16) -> Self {
        assert!(bits < 1 << Self::BITS, "window has 14 bits");
        WindowDecoration(bits)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn from_levels(level1: [bool; 2], level2: [bool; 4], level3: [bool; 8]) -> Self {
        let bits = level1
            .iter()
            .chain(&level2)
            .chain(&level3)
            .enumerate()
            .fold(0u16, |acc, (i, &b)| acc | ((b as u16) << i));
        WindowDecoration(bits)
    }

    /// Reads the window below `u` from a portrait; needs `|u| + 4 <= depth`.
    pub fn from_portrait(portrait: &Portrait, u: &Vertex) -> Result<Self> {
        let required = u.level() + 4;
        if portrait.depth() < required {
            return Err(Error::DepthTooSmall {
                required,
                got: portrait.depth(),
            });
        }
        let base = u.index();
        let mut bits = 0u16;
        let mut shift = 0;
        for rel in 1..=3 {
            let level = u.level() + rel;
            for k in 0..1 << rel {
                bits |= (portrait.get(level, (base << rel) + k) as u16) << shift;
                shift += 1;
            }
        }
        Ok(WindowDecoration(bits))
    }

    fn bit(self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    /// Activity at relative vertex `x`.
    pub fn alpha1(self, x: usize) -> bool {
        self.bit(x)
    }

    /// Activity at relative vertex `xy`, indexed `2x + y`.
    pub fn alpha2(self, xy: usize) -> bool {
        self.bit(2 + xy)
    }

    /// Activity at relative vertex `xyz`, indexed `4x + 2y + z`.
    pub fn alpha3(self, xyz: usize) -> bool {
        self.bit(6 + xyz)
    }

    pub fn level1(self) -> [bool; 2] {
        [0, 1].map(|i| self.alpha1(i))
    }

    pub fn level2(self) -> [bool; 4] {
        [0, 1, 2, 3].map(|i| self.alpha2(i))
    }

    pub fn level3(self) -> [bool; 8] {
        std::array::from_fn(|i| self.alpha3(i))
    }

    pub fn beta_profile(self) -> BetaProfile {
        let beta = std::array::from_fn(|xy| beta_triple(xy).iter().fold(false, |acc, &(lvl, i)| {
            acc ^ if lvl == 2 { self.alpha2(i) } else { self.alpha3(i) }
        }));
        BetaProfile {
            alpha: self.level1(),
            beta,
        }
    }
}

impl fmt::Debug for WindowDecoration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |bits: &[bool]| bits.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        write!(
            f,
            "Window[{};{};{}]",
            s(&self.level1()),
            s(&self.level2()),
            s(&self.level3())
        )
    }
}

/// The three activities summed in `beta_xy`: `(level, index)` pairs relative
/// to the window root. Vertex `xy` is paired with the children of `x(1-y)`.
fn beta_triple(xy: usize) -> [(u8, usize); 3] {
    let sibling = xy ^ 1;
    [(2, xy), (3, 2 * sibling), (3, 2 * sibling + 1)]
}

/// `(alpha_0, alpha_1)` and `(beta_00, beta_01, beta_10, beta_11)` of a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BetaProfile {
    pub alpha: [bool; 2],
    /// Indexed by `2x + y`.
    pub beta: [bool; 4],
}

impl BetaProfile {
    pub fn beta_xy(&self, x: usize, y: usize) -> bool {
        self.beta[2 * x + y]
    }
}

impl fmt::Display for BetaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |v: bool| v as u8;
        write!(
            f,
            "({},{}|{},{},{},{})",
            b(self.alpha[0]),
            b(self.alpha[1]),
            b(self.beta[0]),
            b(self.beta[1]),
            b(self.beta[2]),
            b(self.beta[3])
        )
    }
}

/// Beta profile of the root window of a portrait of depth at least 4.
pub fn beta_profile(portrait: &Portrait) -> Result<BetaProfile> {
    WindowDecoration::from_portrait(portrait, &Vertex::root()).map(WindowDecoration::beta_profile)
}

const fn row(a0: u8, a1: u8, b00: u8, b01: u8, b10: u8, b11: u8) -> BetaProfile {
    BetaProfile {
        alpha: [a0 == 1, a1 == 1],
        beta: [b00 == 1, b01 == 1, b10 == 1, b11 == 1],
    }
}

/// The eight admissible `(alpha_0, alpha_1 | beta_00, beta_01, beta_10, beta_11)`
/// combinations, two per value of `(alpha_0, alpha_1)`, complementary in beta.
pub struct ConstraintTable;

impl ConstraintTable {
    pub const ROWS: [BetaProfile; 8] = [
        row(0, 0, 0, 0, 0, 0),
        row(0, 1, 1, 0, 0, 0),
        row(1, 0, 0, 0, 1, 0),
        row(1, 1, 0, 1, 1, 0),
        row(0, 0, 1, 1, 1, 1),
        row(0, 1, 0, 1, 1, 1),
        row(1, 0, 1, 1, 0, 1),
        row(1, 1, 1, 0, 0, 1),
    ];

    pub fn contains(profile: &BetaProfile) -> bool {
        Self::ROWS.contains(profile)
    }

    /// The unique row with the given level-1 activities and `beta[xy] = value`.
    pub fn lookup(alpha: [bool; 2], xy: usize, value: bool) -> BetaProfile {
        let mut matches = Self::ROWS
            .iter()
            .filter(|r| r.alpha == alpha && r.beta[xy] == value);
        let found = *matches.next().expect("every (alpha, beta_xy) selects a row");
        debug_assert!(matches.next().is_none());
        found
    }
}

/// True iff the window's beta profile is a row of the constraint table.
pub fn simulates_grigorchuk(window: WindowDecoration) -> bool {
    ConstraintTable::contains(&window.beta_profile())
}

/// Positions of the five freely chosen level-3 bits: `001, 011, 101, 111, 110`.
pub const FREE_SLOTS: [usize; 5] = [0b001, 0b011, 0b101, 0b111, 0b110];

/// Positions of the three forced level-3 bits: `000, 010, 100`.
pub const FORCED_SLOTS: [usize; 3] = [0b000, 0b010, 0b100];

/// Whether a vertex at level 3 or deeper is freely chosen by the
/// completion strategy: its label ends in `1` or in `110`.
pub fn is_free_slot(v: &Vertex) -> bool {
    let letters = v.letters();
    assert!(letters.len() >= 3, "slots start at level 3");
    let tail = &letters[letters.len() - 3..];
    tail[2] || tail == [true, true, false]
}

/// Completes a window from its level-1 and level-2 activities and the five
/// free level-3 bits (in [`FREE_SLOTS`] order).
///
/// `beta_10` is determined by the free bits alone; together with `alpha_0`,
/// `alpha_1` it selects a table row, and the other three betas then force
/// `alpha_010`, `alpha_000` and `alpha_100`.
pub fn complete_window(level1: [bool; 2], level2: [bool; 4], free: [bool; 5]) -> WindowDecoration {
    let mut level3 = [false; 8];
    for (slot, bit) in FREE_SLOTS.iter().zip(free) {
        level3[*slot] = bit;
    }
    let beta10 = level2[0b10] ^ level3[0b110] ^ level3[0b111];
    let target = ConstraintTable::lookup(level1, 0b10, beta10);
    level3[0b010] = target.beta[0b00] ^ level2[0b00] ^ level3[0b011];
    level3[0b000] = target.beta[0b01] ^ level2[0b01] ^ level3[0b001];
    level3[0b100] = target.beta[0b11] ^ level2[0b11] ^ level3[0b101];
    WindowDecoration::from_levels(level1, level2, level3)
}

/// Re-derives the window from its own non-forced bits.
pub fn recomplete(window: WindowDecoration) -> WindowDecoration {
    let free = FREE_SLOTS.map(|s| window.alpha3(s));
    complete_window(window.level1(), window.level2(), free)
}

/// Outcome of a finite-depth closure check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureVerdict {
    Ok { depth: usize },
    Violation { vertex: Vertex },
}

impl ClosureVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ClosureVerdict::Ok { .. })
    }
}

impl fmt::Display for ClosureVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureVerdict::Ok { depth } => write!(f, "OK depth={depth}"),
            ClosureVerdict::Violation { vertex } => write!(f, "VIOLATION vertex={vertex}"),
        }
    }
}

/// Checks every window rooted at `|u| <= depth - 4` of a portrait. The
/// first failing vertex in shortlex order is reported.
pub fn check_portrait(portrait: &Portrait) -> Result<ClosureVerdict> {
    let depth = portrait.depth();
    if depth < 4 {
        return Err(Error::DepthTooSmall { required: 4, got: depth });
    }
    for u in Vertex::up_to_level(depth - 4) {
        let window = WindowDecoration::from_portrait(portrait, &u)?;
        if !simulates_grigorchuk(window) {
            return Ok(ClosureVerdict::Violation { vertex: u });
        }
    }
    Ok(ClosureVerdict::Ok { depth })
}

/// Closure membership up to `depth`: all sections at `|u| <= depth - 4`
/// simulate the group on their depth-3 windows.
pub fn in_closure_up_to(g: &Automorphism, depth: usize) -> Result<ClosureVerdict> {
    if depth < 4 {
        return Err(Error::DepthTooSmall { required: 4, got: depth });
    }
    check_portrait(&g.portrait(depth))
}

/// Whether the depth-4 portrait of `g` is the depth-4 portrait of an element
/// of the group, i.e. whether `g` is within `1/16` of it.
pub fn within_sixteenth_of_g(g: &Automorphism, level4: &QuotientSet) -> bool {
    assert_eq!(level4.level(), 4, "needs the level-4 quotient");
    level4.contains(&g.portrait(4))
}

/// Same question answered by the constraint table alone.
pub fn root_window_simulates(g: &Automorphism) -> bool {
    let p = g.portrait(4);
    simulates_grigorchuk(WindowDecoration::from_portrait(&p, &Vertex::root()).expect("depth 4"))
}

/// Random bit for a vertex; depends only on the seed and the vertex, so
/// extending the depth never changes shallower bits.
fn vertex_bit(rng: &mut ChaCha8Rng, level: usize, index: usize) -> bool {
    rng.set_word_pos(((1u128 << level) - 1) + index as u128);
    rng.next_u32() & 1 == 1
}

/// A random portrait of a closure element, built level by level: levels 0
/// to 2 and every vertex ending in `1` or `110` are random, the remaining
/// vertices are forced by [`complete_window`] on the window three levels up.
pub fn sample_closure_element(seed: u64, depth: usize) -> Result<Portrait> {
    if depth < 4 {
        return Err(Error::DepthTooSmall { required: 4, got: depth });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut portrait = Portrait::identity(depth);
    for level in 0..3 {
        for k in 0..1 << level {
            portrait.set(level, k, vertex_bit(&mut rng, level, k));
        }
    }
    for level in 3..depth {
        let top = level - 3;
        for root in 0..1usize << top {
            let child = |rel: usize, k: usize| portrait.get(top + rel, (root << rel) + k);
            let level1 = [child(1, 0), child(1, 1)];
            let level2 = [0, 1, 2, 3].map(|k| child(2, k));
            let free = FREE_SLOTS.map(|slot| vertex_bit(&mut rng, level, (root << 3) + slot));
            let window = complete_window(level1, level2, free);
            for (slot, bit) in window.level3().into_iter().enumerate() {
                portrait.set(level, (root << 3) + slot, bit);
            }
        }
    }
    Ok(portrait)
}

/// Number of freely chosen decoration bits on levels `0..n`.
pub fn free_bit_count(n: usize) -> u64 {
    if n <= 3 {
        (1u64 << n) - 1
    } else {
        2 + 5 * (1u64 << (n - 3))
    }
}

/// Total decoration bits on levels `0..n`.
pub fn total_bit_count(n: usize) -> u64 {
    (1u64 << n) - 1
}

/// Ratio of free to total decoration bits on levels `0..n`, i.e. the ratio of
/// the base-2 logarithms of the level-`n` congruence quotient orders of the
/// closure and of the full automorphism group.
pub fn hausdorff_estimate(n: usize) -> Result<BitRatio<u64>> {
    if !(1..=63).contains(&n) {
        return Err(Error::LevelOutOfRange { got: n, min: 1, max: 63 });
    }
    Ok(BitRatio::new(free_bit_count(n), total_bit_count(n)))
}

/// The limit of [`hausdorff_estimate`].
pub const HAUSDORFF_DIMENSION: Ratio<u64> = Ratio::new_raw(5, 8);

#[cfg(test)]
mod tests {
    use super::*;

    fn all_ones_level3(level3: [bool; 8]) -> WindowDecoration {
        WindowDecoration::from_levels([true; 2], [true; 4], level3)
    }

    #[test]
    fn table_shape() {
        let rows = ConstraintTable::ROWS;
        for alpha in [[false, false], [false, true], [true, false], [true, true]] {
            let matching: Vec<_> = rows.iter().filter(|r| r.alpha == alpha).collect();
            assert_eq!(matching.len(), 2);
            for i in 0..4 {
                assert_ne!(matching[0].beta[i], matching[1].beta[i]);
            }
        }
    }

    #[test]
    fn beta_of_example_window() {
        // all ones on levels 0-2, alpha_{u1} = 1 and alpha_110 = 1
        let mut level3 = [false; 8];
        for slot in [0b001, 0b011, 0b101, 0b111, 0b110] {
            level3[slot] = true;
        }
        assert!(all_ones_level3(level3).beta_profile().beta_xy(1, 0));
    }

    #[test]
    fn simulates_examples() {
        assert!(simulates_grigorchuk(WindowDecoration::from_bits(0)));
        let forced = all_ones_level3([true, true, false, true, false, true, true, true]);
        assert!(simulates_grigorchuk(forced));
        assert!(!simulates_grigorchuk(WindowDecoration::from_bits((1 << 14) - 1)));
        assert_eq!(
            WindowDecoration::from_bits((1 << 14) - 1).beta_profile().to_string(),
            "(1,1|1,1,1,1)"
        );
    }

    #[test]
    fn complete_window_examples() {
        let w = complete_window([true; 2], [true; 4], [true; 5]);
        assert!(w.alpha3(0b000));
        assert!(!w.alpha3(0b010));
        assert!(!w.alpha3(0b100));
        assert!(simulates_grigorchuk(w));

        let w = complete_window([false; 2], [false; 4], [false; 5]);
        assert_eq!(w.bits(), 0);
    }

    #[test]
    fn complete_window_is_exhaustively_valid_and_stable() {
        for input in 0u16..1 << 11 {
            let bit = |i: usize| (input >> i) & 1 == 1;
            let w = complete_window([bit(0), bit(1)], [bit(2), bit(3), bit(4), bit(5)], [
                bit(6),
                bit(7),
                bit(8),
                bit(9),
                bit(10),
            ]);
            assert!(simulates_grigorchuk(w), "{w:?}");
            assert_eq!(recomplete(w), w);
        }
    }

    #[test]
    fn free_slot_classification() {
        let free: Vec<usize> = (0..8).filter(|&k| is_free_slot(&Vertex::from_index(3, k))).collect();
        assert_eq!(free, vec![0b001, 0b011, 0b101, 0b110, 0b111]);
        assert!(is_free_slot(&"0110".parse().unwrap()));
        assert!(!is_free_slot(&"1010".parse().unwrap()));
    }

    #[test]
    fn free_bits() {
        assert_eq!(free_bit_count(0), 0);
        assert_eq!(free_bit_count(3), 7);
        assert_eq!(free_bit_count(4), 12);
        assert_eq!(free_bit_count(5), 22);
        for n in 3..20 {
            let per_level: u64 = (3..n).map(|l| 5 * (1u64 << (l - 3))).sum();
            assert_eq!(free_bit_count(n), 7 + per_level);
        }
    }

    #[test]
    fn hausdorff_values() {
        let r = hausdorff_estimate(4).unwrap();
        assert_eq!((r.numerator, r.denominator), (12, 15));
        assert_eq!(r.to_ratio(), Ratio::new(12, 15));
        let r20 = hausdorff_estimate(20).unwrap().to_float::<f64>();
        assert!((r20 - 0.625).abs() < 0.01);
        assert!((hausdorff_estimate(60).unwrap().to_float::<f64>() - 0.625).abs() < 1e-12);
        assert!(hausdorff_estimate(0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_depth_extensible() {
        let a = sample_closure_element(7, 8).unwrap();
        assert_eq!(a, sample_closure_element(7, 8).unwrap());
        assert_eq!(sample_closure_element(7, 10).unwrap().truncate(8), a);
        assert_ne!(a, sample_closure_element(8, 8).unwrap());
        assert!(sample_closure_element(0, 3).is_err());
    }

    #[test]
    fn sampled_portraits_pass() {
        for seed in 0..20 {
            let p = sample_closure_element(seed, 7).unwrap();
            assert!(check_portrait(&p).unwrap().is_ok());
        }
    }

    #[test]
    fn verdict_format() {
        assert_eq!(ClosureVerdict::Ok { depth: 12 }.to_string(), "OK depth=12");
        let v = ClosureVerdict::Violation { vertex: "01".parse().unwrap() };
        assert_eq!(v.to_string(), "VIOLATION vertex=01");
    }
}
