//! Words over the generators `a, b, c, d` and their letter statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use bitflags::bitflags;

use crate::error::{Error, Result};
use crate::tree::Vertex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    B,
    C,
    D,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::C, Letter::D];

    pub fn is_b_letter(self) -> bool {
        self != Letter::A
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::C => 'c',
            Letter::D => 'd',
        }
    }

    pub fn from_char(ch: char) -> Result<Self> {
        match ch {
            'a' => Ok(Letter::A),
            'b' => Ok(Letter::B),
            'c' => Ok(Letter::C),
            'd' => Ok(Letter::D),
            _ => Err(Error::InvalidLetter(ch)),
        }
    }

    /// `{1, b, c, d}` is a Klein four-group; encode b, c, d as 1, 2, 3 and
    /// multiply by xor.
    fn klein_code(self) -> u8 {
        match self {
            Letter::A => unreachable!("a is not a B-letter"),
            Letter::B => 1,
            Letter::C => 2,
            Letter::D => 3,
        }
    }

    fn from_klein_code(code: u8) -> Option<Letter> {
        match code {
            0 => None,
            1 => Some(Letter::B),
            2 => Some(Letter::C),
            3 => Some(Letter::D),
            _ => unreachable!(),
        }
    }

    pub(crate) fn set_flag(self) -> LetterSet {
        match self {
            Letter::A => LetterSet::empty(),
            Letter::B => LetterSet::B,
            Letter::C => LetterSet::C,
            Letter::D => LetterSet::D,
        }
    }
}

bitflags! {
    /// A subset of the B-letters `{b, c, d}`.
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
    pub struct LetterSet: u8 {
        const B = 0b001;
        const C = 0b010;
        const D = 0b100;
        const BC = Self::B.bits() | Self::C.bits();
        const BD = Self::B.bits() | Self::D.bits();
        const CD = Self::C.bits() | Self::D.bits();
    }
}

impl LetterSet {
    pub fn contains_letter(self, letter: Letter) -> bool {
        letter.is_b_letter() && self.contains(letter.set_flag())
    }
}

/// A word over `{a, b, c, d}`; the empty word is the identity.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenWord(Vec<Letter>);

impl GenWord {
    pub fn new() -> Self {
        GenWord(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        GenWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn concat(&self, other: &GenWord) -> GenWord {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        GenWord(letters)
    }

    /// Every generator is an involution, so the inverse is the reversal.
    pub fn inverse(&self) -> GenWord {
        GenWord(self.0.iter().rev().copied().collect())
    }

    /// The word, or `-` when it is empty.
    pub fn display_or_dash(&self) -> String {
        if self.is_empty() {
            "-".to_owned()
        } else {
            self.to_string()
        }
    }

    /// Appends `letter`, cancelling it against a trailing `a` when both are `a`.
    fn push_cancelling_a(&mut self, letter: Letter) {
        if letter == Letter::A && self.0.last() == Some(&Letter::A) {
            self.0.pop();
        } else {
            self.0.push(letter);
        }
    }
}

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in &self.0 {
            write!(f, "{}", letter.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for GenWord {
    type Err = Error;

    /// Accepts strings over `abcd`; `-` is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(GenWord::new());
        }
        s.chars().map(Letter::from_char).collect::<Result<Vec<_>>>().map(GenWord)
    }
}

/// Reduces a word with the simple relations.
///
/// The result alternates between `a` and single B-letters. It is produced by
/// a stack scan: equal adjacent `a`s cancel, adjacent B-letters multiply in
/// the Klein four-group, and cancellations expose new neighbours to the next
/// incoming letter.
pub fn reduce(word: &GenWord) -> GenWord {
    let mut stack: Vec<Letter> = Vec::with_capacity(word.len());
    for &letter in word.letters() {
        match (stack.last().copied(), letter) {
            (Some(Letter::A), Letter::A) => {
                stack.pop();
            }
            (Some(top), l) if top.is_b_letter() && l.is_b_letter() => {
                stack.pop();
                if let Some(product) = Letter::from_klein_code(top.klein_code() ^ l.klein_code()) {
                    stack.push(product);
                }
            }
            _ => stack.push(letter),
        }
    }
    GenWord(stack)
}

/// A word split as `(section0, section1) s^active`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSplit {
    pub section0: GenWord,
    pub section1: GenWord,
    pub active: bool,
}

/// Sections of a single B-letter occurrence, indexed by its parity.
///
/// Even occurrences use `b = (a,c)`, `c = (a,d)`, `d = (1,b)`; odd ones are
/// conjugated by `a`: `aba = (c,a)`, `aca = (d,a)`, `ada = (b,1)`.
fn letter_sections(letter: Letter, odd: bool) -> [Option<Letter>; 2] {
    use Letter::*;
    let even = match letter {
        B => [Some(A), Some(C)],
        C => [Some(A), Some(D)],
        D => [None, Some(B)],
        A => unreachable!(),
    };
    if odd {
        [even[1], even[0]]
    } else {
        even
    }
}

/// Wreath decomposition of a word.
///
/// The word is scanned once with a running `a`-parity. Each B-letter
/// contributes its sections from the even or odd table; the only relation
/// used is `aa = 1`; relations among B-letters are never applied.
pub fn decompose_word(word: &GenWord) -> WordSplit {
    let mut odd = false;
    let mut section0 = GenWord::new();
    let mut section1 = GenWord::new();
    for &letter in word.letters() {
        if letter == Letter::A {
            odd = !odd;
            continue;
        }
        let [s0, s1] = letter_sections(letter, odd);
        if let Some(l) = s0 {
            section0.push_cancelling_a(l);
        }
        if let Some(l) = s1 {
            section1.push_cancelling_a(l);
        }
    }
    WordSplit {
        section0,
        section1,
        active: odd,
    }
}

/// Section words `W_u` for every `|u| <= depth`, obtained by repeated
/// [`decompose_word`] without any B-letter reduction.
pub fn section_words(word: &GenWord, depth: usize) -> BTreeMap<Vertex, GenWord> {
    let mut out = BTreeMap::new();
    let mut frontier = vec![(Vertex::root(), word.clone())];
    for level in 0..=depth {
        let mut next = Vec::new();
        for (u, w) in frontier {
            if level < depth {
                let split = decompose_word(&w);
                next.push((u.child(false), split.section0));
                next.push((u.child(true), split.section1));
            }
            out.insert(u, w);
        }
        frontier = next;
    }
    out
}

/// Parity (0 = even, 1 = odd) of every B-letter occurrence, paired with the letter.
fn b_occurrences(word: &GenWord) -> impl Iterator<Item = (Letter, usize)> + '_ {
    word.letters()
        .iter()
        .scan(0usize, |parity, &letter| {
            if letter == Letter::A {
                *parity ^= 1;
                Some(None)
            } else {
                Some(Some((letter, *parity)))
            }
        })
        .flatten()
}

/// Number of `set`-letters in the word.
pub fn count(word: &GenWord, set: LetterSet) -> usize {
    word.letters().iter().filter(|&&l| set.contains_letter(l)).count()
}

/// Number of `set`-letters preceded by a number of `a`s of parity `parity`.
pub fn count_parity(word: &GenWord, set: LetterSet, parity: usize) -> usize {
    b_occurrences(word)
        .filter(|&(l, p)| p == parity && set.contains_letter(l))
        .count()
}

/// Number of `{b,c}`-letters of parity `p` preceded by a number of
/// `{b,c}`-letters of the opposite parity whose parity is `q`.
pub fn count_pq(word: &GenWord, p: usize, q: usize) -> usize {
    let mut seen = [0usize; 2];
    let mut total = 0;
    for (letter, parity) in b_occurrences(word) {
        if !LetterSet::BC.contains_letter(letter) {
            continue;
        }
        if parity == p && seen[1 - p] % 2 == q {
            total += 1;
        }
        seen[parity] += 1;
    }
    total
}

/// All parity-resolved letter counts of a word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LetterStats {
    /// `by_letter[p][i]`: occurrences of the i-th B-letter (b, c, d) with parity `p`.
    pub by_letter: [[usize; 3]; 2],
    /// `pq[p][q]`: the `{b,c}` statistic of [`count_pq`].
    pub pq: [[usize; 2]; 2],
}

impl LetterStats {
    pub fn of(word: &GenWord) -> Self {
        let mut stats = LetterStats::default();
        let mut seen = [0usize; 2];
        for (letter, parity) in b_occurrences(word) {
            stats.by_letter[parity][letter.klein_code() as usize - 1] += 1;
            if LetterSet::BC.contains_letter(letter) {
                let q = seen[1 - parity] % 2;
                stats.pq[parity][q] += 1;
                seen[parity] += 1;
            }
        }
        stats
    }

    pub fn count_parity(&self, set: LetterSet, parity: usize) -> usize {
        [Letter::B, Letter::C, Letter::D]
            .iter()
            .enumerate()
            .filter(|(_, &l)| set.contains_letter(l))
            .map(|(i, _)| self.by_letter[parity][i])
            .sum()
    }

    pub fn count(&self, set: LetterSet) -> usize {
        self.count_parity(set, 0) + self.count_parity(set, 1)
    }
}

/// The four `beta` bits predicted by the `{b,c}` statistics, indexed by
/// vertex `xy` as `2x + y`.
pub fn beta_from_counts(word: &GenWord) -> [bool; 4] {
    let stats = LetterStats::of(word);
    let bit = |p: usize, q: usize| stats.pq[p][q] % 2 == 1;
    [bit(1, 0), bit(1, 1), bit(0, 0), bit(0, 1)]
}

/// The level-1 activities predicted by the letter counts: the parity of
/// even and of odd `{b,c}`-letters.
pub fn alpha_from_counts(word: &GenWord) -> [bool; 2] {
    [
        count_parity(word, LetterSet::BC, 0) % 2 == 1,
        count_parity(word, LetterSet::BC, 1) % 2 == 1,
    ]
}
