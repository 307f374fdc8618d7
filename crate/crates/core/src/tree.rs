//! Vertices of the binary rooted tree, finite portraits, and lazily evaluated
//! automorphisms.
//!
//! Automorphisms act on the right and products are read left to right:
//! `w^(gh) = (w^g)^h`. Every automorphism is described by its wreath
//! decomposition `g = (g_0, g_1) s^e`, where `e` is the root activity and
//! `g_0`, `g_1` are the sections at the two children of the root.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use bitvec::prelude::*;

use crate::automata::{MealyAutomaton, RecursionSystem};
use crate::error::{Error, Result};
use crate::scalar::Distance;
use crate::words::{decompose_word, reduce, GenWord};

/// A vertex of the binary tree, addressed by its word over `{0, 1}`.
///
/// Vertices are ordered shortlex: shallower first, lexicographic within a
/// level. This is the order used for portrait layout and violation reports.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Vertex(Vec<bool>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = bool>>(letters: I) -> Self {
        Vertex(letters.into_iter().collect())
    }

    /// The vertex at `level` whose label, read as a binary number with the
    /// first letter most significant, is `index`.
    pub fn from_index(level: usize, index: usize) -> Self {
        debug_assert!(level >= usize::BITS as usize || index < (1 << level));
        Vertex((0..level).map(|i| (index >> (level - 1 - i)) & 1 == 1).collect())
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[bool] {
        &self.0
    }

    /// Position of the vertex within its level (lexicographic order).
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &x| (acc << 1) | x as usize)
    }

    pub fn child(&self, x: bool) -> Self {
        let mut letters = self.0.clone();
        letters.push(x);
        Vertex(letters)
    }

    pub fn concat(&self, other: &Vertex) -> Self {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Vertex(letters)
    }

    pub fn is_prefix_of(&self, other: &Vertex) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All vertices of a level in lexicographic order.
    pub fn level_iter(level: usize) -> impl Iterator<Item = Vertex> {
        (0..1usize << level).map(move |k| Vertex::from_index(level, k))
    }

    /// All vertices with `level <= max_level`, shortlex.
    pub fn up_to_level(max_level: usize) -> impl Iterator<Item = Vertex> {
        (0..=max_level).flat_map(Vertex::level_iter)
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level()
            .cmp(&other.level())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for &x in &self.0 {
            f.write_str(if x { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({self})")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(Vertex::root());
        }
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidVertex(s.to_owned())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

/// Offset of the first bit of `level` in level-order layout.
#[inline]
pub(crate) fn level_offset(level: usize) -> usize {
    (1 << level) - 1
}

/// Activities of an automorphism on all vertices above `depth`.
///
/// Bits are stored level by level, each level in lexicographic vertex order,
/// so vertex `u` lives at `2^|u| - 1 + index(u)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Portrait {
    depth: usize,
    bits: BitVec,
}

impl Portrait {
    pub fn identity(depth: usize) -> Self {
        Portrait {
            depth,
            bits: bitvec![0; level_offset(depth)],
        }
    }

    /// Builds a portrait from explicit levels; level `i` must hold `2^i` bits.
    pub fn from_levels<L: AsRef<[bool]>>(levels: &[L]) -> Result<Self> {
        let mut portrait = Portrait::identity(levels.len());
        for (i, level) in levels.iter().enumerate() {
            let level = level.as_ref();
            if level.len() != 1 << i {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("level {i} has {} bits, expected {}", level.len(), 1 << i),
                });
            }
            for (k, &bit) in level.iter().enumerate() {
                portrait.set(i, k, bit);
            }
        }
        Ok(portrait)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn bit_count(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &BitSlice {
        &self.bits
    }

    pub fn get(&self, level: usize, index: usize) -> bool {
        assert!(level < self.depth, "level {level} beyond portrait depth {}", self.depth);
        self.bits[level_offset(level) + index]
    }

    pub fn set(&mut self, level: usize, index: usize, bit: bool) {
        assert!(level < self.depth, "level {level} beyond portrait depth {}", self.depth);
        self.bits.set(level_offset(level) + index, bit);
    }

    /// Activity at `u`; vertices at or below the depth are reported inactive.
    pub fn activity(&self, u: &Vertex) -> bool {
        u.level() < self.depth && self.get(u.level(), u.index())
    }

    pub fn level(&self, level: usize) -> &BitSlice {
        let start = level_offset(level);
        &self.bits[start..start + (1 << level)]
    }

    pub fn truncate(&self, depth: usize) -> Portrait {
        let depth = depth.min(self.depth);
        Portrait {
            depth,
            bits: self.bits[..level_offset(depth)].to_bitvec(),
        }
    }

    /// Image of a vertex with `|u| <= depth`.
    pub fn act(&self, u: &Vertex) -> Vertex {
        assert!(u.level() <= self.depth);
        let mut index = 0usize;
        let mut image = Vec::with_capacity(u.level());
        for (level, &x) in u.letters().iter().enumerate() {
            let y = x ^ self.get(level, index);
            image.push(y);
            index = (index << 1) | x as usize;
        }
        Vertex(image)
    }

    /// Positions of the images of all vertices, level by level.
    fn images(&self) -> Vec<Vec<usize>> {
        let mut images: Vec<Vec<usize>> = Vec::with_capacity(self.depth);
        let mut current = vec![0usize];
        for level in 0..self.depth {
            let mut next = Vec::with_capacity(current.len() * 2);
            for (k, &img) in current.iter().enumerate() {
                let swap = self.get(level, k) as usize;
                next.push((img << 1) | swap);
                next.push((img << 1) | (1 ^ swap));
            }
            images.push(std::mem::replace(&mut current, next));
        }
        images
    }

    /// Portrait of the product `gh` from the portraits of `g` and `h`.
    pub fn compose(&self, other: &Portrait) -> Portrait {
        let depth = self.depth.min(other.depth);
        let images = self.images();
        let mut out = Portrait::identity(depth);
        for (level, level_images) in images.iter().enumerate().take(depth) {
            for (k, &img) in level_images.iter().enumerate() {
                out.set(level, k, self.get(level, k) ^ other.get(level, img));
            }
        }
        out
    }

    pub fn inverse(&self) -> Portrait {
        let images = self.images();
        let mut out = Portrait::identity(self.depth);
        for (level, level_images) in images.iter().enumerate() {
            for (k, &img) in level_images.iter().enumerate() {
                out.set(level, img, self.get(level, k));
            }
        }
        out
    }

    /// The truncated portrait of the section at `u`, `|u| <= depth`.
    pub fn section(&self, u: &Vertex) -> Portrait {
        assert!(u.level() <= self.depth);
        let depth = self.depth - u.level();
        let mut out = Portrait::identity(depth);
        let base = u.index();
        for level in 0..depth {
            let start = base << level;
            for k in 0..1 << level {
                out.set(level, k, self.get(u.level() + level, start + k));
            }
        }
        out
    }

    /// One line per level, `0`/`1` characters in lexicographic vertex order.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.bits.len() + self.depth);
        for level in 0..self.depth {
            out.extend(self.level(level).iter().map(|b| if *b { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    /// Graphviz rendering of the decorated tree.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph portrait {\n  node [shape=circle];\n");
        for u in Vertex::up_to_level(self.depth.saturating_sub(1)) {
            if self.depth == 0 {
                break;
            }
            let bit = self.activity(&u) as u8;
            let fill = if bit == 1 { ", style=filled, fillcolor=gray80" } else { "" };
            out.push_str(&format!("  \"{u}\" [label=\"{u}\\n{bit}\"{fill}];\n"));
            if !u.is_root() {
                let parent = Vertex(u.letters()[..u.level() - 1].to_vec());
                out.push_str(&format!("  \"{parent}\" -> \"{u}\";\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels: Vec<String> = (0..self.depth)
            .map(|l| self.level(l).iter().map(|b| if *b { '1' } else { '0' }).collect())
            .collect();
        write!(f, "Portrait[{}]", levels.join(";"))
    }
}

impl FromStr for Portrait {
    type Err = Error;

    /// Parses the text format; blank lines and lines starting with `#` are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut levels = Vec::new();
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bits = line
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse {
                        line: n + 1,
                        message: format!("unexpected character {ch:?}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            let expected = 1usize << levels.len();
            if bits.len() != expected {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("expected {expected} bits, found {}", bits.len()),
                });
            }
            levels.push(bits);
        }
        Portrait::from_levels(&levels)
    }
}

/// User-supplied backing for an automorphism.
pub trait TreeAction: Send + Sync {
    fn root_activity(&self) -> bool;
    fn sections(&self) -> [Automorphism; 2];
}

#[derive(Clone)]
pub(crate) struct Decomposition {
    active: bool,
    sections: [Automorphism; 2],
}

enum Backing {
    Identity,
    Word(GenWord),
    Automaton { machine: Arc<MealyAutomaton>, state: usize },
    Recursion { system: Arc<RecursionSystem>, symbol: usize },
    /// Portrait truncation rooted at `offset`; identity below the depth.
    Truncated { portrait: Arc<Portrait>, offset: Vertex },
    Wreath(Decomposition),
    Product(Automorphism, Automorphism),
    Inverse(Automorphism),
    Custom(Box<dyn TreeAction>),
}

struct Node {
    backing: Backing,
    memo: OnceLock<Decomposition>,
}

/// A lazily evaluated automorphism of the binary rooted tree.
///
/// Cloning is cheap. Sections are computed on demand and memoized per node,
/// so repeated queries of the same section return the same object.
#[derive(Clone)]
pub struct Automorphism(Arc<Node>);

impl Automorphism {
    fn from_backing(backing: Backing) -> Self {
        Automorphism(Arc::new(Node {
            backing,
            memo: OnceLock::new(),
        }))
    }

    pub fn identity() -> Self {
        static IDENTITY: OnceLock<Automorphism> = OnceLock::new();
        IDENTITY
            .get_or_init(|| Automorphism::from_backing(Backing::Identity))
            .clone()
    }

    /// The element of the Grigorchuk group represented by a word.
    pub fn word(word: GenWord) -> Self {
        let word = reduce(&word);
        if word.is_empty() {
            Automorphism::identity()
        } else {
            Automorphism::from_backing(Backing::Word(word))
        }
    }

    pub(crate) fn automaton_state(machine: Arc<MealyAutomaton>, state: usize) -> Self {
        if machine.is_identity_state(state) {
            Automorphism::identity()
        } else {
            Automorphism::from_backing(Backing::Automaton { machine, state })
        }
    }

    pub(crate) fn recursion_symbol(system: Arc<RecursionSystem>, symbol: usize) -> Self {
        Automorphism::from_backing(Backing::Recursion { system, symbol })
    }

    /// The automorphism whose portrait is `portrait` above its depth and
    /// trivial below it.
    pub fn truncated(portrait: Portrait) -> Self {
        Automorphism::from_backing(Backing::Truncated {
            portrait: Arc::new(portrait),
            offset: Vertex::root(),
        })
    }

    /// `(section0, section1) s^active`.
    pub fn from_sections(section0: Automorphism, section1: Automorphism, active: bool) -> Self {
        if !active && section0.is_trivially_identity() && section1.is_trivially_identity() {
            return Automorphism::identity();
        }
        Automorphism::from_backing(Backing::Wreath(Decomposition {
            active,
            sections: [section0, section1],
        }))
    }

    pub fn from_action<A: TreeAction + 'static>(action: A) -> Self {
        Automorphism::from_backing(Backing::Custom(Box::new(action)))
    }

    /// True when the backing is syntactically the identity. A `false` answer
    /// says nothing.
    pub fn is_trivially_identity(&self) -> bool {
        matches!(self.0.backing, Backing::Identity)
    }

    pub(crate) fn decomposition(&self) -> &Decomposition {
        self.0.memo.get_or_init(|| self.compute_decomposition())
    }

    fn compute_decomposition(&self) -> Decomposition {
        match &self.0.backing {
            Backing::Identity => Decomposition {
                active: false,
                sections: [self.clone(), self.clone()],
            },
            Backing::Word(word) => {
                let split = decompose_word(word);
                Decomposition {
                    active: split.active,
                    sections: [Automorphism::word(split.section0), Automorphism::word(split.section1)],
                }
            }
            Backing::Automaton { machine, state } => {
                let (active, next) = machine.transition(*state);
                Decomposition {
                    active,
                    sections: next.map(|s| Automorphism::automaton_state(machine.clone(), s)),
                }
            }
            Backing::Recursion { system, symbol } => RecursionSystem::decompose(system, *symbol),
            Backing::Truncated { portrait, offset } => {
                let active = portrait.activity(offset);
                let sections = [false, true].map(|x| {
                    let child = offset.child(x);
                    if child.level() >= portrait.depth() {
                        Automorphism::identity()
                    } else {
                        Automorphism::from_backing(Backing::Truncated {
                            portrait: portrait.clone(),
                            offset: child,
                        })
                    }
                });
                Decomposition { active, sections }
            }
            Backing::Wreath(decomposition) => decomposition.clone(),
            Backing::Product(g, h) => {
                let dg = g.decomposition();
                let dh = h.decomposition();
                let active = dg.active ^ dh.active;
                // (gh)_x = g_x h_{x^g}
                let sections = [false, true].map(|x| {
                    let image = x ^ dg.active;
                    dg.sections[x as usize].compose(&dh.sections[image as usize])
                });
                Decomposition { active, sections }
            }
            Backing::Inverse(g) => {
                let dg = g.decomposition();
                // (g^-1)_x = (g_{x^(g^-1)})^-1
                let sections = [false, true].map(|x| dg.sections[(x ^ dg.active) as usize].inverse());
                Decomposition {
                    active: dg.active,
                    sections,
                }
            }
            Backing::Custom(action) => Decomposition {
                active: action.root_activity(),
                sections: action.sections(),
            },
        }
    }

    pub fn root_activity(&self) -> bool {
        self.decomposition().active
    }

    pub fn section(&self, x: bool) -> Automorphism {
        self.decomposition().sections[x as usize].clone()
    }

    pub fn section_at(&self, u: &Vertex) -> Automorphism {
        u.letters()
            .iter()
            .fold(self.clone(), |g, &x| g.section(x))
    }

    pub fn activity(&self, u: &Vertex) -> bool {
        self.section_at(u).root_activity()
    }

    /// Image of `w` under the automorphism, computed letter by letter.
    pub fn apply(&self, w: &Vertex) -> Vertex {
        let mut g = self.clone();
        let mut image = Vec::with_capacity(w.level());
        for &x in w.letters() {
            let d = g.decomposition();
            image.push(x ^ d.active);
            let next = d.sections[x as usize].clone();
            g = next;
        }
        Vertex(image)
    }

    pub fn portrait(&self, depth: usize) -> Portrait {
        let mut portrait = Portrait::identity(depth);
        let mut frontier = vec![self.clone()];
        for level in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (k, g) in frontier.iter().enumerate() {
                let d = g.decomposition();
                if d.active {
                    portrait.set(level, k, true);
                }
                if level + 1 < depth {
                    next.extend(d.sections.iter().cloned());
                }
            }
            frontier = next;
        }
        portrait
    }

    /// The product `gh`, acting first by `self`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        match (&self.0.backing, &other.0.backing) {
            (Backing::Identity, _) => other.clone(),
            (_, Backing::Identity) => self.clone(),
            (Backing::Word(u), Backing::Word(v)) => Automorphism::word(u.concat(v)),
            _ => Automorphism::from_backing(Backing::Product(self.clone(), other.clone())),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        match &self.0.backing {
            Backing::Identity => self.clone(),
            Backing::Word(w) => Automorphism::word(w.inverse()),
            Backing::Inverse(g) => g.clone(),
            _ => Automorphism::from_backing(Backing::Inverse(self.clone())),
        }
    }

    /// True iff the portraits agree on all levels below `depth`.
    pub fn agrees_to_depth(&self, other: &Automorphism, depth: usize) -> bool {
        self.first_disagreement(other, depth).is_none()
    }

    /// Shallowest level below `max_level` where the portraits differ.
    fn first_disagreement(&self, other: &Automorphism, max_level: usize) -> Option<usize> {
        let mut frontier = vec![(self.clone(), other.clone())];
        for level in 0..max_level {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (g, h) in &frontier {
                if Arc::ptr_eq(&g.0, &h.0) {
                    continue;
                }
                let dg = g.decomposition();
                let dh = h.decomposition();
                if dg.active != dh.active {
                    return Some(level);
                }
                for x in 0..2 {
                    next.push((dg.sections[x].clone(), dh.sections[x].clone()));
                }
            }
            frontier = next;
        }
        None
    }

    /// Distance `1/2^n` in the profinite metric, `n` being the largest
    /// length of words on which both automorphisms agree. Portraits are
    /// compared on levels `0..cap`; agreement there yields the bound
    /// `<= 1/2^cap`.
    pub fn distance(&self, other: &Automorphism, cap: usize) -> Distance {
        match self.first_disagreement(other, cap) {
            Some(level) => Distance::Exact(level as u32),
            None => Distance::AtMost(cap as u32),
        }
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.0.backing {
            Backing::Identity => "identity".to_owned(),
            Backing::Word(w) => format!("word {w}"),
            Backing::Automaton { machine, state } => format!("state {}", machine.state_name(*state)),
            Backing::Recursion { system, symbol } => format!("symbol {}", system.symbol_name(*symbol)),
            Backing::Truncated { portrait, offset } => {
                format!("truncation depth {} at {offset}", portrait.depth())
            }
            Backing::Wreath(_) => "wreath".to_owned(),
            Backing::Product(_, _) => "product".to_owned(),
            Backing::Inverse(_) => "inverse".to_owned(),
            Backing::Custom(_) => "custom".to_owned(),
        };
        write!(f, "Automorphism({kind})")
    }
}

impl std::ops::Mul for &Automorphism {
    type Output = Automorphism;

    fn mul(self, rhs: &Automorphism) -> Automorphism {
        self.compose(rhs)
    }
}

impl From<GenWord> for Automorphism {
    fn from(word: GenWord) -> Self {
        Automorphism::word(word)
    }
}

impl Decomposition {
    pub(crate) fn new(active: bool, sections: [Automorphism; 2]) -> Self {
        Decomposition { active, sections }
    }
}
