//! Finite-state automorphisms: Mealy automata, recursion systems that mix
//! symbols with concrete automorphisms, and elements built from the branch
//! structure over `K`, the normal closure of `[a, b] = abab`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::tree::{Automorphism, Decomposition, Vertex};
use crate::words::GenWord;

#[derive(Clone, Debug)]
struct State {
    name: String,
    active: bool,
    next: [usize; 2],
}

/// A binary Mealy automaton; every state defines an automorphism. The first
/// state is the designated root.
#[derive(Clone)]
pub struct MealyAutomaton {
    states: Vec<State>,
    index: HashMap<String, usize>,
    identity: Vec<bool>,
}

impl MealyAutomaton {
    /// Builds an automaton from `(name, active, next0, next1)` rows.
    pub fn new<S: AsRef<str>>(rows: &[(S, bool, S, S)]) -> Result<Arc<Self>> {
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "automaton has no states".to_owned(),
            });
        }
        let mut index = HashMap::new();
        for (i, (name, ..)) in rows.iter().enumerate() {
            if index.insert(name.as_ref().to_owned(), i).is_some() {
                return Err(Error::DuplicateSymbol(name.as_ref().to_owned()));
            }
        }
        let lookup = |name: &S| {
            index
                .get(name.as_ref())
                .copied()
                .ok_or_else(|| Error::UnknownState(name.as_ref().to_owned()))
        };
        let states = rows
            .iter()
            .map(|(name, active, n0, n1)| {
                Ok(State {
                    name: name.as_ref().to_owned(),
                    active: *active,
                    next: [lookup(n0)?, lookup(n1)?],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let identity = identity_states(&states);
        Ok(Arc::new(MealyAutomaton {
            states,
            index,
            identity,
        }))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn root_name(&self) -> &str {
        &self.states[0].name
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state].name
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(|s| s.name.as_str())
    }

    pub(crate) fn transition(&self, state: usize) -> (bool, [usize; 2]) {
        let s = &self.states[state];
        (s.active, s.next)
    }

    /// A state is the identity iff no active state is reachable from it.
    pub fn is_identity_state(&self, state: usize) -> bool {
        self.identity[state]
    }

    /// The automorphism defined by a state.
    pub fn element(self: &Arc<Self>, name: &str) -> Result<Automorphism> {
        let state = self
            .state_index(name)
            .ok_or_else(|| Error::UnknownState(name.to_owned()))?;
        Ok(Automorphism::automaton_state(self.clone(), state))
    }

    pub fn root_element(self: &Arc<Self>) -> Automorphism {
        Automorphism::automaton_state(self.clone(), 0)
    }

    /// Level activity sums `sum_{|u| = n} alpha_u` for `n = 0..=levels`,
    /// computed from state multiplicities.
    pub fn activity_profile(&self, state: usize, levels: usize) -> Vec<u128> {
        let mut counts = vec![0u128; self.len()];
        counts[state] = 1;
        let mut profile = Vec::with_capacity(levels + 1);
        for level in 0..=levels {
            profile.push(
                counts
                    .iter()
                    .zip(&self.states)
                    .filter(|(_, s)| s.active)
                    .map(|(c, _)| c)
                    .sum(),
            );
            if level == levels {
                break;
            }
            let mut next = vec![0u128; self.len()];
            for (s, &c) in self.states.iter().zip(&counts) {
                for t in s.next {
                    next[t] += c;
                }
            }
            counts = next;
        }
        profile
    }

    /// Structural boundedness: among non-identity states, every directed
    /// cycle is disjoint from all others and no path joins two cycles.
    pub fn is_bounded(&self) -> bool {
        let mut graph = DiGraph::<usize, ()>::new();
        let nodes: Vec<Option<NodeIndex>> = (0..self.len())
            .map(|s| (!self.identity[s]).then(|| graph.add_node(s)))
            .collect();
        for (s, state) in self.states.iter().enumerate() {
            let Some(from) = nodes[s] else { continue };
            for t in state.next {
                if let Some(to) = nodes[t] {
                    graph.add_edge(from, to, ());
                }
            }
        }

        let mut component = vec![usize::MAX; graph.node_count()];
        let mut cyclic = Vec::new();
        for (c, scc) in tarjan_scc(&graph).into_iter().enumerate() {
            for &n in &scc {
                component[n.index()] = c;
            }
            let internal = scc
                .iter()
                .flat_map(|&n| graph.neighbors(n))
                .filter(|m| scc.contains(m))
                .count();
            if internal == 0 {
                continue;
            }
            // A strongly connected component is a single simple cycle iff
            // it has exactly as many internal edges as vertices.
            if internal != scc.len() {
                return false;
            }
            cyclic.push(c);
        }

        for &c in &cyclic {
            let mut seen = vec![false; graph.node_count()];
            let mut queue: VecDeque<NodeIndex> = graph
                .node_indices()
                .filter(|n| component[n.index()] == c)
                .collect();
            while let Some(n) = queue.pop_front() {
                for m in graph.neighbors(n) {
                    let mc = component[m.index()];
                    if mc != c && cyclic.contains(&mc) {
                        return false;
                    }
                    if !seen[m.index()] {
                        seen[m.index()] = true;
                        queue.push_back(m);
                    }
                }
            }
        }
        true
    }

    pub fn to_text(&self) -> String {
        self.states
            .iter()
            .map(|s| {
                format!(
                    "{}: {} {} {}\n",
                    s.name,
                    s.active as u8,
                    self.states[s.next[0]].name,
                    self.states[s.next[1]].name
                )
            })
            .collect()
    }
}

fn identity_states(states: &[State]) -> Vec<bool> {
    let mut predecessors = vec![Vec::new(); states.len()];
    for (s, state) in states.iter().enumerate() {
        for t in state.next {
            predecessors[t].push(s);
        }
    }
    let mut nontrivial: Vec<bool> = states.iter().map(|s| s.active).collect();
    let mut queue: VecDeque<usize> = (0..states.len()).filter(|&s| nontrivial[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &predecessors[t] {
            if !nontrivial[s] {
                nontrivial[s] = true;
                queue.push_back(s);
            }
        }
    }
    nontrivial.into_iter().map(|n| !n).collect()
}

impl fmt::Debug for MealyAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MealyAutomaton {{ {} }}", self.to_text().trim_end().replace('\n', "; "))
    }
}

/// Parses `<name>: <activity> <next0> <next1>` lines; blank lines and lines
/// starting with `#` are ignored.
pub fn parse_automaton(text: &str) -> Result<Arc<MealyAutomaton>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: &str| Error::Parse {
            line: n + 1,
            message: message.to_owned(),
        };
        let (name, rest) = line.split_once(':').ok_or_else(|| err("expected '<name>:'"))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        let [activity, n0, n1] = fields[..] else {
            return Err(err("expected '<activity> <next0> <next1>'"));
        };
        let active = match activity {
            "0" => false,
            "1" => true,
            _ => return Err(err("activity must be 0 or 1")),
        };
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(err("state names must be non-empty and contain no spaces"));
        }
        rows.push((name.to_owned(), active, n0.to_owned(), n1.to_owned()));
    }
    MealyAutomaton::new(&rows)
}

/// The five-state automaton of `a = (1,1)s`, `b = (a,c)`, `c = (a,d)`, `d = (1,b)`.
pub fn grigorchuk_automaton() -> Arc<MealyAutomaton> {
    MealyAutomaton::new(&[
        ("a", true, "1", "1"),
        ("b", false, "a", "c"),
        ("c", false, "a", "d"),
        ("d", false, "1", "b"),
        ("1", false, "1", "1"),
    ])
    .expect("static automaton")
}

/// The automaton of the closure element `f` obtained by choosing `1` at every
/// free vertex: `f = (l,r)s`, `l = (r,m)s`, `r = (m,r)s`, `m = (n,f)s`, `n = (r,m)`.
pub fn f_automaton() -> Arc<MealyAutomaton> {
    MealyAutomaton::new(&[
        ("f", true, "l", "r"),
        ("l", true, "r", "m"),
        ("r", true, "m", "r"),
        ("m", true, "n", "f"),
        ("n", false, "r", "m"),
    ])
    .expect("static automaton")
}

/// Level activity sums of any automorphism, by walking all sections.
pub fn activity_profile(g: &Automorphism, levels: usize) -> Vec<u64> {
    let mut profile = Vec::with_capacity(levels + 1);
    let mut frontier = vec![g.clone()];
    for level in 0..=levels {
        profile.push(frontier.iter().filter(|h| h.root_activity()).count() as u64);
        if level < levels {
            frontier = frontier
                .iter()
                .flat_map(|h| [h.section(false), h.section(true)])
                .collect();
        }
    }
    profile
}

/// A section reference in a recursion system.
#[derive(Clone, Debug)]
pub enum Reference {
    Symbol(String),
    Element(Automorphism),
}

#[derive(Clone)]
enum Resolved {
    Symbol(usize),
    Element(Automorphism),
}

struct SymbolDef {
    name: String,
    active: bool,
    sections: [Resolved; 2],
}

/// Named symbols `s = (r0, r1) s^e` whose section references are symbols or
/// concrete automorphisms.
pub struct RecursionSystem {
    symbols: Vec<SymbolDef>,
    index: HashMap<String, usize>,
}

impl RecursionSystem {
    /// Builds a system from `(name, section0, section1, active)` rows.
    pub fn new(rows: Vec<(String, Reference, Reference, bool)>) -> Result<Arc<Self>> {
        let mut index = HashMap::new();
        for (i, (name, ..)) in rows.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol(name.clone()));
            }
        }
        let resolve = |r: Reference| match r {
            Reference::Symbol(s) => index
                .get(&s)
                .map(|&i| Resolved::Symbol(i))
                .ok_or(Error::UnknownState(s)),
            Reference::Element(g) => Ok(Resolved::Element(g)),
        };
        let symbols = rows
            .into_iter()
            .map(|(name, r0, r1, active)| {
                Ok(SymbolDef {
                    name,
                    active,
                    sections: [resolve(r0)?, resolve(r1)?],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(RecursionSystem { symbols, index }))
    }

    pub fn symbol_name(&self, symbol: usize) -> &str {
        &self.symbols[symbol].name
    }

    pub fn element(self: &Arc<Self>, name: &str) -> Result<Automorphism> {
        let symbol = self
            .index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_owned()))?;
        Ok(Automorphism::recursion_symbol(self.clone(), symbol))
    }

    pub(crate) fn decompose(system: &Arc<Self>, symbol: usize) -> Decomposition {
        let def = &system.symbols[symbol];
        let sections = def.sections.clone().map(|r| match r {
            Resolved::Symbol(s) => Automorphism::recursion_symbol(system.clone(), s),
            Resolved::Element(g) => g,
        });
        Decomposition::new(def.active, sections)
    }
}

/// One factor `w^-1 x w` of a [`KWord`], `x` being `abab` or its inverse `baba`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugate {
    pub by: GenWord,
    pub inverted: bool,
}

impl Conjugate {
    pub fn word(&self) -> GenWord {
        let core: GenWord = if self.inverted { "baba" } else { "abab" }
            .parse()
            .expect("static word");
        self.by.inverse().concat(&core).concat(&self.by)
    }
}

/// An element of `K` given as a product of conjugates of `[a, b]^{+-1}`.
///
/// The shape guarantees membership in `K`; arbitrary words are only accepted
/// when they literally have this shape.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KWord {
    factors: Vec<Conjugate>,
}

impl KWord {
    pub fn identity() -> Self {
        KWord::default()
    }

    /// `[a, b] = abab`.
    pub fn commutator() -> Self {
        KWord::conjugate(GenWord::new(), false)
    }

    pub fn conjugate(by: GenWord, inverted: bool) -> Self {
        KWord {
            factors: vec![Conjugate { by, inverted }],
        }
    }

    pub fn product(&self, other: &KWord) -> KWord {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        KWord { factors }
    }

    pub fn factors(&self) -> &[Conjugate] {
        &self.factors
    }

    /// The concatenated word (not reduced).
    pub fn word(&self) -> GenWord {
        self.factors
            .iter()
            .fold(GenWord::new(), |acc, c| acc.concat(&c.word()))
    }

    /// Splits a word into blocks `rev(w) x w` with `x` in `{abab, baba}`.
    pub fn parse_word(word: &GenWord) -> Result<Self> {
        let letters = word.letters();
        let n = letters.len();
        // back[j] = start of the last block of a decomposition of letters[..j]
        let mut back: Vec<Option<usize>> = vec![None; n + 1];
        let mut reachable = vec![false; n + 1];
        reachable[0] = true;
        for i in 0..n {
            if !reachable[i] {
                continue;
            }
            for j in (i + 4..=n).step_by(2) {
                if !reachable[j] && block_conjugate(&letters[i..j]).is_some() {
                    reachable[j] = true;
                    back[j] = Some(i);
                }
            }
        }
        if !reachable[n] {
            return Err(Error::NotKShape(word.to_string()));
        }
        let mut factors = Vec::new();
        let mut j = n;
        while j > 0 {
            let i = back[j].expect("reachable");
            factors.push(block_conjugate(&letters[i..j]).expect("valid block"));
            j = i;
        }
        factors.reverse();
        Ok(KWord { factors })
    }
}

fn block_conjugate(block: &[crate::words::Letter]) -> Option<Conjugate> {
    use crate::words::Letter::{A, B};
    let m = (block.len() - 4) / 2;
    let core = &block[m..m + 4];
    let inverted = match core {
        [A, B, A, B] => false,
        [B, A, B, A] => true,
        _ => return None,
    };
    let head = &block[..m];
    let tail = &block[m + 4..];
    head.iter()
        .eq(tail.iter().rev())
        .then(|| Conjugate {
            by: GenWord::from_letters(tail.to_vec()),
            inverted,
        })
}

impl FromStr for KWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KWord::parse_word(&s.parse()?)
    }
}

impl fmt::Display for KWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word().display_or_dash())
    }
}

/// The element `kbar = (k, kbar)`: inactive everywhere along the rightmost
/// ray, with `k` hanging at every vertex `1^n 0`.
pub fn kbar_element(k: &KWord) -> Automorphism {
    let element = Automorphism::word(k.word());
    if element.is_trivially_identity() {
        return Automorphism::identity();
    }
    let system = RecursionSystem::new(vec![(
        "kbar".to_owned(),
        Reference::Element(element),
        Reference::Symbol("kbar".to_owned()),
        false,
    )])
    .expect("self-referential symbol is defined");
    system.element("kbar").expect("symbol exists")
}

/// The automorphism that is inactive outside the given independent vertices
/// and has the assigned `K`-elements as sections at them.
pub fn scattered_element(assignments: &[(Vertex, KWord)]) -> Result<Automorphism> {
    for (i, (u, _)) in assignments.iter().enumerate() {
        for (v, _) in &assignments[i + 1..] {
            if u.is_prefix_of(v) {
                return Err(Error::PrefixConflict(u.to_string(), v.to_string()));
            }
            if v.is_prefix_of(u) {
                return Err(Error::PrefixConflict(v.to_string(), u.to_string()));
            }
        }
    }
    let entries: Vec<(&[bool], Automorphism)> = assignments
        .iter()
        .map(|(v, k)| (v.letters(), Automorphism::word(k.word())))
        .collect();
    Ok(build_scattered(&entries))
}

fn build_scattered(entries: &[(&[bool], Automorphism)]) -> Automorphism {
    match entries {
        [] => Automorphism::identity(),
        [([], g)] => g.clone(),
        _ => {
            let child = |x: bool| {
                let sub: Vec<(&[bool], Automorphism)> = entries
                    .iter()
                    .filter(|(p, _)| p[0] == x)
                    .map(|(p, g)| (&p[1..], g.clone()))
                    .collect();
                build_scattered(&sub)
            };
            Automorphism::from_sections(child(false), child(true), false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::in_closure_up_to;

    fn word(s: &str) -> Automorphism {
        Automorphism::word(s.parse().unwrap())
    }

    #[test]
    fn grigorchuk_states() {
        let g = grigorchuk_automaton();
        assert_eq!(g.len(), 5);
        assert!(g.is_identity_state(g.state_index("1").unwrap()));
        let b = g.element("b").unwrap();
        assert!(b.section(true).agrees_to_depth(&g.element("c").unwrap(), 10));
        assert!(g.element("1").unwrap().is_trivially_identity());
        for name in ["a", "b", "c", "d"] {
            assert!(g.element(name).unwrap().agrees_to_depth(&word(name), 8), "{name}");
        }
        assert!(matches!(g.element("x"), Err(Error::UnknownState(_))));
    }

    #[test]
    fn f_states() {
        let f = f_automaton();
        let n = f.element("n").unwrap();
        assert!(!n.root_activity());
        assert!(n.section(false).agrees_to_depth(&f.element("r").unwrap(), 8));
        assert!(n.section(true).agrees_to_depth(&f.element("m").unwrap(), 8));
    }

    #[test]
    fn f_portrait_matches_figure() {
        let p = f_automaton().root_element().portrait(5);
        for level in 0..3 {
            assert!(p.level(level).all());
        }
        let row = |l: usize| -> String { p.level(l).iter().map(|b| if *b { '1' } else { '0' }).collect() };
        assert_eq!(row(3), "11010111");
        assert_eq!(row(4), "0111111111110111");
    }

    #[test]
    fn boundedness() {
        assert!(grigorchuk_automaton().is_bounded());
        assert!(!f_automaton().is_bounded());
        let id = MealyAutomaton::new(&[("e", false, "e", "e")]).unwrap();
        assert!(id.is_bounded());
        // two disjoint cycles joined by a path
        let joined = MealyAutomaton::new(&[
            ("p", true, "p", "q"),
            ("q", true, "q", "e"),
            ("e", false, "e", "e"),
        ])
        .unwrap();
        assert!(!joined.is_bounded());
        // the adding machine t = (1, t)s is bounded
        let adder = MealyAutomaton::new(&[("t", true, "e", "t"), ("e", false, "e", "e")]).unwrap();
        assert!(adder.is_bounded());
    }

    #[test]
    fn identity_detection_is_by_reachability() {
        let m = MealyAutomaton::new(&[
            ("x", false, "y", "x"),
            ("y", false, "x", "y"),
            ("z", false, "x", "w"),
            ("w", true, "x", "x"),
        ])
        .unwrap();
        assert!(m.is_identity_state(0));
        assert!(m.is_identity_state(1));
        assert!(!m.is_identity_state(2));
        assert!(m.element("x").unwrap().is_trivially_identity());
    }

    #[test]
    fn activity_profiles() {
        assert_eq!(activity_profile(&Automorphism::identity(), 4), vec![0; 5]);
        let d = activity_profile(&word("d"), 10);
        // d = (1, b), b = (a, c), c = (a, d): one active a on two levels out of three
        assert_eq!(d, vec![0, 0, 1, 1, 0, 1, 1, 0, 1, 1, 0]);
        let f = f_automaton();
        let by_counts = f.activity_profile(0, 12);
        let by_walk = activity_profile(&f.root_element(), 12);
        assert_eq!(by_counts.iter().map(|&c| c as u64).collect::<Vec<_>>(), by_walk);
        assert_eq!(&by_walk[..4], &[1, 2, 4, 6]);
    }

    #[test]
    fn automaton_text_round_trip() {
        let f = f_automaton();
        let parsed = parse_automaton(&f.to_text()).unwrap();
        assert_eq!(parsed.to_text(), f.to_text());
        assert!(parse_automaton("a: 2 a a").is_err());
        assert!(parse_automaton("a: 1 a b").is_err());
        assert!(parse_automaton("a 1 a a").is_err());
        assert!(parse_automaton("# nothing\n").is_err());
    }

    #[test]
    fn recursion_system_validation() {
        let dup = RecursionSystem::new(vec![
            ("s".into(), Reference::Symbol("s".into()), Reference::Symbol("s".into()), false),
            ("s".into(), Reference::Symbol("s".into()), Reference::Symbol("s".into()), true),
        ]);
        assert!(matches!(dup, Err(Error::DuplicateSymbol(_))));
        let missing = RecursionSystem::new(vec![(
            "s".into(),
            Reference::Symbol("t".into()),
            Reference::Element(Automorphism::identity()),
            false,
        )]);
        assert!(matches!(missing, Err(Error::UnknownState(_))));
    }

    #[test]
    fn kword_shapes() {
        let k: KWord = "abab".parse().unwrap();
        assert_eq!(k, KWord::commutator());
        let k: KWord = "cababc".parse().unwrap();
        assert_eq!(k, KWord::conjugate("c".parse().unwrap(), false));
        let k: KWord = "ababdbabad".parse().unwrap();
        assert_eq!(k.factors().len(), 2);
        assert!(k.factors()[1].inverted);
        assert_eq!(k.word().to_string(), "ababdbabad");
        assert!(matches!("abba".parse::<KWord>(), Err(Error::NotKShape(_))));
        assert!(matches!("cababd".parse::<KWord>(), Err(Error::NotKShape(_))));
        assert_eq!("-".parse::<KWord>().unwrap(), KWord::identity());
    }

    #[test]
    fn kbar_is_self_similar() {
        let k = KWord::commutator();
        let kbar = kbar_element(&k);
        let kw = word("abab");
        let mut u = Vertex::root();
        for _ in 0..=8 {
            assert!(kbar.section_at(&u.child(false)).agrees_to_depth(&kw, 8));
            u = u.child(true);
        }
        assert!(kbar.section(true).agrees_to_depth(&kbar, 10));
        assert!(kbar_element(&KWord::identity()).is_trivially_identity());
    }

    #[test]
    fn scattered_examples() {
        assert!(scattered_element(&[]).unwrap().is_trivially_identity());
        let k = KWord::commutator();
        let single = scattered_element(&[(Vertex::root(), k.clone())]).unwrap();
        assert!(single.agrees_to_depth(&word("abab"), 10));
        let three = scattered_element(&[
            ("00".parse().unwrap(), k.clone()),
            ("01".parse().unwrap(), k.clone()),
            ("1".parse().unwrap(), k.clone()),
        ])
        .unwrap();
        assert!(in_closure_up_to(&three, 12).unwrap().is_ok());
        assert!(three.section_at(&"01".parse().unwrap()).agrees_to_depth(&word("abab"), 8));
        let conflict = scattered_element(&[("0".parse().unwrap(), k.clone()), ("01".parse().unwrap(), k)]);
        assert!(matches!(conflict, Err(Error::PrefixConflict(..))));
    }
}
