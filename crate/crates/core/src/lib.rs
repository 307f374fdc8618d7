//! Exact computation with automorphisms of the binary rooted tree, centred on
//! the Grigorchuk group `G = <a, b, c, d>` and its profinite closure.
//!
//! * [`tree`]: vertices, portraits and lazily evaluated automorphisms.
//! * [`words`]: words over `abcd`, reduction, wreath decomposition and the
//!   parity statistics of B-letters.
//! * [`closure`]: the depth-3 window constraints describing the closure,
//!   finite-depth membership, completion and sampling, Hausdorff estimates.
//! * [`automata`]: Mealy automata, recursion systems and `K`-built elements.
//! * [`oracle`]: brute-force enumeration of small congruence quotients.
//!
//! Numeric outputs (distances, dimension ratios) are exact and can be read
//! as any float type through [`scalar`].

pub mod automata;
pub mod closure;
pub mod error;
pub mod oracle;
pub mod scalar;
pub mod tree;
pub mod words;

pub use automata::{
    activity_profile, f_automaton, grigorchuk_automaton, kbar_element, parse_automaton,
    scattered_element, KWord, MealyAutomaton, RecursionSystem, Reference,
};
pub use closure::{
    beta_profile, check_portrait, complete_window, free_bit_count, hausdorff_estimate,
    in_closure_up_to, sample_closure_element, simulates_grigorchuk, within_sixteenth_of_g,
    BetaProfile, ClosureVerdict, ConstraintTable, WindowDecoration, HAUSDORFF_DIMENSION,
};
pub use error::{Error, Result};
pub use oracle::{enumerate_admissible_decorations, enumerate_quotient, verify_theorem1, QuotientSet};
pub use scalar::{BitRatio, Distance};
pub use tree::{Automorphism, Portrait, TreeAction, Vertex};
pub use words::{
    beta_from_counts, count, count_parity, count_pq, decompose_word, reduce, section_words,
    GenWord, Letter, LetterSet, LetterStats, WordSplit,
};

/// Exact ratio with 64-bit parts.
pub type Ratio64 = num_rational::Ratio<u64>;
/// Dimension ratio with 64-bit numerator and denominator.
pub type DimensionRatio = BitRatio<u64>;
