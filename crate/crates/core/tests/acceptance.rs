//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Run with `--nocapture` to see the report.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use grigorchuk_closure::closure::WindowDecoration;
use grigorchuk_closure::oracle::{random_word, seeded_rng, unpack};
use grigorchuk_closure::words::LetterSet;
use grigorchuk_closure::{
    beta_from_counts, beta_profile, check_portrait, complete_window, count_parity, count_pq,
    decompose_word, enumerate_quotient, f_automaton, free_bit_count, grigorchuk_automaton,
    hausdorff_estimate, in_closure_up_to, kbar_element, sample_closure_element,
    simulates_grigorchuk, within_sixteenth_of_g, Automorphism, GenWord, KWord, Portrait, Vertex,
};

const RANDOM_WORDS: usize = 10_000;
const MAX_WORD_LEN: usize = 200;
const SEED: u64 = 20_061_115;

fn bits(p: &Portrait, level: usize) -> String {
    p.level(level).iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// Peak resident set size of this process in bytes, where the OS reports it.
fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn criterion_1() {
    let start = Instant::now();
    let q = enumerate_quotient(4).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(q.len(), 4096);
    let distinct: BTreeSet<u32> = q.keys().iter().copied().collect();
    assert_eq!(distinct.len(), 4096);
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
}

fn criterion_2() {
    let quotient: BTreeSet<u32> = enumerate_quotient(4).unwrap().keys().iter().copied().collect();
    let root = Vertex::root();
    let passing: BTreeSet<u32> = (0u32..1 << 15)
        .filter(|&key| {
            let window = WindowDecoration::from_portrait(&unpack(key, 4), &root).unwrap();
            simulates_grigorchuk(window)
        })
        .collect();
    assert_eq!(passing.len(), 1 << 12);
    assert_eq!(quotient.len(), 1 << 12);
    assert_eq!(quotient, passing);
}

fn criterion_3() {
    let mut rng = seeded_rng(SEED);
    let mut failures = Vec::new();
    for _ in 0..RANDOM_WORDS {
        let w = random_word(&mut rng, MAX_WORD_LEN);
        let profile = beta_profile(&Automorphism::word(w.clone()).portrait(4)).unwrap();
        if beta_from_counts(&w) != profile.beta {
            failures.push(w);
        }
    }
    assert!(failures.is_empty(), "{} failures, first {:?}", failures.len(), failures.first());
}

fn parity_cases_hold(w: &GenWord) -> bool {
    let n = |p, q| count_pq(w, p, q) % 2;
    let case_even = if count_parity(w, LetterSet::BC, 0).is_multiple_of(2) {
        n(1, 1) == n(0, 1) && n(0, 1) == n(0, 0)
    } else {
        n(1, 0) == n(0, 1) && n(0, 1) != n(0, 0)
    };
    let case_odd = if count_parity(w, LetterSet::BC, 1).is_multiple_of(2) {
        n(0, 1) == n(1, 1) && n(1, 1) == n(1, 0)
    } else {
        n(0, 0) == n(1, 1) && n(1, 1) != n(1, 0)
    };
    case_even && case_odd
}

fn criterion_4() {
    let mut rng = seeded_rng(SEED + 1);
    let failures = (0..RANDOM_WORDS)
        .map(|_| random_word(&mut rng, MAX_WORD_LEN))
        .filter(|w| !parity_cases_hold(w))
        .count();
    assert_eq!(failures, 0);
}

fn criterion_5() {
    let split = decompose_word(&"abdabac".parse().unwrap());
    assert_eq!(split.section0.to_string(), "cbad");
    assert_eq!(split.section1.to_string(), "aca");
    assert!(split.active);
}

fn criterion_6() {
    let window = complete_window([true; 2], [true; 4], [true; 5]);
    assert!(window.alpha3(0b000));
    assert!(!window.alpha3(0b010));
    assert!(!window.alpha3(0b100));
    assert!(simulates_grigorchuk(window));
}

fn criterion_7() {
    let fa = f_automaton();
    let f = fa.root_element();
    // The figure's 16-vertex row is level 4; level 3 holds 8 vertices.
    let p = f.portrait(5);
    assert_eq!(bits(&f.portrait(4), 3), "11010111");
    assert_eq!(bits(&p, 4), "0111111111110111");
    assert!(in_closure_up_to(&f, 12).unwrap().is_ok());
    assert!(!fa.is_bounded());
    assert!(grigorchuk_automaton().is_bounded());
}

fn criterion_8() {
    let r4 = hausdorff_estimate(4).unwrap();
    assert_eq!((r4.numerator, r4.denominator), (12, 15));
    let r20: f64 = hausdorff_estimate(20).unwrap().to_float();
    assert!((r20 - 0.625).abs() < 0.01, "{r20}");
    for n in 1..=4 {
        assert_eq!(enumerate_quotient(n).unwrap().len() as u64, 1 << free_bit_count(n), "n={n}");
    }
    let start = Instant::now();
    let q5 = enumerate_quotient(5).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(q5.len() as u64, 1 << free_bit_count(5));
    assert!(elapsed < Duration::from_secs(120), "level 5 took {elapsed:?}");
    if let Some(rss) = peak_rss_bytes() {
        assert!(rss < 1 << 30, "peak rss {rss} bytes");
    }
}

fn criterion_9() {
    let level4 = enumerate_quotient(4).unwrap();
    for seed in 0..100 {
        let p = sample_closure_element(seed, 8).unwrap();
        assert!(check_portrait(&p).unwrap().is_ok(), "seed {seed}");
        let g = Automorphism::truncated(p.clone());
        assert!(in_closure_up_to(&g, 8).unwrap().is_ok(), "seed {seed}");
        // sections whose depth-4 portraits lie inside the sampled depth
        for u in Vertex::up_to_level(4) {
            assert!(within_sixteenth_of_g(&g.section_at(&u), &level4), "seed {seed} vertex {u}");
        }
    }
}

fn criterion_10() {
    let kbar = kbar_element(&KWord::commutator());
    let k = Automorphism::word("abab".parse().unwrap());
    assert!(kbar.section(true).agrees_to_depth(&kbar, 10));
    assert!(kbar.section(false).agrees_to_depth(&k, 10));
    let mut ray = Vertex::root();
    for _ in 0..=8 {
        assert!(kbar.section_at(&ray.child(false)).agrees_to_depth(&k, 10));
        ray = ray.child(true);
    }
    assert!(in_closure_up_to(&kbar, 12).unwrap().is_ok());
    assert!(enumerate_quotient(4).unwrap().contains(&kbar.portrait(4)));
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn()); 10] = [
        ("1 level-4 quotient has 4096 portraits in under 10 s", criterion_1),
        ("2 quotient equals root-window admissible set", criterion_2),
        ("3 beta_from_counts matches portrait betas on 10^4 words", criterion_3),
        ("4 parity cases hold on 10^4 words", criterion_4),
        ("5 abdabac = (cbad, aca) sigma", criterion_5),
        ("6 all-ones completion forces 1, 0, 0", criterion_6),
        ("7 element f: figure rows, closure, unbounded", criterion_7),
        ("8 Hausdorff estimates and quotient sizes n=1..5", criterion_8),
        ("9 100 sampled closure portraits pass every section", criterion_9),
        ("10 kbar(abab) self-similar and in the closure", criterion_10),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {name} ({:.2?})", start.elapsed());
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
