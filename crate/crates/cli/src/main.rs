use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use grigorchuk_closure::automata::activity_profile;
use grigorchuk_closure::oracle::enumerate_quotient_with;
use grigorchuk_closure::{
    decompose_word, f_automaton, free_bit_count, grigorchuk_automaton, hausdorff_estimate,
    in_closure_up_to, kbar_element, parse_automaton, reduce, sample_closure_element,
    section_words, verify_theorem1, Automorphism, GenWord, KWord, MealyAutomaton, Portrait,
    Vertex,
};

/// Exact computations in the Grigorchuk group and its closure.
#[derive(Parser)]
#[command(name = "gclosure", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a word over abcd.
    Reduce { word: Word },
    /// Wreath decomposition of a word, or all section words to a depth.
    Decompose {
        word: Word,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Image of a vertex under an element.
    Act { elem: ElementSpec, vertex: Vertex },
    /// Portrait of an element truncated to a depth.
    Portrait {
        elem: ElementSpec,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Finite-depth closure membership. Exits 1 on a violation.
    CheckClosure {
        elem: ElementSpec,
        #[arg(long)]
        depth: usize,
    },
    /// Enumerate the level-n quotient of the group.
    Enumerate {
        #[arg(long)]
        level: usize,
        /// Write the sorted portrait keys to a binary cache file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Allow level 5 (several seconds, about 4M portraits).
        #[arg(long)]
        large: bool,
    },
    /// Free-bit counts and dimension estimates as TSV.
    Hausdorff {
        #[arg(long)]
        max_level: usize,
    },
    /// Random closure portrait.
    Sample {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        depth: usize,
    },
    /// Activity growth per level and, for automaton states, boundedness.
    Bounded {
        elem: ElementSpec,
        #[arg(long, default_value_t = 10)]
        levels: usize,
    },
    /// Check window constraints on random group elements.
    Verify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        max_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Dot,
}

/// Word argument; `-` is the empty word.
#[derive(Clone)]
struct Word(GenWord);

impl FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(Word).map_err(|e| e.to_string())
    }
}

/// Element designator resolved to an automorphism.
#[derive(Clone)]
struct ElementSpec {
    element: Automorphism,
    /// Set when the element is a state of a finite automaton.
    machine: Option<Arc<MealyAutomaton>>,
}

impl FromStr for ElementSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("element spec `{s}` needs a `kind:` prefix"))?;
        match kind {
            "word" => {
                let w: GenWord = rest.parse().map_err(|e| format!("{e}"))?;
                Ok(ElementSpec { element: Automorphism::word(w), machine: None })
            }
            "kbar" => {
                let w: GenWord = rest.parse().map_err(|e| format!("{e}"))?;
                let k = KWord::parse_word(&w).map_err(|e| format!("{e}"))?;
                Ok(ElementSpec { element: kbar_element(&k), machine: None })
            }
            "portrait" => {
                let text = std::fs::read_to_string(rest).map_err(|e| format!("{rest}: {e}"))?;
                let p: Portrait = text.parse().map_err(|e| format!("{rest}: {e}"))?;
                Ok(ElementSpec { element: Automorphism::truncated(p), machine: None })
            }
            "auto" => {
                let (source, state) = match rest.split_once('#') {
                    Some((source, state)) => (source, Some(state)),
                    None => (rest, None),
                };
                let machine = match source {
                    "f" => f_automaton(),
                    "grig" => grigorchuk_automaton(),
                    path => {
                        let text =
                            std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
                        parse_automaton(&text).map_err(|e| format!("{path}: {e}"))?
                    }
                };
                let element = match state {
                    Some(state) => machine.element(state).map_err(|e| format!("{e}"))?,
                    None => machine.root_element(),
                };
                Ok(ElementSpec { element, machine: Some(machine) })
            }
            other => Err(format!("unknown element kind `{other}`")),
        }
    }
}

/// Outcome of a command: text on stdout and an exit status.
struct Outcome {
    text: String,
    status: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, status: 0 }
    }
}

fn check_depth(depth: usize, min: usize, max: usize) -> Result<(), String> {
    if (min..=max).contains(&depth) {
        Ok(())
    } else {
        Err(format!("depth/level {depth} out of range {min}..={max}"))
    }
}

fn run(command: Command) -> Result<Outcome, String> {
    let mut out = String::new();
    match command {
        Command::Reduce { word } => {
            writeln!(out, "{}", reduce(&word.0).display_or_dash()).unwrap();
        }
        Command::Decompose { word, depth: None } => {
            let split = decompose_word(&word.0);
            writeln!(
                out,
                "0: {}  1: {}  sigma: {}",
                split.section0.display_or_dash(),
                split.section1.display_or_dash(),
                u8::from(split.active)
            )
            .unwrap();
        }
        Command::Decompose { word, depth: Some(depth) } => {
            check_depth(depth, 0, 20)?;
            for (u, w) in section_words(&word.0, depth) {
                writeln!(out, "{u}: {}", w.display_or_dash()).unwrap();
            }
        }
        Command::Act { elem, vertex } => {
            writeln!(out, "{}", elem.element.apply(&vertex)).unwrap();
        }
        Command::Portrait { elem, depth, format } => {
            check_depth(depth, 0, 24)?;
            let p = elem.element.portrait(depth);
            out = match format {
                Format::Text => p.to_text(),
                Format::Dot => p.to_dot(),
            };
        }
        Command::CheckClosure { elem, depth } => {
            check_depth(depth, 4, 24)?;
            let verdict = in_closure_up_to(&elem.element, depth).map_err(|e| e.to_string())?;
            writeln!(out, "{verdict}").unwrap();
            return Ok(Outcome { text: out, status: if verdict.is_ok() { 0 } else { 1 } });
        }
        Command::Enumerate { level, out: path, large } => {
            check_depth(level, 1, 5)?;
            if level == 5 && !large {
                return Err("level 5 needs --large".into());
            }
            let q = enumerate_quotient_with(level, false).map_err(|e| e.to_string())?;
            if let Some(path) = path {
                q.save(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            writeln!(out, "level={level} count={}", q.len()).unwrap();
        }
        Command::Hausdorff { max_level } => {
            check_depth(max_level, 1, 63)?;
            writeln!(out, "n\tfree_bits\ttotal_bits\tratio\tdecimal").unwrap();
            for n in 1..=max_level {
                let r = hausdorff_estimate(n).map_err(|e| e.to_string())?;
                let value: f64 = r.to_float();
                writeln!(
                    out,
                    "{n}\t{}\t{}\t{}/{}\t{value:.6}",
                    free_bit_count(n),
                    r.denominator,
                    r.numerator,
                    r.denominator
                )
                .unwrap();
            }
        }
        Command::Sample { seed, depth } => {
            check_depth(depth, 0, 24)?;
            let p = sample_closure_element(seed, depth).map_err(|e| e.to_string())?;
            writeln!(out, "# seed={seed}").unwrap();
            out.push_str(&p.to_text());
        }
        Command::Bounded { elem, levels } => {
            check_depth(levels, 1, 20)?;
            let profile = activity_profile(&elem.element, levels);
            let joined: Vec<String> = profile.iter().map(u64::to_string).collect();
            writeln!(out, "profile: {}", joined.join(",")).unwrap();
            match elem.machine {
                Some(machine) => {
                    let bounded = machine.is_bounded();
                    writeln!(out, "automaton bounded: {}", if bounded { "yes" } else { "no" })
                        .unwrap();
                    return Ok(Outcome { text: out, status: if bounded { 0 } else { 1 } });
                }
                None => {
                    let max = profile.iter().copied().max().unwrap_or(0);
                    writeln!(out, "automaton bounded: unknown (max activity {max})").unwrap();
                }
            }
        }
        Command::Verify { samples, max_len, seed } => {
            let report = verify_theorem1(samples, max_len, seed);
            writeln!(
                out,
                "seed={} samples={} max_len={} depth={} violations={}",
                report.seed,
                report.samples,
                report.max_len,
                report.depth,
                report.violations.len()
            )
            .unwrap();
            for w in &report.violations {
                writeln!(out, "violation: {}", w.display_or_dash()).unwrap();
            }
            let passed = report.passed();
            writeln!(out, "{}", if passed { "PASS" } else { "FAIL" }).unwrap();
            return Ok(Outcome { text: out, status: if passed { 0 } else { 1 } });
        }
    }
    Ok(Outcome::ok(out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.render().to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.status)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
