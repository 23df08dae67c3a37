mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use report::{exit_code, render, render_error, Inputs};

#[derive(Parser)]
#[command(name = "endomorph", version, about = "Endomorphism monoids, definability and interpretations of finite structures")]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Cap for elements, monoid sizes and atom tables.
    #[arg(long, global = true, value_name = "N")]
    pub guard: Option<u64>,
    /// Seed for the randomized harnesses.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Structure file (text or JSON); stdin when omitted.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Print the structure with a short summary.
    Show,
    /// Endomorphisms, self-embeddings, automorphisms or polymorphisms.
    Monoid {
        /// end, emb, aut or pol.
        kind: String,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        /// List every element.
        #[arg(long)]
        list: bool,
    },
    /// Orbit of a tuple under a map class.
    Orbit {
        /// Tuple such as "(0 1)".
        tuple: String,
        /// end, emb, aut, surj, inj or bij.
        #[arg(long, default_value = "end")]
        class: String,
    },
    /// Is a tuple set closed under a map class?
    Closed {
        #[arg(long)]
        set: String,
        #[arg(long)]
        arity: Option<usize>,
        #[arg(long, default_value = "end")]
        class: String,
    },
    /// Decide definability of a tuple set in a fragment.
    Define {
        fragment: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        arity: Option<usize>,
    },
    /// A defining formula of a fragment, or the refusal.
    Synth {
        fragment: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        arity: Option<usize>,
    },
    /// Interpretations: file paths or library names.
    #[command(subcommand)]
    Interp(InterpCmd),
    /// Constant endomorphisms and separating tuples.
    Contractible {
        /// Longest tuples for the tuple condition (default: domain size).
        #[arg(long)]
        length: Option<usize>,
    },
    /// Right cosets of the automorphism group in End.
    Cosets,
    /// Absorbing elements, constants and idempotents commuting with Aut.
    Special,
    /// Right-invertibles within Emb within left-cancellables.
    Sandwich,
    /// Constraint satisfaction for pp sentences.
    #[command(subcommand)]
    Csp(CspCmd),
    /// Build a corpus structure.
    Corpus {
        family: Option<String>,
        params: Vec<usize>,
        #[arg(long)]
        list: bool,
    },
    /// Run a scripted example.
    Demo {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(default_value = "small")]
        scale: String,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Subcommand)]
pub enum InterpCmd {
    /// List the library interpretations.
    List,
    /// Apply an interpretation; prints the target structure.
    Apply { interp: String },
    /// Check every basic set in a fragment.
    Verify {
        interp: String,
        #[arg(long, default_value = "PEX")]
        fragment: String,
    },
    /// Compose two interpretations (first, then second).
    Compose { first: String, second: String },
    /// Induced map of a homomorphism, or the induced monoid map.
    Induce {
        interp: String,
        /// A map from the input structure to `--to` (or to itself).
        #[arg(long)]
        map: Option<String>,
        #[arg(long, value_name = "FILE")]
        to: Option<PathBuf>,
        #[arg(long, default_value = "pex")]
        level: String,
    },
    /// Are two interpretations homotopic?
    Homotopy {
        first: String,
        second: String,
        #[arg(long, default_value = "pex")]
        level: String,
    },
    /// Rebuild an interpretation from a monoid homomorphism.
    Reconstruct {
        /// Take the homomorphism induced by this interpretation.
        #[arg(long)]
        from: Option<String>,
        /// Trivial homomorphism into End of this structure.
        #[arg(long, value_name = "FILE")]
        trivial: Option<PathBuf>,
        #[arg(long, default_value = "pex")]
        level: String,
    },
    /// Check a bi-interpretation with the structure in `--other`.
    Bi {
        first: String,
        second: String,
        #[arg(long, value_name = "FILE")]
        other: PathBuf,
        #[arg(long, default_value = "pex")]
        level: String,
    },
}

#[derive(Subcommand)]
pub enum CspCmd {
    /// Decide a pp sentence over the structure.
    Solve { sentence: String },
    /// Rewrite a pp sentence over the target of an interpretation.
    Reduce { interp: String, sentence: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Vec<String> = std::env::args().skip(1).collect();
    if let Some(n) = cli.guard {
        endomorph_core::limits::set_all(n);
    }
    let mut inputs = Inputs::default();
    let start = Instant::now();
    let result = commands::run(&cli, &mut inputs);
    let seconds = start.elapsed().as_secs_f64();
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(out) => {
            if cli.json {
                let _ = writeln!(stdout, "{}", render(&command, &inputs, &out, seconds));
            } else {
                let _ = write!(stdout, "{}", out.text);
                if !out.text.ends_with('\n') && !out.text.is_empty() {
                    let _ = writeln!(stdout);
                }
                for note in &out.degeneracy {
                    let _ = writeln!(stdout, "note: {note}");
                }
            }
            ExitCode::from(if out.negative { 1 } else { 0 })
        }
        Err(e) => {
            if cli.json {
                let _ = writeln!(stdout, "{}", render_error(&command, &inputs, &e));
            }
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
