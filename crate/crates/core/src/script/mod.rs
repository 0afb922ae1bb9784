//! A miniature SSReflect-style proof-script language.
//!
//! Only the surface needed for tactic-level features is modelled: lemma
//! names, statement tokens, and proofs as sequences of `.`-terminated
//! sentences whose `;`-separated atoms carry a tactic family and arguments.
//! See [`grammar_ebnf`] for the accepted syntax.

mod lexer;
mod parser;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{grammar_ebnf, parse_corpus};

pub const SOURCE_EXTENSION: &str = "vp";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{file}:{line}: {message}")]
    Syntax {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: duplicate lemma `{name}`")]
    DuplicateLemma {
        name: String,
        file: String,
        line: usize,
    },
}

/// Closed set of tactic families; anything unrecognised is `Rest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TacticFamily {
    Move,
    Case,
    Elim,
    Apply,
    Rewrite,
    Exact,
    By,
    Rest,
}

impl TacticFamily {
    pub const ALL: [TacticFamily; 8] = [
        TacticFamily::Move,
        TacticFamily::Case,
        TacticFamily::Elim,
        TacticFamily::Apply,
        TacticFamily::Rewrite,
        TacticFamily::Exact,
        TacticFamily::By,
        TacticFamily::Rest,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Family of a tactic head word.
    pub fn of_head(word: &str) -> TacticFamily {
        match word {
            "move" | "intro" | "intros" => TacticFamily::Move,
            "case" | "destruct" => TacticFamily::Case,
            "elim" | "induction" => TacticFamily::Elim,
            "apply" | "eapply" => TacticFamily::Apply,
            "rewrite" => TacticFamily::Rewrite,
            "exact" => TacticFamily::Exact,
            "by" | "done" => TacticFamily::By,
            _ => TacticFamily::Rest,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TacticFamily::Move => "move",
            TacticFamily::Case => "case",
            TacticFamily::Elim => "elim",
            TacticFamily::Apply => "apply",
            TacticFamily::Rewrite => "rewrite",
            TacticFamily::Exact => "exact",
            TacticFamily::By => "by",
            TacticFamily::Rest => "rest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgKind {
    /// Bound by a quantifier in the lemma statement.
    Hypothesis,
    /// A lemma declared earlier in the corpus or imported.
    #[serde(rename = "lemma")]
    LemmaRef,
    Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arg {
    pub kind: ArgKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub family: TacticFamily,
    pub args: Vec<Arg>,
}

/// One `.`-terminated proof sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TacticStep {
    pub atoms: Vec<Atom>,
}

impl TacticStep {
    pub fn args(&self) -> impl Iterator<Item = &Arg> {
        self.atoms.iter().flat_map(|a| &a.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LemmaScript {
    pub name: String,
    #[serde(rename = "statement")]
    pub statement_tokens: Vec<String>,
    pub steps: Vec<TacticStep>,
}

impl LemmaScript {
    pub fn statement_text(&self) -> String {
        self.statement_tokens.join(" ")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub lemmas: Vec<LemmaScript>,
    #[serde(rename = "sourceFiles", default)]
    pub source_files: Vec<String>,
    #[serde(default)]
    pub imports: Vec<String>,
}

impl Corpus {
    pub fn lemma(&self, name: &str) -> Option<&LemmaScript> {
        self.lemmas.iter().find(|l| l.name == name)
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}
