//! Fixed-width lemma feature vectors, scaled into `[0, 1]` at extraction.
//!
//! Layout for `K = steps_k` encoded proof steps (width `4 + 4K`):
//!
//! | slot | value |
//! |------|-------|
//! | `q` | `min(#quantifiers, quant_cap) / quant_cap` |
//! | `e` | 1 if the statement contains `=` |
//! | `t` | `min(#statement tokens, len_cap) / len_cap` |
//! | `s` | `(index of the statement head symbol + 1) / #symbols`, 0 without a head |
//!
//! then for each step `i` in `1..=K`:
//!
//! | slot | value |
//! |------|-------|
//! | `f_i` | `(family index of the first atom + 1) / 8` |
//! | `a_i` | `min(#args, arg_cap) / arg_cap` |
//! | `r_i` | `#lemma-reference args / max(#args, 1)` |
//! | `c_i` | `min(#atoms, compose_cap) / compose_cap` |
//!
//! Steps past the end of the proof are zero; steps past `K` are dropped.
//! The statement head is the first identifier after any leading quantifier
//! prefix (`forall ... ,`).

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::script::{ArgKind, Corpus, LemmaScript, TacticFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("symbol table is empty")]
    EmptySymbolTable,
    #[error("symbol `{0}` is missing from the symbol table")]
    MissingSymbol(String),
    #[error("invalid extraction config: {0}")]
    BadConfig(&'static str),
    #[error("feature CSV line {line}: {message}")]
    CsvFormat { line: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionConfig {
    pub steps_k: usize,
    pub arg_cap: usize,
    pub compose_cap: usize,
    pub quant_cap: usize,
    pub len_cap: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            steps_k: 5,
            arg_cap: 8,
            compose_cap: 8,
            quant_cap: 8,
            len_cap: 64,
        }
    }
}

impl ExtractionConfig {
    pub fn with_steps(steps_k: usize) -> Self {
        ExtractionConfig {
            steps_k,
            ..Self::default()
        }
    }

    pub fn width(&self) -> usize {
        4 + 4 * self.steps_k
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.steps_k == 0 {
            return Err(FeatureError::BadConfig("steps must be at least 1"));
        }
        if [self.arg_cap, self.compose_cap, self.quant_cap, self.len_cap].contains(&0) {
            return Err(FeatureError::BadConfig("caps must be at least 1"));
        }
        Ok(())
    }
}

const QUANTIFIERS: [&str; 2] = ["forall", "exists"];

fn is_identifier(tok: &str) -> bool {
    tok.chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_' || c == '\'' || c == '\\')
        && !QUANTIFIERS.contains(&tok)
}

/// Sorted, deduplicated identifiers of a corpus: lemma names, statement
/// identifiers and tactic arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable(Vec<String>);

impl SymbolTable {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut set = BTreeSet::new();
        for lemma in &corpus.lemmas {
            set.insert(lemma.name.clone());
            set.extend(lemma.statement_tokens.iter().filter(|t| is_identifier(t)).cloned());
            for step in &lemma.steps {
                set.extend(step.args().map(|a| a.text.clone()));
            }
        }
        SymbolTable(set.into_iter().collect())
    }

    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        SymbolTable(set.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.binary_search_by(|s| s.as_str().cmp(name)).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn capped(count: usize, cap: usize) -> f64 {
    count.min(cap) as f64 / cap as f64
}

fn statement_head(tokens: &[String]) -> Option<&str> {
    let mut i = 0;
    while tokens.get(i).is_some_and(|t| QUANTIFIERS.contains(&t.as_str())) {
        let mut depth = 0i32;
        while let Some(t) = tokens.get(i) {
            match t.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "," if depth == 0 => break,
                _ => {}
            }
            i += 1;
        }
        i += 1;
    }
    tokens.get(i..)?.iter().map(String::as_str).find(|t| is_identifier(t))
}

pub fn extract_lemma(
    lemma: &LemmaScript,
    symbols: &SymbolTable,
    cfg: &ExtractionConfig,
) -> Result<FeatureVector, FeatureError> {
    cfg.validate()?;
    if symbols.is_empty() {
        return Err(FeatureError::EmptySymbolTable);
    }
    let statement = &lemma.statement_tokens;
    let mut v = Vec::with_capacity(cfg.width());

    let quantifiers = statement.iter().filter(|t| QUANTIFIERS.contains(&t.as_str())).count();
    v.push(capped(quantifiers, cfg.quant_cap));
    v.push(if statement.iter().any(|t| t == "=") { 1.0 } else { 0.0 });
    v.push(capped(statement.len(), cfg.len_cap));
    v.push(match statement_head(statement) {
        Some(head) => {
            let idx = symbols
                .index_of(head)
                .ok_or_else(|| FeatureError::MissingSymbol(head.to_string()))?;
            (idx + 1) as f64 / symbols.len() as f64
        }
        None => 0.0,
    });

    let families = TacticFamily::ALL.len() as f64;
    for step in lemma.steps.iter().take(cfg.steps_k) {
        let family = step.atoms.first().map_or(TacticFamily::Rest, |a| a.family);
        let (args, refs) = step.args().fold((0usize, 0usize), |(n, r), a| {
            (n + 1, r + usize::from(a.kind == ArgKind::LemmaRef))
        });
        v.push((family.index() + 1) as f64 / families);
        v.push(capped(args, cfg.arg_cap));
        v.push(refs as f64 / args.max(1) as f64);
        v.push(capped(step.atoms.len(), cfg.compose_cap));
    }
    v.resize(cfg.width(), 0.0);
    Ok(FeatureVector(v))
}

/// One row per lemma, in corpus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub lemma_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub config: ExtractionConfig,
}

impl FeatureTable {
    pub fn width(&self) -> usize {
        self.config.width()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lemma_names.iter().position(|n| n == name)
    }

    /// SHA-256 of the table's CSV serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(write_features(self).as_bytes()))
    }
}

pub fn extract_corpus(corpus: &Corpus, cfg: &ExtractionConfig) -> Result<FeatureTable, FeatureError> {
    cfg.validate()?;
    let symbols = SymbolTable::from_corpus(corpus);
    let rows = corpus
        .lemmas
        .par_iter()
        .map(|l| extract_lemma(l, &symbols, cfg).map(|v| v.0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureTable {
        lemma_names: corpus.lemmas.iter().map(|l| l.name.clone()).collect(),
        rows,
        config: *cfg,
    })
}

/// CSV with header `lemma,f1,...,fd` and six decimals per value.
pub fn write_features(table: &FeatureTable) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("lemma".to_string())
        .chain((1..=table.width()).map(|i| format!("f{i}")))
        .collect();
    w.write_record(&header).expect("in-memory write");
    for (name, row) in table.lemma_names.iter().zip(&table.rows) {
        let record: Vec<String> = std::iter::once(name.clone())
            .chain(row.iter().map(|x| format!("{x:.6}")))
            .collect();
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Reads a feature CSV. The step count is recovered from the width; caps
/// are not stored in the file and come back as defaults.
pub fn read_features(text: &str) -> Result<FeatureTable, FeatureError> {
    let bad = |line: u64, message: String| FeatureError::CsvFormat { line, message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| bad(1, e.to_string()))?,
        None => return Err(bad(1, "missing header".into())),
    };
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("lemma".to_string())
        .chain((1..=d).map(|i| format!("f{i}")))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(1, "header must be `lemma,f1,...,fd`".into()));
    }
    if d < 8 || (d - 4) % 4 != 0 {
        return Err(bad(1, format!("width {d} is not 4 + 4k for k >= 1")));
    }

    let mut names = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for record in records {
        let record = record.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != d + 1 {
            return Err(bad(line, format!("expected {} fields, found {}", d + 1, record.len())));
        }
        let name = record[0].to_string();
        if !seen.insert(name.clone()) {
            return Err(bad(line, format!("duplicate lemma `{name}`")));
        }
        let row = record
            .iter()
            .skip(1)
            .map(|f| match f.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(bad(line, format!("bad value `{f}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        names.push(name);
        rows.push(row);
    }
    Ok(FeatureTable {
        lemma_names: names,
        rows,
        config: ExtractionConfig::with_steps((d - 4) / 4),
    })
}
