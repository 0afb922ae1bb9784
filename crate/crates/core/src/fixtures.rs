//! Deterministic synthetic proof corpus with planted lemma families.
//!
//! Each family shares a statement template and a tactic skeleton. Templates
//! understand these placeholders:
//!
//! * `{name}`: the lemma name
//! * `{stem}`: the lemma name without a trailing `P` or `E`
//! * `{i}`: 1-based member index
//! * `{pick:a|b|c}`: one alternative, chosen by the generator's seed
//!
//! The default spec plants the four-lemma refinement family next to five
//! background families and a set of unstructured noise lemmas.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::script::SOURCE_EXTENSION;

/// The planted refinement family.
pub const REFINEMENT_LEMMAS: [&str; 4] = ["cfast_invmxP", "rank_elim_seqmxE", "fast_mult_seqmxP", "det_seqmxP"];

pub const MIN_TOTAL_LEMMAS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("family `{0}` has no members")]
    EmptyFamily(String),
    #[error("family `{family}` lists {names} names for {count} members")]
    NameCountMismatch { family: String, names: usize, count: usize },
    #[error("fixture has {0} lemmas, at least {MIN_TOTAL_LEMMAS} are required")]
    TooSmall(usize),
    #[error("no family consists of exactly the refinement lemmas")]
    MissingRefinementFamily,
    #[error("lemma or family name `{0}` is used twice")]
    DuplicateName(String),
    #[error("bad template in family `{family}`: {message}")]
    BadTemplate { family: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilySpec {
    pub name: String,
    pub member_count: usize,
    /// Explicit member names; generated as `{family}_{i}` when empty.
    #[serde(default)]
    pub member_names: Vec<String>,
    pub statement_template: String,
    /// Proof body, one `.`-terminated step per line.
    pub tactic_template: String,
    /// Names emitted in the family file's `Require Import` line.
    #[serde(default)]
    pub imports: Vec<String>,
}

impl FamilySpec {
    pub fn members(&self) -> Vec<String> {
        if self.member_names.is_empty() {
            (1..=self.member_count).map(|i| format!("{}_{i}", self.name)).collect()
        } else {
            self.member_names.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureSpec {
    pub families: Vec<FamilySpec>,
    pub noise_lemmas: usize,
    pub seed: u64,
}

fn family(name: &str, count: usize, statement: &str, tactics: &str, imports: &[&str]) -> FamilySpec {
    FamilySpec {
        name: name.to_string(),
        member_count: count,
        member_names: Vec::new(),
        statement_template: statement.to_string(),
        tactic_template: tactics.to_string(),
        imports: imports.iter().map(|s| s.to_string()).collect(),
    }
}

impl Default for FixtureSpec {
    fn default() -> Self {
        let refinement = FamilySpec {
            member_names: REFINEMENT_LEMMAS.iter().map(|s| s.to_string()).collect(),
            ..family(
                "refinement",
                4,
                "forall (M : 'M_n), seqmx_of_mx ({stem}_spec M) = {stem} (seqmx_of_mx M)",
                "apply: refines_morphism.\n\
                 apply: seqmx_translation; apply: trans_seqmx_of_mx.\n\
                 by apply: seqmx_of_mxK.",
                &["refines_morphism", "seqmx_translation", "trans_seqmx_of_mx", "seqmx_of_mxK"],
            )
        };
        FixtureSpec {
            families: vec![
                refinement,
                family(
                    "natrec",
                    24,
                    "forall (n m : nat), addn_rec (n + m) {pick:m|n|0} = addn_rec n (m + {pick:0|1|n})",
                    "elim: n => [|n IHn] /=.\n\
                     by rewrite {pick:add0n|addn0|addnC}.\n\
                     rewrite {pick:addSn|addnS} IHn {pick:|addnA|addnCA}.\n\
                     by [].",
                    &[],
                ),
                family(
                    "seqcat",
                    20,
                    "forall (T : Type) (s1 s2 : seq T), size_cat (s1 ++ s2) = size s1 + size s2",
                    "move=> T s1 s2.\n\
                     case: s1 => [|x s1].\n\
                     by rewrite /= {pick:cat0s|size_nil}.\n\
                     rewrite cat_cons {pick:size_cons|size_behead}.\n\
                     exact: {pick:eq_refl|erefl}.",
                    &["cat_cons"],
                ),
                family(
                    "polyeval",
                    20,
                    "poly_hornerE {pick:p|q} x = {pick:p|q}.[x] * {pick:1|c}",
                    "rewrite /poly_hornerE {pick:hornerE|horner_mul}.\n\
                     congr (_ * _).\n\
                     {pick:ring|field|lia}.",
                    &[],
                ),
                family(
                    "mxtrace",
                    16,
                    "forall (A B : 'M_n) (k : R), mx_trace (A *m B + {pick:k|1} *: A) = \\tr (B *m A) + {pick:k|1} * \\tr A",
                    "move=> A B k.\n\
                     rewrite raddfD {pick:mxtraceZ|mxtrace_scale}.\n\
                     rewrite {pick:mxtrace_mulC|mulmxC}.\n\
                     apply/eqP; rewrite {pick:eqxx|eq_refl}.\n\
                     by apply: {pick:mxtrace_tr|trace_tr}.",
                    &["raddfD"],
                ),
                family(
                    "bigop",
                    16,
                    "forall (I : finType) (F : I -> nat), big_nat_sum (\\sum_(i | P i) F i) = \\sum_i F i * {pick:1|2}",
                    "move=> I F.\n\
                     rewrite big_mkcond.\n\
                     apply: eq_bigr => i _.\n\
                     case: (P i).\n\
                     by rewrite {pick:muln1|mul1n}.\n\
                     by rewrite {pick:mul0n|muln0}.",
                    &["big_mkcond", "eq_bigr"],
                ),
            ],
            noise_lemmas: 20,
            seed: 0,
        }
    }
}

const NOISE_HEADS: [&str; 16] = [
    "move=>", "case:", "elim:", "apply:", "rewrite", "exact:", "have", "congr", "split", "left", "right", "unfold", "simpl",
    "destruct", "intros", "eapply",
];

const NOISE_WORDS: [&str; 14] = [
    "h", "x", "y", "z", "IH", "foo", "bar", "baz", "qux", "lemA", "lemB", "eqP", "orbT", "andbC",
];

impl FixtureSpec {
    pub fn total_lemmas(&self) -> usize {
        self.families.iter().map(|f| f.member_count).sum::<usize>() + self.noise_lemmas
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        let mut seen = HashSet::new();
        let mut has_refinement = false;
        for f in &self.families {
            if f.member_count == 0 {
                return Err(FixtureError::EmptyFamily(f.name.clone()));
            }
            if !f.member_names.is_empty() && f.member_names.len() != f.member_count {
                return Err(FixtureError::NameCountMismatch {
                    family: f.name.clone(),
                    names: f.member_names.len(),
                    count: f.member_count,
                });
            }
            if !seen.insert(format!("file:{}", f.name)) {
                return Err(FixtureError::DuplicateName(f.name.clone()));
            }
            let members = f.members();
            for m in &members {
                if !seen.insert(m.clone()) {
                    return Err(FixtureError::DuplicateName(m.clone()));
                }
            }
            has_refinement |= members.iter().map(String::as_str).eq(REFINEMENT_LEMMAS);
        }
        if !has_refinement {
            return Err(FixtureError::MissingRefinementFamily);
        }
        let total = self.total_lemmas();
        if total < MIN_TOTAL_LEMMAS {
            return Err(FixtureError::TooSmall(total));
        }
        if (1..=self.noise_lemmas).any(|i| seen.contains(&noise_name(i))) {
            return Err(FixtureError::DuplicateName("noise".into()));
        }
        Ok(())
    }

    /// `(file name, contents)` pairs: one file per family plus `noise.vp`.
    pub fn generate(&self) -> Result<Vec<(String, String)>, FixtureError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut files = Vec::new();
        for f in &self.families {
            let mut text = format!("(* family {} *)\n", f.name);
            if !f.imports.is_empty() {
                text.push_str(&format!("Require Import {}.\n", f.imports.join(" ")));
            }
            for (i, name) in f.members().iter().enumerate() {
                let statement = expand(&f.statement_template, name, i + 1, &mut rng)
                    .map_err(|message| FixtureError::BadTemplate { family: f.name.clone(), message })?;
                let body = expand(&f.tactic_template, name, i + 1, &mut rng)
                    .map_err(|message| FixtureError::BadTemplate { family: f.name.clone(), message })?;
                text.push_str(&lemma_text(name, &statement, body.lines()));
            }
            files.push((format!("{}.{SOURCE_EXTENSION}", f.name), text));
        }
        if self.noise_lemmas > 0 {
            let mut text = String::from("(* unstructured lemmas *)\n");
            for i in 1..=self.noise_lemmas {
                let (statement, steps) = noise_lemma(&mut rng);
                text.push_str(&lemma_text(&noise_name(i), &statement, steps.iter().map(String::as_str)));
            }
            files.push((format!("noise.{SOURCE_EXTENSION}"), text));
        }
        Ok(files)
    }
}

fn noise_name(i: usize) -> String {
    format!("noise_{i}")
}

fn lemma_text<'a>(name: &str, statement: &str, steps: impl Iterator<Item = &'a str>) -> String {
    let mut s = format!("\nLemma {name} : {statement}.\nProof.\n");
    for step in steps.map(str::trim).filter(|l| !l.is_empty()) {
        s.push_str("  ");
        s.push_str(step);
        s.push('\n');
    }
    s.push_str("Qed.\n");
    s
}

fn stem(name: &str) -> &str {
    name.strip_suffix(['P', 'E']).unwrap_or(name)
}

fn expand(template: &str, name: &str, index: usize, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..]
            .find('}')
            .map(|c| open + c)
            .ok_or_else(|| "unclosed `{`".to_string())?;
        let key = &rest[open + 1..close];
        match key {
            "name" => out.push_str(name),
            "stem" => out.push_str(stem(name)),
            "i" => out.push_str(&index.to_string()),
            _ => match key.strip_prefix("pick:") {
                Some(alts) => {
                    let alts: Vec<&str> = alts.split('|').collect();
                    out.push_str(alts.choose(rng).expect("split yields an element"));
                }
                None => return Err(format!("unknown placeholder `{{{key}}}`")),
            },
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn noise_lemma(rng: &mut ChaCha8Rng) -> (String, Vec<String>) {
    let binders = rng.gen_range(0..4);
    let vars: Vec<String> = (0..binders).map(|i| format!("v{i}")).collect();
    let mut statement = String::new();
    if binders > 0 {
        statement.push_str(&format!("forall {} : T, ", vars.join(" ")));
    }
    let head = format!("nz{}", rng.gen_range(0..40));
    let operands: Vec<String> = (0..rng.gen_range(1..5))
        .map(|_| match vars.choose(rng) {
            Some(v) if rng.gen_bool(0.6) => v.clone(),
            _ => NOISE_WORDS.choose(rng).expect("non-empty").to_string(),
        })
        .collect();
    statement.push_str(&format!("{head} {}", operands.join(" ")));
    if rng.gen_bool(0.5) {
        statement.push_str(&format!(" = {}", NOISE_WORDS.choose(rng).expect("non-empty")));
    }

    let steps = (0..rng.gen_range(1..7))
        .map(|_| {
            let atoms: Vec<String> = (0..rng.gen_range(1..4))
                .map(|_| {
                    let head = NOISE_HEADS.choose(rng).expect("non-empty");
                    let args: Vec<&str> = (0..rng.gen_range(0..5))
                        .map(|_| *NOISE_WORDS.choose(rng).expect("non-empty"))
                        .collect();
                    if args.is_empty() {
                        head.to_string()
                    } else {
                        format!("{head} {}", args.join(" "))
                    }
                })
                .collect();
            let step = atoms.join("; ");
            if rng.gen_bool(0.2) {
                format!("by {step}.")
            } else {
                format!("{step}.")
            }
        })
        .collect();
    (statement, steps)
}
