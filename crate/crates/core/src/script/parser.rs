use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use super::lexer::{sentences, Sentence, Tok, Token};
use super::{Arg, ArgKind, Atom, Corpus, LemmaScript, ParseError, TacticFamily, TacticStep};

const GRAMMAR: &str = r#"(* Proof-script grammar. Comments are written (* ... *) and nest. *)
(* A '.' ends a sentence only when followed by whitespace or end of input. *)

corpus    ::= { require | lemma proof }
require   ::= [ 'From' ident ] 'Require' [ 'Import' | 'Export' ] ident { ident } '.'
lemma ::= 'Lemma' ident ':' statement '.'
statement ::= token { token }
proof     ::= 'Proof' '.' step { step } 'Qed' '.'
step      ::= atom { ';' atom } '.'
atom      ::= 'by' [ atom ] | tactic { token }
tactic    ::= ident
token     ::= ident | number | symbol
            | '(' { token } ')' | '[' { token } ']' | '{' { token } '}'
ident     ::= ident_start { ident_char | '.' ident_char }
ident_start ::= letter | '_' | "'" | '\'
ident_char  ::= letter | digit | '_' | "'"
number    ::= digit { digit }
symbol    ::= ',' | op_char { op_char }
op_char   ::= '!' | '#' | '$' | '%' | '&' | '*' | '+' | '-' | '/' | ':'
            | '<' | '=' | '>' | '?' | '@' | '^' | '|' | '~'

(* Tactic families by head word:
     move    = move | intro | intros
     case    = case | destruct
     elim    = elim | induction
     apply   = apply | eapply
     rewrite = rewrite
     exact   = exact
     by      = by | done
     rest    = any other head
   Arguments are the identifiers of an atom other than '_' and tactic head
   words. An argument is a hypothesis when bound by a quantifier of the
   statement, a lemma reference when declared earlier in the corpus or
   listed by a 'Require', and a term otherwise. *)
"#;

/// EBNF of the accepted language.
pub fn grammar_ebnf() -> &'static str {
    GRAMMAR
}

const QUANTIFIERS: [&str; 2] = ["forall", "exists"];

fn is_tactic_word(w: &str) -> bool {
    TacticFamily::of_head(w) != TacticFamily::Rest
}

/// An atom before its arguments are classified.
#[derive(Debug, Clone)]
struct RawAtom {
    family: TacticFamily,
    args: Vec<String>,
}

#[derive(Debug, Clone)]
struct RawLemma {
    name: String,
    line: usize,
    statement: Vec<String>,
    bound: BTreeSet<String>,
    steps: Vec<Vec<RawAtom>>,
}

#[derive(Debug, Clone, Default)]
struct RawFile {
    lemmas: Vec<RawLemma>,
    imports: Vec<String>,
}

struct FileParser<'a> {
    file: &'a str,
    sentences: std::vec::IntoIter<Sentence>,
    last_line: usize,
}

impl FileParser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            file: self.file.to_string(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Sentence> {
        let s = self.sentences.next()?;
        self.last_line = s.tokens.last().map_or(s.line, |t| t.line);
        Some(s)
    }

    fn parse(mut self) -> Result<RawFile, ParseError> {
        let mut out = RawFile::default();
        while let Some(s) = self.next() {
            let head = &s.tokens[0].tok;
            if head.is_ident("Lemma") {
                let lemma = self.lemma(s)?;
                out.lemmas.push(lemma);
            } else if head.is_ident("Require") || head.is_ident("From") {
                out.imports.extend(self.require(&s)?);
            } else {
                return Err(self.err(
                    s.line,
                    format!("expected `Lemma` or `Require`, found `{}`", head.text()),
                ));
            }
        }
        Ok(out)
    }

    fn require(&self, s: &Sentence) -> Result<Vec<String>, ParseError> {
        let mut toks = s.tokens.iter().map(|t| &t.tok).peekable();
        if toks.peek().is_some_and(|t| t.is_ident("From")) {
            toks.next();
            match toks.next() {
                Some(Tok::Ident(_)) => {}
                _ => return Err(self.err(s.line, "expected a library name after `From`")),
            }
        }
        if !toks.next().is_some_and(|t| t.is_ident("Require")) {
            return Err(self.err(s.line, "expected `Require`"));
        }
        if toks.peek().is_some_and(|t| t.is_ident("Import") || t.is_ident("Export")) {
            toks.next();
        }
        let names: Vec<String> = toks
            .map(|t| match t {
                Tok::Ident(x) => Ok(x.clone()),
                other => Err(self.err(s.line, format!("unexpected `{}` in import list", other.text()))),
            })
            .collect::<Result<_, _>>()?;
        if names.is_empty() {
            return Err(self.err(s.line, "empty import list"));
        }
        Ok(names)
    }

    fn lemma(&mut self, s: Sentence) -> Result<RawLemma, ParseError> {
        let name = match s.tokens.get(1).map(|t| &t.tok) {
            Some(Tok::Ident(n)) if !is_keyword(n) => n.clone(),
            _ => return Err(self.err(s.line, "expected a lemma name after `Lemma`")),
        };
        if !s.tokens.get(2).is_some_and(|t| t.tok.is_sym(":")) {
            return Err(self.err(s.line, format!("expected `:` after `Lemma {name}`")));
        }
        let statement_toks = &s.tokens[3..];
        if statement_toks.is_empty() {
            return Err(self.err(s.line, format!("lemma `{name}` has an empty statement")));
        }
        let statement = statement_toks.iter().map(|t| t.tok.text().to_string()).collect();
        let bound = bound_variables(statement_toks);

        match self.next() {
            Some(p) if p.is_word("Proof") => {}
            Some(p) => {
                return Err(self.err(p.line, format!("expected `Proof.` after lemma `{name}`")))
            }
            None => {
                return Err(self.err(self.last_line, format!("missing `Proof.` for lemma `{name}`")))
            }
        }

        let mut steps = Vec::new();
        loop {
            match self.next() {
                None => {
                    return Err(self.err(self.last_line, format!("missing `Qed.` for lemma `{name}`")))
                }
                Some(q) if q.is_word("Qed") => break,
                Some(q) if q.tokens[0].tok.is_ident("Lemma") || q.is_word("Proof") => {
                    return Err(self.err(q.line, format!("missing `Qed.` for lemma `{name}`")))
                }
                Some(q) => steps.push(self.step(&q)?),
            }
        }
        if steps.is_empty() {
            return Err(self.err(s.line, format!("lemma `{name}` has an empty proof")));
        }
        Ok(RawLemma {
            name,
            line: s.line,
            statement,
            bound,
            steps,
        })
    }

    fn step(&self, s: &Sentence) -> Result<Vec<RawAtom>, ParseError> {
        let mut atoms = Vec::new();
        for segment in split_top_level(&s.tokens, ";") {
            if segment.is_empty() {
                return Err(self.err(s.line, "empty tactic between `;`"));
            }
            let mut rest = segment;
            let mut pending_by = false;
            while let Some((first, tail)) = rest.split_first() {
                if !first.tok.is_ident("by") {
                    break;
                }
                atoms.push(RawAtom {
                    family: TacticFamily::By,
                    args: Vec::new(),
                });
                pending_by = true;
                rest = tail;
            }
            let Some(first) = rest.first() else { continue };
            match &first.tok {
                Tok::Ident(head) => atoms.push(RawAtom {
                    family: TacticFamily::of_head(head),
                    args: arg_names(&rest[1..]),
                }),
                // `by []`, `by (...)`: the tokens belong to the `by` itself
                _ if pending_by => atoms.last_mut().expect("by atom").args = arg_names(rest),
                _ => atoms.push(RawAtom {
                    family: TacticFamily::Rest,
                    args: arg_names(rest),
                }),
            }
        }
        Ok(atoms)
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(w, "Lemma" | "Proof" | "Qed" | "Require" | "From" | "Import" | "Export")
}

fn arg_names(tokens: &[Token]) -> Vec<String> {
    tokens
        .iter()
        .filter_map(|t| match &t.tok {
            Tok::Ident(x) if x != "_" && !is_tactic_word(x) => Some(x.clone()),
            _ => None,
        })
        .collect()
}

fn depth_delta(t: &Tok) -> i32 {
    match t {
        Tok::Sym(s) if matches!(s.as_str(), "(" | "[" | "{") => 1,
        Tok::Sym(s) if matches!(s.as_str(), ")" | "]" | "}") => -1,
        _ => 0,
    }
}

fn split_top_level<'a>(tokens: &'a [Token], sep: &str) -> Vec<&'a [Token]> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        depth += depth_delta(&t.tok);
        if depth == 0 && t.tok.is_sym(sep) {
            out.push(&tokens[start..i]);
            start = i + 1;
        }
    }
    out.push(&tokens[start..]);
    out
}

/// Names bound by `forall` / `exists` binders anywhere in the statement.
/// Handles `forall x y, ...`, `forall x : T, ...` and
/// `forall (x y : T) (z : U), ...`.
fn bound_variables(tokens: &[Token]) -> BTreeSet<String> {
    let mut bound = BTreeSet::new();
    let mut i = 0;
    while i < tokens.len() {
        let is_quantifier = matches!(&tokens[i].tok, Tok::Ident(q) if QUANTIFIERS.contains(&q.as_str()));
        i += 1;
        if !is_quantifier {
            continue;
        }
        let mut in_type = false;
        let mut depth = 0;
        while i < tokens.len() {
            let t = &tokens[i].tok;
            if depth == 0 && t.is_sym(",") {
                break;
            }
            match t {
                Tok::Sym(s) if s == "(" => {
                    depth += 1;
                    in_type = false;
                }
                Tok::Sym(s) if s == ")" => {
                    depth -= 1;
                    in_type = depth > 0 && in_type;
                }
                Tok::Sym(s) if s == ":" => in_type = true,
                Tok::Ident(x) if !in_type && depth <= 1 => {
                    bound.insert(x.clone());
                }
                _ => {}
            }
            i += 1;
        }
    }
    bound
}

fn parse_raw(file: &str, text: &str) -> Result<RawFile, ParseError> {
    let sentences = sentences(text).map_err(|e| ParseError::Syntax {
        file: file.to_string(),
        line: e.line,
        message: e.message,
    })?;
    FileParser {
        file,
        sentences: sentences.into_iter(),
        last_line: 1,
    }
    .parse()
}

/// Parses every source in order. Files are tokenized independently (in
/// parallel); lemma references are resolved afterwards in file order, so a
/// name counts as a lemma reference only after its declaration.
pub fn parse_corpus<N, T>(sources: &[(N, T)]) -> Result<Corpus, ParseError>
where
    N: AsRef<str> + Sync,
    T: AsRef<str> + Sync,
{
    let raw: Vec<RawFile> = sources
        .par_iter()
        .map(|(name, text)| parse_raw(name.as_ref(), text.as_ref()))
        .collect::<Result<_, _>>()?;

    let imports: Vec<String> = raw
        .iter()
        .flat_map(|f| f.imports.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let imported: HashSet<&str> = imports.iter().map(String::as_str).collect();

    let mut declared: HashSet<String> = HashSet::new();
    let mut lemmas = Vec::new();
    for ((file, _), raw_file) in sources.iter().zip(raw) {
        for lemma in raw_file.lemmas {
            let classify = |text: String| {
                let kind = if lemma.bound.contains(&text) {
                    ArgKind::Hypothesis
                } else if declared.contains(&text) || imported.contains(text.as_str()) {
                    ArgKind::LemmaRef
                } else {
                    ArgKind::Term
                };
                Arg { kind, text }
            };
            let steps = lemma
                .steps
                .into_iter()
                .map(|atoms| TacticStep {
                    atoms: atoms
                        .into_iter()
                        .map(|a| Atom {
                            family: a.family,
                            args: a.args.into_iter().map(classify).collect(),
                        })
                        .collect(),
                })
                .collect();
            if !declared.insert(lemma.name.clone()) {
                return Err(ParseError::DuplicateLemma {
                    name: lemma.name,
                    file: file.as_ref().to_string(),
                    line: lemma.line,
                });
            }
            lemmas.push(LemmaScript {
                name: lemma.name,
                statement_tokens: lemma.statement,
                steps,
            });
        }
    }

    Ok(Corpus {
        lemmas,
        source_files: sources.iter().map(|(n, _)| n.as_ref().to_string()).collect(),
        imports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Corpus, ParseError> {
        parse_corpus(&[("t.vp", text)])
    }

    fn atom(family: TacticFamily, args: &[(ArgKind, &str)]) -> Atom {
        Atom {
            family,
            args: args
                .iter()
                .map(|&(kind, text)| Arg {
                    kind,
                    text: text.into(),
                })
                .collect(),
        }
    }

    #[test]
    fn single_lemma() {
        let c = parse("Lemma a : x = x. Proof. by rewrite e. Qed.").unwrap();
        assert_eq!(c.lemmas.len(), 1);
        let l = &c.lemmas[0];
        assert_eq!(l.name, "a");
        assert_eq!(l.statement_tokens, ["x", "=", "x"]);
        assert_eq!(l.steps.len(), 1);
        assert_eq!(
            l.steps[0].atoms,
            [
                atom(TacticFamily::By, &[]),
                atom(TacticFamily::Rewrite, &[(ArgKind::Term, "e")])
            ]
        );
    }

    #[test]
    fn empty_source_is_empty_corpus() {
        let c = parse("").unwrap();
        assert!(c.is_empty());
        assert_eq!(c.source_files, ["t.vp"]);
        assert!(parse("  (* only a comment *)\n").unwrap().is_empty());
    }

    #[test]
    fn malformed_blocks() {
        let e = parse("Lemma a : x = x. Proof. move=> h.").unwrap_err();
        assert!(matches!(&e, ParseError::Syntax { message, .. } if message.contains("Qed")), "{e}");

        let e = parse("Lemma a : x = x.\nmove=> h. Qed.").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 2, .. }), "{e}");

        let e = parse("Lemma a : x = x. Proof.\nLemma b : y. Proof. done. Qed.").unwrap_err();
        assert!(matches!(&e, ParseError::Syntax { line: 2, message, .. } if message.contains("Qed")));

        assert!(parse("Lemma a : (x = x. Proof. done. Qed.").is_err());
        assert!(parse("Lemma a : x = x. Proof. Qed.").is_err());
        assert!(parse("Lemma a : . Proof. done. Qed.").is_err());
        assert!(parse("Definition f := 1.").is_err());
        assert!(parse("Lemma a x = x. Proof. done. Qed.").is_err());
    }

    #[test]
    fn duplicate_lemmas_across_files() {
        let e = parse_corpus(&[
            ("a.vp", "Lemma a : x. Proof. done. Qed."),
            ("b.vp", "\n\nLemma a : y. Proof. done. Qed."),
        ])
        .unwrap_err();
        assert_eq!(
            e,
            ParseError::DuplicateLemma {
                name: "a".into(),
                file: "b.vp".into(),
                line: 3
            }
        );
    }

    #[test]
    fn argument_classification() {
        let src = "Require Import mulmxE.
            Lemma base : forall (n : nat) (M : 'M_n), f M = M.
            Proof. move=> n M; rewrite mulmxE foo. Qed.
            Lemma next : forall x y, g x = y.
            Proof. apply: base. rewrite next x. Qed.";
        let c = parse(src).unwrap();
        let base = &c.lemmas[0];
        assert_eq!(
            base.steps[0].atoms,
            [
                atom(TacticFamily::Move, &[(ArgKind::Hypothesis, "n"), (ArgKind::Hypothesis, "M")]),
                atom(TacticFamily::Rewrite, &[(ArgKind::LemmaRef, "mulmxE"), (ArgKind::Term, "foo")]),
            ]
        );
        let next = &c.lemmas[1];
        assert_eq!(next.steps[0].atoms, [atom(TacticFamily::Apply, &[(ArgKind::LemmaRef, "base")])]);
        // a lemma does not refer to itself
        assert_eq!(
            next.steps[1].atoms,
            [atom(TacticFamily::Rewrite, &[(ArgKind::Term, "next"), (ArgKind::Hypothesis, "x")])]
        );
        assert_eq!(c.imports, ["mulmxE"]);
    }

    #[test]
    fn unknown_heads_are_rest() {
        let c = parse("Lemma a : x. Proof. have h : y by exact z. congr (f _). by []. Qed.").unwrap();
        let steps = &c.lemmas[0].steps;
        // only a leading `by` is split off
        assert_eq!(
            steps[0].atoms,
            [atom(TacticFamily::Rest, &[(ArgKind::Term, "h"), (ArgKind::Term, "y"), (ArgKind::Term, "z")])]
        );
        assert_eq!(steps[1].atoms, [atom(TacticFamily::Rest, &[(ArgKind::Term, "f")])]);
        assert_eq!(steps[2].atoms, [atom(TacticFamily::By, &[])]);
    }

    #[test]
    fn binder_forms() {
        let s = sentences("forall m n : nat, exists (k : nat) (p q : T), m = n.").unwrap();
        let b = bound_variables(&s[0].tokens);
        assert_eq!(b.into_iter().collect::<Vec<_>>(), ["k", "m", "n", "p", "q"]);
    }

    #[test]
    fn grammar_is_stable_and_names_the_lemma_rule() {
        assert!(grammar_ebnf().contains("lemma ::= 'Lemma' ident ':' statement '.'"));
        assert_eq!(grammar_ebnf().as_bytes(), grammar_ebnf().as_bytes());
    }

    #[test]
    fn json_shape() {
        let c = parse("Lemma a : x = x. Proof. by rewrite e. Qed.").unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["lemmas"][0]["statement"], serde_json::json!(["x", "=", "x"]));
        assert_eq!(
            v["lemmas"][0]["steps"][0][1],
            serde_json::json!({"family": "rewrite", "args": [{"kind": "term", "text": "e"}]})
        );
        let back: Corpus = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
