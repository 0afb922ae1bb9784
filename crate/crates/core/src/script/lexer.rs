//! Tokenizer and sentence splitter.

use std::iter::Peekable;
use std::str::Chars;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    /// Brackets, `,`, `;`, and runs of operator characters.
    Sym(String),
}

impl Tok {
    pub(crate) fn text(&self) -> &str {
        match self {
            Tok::Ident(s) | Tok::Number(s) | Tok::Sym(s) => s,
        }
    }

    pub(crate) fn is_sym(&self, s: &str) -> bool {
        matches!(self, Tok::Sym(x) if x == s)
    }

    pub(crate) fn is_ident(&self, s: &str) -> bool {
        matches!(self, Tok::Ident(x) if x == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

/// Tokens of one sentence, without the terminating `.`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Sentence {
    pub tokens: Vec<Token>,
    pub line: usize,
}

impl Sentence {
    /// Whether the sentence is exactly the single word `w`.
    pub(crate) fn is_word(&self, w: &str) -> bool {
        self.tokens.len() == 1 && self.tokens[0].tok.is_ident(w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub line: usize,
    pub message: String,
}

const OP_CHARS: &str = "!#$%&*+-/<=>?@^|~:";

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '\'' || c == '\\'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

struct Lexer<'a> {
    chars: Peekable<Chars<'a>>,
    line: usize,
}

impl Lexer<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn skip_comment(&mut self) -> Result<(), LexError> {
        let start = self.line;
        // opening "(*" already consumed
        let mut depth = 1;
        while depth > 0 {
            match self.bump() {
                None => {
                    return Err(LexError {
                        line: start,
                        message: "unterminated comment".into(),
                    })
                }
                Some('(') if self.chars.peek() == Some(&'*') => {
                    self.bump();
                    depth += 1;
                }
                Some('*') if self.chars.peek() == Some(&')') => {
                    self.bump();
                    depth -= 1;
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn take_while(&mut self, first: char, pred: impl Fn(char, Option<char>) -> bool) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if !pred(c, self.peek2()) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }
}

enum Lexeme {
    Tok(Tok),
    Dot,
}

/// Splits `text` into sentences. A `.` ends a sentence when it is followed
/// by whitespace or the end of input and no bracket is open.
pub(crate) fn sentences(text: &str) -> Result<Vec<Sentence>, LexError> {
    let mut lx = Lexer {
        chars: text.chars().peekable(),
        line: 1,
    };
    let mut out = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut open: Vec<(char, usize)> = Vec::new();

    loop {
        let Some(&c) = lx.chars.peek() else { break };
        if c.is_whitespace() {
            lx.bump();
            continue;
        }
        let line = lx.line;
        lx.bump();
        let lexeme = match c {
            '(' if lx.chars.peek() == Some(&'*') => {
                lx.bump();
                lx.skip_comment()?;
                continue;
            }
            '.' if lx.chars.peek().is_none_or(|c| c.is_whitespace()) => Lexeme::Dot,
            '(' | '[' | '{' => {
                open.push((c, line));
                Lexeme::Tok(Tok::Sym(c.to_string()))
            }
            ')' | ']' | '}' => {
                let want = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                match open.pop() {
                    Some((o, _)) if o == want => {}
                    _ => {
                        return Err(LexError {
                            line,
                            message: format!("unbalanced `{c}`"),
                        })
                    }
                }
                Lexeme::Tok(Tok::Sym(c.to_string()))
            }
            ',' | ';' => Lexeme::Tok(Tok::Sym(c.to_string())),
            c if c.is_ascii_digit() => {
                Lexeme::Tok(Tok::Number(lx.take_while(c, |c, _| c.is_ascii_digit())))
            }
            c if is_ident_start(c) => Lexeme::Tok(Tok::Ident(lx.take_while(c, |c, next| {
                is_ident_char(c) || (c == '.' && next.is_some_and(is_ident_char))
            }))),
            c if OP_CHARS.contains(c) || c == '.' => {
                Lexeme::Tok(Tok::Sym(lx.take_while(c, |c, _| OP_CHARS.contains(c))))
            }
            other => {
                return Err(LexError {
                    line,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        match lexeme {
            Lexeme::Tok(tok) => current.push(Token { tok, line }),
            Lexeme::Dot if !open.is_empty() => {
                let (b, l) = open[open.len() - 1];
                return Err(LexError {
                    line: l,
                    message: format!("unbalanced `{b}`: sentence ends before it is closed"),
                });
            }
            Lexeme::Dot => {
                if current.is_empty() {
                    return Err(LexError {
                        line,
                        message: "empty sentence".into(),
                    });
                }
                let first = current[0].line;
                out.push(Sentence {
                    tokens: std::mem::take(&mut current),
                    line: first,
                });
            }
        }
    }
    if let Some(&(b, l)) = open.last() {
        return Err(LexError {
            line: l,
            message: format!("unbalanced `{b}`"),
        });
    }
    if let Some(t) = current.first() {
        return Err(LexError {
            line: t.line,
            message: "unterminated sentence (missing `.`)".into(),
        });
    }
    Ok(out)
}
