use super::SparqlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Iri(String),
    /// prefix label (possibly empty) and local part (possibly empty)
    PName(String, String),
    Var(String),
    Str(String),
    LangTag(String),
    Caret2,
    Word(String),
    LBrace,
    RBrace,
    Dot,
    Semi,
    Comma,
    Star,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Iri(i) => format!("IRI <{i}>"),
            Tok::PName(p, l) => format!("prefixed name {p}:{l}"),
            Tok::Var(v) => format!("variable ?{v}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LangTag(t) => format!("language tag @{t}"),
            Tok::Caret2 => "'^^'".into(),
            Tok::Word(w) => format!("'{w}'"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Star => "'*'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, SparqlError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while let Some(c) = cur.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let err = |msg: String| SparqlError::syntax(line, column, msg, vec![]);
        let Some(c) = cur.peek() else {
            out.push(Spanned {
                tok: Tok::Eof,
                line,
                column,
            });
            return Ok(out);
        };
        let tok = match c {
            '{' => {
                cur.bump();
                Tok::LBrace
            }
            '}' => {
                cur.bump();
                Tok::RBrace
            }
            '.' => {
                cur.bump();
                Tok::Dot
            }
            ';' => {
                cur.bump();
                Tok::Semi
            }
            ',' => {
                cur.bump();
                Tok::Comma
            }
            '*' => {
                cur.bump();
                Tok::Star
            }
            '^' => {
                cur.bump();
                if cur.peek() != Some('^') {
                    return Err(err("expected '^^'".into()));
                }
                cur.bump();
                Tok::Caret2
            }
            '<' => {
                cur.bump();
                let mut iri = String::new();
                loop {
                    match cur.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                            return Err(err(format!("invalid character {c:?} in IRI")));
                        }
                        Some(c) => iri.push(c),
                        None => return Err(err("unterminated IRI".into())),
                    }
                }
                if iri.is_empty() {
                    return Err(err("empty IRI".into()));
                }
                Tok::Iri(iri)
            }
            '?' | '$' => {
                cur.bump();
                let mut name = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(err("empty variable name".into()));
                }
                Tok::Var(name)
            }
            '"' | '\'' => {
                let quote = c;
                cur.bump();
                let mut s = String::new();
                loop {
                    match cur.bump() {
                        Some(c) if c == quote => break,
                        Some('\\') => match cur.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('r') => s.push('\r'),
                            Some('"') => s.push('"'),
                            Some('\'') => s.push('\''),
                            Some('\\') => s.push('\\'),
                            Some(other) => {
                                return Err(err(format!("unknown escape '\\{other}'")));
                            }
                            None => return Err(err("unterminated string".into())),
                        },
                        Some('\n') => return Err(err("newline in string literal".into())),
                        Some(c) => s.push(c),
                        None => return Err(err("unterminated string".into())),
                    }
                }
                Tok::Str(s)
            }
            '@' => {
                cur.bump();
                let mut tag = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        tag.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if tag.is_empty() {
                    return Err(err("empty language tag".into()));
                }
                Tok::LangTag(tag)
            }
            c if c.is_alphabetic() || c == '_' || c == ':' => {
                let mut word = String::new();
                while let Some(c) = cur.peek() {
                    if is_name_char(c) {
                        word.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                if cur.peek() == Some(':') {
                    cur.bump();
                    let mut local = String::new();
                    while let Some(c) = cur.peek() {
                        if is_name_char(c) {
                            local.push(c);
                            cur.bump();
                        } else {
                            break;
                        }
                    }
                    // a trailing '.' ends the triple, it is not part of the local name
                    let mut trailing = 0;
                    while local.ends_with('.') {
                        local.pop();
                        trailing += 1;
                    }
                    if word.ends_with('.') {
                        return Err(err(format!("invalid prefix label {word:?}")));
                    }
                    out.push(Spanned {
                        tok: Tok::PName(word, local),
                        line,
                        column,
                    });
                    for _ in 0..trailing {
                        out.push(Spanned {
                            tok: Tok::Dot,
                            line: cur.line,
                            column: cur.column,
                        });
                    }
                    continue;
                }
                let mut trailing = 0;
                while word.ends_with('.') {
                    word.pop();
                    trailing += 1;
                }
                out.push(Spanned {
                    tok: Tok::Word(word),
                    line,
                    column,
                });
                for _ in 0..trailing {
                    out.push(Spanned {
                        tok: Tok::Dot,
                        line: cur.line,
                        column: cur.column,
                    });
                }
                continue;
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        };
        out.push(Spanned { tok, line, column });
    }
}
