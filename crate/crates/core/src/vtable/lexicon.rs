//! Word lists for the sentiment line protocol.
//!
//! ```text
//! # comment
//! +
//! love
//! great
//! -
//! boring
//! ```

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: word {word:?} before a '+' or '-' section marker")]
    NoSection { line: usize, word: String },
    #[error("line {line}: {word:?} is listed as both positive and negative")]
    Overlap { line: usize, word: String },
    #[error("line {line}: {word:?} is not a single alphanumeric token")]
    BadWord { line: usize, word: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        let mut positive = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let word = raw.trim();
            match word {
                "" => {}
                w if w.starts_with('#') => {}
                "+" => positive = Some(true),
                "-" => positive = Some(false),
                w => {
                    let Some(pos) = positive else {
                        return Err(LexiconError::NoSection {
                            line,
                            word: w.into(),
                        });
                    };
                    let mut t = tokens(w);
                    let (Some(tok), None) = (t.next(), t.next()) else {
                        return Err(LexiconError::BadWord {
                            line,
                            word: w.into(),
                        });
                    };
                    let (mine, other) = if pos {
                        (&mut lex.positive, &lex.negative)
                    } else {
                        (&mut lex.negative, &lex.positive)
                    };
                    if other.contains(&tok) {
                        return Err(LexiconError::Overlap { line, word: tok });
                    }
                    mine.insert(tok);
                }
            }
        }
        Ok(lex)
    }

    pub fn positive(&self) -> &HashSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &HashSet<String> {
        &self.negative
    }

    /// Positive minus negative token hits.
    pub fn score(&self, text: &str) -> i64 {
        tokens(text)
            .map(|t| i64::from(self.positive.contains(&t)) - i64::from(self.negative.contains(&t)))
            .sum()
    }

    /// `"positive"` when the score is above zero, `"negative"` otherwise.
    pub fn classify(&self, text: &str) -> &'static str {
        if self.score(text) > 0 {
            "positive"
        } else {
            "negative"
        }
    }
}

/// Request framing: one line per text, with CR and LF written as `\r`, `\n`.
pub fn escape_line(text: &str) -> String {
    text.replace('\\', "\\\\")
        .replace('\r', "\\r")
        .replace('\n', "\\n")
}

pub fn unescape_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_errors() {
        let lex = Lexicon::parse("# c\n+\nLove\ngreat\n-\nboring\n").unwrap();
        assert!(lex.positive().contains("love"));
        assert_eq!(lex.classify("love this great talk"), "positive");
        assert_eq!(lex.classify(""), "negative");
        assert_eq!(lex.classify("great but boring"), "negative");
        assert!(matches!(
            Lexicon::parse("love\n"),
            Err(LexiconError::NoSection { line: 1, .. })
        ));
        assert!(matches!(
            Lexicon::parse("+\nlove\n-\nlove\n"),
            Err(LexiconError::Overlap { line: 4, .. })
        ));
        assert!(matches!(
            Lexicon::parse("+\ntwo words\n"),
            Err(LexiconError::BadWord { .. })
        ));
    }

    #[test]
    fn escaping_round_trips() {
        for s in ["a\nb", "back\\slash\\n", "\r\n", "", "tail\\"] {
            let e = escape_line(s);
            assert!(!e.contains('\n') && !e.contains('\r'));
            assert_eq!(unescape_line(&e), s);
        }
    }
}
