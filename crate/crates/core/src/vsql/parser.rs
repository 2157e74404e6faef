use super::ast::{Expr, FromClause, OperatorInvocation, Predicate, SelectItem, VSqlQuery};
use super::VsqlError;

const RESERVED: &[&str] = &["select", "distinct", "from", "where", "and", "as"];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(word))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

pub(super) fn parse(text: &str) -> Result<VSqlQuery, VsqlError> {
    let mut p = Parser { src: text, pos: 0 };
    let q = p.query()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected {:?} after query", p.rest_preview())));
    }
    Ok(q)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn rest_preview(&self) -> String {
        self.rest().chars().take(16).collect()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, message: String) -> VsqlError {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        VsqlError::Syntax {
            line,
            column,
            message,
        }
    }

    fn skip_ws(&mut self) {
        loop {
            let r = self.rest();
            let t = r.trim_start();
            self.pos += r.len() - t.len();
            if t.starts_with("--") {
                let end = t.find('\n').unwrap_or(t.len());
                self.pos += end;
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), VsqlError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{s}', found {:?}", self.rest_preview())))
        }
    }

    fn peek_word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let r = self.rest();
        let mut chars = r.char_indices();
        match chars.next() {
            Some((_, c)) if is_ident_start(c) => {}
            _ => return None,
        }
        let end = chars
            .find(|&(_, c)| !is_ident_char(c))
            .map_or(r.len(), |(i, _)| i);
        Some(&r[..end])
    }

    fn is_keyword(&mut self, kw: &str) -> bool {
        self.peek_word().is_some_and(|w| w.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), VsqlError> {
        if self.keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{kw}', found {:?}", self.rest_preview())))
        }
    }

    fn ident(&mut self) -> Option<String> {
        let w = self.peek_word()?;
        self.pos += w.len();
        Some(w.to_string())
    }

    fn query(&mut self) -> Result<VSqlQuery, VsqlError> {
        self.expect_keyword("select")?;
        let distinct = self.keyword("distinct");
        let mut select = vec![self.select_item()?];
        while self.eat(",") {
            select.push(self.select_item()?);
        }
        self.expect_keyword("from")?;
        let from = self.from_clause()?;
        let mut filter = Vec::new();
        if self.keyword("where") {
            loop {
                let left = self.expr()?;
                self.expect("=")?;
                let right = self.expr()?;
                filter.push(Predicate { left, right });
                if !self.keyword("and") {
                    break;
                }
            }
        }
        Ok(VSqlQuery {
            distinct,
            select,
            from,
            filter,
        })
    }

    fn select_item(&mut self) -> Result<SelectItem, VsqlError> {
        if self.eat("*") {
            return Ok(SelectItem::Wildcard);
        }
        let expr = self.expr()?;
        let alias = if self.keyword("as") || self.peek_word().is_some_and(|w| !is_reserved(w)) {
            Some(self.alias()?)
        } else {
            None
        };
        Ok(SelectItem::Expr { expr, alias })
    }

    fn alias(&mut self) -> Result<String, VsqlError> {
        self.skip_ws();
        if self.peek() == Some('"') {
            return self.quoted('"');
        }
        match self.peek_word() {
            Some(w) if !is_reserved(w) => Ok(self.ident().expect("peeked")),
            _ => Err(self.error(format!("expected alias, found {:?}", self.rest_preview()))),
        }
    }

    fn quoted(&mut self, q: char) -> Result<String, VsqlError> {
        self.skip_ws();
        let start = self.pos;
        if self.bump() != Some(q) {
            self.pos = start;
            return Err(self.error(format!("expected {q}")));
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                Some(c) if c == q => {
                    if self.peek() == Some(q) {
                        self.bump();
                        s.push(q);
                    } else {
                        return Ok(s);
                    }
                }
                Some(c) => s.push(c),
                None => {
                    self.pos = start;
                    return Err(self.error("unterminated quoted text".into()));
                }
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, VsqlError> {
        let mut parts = vec![self.primary()?];
        while self.eat("||") {
            parts.push(self.primary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Expr::Concat(parts)
        })
    }

    fn primary(&mut self) -> Result<Expr, VsqlError> {
        self.skip_ws();
        match self.peek() {
            Some('\'') => Ok(Expr::Str(self.quoted('\'')?)),
            Some('"') => Ok(Expr::Quoted(self.quoted('"')?)),
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let n = self.number()?;
                Ok(Expr::Str(n))
            }
            Some(c) if is_ident_start(c) => {
                let w = self.peek_word().expect("identifier start");
                if is_reserved(w) {
                    return Err(self.error(format!("unexpected keyword '{w}'")));
                }
                Ok(Expr::Column(self.ident().expect("peeked")))
            }
            _ => Err(self.error(format!(
                "expected column, string or number, found {:?}",
                self.rest_preview()
            ))),
        }
    }

    fn number(&mut self) -> Result<String, VsqlError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.bump();
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.bump();
        }
        let n = &self.src[start..self.pos];
        if n.is_empty() || n == "-" {
            self.pos = start;
            return Err(self.error("expected number".into()));
        }
        Ok(n.to_string())
    }

    fn from_clause(&mut self) -> Result<FromClause, VsqlError> {
        self.skip_ws();
        if self.eat("(") {
            if self.is_keyword("select") {
                let q = self.query()?;
                self.expect(")")?;
                self.table_alias();
                return Ok(FromClause::Subquery(Box::new(q)));
            }
            let inv = self.madis_invocation()?;
            self.table_alias();
            return Ok(FromClause::Operator(inv));
        }
        let Some(name) = self.ident() else {
            return Err(self.error(format!(
                "expected '(' or operator call, found {:?}",
                self.rest_preview()
            )));
        };
        if !self.eat("(") {
            return Err(self.error(format!("expected '(' after operator name {name}")));
        }
        let inv = self.function_invocation(&name)?;
        self.table_alias();
        Ok(FromClause::Operator(inv))
    }

    fn table_alias(&mut self) {
        if self.keyword("as") || self.peek_word().is_some_and(|w| !is_reserved(w)) {
            self.ident();
        }
    }

    /// `opname key:value ... )` with the opening parenthesis already consumed.
    fn madis_invocation(&mut self) -> Result<OperatorInvocation, VsqlError> {
        let Some(name) = self.ident() else {
            return Err(self.error("expected operator name".into()));
        };
        let mut args = Vec::new();
        let mut positional = 0;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                None => return Err(self.error("unterminated operator invocation".into())),
                _ => {}
            }
            let key = self.arg_key();
            let value = self.madis_value()?;
            let key = key.unwrap_or_else(|| {
                positional += 1;
                format!("arg{positional}")
            });
            args.push((key, value));
        }
        self.finish_invocation(&name, args)
    }

    /// `key:` when present (a value starting with `//` belongs to a URL).
    fn arg_key(&mut self) -> Option<String> {
        let start = self.pos;
        let w = self.peek_word()?;
        let after = &self.rest()[w.len()..];
        if after.starts_with(':') && !after.starts_with("://") {
            self.pos += w.len() + 1;
            Some(w.to_string())
        } else {
            self.pos = start.max(self.pos);
            None
        }
    }

    fn madis_value(&mut self) -> Result<String, VsqlError> {
        match self.peek() {
            Some(q @ ('\'' | '"')) => self.quoted(q),
            _ => {
                let start = self.pos;
                let mut depth = 0usize;
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || (c == ')' && depth == 0) {
                        break;
                    }
                    if c == '(' {
                        depth += 1;
                    } else if c == ')' {
                        depth -= 1;
                    }
                    self.bump();
                }
                if self.pos == start {
                    return Err(self.error("expected argument value".into()));
                }
                Ok(self.src[start..self.pos].to_string())
            }
        }
    }

    /// `Name('x', 3, key:value)` with the opening parenthesis consumed.
    fn function_invocation(&mut self, name: &str) -> Result<OperatorInvocation, VsqlError> {
        let mut args = Vec::new();
        let mut positional = 0;
        if !self.eat(")") {
            loop {
                self.skip_ws();
                let key = self.arg_key();
                self.skip_ws();
                let value = match self.peek() {
                    Some(q @ ('\'' | '"')) => self.quoted(q)?,
                    _ => {
                        let start = self.pos;
                        while self
                            .peek()
                            .is_some_and(|c| !c.is_whitespace() && c != ',' && c != ')')
                        {
                            self.bump();
                        }
                        if self.pos == start {
                            return Err(self.error("expected argument value".into()));
                        }
                        self.src[start..self.pos].to_string()
                    }
                };
                let key = key.unwrap_or_else(|| {
                    positional += 1;
                    format!("arg{positional}")
                });
                args.push((key, value));
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.finish_invocation(name, args)
    }

    fn finish_invocation(
        &self,
        name: &str,
        raw: Vec<(String, String)>,
    ) -> Result<OperatorInvocation, VsqlError> {
        let mut args: Vec<(String, String)> = Vec::new();
        let mut f = None;
        for (k, v) in raw {
            if k == "f" {
                if f.is_some() {
                    return Err(self.error("duplicate argument 'f'".into()));
                }
                f = Some(v.parse::<i64>().map_err(|_| {
                    self.error(format!("cache window f must be an integer, found {v:?}"))
                })?);
                continue;
            }
            if args.iter().any(|(k2, _)| k2 == &k) {
                return Err(self.error(format!("duplicate argument '{k}'")));
            }
            args.push((k, v));
        }
        Ok(OperatorInvocation::new(name, args, f))
    }
}
