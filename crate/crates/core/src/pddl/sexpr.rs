//! Tokenizer and s-expression reader for PDDL text.

use std::fmt;

use super::PddlError;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Symbol(String, Span),
    List(Vec<SExpr>, Span),
}

impl SExpr {
    pub fn span(&self) -> Span {
        match self {
            SExpr::Symbol(_, s) | SExpr::List(_, s) => *s,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// Head symbol of a list form, e.g. `and` for `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }

    /// Short rendering used in error messages.
    pub fn describe(&self) -> String {
        match self {
            SExpr::Symbol(s, _) => format!("`{s}`"),
            SExpr::List(items, _) => match items.first().and_then(SExpr::as_symbol) {
                Some(h) => format!("`({h} ...)`"),
                None => "`(...)`".to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Symbol(String),
}

fn tokenize(src: &str) -> Vec<(Token, Span)> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = src.chars().peekable();
    let mut current: Option<(String, Span)> = None;

    let flush = |current: &mut Option<(String, Span)>, out: &mut Vec<(Token, Span)>| {
        if let Some((sym, span)) = current.take() {
            out.push((Token::Symbol(sym), span));
        }
    };

    while let Some(c) = chars.next() {
        let here = Span { line, col };
        match c {
            '(' => {
                flush(&mut current, &mut out);
                out.push((Token::Open, here));
            }
            ')' => {
                flush(&mut current, &mut out);
                out.push((Token::Close, here));
            }
            ';' => {
                flush(&mut current, &mut out);
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_whitespace() => flush(&mut current, &mut out),
            c => match &mut current {
                Some((s, _)) => s.push(c),
                None => current = Some((c.to_string(), here)),
            },
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    flush(&mut current, &mut out);
    out
}

/// Reads exactly one top-level form from `src`.
pub fn read(src: &str) -> Result<SExpr, PddlError> {
    let tokens = tokenize(src);
    // Stack of open lists: (items, span of the opening paren).
    let mut stack: Vec<(Vec<SExpr>, Span)> = Vec::new();
    let mut result: Option<SExpr> = None;

    for (tok, span) in tokens {
        if result.is_some() {
            return Err(PddlError::syntax(span, "unexpected content after the top-level form"));
        }
        match tok {
            Token::Open => stack.push((Vec::new(), span)),
            Token::Close => {
                let (items, open_span) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(span, "unmatched `)`"))?;
                let list = SExpr::List(items, open_span);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            Token::Symbol(s) => match stack.last_mut() {
                Some((parent, _)) => parent.push(SExpr::Symbol(s, span)),
                None => return Err(PddlError::syntax(span, format!("expected `(`, found `{s}`"))),
            },
        }
    }

    if let Some((items, open_span)) = stack.pop() {
        let name = SExpr::List(items, open_span).describe();
        return Err(PddlError::syntax(
            open_span,
            format!("unclosed form {name} (reached end of input)"),
        ));
    }
    result.ok_or_else(|| PddlError::syntax(Span { line: 1, col: 1 }, "empty input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_with_comments() {
        let e = read("(a ; comment ( ignored\n (b c) d)").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[1].head(), Some("b"));
        assert_eq!(items[2].span(), Span { line: 2, col: 8 });
    }

    #[test]
    fn unclosed_form_is_named() {
        let err = read("(define (domain d)\n  (:types a)").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unclosed form `(define ...)`"), "{msg}");
        assert!(msg.contains("1:1"), "{msg}");
    }

    #[test]
    fn stray_close_paren() {
        assert!(read("(a))").is_err());
        assert!(read(")").is_err());
        assert!(read("").is_err());
    }
}
