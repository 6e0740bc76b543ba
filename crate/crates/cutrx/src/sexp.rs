//! Minimal s-expression reader shared by the formula, calculus, proof and
//! report grammars. Atoms are any run of characters other than parentheses
//! and whitespace; `;` starts a comment running to end of line.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::Atom(_) => None,
            Sexp::List(items) => Some(items),
        }
    }

    /// The items of a list whose head atom is `head`, if this is one.
    pub fn tagged(&self, head: &str) -> Option<&[Sexp]> {
        let items = self.list()?;
        match items.first() {
            Some(Sexp::Atom(a)) if a == head => Some(&items[1..]),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => write!(f, "{a}"),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SexpError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, SexpError> {
    Err(SexpError {
        offset,
        message: message.into(),
    })
}

/// Parse every s-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_trivia(bytes, &mut pos);
        if pos >= bytes.len() {
            return Ok(out);
        }
        out.push(parse_one(bytes, &mut pos)?);
    }
}

/// Parse exactly one s-expression, rejecting trailing content.
pub fn parse_single(text: &str) -> Result<Sexp, SexpError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => err(0, "empty input"),
        _ => err(text.len(), "trailing content after expression"),
    }
}

fn skip_trivia(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b';' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => return,
        }
    }
}

fn parse_one(bytes: &[u8], pos: &mut usize) -> Result<Sexp, SexpError> {
    skip_trivia(bytes, pos);
    if *pos >= bytes.len() {
        return err(*pos, "unexpected end of input");
    }
    match bytes[*pos] {
        b'(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_trivia(bytes, pos);
                if *pos >= bytes.len() {
                    return err(*pos, "unclosed parenthesis");
                }
                if bytes[*pos] == b')' {
                    *pos += 1;
                    return Ok(Sexp::List(items));
                }
                items.push(parse_one(bytes, pos)?);
            }
        }
        b')' => err(*pos, "unmatched `)`"),
        _ => {
            let start = *pos;
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && bytes[*pos] != b'('
                && bytes[*pos] != b')'
                && bytes[*pos] != b';'
            {
                *pos += 1;
            }
            let atom = std::str::from_utf8(&bytes[start..*pos]).map_err(|_| SexpError {
                offset: start,
                message: "invalid utf-8".into(),
            })?;
            Ok(Sexp::Atom(atom.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "(calculus LK (connectives (and 2)) x)";
        let parsed = parse_single(text).unwrap();
        assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn comments_and_whitespace() {
        let parsed = parse_all("; header\n(a b) ; tail\n c").unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].atom(), Some("c"));
    }

    #[test]
    fn unclosed_is_error() {
        assert!(parse_single("(a (b)").is_err());
        assert!(parse_single(")").is_err());
    }
}
