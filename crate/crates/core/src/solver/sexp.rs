//! Minimal s-expression reader for solver responses.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(a) => Some(a),
            SExpr::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(l) => Some(l),
            SExpr::Atom(_) => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a) => f.write_str(a),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Result of trying to read one s-expression from a prefix of the input.
#[derive(Debug, PartialEq, Eq)]
pub enum Read {
    /// A complete expression and the number of bytes consumed.
    Complete(SExpr, usize),
    Incomplete,
    Malformed(String),
}

/// Reads the first complete s-expression from `text`. Quoted symbols keep
/// their bars; string literals keep their quotes.
pub fn read_sexpr(text: &str) -> Read {
    let bytes = text.as_bytes();
    let mut stack: Vec<Vec<SExpr>> = vec![];
    let mut i = 0;
    loop {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b';') {
            if bytes[i] == b';' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        if i >= bytes.len() {
            return Read::Incomplete;
        }
        let item = match bytes[i] {
            b'(' => {
                stack.push(vec![]);
                i += 1;
                continue;
            }
            b')' => {
                let Some(items) = stack.pop() else {
                    return Read::Malformed("unbalanced ')'".into());
                };
                i += 1;
                SExpr::List(items)
            }
            b'|' => match text[i + 1..].find('|') {
                Some(end) => {
                    let a = text[i..i + end + 2].to_string();
                    i += end + 2;
                    SExpr::Atom(a)
                }
                None => return Read::Incomplete,
            },
            b'"' => {
                let mut j = i + 1;
                loop {
                    if j >= bytes.len() {
                        return Read::Incomplete;
                    }
                    if bytes[j] == b'"' {
                        if bytes.get(j + 1) == Some(&b'"') {
                            j += 2;
                            continue;
                        }
                        break;
                    }
                    j += 1;
                }
                let a = text[i..=j].to_string();
                i = j + 1;
                SExpr::Atom(a)
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'(' | b')' | b';') {
                    i += 1;
                }
                if i >= bytes.len() && stack.is_empty() {
                    return Read::Incomplete;
                }
                SExpr::Atom(text[start..i].to_string())
            }
        };
        match stack.last_mut() {
            Some(top) => top.push(item),
            None => return Read::Complete(item, i),
        }
    }
}

/// Parses a complete text holding exactly one s-expression.
pub fn parse_sexpr(text: &str) -> Result<SExpr, String> {
    let padded = format!("{text}\n");
    match read_sexpr(&padded) {
        Read::Complete(e, used) if padded[used..].trim().is_empty() => Ok(e),
        Read::Complete(..) => Err("trailing input".into()),
        Read::Incomplete => Err("incomplete s-expression".into()),
        Read::Malformed(m) => Err(m),
    }
}
