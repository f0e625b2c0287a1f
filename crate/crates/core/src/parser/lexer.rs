//! Tokenizer. Longest match wins; reserved words take precedence over
//! identifiers of the same length.

use std::fmt;

use num_bigint::BigInt;

use super::ParseError;
use crate::ast::Loc;

macro_rules! keywords {
    ($($variant:ident => $text:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum Keyword { $($variant),* }

        impl Keyword {
            pub const ALL: &'static [Keyword] = &[$(Keyword::$variant),*];

            pub fn text(self) -> &'static str {
                match self { $(Keyword::$variant => $text),* }
            }

            pub fn from_word(w: &str) -> Option<Keyword> {
                match w { $($text => Some(Keyword::$variant),)* _ => None }
            }
        }
    };
}

keywords! {
    And => "and", Assertion => "assertion", Automaton => "automaton", Bool => "bool",
    Constants => "constants", Default => "default", Definition => "definition",
    Div => "div", Edge => "edge", Enum => "enum", False => "false", Initial => "initial",
    Input => "input", Int => "int", Invariant => "invariant", Ite => "ite", Let => "let",
    Local => "local", Location => "location", Match => "match", Mod => "mod",
    Node => "node", Nodes => "nodes", Not => "not", Or => "or", Project => "project",
    Real => "real", Returns => "returns", Sint => "sint", State => "state", Tel => "tel",
    Transition => "transition", True => "true", Typedef => "typedef", Uint => "uint",
    Use => "use", Xor => "xor",
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sym {
    Semi,
    Equals,
    LBrace,
    RBrace,
    Comma,
    Caret,
    LParen,
    Hash,
    RParen,
    LBracket,
    RBracket,
    Minus,
    Slash,
    Colon,
    Dot,
    Underscore,
    Arrow,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Star,
}

impl Sym {
    pub const ALL: &'static [Sym] = &[
        Sym::Semi,
        Sym::Equals,
        Sym::LBrace,
        Sym::RBrace,
        Sym::Comma,
        Sym::Caret,
        Sym::LParen,
        Sym::Hash,
        Sym::RParen,
        Sym::LBracket,
        Sym::RBracket,
        Sym::Minus,
        Sym::Slash,
        Sym::Colon,
        Sym::Dot,
        Sym::Underscore,
        Sym::Arrow,
        Sym::Lt,
        Sym::Gt,
        Sym::Le,
        Sym::Ge,
        Sym::Plus,
        Sym::Star,
    ];

    pub fn text(self) -> &'static str {
        match self {
            Sym::Semi => ";",
            Sym::Equals => "=",
            Sym::LBrace => "{",
            Sym::RBrace => "}",
            Sym::Comma => ",",
            Sym::Caret => "^",
            Sym::LParen => "(",
            Sym::Hash => "#",
            Sym::RParen => ")",
            Sym::LBracket => "[",
            Sym::RBracket => "]",
            Sym::Minus => "-",
            Sym::Slash => "/",
            Sym::Colon => ":",
            Sym::Dot => ".",
            Sym::Underscore => "_",
            Sym::Arrow => "=>",
            Sym::Lt => "<",
            Sym::Gt => ">",
            Sym::Le => "<=",
            Sym::Ge => ">=",
            Sym::Plus => "+",
            Sym::Star => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Sym(Sym),
    Ident(String),
    /// `x'`; the payload excludes the apostrophe.
    StateId(String),
    Integer(BigInt),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "'{}'", k.text()),
            TokenKind::Sym(s) => write!(f, "'{}'", s.text()),
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::StateId(s) => write!(f, "state identifier '{s}''"),
            TokenKind::Integer(n) => write!(f, "integer {n}"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: Loc,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let loc = Loc::new(line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            let mut end = i + 1;
            while end < chars.len() && is_ident_continue(chars[end]) {
                end += 1;
            }
            let word: String = chars[start..end].iter().collect();
            let kind = if chars.get(end) == Some(&'\'') {
                end += 1;
                TokenKind::StateId(word)
            } else if word == "_" {
                TokenKind::Sym(Sym::Underscore)
            } else if let Some(k) = Keyword::from_word(&word) {
                TokenKind::Keyword(k)
            } else {
                TokenKind::Ident(word)
            };
            advance(&mut i, &mut line, &mut col, end - start);
            toks.push(Token { kind, loc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut end = i;
            while end < chars.len() && chars[end].is_ascii_digit() {
                end += 1;
            }
            let digits: String = chars[start..end].iter().collect();
            let n: BigInt = digits.parse().expect("digit run parses");
            advance(&mut i, &mut line, &mut col, end - start);
            toks.push(Token { kind: TokenKind::Integer(n), loc });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym = match two.as_str() {
            "=>" => Some((Sym::Arrow, 2)),
            "<=" => Some((Sym::Le, 2)),
            ">=" => Some((Sym::Ge, 2)),
            _ => None,
        }
        .or_else(|| {
            let s = match c {
                ';' => Sym::Semi,
                '=' => Sym::Equals,
                '{' => Sym::LBrace,
                '}' => Sym::RBrace,
                ',' => Sym::Comma,
                '^' => Sym::Caret,
                '(' => Sym::LParen,
                '#' => Sym::Hash,
                ')' => Sym::RParen,
                '[' => Sym::LBracket,
                ']' => Sym::RBracket,
                '-' => Sym::Minus,
                '/' => Sym::Slash,
                ':' => Sym::Colon,
                '.' => Sym::Dot,
                '<' => Sym::Lt,
                '>' => Sym::Gt,
                '+' => Sym::Plus,
                '*' => Sym::Star,
                _ => return None,
            };
            Some((s, 1))
        });
        match sym {
            Some((s, n)) => {
                advance(&mut i, &mut line, &mut col, n);
                toks.push(Token { kind: TokenKind::Sym(s), loc });
            }
            None => return Err(ParseError { loc, expected: vec![], found: format!("unexpected character '{c}'") }),
        }
    }
    toks.push(Token { kind: TokenKind::Eof, loc: Loc::new(line, col) });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn reserved_word_count() {
        assert_eq!(Keyword::ALL.len(), 37);
        assert_eq!(Sym::ALL.len(), 23);
        for k in Keyword::ALL {
            assert_eq!(Keyword::from_word(k.text()), Some(*k));
        }
    }

    #[test]
    fn state_id_is_longest_match() {
        assert_eq!(
            kinds("x' = x"),
            vec![
                TokenKind::StateId("x".into()),
                TokenKind::Sym(Sym::Equals),
                TokenKind::Ident("x".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn reserved_beats_identifier_but_not_longer_words() {
        assert_eq!(kinds("node")[0], TokenKind::Keyword(Keyword::Node));
        assert_eq!(kinds("nodes")[0], TokenKind::Keyword(Keyword::Nodes));
        assert_eq!(kinds("nodex")[0], TokenKind::Ident("nodex".into()));
        assert_eq!(kinds("_")[0], TokenKind::Sym(Sym::Underscore));
        assert_eq!(kinds("_a")[0], TokenKind::Ident("_a".into()));
    }

    #[test]
    fn comments_and_compound_symbols() {
        assert_eq!(
            kinds("(=> a b) -- trailing\n<= >= - /"),
            vec![
                TokenKind::Sym(Sym::LParen),
                TokenKind::Sym(Sym::Arrow),
                TokenKind::Ident("a".into()),
                TokenKind::Ident("b".into()),
                TokenKind::Sym(Sym::RParen),
                TokenKind::Sym(Sym::Le),
                TokenKind::Sym(Sym::Ge),
                TokenKind::Sym(Sym::Minus),
                TokenKind::Sym(Sym::Slash),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn uint_constant_tokens() {
        assert_eq!(
            kinds("uint[4](15)"),
            vec![
                TokenKind::Keyword(Keyword::Uint),
                TokenKind::Sym(Sym::LBracket),
                TokenKind::Integer(4.into()),
                TokenKind::Sym(Sym::RBracket),
                TokenKind::Sym(Sym::LParen),
                TokenKind::Integer(15.into()),
                TokenKind::Sym(Sym::RParen),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn positions_are_tracked() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!((toks[1].loc.line, toks[1].loc.col), (2, 3));
    }

    #[test]
    fn stray_character_is_an_error() {
        let err = tokenize("a ? b").unwrap_err();
        assert_eq!((err.loc.line, err.loc.col), (1, 3));
    }
}
