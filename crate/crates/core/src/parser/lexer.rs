use crate::formula::Pos;

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    /// Identifier or dotted path.
    Ident(String),
    /// Decimal literal with an optional letter suffix glued to it (`5ms`).
    Number {
        text: String,
        suffix: Option<String>,
    },
    /// `@ key(raw text)`.
    Annotation {
        key: String,
        raw: String,
    },
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Assign,
    EqEq,
    NotEq,
    Ge,
    Le,
    Gt,
    Lt,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { text, suffix } => format!("`{text}{}`", suffix.as_deref().unwrap_or("")),
            Tok::Annotation { key, .. } => format!("annotation `@{key}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Ge => ">=",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Lt => "<",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Arrow => "->",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.col }
    }

    fn eat_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn skip_blanks(&mut self) {
        self.eat_while(|c| c == ' ' || c == '\t');
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: src.chars().collect(), i: 0, line: 1, col: 1, _src: src };
    let mut out = Vec::new();
    loop {
        cur.eat_while(char::is_whitespace);
        let pos = cur.pos();
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = match c {
            '#' => {
                cur.eat_while(|c| c != '\n');
                continue;
            }
            '@' => {
                cur.bump();
                lex_annotation(&mut cur, pos)?
            }
            c if is_ident_start(c) => {
                let mut path = cur.eat_while(is_ident_char);
                while cur.peek() == Some('.') && cur.peek_at(1).is_some_and(is_ident_start) {
                    cur.bump();
                    path.push('.');
                    path.push_str(&cur.eat_while(is_ident_char));
                }
                Tok::Ident(path)
            }
            c if c.is_ascii_digit() => {
                let mut text = cur.eat_while(|c| c.is_ascii_digit());
                if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                    text.push('.');
                    text.push_str(&cur.eat_while(|c| c.is_ascii_digit()));
                }
                let suffix = cur.peek().filter(|&c| is_ident_start(c)).map(|_| cur.eat_while(is_ident_char));
                Tok::Number { text, suffix }
            }
            _ => {
                cur.bump();
                let next = cur.peek();
                let two = |cur: &mut Cursor, t: Tok| {
                    cur.bump();
                    t
                };
                match (c, next) {
                    ('(', _) => Tok::LParen,
                    (')', _) => Tok::RParen,
                    ('[', _) => Tok::LBracket,
                    (']', _) => Tok::RBracket,
                    (':', _) => Tok::Colon,
                    (',', _) => Tok::Comma,
                    ('=', Some('=')) => two(&mut cur, Tok::EqEq),
                    ('=', _) => Tok::Assign,
                    ('!', Some('=')) => two(&mut cur, Tok::NotEq),
                    ('>', Some('=')) => two(&mut cur, Tok::Ge),
                    ('<', Some('=')) => two(&mut cur, Tok::Le),
                    ('>', _) => Tok::Gt,
                    ('<', _) => Tok::Lt,
                    ('+', _) => Tok::Plus,
                    ('-', Some('>')) => two(&mut cur, Tok::Arrow),
                    ('-', _) => Tok::Minus,
                    ('*', _) => Tok::Star,
                    ('/', _) => Tok::Slash,
                    _ => return Err(ParseError::new(pos, format!("unexpected character `{c}`"), vec![])),
                }
            }
        };
        out.push(Token { tok, pos });
    }
}

fn lex_annotation(cur: &mut Cursor, at: Pos) -> Result<Tok, ParseError> {
    cur.skip_blanks();
    let key = cur.eat_while(is_ident_char);
    if key.is_empty() {
        return Err(ParseError::new(cur.pos(), "expected annotation name after `@`", vec!["identifier".into()]));
    }
    cur.skip_blanks();
    if cur.peek() != Some('(') {
        return Err(ParseError::new(cur.pos(), "expected `(` after annotation name", vec!["(".into()]));
    }
    cur.bump();
    let mut depth = 1;
    let mut raw = String::new();
    loop {
        match cur.bump() {
            None => return Err(ParseError::new(at, "unterminated annotation", vec![")".into()])),
            Some('(') => {
                depth += 1;
                raw.push('(');
            }
            Some(')') => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
                raw.push(')');
            }
            Some(c) => raw.push(c),
        }
    }
    Ok(Tok::Annotation { key, raw })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn paths_numbers_and_suffixes() {
        assert_eq!(
            toks("cmd.linear.x >= 0.5 [0:2s]"),
            vec![
                Tok::Ident("cmd.linear.x".into()),
                Tok::Ge,
                Tok::Number { text: "0.5".into(), suffix: None },
                Tok::LBracket,
                Tok::Number { text: "0".into(), suffix: None },
                Tok::Colon,
                Tok::Number { text: "2".into(), suffix: Some("s".into()) },
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn annotations_keep_raw_text() {
        assert_eq!(
            toks("@ topic(cmd, robot0/cmd_vel) # trailing"),
            vec![Tok::Annotation { key: "topic".into(), raw: "cmd, robot0/cmd_vel".into() }, Tok::Eof]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, column: 3 });
    }

    #[test]
    fn stray_character() {
        let e = tokenize("a $ b").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }
}
