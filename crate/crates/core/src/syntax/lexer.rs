use crate::diag::{Code, Diagnostic};

use super::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Def,
    Class,
    Dyn,
    If,
    Elif,
    Else,
    While,
    Break,
    Pass,
    Return,
    Not,
    Is,
    None,
    True,
    False,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    Arrow,
    Assign,
    EqEq,
    // layout
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of file".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Def => "def",
            Tok::Class => "class",
            Tok::Dyn => "dyn",
            Tok::If => "if",
            Tok::Elif => "elif",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Break => "break",
            Tok::Pass => "pass",
            Tok::Return => "return",
            Tok::Not => "not",
            Tok::Is => "is",
            Tok::None => "None",
            Tok::True => "True",
            Tok::False => "False",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            _ => "",
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "def" => Tok::Def,
        "class" => Tok::Class,
        "dyn" => Tok::Dyn,
        "if" => Tok::If,
        "elif" => Tok::Elif,
        "else" => Tok::Else,
        "while" => Tok::While,
        "break" => Tok::Break,
        "pass" => Tok::Pass,
        "return" => Tok::Return,
        "not" => Tok::Not,
        "is" => Tok::Is,
        "None" => Tok::None,
        "True" => Tok::True,
        "False" => Tok::False,
        _ => return None,
    })
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const INDENT_WIDTH: usize = 4;

/// Splits source text into tokens, producing `Indent`/`Dedent` from leading
/// whitespace. Newlines inside brackets are ignored.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut indents: Vec<usize> = vec![0];
    let mut depth = 0usize;

    for (lineno, raw) in src.lines().enumerate() {
        let line_no = lineno as u32 + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;

        if depth == 0 {
            let mut width = 0;
            while i < chars.len() && (chars[i] == ' ' || chars[i] == '\t') {
                if chars[i] == '\t' {
                    return Err(err(line_no, i, "tabs are not allowed in indentation"));
                }
                width += 1;
                i += 1;
            }
            if i == chars.len() || chars[i] == '#' {
                continue;
            }
            let top = *indents.last().unwrap();
            let span = Span {
                line: line_no,
                col: i as u32 + 1,
            };
            if width % INDENT_WIDTH != 0 {
                return Err(err(line_no, i, "indentation must be a multiple of 4 spaces"));
            }
            if width > top {
                if width != top + INDENT_WIDTH {
                    return Err(err(line_no, i, "unexpected indent"));
                }
                indents.push(width);
                out.push(Token {
                    tok: Tok::Indent,
                    span,
                });
            } else {
                while width < *indents.last().unwrap() {
                    indents.pop();
                    out.push(Token {
                        tok: Tok::Dedent,
                        span,
                    });
                }
                if width != *indents.last().unwrap() {
                    return Err(err(line_no, i, "dedent does not match any outer level"));
                }
            }
        }

        while i < chars.len() {
            let c = chars[i];
            let span = Span {
                line: line_no,
                col: i as u32 + 1,
            };
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, span });
            match c {
                ' ' | '\t' | '\r' => i += 1,
                '#' => break,
                '(' | '[' | '{' => {
                    depth += 1;
                    push(
                        &mut out,
                        match c {
                            '(' => Tok::LParen,
                            '[' => Tok::LBracket,
                            _ => Tok::LBrace,
                        },
                    );
                    i += 1;
                }
                ')' | ']' | '}' => {
                    depth = depth.saturating_sub(1);
                    push(
                        &mut out,
                        match c {
                            ')' => Tok::RParen,
                            ']' => Tok::RBracket,
                            _ => Tok::RBrace,
                        },
                    );
                    i += 1;
                }
                ':' => {
                    push(&mut out, Tok::Colon);
                    i += 1;
                }
                ',' => {
                    push(&mut out, Tok::Comma);
                    i += 1;
                }
                '.' => {
                    push(&mut out, Tok::Dot);
                    i += 1;
                }
                '=' => {
                    if chars.get(i + 1) == Some(&'=') {
                        push(&mut out, Tok::EqEq);
                        i += 2;
                    } else {
                        push(&mut out, Tok::Assign);
                        i += 1;
                    }
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    push(&mut out, Tok::Arrow);
                    i += 2;
                }
                '-' | '0'..='9' => {
                    let start = i;
                    if c == '-' {
                        i += 1;
                        if !chars.get(i).is_some_and(|d| d.is_ascii_digit()) {
                            return Err(err(line_no, start, "unexpected character `-`"));
                        }
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    let value: i64 = text
                        .parse()
                        .map_err(|_| err(line_no, start, "integer literal out of range"))?;
                    push(&mut out, Tok::Int(value));
                }
                '"' => {
                    let start = i;
                    i += 1;
                    let mut s = String::new();
                    loop {
                        match chars.get(i) {
                            None => return Err(err(line_no, start, "unterminated string literal")),
                            Some('"') => {
                                i += 1;
                                break;
                            }
                            Some('\\') => {
                                let esc = match chars.get(i + 1) {
                                    Some('"') => '"',
                                    Some('\\') => '\\',
                                    Some('n') => '\n',
                                    _ => return Err(err(line_no, i, "invalid escape sequence")),
                                };
                                s.push(esc);
                                i += 2;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    push(&mut out, Tok::Str(s));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    push(&mut out, keyword(&word).unwrap_or(Tok::Ident(word)));
                }
                other => return Err(err(line_no, i, format!("unexpected character `{other}`"))),
            }
        }

        if depth == 0 {
            out.push(Token {
                tok: Tok::Newline,
                span: Span {
                    line: line_no,
                    col: chars.len() as u32 + 1,
                },
            });
        }
    }

    let end_line = src.lines().count() as u32 + 1;
    let end = Span {
        line: end_line,
        col: 1,
    };
    if depth > 0 {
        return Err(Diagnostic::new(Code::Syntax, end, "unclosed bracket at end of file"));
    }
    while indents.len() > 1 {
        indents.pop();
        out.push(Token {
            tok: Tok::Dedent,
            span: end,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: end,
    });
    Ok(out)
}

fn err(line: u32, idx: usize, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(
        Code::Syntax,
        Span {
            line,
            col: idx as u32 + 1,
        },
        msg,
    )
}
