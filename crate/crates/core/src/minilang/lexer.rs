//! Hand-rolled tokenizer for MiniJ.
//!
//! Whitespace and comments (`//` and `/* */`) separate tokens and are
//! discarded. String literals keep their raw spelling, quotes included, so
//! that normalization never touches literal content.

use crate::{Result, SplError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident,
    Number,
    Str,
    Punct,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

/// Two-character operators recognized as single tokens. Longest match wins;
/// anything else becomes a one-character punctuation token.
const DIGRAPHS: [&str; 18] = [
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "->", "::",
];

pub(crate) fn tokenize(path: &str, source: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut column = 1;

    let err = |line: usize, column: usize, message: &str| SplError::Syntax {
        path: path.to_string(),
        line,
        column,
        message: message.to_string(),
    };

    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
                i += 1;
            }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '/' && i + 1 < chars.len() && chars[i + 1] == '/' {
            while i < chars.len() && chars[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c == '/' && i + 1 < chars.len() && chars[i + 1] == '*' {
            let (start_line, start_col) = (line, column);
            advance!(2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(err(start_line, start_col, "unterminated block comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            continue;
        }
        if c == '"' {
            let (start_line, start_col) = (line, column);
            let mut text = String::from('"');
            advance!(1);
            loop {
                if i >= chars.len() || chars[i] == '\n' {
                    return Err(err(start_line, start_col, "unterminated string literal"));
                }
                let ch = chars[i];
                text.push(ch);
                if ch == '\\' {
                    advance!(1);
                    if i >= chars.len() || chars[i] == '\n' {
                        return Err(err(start_line, start_col, "unterminated string literal"));
                    }
                    text.push(chars[i]);
                    advance!(1);
                    continue;
                }
                advance!(1);
                if ch == '"' {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Str,
                text,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let (start_line, start_col) = (line, column);
            let mut text = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                text.push(chars[i]);
                advance!(1);
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                text,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let (start_line, start_col) = (line, column);
            let mut text = String::new();
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                text.push(chars[i]);
                advance!(1);
            }
            tokens.push(Token {
                kind: TokenKind::Ident,
                text,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        // Punctuation: try a two-character operator first.
        let (start_line, start_col) = (line, column);
        if i + 1 < chars.len() {
            let pair: String = [c, chars[i + 1]].iter().collect();
            if DIGRAPHS.contains(&pair.as_str()) {
                advance!(2);
                tokens.push(Token {
                    kind: TokenKind::Punct,
                    text: pair,
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
        }
        if c.is_ascii_punctuation() {
            advance!(1);
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: c.to_string(),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(err(line, column, &format!("unexpected character {c:?}")));
    }
    Ok(tokens)
}
