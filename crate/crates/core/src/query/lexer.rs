use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Token {
    /// Bare identifier; may contain `;` (for aliases like `node1;P214`).
    Ident(String),
    /// Backquoted name with doubled backquotes unescaped.
    Quoted(String),
    /// Quoted literal text, with an optional language tag after `'...'@`.
    Str { text: String, lang: Option<String> },
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dash,
    /// `->`
    Arrow,
    /// `<-`
    LeftArrow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub offset: usize,
}

/// Splits query text into tokens. `#` starts a comment that runs to the end
/// of the line, except inside quotes.
pub fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let mut push = |token: Token, len: usize, i: &mut usize| {
            out.push(Spanned { token, offset: start });
            *i += len;
        };
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => push(Token::LParen, 1, &mut i),
            b')' => push(Token::RParen, 1, &mut i),
            b'[' => push(Token::LBracket, 1, &mut i),
            b']' => push(Token::RBracket, 1, &mut i),
            b':' => push(Token::Colon, 1, &mut i),
            b',' => push(Token::Comma, 1, &mut i),
            b'-' if bytes.get(i + 1) == Some(&b'>') => push(Token::Arrow, 2, &mut i),
            b'-' => push(Token::Dash, 1, &mut i),
            b'<' if bytes.get(i + 1) == Some(&b'-') => push(Token::LeftArrow, 2, &mut i),
            b'<' if bytes.get(i + 1) == Some(&b'=') => push(Token::Le, 2, &mut i),
            b'<' if bytes.get(i + 1) == Some(&b'>') => push(Token::Ne, 2, &mut i),
            b'<' => push(Token::Lt, 1, &mut i),
            b'>' if bytes.get(i + 1) == Some(&b'=') => push(Token::Ge, 2, &mut i),
            b'>' => push(Token::Gt, 1, &mut i),
            b'=' if bytes.get(i + 1) == Some(&b'=') => push(Token::Eq, 2, &mut i),
            b'=' => push(Token::Eq, 1, &mut i),
            b'!' if bytes.get(i + 1) == Some(&b'=') => push(Token::Ne, 2, &mut i),
            b'`' => {
                let mut name = String::new();
                let mut j = i + 1;
                loop {
                    match text[j..].find('`') {
                        None => return Err(Error::syntax(start, "unterminated backquoted name")),
                        Some(k) => {
                            name.push_str(&text[j..j + k]);
                            j += k + 1;
                            if bytes.get(j) == Some(&b'`') {
                                name.push('`');
                                j += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                push(Token::Quoted(name), j - i, &mut i);
            }
            b'"' | b'\'' => {
                let (body, end) = scan_quoted(text, i, c)?;
                let mut lang = None;
                let mut j = end;
                if c == b'\'' && bytes.get(j) == Some(&b'@') {
                    let tag_start = j + 1;
                    let mut k = tag_start;
                    while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k == tag_start {
                        return Err(Error::syntax(j, "missing language tag"));
                    }
                    lang = Some(text[tag_start..k].to_string());
                    j = k;
                }
                push(Token::Str { text: body, lang }, j - i, &mut i);
            }
            b'0'..=b'9' | b'.' if c != b'.' || bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                let len = number_len(&bytes[i..]);
                push(Token::Number(text[i..i + len].to_string()), len, &mut i);
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b';') {
                    j += 1;
                }
                push(Token::Ident(text[i..j].to_string()), j - i, &mut i);
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::syntax(i, format!("unexpected character {ch:?}")));
            }
        }
    }
    Ok(out)
}

/// Returns the unescaped body and the offset just past the closing quote.
fn scan_quoted(text: &str, start: usize, quote: u8) -> Result<(String, usize)> {
    let bytes = text.as_bytes();
    let mut body = String::new();
    let mut j = start + 1;
    let mut seg = j;
    while j < bytes.len() {
        match bytes[j] {
            b'\\' if j + 1 < bytes.len() => {
                body.push_str(&text[seg..j]);
                let next = text[j + 1..].chars().next().expect("in bounds");
                match next {
                    't' => body.push('\t'),
                    'n' => body.push('\n'),
                    'r' => body.push('\r'),
                    '\\' | '"' | '\'' => body.push(next),
                    other => {
                        body.push('\\');
                        body.push(other);
                    }
                }
                j += 1 + next.len_utf8();
                seg = j;
            }
            b if b == quote => {
                body.push_str(&text[seg..j]);
                return Ok((body, j + 1));
            }
            _ => j += 1,
        }
    }
    Err(Error::syntax(start, "unterminated string literal"))
}

fn number_len(bytes: &[u8]) -> usize {
    let mut i = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        let mut j = i + 1;
        if matches!(bytes.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        if bytes.get(j).is_some_and(u8::is_ascii_digit) {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}
