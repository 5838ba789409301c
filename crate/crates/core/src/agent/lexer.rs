//! Minimal Java tokenizer. Comments and whitespace are dropped, literals are
//! collapsed, every token carries its 1-based line.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Sym(char),
    Ellipsis,
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
}

impl Token {
    pub fn is_sym(&self, c: char) -> bool {
        self.kind == TokenKind::Sym(c)
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(&self.kind, TokenKind::Ident(s) if s == w)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn text(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Sym(c) => c.to_string(),
            TokenKind::Ellipsis => "...".into(),
            TokenKind::Literal => "<literal>".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: u32,
    pub message: String,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let n = chars.len();

    while i < n {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && i + 1 < n && chars[i + 1] == '/' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && i + 1 < n && chars[i + 1] == '*' {
            let start = line;
            i += 2;
            loop {
                if i + 1 >= n {
                    return Err(LexError { line: start, message: "unterminated block comment".into() });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    break;
                }
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        }
        if c == '"' {
            let start = line;
            if i + 2 < n && chars[i + 1] == '"' && chars[i + 2] == '"' {
                // text block
                i += 3;
                loop {
                    if i + 2 >= n {
                        return Err(LexError { line: start, message: "unterminated text block".into() });
                    }
                    if chars[i] == '\\' {
                        i += 2;
                        continue;
                    }
                    if chars[i] == '"' && chars[i + 1] == '"' && chars[i + 2] == '"' {
                        i += 3;
                        break;
                    }
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
            } else {
                i += 1;
                loop {
                    if i >= n || chars[i] == '\n' {
                        return Err(LexError { line: start, message: "unterminated string literal".into() });
                    }
                    if chars[i] == '\\' {
                        i += 2;
                        continue;
                    }
                    if chars[i] == '"' {
                        i += 1;
                        break;
                    }
                    i += 1;
                }
            }
            out.push(Token { kind: TokenKind::Literal, line: start });
            continue;
        }
        if c == '\'' {
            i += 1;
            loop {
                if i >= n || chars[i] == '\n' {
                    return Err(LexError { line, message: "unterminated character literal".into() });
                }
                if chars[i] == '\\' {
                    i += 2;
                    continue;
                }
                if chars[i] == '\'' {
                    i += 1;
                    break;
                }
                i += 1;
            }
            out.push(Token { kind: TokenKind::Literal, line });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && i + 1 < n && chars[i + 1].is_ascii_digit()) {
            while i < n && (chars[i].is_alphanumeric() || chars[i] == '.' || chars[i] == '_') {
                // exponent sign, e.g. 1e-5
                if (chars[i] == 'e' || chars[i] == 'E' || chars[i] == 'p' || chars[i] == 'P')
                    && i + 1 < n
                    && (chars[i + 1] == '+' || chars[i + 1] == '-')
                {
                    i += 1;
                }
                i += 1;
            }
            out.push(Token { kind: TokenKind::Literal, line });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < n && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            out.push(Token { kind: TokenKind::Ident(chars[start..i].iter().collect()), line });
            continue;
        }
        if c == '.' && i + 2 < n && chars[i + 1] == '.' && chars[i + 2] == '.' {
            out.push(Token { kind: TokenKind::Ellipsis, line });
            i += 3;
            continue;
        }
        out.push(Token { kind: TokenKind::Sym(c), line });
        i += 1;
    }
    Ok(out)
}
