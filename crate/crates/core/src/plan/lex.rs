//! Line tokenizer shared by the `.map`, `.plan` and `.trace` formats.
//!
//! Every format is line oriented: tokens are separated by whitespace, `#`
//! outside a quoted string starts a comment, and quoted strings support the
//! escapes `\"`, `\\`, `\n`, `\r` and `\t`.

use super::diag::{Code, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Word(String),
    Quoted(String),
}

impl Token {
    pub fn word(&self) -> Option<&str> {
        match self {
            Token::Word(w) => Some(w),
            Token::Quoted(_) => None,
        }
    }
}

#[derive(Debug)]
pub(crate) struct Line {
    pub number: usize,
    pub tokens: Vec<Token>,
}

impl Line {
    pub fn word(&self, i: usize) -> Option<&str> {
        self.tokens.get(i).and_then(Token::word)
    }

    pub fn syntax(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.number, Code::SyntaxError, msg)
    }
}

/// Tokenizes every non-blank, non-comment line. Lines that fail to tokenize
/// produce a diagnostic and are skipped.
pub(crate) fn lines(text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Line> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        match tokenize(raw) {
            Ok(tokens) if tokens.is_empty() => {}
            Ok(tokens) => out.push(Line { number, tokens }),
            Err(msg) => diags.push(Diagnostic::new(number, Code::SyntaxError, msg)),
        }
    }
    out
}

/// Checks that the first line is `<kind> v1` and returns the remaining lines.
pub(crate) fn expect_header<'a>(
    lines: &'a [Line],
    kind: &str,
    diags: &mut Vec<Diagnostic>,
) -> Option<&'a [Line]> {
    match lines.split_first() {
        Some((first, rest)) => {
            if first.tokens.len() == 2 && first.word(0) == Some(kind) && first.word(1) == Some("v1") {
                Some(rest)
            } else {
                diags.push(first.syntax(format!("expected version header `{kind} v1`")));
                None
            }
        }
        None => {
            diags.push(Diagnostic::new(1, Code::SyntaxError, format!("missing version header `{kind} v1`")));
            None
        }
    }
}

pub(crate) fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(&c) = chars.peek() else { break };
        if c == '#' {
            break;
        }
        if c == '"' {
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('r') => s.push('\r'),
                        Some('t') => s.push('\t'),
                        Some(other) => return Err(format!("unknown escape `\\{other}`")),
                        None => return Err("unterminated string".into()),
                    },
                    Some(other) => s.push(other),
                }
            }
            if chars.peek().is_some_and(|c| !c.is_whitespace() && *c != '#') {
                return Err("missing whitespace after string".into());
            }
            tokens.push(Token::Quoted(s));
        } else {
            let mut w = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '#' {
                    break;
                }
                if c == '"' {
                    return Err("unexpected quote inside word".into());
                }
                w.push(c);
                chars.next();
            }
            tokens.push(Token::Word(w));
        }
    }
    Ok(tokens)
}

/// Quotes and escapes `s` so that [`tokenize`] yields it back as one token.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `[a-z][a-z0-9_]*`
pub fn is_tag(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

pub(crate) fn parse_count(s: &str) -> Option<u32> {
    if s.is_empty() || s.len() > 9 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_quotes() {
        let toks = tokenize(r#"action speak "a # b \"q\"" # trailing"#).unwrap();
        assert_eq!(
            toks,
            vec![
                Token::Word("action".into()),
                Token::Word("speak".into()),
                Token::Quoted("a # b \"q\"".into())
            ]
        );
        assert!(tokenize("# only").unwrap().is_empty());
    }

    #[test]
    fn malformed_strings() {
        assert!(tokenize(r#"x "open"#).is_err());
        assert!(tokenize(r#"x "a"b"#).is_err());
        assert!(tokenize(r#"x "\q""#).is_err());
        assert!(tokenize(r#"ab"c""#).is_err());
    }

    #[test]
    fn quote_round_trips() {
        for s in ["", "plain", "with \"quotes\" and \\", "line\nbreak\ttab\r", "ünïcödé #"] {
            let toks = tokenize(&quote(s)).unwrap();
            assert_eq!(toks, vec![Token::Quoted(s.to_string())]);
        }
    }

    #[test]
    fn identifier_classes() {
        assert!(is_identifier("kidA"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier("a-b"));
        assert!(is_tag("toys_scattered"));
        assert!(!is_tag("Homework"));
        assert!(!is_tag(""));
    }
}
