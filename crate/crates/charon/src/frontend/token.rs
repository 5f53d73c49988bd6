//! Lexer for CharonLang source text.

use super::FrontendError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    // keywords
    KwShort,
    KwInt,
    KwFloat,
    KwUnknownType,
    KwStruct,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    Ident(String),
    IntLit(i32),
    FloatLit(f32),
    // punctuation and operators
    Assign,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Gt,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Shl,
    Shr,
    Amp,
    Pipe,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Dot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

/// Lex source text into tokens; comments (`//`, `/* */`) and whitespace are
/// dropped. Every token carries its line/column for diagnostics.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    loop {
        lx.skip_trivia()?;
        if lx.pos >= lx.src.len() {
            return Ok(tokens);
        }
        tokens.push(lx.next_token()?);
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn err(&self, message: impl Into<String>) -> FrontendError {
        FrontendError::Lex {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            Some(b'*') if self.peek2() == Some(b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                            None => {
                                return Err(FrontendError::Lex {
                                    line,
                                    col,
                                    message: "unterminated block comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, FrontendError> {
        let (line, col) = (self.line, self.col);
        let b = self.peek().unwrap();
        let kind = if b.is_ascii_digit() {
            self.number()?
        } else if b.is_ascii_alphabetic() || b == b'_' {
            self.word()
        } else {
            self.operator()?
        };
        Ok(Token { kind, line, col })
    }

    fn number(&mut self) -> Result<TokenKind, FrontendError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.bump();
        }
        let is_float = self.peek() == Some(b'.') && matches!(self.peek2(), Some(b) if b.is_ascii_digit());
        if is_float {
            self.bump();
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.bump();
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let value: f32 = text
                .parse()
                .map_err(|_| self.err(format!("invalid float literal {text}")))?;
            if !value.is_finite() {
                return Err(self.err(format!("float literal {text} out of range")));
            }
            return Ok(TokenKind::FloatLit(value));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: i32 = text
            .parse()
            .map_err(|_| self.err(format!("integer literal {text} out of range")))?;
        Ok(TokenKind::IntLit(value))
    }

    fn word(&mut self) -> TokenKind {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.bump();
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text {
            "short" => TokenKind::KwShort,
            "int" => TokenKind::KwInt,
            "float" => TokenKind::KwFloat,
            "__unknown_type__" => TokenKind::KwUnknownType,
            "struct" => TokenKind::KwStruct,
            "if" => TokenKind::KwIf,
            "else" => TokenKind::KwElse,
            "while" => TokenKind::KwWhile,
            "return" => TokenKind::KwReturn,
            _ => TokenKind::Ident(text.to_string()),
        }
    }

    fn operator(&mut self) -> Result<TokenKind, FrontendError> {
        let b = self.bump();
        let kind = match b {
            b'=' if self.peek() == Some(b'=') => {
                self.bump();
                TokenKind::EqEq
            }
            b'=' => TokenKind::Assign,
            b'!' if self.peek() == Some(b'=') => {
                self.bump();
                TokenKind::NotEq
            }
            b'!' => TokenKind::Not,
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            b'*' => TokenKind::Star,
            b'/' => TokenKind::Slash,
            b'%' => TokenKind::Percent,
            // The operator set has < and > but no <= or >=.
            b'<' if self.peek() == Some(b'=') => {
                return Err(self.err("operator <= is not part of the language"))
            }
            b'>' if self.peek() == Some(b'=') => {
                return Err(self.err("operator >= is not part of the language"))
            }
            b'<' if self.peek() == Some(b'<') => {
                self.bump();
                TokenKind::Shl
            }
            b'>' if self.peek() == Some(b'>') => {
                self.bump();
                TokenKind::Shr
            }
            b'<' => TokenKind::Lt,
            b'>' => TokenKind::Gt,
            b'&' if self.peek() == Some(b'&') => {
                self.bump();
                TokenKind::AndAnd
            }
            b'&' => TokenKind::Amp,
            b'|' if self.peek() == Some(b'|') => {
                self.bump();
                TokenKind::OrOr
            }
            b'|' => TokenKind::Pipe,
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'{' => TokenKind::LBrace,
            b'}' => TokenKind::RBrace,
            b'[' => TokenKind::LBracket,
            b']' => TokenKind::RBracket,
            b';' => TokenKind::Semi,
            b'.' => TokenKind::Dot,
            other => {
                return Err(FrontendError::Lex {
                    line: self.line,
                    col: self.col.saturating_sub(1),
                    message: format!("character {:?} is outside the language alphabet", other as char),
                })
            }
        };
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_ident_semi() {
        let toks = tokenize("int x;").unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![TokenKind::KwInt, TokenKind::Ident("x".into()), TokenKind::Semi]
        );
    }

    #[test]
    fn lte_is_a_lexical_error() {
        let err = tokenize("x <= 1").unwrap_err();
        assert!(err.to_string().contains("<="));
    }

    #[test]
    fn empty_input_is_empty_token_sequence() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("// c\n/* c2 */ int\nx").unwrap();
        assert_eq!(toks[0].kind, TokenKind::KwInt);
        assert_eq!((toks[0].line, toks[0].col), (2, 10));
        assert_eq!((toks[1].line, toks[1].col), (3, 1));
    }

    #[test]
    fn float_and_int_literals() {
        let toks = tokenize("3.5 42").unwrap();
        assert_eq!(toks[0].kind, TokenKind::FloatLit(3.5));
        assert_eq!(toks[1].kind, TokenKind::IntLit(42));
    }

    #[test]
    fn int_literal_overflow() {
        assert!(tokenize("2147483648").is_err());
        assert!(tokenize("2147483647").is_ok());
    }

    #[test]
    fn tilde_is_outside_the_alphabet() {
        assert!(tokenize("~x").is_err());
    }
}
