use super::{CmpOp, Cond, Literal, Resm, ResmError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Dot,
    Star,
    Question,
    Epsilon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Op(CmpOp),
    And,
    Or,
    Not,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier {s}"),
        Tok::Str(s) => format!("string '{s}'"),
        Tok::Num(n) => format!("number {n}"),
        Tok::Dot => "'.'".into(),
        Tok::Star => "'*'".into(),
        Tok::Question => "'?'".into(),
        Tok::Epsilon => "'ε'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::Op(op) => format!("'{op}'"),
        Tok::And => "'and'".into(),
        Tok::Or => "'or'".into(),
        Tok::Not => "'not'".into(),
    }
}

fn syntax(pos: usize, message: impl Into<String>) -> ResmError {
    ResmError::Syntax { pos, message: message.into() }
}

/// Tokens with their character offsets. Words `and`, `or` and `not` are
/// always keywords.
fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ResmError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let simple = match c {
            '.' if !chars.get(i + 1).is_some_and(char::is_ascii_digit) => Some(Tok::Dot),
            '*' => Some(Tok::Star),
            '?' => Some(Tok::Question),
            'ε' => Some(Tok::Epsilon),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '=' => Some(Tok::Op(CmpOp::Eq)),
            '≠' => Some(Tok::Op(CmpOp::Ne)),
            '≤' => Some(Tok::Op(CmpOp::Le)),
            '≥' => Some(Tok::Op(CmpOp::Ge)),
            '∧' => Some(Tok::And),
            '∨' => Some(Tok::Or),
            '¬' => Some(Tok::Not),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((start, t));
            i += 1;
            continue;
        }
        match c {
            c if c.is_whitespace() => i += 1,
            '<' | '>' | '!' => {
                let eq = chars.get(i + 1) == Some(&'=');
                let op = match (c, eq) {
                    ('<', true) => CmpOp::Le,
                    ('<', false) => CmpOp::Lt,
                    ('>', true) => CmpOp::Ge,
                    ('>', false) => CmpOp::Gt,
                    ('!', true) => CmpOp::Ne,
                    _ => return Err(syntax(start, "expected '!='")),
                };
                out.push((start, Tok::Op(op)));
                i += if eq { 2 } else { 1 };
            }
            '\'' | '`' | '‘' | '’' => {
                // backquote and typographic quotes open a string as well
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(start, "unterminated string literal")),
                        Some('\\') => {
                            let esc = chars.get(i + 1).ok_or_else(|| syntax(i, "dangling escape"))?;
                            s.push(*esc);
                            i += 2;
                        }
                        Some('\'' | '’') => {
                            i += 1;
                            break;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                    }
                }
                out.push((start, Tok::Str(s)));
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_digit()
                        || chars[j] == '.'
                        || chars[j] == 'e'
                        || chars[j] == 'E'
                        || ((chars[j] == '-' || chars[j] == '+') && matches!(chars[j - 1], 'e' | 'E')))
                {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n: f64 = text
                    .parse()
                    .ok()
                    .filter(|n: &f64| n.is_finite())
                    .ok_or_else(|| syntax(start, format!("malformed number {text:?}")))?;
                out.push((start, Tok::Num(n)));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                out.push((
                    start,
                    match word.as_str() {
                        "and" => Tok::And,
                        "or" => Tok::Or,
                        "not" => Tok::Not,
                        _ => Tok::Ident(word),
                    },
                ));
                i = j;
            }
            other => return Err(syntax(start, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ResmError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(syntax(pos, format!("expected {}, found {}", describe(&want), describe(&t)))),
            None => Err(syntax(pos, format!("expected {}, found end of input", describe(&want)))),
        }
    }

    fn concat(&mut self) -> Result<Resm, ResmError> {
        let mut e = self.term()?;
        while self.peek() == Some(&Tok::Dot) {
            self.next();
            let rhs = self.term()?;
            e = Resm::concat(e, rhs);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Resm, ResmError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LBracket) {
                    self.next();
                    let c = self.or()?;
                    self.expect(Tok::RBracket)?;
                    Ok(Resm::DimCond(name, c))
                } else {
                    Ok(Resm::Dim(name))
                }
            }
            Some(Tok::Question) => Ok(Resm::Wildcard),
            Some(Tok::Epsilon) => Ok(Resm::Epsilon),
            Some(Tok::LParen) => {
                let inner = if self.peek() == Some(&Tok::RParen) {
                    Resm::Epsilon
                } else {
                    self.concat()?
                };
                self.expect(Tok::RParen)?;
                if self.peek() == Some(&Tok::Star) {
                    self.next();
                    Ok(Resm::star(inner))
                } else {
                    Ok(inner)
                }
            }
            Some(Tok::Star) => Err(syntax(pos, "'*' applies only to a parenthesized group")),
            Some(t) => Err(syntax(pos, format!("expected a dimension, '?', 'ε' or '(', found {}", describe(&t)))),
            None => Err(syntax(pos, "expected an expression, found end of input")),
        }
    }

    fn or(&mut self) -> Result<Cond, ResmError> {
        let mut c = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            c = Cond::Or(Box::new(c), Box::new(self.and()?));
        }
        Ok(c)
    }

    fn and(&mut self) -> Result<Cond, ResmError> {
        let mut c = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            c = Cond::And(Box::new(c), Box::new(self.unary()?));
        }
        Ok(c)
    }

    fn unary(&mut self) -> Result<Cond, ResmError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                Ok(Cond::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.next();
                let c = self.or()?;
                self.expect(Tok::RParen)?;
                Ok(c)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Cond, ResmError> {
        let pos = self.pos();
        let name = match self.next() {
            Some(Tok::Ident(n)) => n,
            Some(t) => return Err(syntax(pos, format!("expected a condition, found {}", describe(&t)))),
            None => return Err(syntax(pos, "expected a condition, found end of input")),
        };
        if name == "time" && self.peek() == Some(&Tok::LParen) {
            self.next();
            let pos = self.pos();
            let category = match self.next() {
                Some(Tok::Ident(c)) => c,
                _ => return Err(syntax(pos, "expected a time category name")),
            };
            self.expect(Tok::RParen)?;
            self.expect(Tok::Op(CmpOp::Eq))?;
            let pos = self.pos();
            let label = match self.next() {
                Some(Tok::Ident(l) | Tok::Str(l)) => l,
                _ => return Err(syntax(pos, "expected a time label")),
            };
            return Ok(Cond::Time { category, label });
        }
        let pos = self.pos();
        let op = match self.next() {
            Some(Tok::Op(op)) => op,
            _ => return Err(syntax(pos, format!("expected a comparison operator after {name}"))),
        };
        let pos = self.pos();
        let value = match self.next() {
            Some(Tok::Str(s)) => Literal::Text(s),
            Some(Tok::Num(n)) => Literal::Number(n),
            _ => return Err(syntax(pos, "expected a quoted string or a number")),
        };
        Ok(Cond::Cmp { attr: name, op, value })
    }
}

/// Parses a query expression. Positions in errors are character offsets.
pub fn parse(q: &str) -> Result<Resm, ResmError> {
    let toks = lex(q)?;
    let mut p = Parser { toks, at: 0, end: q.chars().count() };
    if p.toks.is_empty() {
        return Err(syntax(0, "empty expression; write ε for the empty sequence"));
    }
    let e = p.concat()?;
    if let Some(t) = p.peek().cloned() {
        return Err(syntax(p.pos(), format!("unexpected {}", describe(&t))));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: &str) -> Resm {
        Resm::Dim(n.to_owned())
    }

    #[test]
    fn reference_count_query() {
        let e = parse("H[name='Hilton'].?.M.?.T").unwrap();
        let head = Resm::DimCond(
            "H".into(),
            Cond::Cmp { attr: "name".into(), op: CmpOp::Eq, value: Literal::Text("Hilton".into()) },
        );
        let expected = Resm::concat(
            Resm::concat(Resm::concat(Resm::concat(head, Resm::Wildcard), dim("M")), Resm::Wildcard),
            dim("T"),
        );
        assert_eq!(e, expected);
        // backquote spelling is accepted too
        assert_eq!(parse("H[name=`Hilton'].?.M.?.T").unwrap(), expected);
    }

    #[test]
    fn epsilon_forms() {
        assert_eq!(parse("ε").unwrap(), Resm::Epsilon);
        assert_eq!(parse("()").unwrap(), Resm::Epsilon);
        assert_eq!(parse("()*").unwrap(), Resm::star(Resm::Epsilon));
    }

    #[test]
    fn star_then_concat() {
        let e = parse("(H.M)*.T").unwrap();
        assert_eq!(e, Resm::concat(Resm::star(Resm::concat(dim("H"), dim("M"))), dim("T")));
    }

    #[test]
    fn conditions() {
        let e = parse("M[name='Louvre' and time(timeOfDay)=Morning]").unwrap();
        let Resm::DimCond(_, c) = e else { panic!() };
        assert_eq!(
            c,
            Cond::And(
                Box::new(Cond::Cmp { attr: "name".into(), op: CmpOp::Eq, value: Literal::Text("Louvre".into()) }),
                Box::new(Cond::Time { category: "timeOfDay".into(), label: "Morning".into() })
            )
        );
        let e = parse("D[income<1200.5 or not (income>=3e3)]").unwrap();
        assert_eq!(e.to_string(), "D[income<1200.5 or not income>=3000]");
        let e = parse("D[a≠1 ∧ ¬b≤-2]").unwrap();
        assert_eq!(e.to_string(), "D[a!=1 and not b<=-2]");
    }

    #[test]
    fn precedence_printing() {
        let e = parse("D[(a=1 or b=2) and c=3]").unwrap();
        assert_eq!(e.to_string(), "D[(a=1 or b=2) and c=3]");
        let e = parse("D[a=1 or b=2 and c=3]").unwrap();
        assert_eq!(e.to_string(), "D[a=1 or b=2 and c=3]");
        let e = parse("D[a='it\\'s']").unwrap();
        assert_eq!(e.to_string(), "D[a='it\\'s']");
        let e = parse("D[time(c)='3-star']").unwrap();
        assert_eq!(e.to_string(), "D[time(c)='3-star']");
    }

    #[test]
    fn syntax_errors_report_positions() {
        let err = |q: &str| match parse(q) {
            Err(ResmError::Syntax { pos, .. }) => pos,
            other => panic!("{q}: expected syntax error, got {other:?}"),
        };
        assert_eq!(err(""), 0);
        assert_eq!(err("H."), 2);
        assert_eq!(err("H*"), 1);
        assert_eq!(err("H.#"), 2);
        assert_eq!(err("(H"), 2);
        assert_eq!(err("H[name=]"), 7);
        assert_eq!(err("H[name='x'"), 10);
        assert_eq!(err("H M"), 2);
        assert_eq!(err("H[name 'x']"), 7);
    }
}
