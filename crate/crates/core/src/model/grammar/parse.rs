use std::collections::BTreeMap;

use super::{Axis, GrammarError, Op, PrimitiveKind, Production, RuleProgram, SplitPart, SplitSize};
use crate::model::SemanticClass;

const WEIGHT_TOLERANCE: f64 = 1e-9;

const OPERATIONS: [&str; 8] = [
    "extrude",
    "split",
    "repeat",
    "setback",
    "color",
    "class",
    "choose",
    "primitive",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Arrow,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Pipe,
    Tilde,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Token>, GrammarError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '|' => Some(Tok::Pipe),
            '~' => Some(Tok::Tilde),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, column });
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_whitespace() {
            i += 1;
        } else if chars[i..].starts_with(&['-', '-', '>']) {
            out.push(Token { tok: Tok::Arrow, column });
            i += 3;
        } else if c.is_ascii_digit() || c == '.' || c == '-' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse().map_err(|_| GrammarError::Syntax {
                line: line_no,
                column,
                message: format!("invalid number `{text}`"),
            })?;
            out.push(Token { tok: Tok::Num(value), column });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else {
            return Err(GrammarError::Syntax {
                line: line_no,
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        column: chars.len() + 1,
    });
    Ok(out)
}

struct Reference {
    symbol: String,
    line: usize,
    column: usize,
}

struct LineParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    rule: String,
    refs: &'a mut Vec<Reference>,
}

impl LineParser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn column(&self) -> usize {
        self.toks[self.pos].column
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, GrammarError> {
        Err(GrammarError::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), GrammarError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn number(&mut self) -> Result<f64, GrammarError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.next();
                Ok(v)
            }
            _ => self.err("expected a number"),
        }
    }

    fn ident(&mut self) -> Result<(String, usize), GrammarError> {
        let column = self.column();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok((s, column))
            }
            _ => self.err("expected a name"),
        }
    }

    fn symbol(&mut self) -> Result<String, GrammarError> {
        let (s, column) = self.ident()?;
        if OPERATIONS.contains(&s.as_str()) {
            return Err(GrammarError::Syntax {
                line: self.line,
                column,
                message: format!("`{s}` is an operation, not a symbol"),
            });
        }
        self.refs.push(Reference {
            symbol: s.clone(),
            line: self.line,
            column,
        });
        Ok(s)
    }

    fn axis(&mut self) -> Result<Axis, GrammarError> {
        match self.ident()?.0.as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => self.err("axis must be x, y or z"),
        }
    }

    fn positive(&mut self, what: &str) -> Result<f64, GrammarError> {
        let v = self.number()?;
        if v > 0.0 {
            Ok(v)
        } else {
            self.err(format!("{what} must be positive"))
        }
    }

    /// Parses operations until `}`, `,`, `|` or end of line.
    fn ops(&mut self) -> Result<Vec<Op>, GrammarError> {
        let mut ops = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            ops.push(self.op()?);
        }
        Ok(ops)
    }

    fn op(&mut self) -> Result<Op, GrammarError> {
        let (name, column) = self.ident()?;
        let has_args = matches!(self.peek(), Tok::LParen | Tok::LBrace);
        if !OPERATIONS.contains(&name.as_str()) {
            if has_args {
                return Err(GrammarError::UnknownOperation {
                    line: self.line,
                    column,
                    name,
                });
            }
            self.refs.push(Reference {
                symbol: name.clone(),
                line: self.line,
                column,
            });
            return Ok(Op::Invoke(name));
        }
        match name.as_str() {
            "extrude" => {
                self.expect(Tok::LParen, "`(`")?;
                let h = self.number()?;
                if h < 0.0 {
                    return self.err("extrude height must not be negative");
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Op::Extrude(h))
            }
            "color" => {
                self.expect(Tok::LParen, "`(`")?;
                let mut rgb = [0f32; 3];
                for (k, c) in rgb.iter_mut().enumerate() {
                    if k > 0 {
                        self.expect(Tok::Comma, "`,`")?;
                    }
                    let v = self.number()?;
                    if !(0.0..=1.0).contains(&v) {
                        return self.err("color components must lie in [0, 1]");
                    }
                    *c = v as f32;
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Op::Color(rgb))
            }
            "class" => {
                self.expect(Tok::LParen, "`(`")?;
                let (cls, column) = self.ident()?;
                let class = cls.parse::<SemanticClass>().map_err(|_| GrammarError::Syntax {
                    line: self.line,
                    column,
                    message: format!("unknown class `{cls}`"),
                })?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Op::Class(class))
            }
            "primitive" => {
                self.expect(Tok::LParen, "`(`")?;
                let kind = match self.ident()?.0.as_str() {
                    "box" => PrimitiveKind::Box,
                    "cylinder" => PrimitiveKind::Cylinder,
                    "cone" => PrimitiveKind::Cone,
                    "quad" => PrimitiveKind::Quad,
                    _ => return self.err("primitive must be box, cylinder, cone or quad"),
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(Op::Primitive(kind))
            }
            "repeat" => {
                self.expect(Tok::LParen, "`(`")?;
                let axis = self.axis()?;
                self.expect(Tok::Comma, "`,`")?;
                let size = self.positive("repeat size")?;
                self.expect(Tok::Comma, "`,`")?;
                let symbol = self.symbol()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Op::Repeat { axis, size, symbol })
            }
            "setback" => {
                self.expect(Tok::LParen, "`(`")?;
                let distance = self.positive("setback distance")?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::LBrace, "`{`")?;
                let symbol = self.symbol()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Op::Setback { distance, symbol })
            }
            "split" => {
                self.expect(Tok::LParen, "`(`")?;
                let axis = self.axis()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::LBrace, "`{`")?;
                let mut parts = Vec::new();
                loop {
                    let relative = *self.peek() == Tok::Tilde;
                    if relative {
                        self.next();
                    }
                    let v = self.positive("split size")?;
                    self.expect(Tok::Colon, "`:`")?;
                    let symbol = self.symbol()?;
                    parts.push(SplitPart {
                        size: if relative {
                            SplitSize::Relative(v)
                        } else {
                            SplitSize::Absolute(v)
                        },
                        symbol,
                    });
                    match self.next() {
                        Tok::Comma | Tok::Pipe => continue,
                        Tok::RBrace => break,
                        _ => return self.err("expected `,` or `}` in split"),
                    }
                }
                Ok(Op::Split { axis, parts })
            }
            "choose" => {
                let line = self.line;
                self.expect(Tok::LBrace, "`{`")?;
                let mut branches = Vec::new();
                loop {
                    let w = self.number()?;
                    if w < 0.0 {
                        return self.err("weights must not be negative");
                    }
                    self.expect(Tok::Colon, "`:`")?;
                    let ops = self.ops()?;
                    branches.push(Production {
                        weight: Some(w),
                        ops,
                    });
                    match self.next() {
                        Tok::Comma | Tok::Pipe => continue,
                        Tok::RBrace => break,
                        _ => return self.err("expected `,` or `}` in choose"),
                    }
                }
                let sum: f64 = branches.iter().filter_map(|b| b.weight).sum();
                if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                    return Err(GrammarError::BadProbabilities {
                        line,
                        rule: self.rule.clone(),
                        sum,
                    });
                }
                Ok(Op::Choose(branches))
            }
            _ => unreachable!("operation list and match arms agree"),
        }
    }
}

/// Compiles rule-file text into a [`RuleProgram`].
pub fn parse_rules(source: &str) -> Result<RuleProgram, GrammarError> {
    let mut rules: BTreeMap<String, Vec<Production>> = BTreeMap::new();
    let mut axiom = None;
    let mut refs = Vec::new();

    for (idx, text) in source.lines().enumerate() {
        let line = idx + 1;
        let toks = lex(text, line)?;
        if toks.len() == 1 {
            continue;
        }
        let mut p = LineParser {
            toks: &toks,
            pos: 0,
            line,
            rule: String::new(),
            refs: &mut refs,
        };
        let (lhs, column) = p.ident()?;
        if OPERATIONS.contains(&lhs.as_str()) {
            return Err(GrammarError::Syntax {
                line,
                column,
                message: format!("`{lhs}` is an operation and cannot name a rule"),
            });
        }
        p.expect(Tok::Arrow, "`-->`")?;
        p.rule = lhs.clone();
        let ops = p.ops()?;
        if *p.peek() != Tok::End {
            return p.err("unexpected token after operations");
        }
        // A rule that is a single choose becomes a set of weighted productions.
        let productions = match ops.as_slice() {
            [Op::Choose(branches)] => branches.clone(),
            _ => vec![Production { weight: None, ops }],
        };
        if rules.contains_key(&lhs) {
            return Err(GrammarError::DuplicateRule { line, symbol: lhs });
        }
        axiom.get_or_insert_with(|| lhs.clone());
        rules.insert(lhs, productions);
    }

    let axiom = axiom.ok_or(GrammarError::MissingAxiom)?;
    if let Some(r) = refs.iter().find(|r| !rules.contains_key(&r.symbol)) {
        return Err(GrammarError::UndefinedSymbol {
            line: r.line,
            column: r.column,
            symbol: r.symbol.clone(),
        });
    }
    Ok(RuleProgram { rules, axiom })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rule() {
        let p = parse_rules("Lot --> extrude(12) class(building) primitive(box)").unwrap();
        assert_eq!(p.axiom, "Lot");
        assert_eq!(p.rules.len(), 1);
        assert_eq!(
            p.rules["Lot"][0].ops,
            vec![
                Op::Extrude(12.0),
                Op::Class(SemanticClass::Building),
                Op::Primitive(PrimitiveKind::Box)
            ]
        );
    }

    #[test]
    fn empty_source_has_no_axiom() {
        assert_eq!(parse_rules(""), Err(GrammarError::MissingAxiom));
        assert_eq!(parse_rules("# only a comment\n\n"), Err(GrammarError::MissingAxiom));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let err = parse_rules("A --> choose{0.5: B, 0.4: C}\nB --> primitive(box)\nC --> primitive(box)")
            .unwrap_err();
        match err {
            GrammarError::BadProbabilities { line, rule, sum } => {
                assert_eq!((line, rule.as_str()), (1, "A"));
                assert!((sum - 0.9).abs() < 1e-12);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn whole_rule_choose_flattens() {
        let p = parse_rules("A --> choose{0.25: B, 0.75: extrude(3) B}\nB --> primitive(box)").unwrap();
        let prods = &p.rules["A"];
        assert_eq!(prods.len(), 2);
        assert_eq!(prods[1].weight, Some(0.75));
        assert_eq!(prods[1].ops.len(), 2);
    }

    #[test]
    fn unknown_operation() {
        assert_eq!(
            parse_rules("A --> twist(3)"),
            Err(GrammarError::UnknownOperation {
                line: 1,
                column: 7,
                name: "twist".into()
            })
        );
    }

    #[test]
    fn undefined_symbol() {
        assert_eq!(
            parse_rules("A --> extrude(3) Missing"),
            Err(GrammarError::UndefinedSymbol {
                line: 1,
                column: 18,
                symbol: "Missing".into()
            })
        );
    }

    #[test]
    fn syntax_error_position() {
        match parse_rules("A --> primitive(box)\nB --> split(x){3 A}") {
            Err(GrammarError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 18)),
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_rules("A -> primitive(box)"),
            Err(GrammarError::Syntax { line: 1, column: 3, .. })
        ));
    }

    #[test]
    fn split_forms() {
        let p = parse_rules("A --> split(z){4: B | ~1: C, 2: B}\nB --> primitive(box)\nC --> primitive(quad)").unwrap();
        match &p.rules["A"][0].ops[0] {
            Op::Split { axis, parts } => {
                assert_eq!(*axis, Axis::Z);
                assert_eq!(parts[1].size, SplitSize::Relative(1.0));
                assert_eq!(parts.len(), 3);
            }
            op => panic!("{op:?}"),
        }
    }

    #[test]
    fn duplicate_rule_rejected() {
        assert!(matches!(
            parse_rules("A --> primitive(box)\nA --> primitive(quad)"),
            Err(GrammarError::DuplicateRule { line: 2, .. })
        ));
    }

    #[test]
    fn shipped_rule_file_parses() {
        let text = include_str!("../../../../../data/rules/facade.rules");
        let p = parse_rules(text).unwrap();
        assert_eq!(p.axiom, "Lot");
    }
}
