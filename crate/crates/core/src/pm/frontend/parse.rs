//! Lexer and recursive-descent parser for `.mini` corpus files.

use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

const KEYWORDS: &[&str] = &[
    "package", "type", "extends", "field", "def", "let", "return", "new", "this", "null", "true",
    "false",
];

fn lex(file: &str, src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |line, col, msg: String| FrontendError::Parse {
        file: file.to_string(),
        line,
        col,
        message: msg,
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += (i - start) as u32;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += (i - start) as u32;
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse()
                .map_err(|_| err(pos.line, pos.col, format!("integer literal `{text}` out of range")))?;
            out.push(Token { tok: Tok::Int(n), pos });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(pos.line, pos.col, "unterminated string literal".into()))
                    }
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') if i + 1 < chars.len() && chars[i + 1] != '\n' => {
                        s.push(chars[i + 1]);
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        if "{}():;,.=+".contains(c) {
            out.push(Token { tok: Tok::Sym(c), pos });
            i += 1;
            col += 1;
            continue;
        }
        return Err(err(line, col, format!("unexpected character `{c}`")));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TypeRef {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct FileAst {
    pub package: Option<String>,
    pub types: Vec<TypeAst>,
}

#[derive(Debug, Clone)]
pub struct TypeAst {
    pub name: String,
    pub pos: Pos,
    pub extends: Option<TypeRef>,
    pub fields: Vec<FieldAst>,
    pub defs: Vec<DefAst>,
}

#[derive(Debug, Clone)]
pub struct FieldAst {
    pub name: String,
    pub pos: Pos,
    pub ty: TypeRef,
}

#[derive(Debug, Clone)]
pub struct DefAst {
    pub name: String,
    pub pos: Pos,
    pub params: Vec<(String, TypeRef)>,
    /// `None` means void.
    pub ret: Option<TypeRef>,
    pub body: Vec<Stmt>,
    pub end_line: u32,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Let {
        name: String,
        ty: Option<TypeRef>,
        init: Expr,
        pos: Pos,
    },
    Assign {
        target: Target,
        value: Expr,
        pos: Pos,
    },
    Return(Option<Expr>, Pos),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub enum Target {
    Var(String),
    ThisField(String),
}

#[derive(Debug, Clone)]
pub enum Receiver {
    /// Bare `m(...)`: a call on `this`.
    Implicit,
    /// `a.b.m(...)`: a variable or a (possibly qualified) type name.
    Path(Vec<String>),
    Expr(Box<Expr>),
}

#[derive(Debug, Clone)]
pub enum Expr {
    Var(String, Pos),
    This,
    ThisField(String, Pos),
    Call {
        recv: Receiver,
        method: String,
        args: Vec<Expr>,
        pos: Pos,
    },
    New(TypeRef),
    // literal values are irrelevant to data flow
    Str,
    Int,
    Bool,
    Null,
    Add(Box<Expr>, Box<Expr>),
}

struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, FrontendError> {
        let pos = self.pos();
        Err(FrontendError::Parse {
            file: self.file.to_string(),
            line: pos.line,
            col: pos.col,
            message: msg.into(),
        })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of file".into(),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_sym(&mut self, c: char) -> Result<Pos, FrontendError> {
        if self.is_sym(c) {
            Ok(self.bump().pos)
        } else {
            self.error(format!("expected `{c}`, found {}", Self::describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Pos, FrontendError> {
        if self.is_kw(kw) {
            Ok(self.bump().pos)
        } else {
            self.error(format!("expected `{kw}`, found {}", Self::describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            other => self.error(format!("expected identifier, found {}", Self::describe(&other))),
        }
    }

    fn dotted(&mut self) -> Result<(String, Pos), FrontendError> {
        let (mut name, pos) = self.ident()?;
        while self.is_sym('.') {
            self.bump();
            let (seg, _) = self.ident()?;
            name.push('.');
            name.push_str(&seg);
        }
        Ok((name, pos))
    }

    fn type_ref(&mut self) -> Result<TypeRef, FrontendError> {
        let (name, pos) = self.dotted()?;
        Ok(TypeRef { name, pos })
    }

    fn file(&mut self) -> Result<FileAst, FrontendError> {
        let mut package = None;
        if self.is_kw("package") {
            self.bump();
            package = Some(self.dotted()?.0);
            self.expect_sym(';')?;
        }
        let mut types = Vec::new();
        while *self.peek() != Tok::Eof {
            types.push(self.type_decl()?);
        }
        Ok(FileAst { package, types })
    }

    fn type_decl(&mut self) -> Result<TypeAst, FrontendError> {
        self.expect_kw("type")?;
        let (name, pos) = self.ident()?;
        let extends = if self.is_kw("extends") {
            self.bump();
            Some(self.type_ref()?)
        } else {
            None
        };
        self.expect_sym('{')?;
        let mut fields = Vec::new();
        let mut defs = Vec::new();
        while !self.is_sym('}') {
            if self.is_kw("field") {
                self.bump();
                let (fname, fpos) = self.ident()?;
                self.expect_sym(':')?;
                let ty = self.type_ref()?;
                self.expect_sym(';')?;
                fields.push(FieldAst {
                    name: fname,
                    pos: fpos,
                    ty,
                });
            } else if self.is_kw("def") {
                defs.push(self.def()?);
            } else {
                return self.error(format!(
                    "expected `field`, `def` or `}}`, found {}",
                    Self::describe(self.peek())
                ));
            }
        }
        self.expect_sym('}')?;
        Ok(TypeAst {
            name,
            pos,
            extends,
            fields,
            defs,
        })
    }

    fn def(&mut self) -> Result<DefAst, FrontendError> {
        let pos = self.expect_kw("def")?;
        let (name, _) = self.ident()?;
        self.expect_sym('(')?;
        let mut params = Vec::new();
        if !self.is_sym(')') {
            loop {
                let (p, _) = self.ident()?;
                self.expect_sym(':')?;
                params.push((p, self.type_ref()?));
                if self.is_sym(',') {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(')')?;
        let mut ret = None;
        if self.is_sym(':') {
            self.bump();
            if self.is_kw("void") {
                self.bump();
            } else {
                ret = Some(self.type_ref()?);
            }
        }
        self.expect_sym('{')?;
        let mut body = Vec::new();
        while !self.is_sym('}') {
            if *self.peek() == Tok::Eof {
                return self.error("unterminated method body");
            }
            body.push(self.stmt()?);
        }
        let end_line = self.expect_sym('}')?.line;
        Ok(DefAst {
            name,
            pos,
            params,
            ret,
            body,
            end_line,
        })
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let pos = self.pos();
        if self.is_kw("let") {
            self.bump();
            let (name, _) = self.ident()?;
            let ty = if self.is_sym(':') {
                self.bump();
                Some(self.type_ref()?)
            } else {
                None
            };
            self.expect_sym('=')?;
            let init = self.expr()?;
            self.expect_sym(';')?;
            return Ok(Stmt::Let {
                name,
                ty,
                init,
                pos,
            });
        }
        if self.is_kw("return") {
            self.bump();
            let value = if self.is_sym(';') {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_sym(';')?;
            return Ok(Stmt::Return(value, pos));
        }
        if self.is_kw("this") && *self.peek_at(1) == Tok::Sym('.') && *self.peek_at(3) == Tok::Sym('=') {
            self.bump();
            self.bump();
            let (f, _) = self.ident()?;
            self.expect_sym('=')?;
            let value = self.expr()?;
            self.expect_sym(';')?;
            return Ok(Stmt::Assign {
                target: Target::ThisField(f),
                value,
                pos,
            });
        }
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Sym('=') {
            let (x, _) = self.ident()?;
            self.bump();
            let value = self.expr()?;
            self.expect_sym(';')?;
            return Ok(Stmt::Assign {
                target: Target::Var(x),
                value,
                pos,
            });
        }
        let e = self.expr()?;
        self.expect_sym(';')?;
        Ok(Stmt::Expr(e))
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        let mut lhs = self.postfix()?;
        while self.is_sym('+') {
            self.bump();
            let rhs = self.postfix()?;
            lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn args(&mut self) -> Result<Vec<Expr>, FrontendError> {
        self.expect_sym('(')?;
        let mut args = Vec::new();
        if !self.is_sym(')') {
            loop {
                args.push(self.expr()?);
                if self.is_sym(',') {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(')')?;
        Ok(args)
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        while self.is_sym('.') {
            self.bump();
            let (method, pos) = self.ident()?;
            if !self.is_sym('(') {
                return self.error("field access is only supported as `this.<field>`");
            }
            let args = self.args()?;
            e = Expr::Call {
                recv: Receiver::Expr(Box::new(e)),
                method,
                args,
                pos,
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Str(_) => {
                self.bump();
                Ok(Expr::Str)
            }
            Tok::Int(_) => {
                self.bump();
                Ok(Expr::Int)
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(kw) if kw == "null" => {
                self.bump();
                Ok(Expr::Null)
            }
            Tok::Ident(kw) if kw == "true" || kw == "false" => {
                self.bump();
                Ok(Expr::Bool)
            }
            Tok::Ident(kw) if kw == "new" => {
                self.bump();
                let ty = self.type_ref()?;
                self.expect_sym('(')?;
                self.expect_sym(')')?;
                Ok(Expr::New(ty))
            }
            Tok::Ident(kw) if kw == "this" => {
                self.bump();
                if self.is_sym('.') {
                    self.bump();
                    let (name, npos) = self.ident()?;
                    if self.is_sym('(') {
                        let args = self.args()?;
                        return Ok(Expr::Call {
                            recv: Receiver::Expr(Box::new(Expr::This)),
                            method: name,
                            args,
                            pos: npos,
                        });
                    }
                    return Ok(Expr::ThisField(name, npos));
                }
                Ok(Expr::This)
            }
            Tok::Ident(_) => {
                let mut path = vec![self.ident()?.0];
                let mut last_pos = pos;
                while self.is_sym('.') && matches!(self.peek_at(1), Tok::Ident(_)) {
                    self.bump();
                    let (seg, p) = self.ident()?;
                    path.push(seg);
                    last_pos = p;
                    if self.is_sym('(') {
                        break;
                    }
                }
                if self.is_sym('(') {
                    let method = path.pop().expect("path non-empty");
                    let args = self.args()?;
                    let recv = if path.is_empty() {
                        Receiver::Implicit
                    } else {
                        Receiver::Path(path)
                    };
                    return Ok(Expr::Call {
                        recv,
                        method,
                        args,
                        pos: last_pos,
                    });
                }
                if path.len() > 1 {
                    return Err(FrontendError::Parse {
                        file: self.file.to_string(),
                        line: last_pos.line,
                        col: last_pos.col,
                        message: "field access is only supported as `this.<field>`".into(),
                    });
                }
                Ok(Expr::Var(path.pop().expect("path non-empty"), pos))
            }
            other => self.error(format!("expected expression, found {}", Self::describe(&other))),
        }
    }
}

pub fn parse_file(file: &str, src: &str) -> Result<FileAst, FrontendError> {
    let toks = lex(file, src)?;
    let mut p = Parser { file, toks, at: 0 };
    p.file()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_type_with_members() {
        let src = "package a.b;\n// comment\ntype X extends Y {\n  field f: String;\n  def m(p: String, q: int): String {\n    let t = this.f + p;\n    this.f = q;\n    return helper.run(t).next();\n  }\n}\n";
        let ast = parse_file("x.mini", src).unwrap();
        assert_eq!(ast.package.as_deref(), Some("a.b"));
        let t = &ast.types[0];
        assert_eq!(t.extends.as_ref().unwrap().name, "Y");
        assert_eq!(t.fields.len(), 1);
        let d = &t.defs[0];
        assert_eq!(d.params.len(), 2);
        assert_eq!((d.pos.line, d.end_line), (5, 9));
        assert_eq!(d.body.len(), 3);
    }

    #[test]
    fn error_carries_position() {
        let err = parse_file("bad.mini", "type X {\n  def m( {\n}\n").unwrap_err();
        match err {
            FrontendError::Parse { line, col, .. } => assert_eq!((line, col), (2, 10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_this_field_access_rejected() {
        assert!(parse_file("f.mini", "type X { def m(a: A): A { return a.b; } }").is_err());
    }

    #[test]
    fn qualified_static_call() {
        let ast = parse_file("f.mini", "type X { def m(): void { a.b.C.run(); } }").unwrap();
        match &ast.types[0].defs[0].body[0] {
            Stmt::Expr(Expr::Call {
                recv: Receiver::Path(p),
                method,
                ..
            }) => {
                assert_eq!(p, &["a", "b", "C"]);
                assert_eq!(method, "run");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
