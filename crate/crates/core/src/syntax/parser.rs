//! Recursive descent parser for `.gsp` source.
//!
//! Parsing happens in two steps. The first builds the tree directly from the
//! token stream and stops at the first syntax error. The second resolves
//! names: it turns `x = e` into a local definition when `x` is not yet bound,
//! turns calls of class names into `New`, and reports `break` outside a loop
//! and reads of names that are not defined yet.

use std::collections::{HashMap, HashSet};

use crate::diag::{Code, Diagnostic};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};

pub type ParseResult<T> = Result<T, Diagnostic>;

/// Parses a whole program. On failure returns every syntax diagnostic found.
pub fn parse(src: &str) -> Result<SurfaceProgram, Vec<Diagnostic>> {
    let tokens = tokenize(src).map_err(|d| vec![d])?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        top_vars: HashSet::new(),
    };
    let mut prog = parser.program().map_err(|d| vec![d])?;
    let diags = resolve(&mut prog);
    if diags.is_empty() {
        Ok(prog)
    } else {
        Err(diags)
    }
}

/// Parses a single type annotation such as `CheckedDict[str, Optional[int]]`.
pub fn parse_type(src: &str) -> Result<SurfaceType, Diagnostic> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        top_vars: HashSet::new(),
    };
    let t = parser.ty()?;
    while parser.at(&Tok::Newline) {
        parser.bump();
    }
    if !parser.at(&Tok::Eof) {
        return Err(parser.unexpected("end of type"));
    }
    Ok(t)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Module variables declared so far, to tell `x = e` definitions from
    /// reassignments at the top level.
    top_vars: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> ParseResult<Span> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::new(
            Code::Syntax,
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn error(&self, span: Span, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(Code::Syntax, span, msg)
    }

    fn ident(&mut self) -> ParseResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// `from M import N, ...` lines are accepted so listings written for
    /// Python run unchanged; they have no effect.
    fn skip_import(&mut self) -> ParseResult<bool> {
        let is_import = matches!(self.peek(), Tok::Ident(w) if w == "from")
            && matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Ident(w) if w == "import");
        if !is_import {
            return Ok(false);
        }
        self.pos += 3;
        self.ident()?;
        while self.eat(&Tok::Comma) {
            self.ident()?;
        }
        self.expect(Tok::Newline)?;
        Ok(true)
    }

    fn program(&mut self) -> ParseResult<SurfaceProgram> {
        let mut stmts = Vec::new();
        loop {
            while self.eat(&Tok::Newline) {}
            if self.at(&Tok::Eof) {
                break;
            }
            if self.skip_import()? {
                continue;
            }
            stmts.push(self.top_stmt()?);
        }
        Ok(SurfaceProgram { stmts })
    }

    fn top_stmt(&mut self) -> ParseResult<TopStmt> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Def => Ok(TopStmt::Func(self.func_def(false)?)),
            Tok::Class => Ok(TopStmt::Class(self.class_def(false)?)),
            Tok::Dyn if self.peek_at(1) == &Tok::Class => {
                self.bump();
                Ok(TopStmt::Class(self.class_def(true)?))
            }
            Tok::Break => Err(self.error(span, "break outside loop")),
            Tok::If | Tok::While | Tok::Return | Tok::Pass | Tok::Elif | Tok::Else => Err(
                self.error(span, format!("{} is not allowed at module level", self.peek().describe())),
            ),
            Tok::Indent => Err(self.error(span, "unexpected indent")),
            Tok::Ident(name) if self.peek_at(1) == &Tok::Colon => {
                self.bump();
                self.bump();
                let ann = self.ty()?;
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                self.expect(Tok::Newline)?;
                self.top_vars.insert(name.clone());
                Ok(TopStmt::Var(VarDef {
                    name,
                    ann,
                    init,
                    span,
                }))
            }
            _ => {
                let target = self.expr()?;
                if self.eat(&Tok::Assign) {
                    let value = self.expr()?;
                    self.expect(Tok::Newline)?;
                    match target.kind {
                        ExprKind::Var(name) => {
                            if self.top_vars.contains(&name) {
                                Ok(TopStmt::Assign { name, value, span })
                            } else {
                                self.top_vars.insert(name.clone());
                                Ok(TopStmt::Var(VarDef {
                                    name,
                                    ann: SurfaceType::Dyn,
                                    init: value,
                                    span,
                                }))
                            }
                        }
                        other => Ok(TopStmt::Expr(assign_to(other, value, span).map_err(
                            |m| self.error(span, m),
                        )?)),
                    }
                } else {
                    self.expect(Tok::Newline)?;
                    Ok(TopStmt::Expr(target))
                }
            }
        }
    }

    fn func_def(&mut self, is_method: bool) -> ParseResult<FuncDef> {
        let span = self.expect(Tok::Def)?;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        if is_method {
            let s = self.span();
            match self.peek() {
                Tok::Ident(n) if n == "self" => {
                    self.bump();
                }
                _ => return Err(self.error(s, "methods must take `self` as their first parameter")),
            }
            if !self.at(&Tok::RParen) {
                self.expect(Tok::Comma)?;
            }
        }
        let param = if let Tok::Ident(pname) = self.peek().clone() {
            self.bump();
            let ann = if self.eat(&Tok::Colon) {
                self.ty()?
            } else {
                SurfaceType::Dyn
            };
            Some(Param { name: pname, ann })
        } else {
            None
        };
        if self.at(&Tok::Comma) {
            return Err(self.error(
                self.span(),
                "functions take at most one parameter (methods: one besides `self`)",
            ));
        }
        self.expect(Tok::RParen)?;
        let ret = if self.eat(&Tok::Arrow) {
            self.ty()?
        } else {
            SurfaceType::Dyn
        };
        self.expect(Tok::Colon)?;
        let body = self.block()?;
        Ok(FuncDef {
            name,
            param,
            ret,
            body,
            span,
        })
    }

    fn class_def(&mut self, dynamic: bool) -> ParseResult<ClassDef> {
        let span = self.expect(Tok::Class)?;
        let name = self.ident()?;
        let parent = if self.eat(&Tok::LParen) {
            let p = self.ident()?;
            self.expect(Tok::RParen)?;
            p
        } else {
            "object".to_string()
        };
        self.expect(Tok::Colon)?;
        self.expect(Tok::Newline)?;
        self.expect(Tok::Indent)?;
        let mut field: Option<FieldDef> = None;
        let mut methods = Vec::new();
        loop {
            while self.eat(&Tok::Newline) {}
            let s = self.span();
            match self.peek().clone() {
                Tok::Dedent => {
                    self.bump();
                    break;
                }
                Tok::Eof => break,
                Tok::Pass => {
                    self.bump();
                    self.expect(Tok::Newline)?;
                }
                Tok::Def => methods.push(self.func_def(true)?),
                Tok::Ident(fname) => {
                    self.bump();
                    let ann = if self.eat(&Tok::Colon) {
                        self.ty()?
                    } else {
                        SurfaceType::Dyn
                    };
                    if !self.at(&Tok::Assign) {
                        return Err(self.error(s, "class fields need a default value"));
                    }
                    self.bump();
                    let default = self.expr()?;
                    self.expect(Tok::Newline)?;
                    if field.is_some() {
                        return Err(self.error(s, "a class declares at most one field"));
                    }
                    field = Some(FieldDef {
                        name: fname,
                        ann,
                        default,
                        span: s,
                    });
                }
                _ => return Err(self.unexpected("field, method or `pass`")),
            }
        }
        Ok(ClassDef {
            name,
            parent,
            dynamic,
            field,
            methods,
            span,
        })
    }

    fn block(&mut self) -> ParseResult<Block> {
        self.expect(Tok::Newline)?;
        while self.eat(&Tok::Newline) {}
        self.expect(Tok::Indent)?;
        let mut stmts = Vec::new();
        loop {
            while self.eat(&Tok::Newline) {}
            if self.eat(&Tok::Dedent) || self.at(&Tok::Eof) {
                break;
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> ParseResult<Stmt> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::If => return self.if_stmt(),
            Tok::While => {
                self.bump();
                let cond = self.expr()?;
                self.expect(Tok::Colon)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Break => {
                self.bump();
                self.expect(Tok::Newline)?;
                StmtKind::Break
            }
            Tok::Pass => {
                self.bump();
                self.expect(Tok::Newline)?;
                StmtKind::Pass
            }
            Tok::Return => {
                self.bump();
                let value = if self.at(&Tok::Newline) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Newline)?;
                StmtKind::Return(value)
            }
            Tok::Def | Tok::Class | Tok::Dyn => {
                return Err(self.error(span, "definitions are only allowed at module level"))
            }
            Tok::Elif | Tok::Else => return Err(self.unexpected("statement")),
            Tok::Ident(name) if self.peek_at(1) == &Tok::Colon => {
                self.bump();
                self.bump();
                let ann = self.ty()?;
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                self.expect(Tok::Newline)?;
                StmtKind::LocalDef {
                    name,
                    ann: Some(ann),
                    init,
                }
            }
            _ => {
                let target = self.expr()?;
                if self.eat(&Tok::Assign) {
                    let value = self.expr()?;
                    self.expect(Tok::Newline)?;
                    match target.kind {
                        ExprKind::Var(name) => StmtKind::Assign { name, value },
                        other => StmtKind::Expr(
                            assign_to(other, value, span).map_err(|m| self.error(span, m))?,
                        ),
                    }
                } else {
                    self.expect(Tok::Newline)?;
                    StmtKind::Expr(target)
                }
            }
        };
        Ok(Stmt { kind, span })
    }

    fn if_stmt(&mut self) -> ParseResult<Stmt> {
        // Called at `if` or `elif`.
        let span = self.bump().span;
        let cond = self.expr()?;
        self.expect(Tok::Colon)?;
        let then = self.block()?;
        let els = if self.at(&Tok::Elif) {
            vec![self.if_stmt()?]
        } else if self.eat(&Tok::Else) {
            self.expect(Tok::Colon)?;
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            kind: StmtKind::If { cond, then, els },
            span,
        })
    }

    fn expr(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        if self.eat(&Tok::Not) {
            let inner = self.expr()?;
            return Ok(Expr::at(ExprKind::Not(Box::new(inner)), span));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        let lhs = self.postfix()?;
        let e = if self.eat(&Tok::EqEq) {
            let rhs = self.postfix()?;
            Expr::at(ExprKind::Eq(Box::new(lhs), Box::new(rhs)), span)
        } else if self.eat(&Tok::Is) {
            let negated = self.eat(&Tok::Not);
            self.expect(Tok::None)?;
            let is_none = Expr::at(ExprKind::IsNone(Box::new(lhs)), span);
            if negated {
                Expr::at(ExprKind::Not(Box::new(is_none)), span)
            } else {
                is_none
            }
        } else {
            return Ok(lhs);
        };
        if self.at(&Tok::EqEq) || self.at(&Tok::Is) {
            return Err(self.error(self.span(), "comparisons cannot be chained"));
        }
        Ok(e)
    }

    fn postfix(&mut self) -> ParseResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let span = self.span();
            if self.eat(&Tok::LBracket) {
                let key = self.expr()?;
                self.expect(Tok::RBracket)?;
                e = Expr::at(ExprKind::Subscript(Box::new(e), Box::new(key)), span);
            } else if self.eat(&Tok::Dot) {
                let name = self.ident()?;
                if self.at(&Tok::LParen) {
                    let args = self.args()?;
                    e = Expr::at(ExprKind::MethodCall(Box::new(e), name, args), span);
                } else {
                    e = Expr::at(ExprKind::FieldGet(Box::new(e), name), span);
                }
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> ParseResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        while !self.at(&Tok::RParen) {
            args.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn dict_entries(&mut self) -> ParseResult<Vec<(Expr, Expr)>> {
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        while !self.at(&Tok::RBrace) {
            let k = self.expr()?;
            self.expect(Tok::Colon)?;
            let v = self.expr()?;
            entries.push((k, v));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(entries)
    }

    fn primary(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                ExprKind::IntLit(i)
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::StrLit(s)
            }
            Tok::True => {
                self.bump();
                ExprKind::BoolLit(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::BoolLit(false)
            }
            Tok::None => {
                self.bump();
                ExprKind::NoneLit
            }
            Tok::LParen => {
                self.bump();
                let mut inner = self.expr()?;
                self.expect(Tok::RParen)?;
                inner.span = span;
                return Ok(inner);
            }
            Tok::LBrace => ExprKind::DictLit(self.dict_entries()?),
            Tok::Ident(name) if name == "CheckedDict" && self.peek_at(1) == &Tok::LBracket => {
                self.bump();
                self.bump();
                let k = self.ty()?;
                self.expect(Tok::Comma)?;
                let v = self.ty()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::LParen)?;
                let entries = self.dict_entries()?;
                self.expect(Tok::RParen)?;
                ExprKind::ChkDictLit(k, v, entries)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at(&Tok::LParen) {
                    ExprKind::Call(name, self.args()?)
                } else {
                    ExprKind::Var(name)
                }
            }
            _ => return Err(self.unexpected("expression")),
        };
        Ok(Expr::at(kind, span))
    }

    fn ty(&mut self) -> ParseResult<SurfaceType> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Dyn => {
                self.bump();
                Ok(SurfaceType::Dyn)
            }
            Tok::None => {
                self.bump();
                Ok(SurfaceType::None)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "dynamic" => Ok(SurfaceType::Dyn),
                    "int" => Ok(SurfaceType::Int),
                    "bool" => Ok(SurfaceType::Bool),
                    "str" => Ok(SurfaceType::Str),
                    "Dict" | "CheckedDict" => {
                        self.expect(Tok::LBracket)?;
                        let k = self.ty()?;
                        self.expect(Tok::Comma)?;
                        let v = self.ty()?;
                        self.expect(Tok::RBracket)?;
                        Ok(if name == "Dict" {
                            SurfaceType::dict(k, v)
                        } else {
                            SurfaceType::checked_dict(k, v)
                        })
                    }
                    "Optional" => {
                        self.expect(Tok::LBracket)?;
                        let t = self.ty()?;
                        self.expect(Tok::RBracket)?;
                        Ok(SurfaceType::optional(t))
                    }
                    "Union" => {
                        self.expect(Tok::LBracket)?;
                        let mut items = vec![self.ty()?];
                        while self.eat(&Tok::Comma) {
                            items.push(self.ty()?);
                        }
                        self.expect(Tok::RBracket)?;
                        Ok(SurfaceType::Union(items))
                    }
                    _ => Ok(SurfaceType::Class(name)),
                }
            }
            _ => Err(Diagnostic::new(
                Code::Syntax,
                span,
                format!("expected type, found {}", self.peek().describe()),
            )),
        }
    }
}

fn assign_to(target: ExprKind, value: Expr, span: Span) -> Result<Expr, String> {
    let kind = match target {
        ExprKind::FieldGet(recv, name) => ExprKind::FieldSet(recv, name, Box::new(value)),
        ExprKind::Subscript(recv, key) => ExprKind::SubscriptSet(recv, key, Box::new(value)),
        _ => return Err("invalid assignment target".into()),
    };
    Ok(Expr::at(kind, span))
}

struct Globals {
    vars: HashSet<String>,
    funcs: HashSet<String>,
    classes: HashSet<String>,
}

impl Globals {
    fn defines(&self, name: &str) -> bool {
        name == "object"
            || self.vars.contains(name)
            || self.funcs.contains(name)
            || self.classes.contains(name)
    }
}

type Scopes = Vec<Vec<String>>;

fn in_scope(scopes: &Scopes, name: &str) -> bool {
    scopes.iter().any(|s| s.iter().any(|n| n == name))
}

fn resolve(prog: &mut SurfaceProgram) -> Vec<Diagnostic> {
    let mut g = Globals {
        vars: HashSet::new(),
        funcs: HashSet::new(),
        classes: HashSet::new(),
    };
    for s in &prog.stmts {
        match s {
            TopStmt::Var(v) => {
                g.vars.insert(v.name.clone());
            }
            TopStmt::Func(f) => {
                g.funcs.insert(f.name.clone());
            }
            TopStmt::Class(c) => {
                g.classes.insert(c.name.clone());
            }
            TopStmt::Assign { .. } | TopStmt::Expr(_) => {}
        }
    }

    let mut diags = Vec::new();
    // Methods visible on each class declared so far, including inherited ones.
    let mut class_methods: HashMap<String, HashSet<String>> = HashMap::new();
    class_methods.insert("object".into(), HashSet::new());

    // Module variables initialized so far, for top-level code that runs in
    // order.
    let mut initialized: HashSet<String> = HashSet::new();
    for s in &mut prog.stmts {
        match s {
            TopStmt::Var(v) => {
                resolve_top(&mut v.init, &g, &initialized, &mut diags);
                initialized.insert(v.name.clone());
            }
            TopStmt::Assign { value, .. } => resolve_top(value, &g, &initialized, &mut diags),
            TopStmt::Expr(e) => resolve_top(e, &g, &initialized, &mut diags),
            TopStmt::Func(f) => {
                let scopes = vec![f.param.iter().map(|p| p.name.clone()).collect()];
                resolve_block(&mut f.body, scopes, 0, &g, &mut diags);
            }
            TopStmt::Class(c) => {
                if let Some(field) = &mut c.field {
                    resolve_expr(&mut field.default, &Vec::new(), &g, &mut diags);
                }
                for m in &mut c.methods {
                    let mut frame = vec!["self".to_string()];
                    frame.extend(m.param.iter().map(|p| p.name.clone()));
                    resolve_block(&mut m.body, vec![frame], 0, &g, &mut diags);
                }
                if let Some(inherited) = class_methods.get(&c.parent).cloned() {
                    let fresh: Vec<&FuncDef> = c
                        .methods
                        .iter()
                        .filter(|m| !inherited.contains(&m.name))
                        .collect();
                    let mut names: Vec<&str> = fresh.iter().map(|m| m.name.as_str()).collect();
                    names.sort_unstable();
                    names.dedup();
                    if names.len() > 1 {
                        diags.push(Diagnostic::new(
                            Code::Syntax,
                            c.span,
                            format!(
                                "class `{}` introduces more than one new method ({})",
                                c.name,
                                names.join(", ")
                            ),
                        ));
                    }
                    let mut all = inherited;
                    all.extend(c.methods.iter().map(|m| m.name.clone()));
                    class_methods.insert(c.name.clone(), all);
                }
            }
        }
    }
    diags
}

fn resolve_block(
    block: &mut Block,
    mut scopes: Scopes,
    loops: usize,
    g: &Globals,
    diags: &mut Vec<Diagnostic>,
) {
    scopes.push(Vec::new());
    for stmt in block.iter_mut() {
        let span = stmt.span;
        match &mut stmt.kind {
            StmtKind::LocalDef { name, init, .. } => {
                resolve_expr(init, &scopes, g, diags);
                scopes.last_mut().unwrap().push(name.clone());
            }
            StmtKind::Assign { name, value } => {
                resolve_expr(value, &scopes, g, diags);
                if !in_scope(&scopes, name) && !g.vars.contains(name.as_str()) {
                    let name = name.clone();
                    scopes.last_mut().unwrap().push(name.clone());
                    let StmtKind::Assign { value, .. } =
                        std::mem::replace(&mut stmt.kind, StmtKind::Pass)
                    else {
                        unreachable!()
                    };
                    stmt.kind = StmtKind::LocalDef {
                        name,
                        ann: None,
                        init: value,
                    };
                }
            }
            StmtKind::If { cond, then, els } => {
                resolve_expr(cond, &scopes, g, diags);
                resolve_block(then, scopes.clone(), loops, g, diags);
                resolve_block(els, scopes.clone(), loops, g, diags);
            }
            StmtKind::While { cond, body } => {
                resolve_expr(cond, &scopes, g, diags);
                resolve_block(body, scopes.clone(), loops + 1, g, diags);
            }
            StmtKind::Break => {
                if loops == 0 {
                    diags.push(Diagnostic::new(Code::Syntax, span, "break outside loop"));
                }
            }
            StmtKind::Pass | StmtKind::Return(None) => {}
            StmtKind::Return(Some(e)) | StmtKind::Expr(e) => resolve_expr(e, &scopes, g, diags),
        }
    }
}

fn resolve_top(
    e: &mut Expr,
    g: &Globals,
    initialized: &HashSet<String>,
    diags: &mut Vec<Diagnostic>,
) {
    resolve_expr(e, &Vec::new(), g, diags);
    e.walk(&mut |e| {
        if let ExprKind::Var(name) = &e.kind {
            if g.vars.contains(name) && !initialized.contains(name) {
                diags.push(Diagnostic::new(
                    Code::Syntax,
                    e.span,
                    format!("name `{name}` is used before it is defined"),
                ));
            }
        }
    });
}

fn resolve_expr(e: &mut Expr, scopes: &Scopes, g: &Globals, diags: &mut Vec<Diagnostic>) {
    e.walk_mut(&mut |e| match &mut e.kind {
        ExprKind::Var(name) => {
            if !in_scope(scopes, name) && !g.defines(name) {
                diags.push(Diagnostic::new(
                    Code::Syntax,
                    e.span,
                    format!("name `{name}` is used before it is defined"),
                ));
            }
        }
        ExprKind::Call(name, args)
            if !in_scope(scopes, name) && (g.classes.contains(name.as_str()) || name == "object") =>
        {
            e.kind = ExprKind::New(std::mem::take(name), std::mem::take(args));
        }
        _ => {}
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> SurfaceProgram {
        let mut prog = parse(src).unwrap_or_else(|d| panic!("{d:?}"));
        prog.clear_spans();
        prog
    }

    fn err(src: &str) -> Vec<Diagnostic> {
        parse(src).unwrap_err()
    }

    #[test]
    fn first_listing_parses() {
        let prog = p("def f(x):\n    return x[\"A\"]\n\nf({\"A\": 1})\n");
        assert_eq!(prog.stmts.len(), 2);
        let TopStmt::Func(f) = &prog.stmts[0] else {
            panic!()
        };
        assert_eq!(f.name, "f");
        assert_eq!(
            f.param,
            Some(Param {
                name: "x".into(),
                ann: SurfaceType::Dyn
            })
        );
        assert_eq!(f.ret, SurfaceType::Dyn);
        let TopStmt::Expr(call) = &prog.stmts[1] else {
            panic!()
        };
        let ExprKind::Call(name, args) = &call.kind else {
            panic!()
        };
        assert_eq!(name, "f");
        assert!(matches!(args[0].kind, ExprKind::DictLit(ref e) if e.len() == 1));
    }

    #[test]
    fn empty_file() {
        assert_eq!(p("").stmts.len(), 0);
        assert_eq!(p("\n\n# nothing\n").stmts.len(), 0);
    }

    #[test]
    fn break_outside_loop() {
        let d = err("break\n");
        assert_eq!(d[0].message, "break outside loop");
        let d = err("def f():\n    if True:\n        break\n");
        assert_eq!(d[0].message, "break outside loop");
        assert_eq!(d[0].span.line, 3);
        p("def f():\n    while True:\n        if True:\n            break\n");
    }

    #[test]
    fn optional_is_desugared() {
        let t = parse_type("Optional[Optional[str]]").unwrap();
        assert_eq!(
            t,
            SurfaceType::optional(SurfaceType::optional(SurfaceType::Str))
        );
        assert!(!t.contains_optional_node());
        assert_eq!(
            parse_type("CheckedDict[str, dynamic]").unwrap(),
            SurfaceType::checked_dict(SurfaceType::Str, SurfaceType::Dyn)
        );
        assert!(parse_type("Union[]").is_err());
    }

    #[test]
    fn assignment_resolution() {
        let prog = p("def f(x):\n    y = 1\n    y = 2\n    x = 3\n");
        let TopStmt::Func(f) = &prog.stmts[0] else {
            panic!()
        };
        assert!(matches!(&f.body[0].kind, StmtKind::LocalDef { ann: None, .. }));
        assert!(matches!(&f.body[1].kind, StmtKind::Assign { .. }));
        assert!(matches!(&f.body[2].kind, StmtKind::Assign { .. }));

        // Module variables stay reassignments so the checker can reject them.
        let prog = p("g = 1\ng = 2\ndef f():\n    g = 3\n");
        assert!(matches!(prog.stmts[1], TopStmt::Assign { .. }));
        let TopStmt::Func(f) = &prog.stmts[2] else {
            panic!()
        };
        assert!(matches!(&f.body[0].kind, StmtKind::Assign { .. }));
    }

    #[test]
    fn use_before_def() {
        let d = err("def f():\n    return y\n");
        assert!(d[0].message.contains("`y`"));
        // Block scoping: a local from an inner block is gone afterwards.
        assert!(parse("def f():\n    if True:\n        y = 1\n    return y\n").is_err());
        // Forward references to module-level names are fine.
        p("def f():\n    return g(h)\ndef g(x):\n    return x\nh = 1\n");
    }

    #[test]
    fn class_calls_become_new() {
        let prog = p("class A:\n    x: int = 0\nA(1)\nobject()\n");
        let TopStmt::Expr(e) = &prog.stmts[1] else {
            panic!()
        };
        assert!(matches!(&e.kind, ExprKind::New(c, a) if c == "A" && a.len() == 1));
        let TopStmt::Expr(e) = &prog.stmts[2] else {
            panic!()
        };
        assert!(matches!(&e.kind, ExprKind::New(c, _) if c == "object"));
    }

    #[test]
    fn class_shapes() {
        let prog = p("class A:\n    def m(self) -> int:\n        return 0\ndyn class B(A):\n    def m(self):\n        return 0\n");
        let TopStmt::Class(b) = &prog.stmts[1] else {
            panic!()
        };
        assert!(b.dynamic);
        assert_eq!(b.parent, "A");
        assert!(b.field.is_none());
        assert!(b.methods[0].param.is_none());
        assert!(err("class A:\n    x: int = 0\n    y: int = 1\n")[0]
            .message
            .contains("at most one field"));
        assert!(err("class A:\n    def m(self):\n        pass\n    def n(self):\n        pass\n")[0]
            .message
            .contains("more than one new method"));
        assert!(err("class A:\n    def m(x):\n        pass\n")[0]
            .message
            .contains("self"));
        assert!(err("def f(a, b):\n    pass\n")[0].message.contains("at most one"));
    }

    #[test]
    fn expression_forms() {
        let prog = p("d = {}\nnot d[1].x.m(2) is None\nd == -3\nd is not None\n");
        let TopStmt::Expr(e) = &prog.stmts[1] else {
            panic!()
        };
        let ExprKind::Not(inner) = &e.kind else {
            panic!()
        };
        assert!(matches!(inner.kind, ExprKind::IsNone(_)));
        assert!(err("d = 1\nd == d == d\n")[0].message.contains("chained"));
        let TopStmt::Expr(e) = &prog.stmts[3] else {
            panic!()
        };
        assert!(matches!(&e.kind, ExprKind::Not(i) if matches!(i.kind, ExprKind::IsNone(_))));
    }

    #[test]
    fn set_forms_and_bad_targets() {
        let prog = p("d = {}\nd[1] = 2\nd.x = 3\n");
        assert!(matches!(&prog.stmts[1], TopStmt::Expr(e) if matches!(e.kind, ExprKind::SubscriptSet(..))));
        assert!(matches!(&prog.stmts[2], TopStmt::Expr(e) if matches!(e.kind, ExprKind::FieldSet(..))));
        assert!(err("1 = 2\n")[0].message.contains("invalid assignment target"));
    }

    #[test]
    fn elif_chains_nest() {
        let prog = p("def f(x):\n    if x:\n        return 1\n    elif x:\n        return 2\n    else:\n        return 3\n");
        let TopStmt::Func(f) = &prog.stmts[0] else {
            panic!()
        };
        let StmtKind::If { els, .. } = &f.body[0].kind else {
            panic!()
        };
        assert!(matches!(&els[0].kind, StmtKind::If { els, .. } if els.len() == 1));
    }
}
