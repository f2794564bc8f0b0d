//! Abstract syntax of surface programs.
//!
//! Top-level statements declare module variables, functions and classes, or
//! evaluate an expression. Function and method bodies are statement blocks
//! with locals, conditionals, `while` loops, `break` and `return`.

/// Source position, 1-based. `Span::default()` (0:0) marks synthesized nodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

/// Surface types as written in annotations.
///
/// Variant order is the canonical order used when normalizing unions: `None`
/// sorts first, then the remaining constructors in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurfaceType {
    None,
    Dyn,
    Int,
    Bool,
    Str,
    Class(String),
    Dict(Box<SurfaceType>, Box<SurfaceType>),
    CheckedDict(Box<SurfaceType>, Box<SurfaceType>),
    Union(Vec<SurfaceType>),
    /// Only produced by normalization; the parser desugars `Optional[S]`
    /// into `Union[None, S]`.
    Optional(Box<SurfaceType>),
}

impl SurfaceType {
    pub fn class(name: impl Into<String>) -> Self {
        SurfaceType::Class(name.into())
    }

    pub fn dict(k: SurfaceType, v: SurfaceType) -> Self {
        SurfaceType::Dict(Box::new(k), Box::new(v))
    }

    pub fn checked_dict(k: SurfaceType, v: SurfaceType) -> Self {
        SurfaceType::CheckedDict(Box::new(k), Box::new(v))
    }

    /// `Optional[s]` in its desugared form.
    pub fn optional(s: SurfaceType) -> Self {
        SurfaceType::Union(vec![SurfaceType::None, s])
    }

    /// Visits every class name mentioned in the type.
    pub fn for_each_class(&self, f: &mut impl FnMut(&str)) {
        match self {
            SurfaceType::Class(c) => f(c),
            SurfaceType::Dict(k, v) | SurfaceType::CheckedDict(k, v) => {
                k.for_each_class(f);
                v.for_each_class(f);
            }
            SurfaceType::Union(items) => items.iter().for_each(|t| t.for_each_class(f)),
            SurfaceType::Optional(t) => t.for_each_class(f),
            _ => {}
        }
    }

    pub fn contains_optional_node(&self) -> bool {
        match self {
            SurfaceType::Optional(_) => true,
            SurfaceType::Dict(k, v) | SurfaceType::CheckedDict(k, v) => {
                k.contains_optional_node() || v.contains_optional_node()
            }
            SurfaceType::Union(items) => items.iter().any(|t| t.contains_optional_node()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub stmts: Vec<TopStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopStmt {
    Var(VarDef),
    /// Reassignment of an existing module variable; always rejected by the
    /// checker since module variables are immutable.
    Assign {
        name: String,
        value: Expr,
        span: Span,
    },
    Func(FuncDef),
    Class(ClassDef),
    Expr(Expr),
}

impl TopStmt {
    pub fn span(&self) -> Span {
        match self {
            TopStmt::Var(v) => v.span,
            TopStmt::Assign { span, .. } => *span,
            TopStmt::Func(f) => f.span,
            TopStmt::Class(c) => c.span,
            TopStmt::Expr(e) => e.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDef {
    pub name: String,
    pub ann: SurfaceType,
    pub init: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ann: SurfaceType,
}

/// A function, or a method when it appears inside a [`ClassDef`]. For methods
/// `param` excludes the receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub param: Option<Param>,
    pub ret: SurfaceType,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ann: SurfaceType,
    pub default: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub parent: String,
    /// Set for `dyn class`: the class belongs to untyped code.
    pub dynamic: bool,
    pub field: Option<FieldDef>,
    pub methods: Vec<FuncDef>,
    pub span: Span,
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    LocalDef {
        name: String,
        ann: Option<SurfaceType>,
        init: Expr,
    },
    Assign {
        name: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then: Block,
        els: Block,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Break,
    Pass,
    Return(Option<Expr>),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    NoneLit,
    IntLit(i64),
    BoolLit(bool),
    StrLit(String),
    Call(String, Vec<Expr>),
    DictLit(Vec<(Expr, Expr)>),
    ChkDictLit(SurfaceType, SurfaceType, Vec<(Expr, Expr)>),
    Subscript(Box<Expr>, Box<Expr>),
    SubscriptSet(Box<Expr>, Box<Expr>, Box<Expr>),
    New(String, Vec<Expr>),
    FieldGet(Box<Expr>, String),
    FieldSet(Box<Expr>, String, Box<Expr>),
    MethodCall(Box<Expr>, String, Vec<Expr>),
    IsNone(Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn at(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Calls `f` on this expression and every subexpression, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Var(_)
            | ExprKind::NoneLit
            | ExprKind::IntLit(_)
            | ExprKind::BoolLit(_)
            | ExprKind::StrLit(_) => {}
            ExprKind::Call(_, args) | ExprKind::New(_, args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::DictLit(entries) | ExprKind::ChkDictLit(_, _, entries) => {
                for (k, v) in entries {
                    k.walk(f);
                    v.walk(f);
                }
            }
            ExprKind::Subscript(a, b) | ExprKind::Eq(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::SubscriptSet(a, b, c) => {
                a.walk(f);
                b.walk(f);
                c.walk(f);
            }
            ExprKind::FieldGet(a, _) | ExprKind::IsNone(a) | ExprKind::Not(a) => a.walk(f),
            ExprKind::FieldSet(a, _, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::MethodCall(r, _, args) => {
                r.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
        }
    }

    pub(crate) fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::Var(_)
            | ExprKind::NoneLit
            | ExprKind::IntLit(_)
            | ExprKind::BoolLit(_)
            | ExprKind::StrLit(_) => {}
            ExprKind::Call(_, args) | ExprKind::New(_, args) => {
                args.iter_mut().for_each(|a| a.walk_mut(f))
            }
            ExprKind::DictLit(entries) | ExprKind::ChkDictLit(_, _, entries) => {
                for (k, v) in entries {
                    k.walk_mut(f);
                    v.walk_mut(f);
                }
            }
            ExprKind::Subscript(a, b) | ExprKind::Eq(a, b) | ExprKind::FieldSet(a, _, b) => {
                a.walk_mut(f);
                b.walk_mut(f);
            }
            ExprKind::SubscriptSet(a, b, c) => {
                a.walk_mut(f);
                b.walk_mut(f);
                c.walk_mut(f);
            }
            ExprKind::FieldGet(a, _) | ExprKind::IsNone(a) | ExprKind::Not(a) => a.walk_mut(f),
            ExprKind::MethodCall(r, _, args) => {
                r.walk_mut(f);
                args.iter_mut().for_each(|a| a.walk_mut(f));
            }
        }
    }
}

impl SurfaceProgram {
    /// Resets every span to `Span::default()`, so programs can be compared
    /// structurally.
    pub fn clear_spans(&mut self) {
        fn block(b: &mut Block) {
            for s in b {
                s.span = Span::default();
                match &mut s.kind {
                    StmtKind::LocalDef { init: e, .. }
                    | StmtKind::Assign { value: e, .. }
                    | StmtKind::Expr(e)
                    | StmtKind::Return(Some(e)) => clear_expr(e),
                    StmtKind::If { cond, then, els } => {
                        clear_expr(cond);
                        block(then);
                        block(els);
                    }
                    StmtKind::While { cond, body } => {
                        clear_expr(cond);
                        block(body);
                    }
                    StmtKind::Break | StmtKind::Pass | StmtKind::Return(None) => {}
                }
            }
        }
        fn clear_expr(e: &mut Expr) {
            e.walk_mut(&mut |e| e.span = Span::default());
        }
        fn func(f: &mut FuncDef) {
            f.span = Span::default();
            block(&mut f.body);
        }
        for s in &mut self.stmts {
            match s {
                TopStmt::Var(v) => {
                    v.span = Span::default();
                    clear_expr(&mut v.init);
                }
                TopStmt::Assign { value, span, .. } => {
                    *span = Span::default();
                    clear_expr(value);
                }
                TopStmt::Func(f) => func(f),
                TopStmt::Class(c) => {
                    c.span = Span::default();
                    if let Some(fd) = &mut c.field {
                        fd.span = Span::default();
                        clear_expr(&mut fd.default);
                    }
                    c.methods.iter_mut().for_each(func);
                }
                TopStmt::Expr(e) => clear_expr(e),
            }
        }
    }

    /// Calls `f` on every expression in the program.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        fn block<'a>(b: &'a Block, f: &mut impl FnMut(&'a Expr)) {
            for s in b {
                match &s.kind {
                    StmtKind::LocalDef { init: e, .. }
                    | StmtKind::Assign { value: e, .. }
                    | StmtKind::Expr(e)
                    | StmtKind::Return(Some(e)) => e.walk(f),
                    StmtKind::If { cond, then, els } => {
                        cond.walk(f);
                        block(then, f);
                        block(els, f);
                    }
                    StmtKind::While { cond, body } => {
                        cond.walk(f);
                        block(body, f);
                    }
                    StmtKind::Break | StmtKind::Pass | StmtKind::Return(None) => {}
                }
            }
        }
        for s in &self.stmts {
            match s {
                TopStmt::Var(v) => v.init.walk(f),
                TopStmt::Assign { value, .. } => value.walk(f),
                TopStmt::Func(fd) => block(&fd.body, f),
                TopStmt::Class(c) => {
                    if let Some(fd) = &c.field {
                        fd.default.walk(f);
                    }
                    for m in &c.methods {
                        block(&m.body, f);
                    }
                }
                TopStmt::Expr(e) => e.walk(f),
            }
        }
    }

    /// Every annotation in the program, including local annotations and
    /// checked-dict type arguments.
    pub fn annotations(&self) -> Vec<&SurfaceType> {
        fn block<'a>(b: &'a Block, out: &mut Vec<&'a SurfaceType>) {
            for s in b {
                match &s.kind {
                    StmtKind::LocalDef { ann: Some(t), .. } => out.push(t),
                    StmtKind::If { then, els, .. } => {
                        block(then, out);
                        block(els, out);
                    }
                    StmtKind::While { body, .. } => block(body, out),
                    _ => {}
                }
            }
        }
        fn func<'a>(f: &'a FuncDef, out: &mut Vec<&'a SurfaceType>) {
            if let Some(p) = &f.param {
                out.push(&p.ann);
            }
            out.push(&f.ret);
            block(&f.body, out);
        }
        let mut out = Vec::new();
        for s in &self.stmts {
            match s {
                TopStmt::Var(v) => out.push(&v.ann),
                TopStmt::Func(f) => func(f, &mut out),
                TopStmt::Class(c) => {
                    if let Some(fd) = &c.field {
                        out.push(&fd.ann);
                    }
                    c.methods.iter().for_each(|m| func(m, &mut out));
                }
                TopStmt::Assign { .. } | TopStmt::Expr(_) => {}
            }
        }
        self.walk_exprs(&mut |e| {
            if let ExprKind::ChkDictLit(k, v, _) = &e.kind {
                out.push(k);
                out.push(v);
            }
        });
        out
    }

    pub fn uses_checked_dicts(&self) -> bool {
        let mut found = false;
        self.walk_exprs(&mut |e| {
            if matches!(e.kind, ExprKind::ChkDictLit(..)) {
                found = true;
            }
        });
        found
    }
}
