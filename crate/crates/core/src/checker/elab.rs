//! The cast-annotated program produced by the checker.

use crate::syntax::Span;
use crate::types::{EvalType, TypeEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CallKind {
    /// Typed callee, every argument a subtype of its parameter: the callee's
    /// argument checks may be skipped.
    StaticStrict,
    /// Typed callee, but acceptance went through `Dyn`.
    StaticLenient,
    /// Untyped callee or untyped caller.
    Dynamic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    None,
    Int(i64),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElabExpr {
    pub kind: ElabKind,
    pub ty: EvalType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElabKind {
    Const(Lit),
    Local(usize),
    Global(String),
    /// Run-time check at a materialization site. The inner expression has
    /// type `Dyn` and the target is never `Dyn`.
    Cast(EvalType, Box<ElabExpr>),
    CallFunc {
        func: String,
        kind: CallKind,
        args: Vec<ElabExpr>,
    },
    /// Call of a function by name from untyped code, or of an untyped
    /// function.
    CallByName {
        func: String,
        args: Vec<ElabExpr>,
    },
    /// Call of a `Dyn`-typed value. Values are never callable, so this
    /// always fails at run time.
    CallValue {
        callee: Box<ElabExpr>,
        args: Vec<ElabExpr>,
    },
    DictLit(Vec<(ElabExpr, ElabExpr)>),
    ChkDictLit {
        key: EvalType,
        val: EvalType,
        entries: Vec<(ElabExpr, ElabExpr)>,
    },
    Subscript {
        recv: Box<ElabExpr>,
        key: Box<ElabExpr>,
    },
    SubscriptSet {
        recv: Box<ElabExpr>,
        key: Box<ElabExpr>,
        val: Box<ElabExpr>,
        guarded: bool,
    },
    /// Allocates an instance. `arg` initializes the last field slot; every
    /// other slot gets its default.
    New {
        class: String,
        arg: Option<Box<ElabExpr>>,
    },
    FieldGet {
        recv: Box<ElabExpr>,
        class: String,
        slot: usize,
    },
    FieldSet {
        recv: Box<ElabExpr>,
        class: String,
        slot: usize,
        val: Box<ElabExpr>,
    },
    AttrGet {
        recv: Box<ElabExpr>,
        name: String,
    },
    AttrSet {
        recv: Box<ElabExpr>,
        name: String,
        val: Box<ElabExpr>,
    },
    MethodCall {
        recv: Box<ElabExpr>,
        class: String,
        slot: usize,
        kind: CallKind,
        args: Vec<ElabExpr>,
    },
    MethodCallDyn {
        recv: Box<ElabExpr>,
        name: String,
        args: Vec<ElabExpr>,
    },
    IsNone(Box<ElabExpr>),
    Eq(Box<ElabExpr>, Box<ElabExpr>),
    Not(Box<ElabExpr>),
}

impl ElabExpr {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ElabExpr)) {
        f(self);
        match &self.kind {
            ElabKind::Const(_) | ElabKind::Local(_) | ElabKind::Global(_) => {}
            ElabKind::Cast(_, e)
            | ElabKind::IsNone(e)
            | ElabKind::Not(e)
            | ElabKind::FieldGet { recv: e, .. }
            | ElabKind::AttrGet { recv: e, .. } => e.walk(f),
            ElabKind::CallFunc { args, .. }
            | ElabKind::CallByName { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ElabKind::New { arg, .. } => {
                if let Some(a) = arg {
                    a.walk(f);
                }
            }
            ElabKind::CallValue { callee: r, args }
            | ElabKind::MethodCall { recv: r, args, .. }
            | ElabKind::MethodCallDyn { recv: r, args, .. } => {
                r.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ElabKind::DictLit(entries) | ElabKind::ChkDictLit { entries, .. } => {
                for (k, v) in entries {
                    k.walk(f);
                    v.walk(f);
                }
            }
            ElabKind::Subscript { recv, key } => {
                recv.walk(f);
                key.walk(f);
            }
            ElabKind::SubscriptSet { recv, key, val, .. } => {
                recv.walk(f);
                key.walk(f);
                val.walk(f);
            }
            ElabKind::FieldSet { recv, val, .. } | ElabKind::AttrSet { recv, val, .. } => {
                recv.walk(f);
                val.walk(f);
            }
            ElabKind::Eq(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElabStmt {
    /// Both local definitions and assignments.
    Store { slot: usize, value: ElabExpr },
    If {
        cond: ElabExpr,
        then: Vec<ElabStmt>,
        els: Vec<ElabStmt>,
    },
    While { cond: ElabExpr, body: Vec<ElabStmt> },
    Break,
    Return(ElabExpr),
    Expr(ElabExpr),
}

impl ElabStmt {
    pub fn walk_exprs<'a>(stmts: &'a [ElabStmt], f: &mut impl FnMut(&'a ElabExpr)) {
        for s in stmts {
            match s {
                ElabStmt::Store { value: e, .. } | ElabStmt::Return(e) | ElabStmt::Expr(e) => {
                    e.walk(f)
                }
                ElabStmt::If { cond, then, els } => {
                    cond.walk(f);
                    Self::walk_exprs(then, f);
                    Self::walk_exprs(els, f);
                }
                ElabStmt::While { cond, body } => {
                    cond.walk(f);
                    Self::walk_exprs(body, f);
                }
                ElabStmt::Break => {}
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuncRole {
    Function,
    Method,
    /// Evaluates the default value of a field.
    FieldDefault,
}

/// A function, method or field-default body ready for compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct ElabFunc {
    /// `f` for functions, `C.m` for methods, `C.x.default` for defaults.
    pub name: String,
    pub role: FuncRole,
    /// Declared parameter types in slot order; for methods slot 0 is the
    /// receiver.
    pub params: Vec<EvalType>,
    pub ret: EvalType,
    /// The argument-check prologue: parameter slots with a precise type.
    pub check_args: Vec<(usize, EvalType)>,
    pub nlocals: usize,
    /// Declared types of every local slot, for debug checks.
    pub local_types: Vec<EvalType>,
    pub body: Vec<ElabStmt>,
}

impl ElabFunc {
    /// Arity as seen by callers, excluding the receiver.
    pub fn arity(&self) -> usize {
        self.params.len() - usize::from(self.role == FuncRole::Method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VSlot {
    pub name: String,
    /// Qualified name of the implementing method.
    pub func: String,
    /// Set when the implementation is an untyped override of a typed method:
    /// results are cast to this type.
    pub wrapper: Option<EvalType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSlot {
    pub name: String,
    pub ty: EvalType,
    /// The function computing the default value.
    pub default: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElabClass {
    pub name: String,
    pub parent: Option<String>,
    pub dynamic: bool,
    /// Flattened fields in slot order.
    pub fields: Vec<FieldSlot>,
    pub vtable: Vec<VSlot>,
}

pub fn default_func_name(class: &str, field: &str) -> String {
    format!("{class}.{field}.default")
}

impl ElabClass {
    pub fn slot_of(&self, method: &str) -> Option<usize> {
        self.vtable.iter().position(|s| s.name == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElabTop {
    Def { name: String, ty: EvalType, init: ElabExpr },
    /// A top-level expression; `print` is false for set forms.
    Expr { expr: ElabExpr, print: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElabProgram {
    pub env: TypeEnv,
    pub funcs: Vec<ElabFunc>,
    /// Every class including `object`, parents before children.
    pub classes: Vec<ElabClass>,
    pub module: Vec<ElabTop>,
}

impl ElabProgram {
    pub fn func(&self, name: &str) -> Option<&ElabFunc> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn class(&self, name: &str) -> Option<&ElabClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Every expression in the program, including field defaults.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a ElabExpr)) {
        for func in &self.funcs {
            ElabStmt::walk_exprs(&func.body, f);
        }
        for t in &self.module {
            match t {
                ElabTop::Def { init: e, .. } | ElabTop::Expr { expr: e, .. } => e.walk(f),
            }
        }
    }

    pub fn count_casts(&self) -> usize {
        let mut n = 0;
        self.walk_exprs(&mut |e| {
            if matches!(e.kind, ElabKind::Cast(..)) {
                n += 1;
            }
        });
        n
    }
}
