//! Lowering of elaborated programs to bytecode.
//!
//! Every call is emitted against the callee's checked entry; static-strict
//! call sites are recorded so [`super::optimize`] can retarget them.

use std::collections::HashMap;

use crate::checker::{
    CallKind, ElabExpr, ElabFunc, ElabKind, ElabProgram, ElabStmt, ElabTop, FuncRole, Lit,
};
use crate::runtime::{CheckedType, ClassId, ClassTable, FuncId, TypeRef, Value};
use crate::types::EvalType;

use super::bytecode::*;

struct Pools<'p> {
    func_ids: HashMap<&'p str, FuncId>,
    classes: ClassTable,
    globals: Vec<String>,
    consts: Vec<Value>,
    types: Vec<TypeRef>,
    type_ids: HashMap<EvalType, TypeIdx>,
    checked: Vec<CheckedType>,
    checked_ids: HashMap<(EvalType, EvalType), u32>,
    names: Vec<String>,
}

impl<'p> Pools<'p> {
    fn ty(&mut self, t: &EvalType) -> TypeIdx {
        if let Some(&i) = self.type_ids.get(t) {
            return i;
        }
        let i = self.types.len() as TypeIdx;
        self.types.push(TypeRef::new(t, &self.classes));
        self.type_ids.insert(t.clone(), i);
        i
    }

    fn checked(&mut self, k: &EvalType, v: &EvalType) -> u32 {
        let key = (k.clone(), v.clone());
        if let Some(&i) = self.checked_ids.get(&key) {
            return i;
        }
        let i = self.checked.len() as u32;
        self.checked.push(CheckedType::new(k, v, &self.classes));
        self.checked_ids.insert(key, i);
        i
    }

    fn constant(&mut self, lit: &Lit) -> u32 {
        self.consts.push(match lit {
            Lit::None => Value::None,
            Lit::Int(i) => Value::Int(*i),
            Lit::Bool(b) => Value::Bool(*b),
            Lit::Str(s) => Value::str(s),
        });
        (self.consts.len() - 1) as u32
    }

    fn name(&mut self, n: &str) -> u32 {
        match self.names.iter().position(|x| x == n) {
            Some(i) => i as u32,
            None => {
                self.names.push(n.to_string());
                (self.names.len() - 1) as u32
            }
        }
    }

    fn global(&mut self, n: &str) -> u32 {
        match self.globals.iter().position(|x| x == n) {
            Some(i) => i as u32,
            None => {
                self.globals.push(n.to_string());
                (self.globals.len() - 1) as u32
            }
        }
    }

    fn class(&self, name: &str) -> ClassId {
        self.classes.resolve_class(name)
    }

    fn func(&self, name: &str) -> FuncId {
        self.func_ids[name]
    }
}

struct Emitter<'a, 'p> {
    pools: &'a mut Pools<'p>,
    code: Vec<Instr>,
    strict_sites: Vec<u32>,
    /// Pending `break` jumps, one list per enclosing loop.
    breaks: Vec<Vec<usize>>,
}

impl Emitter<'_, '_> {
    fn emit(&mut self, i: Instr) -> usize {
        self.code.push(i);
        self.code.len() - 1
    }

    fn here(&self) -> u32 {
        self.code.len() as u32
    }

    fn patch(&mut self, at: usize, target: u32) {
        match &mut self.code[at] {
            Instr::Jump(t) | Instr::PopJumpIfFalse(t) => *t = target,
            other => unreachable!("patching {other:?}"),
        }
    }

    fn call_site(&mut self, i: Instr, kind: CallKind) {
        let at = self.emit(i);
        if kind == CallKind::StaticStrict {
            self.strict_sites.push(at as u32);
        }
    }

    fn exprs(&mut self, es: &[ElabExpr]) {
        for e in es {
            self.expr(e);
        }
    }

    /// Leaves the value of `e` on the stack.
    fn expr(&mut self, e: &ElabExpr) {
        if self.effect_only(e) {
            let none = self.pools.constant(&Lit::None);
            self.emit(Instr::LoadConst(none));
        }
    }

    /// Compiles `e`. Set forms push nothing and return true; everything else
    /// pushes its value and returns false.
    fn effect_only(&mut self, e: &ElabExpr) -> bool {
        match &e.kind {
            ElabKind::Const(lit) => {
                let c = self.pools.constant(lit);
                self.emit(Instr::LoadConst(c));
            }
            ElabKind::Local(slot) => {
                self.emit(Instr::LoadLocal(*slot as u32));
            }
            ElabKind::Global(name) => {
                let g = self.pools.global(name);
                self.emit(Instr::LoadGlobal(g));
            }
            ElabKind::Cast(t, inner) => {
                self.expr(inner);
                let t = self.pools.ty(t);
                self.emit(Instr::Cast(t));
            }
            ElabKind::CallFunc { func, kind, args } => {
                self.exprs(args);
                let func = self.pools.func(func);
                self.call_site(
                    Instr::InvokeFunction {
                        func,
                        entry: EntryPoint::Checked,
                        nargs: args.len() as u32,
                    },
                    *kind,
                );
            }
            ElabKind::CallByName { func, args } => {
                self.exprs(args);
                let func = self.pools.func(func);
                self.emit(Instr::CallDynamic {
                    func,
                    nargs: args.len() as u32,
                });
            }
            ElabKind::CallValue { callee, args } => {
                self.expr(callee);
                self.exprs(args);
                self.emit(Instr::CallValue {
                    nargs: args.len() as u32,
                });
            }
            ElabKind::DictLit(entries) => {
                for (k, v) in entries {
                    self.expr(k);
                    self.expr(v);
                }
                self.emit(Instr::BuildMap(entries.len() as u32));
            }
            ElabKind::ChkDictLit { key, val, entries } => {
                for (k, v) in entries {
                    self.expr(k);
                    self.expr(v);
                }
                let c = self.pools.checked(key, val);
                self.emit(Instr::BuildCheckedMap(c, entries.len() as u32));
            }
            ElabKind::Subscript { recv, key } => {
                self.expr(recv);
                self.expr(key);
                self.emit(Instr::DictGet);
            }
            ElabKind::SubscriptSet {
                recv,
                key,
                val,
                guarded,
            } => {
                self.expr(recv);
                self.expr(key);
                self.expr(val);
                self.emit(if *guarded {
                    Instr::DictSetGuarded
                } else {
                    Instr::DictSet
                });
                return true;
            }
            ElabKind::New { class, arg } => {
                if let Some(a) = arg {
                    self.expr(a);
                }
                let id = self.pools.class(class);
                self.emit(Instr::TpAlloc {
                    class: id,
                    init: arg.is_some(),
                });
                let fields = self.pools.classes.get(id).fields.clone();
                let defaulted = fields.len() - usize::from(arg.is_some());
                for (slot, f) in fields.iter().enumerate().take(defaulted) {
                    self.emit(Instr::CallDefault(f.default));
                    self.emit(Instr::InitField(slot as u32));
                }
            }
            ElabKind::FieldGet { recv, class, slot } => {
                self.expr(recv);
                let class = self.pools.class(class);
                self.emit(Instr::LoadField {
                    class,
                    slot: *slot as u32,
                });
            }
            ElabKind::FieldSet {
                recv,
                class,
                slot,
                val,
            } => {
                self.expr(recv);
                self.expr(val);
                let class = self.pools.class(class);
                self.emit(Instr::StoreField {
                    class,
                    slot: *slot as u32,
                });
                return true;
            }
            ElabKind::AttrGet { recv, name } => {
                self.expr(recv);
                let n = self.pools.name(name);
                self.emit(Instr::LoadAttrDyn(n));
            }
            ElabKind::AttrSet { recv, name, val } => {
                self.expr(recv);
                self.expr(val);
                let n = self.pools.name(name);
                self.emit(Instr::StoreAttrDyn(n));
                return true;
            }
            ElabKind::MethodCall {
                recv,
                class,
                slot,
                kind,
                args,
            } => {
                self.expr(recv);
                self.exprs(args);
                let class = self.pools.class(class);
                self.call_site(
                    Instr::InvokeMethod {
                        class,
                        slot: *slot as u32,
                        entry: EntryPoint::Checked,
                        nargs: args.len() as u32,
                    },
                    *kind,
                );
            }
            ElabKind::MethodCallDyn { recv, name, args } => {
                self.expr(recv);
                self.exprs(args);
                let name = self.pools.name(name);
                self.emit(Instr::CallMethodDyn {
                    name,
                    nargs: args.len() as u32,
                });
            }
            ElabKind::IsNone(x) => {
                self.expr(x);
                self.emit(Instr::IsNone);
            }
            ElabKind::Eq(a, b) => {
                self.expr(a);
                self.expr(b);
                self.emit(Instr::Eq);
            }
            ElabKind::Not(x) => {
                self.expr(x);
                self.emit(Instr::Not);
            }
        }
        false
    }

    fn effect(&mut self, e: &ElabExpr) {
        if !self.effect_only(e) {
            self.emit(Instr::Pop);
        }
    }

    fn block(&mut self, stmts: &[ElabStmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &ElabStmt) {
        match s {
            ElabStmt::Store { slot, value } => {
                self.expr(value);
                self.emit(Instr::StoreLocal(*slot as u32));
            }
            ElabStmt::If { cond, then, els } => {
                self.expr(cond);
                let to_else = self.emit(Instr::PopJumpIfFalse(0));
                self.block(then);
                if els.is_empty() {
                    let end = self.here();
                    self.patch(to_else, end);
                } else {
                    let to_end = self.emit(Instr::Jump(0));
                    let else_at = self.here();
                    self.patch(to_else, else_at);
                    self.block(els);
                    let end = self.here();
                    self.patch(to_end, end);
                }
            }
            ElabStmt::While { cond, body } => {
                let head = self.here();
                self.expr(cond);
                let exit = self.emit(Instr::PopJumpIfFalse(0));
                self.breaks.push(Vec::new());
                self.block(body);
                self.emit(Instr::Jump(head));
                let end = self.here();
                self.patch(exit, end);
                for b in self.breaks.pop().unwrap() {
                    self.patch(b, end);
                }
            }
            ElabStmt::Break => {
                let at = self.emit(Instr::Jump(0));
                self.breaks
                    .last_mut()
                    .expect("break outside loop")
                    .push(at);
            }
            ElabStmt::Return(e) => {
                self.expr(e);
                self.emit(Instr::ReturnValue);
            }
            ElabStmt::Expr(e) => self.effect(e),
        }
    }

    fn return_none(&mut self) {
        let none = self.pools.constant(&Lit::None);
        self.emit(Instr::LoadConst(none));
        self.emit(Instr::ReturnValue);
    }
}

fn compile_func(pools: &mut Pools, f: &ElabFunc) -> Function {
    let mut em = Emitter {
        pools,
        code: Vec::new(),
        strict_sites: Vec::new(),
        breaks: Vec::new(),
    };
    if !f.check_args.is_empty() {
        let args = f
            .check_args
            .iter()
            .map(|(slot, t)| (*slot as u32, em.pools.ty(t)))
            .collect();
        em.emit(Instr::CheckArgs(args));
    }
    let fast = em.here();
    em.block(&f.body);
    em.return_none();
    let local_types = f.local_types.iter().map(|t| em.pools.ty(t)).collect();
    let ret = em.pools.ty(&f.ret);
    Function {
        name: f.name.clone(),
        role: f.role,
        nparams: f.params.len() as u32,
        nlocals: f.nlocals as u32,
        fast,
        code: em.code,
        strict_sites: em.strict_sites,
        local_types,
        ret,
    }
}

fn compile_module(pools: &mut Pools, tops: &[ElabTop]) -> Function {
    let mut em = Emitter {
        pools,
        code: Vec::new(),
        strict_sites: Vec::new(),
        breaks: Vec::new(),
    };
    for t in tops {
        match t {
            ElabTop::Def { name, init, .. } => {
                em.expr(init);
                let g = em.pools.global(name);
                em.emit(Instr::StoreGlobal(g));
            }
            ElabTop::Expr { expr, print: true } => {
                em.expr(expr);
                let t = em.pools.ty(&expr.ty);
                em.emit(Instr::PrintExpr(t));
            }
            ElabTop::Expr { expr, print: false } => em.effect(expr),
        }
    }
    em.return_none();
    let ret = em.pools.ty(&EvalType::Dyn);
    Function {
        name: MODULE_NAME.into(),
        role: FuncRole::Function,
        nparams: 0,
        nlocals: 0,
        fast: 0,
        code: em.code,
        strict_sites: em.strict_sites,
        local_types: Vec::new(),
        ret,
    }
}

/// Compiles a checked program. Every call targets the checked entry.
pub fn compile(p: &ElabProgram) -> BytecodeModule {
    let func_ids: HashMap<&str, FuncId> = p
        .funcs
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();
    let classes = ClassTable::build(&p.classes, |name| func_ids[name]);
    let mut pools = Pools {
        func_ids,
        classes,
        globals: p.env.vars.keys().cloned().collect(),
        consts: Vec::new(),
        types: Vec::new(),
        type_ids: HashMap::new(),
        checked: Vec::new(),
        checked_ids: HashMap::new(),
        names: Vec::new(),
    };
    let mut funcs: Vec<Function> = p.funcs.iter().map(|f| compile_func(&mut pools, f)).collect();
    funcs.push(compile_module(&mut pools, &p.module));
    BytecodeModule {
        funcs,
        classes: pools.classes,
        globals: pools.globals,
        consts: pools.consts,
        types: pools.types,
        checked: pools.checked,
        names: pools.names,
    }
}
