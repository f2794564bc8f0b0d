//! Instruction set and compiled modules.

use std::fmt::{self, Write};

use crate::checker::FuncRole;
use crate::runtime::{CheckedType, ClassId, ClassTable, FuncId, TypeRef, Value};

/// Index into [`BytecodeModule::types`].
pub type TypeIdx = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryPoint {
    /// Offset 0: runs the argument checks.
    Checked,
    /// Just past `CHECK_ARGS`.
    Fast,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instr {
    LoadConst(u32),
    LoadLocal(u32),
    StoreLocal(u32),
    LoadGlobal(u32),
    StoreGlobal(u32),
    Cast(TypeIdx),
    /// Casts each listed parameter slot; always the first instruction.
    CheckArgs(Vec<(u32, TypeIdx)>),
    BuildMap(u32),
    /// Index into [`BytecodeModule::checked`] and entry count.
    BuildCheckedMap(u32, u32),
    /// Allocates an instance. With `init` set, pops the value of the last
    /// field slot first.
    TpAlloc { class: ClassId, init: bool },
    /// Calls a field-default function; no call metrics.
    CallDefault(FuncId),
    /// Stores into a slot of the instance on top of the stack, leaving it.
    InitField(u32),
    InvokeFunction { func: FuncId, entry: EntryPoint, nargs: u32 },
    /// The receiver sits below the arguments.
    InvokeMethod { class: ClassId, slot: u32, entry: EntryPoint, nargs: u32 },
    CallDynamic { func: FuncId, nargs: u32 },
    /// Call of a value with the callee below the arguments. No value is
    /// callable, so this always fails.
    CallValue { nargs: u32 },
    CallMethodDyn { name: u32, nargs: u32 },
    DictGet,
    DictSet,
    DictSetGuarded,
    LoadField { class: ClassId, slot: u32 },
    StoreField { class: ClassId, slot: u32 },
    LoadAttrDyn(u32),
    StoreAttrDyn(u32),
    IsNone,
    Eq,
    Not,
    Jump(u32),
    PopJumpIfFalse(u32),
    Pop,
    ReturnValue,
    /// Renders the top-level value on top of the stack; the operand is its
    /// static type.
    PrintExpr(TypeIdx),
}

impl Instr {
    pub fn opname(&self) -> &'static str {
        match self {
            Instr::LoadConst(_) => "LOAD_CONST",
            Instr::LoadLocal(_) => "LOAD_LOCAL",
            Instr::StoreLocal(_) => "STORE_LOCAL",
            Instr::LoadGlobal(_) => "LOAD_GLOBAL",
            Instr::StoreGlobal(_) => "STORE_GLOBAL",
            Instr::Cast(_) => "CAST",
            Instr::CheckArgs(_) => "CHECK_ARGS",
            Instr::BuildMap(_) => "BUILD_MAP",
            Instr::BuildCheckedMap(..) => "BUILD_CHECKED_MAP",
            Instr::TpAlloc { .. } => "TP_ALLOC",
            Instr::CallDefault(_) => "CALL_DEFAULT",
            Instr::InitField(_) => "INIT_FIELD",
            Instr::InvokeFunction { .. } => "INVOKE_FUNCTION",
            Instr::InvokeMethod { .. } => "INVOKE_METHOD",
            Instr::CallDynamic { .. } => "CALL_DYNAMIC",
            Instr::CallValue { .. } => "CALL_VALUE",
            Instr::CallMethodDyn { .. } => "CALL_METHOD_DYN",
            Instr::DictGet => "DICT_GET",
            Instr::DictSet => "DICT_SET",
            Instr::DictSetGuarded => "DICT_SET_GUARDED",
            Instr::LoadField { .. } => "LOAD_FIELD",
            Instr::StoreField { .. } => "STORE_FIELD",
            Instr::LoadAttrDyn(_) => "LOAD_ATTR_DYN",
            Instr::StoreAttrDyn(_) => "STORE_ATTR_DYN",
            Instr::IsNone => "IS_NONE",
            Instr::Eq => "EQ",
            Instr::Not => "NOT",
            Instr::Jump(_) => "JUMP",
            Instr::PopJumpIfFalse(_) => "POP_JUMP_IF_FALSE",
            Instr::Pop => "POP",
            Instr::ReturnValue => "RETURN_VALUE",
            Instr::PrintExpr(_) => "PRINT_EXPR",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Function {
    pub name: String,
    pub role: FuncRole,
    /// Parameter count including the receiver of a method.
    pub nparams: u32,
    pub nlocals: u32,
    /// Offset of the fast entry point.
    pub fast: u32,
    pub code: Vec<Instr>,
    /// Offsets of calls whose edge is static-strict; the optimizer may point
    /// them at the callee's fast entry.
    pub strict_sites: Vec<u32>,
    /// Declared type of every local slot, parameters first.
    pub local_types: Vec<TypeIdx>,
    pub ret: TypeIdx,
}

impl Function {
    /// Arity as seen by a caller, excluding the receiver.
    pub fn arity(&self) -> u32 {
        self.nparams - u32::from(self.role == FuncRole::Method)
    }
}

#[derive(Debug, Clone)]
pub struct BytecodeModule {
    /// Compiled functions; the last one is the module body.
    pub funcs: Vec<Function>,
    pub classes: ClassTable,
    pub globals: Vec<String>,
    pub consts: Vec<Value>,
    pub types: Vec<TypeRef>,
    pub checked: Vec<CheckedType>,
    pub names: Vec<String>,
}

pub const MODULE_NAME: &str = "<module>";

impl BytecodeModule {
    pub fn entry(&self) -> FuncId {
        self.funcs.len() - 1
    }

    pub fn func_id(&self, name: &str) -> Option<FuncId> {
        self.funcs.iter().position(|f| f.name == name)
    }

    fn operands(&self, i: &Instr) -> String {
        let class = |c: &ClassId| self.classes.get(*c).name.clone();
        let entry = |e: &EntryPoint| match e {
            EntryPoint::Checked => "checked",
            EntryPoint::Fast => "fast",
        };
        match i {
            Instr::LoadConst(c) => self.consts[*c as usize].render(&self.classes),
            Instr::LoadLocal(s) | Instr::StoreLocal(s) | Instr::InitField(s) => s.to_string(),
            Instr::LoadGlobal(g) | Instr::StoreGlobal(g) => self.globals[*g as usize].clone(),
            Instr::Cast(t) | Instr::PrintExpr(t) => self.types[*t as usize].ty.to_string(),
            Instr::CheckArgs(args) => {
                let mut s = String::new();
                for (k, (slot, t)) in args.iter().enumerate() {
                    if k > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{slot}:{}", self.types[*t as usize].ty);
                }
                s
            }
            Instr::BuildMap(n) => n.to_string(),
            Instr::BuildCheckedMap(c, n) => {
                let t = crate::runtime::registry().get(self.checked[*c as usize].tag);
                format!("{t} {n}")
            }
            Instr::TpAlloc { class: c, init } => {
                format!("{}{}", class(c), if *init { " init" } else { "" })
            }
            Instr::CallDefault(f) => self.funcs[*f].name.clone(),
            Instr::InvokeFunction { func, entry: e, nargs } => {
                format!("{} {} {nargs}", self.funcs[*func].name, entry(e))
            }
            Instr::InvokeMethod {
                class: c,
                slot,
                entry: e,
                nargs,
            } => {
                let name = &self.classes.get(*c).vtable[*slot as usize].name;
                format!("{}.{name} {slot} {} {nargs}", class(c), entry(e))
            }
            Instr::CallDynamic { func, nargs } => format!("{} {nargs}", self.funcs[*func].name),
            Instr::CallValue { nargs } => nargs.to_string(),
            Instr::CallMethodDyn { name, nargs } => format!("{} {nargs}", self.names[*name as usize]),
            Instr::LoadField { class: c, slot } | Instr::StoreField { class: c, slot } => {
                let name = &self.classes.get(*c).fields[*slot as usize].name;
                format!("{}.{name} {slot}", class(c))
            }
            Instr::LoadAttrDyn(n) | Instr::StoreAttrDyn(n) => self.names[*n as usize].clone(),
            Instr::Jump(t) | Instr::PopJumpIfFalse(t) => t.to_string(),
            Instr::DictGet
            | Instr::DictSet
            | Instr::DictSetGuarded
            | Instr::IsNone
            | Instr::Eq
            | Instr::Not
            | Instr::Pop
            | Instr::ReturnValue => String::new(),
        }
    }
}

/// The `dump-bc` listing: one section per function.
impl fmt::Display for BytecodeModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, func) in self.funcs.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            writeln!(f, "def {} nlocals={} fast={}", func.name, func.nlocals, func.fast)?;
            for (off, i) in func.code.iter().enumerate() {
                let ops = self.operands(i);
                if ops.is_empty() {
                    writeln!(f, "{off}: {}", i.opname())?;
                } else {
                    writeln!(f, "{off}: {} {ops}", i.opname())?;
                }
            }
        }
        Ok(())
    }
}
