//! The interpreter: one value stack, one frame per active call.

use std::rc::Rc;
use std::cell::RefCell;

use crate::runtime::{
    checked_dict_new, dict_get, dict_set, dict_set_dyn, ClassId, ClassTable, Entry, FuncId,
    Mapping, Object, RuntimeError, TagCache, TypeRef, Value,
};

use super::bytecode::{BytecodeModule, EntryPoint, Instr};
use super::{Failure, Metrics, Options, Outcome, Printed};

const MAX_FRAMES: usize = 2000;

struct Frame {
    func: FuncId,
    pc: usize,
    base: usize,
    /// Set when entered through a wrapper vtable entry: the class and slot
    /// whose declared return type the result is cast to.
    wrapper: Option<(ClassId, usize)>,
}

struct Machine<'m> {
    m: &'m BytecodeModule,
    opts: Options,
    stack: Vec<Value>,
    frames: Vec<Frame>,
    globals: Vec<Option<Value>>,
    metrics: Metrics,
    tags: TagCache,
    output: Vec<String>,
    last: Option<Printed>,
    steps: u64,
}

fn internal(msg: impl Into<String>) -> Failure {
    Failure::Internal(msg.into())
}

impl From<RuntimeError> for Failure {
    fn from(e: RuntimeError) -> Self {
        Failure::Runtime(e)
    }
}

impl<'m> Machine<'m> {
    fn classes(&self) -> &'m ClassTable {
        &self.m.classes
    }

    fn ty(&self, t: u32) -> &'m TypeRef {
        &self.m.types[t as usize]
    }

    fn pop(&mut self) -> Result<Value, Failure> {
        self.stack.pop().ok_or_else(|| internal("stack underflow"))
    }

    fn popn(&mut self, n: usize) -> Result<Vec<Value>, Failure> {
        if self.stack.len() < n {
            return Err(internal("stack underflow"));
        }
        Ok(self.stack.split_off(self.stack.len() - n))
    }

    fn debug_check(&self, t: u32, v: &Value, what: impl FnOnce() -> String) -> Result<(), Failure> {
        if self.opts.debug_checks {
            let t = self.ty(t);
            if !t.rt.accepts(v, self.classes()) {
                return Err(internal(format!(
                    "{}: {} is not a {}",
                    what(),
                    v.describe(self.classes()),
                    t.ty
                )));
            }
        }
        Ok(())
    }

    fn instance_of(&self, v: &Value, class: ClassId) -> Result<Rc<Object>, Failure> {
        match v {
            Value::Object(o) if self.classes().is_subclass(o.class, class) => Ok(o.clone()),
            other => Err(internal(format!(
                "receiver {} is not a {}",
                other.describe(self.classes()),
                self.classes().get(class).name
            ))),
        }
    }

    /// Enters `func` with its arguments (and receiver) on top of the stack.
    fn enter(
        &mut self,
        func: FuncId,
        entry: EntryPoint,
        wrapper: Option<(ClassId, usize)>,
    ) -> Result<(), Failure> {
        if self.frames.len() >= MAX_FRAMES {
            return Err(Failure::Timeout);
        }
        let f = &self.m.funcs[func];
        let nparams = f.nparams as usize;
        if self.stack.len() < nparams {
            return Err(internal("stack underflow at call"));
        }
        let base = self.stack.len() - nparams;
        let pc = match entry {
            EntryPoint::Checked => 0,
            EntryPoint::Fast => {
                if self.opts.debug_checks {
                    for slot in 0..nparams {
                        let v = &self.stack[base + slot];
                        self.debug_check(f.local_types[slot], v, || {
                            format!("fast entry of {} argument {slot}", f.name)
                        })?;
                    }
                }
                f.fast as usize
            }
        };
        self.stack
            .resize(base + f.nlocals.max(f.nparams) as usize, Value::None);
        self.frames.push(Frame {
            func,
            pc,
            base,
            wrapper,
        });
        Ok(())
    }

    fn run(&mut self) -> Result<(), Failure> {
        let entry = self.m.entry();
        self.enter(entry, EntryPoint::Checked, None)?;
        let m = self.m;
        loop {
            self.steps += 1;
            if let Some(b) = self.opts.budget {
                if self.steps > b {
                    return Err(Failure::Timeout);
                }
            }
            let frame = self.frames.last_mut().expect("no frame");
            let func = &m.funcs[frame.func];
            let base = frame.base;
            let Some(instr) = func.code.get(frame.pc) else {
                return Err(internal(format!("{} ran off its code", func.name)));
            };
            frame.pc += 1;
            match instr {
                Instr::LoadConst(c) => self.stack.push(m.consts[*c as usize].clone()),
                Instr::LoadLocal(s) => {
                    let v = self.stack[base + *s as usize].clone();
                    self.stack.push(v);
                }
                Instr::StoreLocal(s) => {
                    let v = self.pop()?;
                    self.debug_check(func.local_types[*s as usize], &v, || {
                        format!("local {s} of {}", func.name)
                    })?;
                    self.stack[base + *s as usize] = v;
                }
                Instr::LoadGlobal(g) => match &self.globals[*g as usize] {
                    Some(v) => self.stack.push(v.clone()),
                    None => {
                        return Err(RuntimeError::attribute(format!(
                            "module variable '{}' is not initialized",
                            m.globals[*g as usize]
                        ))
                        .into())
                    }
                },
                Instr::StoreGlobal(g) => {
                    let v = self.pop()?;
                    self.globals[*g as usize] = Some(v);
                }
                Instr::Cast(t) => {
                    self.metrics.casts_executed += 1;
                    let v = self.stack.last().ok_or_else(|| internal("stack underflow"))?;
                    self.ty(*t).check(v, self.classes())?;
                }
                Instr::CheckArgs(args) => {
                    self.metrics.check_args_executed += 1;
                    for (slot, t) in args {
                        self.metrics.arg_casts_executed += 1;
                        self.ty(*t)
                            .check(&self.stack[base + *slot as usize], self.classes())?;
                    }
                }
                Instr::BuildMap(n) => {
                    let flat = self.popn(2 * *n as usize)?;
                    let mut map = Mapping::new();
                    let mut it = flat.into_iter();
                    while let (Some(k), Some(v)) = (it.next(), it.next()) {
                        let hk = k.hash_key().ok_or_else(|| {
                            RuntimeError::key(format!(
                                "unhashable key of type {}",
                                k.describe(self.classes())
                            ))
                        })?;
                        map.insert(hk, k, v);
                    }
                    self.stack.push(Value::new_dict(map));
                }
                Instr::BuildCheckedMap(c, n) => {
                    let flat = self.popn(2 * *n as usize)?;
                    let mut it = flat.into_iter();
                    let mut pairs = Vec::with_capacity(*n as usize);
                    while let (Some(k), Some(v)) = (it.next(), it.next()) {
                        pairs.push((k, v));
                    }
                    let d = checked_dict_new(
                        self.classes(),
                        &m.checked[*c as usize],
                        pairs,
                        &mut self.metrics.element_casts,
                    )?;
                    self.stack.push(d);
                }
                Instr::TpAlloc { class, init } => {
                    let n = self.classes().get(*class).fields.len();
                    let mut fields = vec![Value::None; n];
                    if *init {
                        let v = self.pop()?;
                        let last = n.checked_sub(1).ok_or_else(|| internal("init of a fieldless class"))?;
                        if self.opts.debug_checks {
                            let f = &self.classes().get(*class).fields[last];
                            if !f.ty.rt.accepts(&v, self.classes()) {
                                return Err(internal(format!("initializer of {}", f.name)));
                            }
                        }
                        fields[last] = v;
                    }
                    self.stack.push(Value::Object(Rc::new(Object {
                        class: *class,
                        fields: RefCell::new(fields),
                    })));
                }
                Instr::CallDefault(f) => self.enter(*f, EntryPoint::Checked, None)?,
                Instr::InitField(slot) => {
                    let v = self.pop()?;
                    let Some(Value::Object(o)) = self.stack.last() else {
                        return Err(internal("INIT_FIELD without an instance"));
                    };
                    if self.opts.debug_checks {
                        let f = &self.classes().get(o.class).fields[*slot as usize];
                        if !f.ty.rt.accepts(&v, self.classes()) {
                            return Err(internal(format!("default of {}", f.name)));
                        }
                    }
                    o.fields.borrow_mut()[*slot as usize] = v;
                }
                Instr::InvokeFunction { func, entry, .. } => {
                    self.metrics.direct_calls += 1;
                    self.enter(*func, *entry, None)?;
                }
                Instr::InvokeMethod {
                    class,
                    slot,
                    entry,
                    nargs,
                } => {
                    self.metrics.vtable_calls += 1;
                    let recv_at = self
                        .stack
                        .len()
                        .checked_sub(*nargs as usize + 1)
                        .ok_or_else(|| internal("stack underflow"))?;
                    let o = self.instance_of(&self.stack[recv_at], *class)?;
                    let (callee, wrapper) = match self.classes().dispatch(o.class, *slot as usize) {
                        Entry::Direct(f) => (*f, None),
                        Entry::Wrapper(f, _) => (*f, Some((o.class, *slot as usize))),
                    };
                    self.enter(callee, *entry, wrapper)?;
                }
                Instr::CallDynamic { func, nargs } => {
                    self.metrics.dynamic_calls += 1;
                    let f = &m.funcs[*func];
                    if f.arity() != *nargs {
                        return Err(RuntimeError::dyn_call(format!(
                            "{} takes {} argument(s), got {nargs}",
                            f.name,
                            f.arity()
                        ))
                        .into());
                    }
                    self.enter(*func, EntryPoint::Checked, None)?;
                }
                Instr::CallValue { nargs } => {
                    self.metrics.dynamic_calls += 1;
                    let mut vals = self.popn(*nargs as usize + 1)?;
                    let callee = vals.swap_remove(0);
                    return Err(RuntimeError::dyn_call(format!(
                        "{} is not callable",
                        callee.describe(self.classes())
                    ))
                    .into());
                }
                Instr::CallMethodDyn { name, nargs } => {
                    self.metrics.dynamic_calls += 1;
                    let name = &m.names[*name as usize];
                    let recv_at = self
                        .stack
                        .len()
                        .checked_sub(*nargs as usize + 1)
                        .ok_or_else(|| internal("stack underflow"))?;
                    let recv = &self.stack[recv_at];
                    let Value::Object(o) = recv else {
                        return Err(RuntimeError::attribute(format!(
                            "{} has no method '{name}'",
                            recv.describe(self.classes())
                        ))
                        .into());
                    };
                    let Some(slot) = self.classes().method_slot(o.class, name) else {
                        return Err(RuntimeError::attribute(format!(
                            "{} has no method '{name}'",
                            self.classes().get(o.class).name
                        ))
                        .into());
                    };
                    let (callee, wrapper) = match self.classes().dispatch(o.class, slot) {
                        Entry::Direct(f) => (*f, None),
                        Entry::Wrapper(f, _) => (*f, Some((o.class, slot))),
                    };
                    let f = &m.funcs[callee];
                    if f.arity() != *nargs {
                        return Err(RuntimeError::dyn_call(format!(
                            "{} takes {} argument(s), got {nargs}",
                            f.name,
                            f.arity()
                        ))
                        .into());
                    }
                    self.enter(callee, EntryPoint::Checked, wrapper)?;
                }
                Instr::DictGet => {
                    let k = self.pop()?;
                    let d = self.pop()?;
                    let v = dict_get(self.classes(), &d, &k)?;
                    self.stack.push(v);
                }
                Instr::DictSet => {
                    let v = self.pop()?;
                    let k = self.pop()?;
                    let d = self.pop()?;
                    if self.opts.debug_checks {
                        if let Value::CheckedDict(cd) = &d {
                            let ct = self.tags.get(cd.tag, self.classes());
                            if !ct.key.rt.accepts(&k, self.classes())
                                || !ct.val.rt.accepts(&v, self.classes())
                            {
                                return Err(internal("unguarded write breaks a checked dict"));
                            }
                        }
                    }
                    dict_set(self.classes(), &d, k, v)?;
                }
                Instr::DictSetGuarded => {
                    let v = self.pop()?;
                    let k = self.pop()?;
                    let d = self.pop()?;
                    dict_set_dyn(
                        self.classes(),
                        &mut self.tags,
                        &d,
                        k,
                        v,
                        &mut self.metrics.element_casts,
                    )?;
                }
                Instr::LoadField { class, slot } => {
                    let recv = self.pop()?;
                    let o = self.instance_of(&recv, *class)?;
                    let v = o.fields.borrow()[*slot as usize].clone();
                    self.stack.push(v);
                }
                Instr::StoreField { class, slot } => {
                    let v = self.pop()?;
                    let recv = self.pop()?;
                    let o = self.instance_of(&recv, *class)?;
                    if self.opts.debug_checks {
                        let f = &self.classes().get(o.class).fields[*slot as usize];
                        if !f.ty.rt.accepts(&v, self.classes()) {
                            return Err(internal(format!("store to field {}", f.name)));
                        }
                    }
                    o.fields.borrow_mut()[*slot as usize] = v;
                }
                Instr::LoadAttrDyn(n) => {
                    let name = &m.names[*n as usize];
                    let recv = self.pop()?;
                    let v = match &recv {
                        Value::Object(o) => self
                            .classes()
                            .field_slot(o.class, name)
                            .map(|s| o.fields.borrow()[s].clone()),
                        _ => None,
                    };
                    match v {
                        Some(v) => self.stack.push(v),
                        None => {
                            return Err(RuntimeError::attribute(format!(
                                "{} has no field '{name}'",
                                recv.describe(self.classes())
                            ))
                            .into())
                        }
                    }
                }
                Instr::StoreAttrDyn(n) => {
                    let name = &m.names[*n as usize];
                    let v = self.pop()?;
                    let recv = self.pop()?;
                    let target = match &recv {
                        Value::Object(o) => self.classes().field_slot(o.class, name).map(|s| (o, s)),
                        _ => None,
                    };
                    let Some((o, s)) = target else {
                        return Err(RuntimeError::attribute(format!(
                            "{} has no field '{name}'",
                            recv.describe(self.classes())
                        ))
                        .into());
                    };
                    self.metrics.casts_executed += 1;
                    self.classes().get(o.class).fields[s]
                        .ty
                        .check(&v, self.classes())?;
                    o.fields.borrow_mut()[s] = v;
                }
                Instr::IsNone => {
                    let v = self.pop()?;
                    self.stack.push(Value::Bool(matches!(v, Value::None)));
                }
                Instr::Eq => {
                    let b = self.pop()?;
                    let a = self.pop()?;
                    let eq = a.equals(&b).map_err(|_| Failure::Timeout)?;
                    self.stack.push(Value::Bool(eq));
                }
                Instr::Not => {
                    let v = self.pop()?;
                    self.stack.push(Value::Bool(!v.truthy()));
                }
                Instr::Jump(t) => self.frames.last_mut().unwrap().pc = *t as usize,
                Instr::PopJumpIfFalse(t) => {
                    if !self.pop()?.truthy() {
                        self.frames.last_mut().unwrap().pc = *t as usize;
                    }
                }
                Instr::Pop => {
                    self.pop()?;
                }
                Instr::ReturnValue => {
                    let v = self.pop()?;
                    self.debug_check(func.ret, &v, || format!("result of {}", func.name))?;
                    let frame = self.frames.pop().unwrap();
                    if let Some((class, slot)) = frame.wrapper {
                        self.metrics.wrapper_result_checks += 1;
                        if let Entry::Wrapper(_, t) = self.classes().dispatch(class, slot) {
                            t.check(&v, self.classes())?;
                        }
                    }
                    self.stack.truncate(frame.base);
                    if self.frames.is_empty() {
                        return Ok(());
                    }
                    self.stack.push(v);
                }
                Instr::PrintExpr(t) => {
                    let v = self.pop()?;
                    self.debug_check(*t, &v, || "printed value".into())?;
                    let t = self.ty(*t);
                    let text = v.render(self.classes());
                    self.output.push(text.clone());
                    self.last = Some(Printed {
                        text,
                        ty: t.ty.clone(),
                        conforms: t.rt.accepts(&v, self.classes()),
                    });
                }
            }
        }
    }
}

/// Runs the module body of a compiled program.
pub fn execute(m: &BytecodeModule, opts: &Options) -> Outcome {
    let mut machine = Machine {
        m,
        opts: *opts,
        stack: Vec::new(),
        frames: Vec::new(),
        globals: vec![None; m.globals.len()],
        metrics: Metrics::default(),
        tags: TagCache::default(),
        output: Vec::new(),
        last: None,
        steps: 0,
    };
    let result = machine.run();
    Outcome {
        output: machine.output,
        metrics: machine.metrics,
        result,
        last: machine.last,
        steps: machine.steps,
    }
}
