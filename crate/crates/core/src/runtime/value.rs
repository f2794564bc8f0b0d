//! Run-time values.

use std::cell::{Cell, RefCell};
use std::fmt::Write;
use std::rc::Rc;

use indexmap::IndexMap;

use super::class::{ClassId, ClassTable};
use super::registry::{registry, TypeId};
use crate::syntax::write_str_lit;

#[derive(Debug, Clone)]
pub enum Value {
    None,
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    Dict(Rc<RefCell<Mapping>>),
    CheckedDict(Rc<CheckedDict>),
    Object(Rc<Object>),
}

#[derive(Debug)]
pub struct CheckedDict {
    pub tag: TypeId,
    pub map: RefCell<Mapping>,
}

#[derive(Debug)]
pub struct Object {
    pub class: ClassId,
    pub fields: RefCell<Vec<Value>>,
}

/// Hashable projection of a key. `True` and `1` share a key, as do `False`
/// and `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HashKey {
    None,
    Int(i64),
    Str(Rc<str>),
}

/// An insertion-ordered mapping. Each entry keeps the key value it was first
/// inserted with.
#[derive(Debug, Default)]
pub struct Mapping {
    entries: IndexMap<HashKey, (Value, Value)>,
}

impl Mapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: &HashKey) -> Option<Value> {
        self.entries.get(k).map(|(_, v)| v.clone())
    }

    pub fn insert(&mut self, hk: HashKey, key: Value, val: Value) {
        match self.entries.get_mut(&hk) {
            Some(slot) => slot.1 = val,
            None => {
                self.entries.insert(hk, (key, val));
            }
        }
    }

    /// Entries in insertion order. Every entry visited is counted by
    /// [`element_visits`].
    pub fn entries(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.entries.values().map(|(k, v)| {
            count_visit();
            (k, v)
        })
    }
}

thread_local! {
    static VISITS: Cell<u64> = const { Cell::new(0) };
}

fn count_visit() {
    VISITS.with(|c| c.set(c.get() + 1));
}

/// Number of dictionary elements (keys or values) inspected on this thread
/// so far. Casts never move it.
pub fn element_visits() -> u64 {
    VISITS.with(Cell::get)
}

pub(crate) fn count_element_visits(n: u64) {
    VISITS.with(|c| c.set(c.get() + n));
}

/// Raised when comparing or rendering nests too deeply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthExceeded;

const MAX_DEPTH: usize = 512;

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    pub fn new_dict(m: Mapping) -> Value {
        Value::Dict(Rc::new(RefCell::new(m)))
    }

    /// The dictionary key for this value, or `None` if it is unhashable.
    pub fn hash_key(&self) -> Option<HashKey> {
        match self {
            Value::None => Some(HashKey::None),
            Value::Int(i) => Some(HashKey::Int(*i)),
            Value::Bool(b) => Some(HashKey::Int(i64::from(*b))),
            Value::Str(s) => Some(HashKey::Str(s.clone())),
            _ => None,
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::None => false,
            Value::Int(i) => *i != 0,
            Value::Bool(b) => *b,
            Value::Str(s) => !s.is_empty(),
            Value::Dict(d) => !d.borrow().is_empty(),
            Value::CheckedDict(d) => !d.map.borrow().is_empty(),
            Value::Object(_) => true,
        }
    }

    /// The run-time type of the value, as shown in cast errors.
    pub fn describe(&self, classes: &ClassTable) -> String {
        match self {
            Value::None => "None".into(),
            Value::Int(_) => "int".into(),
            Value::Bool(_) => "bool".into(),
            Value::Str(_) => "str".into(),
            Value::Dict(_) => "Dict[dyn, dyn]".into(),
            Value::CheckedDict(d) => registry().get(d.tag).to_string(),
            Value::Object(o) => classes.get(o.class).name.clone(),
        }
    }

    /// `==`: structural on primitives and mappings, identity on objects.
    pub fn equals(&self, other: &Value) -> Result<bool, DepthExceeded> {
        eq_at(self, other, 0)
    }

    pub fn render(&self, classes: &ClassTable) -> String {
        let mut out = String::new();
        let mut stack = Vec::new();
        render_into(self, classes, &mut out, &mut stack);
        out
    }

    /// Identity of a heap value, for cycle detection.
    fn addr(&self) -> Option<*const ()> {
        match self {
            Value::Dict(d) => Some(Rc::as_ptr(d) as *const ()),
            Value::CheckedDict(d) => Some(Rc::as_ptr(d) as *const ()),
            Value::Object(o) => Some(Rc::as_ptr(o) as *const ()),
            _ => None,
        }
    }
}

fn eq_at(a: &Value, b: &Value, depth: usize) -> Result<bool, DepthExceeded> {
    if depth > MAX_DEPTH {
        return Err(DepthExceeded);
    }
    if let (Some(x), Some(y)) = (a.addr(), b.addr()) {
        if x == y {
            return Ok(true);
        }
    }
    let ints = |v: &Value| match v {
        Value::Int(i) => Some(*i),
        Value::Bool(b) => Some(i64::from(*b)),
        _ => None,
    };
    Ok(match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::Object(_), Value::Object(_)) => false,
        _ if ints(a).is_some() && ints(b).is_some() => ints(a) == ints(b),
        _ => match (mapping_of(a), mapping_of(b)) {
            (Some(x), Some(y)) => {
                let (x, y) = (x.borrow(), y.borrow());
                if x.len() != y.len() {
                    return Ok(false);
                }
                for (k, v) in x.entries() {
                    let hk = k.hash_key().expect("stored keys are hashable");
                    match y.get(&hk) {
                        Some(w) if eq_at(v, &w, depth + 1)? => {}
                        _ => return Ok(false),
                    }
                }
                true
            }
            _ => false,
        },
    })
}

fn mapping_of(v: &Value) -> Option<&RefCell<Mapping>> {
    match v {
        Value::Dict(d) => Some(d),
        Value::CheckedDict(d) => Some(&d.map),
        _ => None,
    }
}

fn render_into(v: &Value, classes: &ClassTable, out: &mut String, stack: &mut Vec<*const ()>) {
    match v {
        Value::None => out.push_str("None"),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Bool(true) => out.push_str("True"),
        Value::Bool(false) => out.push_str("False"),
        Value::Str(s) => {
            let _ = write_str_lit(out, s);
        }
        Value::Object(o) => {
            let _ = write!(out, "<{} object>", classes.get(o.class).name);
        }
        Value::Dict(_) | Value::CheckedDict(_) => {
            let addr = v.addr().unwrap();
            let checked = match v {
                Value::CheckedDict(d) => Some(registry().get(d.tag)),
                _ => None,
            };
            if let Some(t) = &checked {
                let _ = write!(out, "{t}(");
            }
            if stack.contains(&addr) {
                out.push_str("{...}");
            } else {
                stack.push(addr);
                out.push('{');
                let m = mapping_of(v).unwrap().borrow();
                for (i, (k, val)) in m.entries().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    render_into(k, classes, out, stack);
                    out.push_str(": ");
                    render_into(val, classes, out, stack);
                }
                out.push('}');
                stack.pop();
            }
            if checked.is_some() {
                out.push(')');
            }
        }
    }
}
