//! Casts and dictionary operations.
//!
//! A cast inspects only the value's tag: the primitive kind, the class of an
//! object or the registry id of a checked dictionary. It never looks inside
//! a container.

use std::cell::RefCell;
use std::rc::Rc;

use super::class::{ClassId, ClassTable};
use super::error::RuntimeError;
use super::registry::{registry, TypeId};
use super::value::{count_element_visits, CheckedDict, Mapping, Value};
use crate::types::{EvalType, OBJECT};

/// An evaluation type with class names and checked-dict tags resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RtType {
    Dyn,
    None,
    Int,
    Bool,
    Str,
    Object,
    Class(ClassId),
    Dict,
    CheckedDict(TypeId),
    Optional(Box<RtType>),
}

impl RtType {
    pub fn resolve(t: &EvalType, classes: &ClassTable) -> RtType {
        match t {
            EvalType::Dyn => RtType::Dyn,
            EvalType::None => RtType::None,
            EvalType::Int => RtType::Int,
            EvalType::Bool => RtType::Bool,
            EvalType::Str => RtType::Str,
            EvalType::Class(c) if c == OBJECT => RtType::Object,
            EvalType::Class(c) => RtType::Class(classes.resolve_class(c)),
            EvalType::Dict => RtType::Dict,
            EvalType::CheckedDict(..) => RtType::CheckedDict(registry().intern(t)),
            EvalType::Optional(inner) => RtType::Optional(Box::new(Self::resolve(inner, classes))),
        }
    }

    /// The run-time check for each evaluation type.
    pub fn accepts(&self, v: &Value, classes: &ClassTable) -> bool {
        match (self, v) {
            (RtType::Dyn | RtType::Object, _) => true,
            (RtType::Optional(_), Value::None) => true,
            (RtType::Optional(t), v) => t.accepts(v, classes),
            (RtType::None, Value::None) => true,
            (RtType::Int, Value::Int(_) | Value::Bool(_)) => true,
            (RtType::Bool, Value::Bool(_)) => true,
            (RtType::Str, Value::Str(_)) => true,
            (RtType::Dict, Value::Dict(_)) => true,
            (RtType::CheckedDict(tag), Value::CheckedDict(d)) => d.tag == *tag,
            (RtType::Class(c), Value::Object(o)) => classes.is_subclass(o.class, *c),
            _ => false,
        }
    }
}

/// A cast target: the type as written, for messages, and its resolved form.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeRef {
    pub ty: EvalType,
    pub rt: RtType,
}

impl TypeRef {
    pub fn new(ty: &EvalType, classes: &ClassTable) -> Self {
        TypeRef {
            ty: ty.clone(),
            rt: RtType::resolve(ty, classes),
        }
    }

    pub fn check(&self, v: &Value, classes: &ClassTable) -> Result<(), RuntimeError> {
        if self.rt.accepts(v, classes) {
            Ok(())
        } else {
            Err(cast_error(&self.ty, v, classes))
        }
    }
}

fn cast_error(t: &EvalType, v: &Value, classes: &ClassTable) -> RuntimeError {
    RuntimeError::cast(format!("{t} expected, got {}", v.describe(classes)))
}

/// Casts `v` to `t`, returning the very same value on success.
pub fn cast(classes: &ClassTable, v: Value, t: &EvalType) -> Result<Value, RuntimeError> {
    TypeRef::new(t, classes).check(&v, classes)?;
    Ok(v)
}

/// A checked-dict type with its element types resolved.
#[derive(Debug, Clone)]
pub struct CheckedType {
    pub tag: TypeId,
    pub key: TypeRef,
    pub val: TypeRef,
}

impl CheckedType {
    pub fn new(key: &EvalType, val: &EvalType, classes: &ClassTable) -> Self {
        let t = EvalType::checked_dict(key.clone(), val.clone());
        CheckedType {
            tag: registry().intern(&t),
            key: TypeRef::new(key, classes),
            val: TypeRef::new(val, classes),
        }
    }

    pub fn of_tag(tag: TypeId, classes: &ClassTable) -> Self {
        let (k, v) = registry().params(tag);
        CheckedType {
            tag,
            key: TypeRef::new(&k, classes),
            val: TypeRef::new(&v, classes),
        }
    }

    fn check_entry(
        &self,
        k: &Value,
        v: &Value,
        classes: &ClassTable,
        element_casts: &mut u64,
    ) -> Result<(), RuntimeError> {
        count_element_visits(1);
        *element_casts += 1;
        self.key.check(k, classes)?;
        count_element_visits(1);
        *element_casts += 1;
        self.val.check(v, classes)
    }
}

/// Resolved checked-dict types, per tag, for one program run.
#[derive(Debug, Default)]
pub struct TagCache {
    types: std::collections::HashMap<TypeId, Rc<CheckedType>>,
}

impl TagCache {
    pub fn get(&mut self, tag: TypeId, classes: &ClassTable) -> Rc<CheckedType> {
        self.types
            .entry(tag)
            .or_insert_with(|| Rc::new(CheckedType::of_tag(tag, classes)))
            .clone()
    }
}

fn unhashable(k: &Value, classes: &ClassTable) -> RuntimeError {
    RuntimeError::key(format!("unhashable key of type {}", k.describe(classes)))
}

fn not_a_dict(v: &Value, classes: &ClassTable) -> RuntimeError {
    RuntimeError::attribute(format!("{} does not support item access", v.describe(classes)))
}

/// Builds a checked dictionary, casting every key and value.
pub fn checked_dict_new(
    classes: &ClassTable,
    ct: &CheckedType,
    entries: impl IntoIterator<Item = (Value, Value)>,
    element_casts: &mut u64,
) -> Result<Value, RuntimeError> {
    let mut map = Mapping::new();
    for (k, v) in entries {
        ct.check_entry(&k, &v, classes, element_casts)?;
        let hk = k.hash_key().ok_or_else(|| unhashable(&k, classes))?;
        map.insert(hk, k, v);
    }
    Ok(Value::CheckedDict(Rc::new(CheckedDict {
        tag: ct.tag,
        map: RefCell::new(map),
    })))
}

/// A write from untyped code: the key and value are cast to the tag's types
/// first.
pub fn checked_dict_set_guarded(
    classes: &ClassTable,
    ct: &CheckedType,
    d: &CheckedDict,
    k: Value,
    v: Value,
    element_casts: &mut u64,
) -> Result<(), RuntimeError> {
    debug_assert_eq!(ct.tag, d.tag);
    ct.check_entry(&k, &v, classes, element_casts)?;
    let hk = k.hash_key().ok_or_else(|| unhashable(&k, classes))?;
    d.map.borrow_mut().insert(hk, k, v);
    Ok(())
}

pub fn dict_get(classes: &ClassTable, d: &Value, k: &Value) -> Result<Value, RuntimeError> {
    let lookup = |m: &RefCell<Mapping>| {
        let hk = k.hash_key().ok_or_else(|| unhashable(k, classes))?;
        m.borrow()
            .get(&hk)
            .ok_or_else(|| RuntimeError::key(k.render(classes)))
    };
    match d {
        Value::Dict(m) => lookup(m),
        Value::CheckedDict(cd) => lookup(&cd.map),
        other => Err(not_a_dict(other, classes)),
    }
}

/// An unchecked write. On a checked dictionary the caller guarantees the
/// types statically.
pub fn dict_set(classes: &ClassTable, d: &Value, k: Value, v: Value) -> Result<(), RuntimeError> {
    let hk = k.hash_key().ok_or_else(|| unhashable(&k, classes))?;
    match d {
        Value::Dict(m) => m.borrow_mut().insert(hk, k, v),
        Value::CheckedDict(cd) => cd.map.borrow_mut().insert(hk, k, v),
        other => return Err(not_a_dict(other, classes)),
    }
    Ok(())
}

/// A write through a `Dyn` receiver: guarded on checked dictionaries, plain
/// on shallow ones.
pub fn dict_set_dyn(
    classes: &ClassTable,
    tags: &mut TagCache,
    d: &Value,
    k: Value,
    v: Value,
    element_casts: &mut u64,
) -> Result<(), RuntimeError> {
    match d {
        Value::CheckedDict(cd) => {
            let ct = tags.get(cd.tag, classes);
            checked_dict_set_guarded(classes, &ct, cd, k, v, element_casts)
        }
        _ => dict_set(classes, d, k, v),
    }
}
