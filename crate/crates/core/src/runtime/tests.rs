use std::cell::RefCell;
use std::rc::Rc;

use proptest::prelude::*;

use super::*;
use crate::checker::ElabClass;
use crate::syntax::parse_type;
use crate::types::{retract, EvalType};

fn ty(src: &str) -> EvalType {
    retract(&parse_type(src).unwrap())
}

/// `object`, `A`, `B(A)` and `C`, with one field on `A`.
fn classes() -> ClassTable {
    let class = |name: &str, parent: Option<&str>| ElabClass {
        name: name.into(),
        parent: parent.map(Into::into),
        dynamic: false,
        fields: Vec::new(),
        vtable: Vec::new(),
    };
    ClassTable::build(
        &[
            class("object", None),
            class("A", Some("object")),
            class("B", Some("A")),
            class("C", Some("object")),
        ],
        |_| 0,
    )
}

fn object(classes: &ClassTable, name: &str) -> Value {
    Value::Object(Rc::new(Object {
        class: classes.id(name).unwrap(),
        fields: RefCell::new(Vec::new()),
    }))
}

fn checked(classes: &ClassTable, t: &str, entries: Vec<(Value, Value)>) -> Value {
    let EvalType::CheckedDict(k, v) = ty(t) else { panic!("{t}") };
    let ct = CheckedType::new(&k, &v, classes);
    checked_dict_new(classes, &ct, entries, &mut 0).unwrap()
}

fn passes(classes: &ClassTable, v: &Value, t: &str) -> bool {
    cast(classes, v.clone(), &ty(t)).is_ok()
}

fn cast_message(classes: &ClassTable, v: &Value, t: &str) -> String {
    let e = cast(classes, v.clone(), &ty(t)).unwrap_err();
    assert_eq!(e.kind, ErrorKind::CastError);
    e.message
}

#[test]
fn cast_optional() {
    let c = classes();
    assert!(passes(&c, &Value::None, "Optional[str]"));
    assert!(passes(&c, &Value::str("s"), "Optional[str]"));
    assert!(!passes(&c, &Value::Int(1), "Optional[str]"));
}

#[test]
fn cast_dict() {
    let c = classes();
    assert!(passes(&c, &Value::new_dict(Mapping::new()), "Dict[str, int]"));
    let cd = checked(&c, "CheckedDict[str, int]", Vec::new());
    assert!(!passes(&c, &cd, "Dict[str, int]"));
    assert!(!passes(&c, &Value::None, "Dict[dyn, dyn]"));
}

#[test]
fn cast_checked_dict_exact_match() {
    let c = classes();
    let cd = checked(&c, "CheckedDict[str, int]", vec![(Value::str("A"), Value::Int(1))]);
    assert!(passes(&c, &cd, "CheckedDict[str, int]"));
    assert!(!passes(&c, &cd, "CheckedDict[str, dyn]"));
    assert!(!passes(&c, &cd, "CheckedDict[str, bool]"));
    assert!(!passes(&c, &Value::new_dict(Mapping::new()), "CheckedDict[str, int]"));
    assert_eq!(
        cast_message(&c, &cd, "CheckedDict[str, dynamic]"),
        "CheckedDict[str, dyn] expected, got CheckedDict[str, int]"
    );
    let opt = checked(&c, "CheckedDict[str, Union[None, int]]", Vec::new());
    assert!(passes(&c, &opt, "CheckedDict[str, Optional[int]]"));
}

#[test]
fn cast_dyn_accepts_everything() {
    // The row has no failing case: every kind of value passes.
    let c = classes();
    let values = [
        Value::None,
        Value::Int(0),
        Value::Bool(true),
        Value::str(""),
        Value::new_dict(Mapping::new()),
        checked(&c, "CheckedDict[int, int]", Vec::new()),
        object(&c, "A"),
    ];
    for v in &values {
        assert!(passes(&c, v, "dyn"));
        assert!(passes(&c, v, "object"));
    }
}

#[test]
fn cast_class() {
    let c = classes();
    let b = object(&c, "B");
    assert!(passes(&c, &b, "A"));
    assert!(passes(&c, &b, "B"));
    assert!(!passes(&c, &object(&c, "A"), "B"));
    assert!(!passes(&c, &object(&c, "C"), "A"));
    assert_eq!(cast_message(&c, &Value::Int(3), "A"), "A expected, got int");
}

#[test]
fn class_cast_agrees_with_ancestor_enumeration() {
    let c = classes();
    let ancestors = |name: &str| -> Vec<&str> {
        match name {
            "A" => vec!["A", "object"],
            "B" => vec!["B", "A", "object"],
            "C" => vec!["C", "object"],
            _ => unreachable!(),
        }
    };
    for sub in ["A", "B", "C"] {
        for sup in ["A", "B", "C", "object"] {
            let v = object(&c, sub);
            assert_eq!(passes(&c, &v, sup), ancestors(sub).contains(&sup), "{sub} {sup}");
        }
    }
}

#[test]
fn cast_primitives() {
    let c = classes();
    assert!(passes(&c, &Value::None, "None"));
    assert!(!passes(&c, &Value::Int(0), "None"));
    assert!(passes(&c, &Value::Int(5), "int"));
    assert!(passes(&c, &Value::Bool(true), "int"));
    assert!(!passes(&c, &Value::str("5"), "int"));
    assert!(passes(&c, &Value::Bool(false), "bool"));
    assert!(!passes(&c, &Value::Int(1), "bool"));
    assert!(passes(&c, &Value::str("x"), "str"));
    assert!(!passes(&c, &Value::None, "str"));
}

#[test]
fn cast_returns_the_same_value() {
    let c = classes();
    let d = Value::new_dict(Mapping::new());
    let Value::Dict(before) = &d else { unreachable!() };
    let out = cast(&c, d.clone(), &EvalType::Dict).unwrap();
    let Value::Dict(after) = &out else { unreachable!() };
    assert!(Rc::ptr_eq(before, after));
}

#[test]
fn cast_work_is_independent_of_size() {
    let c = classes();
    for n in [0usize, 10, 10_000] {
        let entries = (0..n).map(|i| (Value::str(&i.to_string()), Value::Int(i as i64)));
        let cd = checked(&c, "CheckedDict[str, int]", entries.collect());
        let before = element_visits();
        for t in ["CheckedDict[str, int]", "CheckedDict[str, dyn]", "Optional[CheckedDict[str, int]]", "dyn"] {
            let _ = cast(&c, cd.clone(), &ty(t));
        }
        assert_eq!(element_visits(), before, "n = {n}");
    }
}

#[test]
fn construction_casts_every_element() {
    let c = classes();
    let EvalType::CheckedDict(k, v) = ty("CheckedDict[str, int]") else { unreachable!() };
    let ct = CheckedType::new(&k, &v, &c);
    let mut n = 0;
    let before = element_visits();
    let d = checked_dict_new(&c, &ct, vec![(Value::str("A"), Value::Int(1))], &mut n).unwrap();
    assert_eq!((n, element_visits() - before), (2, 2));
    assert_eq!(d.render(&c), "CheckedDict[str, int]({\"A\": 1})");

    let mut n = 0;
    checked_dict_new(&c, &ct, Vec::new(), &mut n).unwrap();
    assert_eq!(n, 0);

    let err = checked_dict_new(&c, &ct, vec![(Value::str("A"), Value::str("x"))], &mut 0)
        .unwrap_err();
    assert_eq!(err.message, "int expected, got str");
}

#[test]
fn guarded_writes() {
    let c = classes();
    let mut tags = TagCache::default();
    let d = checked(&c, "CheckedDict[str, int]", Vec::new());
    let mut n = 0;
    dict_set_dyn(&c, &mut tags, &d, Value::str("B"), Value::Int(2), &mut n).unwrap();
    assert_eq!(n, 2);
    let e = dict_set_dyn(&c, &mut tags, &d, Value::Int(1), Value::Int(2), &mut n).unwrap_err();
    assert_eq!(e.kind, ErrorKind::CastError);
    assert_eq!(dict_get(&c, &d, &Value::str("B")).unwrap().render(&c), "2");

    let o = checked(&c, "CheckedDict[str, Optional[int]]", Vec::new());
    dict_set_dyn(&c, &mut tags, &o, Value::str("B"), Value::None, &mut n).unwrap();

    // Shallow dictionaries take anything, without element casts.
    let plain = Value::new_dict(Mapping::new());
    let mut m = 0;
    dict_set_dyn(&c, &mut tags, &plain, Value::Int(1), Value::str("x"), &mut m).unwrap();
    assert_eq!(m, 0);
}

#[test]
fn lookups() {
    let c = classes();
    let mut m = Mapping::new();
    m.insert(HashKey::Int(1), Value::Int(1), Value::str("x"));
    let d = Value::new_dict(m);
    assert_eq!(dict_get(&c, &d, &Value::Bool(true)).unwrap().render(&c), "\"x\"");
    let e = dict_get(&c, &d, &Value::str("A")).unwrap_err();
    assert_eq!((e.kind, e.message.as_str()), (ErrorKind::KeyError, "\"A\""));
    assert_eq!(
        dict_get(&c, &Value::Int(3), &Value::Int(0)).unwrap_err().kind,
        ErrorKind::AttributeError
    );
    assert_eq!(dict_set(&c, &d, d.clone(), Value::None).unwrap_err().kind, ErrorKind::KeyError);
}

#[derive(Debug, Clone)]
enum Op {
    Guarded(u8, u8),
    Unguarded(u8, u8),
}

fn value_pool(i: u8) -> Value {
    match i % 6 {
        0 => Value::None,
        1 => Value::Int(i64::from(i)),
        2 => Value::Bool(i.is_multiple_of(2)),
        3 => Value::str(&format!("k{}", i % 5)),
        4 => Value::new_dict(Mapping::new()),
        _ => Value::Int(-1),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Guarded writes of arbitrary values and unguarded writes of values the
    /// static types allow both leave every entry well typed.
    #[test]
    fn checked_dict_entries_stay_well_typed(
        ops in proptest::collection::vec(
            prop_oneof![
                (any::<u8>(), any::<u8>()).prop_map(|(k, v)| Op::Guarded(k, v)),
                (any::<u8>(), any::<u8>()).prop_map(|(k, v)| Op::Unguarded(k, v)),
            ],
            0..40,
        ),
        which in 0usize..3,
    ) {
        let c = classes();
        let t = ["CheckedDict[str, int]", "CheckedDict[int, Optional[str]]", "CheckedDict[Optional[int], dyn]"][which];
        let EvalType::CheckedDict(kt, vt) = ty(t) else { unreachable!() };
        let ct = CheckedType::new(&kt, &vt, &c);
        let d = checked_dict_new(&c, &ct, Vec::new(), &mut 0).unwrap();
        let Value::CheckedDict(cd) = &d else { unreachable!() };
        for op in ops {
            match op {
                Op::Guarded(k, v) => {
                    let _ = checked_dict_set_guarded(&c, &ct, cd, value_pool(k), value_pool(v), &mut 0);
                }
                Op::Unguarded(k, v) => {
                    let (k, v) = (value_pool(k), value_pool(v));
                    if ct.key.check(&k, &c).is_ok() && ct.val.check(&v, &c).is_ok() {
                        let _ = dict_set(&c, &d, k, v);
                    }
                }
            }
        }
        for (k, v) in cd.map.borrow().entries() {
            prop_assert!(ct.key.check(k, &c).is_ok());
            prop_assert!(ct.val.check(v, &c).is_ok());
        }
    }
}
