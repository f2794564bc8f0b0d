//! Casts a sample of values to every evaluation type and prints which are
//! accepted.

use std::cell::RefCell;
use std::rc::Rc;

use gsp::checker::check_program;
use gsp::runtime::{cast, checked_dict_new, CheckedType, ClassTable, Mapping, Object, Value};
use gsp::syntax::{parse, parse_type};
use gsp::types::retract;

fn main() {
    let program = check_program(&parse("class A:\n    pass\nclass B(A):\n    pass\n").unwrap()).unwrap();
    let classes = ClassTable::build(&program.classes, |_| 0);
    let ty = |s: &str| retract(&parse_type(s).unwrap());
    let obj = |c: &str| {
        Value::Object(Rc::new(Object {
            class: classes.id(c).unwrap(),
            fields: RefCell::new(Vec::new()),
        }))
    };
    let int_tag = CheckedType::new(&ty("str"), &ty("int"), &classes);
    let values = [
        ("None", Value::None),
        ("1", Value::Int(1)),
        ("True", Value::Bool(true)),
        ("\"s\"", Value::str("s")),
        ("{}", Value::new_dict(Mapping::new())),
        ("cd[s,i]", checked_dict_new(&classes, &int_tag, Vec::new(), &mut 0).unwrap()),
        ("A()", obj("A")),
        ("B()", obj("B")),
    ];
    let types = [
        "Optional[str]",
        "Dict[str, int]",
        "CheckedDict[str, int]",
        "CheckedDict[str, dyn]",
        "dyn",
        "A",
        "B",
        "None",
        "int",
        "bool",
        "str",
    ];
    print!("{:24}", "");
    for (name, _) in &values {
        print!("{name:>8.8} ");
    }
    println!();
    for t in types {
        print!("{t:24}");
        for (_, v) in &values {
            let ok = cast(&classes, v.clone(), &ty(t)).is_ok();
            print!("{:>8} ", if ok { "ok" } else { "-" });
        }
        println!();
    }
}
