//! Evaluation types, retraction from surface types, and the static
//! judgments: subtyping (`≤:`), consistent subtyping (`⊑`) and
//! materialization (`≺`).

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::syntax::SurfaceType;

pub const OBJECT: &str = "object";

/// The enforceable types. `Optional` never wraps `Dyn`, `None` or another
/// `Optional`; use [`EvalType::optional`] to build one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalType {
    Dyn,
    None,
    Int,
    Bool,
    Str,
    Class(String),
    /// Shallow dictionary; its parameters are erased.
    Dict,
    CheckedDict(Box<EvalType>, Box<EvalType>),
    Optional(Box<EvalType>),
}

impl EvalType {
    pub fn class(name: impl Into<String>) -> Self {
        EvalType::Class(name.into())
    }

    pub fn object() -> Self {
        EvalType::Class(OBJECT.into())
    }

    pub fn checked_dict(k: EvalType, v: EvalType) -> Self {
        EvalType::CheckedDict(Box::new(k), Box::new(v))
    }

    /// `Optional[t]`, collapsed the same way normalization collapses it.
    pub fn optional(t: EvalType) -> Self {
        match t {
            EvalType::Dyn | EvalType::None | EvalType::Optional(_) => t,
            t => EvalType::Optional(Box::new(t)),
        }
    }

    pub fn is_dyn(&self) -> bool {
        matches!(self, EvalType::Dyn)
    }

    /// True when the type mentions `Dyn` anywhere.
    pub fn mentions_dyn(&self) -> bool {
        match self {
            EvalType::Dyn => true,
            EvalType::CheckedDict(k, v) => k.mentions_dyn() || v.mentions_dyn(),
            EvalType::Optional(t) => t.mentions_dyn(),
            _ => false,
        }
    }

    pub fn for_each_class(&self, f: &mut impl FnMut(&str)) {
        match self {
            EvalType::Class(c) => f(c),
            EvalType::CheckedDict(k, v) => {
                k.for_each_class(f);
                v.for_each_class(f);
            }
            EvalType::Optional(t) => t.for_each_class(f),
            _ => {}
        }
    }
}

impl fmt::Display for EvalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalType::Dyn => f.write_str("dyn"),
            EvalType::None => f.write_str("None"),
            EvalType::Int => f.write_str("int"),
            EvalType::Bool => f.write_str("bool"),
            EvalType::Str => f.write_str("str"),
            EvalType::Class(c) => f.write_str(c),
            EvalType::Dict => f.write_str("Dict[dyn, dyn]"),
            EvalType::CheckedDict(k, v) => write!(f, "CheckedDict[{k}, {v}]"),
            EvalType::Optional(t) => write!(f, "Optional[{t}]"),
        }
    }
}

/// Flattens and canonicalizes unions. A union containing `Dyn` is `Dyn`, a
/// singleton union is its element and `Union[None, S]` becomes `Optional[S]`.
pub fn normalize(s: &SurfaceType) -> SurfaceType {
    match s {
        SurfaceType::Dict(k, v) => SurfaceType::dict(normalize(k), normalize(v)),
        SurfaceType::CheckedDict(k, v) => SurfaceType::checked_dict(normalize(k), normalize(v)),
        SurfaceType::Optional(t) => normalize_union(&[SurfaceType::None, (**t).clone()]),
        SurfaceType::Union(items) => normalize_union(items),
        other => other.clone(),
    }
}

fn normalize_union(items: &[SurfaceType]) -> SurfaceType {
    let mut flat = Vec::new();
    for item in items {
        match normalize(item) {
            SurfaceType::Union(inner) => flat.extend(inner),
            SurfaceType::Optional(t) => {
                flat.push(SurfaceType::None);
                flat.push(*t);
            }
            t => flat.push(t),
        }
    }
    if flat.contains(&SurfaceType::Dyn) {
        return SurfaceType::Dyn;
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        1 => flat.pop().unwrap(),
        2 if flat[0] == SurfaceType::None => SurfaceType::Optional(Box::new(flat.pop().unwrap())),
        _ => SurfaceType::Union(flat),
    }
}

/// The surface-to-evaluation mapping. Normalizes first.
pub fn retract(s: &SurfaceType) -> EvalType {
    retract_normal(&normalize(s))
}

fn retract_normal(s: &SurfaceType) -> EvalType {
    match s {
        SurfaceType::Dyn => EvalType::Dyn,
        SurfaceType::None => EvalType::None,
        SurfaceType::Int => EvalType::Int,
        SurfaceType::Bool => EvalType::Bool,
        SurfaceType::Str => EvalType::Str,
        SurfaceType::Class(c) => EvalType::Class(c.clone()),
        SurfaceType::Dict(..) => EvalType::Dict,
        SurfaceType::CheckedDict(k, v) => EvalType::checked_dict(retract_normal(k), retract_normal(v)),
        SurfaceType::Optional(t) => EvalType::optional(retract_normal(t)),
        SurfaceType::Union(_) => EvalType::Dyn,
    }
}

/// Syntactic injection of evaluation types into surface types.
pub fn embed(t: &EvalType) -> SurfaceType {
    match t {
        EvalType::Dyn => SurfaceType::Dyn,
        EvalType::None => SurfaceType::None,
        EvalType::Int => SurfaceType::Int,
        EvalType::Bool => SurfaceType::Bool,
        EvalType::Str => SurfaceType::Str,
        EvalType::Class(c) => SurfaceType::Class(c.clone()),
        EvalType::Dict => SurfaceType::dict(SurfaceType::Dyn, SurfaceType::Dyn),
        EvalType::CheckedDict(k, v) => SurfaceType::checked_dict(embed(k), embed(v)),
        EvalType::Optional(t) => SurfaceType::Optional(Box::new(embed(t))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSig {
    pub ann: SurfaceType,
    pub ty: EvalType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncSig {
    pub param: Option<EvalType>,
    pub ret: EvalType,
    /// False when every annotation retracts to `Dyn`.
    pub typed: bool,
}

impl FuncSig {
    pub fn arity(&self) -> usize {
        usize::from(self.param.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub param: Option<EvalType>,
    pub ret: EvalType,
    pub declaring: String,
}

impl MethodSig {
    pub fn arity(&self) -> usize {
        usize::from(self.param.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSig {
    pub name: String,
    pub ty: EvalType,
    pub declaring: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSig {
    /// `None` only for `object`.
    pub parent: Option<String>,
    pub dynamic: bool,
    pub field: Option<FieldSig>,
    /// Methods declared by this class itself, in source order.
    pub methods: IndexMap<String, MethodSig>,
}

/// Top-level declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEnv {
    pub vars: IndexMap<String, VarSig>,
    pub funcs: IndexMap<String, FuncSig>,
    pub classes: IndexMap<String, ClassSig>,
}

impl Default for TypeEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeEnv {
    /// An environment holding only the builtin `object` class.
    pub fn new() -> Self {
        let mut classes = IndexMap::new();
        classes.insert(
            OBJECT.to_string(),
            ClassSig {
                parent: None,
                dynamic: false,
                field: None,
                methods: IndexMap::new(),
            },
        );
        TypeEnv {
            vars: IndexMap::new(),
            funcs: IndexMap::new(),
            classes,
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassSig> {
        self.classes.get(name)
    }

    /// `name` followed by its ancestors up to `object`.
    pub fn ancestors<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let mut cur = self.classes.get_key_value(name).map(|(k, _)| k.as_str());
        std::iter::from_fn(move || {
            let c = cur?;
            cur = self.classes[c].parent.as_deref();
            Some(c)
        })
    }

    pub fn is_descendant(&self, c: &str, ancestor: &str) -> bool {
        self.ancestors(c).any(|a| a == ancestor)
    }

    /// Field visible on `c`, searching ancestors.
    pub fn lookup_field(&self, c: &str, name: &str) -> Option<&FieldSig> {
        self.ancestors(c)
            .filter_map(|a| self.classes[a].field.as_ref())
            .find(|f| f.name == name)
    }

    /// Nearest declaration of method `name` visible on `c`.
    pub fn lookup_method(&self, c: &str, name: &str) -> Option<&MethodSig> {
        self.ancestors(c)
            .find_map(|a| self.classes[a].methods.get(name))
    }

    /// All fields of `c` in slot order: the root's field first.
    pub fn fields(&self, c: &str) -> Vec<&FieldSig> {
        let mut out: Vec<&FieldSig> = self
            .ancestors(c)
            .filter_map(|a| self.classes[a].field.as_ref())
            .collect();
        out.reverse();
        out
    }

    pub fn check_classes(&self, t: &EvalType) -> Result<(), TypeError> {
        let mut missing = None;
        t.for_each_class(&mut |c| {
            if missing.is_none() && !self.classes.contains_key(c) {
                missing = Some(c.to_string());
            }
        });
        missing.map_or(Ok(()), |c| Err(TypeError::UnknownClass(c)))
    }
}

/// `t0 ≤: t1`.
pub fn is_subtype(env: &TypeEnv, t0: &EvalType, t1: &EvalType) -> Result<bool, TypeError> {
    env.check_classes(t0)?;
    env.check_classes(t1)?;
    Ok(subtype(env, t0, t1))
}

/// [`is_subtype`] for types already known to be valid in `env`.
pub fn subtype(env: &TypeEnv, t0: &EvalType, t1: &EvalType) -> bool {
    use EvalType as T;
    if t0 == t1 {
        return true;
    }
    match (t0, t1) {
        (T::Dyn, _) | (_, T::Dyn) => false,
        (_, T::Class(c)) if c == OBJECT => true,
        (T::Bool, T::Int) => true,
        (T::Class(a), T::Class(b)) => env.is_descendant(a, b),
        (T::Optional(a), T::Optional(b)) => subtype(env, a, b),
        (T::None, T::Optional(_)) => true,
        (_, T::Optional(b)) => subtype(env, t0, b),
        _ => false,
    }
}

/// `t0 ⊑ t1`: subtyping, or the target is `Dyn`.
pub fn is_consistent_subtype(
    env: &TypeEnv,
    t0: &EvalType,
    t1: &EvalType,
) -> Result<bool, TypeError> {
    Ok(t1.is_dyn() || is_subtype(env, t0, t1)?)
}

/// `t0 ≺ t1`: only `Dyn` materializes, and only to a non-`Dyn` type.
pub fn materializes(t0: &EvalType, t1: &EvalType) -> bool {
    t0.is_dyn() && !t1.is_dyn()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coercion {
    Accept,
    InsertCast,
    Reject,
}

/// The single coercion allowed at an elimination position.
pub fn coerce(env: &TypeEnv, actual: &EvalType, expected: &EvalType) -> Coercion {
    if expected.is_dyn() || subtype(env, actual, expected) {
        Coercion::Accept
    } else if materializes(actual, expected) {
        Coercion::InsertCast
    } else {
        Coercion::Reject
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn st(src: &str) -> SurfaceType {
        parse_type(src).unwrap()
    }

    fn r(src: &str) -> EvalType {
        retract(&st(src))
    }

    fn env_ab() -> TypeEnv {
        let mut env = TypeEnv::new();
        for (c, p) in [("A", OBJECT), ("B", "A")] {
            env.classes.insert(
                c.into(),
                ClassSig {
                    parent: Some(p.into()),
                    dynamic: false,
                    field: None,
                    methods: IndexMap::new(),
                },
            );
        }
        env
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&st("Union[int, Union[dyn, C0]]")), SurfaceType::Dyn);
        assert_eq!(normalize(&st("Optional[dyn]")), SurfaceType::Dyn);
        assert_eq!(
            normalize(&st("Union[None, str]")),
            SurfaceType::Optional(Box::new(SurfaceType::Str))
        );
        assert_eq!(normalize(&st("Union[int]")), SurfaceType::Int);
        assert_eq!(normalize(&st("Optional[None]")), SurfaceType::None);
        assert_eq!(
            normalize(&st("Optional[Optional[int]]")),
            SurfaceType::Optional(Box::new(SurfaceType::Int))
        );
        assert_eq!(
            normalize(&st("Union[str, int, str, None]")),
            SurfaceType::Union(vec![SurfaceType::None, SurfaceType::Int, SurfaceType::Str])
        );
    }

    #[test]
    fn retract_examples() {
        assert_eq!(r("Dict[str, int]"), EvalType::Dict);
        assert_eq!(r("Union[int, str]"), EvalType::Dyn);
        assert_eq!(
            r("CheckedDict[Dict[int, int], Optional[str]]"),
            EvalType::checked_dict(EvalType::Dict, EvalType::Optional(Box::new(EvalType::Str)))
        );
        // A union under Optional collapses to dyn, and so does the Optional.
        assert_eq!(r("Optional[Union[int, str]]"), EvalType::Dyn);
        assert_eq!(r("Union[None, int, str]"), EvalType::Dyn);
        assert_eq!(r("dynamic"), EvalType::Dyn);
    }

    #[test]
    fn rendering_matches_surface_grammar() {
        assert_eq!(r("CheckedDict[str, dyn]").to_string(), "CheckedDict[str, dyn]");
        assert_eq!(r("Dict[str, int]").to_string(), "Dict[dyn, dyn]");
        assert_eq!(r("Optional[C]").to_string(), "Optional[C]");
        for src in ["CheckedDict[str, Optional[int]]", "Optional[Dict[dyn, dyn]]", "None"] {
            assert_eq!(r(&r(src).to_string()), r(src));
        }
    }

    #[test]
    fn subtype_examples() {
        let env = env_ab();
        let sub = |a: &str, b: &str| is_subtype(&env, &r(a), &r(b)).unwrap();
        assert!(sub("bool", "int"));
        assert!(!sub("int", "bool"));
        assert!(sub("None", "Optional[str]"));
        assert!(sub("B", "Optional[A]"));
        assert!(sub("Optional[B]", "Optional[A]"));
        assert!(!sub("Optional[A]", "A"));
        assert!(!sub("CheckedDict[str, int]", "CheckedDict[str, dyn]"));
        assert!(sub("CheckedDict[str, int]", "object"));
        assert!(sub("Dict[int, int]", "Dict[str, str]"));
        assert!(!sub("dyn", "object"));
        assert!(sub("dyn", "dyn"));
        assert!(!sub("int", "dyn"));
        assert_eq!(
            is_subtype(&env, &EvalType::class("Z"), &EvalType::Int),
            Err(TypeError::UnknownClass("Z".into()))
        );
    }

    #[test]
    fn consistency_and_materialization_examples() {
        let env = env_ab();
        let cs = |a: &str, b: &str| is_consistent_subtype(&env, &r(a), &r(b)).unwrap();
        assert!(cs("CheckedDict[str, int]", "dyn"));
        assert!(!cs("dyn", "int"));
        assert!(cs("bool", "int"));
        assert!(materializes(&EvalType::Dyn, &EvalType::Str));
        assert!(!materializes(&EvalType::Dyn, &EvalType::Dyn));
        assert!(!materializes(&EvalType::Int, &EvalType::Str));
    }

    #[test]
    fn coerce_examples() {
        let env = env_ab();
        let c = |a: &str, b: &str| coerce(&env, &r(a), &r(b));
        assert_eq!(c("bool", "int"), Coercion::Accept);
        assert_eq!(c("dyn", "str"), Coercion::InsertCast);
        assert_eq!(c("int", "str"), Coercion::Reject);
        assert_eq!(c("CheckedDict[str, int]", "CheckedDict[str, dyn]"), Coercion::Reject);
        assert_eq!(c("dyn", "dyn"), Coercion::Accept);
    }

    #[test]
    fn env_lookups() {
        let env = env_ab();
        assert_eq!(env.ancestors("B").collect::<Vec<_>>(), ["B", "A", OBJECT]);
        assert!(env.is_descendant("B", OBJECT));
        assert!(!env.is_descendant("A", "B"));
        assert_eq!(TypeEnv::new().classes.len(), 1);
    }

    // ---- property tests ----

    fn surface_strategy() -> impl Strategy<Value = SurfaceType> {
        let leaf = prop_oneof![
            Just(SurfaceType::Dyn),
            Just(SurfaceType::None),
            Just(SurfaceType::Int),
            Just(SurfaceType::Bool),
            Just(SurfaceType::Str),
            Just(SurfaceType::class("C0")),
            Just(SurfaceType::class("C1")),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(k, v)| SurfaceType::dict(k, v)),
                (inner.clone(), inner.clone()).prop_map(|(k, v)| SurfaceType::checked_dict(k, v)),
                prop::collection::vec(inner.clone(), 1..4).prop_map(SurfaceType::Union),
                inner.prop_map(|t| SurfaceType::Optional(Box::new(t))),
            ]
        })
    }

    fn eval_strategy(nclasses: usize) -> impl Strategy<Value = EvalType> {
        let mut atoms = vec![
            EvalType::Dyn,
            EvalType::None,
            EvalType::Int,
            EvalType::Bool,
            EvalType::Str,
            EvalType::Dict,
            EvalType::object(),
        ];
        atoms.extend((0..nclasses).map(|i| EvalType::class(format!("C{i}"))));
        let leaf = prop::sample::select(atoms);
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(k, v)| EvalType::checked_dict(k, v)),
                inner.prop_map(EvalType::optional),
            ]
        })
    }

    /// A random class forest of up to six classes; parent indices point
    /// backwards so the graph is a tree under `object`.
    fn env_strategy() -> impl Strategy<Value = TypeEnv> {
        (0usize..=6)
            .prop_flat_map(|n| prop::collection::vec(any::<prop::sample::Index>(), n))
            .prop_map(|parents| {
                let mut env = TypeEnv::new();
                for (i, p) in parents.iter().enumerate() {
                    let choice = p.index(i + 1);
                    let parent = if choice == i {
                        OBJECT.to_string()
                    } else {
                        format!("C{choice}")
                    };
                    env.classes.insert(
                        format!("C{i}"),
                        ClassSig {
                            parent: Some(parent),
                            dynamic: false,
                            field: None,
                            methods: IndexMap::new(),
                        },
                    );
                }
                env
            })
    }

    fn subterms(t: &EvalType, out: &mut BTreeSet<EvalType>) {
        out.insert(t.clone());
        match t {
            EvalType::CheckedDict(k, v) => {
                subterms(k, out);
                subterms(v, out);
            }
            EvalType::Optional(x) => subterms(x, out),
            _ => {}
        }
    }

    /// Least relation over `universe` closed under the rules of `≤:`,
    /// computed by saturating one-step rules and transitivity.
    fn closure_oracle(env: &TypeEnv, universe: &[EvalType]) -> Vec<Vec<bool>> {
        let n = universe.len();
        let idx = |t: &EvalType| universe.iter().position(|u| u == t);
        let mut rel = vec![vec![false; n]; n];
        for (i, a) in universe.iter().enumerate() {
            rel[i][i] = true;
            for (j, b) in universe.iter().enumerate() {
                let base = match (a, b) {
                    (EvalType::Dyn, _) => false,
                    (_, EvalType::Class(c)) if c == OBJECT => true,
                    (EvalType::Bool, EvalType::Int) => true,
                    (EvalType::Class(x), EvalType::Class(y)) => {
                        env.classes[x.as_str()].parent.as_deref() == Some(y.as_str())
                    }
                    (EvalType::None, EvalType::Optional(_)) => true,
                    _ => false,
                };
                rel[i][j] |= base;
            }
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if !rel[i][j] {
                        continue;
                    }
                    // T0 <: T1  =>  T0 <: Optional[T1]
                    if let Some(k) = idx(&EvalType::Optional(Box::new(universe[j].clone()))) {
                        if !rel[i][k] {
                            rel[i][k] = true;
                            changed = true;
                        }
                    }
                    // Optional covariance.
                    if let (Some(a), Some(b)) = (
                        idx(&EvalType::Optional(Box::new(universe[i].clone()))),
                        idx(&EvalType::Optional(Box::new(universe[j].clone()))),
                    ) {
                        if !rel[a][b] {
                            rel[a][b] = true;
                            changed = true;
                        }
                    }
                }
            }
            for k in 0..n {
                for i in 0..n {
                    if rel[i][k] {
                        for j in 0..n {
                            if rel[k][j] && !rel[i][j] {
                                rel[i][j] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return rel;
            }
        }
    }

    /// Replaces classes missing from `env` with `object`.
    fn known_classes(env: &TypeEnv, t: &EvalType) -> EvalType {
        match t {
            EvalType::Class(c) if !env.classes.contains_key(c) => EvalType::object(),
            EvalType::CheckedDict(k, v) => {
                EvalType::checked_dict(known_classes(env, k), known_classes(env, v))
            }
            EvalType::Optional(x) => EvalType::optional(known_classes(env, x)),
            other => other.clone(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn normalize_is_idempotent(s in surface_strategy()) {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn retract_output_is_well_formed(s in surface_strategy()) {
            fn ok(t: &EvalType) -> bool {
                match t {
                    EvalType::Optional(x) => {
                        !matches!(**x, EvalType::Dyn | EvalType::None | EvalType::Optional(_)) && ok(x)
                    }
                    EvalType::CheckedDict(k, v) => ok(k) && ok(v),
                    _ => true,
                }
            }
            prop_assert!(ok(&retract(&s)));
        }

        #[test]
        fn retract_embed_round_trips(t in eval_strategy(2)) {
            prop_assert_eq!(retract(&embed(&t)), t.clone());
            prop_assert_eq!(retract(&SurfaceType::Optional(Box::new(embed(&t)))), EvalType::optional(t));
        }

        #[test]
        fn subtyping_matches_closure_oracle(
            env in env_strategy(),
            samples in prop::collection::vec(eval_strategy(6), 1..6),
        ) {
            let known: Vec<EvalType> = samples.iter().map(|t| known_classes(&env, t)).collect();
            let mut set = BTreeSet::new();
            for atom in [EvalType::Dyn, EvalType::None, EvalType::Int, EvalType::Bool, EvalType::Str, EvalType::Dict] {
                set.insert(atom);
            }
            for c in env.classes.keys() {
                set.insert(EvalType::class(c.clone()));
            }
            for t in &known {
                subterms(t, &mut set);
            }
            let base: Vec<EvalType> = set.iter().cloned().collect();
            for t in base {
                let o = EvalType::optional(t);
                set.insert(o);
            }
            let universe: Vec<EvalType> = set.into_iter().collect();
            let oracle = closure_oracle(&env, &universe);
            for (i, a) in universe.iter().enumerate() {
                for (j, b) in universe.iter().enumerate() {
                    prop_assert_eq!(
                        is_subtype(&env, a, b).unwrap(),
                        oracle[i][j],
                        "{} <: {}", a, b
                    );
                }
            }
        }

        #[test]
        fn consistency_laws(env in env_strategy(), t in eval_strategy(6), u in eval_strategy(6)) {
            let (t, u) = (known_classes(&env, &t), known_classes(&env, &u));
            prop_assert!(is_consistent_subtype(&env, &t, &EvalType::Dyn).unwrap());
            prop_assert!(materializes(&EvalType::Dyn, &t) ^ t.is_dyn());
            if is_subtype(&env, &t, &u).unwrap() {
                prop_assert!(is_consistent_subtype(&env, &t, &u).unwrap());
            }
            let c = coerce(&env, &t, &u);
            prop_assert_eq!(c == Coercion::Accept, is_consistent_subtype(&env, &t, &u).unwrap());
            prop_assert_eq!(c == Coercion::InsertCast, materializes(&t, &u) && !is_consistent_subtype(&env, &t, &u).unwrap());
        }
    }
}
