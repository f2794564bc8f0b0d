//! The global registry of instantiated checked-dict types.
//!
//! A checked dictionary carries a [`TypeId`] naming its exact type. Two tags
//! are equal exactly when the types are, so a cast is a single comparison.

use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use indexmap::IndexSet;

use crate::types::EvalType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Append-only bijection between checked-dict types and ids.
#[derive(Debug, Default)]
pub struct Registry {
    types: RwLock<IndexSet<Arc<EvalType>>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The id of `t`, allocating one on first use. Evaluation types are
    /// already normalized, so structural equality is type equality.
    pub fn intern(&self, t: &EvalType) -> TypeId {
        debug_assert!(matches!(t, EvalType::CheckedDict(..)), "interning {t}");
        if let Some(i) = self.types.read().unwrap().get_index_of(t) {
            return TypeId(i as u32);
        }
        let mut types = self.types.write().unwrap();
        let (i, _) = types.insert_full(Arc::new(t.clone()));
        TypeId(i as u32)
    }

    pub fn get(&self, id: TypeId) -> Arc<EvalType> {
        self.types.read().unwrap()[id.index()].clone()
    }

    /// Key and value types of the checked dict named by `id`.
    pub fn params(&self, id: TypeId) -> (EvalType, EvalType) {
        match &*self.get(id) {
            EvalType::CheckedDict(k, v) => ((**k).clone(), (**v).clone()),
            other => unreachable!("registry holds {other}"),
        }
    }

    pub fn len(&self) -> usize {
        self.types.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

static GLOBAL: LazyLock<Registry> = LazyLock::new(Registry::new);

/// The process-wide registry used by every value.
pub fn registry() -> &'static Registry {
    &GLOBAL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;
    use crate::types::retract;
    use proptest::prelude::*;

    fn r(src: &str) -> EvalType {
        retract(&parse_type(src).unwrap())
    }

    #[test]
    fn interning_is_stable() {
        let reg = Registry::new();
        let a = reg.intern(&r("CheckedDict[str, int]"));
        assert_eq!(a, reg.intern(&r("CheckedDict[str, int]")));
        assert_ne!(a, reg.intern(&r("CheckedDict[str, dyn]")));
        assert_eq!(
            reg.intern(&r("CheckedDict[str, Union[None, int]]")),
            reg.intern(&r("CheckedDict[str, Optional[int]]"))
        );
        assert_eq!(reg.len(), 3);
        assert_eq!(reg.get(a).to_string(), "CheckedDict[str, int]");
    }

    fn leaf() -> impl Strategy<Value = EvalType> {
        prop_oneof![
            Just(EvalType::Dyn),
            Just(EvalType::None),
            Just(EvalType::Int),
            Just(EvalType::Bool),
            Just(EvalType::Str),
            Just(EvalType::Dict),
            "[A-D]".prop_map(EvalType::class),
        ]
    }

    fn eval_type() -> impl Strategy<Value = EvalType> {
        leaf().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(k, v)| EvalType::checked_dict(k, v)),
                inner.prop_map(EvalType::optional),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn registry_is_a_bijection(
            ts in proptest::collection::vec((eval_type(), eval_type()), 1..20)
        ) {
            let reg = Registry::new();
            let ts: Vec<EvalType> =
                ts.into_iter().map(|(k, v)| EvalType::checked_dict(k, v)).collect();
            let ids: Vec<TypeId> = ts.iter().map(|t| reg.intern(t)).collect();
            let distinct: std::collections::HashSet<&EvalType> = ts.iter().collect();
            prop_assert_eq!(reg.len(), distinct.len());
            for (t, id) in ts.iter().zip(&ids) {
                prop_assert_eq!(reg.intern(t), *id);
                prop_assert_eq!(&*reg.get(*id), t);
            }
        }
    }
}
