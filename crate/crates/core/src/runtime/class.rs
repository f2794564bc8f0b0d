//! Run-time class objects: field layouts and vtables.

use std::collections::HashMap;

use super::cast::TypeRef;
use crate::checker::ElabClass;
use crate::types::EvalType;

/// Index of a compiled function.
pub type FuncId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

#[derive(Debug, Clone)]
pub struct FieldRt {
    pub name: String,
    pub ty: TypeRef,
    /// Computes the field's default value.
    pub default: FuncId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Direct(FuncId),
    /// An untyped override of a typed method: its result is cast to the
    /// overridden method's return type.
    Wrapper(FuncId, TypeRef),
}

impl Entry {
    pub fn func(&self) -> FuncId {
        match self {
            Entry::Direct(f) | Entry::Wrapper(f, _) => *f,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VSlotRt {
    pub name: String,
    pub entry: Entry,
}

#[derive(Debug, Clone)]
pub struct ClassRt {
    pub name: String,
    pub parent: Option<ClassId>,
    pub dynamic: bool,
    pub fields: Vec<FieldRt>,
    pub vtable: Vec<VSlotRt>,
}

#[derive(Debug, Clone, Default)]
pub struct ClassTable {
    classes: Vec<ClassRt>,
    by_name: HashMap<String, ClassId>,
}

impl ClassTable {
    /// Builds the table from checked classes (parents first). `func_id` maps
    /// qualified method and default names to compiled functions.
    pub fn build(classes: &[ElabClass], func_id: impl Fn(&str) -> FuncId) -> Self {
        let mut table = ClassTable::default();
        for (i, c) in classes.iter().enumerate() {
            let id = ClassId(i as u32);
            table.by_name.insert(c.name.clone(), id);
            table.classes.push(ClassRt {
                name: c.name.clone(),
                parent: c.parent.as_ref().map(|p| table.by_name[p.as_str()]),
                dynamic: c.dynamic,
                fields: Vec::new(),
                vtable: Vec::new(),
            });
        }
        for (i, c) in classes.iter().enumerate() {
            let fields = c
                .fields
                .iter()
                .map(|f| FieldRt {
                    name: f.name.clone(),
                    ty: TypeRef::new(&f.ty, &table),
                    default: func_id(&f.default),
                })
                .collect();
            let vtable = c
                .vtable
                .iter()
                .map(|s| {
                    let f = func_id(&s.func);
                    VSlotRt {
                        name: s.name.clone(),
                        entry: match &s.wrapper {
                            Some(t) => Entry::Wrapper(f, TypeRef::new(t, &table)),
                            None => Entry::Direct(f),
                        },
                    }
                })
                .collect();
            table.classes[i].fields = fields;
            table.classes[i].vtable = vtable;
        }
        table
    }

    pub fn get(&self, id: ClassId) -> &ClassRt {
        &self.classes[id.0 as usize]
    }

    pub fn id(&self, name: &str) -> Option<ClassId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &ClassRt)> {
        self.classes
            .iter()
            .enumerate()
            .map(|(i, c)| (ClassId(i as u32), c))
    }

    /// `c` is `ancestor` or one of its descendants.
    pub fn is_subclass(&self, c: ClassId, ancestor: ClassId) -> bool {
        let mut cur = Some(c);
        while let Some(k) = cur {
            if k == ancestor {
                return true;
            }
            cur = self.get(k).parent;
        }
        false
    }

    /// The vtable entry in `slot` of the receiver's class.
    pub fn dispatch(&self, c: ClassId, slot: usize) -> &Entry {
        &self.get(c).vtable[slot].entry
    }

    pub fn method_slot(&self, c: ClassId, name: &str) -> Option<usize> {
        self.get(c).vtable.iter().position(|s| s.name == name)
    }

    pub fn field_slot(&self, c: ClassId, name: &str) -> Option<usize> {
        self.get(c).fields.iter().position(|f| f.name == name)
    }

    /// Classes that may appear in a type: every class plus `object`.
    pub fn resolve_class(&self, name: &str) -> ClassId {
        self.id(name)
            .unwrap_or_else(|| panic!("class `{name}` is not in the program"))
    }

    /// The declared return types guarded by wrappers, per class and slot.
    pub fn wrapper_types(&self) -> Vec<(ClassId, usize, &EvalType)> {
        let mut out = Vec::new();
        for (id, c) in self.iter() {
            for (slot, s) in c.vtable.iter().enumerate() {
                if let Entry::Wrapper(_, t) = &s.entry {
                    out.push((id, slot, &t.ty));
                }
            }
        }
        out
    }
}
