//! Values, the checked-dict type registry, casts and the class object model.

mod cast;
mod class;
mod error;
mod registry;
mod value;

pub use cast::{
    cast, checked_dict_new, checked_dict_set_guarded, dict_get, dict_set, dict_set_dyn,
    CheckedType, RtType, TagCache, TypeRef,
};
pub use class::{ClassId, ClassRt, ClassTable, Entry, FieldRt, FuncId, VSlotRt};
pub use error::{ErrorKind, RuntimeError};
pub use registry::{registry, Registry, TypeId};
pub use value::{element_visits, CheckedDict, DepthExceeded, HashKey, Mapping, Object, Value};

#[cfg(test)]
mod tests;
