//! The call-site optimizer.

use super::bytecode::{BytecodeModule, EntryPoint, Instr};

/// Points every static-strict call at the callee's fast entry, skipping its
/// argument checks. Returns the number of sites rewritten.
pub fn optimize(m: &mut BytecodeModule) -> usize {
    let mut n = 0;
    for f in &mut m.funcs {
        for &at in &f.strict_sites {
            match &mut f.code[at as usize] {
                Instr::InvokeFunction { entry, .. } | Instr::InvokeMethod { entry, .. } => {
                    *entry = EntryPoint::Fast;
                    n += 1;
                }
                other => unreachable!("strict site at {at} is {other:?}"),
            }
        }
    }
    n
}
