//! Soundness verdicts, the erasure differential, the golden corpus runner and
//! fuzz campaigns.

mod corpus;
mod fuzz;
mod gen;

pub use corpus::{run_corpus, CorpusCase, CorpusReport, Expectation};
pub use fuzz::{fuzz, program_seed, FuzzReport};
pub use gen::{generate_program, GenConfig};

use std::fmt;

use crate::checker::check_program;
use crate::diag::Code;
use crate::runtime::ErrorKind;
use crate::syntax::*;
use crate::types::EvalType;
use crate::vm::{self, Failure, Options, Outcome};

/// Instruction budget used when none is given.
pub const DEFAULT_BUDGET: u64 = 200_000;

/// The classification of one program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Ran to completion; the last printed value (or `None`) and its static
    /// type.
    WellTypedValue(String, EvalType),
    AllowedError(ErrorKind),
    StaticReject(Vec<Code>),
    Timeout,
    SoundnessViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    WellTypedValue,
    AllowedError,
    StaticReject,
    Timeout,
    SoundnessViolation,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 5] = [
        VerdictKind::WellTypedValue,
        VerdictKind::AllowedError,
        VerdictKind::StaticReject,
        VerdictKind::Timeout,
        VerdictKind::SoundnessViolation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::WellTypedValue => "WellTypedValue",
            VerdictKind::AllowedError => "AllowedError",
            VerdictKind::StaticReject => "StaticReject",
            VerdictKind::Timeout => "Timeout",
            VerdictKind::SoundnessViolation => "SOUNDNESS_VIOLATION",
        }
    }
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::WellTypedValue(..) => VerdictKind::WellTypedValue,
            Verdict::AllowedError(_) => VerdictKind::AllowedError,
            Verdict::StaticReject(_) => VerdictKind::StaticReject,
            Verdict::Timeout => VerdictKind::Timeout,
            Verdict::SoundnessViolation(_) => VerdictKind::SoundnessViolation,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::WellTypedValue(v, t) => write!(f, "value {v} : {t}"),
            Verdict::AllowedError(k) => write!(f, "runtime {k}"),
            Verdict::StaticReject(codes) => {
                f.write_str("static")?;
                for c in codes {
                    write!(f, " {}", c.as_str())?;
                }
                Ok(())
            }
            Verdict::Timeout => f.write_str("timeout"),
            Verdict::SoundnessViolation(d) => write!(f, "SOUNDNESS_VIOLATION: {d}"),
        }
    }
}

/// Replaces every annotation with `dyn` and marks every class `dyn`.
pub fn erase(p: &SurfaceProgram) -> SurfaceProgram {
    fn block(b: &mut Block) {
        for s in b {
            match &mut s.kind {
                StmtKind::LocalDef { ann: Some(t), .. } => *t = SurfaceType::Dyn,
                StmtKind::If { then, els, .. } => {
                    block(then);
                    block(els);
                }
                StmtKind::While { body, .. } => block(body),
                _ => {}
            }
        }
    }
    fn func(f: &mut FuncDef) {
        if let Some(p) = &mut f.param {
            p.ann = SurfaceType::Dyn;
        }
        f.ret = SurfaceType::Dyn;
        block(&mut f.body);
    }
    let mut p = p.clone();
    for s in &mut p.stmts {
        match s {
            TopStmt::Var(v) => v.ann = SurfaceType::Dyn,
            TopStmt::Func(f) => func(f),
            TopStmt::Class(c) => {
                c.dynamic = true;
                if let Some(field) = &mut c.field {
                    field.ann = SurfaceType::Dyn;
                }
                c.methods.iter_mut().for_each(func);
            }
            TopStmt::Assign { .. } | TopStmt::Expr(_) => {}
        }
    }
    p
}

/// Whether the program builds a checked dictionary anywhere. Such programs
/// are exempt from the erasure differential: exact-match tags legitimately
/// change behavior once annotations are gone.
pub fn has_checked_dict_literal(p: &SurfaceProgram) -> bool {
    let mut found = false;
    let mut visit = |e: &Expr| {
        e.walk(&mut |x| found |= matches!(x.kind, ExprKind::ChkDictLit(..)));
    };
    fn block(b: &Block, visit: &mut impl FnMut(&Expr)) {
        for s in b {
            match &s.kind {
                StmtKind::LocalDef { init: e, .. }
                | StmtKind::Assign { value: e, .. }
                | StmtKind::Return(Some(e))
                | StmtKind::Expr(e) => visit(e),
                StmtKind::If { cond, then, els } => {
                    visit(cond);
                    block(then, visit);
                    block(els, visit);
                }
                StmtKind::While { cond, body } => {
                    visit(cond);
                    block(body, visit);
                }
                StmtKind::Break | StmtKind::Pass | StmtKind::Return(None) => {}
            }
        }
    }
    for s in &p.stmts {
        match s {
            TopStmt::Var(VarDef { init: e, .. })
            | TopStmt::Assign { value: e, .. }
            | TopStmt::Expr(e) => visit(e),
            TopStmt::Func(f) => block(&f.body, &mut visit),
            TopStmt::Class(c) => {
                if let Some(field) = &c.field {
                    visit(&field.default);
                }
                for m in &c.methods {
                    block(&m.body, &mut visit);
                }
            }
        }
    }
    found
}

fn options(budget: u64, optimize: bool) -> Options {
    Options {
        budget: Some(budget),
        debug_checks: true,
        optimize,
    }
}

fn classify(out: &Outcome) -> Verdict {
    match &out.result {
        Err(Failure::Internal(msg)) => Verdict::SoundnessViolation(format!("internal error: {msg}")),
        Err(Failure::Timeout) => Verdict::Timeout,
        Err(Failure::Runtime(e)) => Verdict::AllowedError(e.kind),
        Ok(()) => match &out.last {
            None => Verdict::WellTypedValue("None".into(), EvalType::None),
            Some(p) if p.conforms => Verdict::WellTypedValue(p.text.clone(), p.ty.clone()),
            Some(p) => Verdict::SoundnessViolation(format!(
                "printed {} does not have static type {}",
                p.text, p.ty
            )),
        },
    }
}

fn error_kind(out: &Outcome) -> Option<ErrorKind> {
    match &out.result {
        Err(Failure::Runtime(e)) => Some(e.kind),
        _ => None,
    }
}

/// Checks, compiles, optimizes and runs `p` under an instruction budget,
/// then cross-checks the run against the unoptimized build and, when the
/// program builds no checked dictionary, against its erasure.
pub fn soundness_verdict(p: &SurfaceProgram, budget: u64) -> Verdict {
    let elab = match check_program(p) {
        Ok(e) => e,
        Err(diags) => return Verdict::StaticReject(diags.iter().map(|d| d.code).collect()),
    };
    let opt = vm::run(&elab, &options(budget, true));
    let verdict = classify(&opt);
    if verdict.kind() != VerdictKind::WellTypedValue && verdict.kind() != VerdictKind::AllowedError {
        return verdict;
    }

    let plain = vm::run(&elab, &options(budget, false));
    if plain.result != Err(Failure::Timeout)
        && (plain.output != opt.output || error_kind(&plain) != error_kind(&opt))
    {
        return Verdict::SoundnessViolation(format!(
            "optimized and unoptimized runs differ: {:?} / {:?} vs {:?} / {:?}",
            opt.output,
            error_kind(&opt),
            plain.output,
            error_kind(&plain)
        ));
    }
    if let Verdict::SoundnessViolation(_) = classify(&plain) {
        return classify(&plain);
    }

    if opt.result.is_ok() && !has_checked_dict_literal(p) {
        let erased = match check_program(&erase(p)) {
            Ok(e) => e,
            Err(d) => {
                return Verdict::SoundnessViolation(format!(
                    "erased program rejected: {}",
                    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
                ))
            }
        };
        let out = vm::run(&erased, &options(budget, true));
        if out.result != Ok(()) || out.output != opt.output {
            return Verdict::SoundnessViolation(format!(
                "erasure changed the run: {:?} vs {:?} ({:?})",
                opt.output, out.output, out.result
            ));
        }
    }
    verdict
}

/// [`soundness_verdict`] on source text; parse errors are static rejections.
pub fn source_verdict(src: &str, budget: u64) -> Verdict {
    match parse(src) {
        Ok(p) => soundness_verdict(&p, budget),
        Err(diags) => Verdict::StaticReject(diags.iter().map(|d| d.code).collect()),
    }
}

#[cfg(test)]
mod tests;
