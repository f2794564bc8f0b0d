use std::fmt;

use serde::Serialize;

use crate::syntax::Span;

/// Stable diagnostic codes reported by the parser and the checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    Syntax,
    UnknownClass,
    DupName,
    TypeMismatch,
    UnknownMember,
    Arity,
    ImpreciseOverride,
    IncompatOverride,
    ImplicitNoneReturn,
    ImmutableModuleVar,
    DynClassPreciseAnn,
}

impl Code {
    pub const ALL: [Code; 11] = [
        Code::Syntax,
        Code::UnknownClass,
        Code::DupName,
        Code::TypeMismatch,
        Code::UnknownMember,
        Code::Arity,
        Code::ImpreciseOverride,
        Code::IncompatOverride,
        Code::ImplicitNoneReturn,
        Code::ImmutableModuleVar,
        Code::DynClassPreciseAnn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "E-SYNTAX",
            Code::UnknownClass => "E-UNKNOWN-CLASS",
            Code::DupName => "E-DUP-NAME",
            Code::TypeMismatch => "E-TYPE-MISMATCH",
            Code::UnknownMember => "E-UNKNOWN-MEMBER",
            Code::Arity => "E-ARITY",
            Code::ImpreciseOverride => "E-IMPRECISE-OVERRIDE",
            Code::IncompatOverride => "E-INCOMPAT-OVERRIDE",
            Code::ImplicitNoneReturn => "E-IMPLICIT-NONE-RETURN",
            Code::ImmutableModuleVar => "E-IMMUTABLE-MODULE-VAR",
            Code::DynClassPreciseAnn => "E-DYNCLASS-PRECISE-ANN",
        }
    }

    pub fn parse(s: &str) -> Option<Code> {
        Code::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A static error. Every diagnostic is an error; there are no warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} {}",
            self.span.line, self.span.col, self.code, self.message
        )
    }
}

#[derive(Serialize)]
struct JsonDiagnostic<'a> {
    code: &'a str,
    message: &'a str,
    line: u32,
    col: u32,
}

/// Renders diagnostics as a top-level JSON array of
/// `{"code", "message", "line", "col"}` objects.
pub fn to_json(diags: &[Diagnostic]) -> String {
    let items: Vec<JsonDiagnostic<'_>> = diags
        .iter()
        .map(|d| JsonDiagnostic {
            code: d.code.as_str(),
            message: &d.message,
            line: d.span.line,
            col: d.span.col,
        })
        .collect();
    serde_json::to_string(&items).expect("diagnostics serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip_through_strings() {
        for c in Code::ALL {
            assert_eq!(Code::parse(c.as_str()), Some(c));
        }
        assert_eq!(Code::parse("E-NOPE"), None);
    }

    #[test]
    fn json_shape() {
        let d = Diagnostic::new(Code::Arity, Span { line: 3, col: 5 }, "bad \"arity\"");
        assert_eq!(
            to_json(&[d]),
            r#"[{"code":"E-ARITY","message":"bad \"arity\"","line":3,"col":5}]"#
        );
        assert_eq!(to_json(&[]), "[]");
    }
}
