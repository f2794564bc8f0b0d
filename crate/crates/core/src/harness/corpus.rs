//! The golden corpus: source files with an expectation header.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use super::{source_verdict, Verdict, DEFAULT_BUDGET};
use crate::diag::Code;
use crate::runtime::ErrorKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    /// The last printed value renders as given.
    Value(String),
    Static(Code),
    Runtime(ErrorKind),
}

impl Expectation {
    /// Reads the first `# expect:` line of a source file.
    pub fn from_source(src: &str) -> Result<Expectation, String> {
        let line = src
            .lines()
            .find_map(|l| l.trim().strip_prefix("# expect:"))
            .ok_or("missing `# expect:` header")?
            .trim();
        let (what, arg) = line.split_once(' ').ok_or_else(|| format!("bad header `{line}`"))?;
        let arg = arg.trim();
        match what {
            "value" => Ok(Expectation::Value(arg.to_string())),
            "static" => Code::parse(arg)
                .map(Expectation::Static)
                .ok_or_else(|| format!("unknown code `{arg}`")),
            "runtime" => ErrorKind::parse(arg)
                .map(Expectation::Runtime)
                .ok_or_else(|| format!("unknown error kind `{arg}`")),
            _ => Err(format!("bad header `{line}`")),
        }
    }

    pub fn matches(&self, v: &Verdict) -> bool {
        match (self, v) {
            (Expectation::Value(r), Verdict::WellTypedValue(text, _)) => r == text,
            (Expectation::Static(c), Verdict::StaticReject(codes)) => codes.contains(c),
            (Expectation::Runtime(k), Verdict::AllowedError(got)) => k == got,
            _ => false,
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Value(r) => write!(f, "value {r}"),
            Expectation::Static(c) => write!(f, "static {c}"),
            Expectation::Runtime(k) => write!(f, "runtime {k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub path: PathBuf,
    pub expected: Result<Expectation, String>,
    pub verdict: Verdict,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub cases: Vec<CorpusCase>,
}

impl CorpusReport {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.cases.len() - self.passed()
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            let name = c.path.file_name().unwrap_or_default().to_string_lossy();
            match (&c.expected, c.passed) {
                (_, true) => writeln!(f, "PASS {name}")?,
                (Ok(e), false) => writeln!(f, "FAIL {name}: expected {e}, got {}", c.verdict)?,
                (Err(msg), false) => writeln!(f, "FAIL {name}: {msg}")?,
            }
        }
        writeln!(
            f,
            "{} passed, {} failed, {} total",
            self.passed(),
            self.failed(),
            self.cases.len()
        )
    }
}

/// Runs every `.gsp` file in `dir`, in name order.
pub fn run_corpus(dir: &Path) -> io::Result<CorpusReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "gsp"));
    paths.sort();
    let mut report = CorpusReport::default();
    for path in paths {
        let src = std::fs::read_to_string(&path)?;
        let expected = Expectation::from_source(&src);
        let verdict = source_verdict(&src, DEFAULT_BUDGET);
        let passed = expected.as_ref().is_ok_and(|e| e.matches(&verdict));
        report.cases.push(CorpusCase {
            path,
            expected,
            verdict,
            passed,
        });
    }
    Ok(report)
}
