//! Fuzz campaigns over generated programs.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use super::{generate_program, has_checked_dict_literal, soundness_verdict, GenConfig, Verdict, VerdictKind};

#[derive(Debug, Clone, Default)]
pub struct FuzzReport {
    pub counts: BTreeMap<VerdictKind, usize>,
    /// Programs that ran to completion and were compared with their erasure.
    pub erasure_checked: usize,
    /// Index within the campaign, program seed and detail of each violation.
    pub violations: Vec<(usize, u64, String)>,
}

impl FuzzReport {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, k: VerdictKind) -> usize {
        self.counts.get(&k).copied().unwrap_or(0)
    }
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in VerdictKind::ALL {
            writeln!(f, "{}: {}", k.as_str(), self.count(k))?;
        }
        writeln!(f, "erasure checked: {}", self.erasure_checked)?;
        for (i, seed, d) in &self.violations {
            writeln!(f, "violation at index {i} (program seed {seed}): {d}")?;
        }
        Ok(())
    }
}

/// The seed of program `index` in a campaign.
pub fn program_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Generates and judges `count` programs across worker threads. Results
/// are merged in index order, so the report does not depend on scheduling.
pub fn fuzz(count: usize, seed: u64, dyn_bias: f64, budget: u64) -> FuzzReport {
    let results: Vec<(Verdict, bool)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let p = generate_program(&GenConfig::new(program_seed(seed, i), dyn_bias));
            let v = soundness_verdict(&p, budget);
            let compared = matches!(v, Verdict::WellTypedValue(..)) && !has_checked_dict_literal(&p);
            (v, compared)
        })
        .collect();
    let mut report = FuzzReport::default();
    for (i, (v, compared)) in results.into_iter().enumerate() {
        *report.counts.entry(v.kind()).or_default() += 1;
        report.erasure_checked += usize::from(compared);
        if let Verdict::SoundnessViolation(d) = v {
            report.violations.push((i, program_seed(seed, i), d));
        }
    }
    report
}
