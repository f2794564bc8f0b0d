use proptest::prelude::*;

use gsp::checker::{check_program, ElabKind};
use gsp::harness::{erase, generate_program, has_checked_dict_literal, GenConfig};
use gsp::syntax::parse;
use gsp::types::EvalType;
use gsp::vm::{self, Options};

fn opts(optimize: bool) -> Options {
    Options {
        budget: Some(200_000),
        debug_checks: true,
        optimize,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>(), bias in 0.0f64..=1.0) {
        let p = generate_program(&GenConfig::new(seed, bias));
        let text = p.to_string();
        let again = parse(&text).unwrap();
        prop_assert_eq!(again.to_string(), text);
        prop_assert_eq!(again.stmts.len(), p.stmts.len());
    }

    #[test]
    fn casts_only_leave_dyn(seed in any::<u64>(), bias in 0.0f64..=1.0) {
        let p = generate_program(&GenConfig::new(seed, bias));
        if let Ok(e) = check_program(&p) {
            let mut bad = None;
            e.walk_exprs(&mut |x| {
                if let ElabKind::Cast(t, inner) = &x.kind {
                    if t.is_dyn() || inner.ty != EvalType::Dyn || &x.ty != t {
                        bad = Some(format!("cast to {t} of {:?}", inner.ty));
                    }
                }
            });
            prop_assert!(bad.is_none(), "{:?}", bad);
        }
    }

    #[test]
    fn skipping_argument_checks_preserves_behavior(seed in any::<u64>(), bias in 0.0f64..=1.0) {
        let p = generate_program(&GenConfig::new(seed, bias));
        if let Ok(e) = check_program(&p) {
            let fast = vm::run(&e, &opts(true));
            let slow = vm::run(&e, &opts(false));
            if fast.result != Err(vm::Failure::Timeout) && slow.result != Err(vm::Failure::Timeout) {
                prop_assert_eq!(&fast.output, &slow.output);
                prop_assert_eq!(&fast.result, &slow.result);
            }
            prop_assert!(fast.metrics.arg_casts_executed <= slow.metrics.arg_casts_executed);
        }
    }

    #[test]
    fn erased_programs_are_fully_dynamic(seed in any::<u64>(), bias in 0.0f64..=1.0) {
        // Checked-dict constructors keep their type arguments under erasure.
        let p = generate_program(&GenConfig::new(seed, bias));
        if has_checked_dict_literal(&p) {
            return Ok(());
        }
        if let Ok(e) = check_program(&erase(&p)) {
            prop_assert_eq!(e.count_casts(), 0);
            prop_assert!(e.funcs.iter().all(|f| f.check_args.is_empty()));
        }
    }
}
