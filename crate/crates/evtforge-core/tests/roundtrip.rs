//! Printing then parsing gives back what was printed.

use std::collections::BTreeMap;

use evtforge_core::eventb::{parse_text, print_text, read_text};
use evtforge_core::fopeq::eval_formula;
use evtforge_core::laws::{random_fopeq_signature, random_formula, small_algebras, Chooser};
use evtforge_core::spec::{parse_library, print_def, Library, PrintOptions};
use evtforge_core::syntax::{formula_from_str, print_formula};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chooser(seed: u64) -> impl FnMut(usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move |n| rng.gen_range(0..n.max(1))
}

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn formulas_survive_printing(seed in any::<u64>()) {
        let mut rng = chooser(seed);
        let sig = random_fopeq_signature(&mut rng);
        let f = random_formula(&sig, 3, &mut rng);
        let text = print_formula(&f);
        let back = formula_from_str(&text, &sig, &BTreeMap::new())
            .map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(print_formula(&back), text.clone());
        for a in small_algebras(&sig, 2, 1).iter().take(4) {
            let none = Default::default();
            prop_assert_eq!(eval_formula(&f, a, &none).unwrap(), eval_formula(&back, a, &none).unwrap(), "{}", text);
        }
    }

    #[test]
    fn presentations_survive_printing(seed in any::<u64>()) {
        let mut rng = chooser(seed);
        let guards: Vec<String> = (0..1 + rng.pick(3))
            .map(|_| {
                let ops = ["x < 2", "y = TRUE", "x + 1 ≤ 2", "¬(y = FALSE) ∨ x = 0", "∃z·z = x ∧ z ≥ 0"];
                ops[rng.pick(ops.len())].to_string()
            })
            .collect();
        let acts = ["x := x + 1", "y := FALSE", "x, y := 0, TRUE", "x :| x′ < 2"];
        let act = acts[rng.pick(acts.len())];
        let src = format!(
            "spec P =\n  ops x : ℕ\n      y : BOOL\n  Events\n    e ordinary\n      when {}\n      thenAct {act}\nend\n",
            guards.join("\n           ")
        );
        let mut lib = Library::new();
        parse_library(&src, &mut lib).map_err(|e| TestCaseError::fail(format!("{src}: {e}")))?;
        let printed = print_def("P", lib.get("P").unwrap(), PrintOptions::default());
        let mut again = Library::new();
        parse_library(&printed, &mut again).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert_eq!(print_def("P", again.get("P").unwrap(), PrintOptions::default()), printed);
        prop_assert_eq!(again.sig("P").unwrap(), lib.sig("P").unwrap());
    }
}

#[test]
fn event_b_fixtures_survive_printing() {
    let joined: String = ["ebm0.eb", "ebm1.eb", "ebm2.eb"].iter().map(|f| fixture(f)).collect::<Vec<_>>().join("\n");
    let spec = parse_text(&joined).unwrap();
    let printed = print_text(&spec);
    let back = parse_text(&printed).unwrap();
    assert_eq!(back, spec);
    assert_eq!(print_text(&back), printed);
    for m in ["mutant/m0_guard.eb", "mutant/m0_weak.eb"] {
        let s = read_text(&fixture(m)).unwrap();
        assert_eq!(read_text(&print_text(&s)).unwrap(), s, "{m}");
    }
}
