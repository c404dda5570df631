//! Monitor state stops growing once the warm-up is over.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stlmon::discrete::DiscreteMonitor;
use stlmon::gen::{random_io, random_trace, FormulaGen};
use stlmon::{SemanticsMode, SpecModel};

#[test]
fn cell_count_is_constant_after_warmup() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let g = FormulaGen::new(&["a", "b", "c"]);
    for case in 0..100 {
        let mut spec = SpecModel::new().with_formula("phi", g.formula(&mut rng));
        spec.mode = [SemanticsMode::Standard, SemanticsMode::OutputRobustness][case % 2];
        spec.declarations = random_io(&mut rng, &g.vars);
        let mut mon = DiscreteMonitor::new(&spec).expect("monitor");
        let warm = (mon.warmup() as usize).max(1);
        let w = random_trace(&mut rng, &g.vars, 10 * warm + 1);
        let used: Vec<_> = mon.variables().cloned().collect();
        let mut seen = None;
        for t in 0..=10 * warm {
            let row = w.row(t).into_iter().filter(|(v, _)| used.contains(v)).map(|(v, x)| (v.as_str().to_string(), x));
            mon.update(t as u64, row).expect("update");
            if t >= 2 * warm {
                let cells = mon.memory_cells();
                assert!(seen.is_none_or(|c| c == cells), "case {case}: {cells} cells at {t}, was {seen:?}");
                seen = Some(cells);
            }
        }
    }
}
