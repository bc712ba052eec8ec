use pego_lab::diagnosis::{diagnose, SweepConfig, Verdict};
use pego_lab::diagnosis::{run_chain_checks, ChainScales};
use pego_lab::families::catalog;
use pego_lab::{FrequencyGrid, Label, TimeGrid};

#[test]
fn labeled_families_diagnose_to_their_labels() {
    let grid = TimeGrid::default();
    let ygrid = FrequencyGrid::for_time_grid(&grid);
    let mut wrong = Vec::new();
    for spec in catalog().into_iter().filter(|s| s.label != Label::Unknown) {
        let fam = spec.instantiate(grid).unwrap();
        let d = diagnose(&fam, 1e-2, &ygrid, &SweepConfig::default()).unwrap();
        println!(
            "{:18} label {:?} -> {:?} (laplace {:?}, rk {:?}, oracle {:?} {:?})",
            spec.name,
            spec.label,
            d.verdict,
            d.laplace_route.verdict,
            d.rk_route.verdict,
            d.oracle.verdict(),
            d.oracle.net_sizes
        );
        for o in d.laplace_route.criteria.iter().chain(&d.rk_route.criteria) {
            println!("    {:?} {:?} thr {:.3e} {:?}", o.criterion, o.status, o.threshold, o.suprema);
        }
        if !(d.agreement && d.verdict.matches(spec.label)) {
            wrong.push(spec.name.clone());
        }
        assert_ne!(d.verdict, Verdict::Inconclusive, "{}", spec.name);
    }
    assert!(wrong.is_empty(), "misclassified: {wrong:?}");
}

#[test]
fn tight_chain_checks_hold_on_the_catalog() {
    let grid = TimeGrid::default();
    let ygrid = FrequencyGrid::for_time_grid(&grid);
    for spec in catalog() {
        let fam = spec.instantiate(grid).unwrap();
        for tighten in [false, true] {
            let checks = run_chain_checks(&fam, 1e-2, &ygrid, &ChainScales::default(), tighten).unwrap();
            for c in &checks {
                assert!(!c.violated(), "{} {:?} tighten={tighten}: {c:?}", spec.name, c.theorem);
            }
        }
    }
}
