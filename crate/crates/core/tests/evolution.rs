use proptest::prelude::*;

use rbnedit::evolution::{
    coevolve_hetero, coevolve_homog, evolve_rbnk, mutate, scramble_reconnect, MutationKind,
    RunSettings, SingleCellMode,
};
use rbnedit::{NetworkGenome, NetworkParams, NkLandscape, NkcsLandscape, RngStream};

fn differing_genes(a: &NetworkGenome, b: &NetworkGenome) -> usize {
    let mut d = 0;
    for (x, y) in a.nodes().iter().zip(b.nodes()) {
        d += (x.start != y.start) as usize;
        d += (x.table != y.table) as usize;
        d += x
            .inputs
            .iter()
            .zip(&y.inputs)
            .filter(|(p, q)| p != q)
            .count();
        d += (x.grna != y.grna) as usize;
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mutation_keeps_genomes_valid(
        seed in any::<u64>(),
        r in 2usize..30,
        b in 1usize..=5,
        coupled in any::<bool>(),
        editing in any::<bool>(),
    ) {
        let mut p = NetworkParams::new(r, 1 + (seed as usize % r), b);
        p.coupled = coupled;
        let mut rng = RngStream::from_seed(seed);
        let mut g = NetworkGenome::random(&p, &mut rng).unwrap();
        if !editing {
            g.strip_editing();
        }
        for _ in 0..150 {
            let (child, kind) = mutate(&g, editing, &mut rng);
            child.validate().unwrap();
            prop_assert!(child != g, "{kind:?} made no change");
            if !editing {
                prop_assert_eq!(child.editable_count(), 0);
            }
            // rewiring also resizes the reconnect lists of the two sources
            if !matches!(kind, MutationKind::ToggleEditable | MutationKind::RewireBConnection) {
                prop_assert_eq!(differing_genes(&g, &child), 1, "{:?}", kind);
            }
            g = child;
        }
        let s = scramble_reconnect(&g, &mut rng);
        s.validate().unwrap();
        prop_assert_eq!(s.editable_count(), g.editable_count());
    }
}

fn small_settings(r: usize, b: usize, gens: usize) -> RunSettings {
    let mut s = RunSettings::new(NetworkParams::new(r, 4, b));
    s.generations = gens;
    s.cycles = 20;
    s.log_every = 1;
    s
}

#[test]
fn flat_landscape_never_gains_editing() {
    for seed in 0..5 {
        let settings = small_settings(12, 2, 600);
        let l = NkLandscape::flat(4, 1, 0.5, &mut RngStream::from_seed(seed)).unwrap();
        let res = evolve_rbnk(
            &settings,
            SingleCellMode::Stationary,
            &[l],
            &RngStream::from_seed(seed),
        )
        .unwrap();
        for w in res.series.windows(2) {
            assert!(w[1].pct_grna <= w[0].pct_grna);
            assert_eq!(w[1].fitness, 0.5);
        }
    }
}

#[test]
fn nonstationary_needs_two_landscapes() {
    let settings = small_settings(10, 2, 5);
    let l = NkLandscape::generate(4, 1, &mut RngStream::from_seed(1)).unwrap();
    assert!(evolve_rbnk(
        &settings,
        SingleCellMode::Nonstationary,
        &[l],
        &RngStream::from_seed(1)
    )
    .is_err());
}

#[test]
fn coevolution_protocols_are_reproducible() {
    let settings = small_settings(12, 3, 40);
    let mut rng = RngStream::from_seed(9);
    let la = NkcsLandscape::generate(4, 1, 2, 1, &mut rng).unwrap();
    let lb = NkcsLandscape::generate(4, 1, 2, 1, &mut rng).unwrap();
    let run = RngStream::from_seed(100);
    let h1 = coevolve_hetero(&settings, &la, &lb, &run).unwrap();
    let h2 = coevolve_hetero(&settings, &la, &lb, &run).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(h1.series.len(), 41);
    h1.final_genome.validate().unwrap();

    let m1 = coevolve_homog(&settings, &la, &lb, &run).unwrap();
    let m2 = coevolve_homog(&settings, &la, &lb, &run).unwrap();
    assert_eq!(m1, m2);
    for w in m1.series.windows(2) {
        assert!(w[1].fitness >= w[0].fitness);
    }
}

#[test]
fn scramble_control_changes_the_lineage() {
    let mut settings = small_settings(15, 3, 60);
    let l = NkLandscape::generate(4, 1, &mut RngStream::from_seed(2)).unwrap();
    let run = RngStream::from_seed(5);
    let plain = evolve_rbnk(
        &settings,
        SingleCellMode::Stationary,
        std::slice::from_ref(&l),
        &run,
    )
    .unwrap();
    settings.scramble = true;
    let scrambled = evolve_rbnk(&settings, SingleCellMode::Stationary, &[l], &run).unwrap();
    assert_ne!(plain.final_genome, scrambled.final_genome);
}
