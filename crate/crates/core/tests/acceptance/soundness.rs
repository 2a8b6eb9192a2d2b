use crate::common;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plotsynth::dsl::print_vis;
use plotsynth::eval::eval_transform_with;
use plotsynth::models::{models, plot_inhabits};
use plotsynth::synth::{is_inhabitant, synthesize_session, LemmaStore, SynthConfig};

pub fn every_result_inhabits_its_specification() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..200 {
        let data = if rng.gen_bool(0.25) {
            common::cars()
        } else {
            common::random_table(&mut rng)
        };
        let specs: Vec<_> = (0..rng.gen_range(1..=3))
            .map(|_| common::random_spec(&mut rng, &data.column_names()))
            .collect();
        let cfg = SynthConfig {
            max_depth: rng.gen_range(1..=4),
            max_results: 20,
            max_expansions: 5_000,
            ..SynthConfig::default()
        };
        let out = synthesize_session(&data, &specs, &cfg, &mut LemmaStore::new());
        for f in &out.results {
            let spec = &specs[f.spec_rank];
            assert!(
                is_inhabitant(&data, &f.program, spec, &cfg.mutate),
                "{}",
                print_vis(&f.program)
            );
            let table = eval_transform_with(&f.program.table, &data, &cfg.mutate).unwrap();
            assert!(models(&table, &spec.table));
            assert!(plot_inhabits(&f.program.plot, &spec.plot));
            assert!(f.program.table.depth() <= cfg.max_depth);
            checked += 1;
        }
    }
    assert!(checked > 200);
}
