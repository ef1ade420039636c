use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walters_thermo::potential::{SequenceSpec, Tail, WaltersPotential};

/// Seeded random instance of the non-positive class: both limits zero,
/// strictly negative geometric run sequences, constant negative b and d.
pub fn random_nonpositive(seed: u64) -> WaltersPotential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let neg_geometric = |start_index: u32, rng: &mut ChaCha8Rng| -> SequenceSpec {
        let coeff = -rng.gen_range(0.1..3.0);
        let ratio = rng.gen_range(0.2..0.8);
        let prefix_len = rng.gen_range(0..=2usize);
        let prefix: Vec<f64> = (0..prefix_len).map(|_| -rng.gen_range(0.05..3.0)).collect();
        SequenceSpec {
            start_index,
            prefix,
            tail: Tail::Geometric { limit: 0.0, coeff, ratio },
        }
    };
    let a = neg_geometric(2, &mut rng);
    let c = neg_geometric(2, &mut rng);
    let b = SequenceSpec {
        start_index: 1,
        prefix: vec![],
        tail: Tail::Constant { limit: -rng.gen_range(0.1..3.0) },
    };
    let d = SequenceSpec {
        start_index: 1,
        prefix: vec![],
        tail: Tail::Constant { limit: -rng.gen_range(0.1..3.0) },
    };
    WaltersPotential::new(a, b, c, d).expect("generated spec is valid")
}

/// All binary words of the given length.
pub fn words_of_length(len: usize) -> Vec<String> {
    (0..1u32 << len)
        .map(|bits| {
            (0..len)
                .rev()
                .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect()
}
