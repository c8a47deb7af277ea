//! Seeded random generators for QBFs and semantic test instances.

use dbu_core::reductions::{Literal, Quantifier};
use dbu_core::Qbf;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shape limits for [`random_qbf`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QbfShape {
    pub max_vars: usize,
    pub max_clauses: usize,
    pub max_width: usize,
}

impl Default for QbfShape {
    fn default() -> Self {
        Self {
            max_vars: 8,
            max_clauses: 5,
            max_width: 3,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A CNF QBF with `1..=max_vars` variables, `1..=max_clauses` clauses and
/// clauses of `1..=max_width` distinct literals.
pub fn random_qbf<R: Rng>(rng: &mut R, shape: QbfShape) -> Qbf {
    let m = rng.gen_range(1..=shape.max_vars.max(1));
    let quantifiers = (0..m)
        .map(|_| if rng.gen() { Quantifier::Exists } else { Quantifier::Forall })
        .collect();
    let vars: Vec<usize> = (1..=m).collect();
    let clauses: Vec<Vec<Literal>> = (0..rng.gen_range(1..=shape.max_clauses.max(1)))
        .map(|_| {
            let width = rng.gen_range(1..=shape.max_width.clamp(1, m));
            let mut clause: Vec<Literal> = vars
                .choose_multiple(rng, width)
                .map(|&var| Literal { var, positive: rng.gen() })
                .collect();
            clause.sort();
            clause
        })
        .collect();
    Qbf::cnf(quantifiers, &clauses).expect("variables are in range")
}

/// `count` QBFs from one seeded stream.
pub fn random_suite(seed: u64, count: usize, shape: QbfShape) -> Vec<Qbf> {
    let mut rng = rng(seed);
    (0..count).map(|_| random_qbf(&mut rng, shape)).collect()
}
