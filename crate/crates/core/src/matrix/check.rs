//! Executable versions of the kernel's equivalence properties.
//!
//! Each check compares the abstract and the executable route of one
//! operation, or an algorithm against its defining equation, and records a
//! pass or a failure per named invariant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sample::{random_low_rank, random_matrix, random_unitriangular, SampleField};
use super::{
    cfast_invmx, det_mx, det_seqmx, fast_invmx, fast_mult_seqmx_with_cutoff, invmx,
    is_unitriangular, mul_seqmx, mulmx, mx_of_seqmx, rank_elim_seqmx, rank_mx, seqmx_of_mx,
    AbstractMatrix,
};
use crate::field::Field;

pub const REFINEMENT: &str = "refinement: seqmx_of_mx(fast_invmx M) = cfast_invmx(seqmx_of_mx M)";
pub const S2_EQUIVALENCE: &str = "fast_invmx M = invmx M";
pub const RIGHT_INVERSE: &str = "M * fast_invmx M = I";
pub const LEFT_INVERSE: &str = "fast_invmx M * M = I";
pub const CLOSURE: &str = "fast_invmx M is unitriangular";
pub const INVOLUTION: &str = "fast_invmx (fast_invmx M) = M";
pub const MUL_TRANSLATION: &str = "translation: fast_mult_seqmx";
pub const DET_TRANSLATION: &str = "translation: det_seqmx";
pub const RANK_TRANSLATION: &str = "translation: rank_elim_seqmx";
pub const STRASSEN_ORACLE: &str = "fast_mult_seqmx = mul_seqmx";
pub const ROUND_TRIP: &str = "mx_of_seqmx(n, seqmx_of_mx M) = M";
pub const CANONICAL: &str = "scalars in canonical form";

pub const ALL_INVARIANTS: [&str; 12] = [
    REFINEMENT,
    S2_EQUIVALENCE,
    RIGHT_INVERSE,
    LEFT_INVERSE,
    CLOSURE,
    INVOLUTION,
    MUL_TRANSLATION,
    DET_TRANSLATION,
    RANK_TRANSLATION,
    STRASSEN_ORACLE,
    ROUND_TRIP,
    CANONICAL,
];

/// Cutoffs exercised by the Strassen oracle check.
pub const STRASSEN_CUTOFFS: [usize; 4] = [1, 2, 32, 64];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
}

impl InvariantOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tally {
    outcomes: Vec<InvariantOutcome>,
}

impl Default for Tally {
    fn default() -> Self {
        Tally {
            outcomes: ALL_INVARIANTS
                .iter()
                .map(|&name| InvariantOutcome {
                    name,
                    checked: 0,
                    failed: 0,
                })
                .collect(),
        }
    }
}

impl Tally {
    pub fn record(&mut self, name: &'static str, ok: bool) {
        let slot = self
            .outcomes
            .iter_mut()
            .find(|o| o.name == name)
            .expect("known invariant");
        slot.checked += 1;
        if !ok {
            slot.failed += 1;
        }
    }

    pub fn outcomes(&self) -> &[InvariantOutcome] {
        &self.outcomes
    }

    pub fn get(&self, name: &str) -> Option<&InvariantOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(InvariantOutcome::passed)
    }
}

fn all_canonical<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>) -> bool {
    m.entries().iter().all(|x| field.is_canonical(x))
}

/// Invariants of a lower-unitriangular input.
pub fn check_unitriangular<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>, tally: &mut Tally) {
    let n = m.dim();
    let id = AbstractMatrix::identity(field, n);
    let Ok(fast) = fast_invmx(field, m) else {
        for name in [REFINEMENT, S2_EQUIVALENCE, RIGHT_INVERSE, LEFT_INVERSE, CLOSURE, INVOLUTION] {
            tally.record(name, false);
        }
        return;
    };

    let executable = cfast_invmx(field, &seqmx_of_mx(m));
    tally.record(REFINEMENT, executable.as_ref() == Ok(&seqmx_of_mx(&fast)));
    tally.record(S2_EQUIVALENCE, invmx(field, m).as_ref() == Ok(&fast));
    tally.record(RIGHT_INVERSE, mulmx(field, m, &fast).as_ref() == Ok(&id));
    tally.record(LEFT_INVERSE, mulmx(field, &fast, m).as_ref() == Ok(&id));
    tally.record(CLOSURE, is_unitriangular(field, &fast));
    tally.record(INVOLUTION, fast_invmx(field, &fast).as_ref() == Ok(m));
    tally.record(ROUND_TRIP, mx_of_seqmx(n, &seqmx_of_mx(m)).as_ref() == Ok(m));
    tally.record(CANONICAL, all_canonical(field, &fast));
}

/// Translation lemmas and the Strassen oracle on general square inputs.
pub fn check_general<F: Field>(
    field: &F,
    a: &AbstractMatrix<F::Elem>,
    b: &AbstractMatrix<F::Elem>,
    tally: &mut Tally,
) {
    let n = a.dim();
    let (sa, sb) = (seqmx_of_mx(a), seqmx_of_mx(b));

    let product = mulmx(field, a, b).expect("equal sizes");
    let executable = fast_mult_seqmx_with_cutoff(field, &sa, &sb, super::DEFAULT_CUTOFF);
    tally.record(MUL_TRANSLATION, executable.as_ref() == Ok(&seqmx_of_mx(&product)));

    for m in [a, b] {
        let det = det_mx(field, m);
        tally.record(DET_TRANSLATION, det_seqmx(field, &seqmx_of_mx(m)).as_ref() == Ok(&det));
        tally.record(
            RANK_TRANSLATION,
            rank_elim_seqmx(field, &seqmx_of_mx(m)) == Ok(rank_mx(field, m)),
        );
        tally.record(CANONICAL, field.is_canonical(&det));
        tally.record(ROUND_TRIP, mx_of_seqmx(n, &seqmx_of_mx(m)).as_ref() == Ok(m));
    }

    let naive = mul_seqmx(field, &sa, &sb).expect("equal sizes");
    for cutoff in STRASSEN_CUTOFFS {
        let fast = fast_mult_seqmx_with_cutoff(field, &sa, &sb, cutoff);
        tally.record(STRASSEN_ORACLE, fast.as_ref() == Ok(&naive));
    }
    tally.record(CANONICAL, all_canonical(field, &product));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_size: usize,
    pub cases: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_size: 16,
            cases: 100,
            seed: 0,
        }
    }
}

/// Runs every check on `cases` random instances with sizes drawn from
/// `0..=max_size`. A third of the general matrices are built with
/// deficient rank so the rank translation sees more than full-rank input.
pub fn verify_random<F: SampleField>(field: &F, cfg: VerifyConfig) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tally = Tally::default();
    for case in 0..cfg.cases {
        let n = rng.gen_range(0..=cfg.max_size);
        let m = random_unitriangular(field, n, &mut rng);
        check_unitriangular(field, &m, &mut tally);

        let a = if case % 3 == 2 {
            let r = rng.gen_range(0..=n);
            random_low_rank(field, n, r, &mut rng)
        } else {
            random_matrix(field, n, &mut rng)
        };
        let b = random_matrix(field, n, &mut rng);
        check_general(field, &a, &b, &mut tally);
    }
    tally
}
