//! Rank experiment for the "fast-lane shards are innovative" assumption.
//!
//! Coefficient vectors arrive one at a time and are reduced against the
//! current echelon basis; a reception that reduces to zero is non-innovative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gf::{gf256, gf65536, GfTables};
use crate::error::{domain, Result};

/// Where the received vectors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    /// Only uniformly random coefficient vectors.
    FastLaneOnly,
    /// Each reception is, with probability 1/2, a not-yet-received uncoded base
    /// shard (a unit vector), otherwise a random coded vector.
    MixedWithUnitVectors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankExperimentConfig {
    k: usize,
    field_size: u32,
    trials: usize,
    mode: RankMode,
}

impl RankExperimentConfig {
    pub const SUPPORTED_FIELDS: [u32; 3] = [2, 1 << 8, 1 << 16];

    pub fn new(k: usize, field_size: u32, trials: usize, mode: RankMode) -> Result<Self> {
        if k == 0 {
            return domain("dimension k must be at least 1");
        }
        if !Self::SUPPORTED_FIELDS.contains(&field_size) {
            return domain(format!("field size {field_size} not in {{2, 2^8, 2^16}}"));
        }
        if trials == 0 {
            return domain("at least one trial is required");
        }
        Ok(Self { k, field_size, trials, mode })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field_size(&self) -> u32 {
        self.field_size
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn mode(&self) -> RankMode {
        self.mode
    }
}

/// Aggregate reception counts until full rank, over all trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RankReport {
    pub trials: u64,
    pub receptions: u64,
    pub non_innovative: u64,
    pub coded_receptions: u64,
    pub coded_non_innovative: u64,
}

impl RankReport {
    /// Non-innovative receptions over all receptions.
    pub fn fraction(&self) -> f64 {
        self.non_innovative as f64 / self.receptions as f64
    }

    /// Binomial standard error of [`fraction`](Self::fraction).
    pub fn std_error(&self) -> f64 {
        let p = self.fraction();
        (p * (1.0 - p) / self.receptions as f64).sqrt()
    }

    fn merge(self, other: Self) -> Self {
        Self {
            trials: self.trials + other.trials,
            receptions: self.receptions + other.receptions,
            non_innovative: self.non_innovative + other.non_innovative,
            coded_receptions: self.coded_receptions + other.coded_receptions,
            coded_non_innovative: self.coded_non_innovative + other.coded_non_innovative,
        }
    }
}

/// Incremental row reduction over one field.
trait Echelon {
    fn new(k: usize) -> Self;
    fn rank(&self) -> usize;
    /// Inserts the vector; returns whether it raised the rank.
    fn insert_random<R: Rng>(&mut self, rng: &mut R) -> bool;
    fn insert_unit(&mut self, index: usize) -> bool;
}

struct BinaryEchelon {
    k: usize,
    words: usize,
    pivots: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl BinaryEchelon {
    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        for col in 0..self.k {
            let (w, b) = (col / 64, col % 64);
            if v[w] >> b & 1 == 0 {
                continue;
            }
            match &self.pivots[col] {
                Some(row) => v.iter_mut().zip(row).for_each(|(x, y)| *x ^= y),
                None => {
                    self.pivots[col] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}

impl Echelon for BinaryEchelon {
    fn new(k: usize) -> Self {
        Self { k, words: k.div_ceil(64), pivots: vec![None; k], rank: 0 }
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn insert_random<R: Rng>(&mut self, rng: &mut R) -> bool {
        let mut v: Vec<u64> = (0..self.words).map(|_| rng.random()).collect();
        let tail = self.k % 64;
        if tail != 0 {
            v[self.words - 1] &= (1u64 << tail) - 1;
        }
        self.insert(v)
    }

    fn insert_unit(&mut self, index: usize) -> bool {
        let mut v = vec![0u64; self.words];
        v[index / 64] |= 1 << (index % 64);
        self.insert(v)
    }
}

struct FieldEchelon {
    field: &'static GfTables,
    k: usize,
    pivots: Vec<Option<Vec<u16>>>,
    rank: usize,
}

impl FieldEchelon {
    fn with_field(field: &'static GfTables, k: usize) -> Self {
        Self { field, k, pivots: vec![None; k], rank: 0 }
    }

    fn insert(&mut self, mut v: Vec<u16>) -> bool {
        let f = self.field;
        for col in 0..self.k {
            let c = v[col];
            if c == 0 {
                continue;
            }
            match &self.pivots[col] {
                // Pivot rows are normalized to 1 at their pivot column.
                Some(row) => {
                    for j in col..self.k {
                        v[j] ^= f.mul(c, row[j]);
                    }
                }
                None => {
                    let scale = f.inv(c);
                    for x in v[col..].iter_mut() {
                        *x = f.mul(*x, scale);
                    }
                    self.pivots[col] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }

    fn random_vector<R: Rng>(&self, rng: &mut R) -> Vec<u16> {
        let mask = (self.field.order() - 1) as u16;
        (0..self.k).map(|_| rng.random::<u16>() & mask).collect()
    }
}

struct Gf256Echelon(FieldEchelon);
struct Gf65536Echelon(FieldEchelon);

macro_rules! field_echelon {
    ($ty:ident, $field:expr) => {
        impl Echelon for $ty {
            fn new(k: usize) -> Self {
                $ty(FieldEchelon::with_field($field, k))
            }

            fn rank(&self) -> usize {
                self.0.rank
            }

            fn insert_random<R: Rng>(&mut self, rng: &mut R) -> bool {
                let v = self.0.random_vector(rng);
                self.0.insert(v)
            }

            fn insert_unit(&mut self, index: usize) -> bool {
                let mut v = vec![0u16; self.0.k];
                v[index] = 1;
                self.0.insert(v)
            }
        }
    };
}

field_echelon!(Gf256Echelon, gf256());
field_echelon!(Gf65536Echelon, gf65536());

fn run_trial<E: Echelon>(config: &RankExperimentConfig, seed: u64, trial: u64) -> RankReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let k = config.k;
    let mut echelon = E::new(k);
    let mut report = RankReport { trials: 1, ..RankReport::default() };
    // Uncoded shard ids not yet received, drawn without replacement.
    let mut pending: Vec<usize> = (0..k).collect();
    while echelon.rank() < k {
        let unit = config.mode == RankMode::MixedWithUnitVectors
            && !pending.is_empty()
            && rng.random::<bool>();
        let innovative = if unit {
            let id = pending.swap_remove(rng.random_range(0..pending.len()));
            echelon.insert_unit(id)
        } else {
            report.coded_receptions += 1;
            let fresh = echelon.insert_random(&mut rng);
            if !fresh {
                report.coded_non_innovative += 1;
            }
            fresh
        };
        report.receptions += 1;
        if !innovative {
            report.non_innovative += 1;
        }
    }
    report
}

fn run<E: Echelon>(config: &RankExperimentConfig, seed: u64) -> RankReport {
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial::<E>(config, seed, t))
        .reduce(RankReport::default, RankReport::merge)
}

/// Runs the rank experiment and reports reception counts.
pub fn rlnc_innovation_rate(config: &RankExperimentConfig, seed: u64) -> RankReport {
    match config.field_size {
        2 => run::<BinaryEchelon>(config, seed),
        256 => run::<Gf256Echelon>(config, seed),
        _ => run::<Gf65536Echelon>(config, seed),
    }
}
