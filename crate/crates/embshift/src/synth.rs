//! Synthetic embedding stores with a planted gender-occupation association.
//!
//! Every occupation and gender surface gets a fixed random unit direction.
//! Occupation-role vectors are the occupation direction plus noise; gender-role
//! vectors mix the gender direction with the occupation direction:
//!
//! `g = (1 - c) * gender_dir + c * occupation_dir + noise`
//!
//! where `c` is the per-class mixing coefficient. A larger `c` for one class
//! raises that class's cosine to the occupation, which is the bias signature the
//! audit is meant to detect.

use std::collections::HashMap;

use embshift_core::embstore::{EmbeddingKey, EmbeddingStore, StoreError};
use embshift_core::seqgen::ProbeSequence;
use embshift_core::GenderClass;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedBias {
    pub dim: usize,
    pub female_mix: f64,
    pub male_mix: f64,
    /// Expected Euclidean norm of the additive noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for PlantedBias {
    fn default() -> Self {
        Self { dim: 64, female_mix: 0.3, male_mix: 0.0, noise: 0.1, seed: 7 }
    }
}

fn gaussian(rng: &mut StdRng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

fn unit(rng: &mut StdRng, dim: usize) -> Vec<f64> {
    let v = gaussian(rng, dim, 1.0);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Builds a store covering every role of every sequence in `corpus`.
///
/// Directions depend only on `seed` and the corpus, so two stores with the same
/// seed share their vocabulary geometry and differ only in the mixing.
pub fn planted_store(
    corpus: &[ProbeSequence],
    params: &PlantedBias,
    label: &str,
) -> Result<EmbeddingStore, StoreError> {
    let dim = params.dim.max(1);
    let mut vocab_rng = StdRng::seed_from_u64(params.seed);
    let mut noise_rng = StdRng::seed_from_u64(params.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1));
    let noise_scale = params.noise / (dim as f64).sqrt();

    let mut occupation_dirs: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut gender_dirs: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut records = Vec::with_capacity(corpus.len() * 4);
    for seq in corpus {
        let occ =
            occupation_dirs.entry(seq.occupation.surface.as_str()).or_insert_with(|| unit(&mut vocab_rng, dim)).clone();
        let gen =
            gender_dirs.entry(seq.gender_term.surface.as_str()).or_insert_with(|| unit(&mut vocab_rng, dim)).clone();
        let c = match seq.gender_term.class {
            GenderClass::Female => params.female_mix,
            GenderClass::Male => params.male_mix,
        };
        for &role in seq.kind.roles() {
            let noise = gaussian(&mut noise_rng, dim, noise_scale);
            let v: Vec<f32> = if role.is_gender() {
                (0..dim).map(|i| ((1.0 - c) * gen[i] + c * occ[i] + noise[i]) as f32).collect()
            } else {
                (0..dim).map(|i| (occ[i] + noise[i]) as f32).collect()
            };
            records.push((EmbeddingKey::new(seq.id.clone(), role), v));
        }
    }
    EmbeddingStore::from_records(records, dim, label)
}
