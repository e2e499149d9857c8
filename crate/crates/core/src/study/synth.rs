//! Seeded synthetic study populations with planted effects, used as test
//! oracles and for the bundled fixture.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Measure, StudyRecord};
use crate::model::{alignment_score, Level, Trait, TraitProfile, TraitScores};

/// Seed of the bundled fixture `data/study_synthetic.csv`.
pub const FIXTURE_SEED: u64 = 2024;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_per_condition: usize,
    /// Shift of the medium condition on every measure, in scale units
    /// (one unit is a quarter of the scale range).
    pub medium_advantage: f64,
    /// Likeability slope on alignment, in scale units per unit alignment.
    pub likeability_alignment_slope: f64,
    pub noise_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_per_condition: 50,
            medium_advantage: 1.0,
            likeability_alignment_slope: 3.0,
            noise_sd: 0.8,
        }
    }
}

impl SynthConfig {
    /// Identical distributions for every condition, no alignment effect.
    pub fn null(n_per_condition: usize) -> Self {
        SynthConfig {
            n_per_condition,
            medium_advantage: 0.0,
            likeability_alignment_slope: 0.0,
            noise_sd: 0.8,
        }
    }
}

/// Snaps to the nearest attainable mean of `k` integer items and clamps.
fn snap(v: f64, k: usize, max: f64) -> f64 {
    let k = k as f64;
    ((v * k).round() / k).clamp(1.0, max)
}

fn items_of(m: Measure) -> usize {
    match m {
        Measure::Intelligence | Measure::Likeability => 5,
        Measure::Enjoyment => 3,
        Measure::Anthropomorphism => 4,
        Measure::Adoption => 2,
        Measure::Trust => 10,
    }
}

fn draw_traits(rng: &mut ChaCha8Rng, centers: [f64; 5], sd: f64) -> TraitScores {
    let scores = centers.map(|c| {
        let v: f64 = Normal::new(c, sd).expect("finite sd").sample(rng);
        snap(v, 4, 5.0)
    });
    TraitScores::new(scores).expect("clamped to range")
}

fn perceptions(rng: &mut ChaCha8Rng, shift: impl Fn(Measure) -> f64, noise_sd: f64) -> [Option<f64>; 6] {
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    Measure::ALL.map(|m| {
        let max = f64::from(m.scale_max());
        let unit = (max - 1.0) / 4.0;
        let mid = (max + 1.0) / 2.0;
        let v = mid + unit * (shift(m) + noise.sample(rng));
        Some(snap(v, items_of(m), max))
    })
}

/// Planted population: medium condition shifted up on every measure, and
/// Likeability rising with alignment to the uniform condition profile.
pub fn planted_study(seed: u64, cfg: &SynthConfig) -> Vec<StudyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (ci, &condition) in Level::ALL.iter().enumerate() {
        let profile = TraitProfile::uniform(condition);
        for i in 0..cfg.n_per_condition {
            let traits = draw_traits(&mut rng, [3.4, 3.3, 3.0, 3.7, 3.0], 0.75);
            let alignment = alignment_score(&traits, &profile);
            let advantage = if condition == Level::Medium { cfg.medium_advantage } else { 0.0 };
            let perceptions = perceptions(
                &mut rng,
                |m| {
                    let slope = if m == Measure::Likeability { cfg.likeability_alignment_slope } else { 0.0 };
                    advantage + slope * (alignment - 0.5)
                },
                cfg.noise_sd,
            );
            out.push(StudyRecord {
                participant_id: format!("s{:03}", ci * cfg.n_per_condition + i + 1),
                condition,
                traits,
                perceptions,
                raw_items: Default::default(),
            });
        }
    }
    out
}

/// Three clusters of users, returned with their true archetype index:
/// 0 near-zero distance (medium), 1 large Extraversion distance only
/// (high), 2 large distance on every trait (low).
pub fn archetype_population(seed: u64, n_per_archetype: usize) -> (Vec<StudyRecord>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut high_e = [4.6; 5];
    high_e[Trait::Extraversion.index()] = 1.6;
    let specs: [(Level, [f64; 5], f64); 3] =
        [(Level::Medium, [3.0; 5], 0.7), (Level::High, high_e, 0.0), (Level::Low, [4.4; 5], -0.5)];
    let mut records = Vec::new();
    let mut truth = Vec::new();
    for (a, &(condition, centers, shift)) in specs.iter().enumerate() {
        for i in 0..n_per_archetype {
            let traits = draw_traits(&mut rng, centers, 0.25);
            records.push(StudyRecord {
                participant_id: format!("a{a}_{i:03}"),
                condition,
                traits,
                perceptions: perceptions(&mut rng, |_| shift, 0.8),
                raw_items: Default::default(),
            });
            truth.push(a);
        }
    }
    (records, truth)
}

/// Fraction of records whose cluster matches the truth under the best
/// one-to-one relabelling.
pub fn recovery_rate(assignments: &[usize], truth: &[usize]) -> f64 {
    let k = assignments.iter().chain(truth).max().map_or(0, |m| m + 1);
    let mut best = 0;
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |p| {
        let hits = assignments.iter().zip(truth).filter(|(&a, &t)| p[a] == t).count();
        best = best.max(hits);
    });
    best as f64 / truth.len().max(1) as f64
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

/// Shuffles record order in place; analyses must not depend on it.
pub fn shuffle(records: &mut [StudyRecord], seed: u64) {
    records.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_is_deterministic_and_in_range() {
        let a = planted_study(5, &SynthConfig::default());
        assert_eq!(a, planted_study(5, &SynthConfig::default()));
        assert_eq!(a.len(), 150);
        for r in &a {
            for m in Measure::ALL {
                let v = r.perception(m).unwrap();
                assert!((1.0..=f64::from(m.scale_max())).contains(&v));
            }
        }
    }

    #[test]
    fn recovery_under_relabelling() {
        assert_eq!(recovery_rate(&[2, 2, 0, 0, 1], &[0, 0, 1, 1, 2]), 1.0);
        assert_eq!(recovery_rate(&[0, 0, 0, 1], &[0, 0, 1, 1]), 0.75);
    }
}
