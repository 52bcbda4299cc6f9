//! Deterministic seeding for Monte-Carlo sweeps.
//!
//! A master seed `s` expands into one independent stream per trial: trial `t` is driven by
//! `ChaCha8Rng::seed_from_u64(s.wrapping_add(t))`. Results therefore depend only on
//! `(s, t)`, never on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type TrialRng = ChaCha8Rng;

/// The seed that drives trial `trial` of a sweep started from `master`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master.wrapping_add(trial)
}

pub fn trial_rng(master: u64, trial: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial))
}

/// Runs `f(trial_seed, rng)` for `trials` trials in parallel; output is in trial order.
pub fn par_trials<T, F>(master: u64, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut TrialRng) -> T + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(master, t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            f(seed, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_matches_sequential() {
        let par = par_trials(42, 64, |_, rng| rng.gen::<u64>());
        let seq: Vec<u64> = (0..64).map(|t| trial_rng(42, t).gen::<u64>()).collect();
        assert_eq!(par, seq);
    }

    #[test]
    fn seeds_wrap() {
        assert_eq!(trial_seed(u64::MAX, 1), 0);
    }
}
