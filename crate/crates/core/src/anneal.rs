//! Simulated annealing over staircase profiles, for grids too large to
//! enumerate. Results are lower bounds for the true supremum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::staircase::{ColumnSums, StaircaseMax};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealOptions {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    /// Initial temperature, relative to the current score.
    pub initial_temperature: f64,
    pub cooling: f64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 8,
            steps: 20_000,
            initial_temperature: 0.05,
            cooling: 0.9995,
        }
    }
}

fn random_profile(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<usize> {
    let mut h: Vec<usize> = (0..m).map(|_| rng.random_range(0..=n)).collect();
    h.sort_by(|a, b| b.cmp(a));
    if h[0] == 0 {
        h[0] = 1;
    }
    h
}

/// Maximizes `score(a(D), b(D))` by single-column height moves that keep the
/// profile weakly decreasing. Deterministic for a given seed.
pub fn anneal_staircases(
    a: &ColumnSums,
    b: &ColumnSums,
    mut score: impl FnMut(f64, f64) -> Option<f64>,
    opts: &AnnealOptions,
) -> Option<StaircaseMax> {
    let (m, n) = a.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<StaircaseMax> = None;
    let (mut evaluated, mut skipped) = (0u64, 0u64);
    let mut eval = |h: &[usize], evaluated: &mut u64, skipped: &mut u64| {
        let r = score(a.total(h), b.total(h));
        match r {
            Some(_) => *evaluated += 1,
            None => *skipped += 1,
        }
        r
    };
    for _ in 0..opts.restarts.max(1) {
        let mut cur = random_profile(&mut rng, m, n);
        let mut cur_val = eval(&cur, &mut evaluated, &mut skipped).unwrap_or(f64::NEG_INFINITY);
        let mut temp = opts.initial_temperature;
        for _ in 0..opts.steps {
            let i = rng.random_range(0..m);
            let hi = if i == 0 { n } else { cur[i - 1] };
            let lo = if i + 1 == m { 0 } else { cur[i + 1] };
            if hi == lo {
                continue;
            }
            let mut next = cur.clone();
            next[i] = if rng.random_bool(0.5) {
                (cur[i] + 1).min(hi)
            } else {
                cur[i].saturating_sub(1).max(lo)
            };
            if next[i] == cur[i] || next.iter().all(|&h| h == 0) {
                continue;
            }
            let Some(v) = eval(&next, &mut evaluated, &mut skipped) else {
                continue;
            };
            let accept = v >= cur_val || {
                let scale = cur_val.abs().max(1e-300) * temp;
                rng.random::<f64>() < ((v - cur_val) / scale).exp()
            };
            if accept {
                cur = next;
                cur_val = v;
                if best.as_ref().is_none_or(|b| v > b.value) {
                    best = Some(StaircaseMax {
                        value: v,
                        heights: cur.clone(),
                        evaluated: 0,
                        skipped: 0,
                    });
                }
            }
            temp *= opts.cooling;
        }
        if cur_val.is_finite() && best.as_ref().is_none_or(|b| cur_val > b.value) {
            best = Some(StaircaseMax {
                value: cur_val,
                heights: cur.clone(),
                evaluated: 0,
                skipped: 0,
            });
        }
    }
    best.map(|mut b| {
        b.evaluated = evaluated;
        b.skipped = skipped;
        b
    })
}
