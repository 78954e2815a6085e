use num_complex::Complex64;

use super::fir::FirChannelEstimate;
use crate::error::{Error, Result};
use crate::phy::Scheme;

/// Default trellis size limit.
pub const STATE_BUDGET: usize = 1 << 20;

/// Survivor memory above which traceback switches from whole-block to
/// fixed-lag decisions.
const FULL_TRACEBACK_BYTES: usize = 1 << 28;

/// Trellis state count `M^CML` for an estimate, checked against `budget`.
pub fn trellis_states(est: &FirChannelEstimate, scheme: Scheme, budget: usize) -> Result<usize> {
    let log2 = est.cml() as f64 * (scheme.order() as f64).log2();
    let states = 2f64.powf(log2);
    if states > budget as f64 {
        return Err(Error::StateBudget {
            states,
            log2_states: log2,
            budget,
        });
    }
    Ok(states as usize)
}

/// Viterbi sequence detection with the default state budget.
///
/// `soft[t]` is the observation `Σ_j taps[j]·a[t - delay_offset - j]`; the
/// block carries `K = soft.len() - delay_offset - CML` symbols, and symbols
/// outside `0..K` are taken as absent. Returns the `K` decided indices.
pub fn mlse(est: &FirChannelEstimate, soft: &[Complex64], scheme: Scheme) -> Result<Vec<usize>> {
    mlse_with_budget(est, soft, scheme, STATE_BUDGET)
}

pub fn mlse_with_budget(est: &FirChannelEstimate, soft: &[Complex64], scheme: Scheme, budget: usize) -> Result<Vec<usize>> {
    let n_states = trellis_states(est, scheme, budget)?;
    let m = est.cml();
    let big_m = scheme.order();
    let off = est.delay_offset;
    let k_len = soft.len() as i64 - off - m as i64;
    if k_len < 1 {
        return Err(Error::invalid(
            "soft",
            format!("{} observations hold no complete symbol for offset {off} and memory {m}", soft.len()),
        ));
    }
    let k_len = k_len as usize;
    let points = scheme.constellation();
    let g = &est.taps;
    let obs = |t: i64| -> Option<Complex64> { (t >= 0 && (t as usize) < soft.len()).then(|| soft[t as usize]) };

    if m == 0 {
        return Ok((0..k_len)
            .map(|s| {
                let r = obs(s as i64 + off).unwrap_or_default();
                (0..big_m)
                    .min_by(|&a, &b| (r - g[0] * points[a]).norm_sqr().total_cmp(&(r - g[0] * points[b]).norm_sqr()))
                    .unwrap_or(0)
            })
            .collect());
    }

    let top = n_states / big_m;
    let digit = |state: usize, j: usize| (state / big_m.pow(j as u32)) % big_m;
    // expected observation for a state (digit j = symbol s - j) minus the oldest term
    let partial: Vec<Complex64> = (0..n_states)
        .map(|st| (0..m).map(|j| g[j] * points[digit(st, j)]).sum())
        .collect();
    let oldest: Vec<Complex64> = points.iter().map(|p| g[m] * p).collect();

    let depth = if k_len.saturating_mul(n_states) <= FULL_TRACEBACK_BYTES {
        k_len
    } else {
        (16 * m).max(64).min(k_len)
    };
    let mut ring = vec![0u8; depth * n_states];
    let mut cost = vec![0.0f64; n_states];
    let mut next = vec![0.0f64; n_states];
    let mut decided = vec![0usize; k_len];

    let trace = |ring: &[u8], from_state: usize, from_step: usize, steps: usize| -> usize {
        let mut st = from_state;
        for s in (from_step + 1 - steps + 1..=from_step).rev() {
            let d = ring[(s % depth) * n_states + st] as usize;
            st = d * top + st / big_m;
        }
        st
    };

    for s in 0..k_len {
        let r = obs(s as i64 + off);
        let slot = (s % depth) * n_states;
        for st in 0..n_states {
            let mut best = f64::INFINITY;
            let mut arg = 0u8;
            for d in 0..big_m {
                let prev = d * top + st / big_m;
                let mut c = cost[prev];
                if let Some(r) = r {
                    let expect = if s >= m {
                        partial[st] + oldest[d]
                    } else {
                        // symbols before the block are absent
                        let mut e = Complex64::default();
                        for j in 0..=s {
                            let p = if j < m { digit(st, j) } else { d };
                            e += g[j] * points[p];
                        }
                        e
                    };
                    c += (r - expect).norm_sqr();
                }
                if c < best {
                    best = c;
                    arg = d as u8;
                }
            }
            next[st] = best;
            ring[slot + st] = arg;
        }
        std::mem::swap(&mut cost, &mut next);

        if depth < k_len && s + 1 >= depth {
            let st = argmin(&cost);
            let old = trace(&ring, st, s, depth);
            decided[s + 1 - depth] = old % big_m;
        }
    }

    // observations past the last symbol involve only its predecessors
    for (st, c) in cost.iter_mut().enumerate() {
        for u in 0..m {
            if let Some(r) = obs(k_len as i64 + off + u as i64) {
                let mut e = Complex64::default();
                for j in u + 1..=m {
                    let sym = k_len as i64 + u as i64 - j as i64;
                    if sym >= 0 {
                        e += g[j] * points[digit(st, j - u - 1)];
                    }
                }
                *c += (r - e).norm_sqr();
            }
        }
    }

    let mut st = argmin(&cost);
    let first_open = if depth < k_len { k_len + 1 - depth } else { 0 };
    for s in (first_open..k_len).rev() {
        decided[s] = st % big_m;
        let d = ring[(s % depth) * n_states + st] as usize;
        st = d * top + st / big_m;
    }
    Ok(decided)
}

/// MLSE over one circular block whose element `k` is aligned like the
/// linear equalizer output: returns one decision per block symbol.
pub fn mlse_circular(est: &FirChannelEstimate, soft: &[Complex64], scheme: Scheme, budget: usize) -> Result<Vec<usize>> {
    let n = soft.len() as i64;
    let m = est.cml() as i64;
    let ext: Vec<Complex64> = (0..n + m).map(|i| soft[(i + est.delay_offset).rem_euclid(n) as usize]).collect();
    let shifted = FirChannelEstimate {
        delay_offset: 0,
        ..est.clone()
    };
    mlse_with_budget(&shifted, &ext, scheme, budget)
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equalize::EstimateSource;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Full linear convolution, optionally with noise.
    fn observe(est: &FirChannelEstimate, idx: &[usize], scheme: Scheme, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let k = idx.len() as i64;
        let len = k + est.delay_offset + est.cml() as i64;
        (0..len)
            .map(|t| {
                let mut r: Complex64 = est
                    .taps
                    .iter()
                    .enumerate()
                    .filter_map(|(j, g)| {
                        let s = t - est.delay_offset - j as i64;
                        (0..k).contains(&s).then(|| g * scheme.point(idx[s as usize]))
                    })
                    .sum();
                if sigma > 0.0 {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    r += c(re, im) * sigma;
                }
                r
            })
            .collect()
    }

    fn brute_force(est: &FirChannelEstimate, soft: &[Complex64], k: usize) -> Vec<usize> {
        let mut best = (f64::INFINITY, 0usize);
        for pattern in 0..1usize << k {
            let idx: Vec<usize> = (0..k).map(|i| (pattern >> i) & 1).collect();
            let clean = observe(est, &idx, Scheme::Bpsk, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
            let d: f64 = clean.iter().zip(soft).map(|(a, b)| (a - b).norm_sqr()).sum();
            if d < best.0 {
                best = (d, pattern);
            }
        }
        (0..k).map(|i| (best.1 >> i) & 1).collect()
    }

    #[test]
    fn single_tap_is_slicer() {
        let est = FirChannelEstimate::from_real(&[1.0]).unwrap();
        let soft: Vec<Complex64> = (0..100).map(|k| c((k as f64).sin(), (k as f64 * 1.7).cos())).collect();
        let out = mlse(&est, &soft, Scheme::Qpsk).unwrap();
        let direct: Vec<usize> = soft.iter().map(|z| Scheme::Qpsk.slice(*z)).collect();
        assert_eq!(out, direct);
    }

    #[test]
    fn matches_exhaustive_search_on_short_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..200 {
            let taps: Vec<Complex64> = (0..3).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let est = FirChannelEstimate::new(taps, (trial % 3) as i64 - 1, EstimateSource::GenieFromH);
            let Ok(est) = est else { continue };
            let idx: Vec<usize> = (0..10).map(|_| rng.random_range(0..2)).collect();
            let soft = observe(&est, &idx, Scheme::Bpsk, 0.7, &mut rng);
            let got = mlse(&est, &soft, Scheme::Bpsk).unwrap();
            let want = brute_force(&est, &soft, 10);
            assert_eq!(got, want, "trial {trial}");
        }
    }

    #[test]
    fn noiseless_qpsk_is_recovered() {
        let est = FirChannelEstimate::new(vec![c(0.4, 0.1), c(1.0, 0.0), c(-0.3, 0.5), c(0.2, 0.0)], 3, EstimateSource::GenieFromH).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let idx: Vec<usize> = (0..500).map(|_| rng.random_range(0..4)).collect();
        let soft = observe(&est, &idx, Scheme::Qpsk, 0.0, &mut rng);
        assert_eq!(mlse(&est, &soft, Scheme::Qpsk).unwrap(), idx);
    }

    #[test]
    fn fixed_lag_traceback_agrees_on_long_blocks() {
        // 2^10 states × 300k steps exceeds the whole-block survivor limit
        let taps: Vec<f64> = (0..11).map(|j| 0.6f64.powi(j)).collect();
        let est = FirChannelEstimate::from_real(&taps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idx: Vec<usize> = (0..300_000).map(|_| rng.random_range(0..2)).collect();
        let soft = observe(&est, &idx, Scheme::Bpsk, 0.05, &mut rng);
        let out = mlse(&est, &soft, Scheme::Bpsk).unwrap();
        let errs = out.iter().zip(&idx).filter(|(a, b)| a != b).count();
        assert_eq!(errs, 0);
    }

    #[test]
    fn circular_block_wrapper_aligns_symbols() {
        let est = FirChannelEstimate::new(vec![c(0.5, 0.0), c(1.0, 0.0), c(0.3, -0.2)], -1, EstimateSource::GenieFromH).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let idx: Vec<usize> = (0..256).map(|_| rng.random_range(0..4)).collect();
        let n = idx.len() as i64;
        let soft: Vec<Complex64> = (0..n)
            .map(|t| {
                (0..3)
                    .map(|j| est.taps[j as usize] * Scheme::Qpsk.point(idx[(t + 1 - j).rem_euclid(n) as usize]))
                    .sum()
            })
            .collect();
        let out = mlse_circular(&est, &soft, Scheme::Qpsk, STATE_BUDGET).unwrap();
        assert_eq!(&out[4..250], &idx[4..250]);
    }

    #[test]
    fn long_memory_exceeds_budget() {
        let taps: Vec<f64> = (0..41).map(|j| 1.0 / (1.0 + j as f64)).collect();
        let est = FirChannelEstimate::from_real(&taps).unwrap();
        match mlse(&est, &[Complex64::default(); 100], Scheme::Bpsk) {
            Err(Error::StateBudget { log2_states, budget, .. }) => {
                assert_eq!(log2_states, 40.0);
                assert_eq!(budget, STATE_BUDGET);
            }
            other => panic!("{other:?}"),
        }
        let est20 = FirChannelEstimate::from_real(&taps[..11]).unwrap();
        assert!(mlse_with_budget(&est20, &[Complex64::default(); 50], Scheme::Qpsk, 1 << 19).is_err());
        assert_eq!(trellis_states(&est20, Scheme::Qpsk, 1 << 20).unwrap(), 1 << 20);
    }
}
