#![allow(dead_code)]

use cwlimits::model::{energy_quadratic, validate_model, ModelSpec, SpinConfig, ValidatedModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn model(sizes: Vec<u64>, j: &[&[f64]], h: &[f64]) -> ValidatedModel<f64> {
    let rows: Vec<Vec<f64>> = j.iter().map(|r| r.to_vec()).collect();
    validate_model(ModelSpec::new(sizes, &rows, h.to_vec()).unwrap()).unwrap()
}

/// Random symmetric coupling with positive diagonal; not necessarily positive definite.
pub fn random_small_model(rng: &mut ChaCha8Rng, max_total: u64) -> ValidatedModel<f64> {
    let n = rng.gen_range(1..=3usize);
    let mut sizes = vec![1u64; n];
    let extra = rng.gen_range(0..=(max_total - n as u64));
    for _ in 0..extra {
        sizes[rng.gen_range(0..n)] += 1;
    }
    let mut j = vec![vec![0.0; n]; n];
    for l in 0..n {
        j[l][l] = rng.gen_range(0.1..2.5);
        for s in 0..l {
            let v = rng.gen_range(-1.0..1.0);
            j[l][s] = v;
            j[s][l] = v;
        }
    }
    let h = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    validate_model(ModelSpec::new(sizes, &j, h).unwrap()).unwrap()
}

/// Random positive-definite coupling `J = BBᵀ + εI` scaled into a moderate range.
pub fn random_pd_model(rng: &mut ChaCha8Rng, n: usize) -> ValidatedModel<f64> {
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut j = vec![vec![0.0; n]; n];
    for l in 0..n {
        for s in 0..n {
            j[l][s] = (0..n).map(|k| b[l][k] * b[s][k]).sum::<f64>() * 0.8;
        }
        j[l][l] += 0.2;
    }
    for l in 0..n {
        for s in 0..l {
            j[s][l] = j[l][s];
        }
    }
    let sizes = (0..n).map(|_| rng.gen_range(1..=4u64)).collect();
    let h = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
    validate_model(ModelSpec::new(sizes, &j, h).unwrap()).unwrap()
}

/// Distribution of the count vector by summing `e^{−H(σ)}` over all `2^N` configurations.
pub fn brute_force_counts(model: &ValidatedModel<f64>) -> Vec<(Vec<u64>, f64)> {
    let partition = model.partition();
    let total = partition.total() as usize;
    let species = partition.site_species();
    let shape: Vec<usize> = partition.sizes().iter().map(|&s| s as usize + 1).collect();
    let states: usize = shape.iter().product();
    let mut log_w: Vec<Vec<f64>> = vec![Vec::new(); states];
    for bits in 0..(1u64 << total) {
        let config = SpinConfig::from_bits(bits, total);
        let energy = energy_quadratic(&config, model).unwrap();
        let mut counts = vec![0usize; shape.len()];
        for (&s, &l) in config.spins().iter().zip(&species) {
            if s == 1 {
                counts[l] += 1;
            }
        }
        let flat = counts.iter().zip(&shape).fold(0, |acc, (&c, &s)| acc * s + c);
        log_w[flat].push(-energy);
    }
    let max = log_w.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w.iter().map(|v| v.iter().map(|w| (w - max).exp()).sum()).collect();
    let z: f64 = weights.iter().sum();
    weights
        .into_iter()
        .enumerate()
        .map(|(flat, w)| {
            let mut c = vec![0u64; shape.len()];
            let mut r = flat;
            for slot in (0..shape.len()).rev() {
                c[slot] = (r % shape[slot]) as u64;
                r /= shape[slot];
            }
            (c, w / z)
        })
        .collect()
}

pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo).signum() == f(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Richardson-extrapolated central difference of a vector function along coordinate `k`.
pub fn richardson(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], k: usize, h: f64) -> Vec<f64> {
    let central = |step: f64| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += step;
        xm[k] -= step;
        f(&xp)
            .into_iter()
            .zip(f(&xm))
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect::<Vec<_>>()
    };
    let coarse = central(h);
    let fine = central(h / 2.0);
    fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}
