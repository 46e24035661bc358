//! Heat-bath (Glauber) sampler of the Boltzmann–Gibbs measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactdist::compare::normalizers;
use crate::linalg::Matrix;
use crate::model::{SpeciesPartition, ValidatedModel};
use crate::moments::{MomentReport, RawLayout, StandardErrors};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct GlauberOptions {
    /// Total sweeps per chain, burn-in included; one sweep updates every site once.
    pub sweeps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Batches per chain for batch-means standard errors.
    pub batches: usize,
    /// Independent chains, seeded as streams of one generator and merged in chain order.
    pub chains: usize,
}

impl Default for GlauberOptions {
    fn default() -> Self {
        Self {
            sweeps: 100_000,
            burn_in: 1_000,
            seed: 0,
            batches: 20,
            chains: 1,
        }
    }
}

/// Batch means of the raw monomials for one chain.
fn run_chain<T: Scalar>(
    model: &ValidatedModel<T>,
    partition: &SpeciesPartition,
    opts: &GlauberOptions,
    chain: usize,
    center: &[T],
    scale: &[T],
) -> Vec<Vec<T>> {
    let n = model.n();
    let sizes = partition.sizes();
    let species = partition.site_species();
    let j = model.coupling();
    let h = model.field();
    let inv_n = 1.0 / partition.total() as f64;
    let jf: Vec<Vec<f64>> = (0..n).map(|l| (0..n).map(|s| j[(l, s)].to_f64_lossy()).collect()).collect();
    let hf: Vec<f64> = h.iter().map(|v| v.to_f64_lossy()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(chain as u64);
    let mut spins: Vec<i8> = (0..species.len())
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    let mut sums = vec![0i64; n];
    for (&s, &l) in spins.iter().zip(&species) {
        sums[l] += s as i64;
    }

    let layout = RawLayout { n };
    let measured = opts.sweeps - opts.burn_in;
    let per_batch = measured / opts.batches as u64;
    let mut batches = Vec::with_capacity(opts.batches);
    let mut acc = vec![T::zero(); layout.len()];
    let mut in_batch = 0u64;
    let mut x = vec![T::zero(); n];
    for sweep in 0..opts.sweeps {
        for (i, &l) in species.iter().enumerate() {
            let own = spins[i] as i64;
            let field: f64 = (0..n)
                .map(|s| {
                    let rest = if s == l { sums[s] - own } else { sums[s] };
                    jf[l][s] * rest as f64
                })
                .sum::<f64>()
                * inv_n
                + hf[l];
            let p_up = 1.0 / (1.0 + (-2.0 * field).exp());
            let new: i8 = if rng.gen::<f64>() < p_up { 1 } else { -1 };
            sums[l] += (new as i64) - own;
            spins[i] = new;
        }
        if sweep < opts.burn_in || batches.len() == opts.batches {
            continue;
        }
        for l in 0..n {
            x[l] = (T::of(sums[l] as f64) - T::of(sizes[l] as f64) * center[l]) / scale[l];
        }
        layout.accumulate(&x, T::one(), &mut acc);
        in_batch += 1;
        if in_batch == per_batch {
            batches.push(acc.iter().map(|&v| v / T::of(per_batch as f64)).collect());
            acc.iter_mut().for_each(|v| *v = T::zero());
            in_batch = 0;
        }
    }
    batches
}

/// Batch-means moments of `x_l = (S_l − N_l μ_l)/N_l^{1−γ_l}` under heat-bath dynamics.
///
/// A spin of species `l` is set to `+1` with probability `1/(1+e^{−2φ})`,
/// `φ = (1/N) Σ_s J_ls S'_s + h_l`, where `S'` excludes the updated site.
pub fn glauber_sample<T: Scalar>(
    model: &ValidatedModel<T>,
    partition: &SpeciesPartition,
    opts: &GlauberOptions,
    center: &[T],
    exponents: &[T],
) -> Result<MomentReport<T>> {
    let n = model.n();
    if partition.n() != n || center.len() != n || exponents.len() != n {
        return Err(Error::Dimension("partition, center and exponents must match the model".into()));
    }
    if opts.sweeps <= opts.burn_in {
        return Err(Error::InvalidParameter(format!(
            "sweeps ({}) must exceed burn-in ({})",
            opts.sweeps, opts.burn_in
        )));
    }
    if opts.batches < 2 || opts.chains == 0 || opts.sweeps - opts.burn_in < opts.batches as u64 {
        return Err(Error::InvalidParameter(
            "need at least 2 batches, 1 chain and one measured sweep per batch".into(),
        ));
    }
    let scale = normalizers(partition.sizes(), exponents);
    let per_chain: Vec<Vec<Vec<T>>> = (0..opts.chains)
        .into_par_iter()
        .map(|c| run_chain(model, partition, opts, c, center, &scale))
        .collect();
    let batches: Vec<Vec<T>> = per_chain.into_iter().flatten().collect();
    let b = batches.len();
    let layout = RawLayout { n };
    let mut mean = vec![T::zero(); layout.len()];
    for batch in &batches {
        for (m, &v) in mean.iter_mut().zip(batch) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= T::of_usize(b));
    let se: Vec<T> = (0..layout.len())
        .map(|k| {
            let var = batches.iter().map(|bt| (bt[k] - mean[k]).powi(2)).sum::<T>() / T::of_usize(b - 1);
            (var / T::of_usize(b)).sqrt()
        })
        .collect();
    let mut report = layout.report(&mean, center.to_vec(), exponents.to_vec());
    report.standard_errors = Some(StandardErrors {
        mean: (0..n).map(|l| se[layout.first_index(l)]).collect(),
        second: Matrix::from_fn(n, n, |l, m| se[layout.second_index(l, m)]),
        third: (0..n).map(|l| se[layout.third_index(l)]).collect(),
        fourth: (0..n).map(|l| se[layout.fourth_index(l)]).collect(),
        batches: b,
    });
    Ok(report)
}
