//! Globally adaptive Gauss–Kronrod 7/15 quadrature of vector-valued
//! integrands, and nested (tensorized) integration over boxes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_intervals: 2000,
        }
    }
}

struct Piece<T> {
    a: T,
    b: T,
    value: Vec<T>,
    error: T,
}

impl<T: Scalar> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Scalar> Eq for Piece<T> {}
impl<T: Scalar> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gk15<T: Scalar, F: FnMut(T) -> Vec<T>>(f: &mut F, a: T, b: T) -> (Vec<T>, T) {
    let half = (b - a) * T::of(0.5);
    let mid = (a + b) * T::of(0.5);
    let fc = f(mid);
    let dim = fc.len();
    let mut kronrod: Vec<T> = fc.iter().map(|&v| v * T::of(WGK[7])).collect();
    let mut gauss: Vec<T> = fc.iter().map(|&v| v * T::of(WG[3])).collect();
    for i in 0..7 {
        let dx = half * T::of(XGK[i]);
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        for c in 0..dim {
            let s = f1[c] + f2[c];
            kronrod[c] += T::of(WGK[i]) * s;
            if i % 2 == 1 {
                gauss[c] += T::of(WG[i / 2]) * s;
            }
        }
    }
    let mut err = T::zero();
    for c in 0..dim {
        kronrod[c] *= half;
        gauss[c] *= half;
        err = err.max((kronrod[c] - gauss[c]).abs());
    }
    (kronrod, err)
}

/// Integrates a vector-valued `f` over `[a, b]` until the summed error
/// estimate is below `max(abs_tol, rel_tol · max_c |I_c|)`.
pub fn integrate<T: Scalar, F: FnMut(T) -> Vec<T>>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadratureOptions,
) -> Result<Vec<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature("integration limits must be finite".into()));
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    loop {
        let dim = heap.peek().map_or(0, |p| p.value.len());
        let mut total = vec![T::zero(); dim];
        let mut err = T::zero();
        for p in heap.iter() {
            for c in 0..dim {
                total[c] += p.value[c];
            }
            err += p.error;
        }
        let scale = total.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if !err.is_finite() || total.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature("integrand is not finite".into()));
        }
        if err <= T::of(opts.abs_tol).max(T::of(opts.rel_tol) * scale) {
            return Ok(total);
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {:e} after {} intervals",
                err.to_f64_lossy(),
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = (worst.a + worst.b) * T::of(0.5);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&mut f, lo, hi);
            heap.push(Piece { a: lo, b: hi, value, error });
        }
    }
}

/// Integrates `f` over the cube `[−l, l]^dim` by nesting one-dimensional
/// adaptive rules, innermost axis last.
pub fn integrate_box<T: Scalar, F: Fn(&[T]) -> Vec<T>>(
    f: &F,
    dim: usize,
    l: T,
    opts: &QuadratureOptions,
) -> Result<Vec<T>> {
    fn rec<T: Scalar, F: Fn(&[T]) -> Vec<T>>(
        f: &F,
        prefix: &mut Vec<T>,
        dim: usize,
        l: T,
        opts: &QuadratureOptions,
    ) -> Result<Vec<T>> {
        if prefix.len() + 1 == dim {
            return integrate(
                |t| {
                    let mut x = prefix.clone();
                    x.push(t);
                    f(&x)
                },
                -l,
                l,
                opts,
            );
        }
        let mut failure = None;
        let out = integrate(
            |t| {
                prefix.push(t);
                let inner = rec(f, prefix, dim, l, opts);
                prefix.pop();
                match inner {
                    Ok(v) => v,
                    Err(e) => {
                        failure = Some(e);
                        vec![T::nan()]
                    }
                }
            },
            -l,
            l,
            opts,
        );
        match failure {
            Some(e) => Err(e),
            None => out,
        }
    }
    if dim == 0 {
        return Ok(f(&[]));
    }
    rec(f, &mut Vec::with_capacity(dim), dim, l, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x: f64| vec![x * x, 1.0], -1.0, 2.0, &QuadratureOptions::default()).unwrap();
        assert!((v[0] - 3.0).abs() < 1e-14);
        assert!((v[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn quartic_exponential_moments_match_gamma_functions() {
        let l = 1.2 * (24.0 * (1e14f64).ln()).powf(0.25);
        let v = integrate(
            |x: f64| {
                let w = (-x.powi(4) / 24.0).exp();
                vec![w, w * x * x, w * x.powi(4)]
            },
            -l,
            l,
            &QuadratureOptions::default(),
        )
        .unwrap();
        let e2 = v[1] / v[0];
        let e4 = v[2] / v[0];
        assert!((e4 - 6.0).abs() < 1e-8, "{e4}");
        let oracle = 24f64.sqrt() * gamma(0.75) / gamma(0.25);
        assert!((e2 - oracle).abs() < 1e-8);
        // ∫ e^{−x⁴/24} = 2·24^{1/4}·Γ(5/4)
        let z = 2.0 * 24f64.powf(0.25) * gamma(1.25);
        assert!((v[0] - z).abs() < 1e-10 * z);
    }

    #[test]
    fn box_integral_of_gaussian() {
        let v = integrate_box(
            &|x: &[f64]| vec![(-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()],
            2,
            10.0,
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert!((v[0] - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn budget_is_reported() {
        let opts = QuadratureOptions {
            max_intervals: 3,
            ..QuadratureOptions::default()
        };
        assert!(integrate(|x: f64| vec![(1.0 / (x.abs() + 1e-9)).sin()], -1.0, 1.0, &opts).is_err());
    }
}
