use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Dense tensor of fixed order over an `dim`-dimensional index space, used
/// for third- and fourth-order derivative data and quartic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    dim: usize,
    order: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(dim: usize, order: usize) -> Self {
        Self {
            dim,
            order,
            data: vec![T::zero(); dim.pow(order as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> T {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Iterates `(multi-index, value)` over every entry in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, T)> + '_ {
        let (dim, order) = (self.dim, self.order);
        self.data.iter().enumerate().map(move |(mut flat, &v)| {
            let mut idx = vec![0; order];
            for slot in (0..order).rev() {
                idx[slot] = flat % dim;
                flat /= dim;
            }
            (idx, v)
        })
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, &x| if x.abs() > m { x.abs() } else { m })
    }

    pub fn map(&self, mut f: impl FnMut(&[usize], T) -> T) -> Self {
        let mut out = self.clone();
        for (idx, v) in self.entries() {
            let o = out.offset(&idx);
            out.data[o] = f(&idx, v);
        }
        out
    }

    /// Full contraction with the same vector in every slot: Σ T_{i..} u_i ⋯ u_l.
    pub fn form(&self, u: &[T]) -> T {
        debug_assert_eq!(u.len(), self.dim);
        self.entries()
            .map(|(idx, v)| idx.iter().fold(v, |acc, &i| acc * u[i]))
            .sum()
    }

    /// Contraction with `v` in the first slot, leaving an order-1 lower tensor.
    pub fn contract_first(&self, v: &[T]) -> Self {
        let mut out = Tensor::zeros(self.dim, self.order - 1);
        for (idx, val) in self.entries() {
            let o = out.offset(&idx[1..]);
            out.data[o] += val * v[idx[0]];
        }
        out
    }

    /// Restriction to the index subset `coords` (re-indexed 0..coords.len()).
    pub fn restrict(&self, coords: &[usize]) -> Self {
        let mut out = Tensor::zeros(coords.len(), self.order);
        for (idx, _) in out.clone().entries() {
            let src: Vec<usize> = idx.iter().map(|&i| coords[i]).collect();
            out.set(&idx, self.get(&src));
        }
        out
    }

    /// True when only the all-equal-index entries are nonzero (a sum of
    /// one-dimensional monomials).
    pub fn is_diagonal(&self, tol: T) -> bool {
        self.entries()
            .all(|(idx, v)| idx.iter().all(|&i| i == idx[0]) || v.abs() <= tol)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorEntry<T> {
    index: Vec<usize>,
    value: T,
}

#[derive(Serialize, Deserialize)]
struct TensorRepr<T> {
    dim: usize,
    order: usize,
    entries: Vec<TensorEntry<T>>,
}

impl<T: Scalar> Serialize for Tensor<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TensorRepr {
            dim: self.dim,
            order: self.order,
            entries: self
                .entries()
                .filter(|(_, v)| *v != T::zero())
                .map(|(index, value)| TensorEntry { index, value })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Tensor<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = TensorRepr::<T>::deserialize(d)?;
        let mut t = Tensor::zeros(repr.dim, repr.order);
        for e in repr.entries {
            if e.index.len() != repr.order || e.index.iter().any(|&i| i >= repr.dim) {
                return Err(serde::de::Error::custom("tensor index out of range"));
            }
            t.set(&e.index, e.value);
        }
        Ok(t)
    }
}
