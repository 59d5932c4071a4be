//! Dense tensors of jets with explicit index variance.

use crate::jet::{Jet, JetShape};
use std::sync::Arc;

/// A rank-r tensor of jets, row-major over n^r components. `up[s]` records
/// whether slot `s` is contravariant.
#[derive(Clone)]
pub struct Tensor {
    pub n: usize,
    pub rank: usize,
    pub up: Vec<bool>,
    comps: Vec<Jet>,
}

impl Tensor {
    pub fn zeros(shape: &Arc<JetShape>, n: usize, rank: usize, up: Vec<bool>) -> Tensor {
        assert_eq!(up.len(), rank);
        Tensor {
            n,
            rank,
            up,
            comps: vec![Jet::constant(shape, 0.0); n.pow(rank as u32)],
        }
    }

    pub fn scalar(j: Jet) -> Tensor {
        Tensor {
            n: 1,
            rank: 0,
            up: vec![],
            comps: vec![j],
        }
    }

    pub fn from_vec(n: usize, rank: usize, up: Vec<bool>, comps: Vec<Jet>) -> Tensor {
        assert_eq!(comps.len(), n.pow(rank as u32));
        assert_eq!(up.len(), rank);
        Tensor { n, rank, up, comps }
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        let mut f = 0usize;
        for &i in idx {
            debug_assert!(i < self.n);
            f = f * self.n + i;
        }
        f
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.flat_index(idx)]
    }

    #[inline]
    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Jet {
        let f = self.flat_index(idx);
        &mut self.comps[f]
    }

    #[inline]
    pub fn at(&self, flat: usize) -> &Jet {
        &self.comps[flat]
    }

    #[inline]
    pub fn at_mut(&mut self, flat: usize) -> &mut Jet {
        &mut self.comps[flat]
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn jet_shape(&self) -> &Arc<JetShape> {
        self.comps[0].shape()
    }

    pub fn order(&self) -> usize {
        self.jet_shape().order
    }

    pub fn truncate(&self, target: &Arc<JetShape>) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            up: self.up.clone(),
            comps: self.comps.iter().map(|j| j.truncate(target)).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        debug_assert_eq!(self.rank, other.rank);
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(other.comps.iter()) {
            *a = a.add(b);
        }
        out
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        debug_assert_eq!(self.rank, other.rank);
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(other.comps.iter()) {
            *a = a.sub(b);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Tensor {
        let mut out = self.clone();
        for a in out.comps.iter_mut() {
            *a = a.scale(c);
        }
        out
    }

    pub fn scale_jet(&self, c: &Jet) -> Tensor {
        let mut out = self.clone();
        for a in out.comps.iter_mut() {
            *a = a.mul(c);
        }
        out
    }

    /// Plain trace over one contravariant and one covariant slot.
    pub fn trace_pair(&self, s_up: usize, s_low: usize) -> Tensor {
        assert!(self.up[s_up] && !self.up[s_low]);
        assert_ne!(s_up, s_low);
        let n = self.n;
        let out_rank = self.rank - 2;
        let mut out_up = Vec::with_capacity(out_rank);
        for (s, &u) in self.up.iter().enumerate() {
            if s != s_up && s != s_low {
                out_up.push(u);
            }
        }
        let shape = self.jet_shape().clone();
        let mut out = Tensor::zeros(&shape, n, out_rank, out_up);
        let mut idx = vec![0usize; self.rank];
        let mut out_idx = vec![0usize; out_rank];
        for flat in 0..out.comps.len() {
            let mut f = flat;
            for s in (0..out_rank).rev() {
                out_idx[s] = f % n;
                f /= n;
            }
            let mut k = 0usize;
            for s in 0..self.rank {
                if s != s_up && s != s_low {
                    idx[s] = out_idx[k];
                    k += 1;
                }
            }
            let mut acc = Jet::constant(&shape, 0.0);
            for c in 0..n {
                idx[s_up] = c;
                idx[s_low] = c;
                acc.add_assign(self.get(&idx));
            }
            *out.at_mut(flat) = acc;
        }
        out
    }

    /// Iterate all index tuples of the tensor.
    pub fn indices(&self) -> IndexIter {
        IndexIter {
            n: self.n,
            rank: self.rank,
            next: Some(vec![0; self.rank]),
        }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Tensor {
        Tensor {
            n: self.n,
            rank: self.rank,
            up: self.up.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    /// Largest |value| over components.
    pub fn max_abs_value(&self) -> f64 {
        self.comps
            .iter()
            .map(|j| j.value().abs())
            .fold(0.0, f64::max)
    }
}

pub struct IndexIter {
    n: usize,
    rank: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for IndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut s = self.rank;
        loop {
            if s == 0 {
                self.next = None;
                break;
            }
            s -= 1;
            succ[s] += 1;
            if succ[s] < self.n {
                self.next = Some(succ);
                break;
            }
            succ[s] = 0;
        }
        if self.rank == 0 {
            self.next = None;
        }
        Some(cur)
    }
}
