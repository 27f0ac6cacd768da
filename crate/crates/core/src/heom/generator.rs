//! The linear generator of the truncated hierarchy.
//!
//! For every multi-index `m`,
//!
//! ```text
//! dρ_m/dt = (-i H_A^x + Σ_k m_k α_k) ρ_m + Σ_k Φ0_k ρ_{m+e_k} + Σ_k m_k Φ1_k ρ_{m-e_k}
//! ```
//!
//! with `H_A = ω0 J0` and `ρ_m ≡ 0` beyond the truncation depth. When
//! rescaling is on, the stack holds `ρ̃_m = ρ_m / ∏ √(m_k!) s_k^{m_k}` and the
//! couplings become `√(m_k+1) s_k Φ0_k` and `√(m_k) Φ1_k / s_k`. The physical
//! element is the same in both representations.

use num_complex::Complex64;
use rayon::prelude::*;

use super::channels::{collect_channels, ChannelCoeffs};
use super::index::{IndexSet, NONE};
use super::stack::AdmStack;
use crate::error::{HeomError, Result};
use crate::model::SimConfig;
use crate::operators::{tls_basis, SuperOperator, I, ZERO};

/// Below this many auxiliary matrices the RHS is applied on one thread.
const PARALLEL_THRESHOLD: usize = 4096;
/// Auxiliary matrices per parallel work item.
const PARALLEL_CHUNK: usize = 512;

#[derive(Debug, Clone)]
pub struct HeomGenerator {
    indices: IndexSet,
    channels: Vec<ChannelCoeffs>,
    free: SuperOperator,
    scale: Vec<f64>,
    rescaled: bool,
    decay: Vec<f64>,
    kernel: Kernel,
}

/// Nonzero entries of a 4×4 block.
#[derive(Debug, Clone, Default)]
struct SparseBlock {
    entries: Vec<(u8, u8, Complex64)>,
}

impl SparseBlock {
    fn of(op: &SuperOperator) -> Self {
        let mut entries = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                if op.0[r][c] != ZERO {
                    entries.push((r as u8, c as u8, op.0[r][c]));
                }
            }
        }
        Self { entries }
    }

    #[inline]
    fn apply_add(&self, w: f64, v: &[Complex64], out: &mut [Complex64; 4]) {
        for &(r, c, a) in &self.entries {
            out[r as usize] += a * v[c as usize] * w;
        }
    }
}

/// Precomputed data for the hot loop: sparse blocks and per-level weights.
#[derive(Debug, Clone, Default)]
struct Kernel {
    free: SparseBlock,
    phi0: Vec<SparseBlock>,
    phi1: Vec<SparseBlock>,
    /// `raise[k][m_k]` and `lower[k][m_k]`.
    raise: Vec<Vec<f64>>,
    lower: Vec<Vec<f64>>,
}

impl HeomGenerator {
    /// Builds the generator for all enabled channels of `sim`.
    pub fn build(sim: &SimConfig) -> Result<Self> {
        sim.validate()?;
        let channels = collect_channels(&sim.field, &sim.bath)?;
        Self::from_channels(sim.omega0, channels, sim.depth, sim.rescale, sim.max_indices)
    }

    /// Builds the generator from an explicit channel list, in the given order.
    pub fn from_channels(
        omega0: f64,
        channels: Vec<ChannelCoeffs>,
        depth: usize,
        rescale: bool,
        max_indices: usize,
    ) -> Result<Self> {
        for ch in &channels {
            if !(ch.alpha.is_finite() && ch.alpha < 0.0) {
                return Err(HeomError::InvalidParameter(format!(
                    "channel {} has non-negative decay constant {}",
                    ch.kind, ch.alpha
                )));
            }
        }
        let indices = IndexSet::enumerate(channels.len(), depth, max_indices)?;
        let h_a = tls_basis().j0.scale(omega0.into());
        let free = SuperOperator::commutator(&h_a).scale(-I);
        let scale = channels
            .iter()
            .map(|ch| if rescale { ch.balance_factor() } else { 1.0 })
            .collect();
        let decay = indices
            .iter()
            .map(|m| m.iter().zip(&channels).map(|(&mk, ch)| mk as f64 * ch.alpha).sum())
            .collect();
        let mut gen = Self { indices, channels, free, scale, rescaled: rescale, decay, kernel: Kernel::default() };
        gen.kernel = Kernel {
            free: SparseBlock::of(&gen.free),
            phi0: gen.channels.iter().map(|ch| SparseBlock::of(&ch.phi0)).collect(),
            phi1: gen.channels.iter().map(|ch| SparseBlock::of(&ch.phi1)).collect(),
            raise: (0..gen.channels.len())
                .map(|k| (0..=depth).map(|m| gen.raise_weight(k, m as u16)).collect())
                .collect(),
            lower: (0..gen.channels.len())
                .map(|k| (0..=depth).map(|m| gen.lower_weight(k, m as u16)).collect())
                .collect(),
        };
        Ok(gen)
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn channels(&self) -> &[ChannelCoeffs] {
        &self.channels
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// Number of auxiliary matrices.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Length of the stacked state vector.
    pub fn dim(&self) -> usize {
        4 * self.len()
    }

    pub fn initial_stack(&self, rho: &crate::operators::TlsOperator) -> AdmStack {
        AdmStack::initial(self.len(), rho)
    }

    /// Weight of the coupling from `m` to `m + e_k`, given `m_k`.
    #[inline]
    fn raise_weight(&self, k: usize, mk: u16) -> f64 {
        if self.rescaled {
            ((mk as f64) + 1.0).sqrt() * self.scale[k]
        } else {
            1.0
        }
    }

    /// Weight of the coupling from `m` to `m - e_k`, given `m_k ≥ 1`.
    #[inline]
    fn lower_weight(&self, k: usize, mk: u16) -> f64 {
        if self.rescaled {
            (mk as f64).sqrt() / self.scale[k]
        } else {
            mk as f64
        }
    }

    /// Derivative of a single auxiliary matrix.
    #[inline]
    fn rhs_block(&self, pos: usize, x: &[Complex64], out: &mut [Complex64]) {
        let kern = &self.kernel;
        let own = &x[4 * pos..4 * pos + 4];
        let d = self.decay[pos];
        let mut acc = [own[0] * d, own[1] * d, own[2] * d, own[3] * d];
        kern.free.apply_add(1.0, own, &mut acc);
        let m = self.indices.counts(pos);
        for k in 0..self.channels.len() {
            let mk = m[k] as usize;
            let up = self.indices.raised(pos, k);
            if up != NONE {
                kern.phi0[k].apply_add(kern.raise[k][mk], &x[4 * up..4 * up + 4], &mut acc);
            }
            let down = self.indices.lowered(pos, k);
            if down != NONE {
                kern.phi1[k].apply_add(kern.lower[k][mk], &x[4 * down..4 * down + 4], &mut acc);
            }
        }
        out.copy_from_slice(&acc);
    }

    /// Matrix-free application `out = G x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        if self.len() >= PARALLEL_THRESHOLD {
            out.par_chunks_mut(4 * PARALLEL_CHUNK).enumerate().for_each(|(chunk, o)| {
                let first = chunk * PARALLEL_CHUNK;
                for (i, block) in o.chunks_exact_mut(4).enumerate() {
                    self.rhs_block(first + i, x, block);
                }
            });
        } else {
            for (pos, o) in out.chunks_exact_mut(4).enumerate() {
                self.rhs_block(pos, x, o);
            }
        }
    }

    pub fn apply_stack(&self, x: &AdmStack) -> AdmStack {
        let mut out = AdmStack::zeros(self.len());
        self.apply(x.as_slice(), out.as_mut_slice());
        out
    }

    /// Explicit sparse form of the generator.
    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(usize, Complex64)> = Vec::new();
        for pos in 0..self.len() {
            let m = self.indices.counts(pos);
            let mut blocks: Vec<(usize, SuperOperator)> = Vec::with_capacity(1 + 2 * m.len());
            blocks.push((pos, self.free + SuperOperator::identity().scale(self.decay[pos].into())));
            for (k, ch) in self.channels.iter().enumerate() {
                let up = self.indices.raised(pos, k);
                if up != NONE {
                    blocks.push((up, ch.phi0.scale(self.raise_weight(k, m[k]).into())));
                }
                let down = self.indices.lowered(pos, k);
                if down != NONE {
                    blocks.push((down, ch.phi1.scale(self.lower_weight(k, m[k]).into())));
                }
            }
            for r in 0..4 {
                row.clear();
                for (col_block, op) in &blocks {
                    for c in 0..4 {
                        let v = op.0[r][c];
                        if v != ZERO {
                            row.push((4 * col_block + c, v));
                        }
                    }
                }
                row.sort_by_key(|&(c, _)| c);
                // merge duplicates (distinct blocks never share a column, but be safe)
                let start = col_idx.len();
                for &(c, v) in &row {
                    if col_idx.len() > start && *col_idx.last().unwrap() == c {
                        *values.last_mut().unwrap() += v;
                    } else {
                        col_idx.push(c);
                        values.push(v);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    /// Rough spectral-radius estimate by power iteration.
    pub fn spectral_radius_estimate(&self, iterations: usize) -> f64 {
        let n = self.dim();
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
            .collect();
        let mut y = vec![ZERO; n];
        let mut est = 0.0;
        for _ in 0..iterations {
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|z| *z /= norm);
            self.apply(&x, &mut y);
            est = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            std::mem::swap(&mut x, &mut y);
        }
        est
    }
}

/// Compressed sparse row matrix, used for the explicit generator.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => ZERO,
        }
    }

    /// `(row, col, value)` for every stored entry.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.col_idx[i], self.values[i]))
        })
    }
}
