use num_complex::Complex64;

use crate::operators::{SuperOperator, TlsOperator, ZERO};

/// All auxiliary density matrices of a hierarchy, stored as consecutive
/// column-major 2×2 blocks in index-set order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmStack {
    values: Vec<Complex64>,
}

impl AdmStack {
    pub fn zeros(len: usize) -> Self {
        Self { values: vec![ZERO; 4 * len] }
    }

    /// Factorized initial condition: physical element `rho`, every auxiliary zero.
    pub fn initial(len: usize, rho: &TlsOperator) -> Self {
        let mut s = Self::zeros(len);
        s.set(0, rho);
        s
    }

    pub fn from_values(values: Vec<Complex64>) -> Self {
        assert_eq!(values.len() % 4, 0, "stack length must be a multiple of 4");
        Self { values }
    }

    /// Number of auxiliary matrices.
    pub fn len(&self) -> usize {
        self.values.len() / 4
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, pos: usize) -> TlsOperator {
        TlsOperator::from_vec(&self.values[4 * pos..4 * pos + 4])
    }

    pub fn set(&mut self, pos: usize, rho: &TlsOperator) {
        self.values[4 * pos..4 * pos + 4].copy_from_slice(&rho.to_vec());
    }

    /// The reduced density matrix of the TLS.
    pub fn physical(&self) -> TlsOperator {
        self.get(0)
    }

    /// Applies the same superoperator to every auxiliary matrix.
    pub fn map_all(&mut self, op: &SuperOperator) {
        for block in self.values.chunks_exact_mut(4) {
            let out = op.apply(block);
            block.copy_from_slice(&out);
        }
    }

    /// Left-multiplies every auxiliary matrix by `a`.
    pub fn left_multiply_all(&mut self, a: &TlsOperator) {
        self.map_all(&SuperOperator::left(a));
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::tls_basis;

    #[test]
    fn left_multiply_touches_every_element() {
        let b = tls_basis();
        let mut s = AdmStack::zeros(3);
        s.set(0, &TlsOperator::excited());
        s.set(2, &TlsOperator::from_real([[0.1, 0.2], [0.3, 0.4]]));
        s.left_multiply_all(&b.jminus);
        assert_eq!(s.get(0), b.jminus * TlsOperator::excited());
        assert_eq!(s.get(1), TlsOperator::zero());
        assert_eq!(s.get(2), b.jminus * TlsOperator::from_real([[0.1, 0.2], [0.3, 0.4]]));
    }
}
