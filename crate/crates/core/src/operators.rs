//! Spin-1/2 operator algebra and the Liouville-space superoperators built on it.
//!
//! Basis ordering is fixed project-wide: index 0 is the excited state, index 1
//! the ground state. Superoperators act on column-major vectorized 2×2
//! matrices, `vec(ρ) = [ρ00, ρ10, ρ01, ρ11]`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Column-major position of matrix entry `(row, col)` in a vectorized 2×2 matrix.
#[inline]
pub const fn vec_index(row: usize, col: usize) -> usize {
    row + 2 * col
}

/// A 2×2 complex matrix on the two-level Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsOperator(pub [[Complex64; 2]; 2]);

impl Default for TlsOperator {
    fn default() -> Self {
        Self::zero()
    }
}

impl TlsOperator {
    pub const fn new(entries: [[Complex64; 2]; 2]) -> Self {
        Self(entries)
    }

    pub fn from_real(entries: [[f64; 2]; 2]) -> Self {
        Self([
            [entries[0][0].into(), entries[0][1].into()],
            [entries[1][0].into(), entries[1][1].into()],
        ])
    }

    pub const fn zero() -> Self {
        Self([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Projector onto the excited state, `|e⟩⟨e|`.
    pub const fn excited() -> Self {
        Self([[ONE, ZERO], [ZERO, ZERO]])
    }

    /// Projector onto the ground state, `|g⟩⟨g|`.
    pub const fn ground() -> Self {
        Self([[ZERO, ZERO], [ZERO, ONE]])
    }

    /// `|+⟩⟨+|` with `|+⟩ = (|e⟩ + |g⟩)/√2`.
    pub fn plus_state() -> Self {
        Self::from_real([[0.5, 0.5], [0.5, 0.5]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A†|`, zero for hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.dagger()).max_abs()
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let h = (*self + self.dagger()).scale(0.5.into());
        let a = h.0[0][0].re;
        let d = h.0[1][1].re;
        let b = h.0[0][1].norm();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - r, mean + r]
    }

    /// Checks the density-matrix invariants: hermitian, unit trace, and
    /// eigenvalues no lower than `-tol`.
    pub fn is_density_matrix(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
            && (self.trace() - ONE).norm() <= tol
            && self.hermitian_eigenvalues()[0] >= -tol
    }

    pub fn to_vec(&self) -> [Complex64; 4] {
        let m = &self.0;
        [m[0][0], m[1][0], m[0][1], m[1][1]]
    }

    pub fn from_vec(v: &[Complex64]) -> Self {
        Self([[v[0], v[2]], [v[1], v[3]]])
    }
}

impl Add for TlsOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for TlsOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for TlsOperator {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl Mul for TlsOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(out)
    }
}

impl Mul<TlsOperator> for Complex64 {
    type Output = TlsOperator;
    fn mul(self, rhs: TlsOperator) -> TlsOperator {
        rhs.scale(self)
    }
}

impl Mul<TlsOperator> for f64 {
    type Output = TlsOperator;
    fn mul(self, rhs: TlsOperator) -> TlsOperator {
        rhs.scale(self.into())
    }
}

/// The spin-1/2 generators plus the identity.
#[derive(Debug, Clone, Copy)]
pub struct TlsBasis {
    pub j0: TlsOperator,
    pub jplus: TlsOperator,
    pub jminus: TlsOperator,
    pub identity: TlsOperator,
}

/// `J0 = σz/2`, `J+ = |e⟩⟨g|`, `J- = |g⟩⟨e|`.
pub fn tls_basis() -> TlsBasis {
    let jplus = TlsOperator::from_real([[0.0, 1.0], [0.0, 0.0]]);
    TlsBasis {
        j0: TlsOperator::from_real([[0.5, 0.0], [0.0, -0.5]]),
        jplus,
        jminus: jplus.dagger(),
        identity: TlsOperator::identity(),
    }
}

pub fn j0() -> TlsOperator {
    tls_basis().j0
}

pub fn jplus() -> TlsOperator {
    tls_basis().jplus
}

pub fn jminus() -> TlsOperator {
    tls_basis().jminus
}

/// TLS–bath coupling form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingMode {
    /// Full electric-dipole coupling, `(J+ + J-)(b† + b)`.
    Full,
    /// Rotating-wave coupling, `J- b† + J+ b`.
    Rwa,
}

impl CouplingMode {
    pub fn name(self) -> &'static str {
        match self {
            CouplingMode::Full => "full",
            CouplingMode::Rwa => "rwa",
        }
    }
}

impl std::str::FromStr for CouplingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(CouplingMode::Full),
            "rwa" => Ok(CouplingMode::Rwa),
            other => Err(format!("unknown coupling mode `{other}` (expected `full` or `rwa`)")),
        }
    }
}

/// The pair `(c1, c2) = (a, a†)` entering the bath interaction.
pub fn coupling_ops(mode: CouplingMode) -> (TlsOperator, TlsOperator) {
    let b = tls_basis();
    match mode {
        CouplingMode::Full => {
            let x = b.jplus + b.jminus;
            (x, x)
        }
        CouplingMode::Rwa => (b.jminus, b.jplus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperKind {
    Left,
    Right,
    Commutator,
}

/// A linear map on vectorized 2×2 matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperOperator(pub [[Complex64; 4]; 4]);

impl Default for SuperOperator {
    fn default() -> Self {
        Self::zero()
    }
}

impl SuperOperator {
    pub const fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Self(m)
    }

    /// `vec(ρ) ↦ vec(Aρ)`.
    pub fn left(a: &TlsOperator) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    m[vec_index(r, c)][vec_index(k, c)] = a.0[r][k];
                }
            }
        }
        Self(m)
    }

    /// `vec(ρ) ↦ vec(ρB)`.
    pub fn right(b: &TlsOperator) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..2 {
                    m[vec_index(r, c)][vec_index(r, k)] = b.0[k][c];
                }
            }
        }
        Self(m)
    }

    /// `vec(ρ) ↦ vec(Aρ - ρA)`.
    pub fn commutator(a: &TlsOperator) -> Self {
        Self::left(a) - Self::right(a)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|z| *z *= s);
        Self(out)
    }

    #[inline]
    pub fn apply(&self, v: &[Complex64]) -> [Complex64; 4] {
        let m = &self.0;
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(m.iter()) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }

    /// `out += s · (self · v)`.
    #[inline]
    pub fn apply_add(&self, s: Complex64, v: &[Complex64], out: &mut [Complex64]) {
        let m = &self.0;
        for (o, row) in out.iter_mut().zip(m.iter()) {
            *o += s * (row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3]);
        }
    }

    pub fn apply_op(&self, rho: &TlsOperator) -> TlsOperator {
        TlsOperator::from_vec(&self.apply(&rho.to_vec()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| *z == ZERO)
    }
}

impl Add for SuperOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for (row, r2) in out.iter_mut().zip(rhs.0.iter()) {
            for (a, b) in row.iter_mut().zip(r2.iter()) {
                *a += b;
            }
        }
        Self(out)
    }
}

impl AddAssign for SuperOperator {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for SuperOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-ONE)
    }
}

impl Mul for SuperOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        Self(out)
    }
}

/// Builds the left, right, or commutator action of `a`.
pub fn superop(kind: SuperKind, a: &TlsOperator) -> SuperOperator {
    match kind {
        SuperKind::Left => SuperOperator::left(a),
        SuperKind::Right => SuperOperator::right(a),
        SuperKind::Commutator => SuperOperator::commutator(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &TlsOperator, b: &TlsOperator, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn basis_matches_spin_half() {
        let b = tls_basis();
        assert_eq!(b.j0, TlsOperator::from_real([[0.5, 0.0], [0.0, -0.5]]));
        assert_eq!(b.jplus * b.jminus, TlsOperator::excited());
        assert_eq!(b.jminus, b.jplus.dagger());
        assert!(close(&b.jplus.commutator(&b.jminus), &(2.0 * b.j0), 0.0));
        assert_eq!(b.j0.hermiticity_defect(), 0.0);
        assert_eq!((b.jplus + b.jminus).hermiticity_defect(), 0.0);
    }

    #[test]
    fn coupling_forms() {
        let (c1, c2) = coupling_ops(CouplingMode::Full);
        assert_eq!(c1, TlsOperator::from_real([[0.0, 1.0], [1.0, 0.0]]));
        assert_eq!(c1, c2);
        assert_eq!(c1, c1.dagger());
        let (a, adag) = coupling_ops(CouplingMode::Rwa);
        assert_eq!(adag, a.dagger());
        assert_ne!(a, a.dagger());
    }

    #[test]
    fn vectorization_is_column_major() {
        let rho = TlsOperator::new([[c(1.0, 0.0), c(2.0, 0.0)], [c(3.0, 0.0), c(4.0, 0.0)]]);
        let v = rho.to_vec();
        assert_eq!(v[vec_index(1, 0)], c(3.0, 0.0));
        assert_eq!(v[vec_index(0, 1)], c(2.0, 0.0));
        assert_eq!(TlsOperator::from_vec(&v), rho);
    }

    #[test]
    fn commutator_examples() {
        let b = tls_basis();
        assert!(SuperOperator::commutator(&b.identity).is_zero());
        let out = superop(SuperKind::Commutator, &b.j0).apply_op(&b.jplus);
        assert!(close(&out, &b.jplus, 1e-15));
    }

    fn arb_op() -> impl Strategy<Value = TlsOperator> {
        prop::array::uniform8(-1.0f64..1.0).prop_map(|x| {
            TlsOperator::new([[c(x[0], x[1]), c(x[2], x[3])], [c(x[4], x[5]), c(x[6], x[7])]])
        })
    }

    fn arb_hermitian() -> impl Strategy<Value = TlsOperator> {
        arb_op().prop_map(|a| (a + a.dagger()).scale(c(0.5, 0.0)))
    }

    proptest! {
        #[test]
        fn left_right_match_direct_products(a in arb_op(), b in arb_op(), rho in arb_op()) {
            let via_super = (SuperOperator::left(&a) * SuperOperator::right(&b)).apply_op(&rho);
            prop_assert!(close(&via_super, &(a * rho * b), 1e-13));
            let swapped = (SuperOperator::right(&b) * SuperOperator::left(&a)).apply_op(&rho);
            prop_assert!(close(&via_super, &swapped, 1e-13));
        }

        #[test]
        fn commutator_matches_direct(a in arb_op(), rho in arb_op()) {
            let out = SuperOperator::commutator(&a).apply_op(&rho);
            prop_assert!(close(&out, &a.commutator(&rho), 1e-13));
            prop_assert!(out.trace().norm() <= 1e-12);
        }

        #[test]
        fn scaled_commutator_preserves_hermiticity(a in arb_hermitian(), rho in arb_hermitian()) {
            let out = SuperOperator::commutator(&a).scale(-I).apply_op(&rho);
            prop_assert!(out.hermiticity_defect() <= 1e-13);
        }
    }
}
