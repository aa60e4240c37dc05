//! Matrix algebras over a poset.
//!
//! A [`StructuredMatrix`] is a real square array indexed by the elements of a
//! poset, with entry `(i, j)` forced to zero whenever `i` and `j` are
//! unrelated. Multiplication is the ordinary matrix product followed by
//! projection back onto that mask; with the unique-Hasse-path condition this
//! makes the space an algebra satisfying the six triangular-algebra axioms
//! checked by [`verify_axioms`].

use crate::linalg::Dense;
use crate::poset::Poset;
use crate::scalar::Scalar;
use rand::Rng;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Dense square array over a poset with the comparability mask enforced.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredMatrix<T> {
    poset: Arc<Poset>,
    data: Vec<T>,
}

impl<T: Scalar> StructuredMatrix<T> {
    pub fn zeros(poset: &Arc<Poset>) -> Self {
        StructuredMatrix {
            poset: Arc::clone(poset),
            data: vec![T::zero(); poset.len() * poset.len()],
        }
    }

    /// The unit element: ones on the diagonal.
    pub fn unit(poset: &Arc<Poset>) -> Self {
        let mut m = Self::zeros(poset);
        for i in 0..poset.len() {
            m.data[i * poset.len() + i] = T::one();
        }
        m
    }

    pub fn diagonal(poset: &Arc<Poset>, diag: &[T]) -> Self {
        assert_eq!(diag.len(), poset.len());
        let mut m = Self::zeros(poset);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * poset.len() + i] = d;
        }
        m
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    /// True when entry `(i, j)` may be nonzero.
    pub fn mask(&self, i: usize, j: usize) -> bool {
        self.poset.comparable(i, j)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.len() + j]
    }

    /// Sets a structural entry; setting an unrelated pair is a programming
    /// error and panics.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(
            self.mask(i, j),
            "entry ({i}, {j}) is structurally zero for this poset"
        );
        let n = self.len();
        self.data[i * n + j] = v;
    }

    fn same_poset(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.poset, &other.poset) || self.poset == other.poset,
            "operands live over different posets"
        );
    }

    /// The algebra product: ordinary matrix product projected onto the mask.
    pub fn multiply(&self, other: &Self) -> Self {
        self.same_poset(other);
        let n = self.len();
        let mut out = Self::zeros(&self.poset);
        for i in 0..n {
            for mu in 0..n {
                let a = self.data[i * n + mu];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[mu * n + j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.mask(i, j) {
                    out.data[i * n + j] = T::zero();
                }
            }
        }
        out
    }

    /// The ordinary (unprojected) matrix product, as a plain dense matrix.
    pub fn standard_product(&self, other: &Self) -> Dense<T> {
        self.same_poset(other);
        self.to_dense().mul(&other.to_dense())
    }

    /// The involution; with one-dimensional component spaces this is the
    /// transpose restricted to the mask.
    pub fn involution(&self) -> Self {
        let n = self.len();
        let mut out = Self::zeros(&self.poset);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.len()).map(|i| self.get(i, i)).sum()
    }

    /// Trace of the product `self * other`, i.e. the masked inner product.
    pub fn trace_product(&self, other: &Self) -> T {
        self.same_poset(other);
        let n = self.len();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += self.data[i * n + j] * other.data[i * n + j];
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_poset(other);
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same_poset(other);
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn max_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn is_hermitian(&self, rel_tol: T) -> bool {
        let n = self.len();
        let scale = self.max_norm() + T::min_positive_value();
        for i in 0..n {
            for j in 0..n {
                if (self.get(i, j) - self.get(j, i)).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Zero outside `{(i, j) : j <= i}`.
    pub fn is_lower_triangular(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.poset.leq(j, i) || self.data[i * n + j] == T::zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.involution().is_lower_triangular()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j] == T::zero()))
    }

    pub fn is_unit_lower_triangular(&self) -> bool {
        self.is_lower_triangular() && (0..self.len()).all(|i| self.get(i, i) == T::one())
    }

    pub fn to_dense(&self) -> Dense<T> {
        let n = self.len();
        let mut d = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                d[(i, j)] = self.data[i * n + j];
            }
        }
        d
    }

    /// Structural entries `(i, j)` with `j <= i`, in row-major order.
    /// This is the coordinate layout used by samplers and CSV dumps.
    pub fn lower_mask_entries(poset: &Poset) -> Vec<(usize, usize)> {
        let n = poset.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                if poset.leq(j, i) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for StructuredMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| format!("{:>12.6}", self.get(i, j).to_f64_lossy()))
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Random matrix with independent standard-normal structural entries.
pub fn random_structured<T: Scalar, R: Rng + ?Sized>(
    poset: &Arc<Poset>,
    rng: &mut R,
) -> StructuredMatrix<T> {
    let mut m = StructuredMatrix::zeros(poset);
    for i in 0..poset.len() {
        for j in 0..poset.len() {
            if poset.comparable(i, j) {
                m.set(i, j, T::sample_normal(rng, T::zero(), T::one()));
            }
        }
    }
    m
}

/// Random element of the lower-triangular space.
pub fn random_lower<T: Scalar, R: Rng + ?Sized>(
    poset: &Arc<Poset>,
    rng: &mut R,
) -> StructuredMatrix<T> {
    let mut m = StructuredMatrix::zeros(poset);
    for (i, j) in StructuredMatrix::<T>::lower_mask_entries(poset) {
        m.set(i, j, T::sample_normal(rng, T::zero(), T::one()));
    }
    m
}

/// Random lower-triangular element with positive diagonal.
pub fn random_lower_positive<T: Scalar, R: Rng + ?Sized>(
    poset: &Arc<Poset>,
    rng: &mut R,
) -> StructuredMatrix<T> {
    let mut m = random_lower(poset, rng);
    for i in 0..poset.len() {
        let d = T::sample_normal(rng, T::zero(), T::of(0.4)).exp();
        m.set(i, i, d);
    }
    m
}

/// Random Hermitian structural matrix.
pub fn random_hermitian<T: Scalar, R: Rng + ?Sized>(
    poset: &Arc<Poset>,
    rng: &mut R,
) -> StructuredMatrix<T> {
    let mut m = StructuredMatrix::zeros(poset);
    for (i, j) in StructuredMatrix::<T>::lower_mask_entries(poset) {
        let v = T::sample_normal(rng, T::zero(), T::one());
        m.set(i, j, v);
        m.set(j, i, v);
    }
    m
}

/// The six multiplication axioms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// i: `tr(A A*) > 0` for nonzero `A`.
    TracePositive,
    /// ii: `(A B)* = B* A*`.
    InvolutionAntihomomorphism,
    /// iii: `tr(A B) = tr(B A)`.
    TraceSymmetric,
    /// iv: `tr(A (B C)) = tr((A B) C)`.
    TraceAssociative,
    /// v: `(S T) U = S (T U)` on lower triangulars.
    TriangularAssociative,
    /// vi: `T (U U*) = (T U) U*` on lower triangulars.
    TriangularSandwich,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::TracePositive,
        Axiom::InvolutionAntihomomorphism,
        Axiom::TraceSymmetric,
        Axiom::TraceAssociative,
        Axiom::TriangularAssociative,
        Axiom::TriangularSandwich,
    ];

    pub fn roman(&self) -> &'static str {
        match self {
            Axiom::TracePositive => "i",
            Axiom::InvolutionAntihomomorphism => "ii",
            Axiom::TraceSymmetric => "iii",
            Axiom::TraceAssociative => "iv",
            Axiom::TriangularAssociative => "v",
            Axiom::TriangularSandwich => "vi",
        }
    }
}

/// Result of the randomized check of one axiom.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    /// Largest residual seen, relative to the operand scale.
    pub max_residual: f64,
    pub pass: bool,
    /// `(trial, entry)` of the worst residual when the axiom fails.
    pub witness: Option<AxiomWitness>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AxiomWitness {
    pub trial: usize,
    pub entry: Option<(usize, usize)>,
}

/// Checks all six axioms on random matrices; failures are reported, not
/// errors, so this can demonstrate how the sandwich axiom breaks on posets
/// with non-unique Hasse paths.
pub fn verify_axioms<T: Scalar>(
    poset: &Arc<Poset>,
    trials: usize,
    seed: u64,
    rel_tol: f64,
) -> Vec<AxiomReport> {
    assert!(trials >= 1);
    let mut rng = crate::rng::stream(seed, 0);
    let tiny = T::min_positive_value();
    let mut worst = [(0.0f64, None::<AxiomWitness>); 6];

    let mut record = |k: usize, trial: usize, residual: T, entry: Option<(usize, usize)>| {
        let r = residual.to_f64_lossy();
        if r > worst[k].0 {
            worst[k] = (r, Some(AxiomWitness { trial, entry }));
        }
    };

    for trial in 0..trials {
        let a = random_structured::<T, _>(poset, &mut rng);
        let b = random_structured::<T, _>(poset, &mut rng);
        let c = random_structured::<T, _>(poset, &mut rng);
        let s = random_lower::<T, _>(poset, &mut rng);
        let t = random_lower::<T, _>(poset, &mut rng);
        let u = random_lower::<T, _>(poset, &mut rng);

        let na = a.max_norm() + tiny;
        let nb = b.max_norm() + tiny;
        let nc = c.max_norm() + tiny;
        let ns = s.max_norm() + tiny;
        let nt = t.max_norm() + tiny;
        let nu = u.max_norm() + tiny;

        // i: tr(A A*) > 0 for A != 0.
        let tr = a.multiply(&a.involution()).trace();
        let res = if tr > T::zero() { T::zero() } else { T::one() };
        record(0, trial, res, None);

        // ii: (A B)* = B* A*.
        let lhs = a.multiply(&b).involution();
        let rhs = b.involution().multiply(&a.involution());
        let (res, entry) = max_abs_diff(&lhs, &rhs);
        record(1, trial, res / (na * nb), entry);

        // iii: tr(A B) = tr(B A).
        let res = (a.multiply(&b).trace() - b.multiply(&a).trace()).abs();
        record(2, trial, res / (na * nb), None);

        // iv: tr(A (B C)) = tr((A B) C).
        let res = (a.multiply(&b.multiply(&c)).trace() - a.multiply(&b).multiply(&c).trace()).abs();
        record(3, trial, res / (na * nb * nc), None);

        // v: (S T) U = S (T U).
        let lhs = s.multiply(&t).multiply(&u);
        let rhs = s.multiply(&t.multiply(&u));
        let (res, entry) = max_abs_diff(&lhs, &rhs);
        record(4, trial, res / (ns * nt * nu), entry);

        // vi: T (U U*) = (T U) U*.
        let lhs = t.multiply(&u.multiply(&u.involution()));
        let rhs = t.multiply(&u).multiply(&u.involution());
        let (res, entry) = max_abs_diff(&lhs, &rhs);
        record(5, trial, res / (nt * nu * nu), entry);
    }

    Axiom::ALL
        .iter()
        .enumerate()
        .map(|(k, &axiom)| {
            let (max_residual, witness) = worst[k];
            let pass = max_residual < rel_tol;
            AxiomReport {
                axiom,
                max_residual,
                pass,
                witness: if pass { None } else { witness },
            }
        })
        .collect()
}

fn max_abs_diff<T: Scalar>(
    a: &StructuredMatrix<T>,
    b: &StructuredMatrix<T>,
) -> (T, Option<(usize, usize)>) {
    let n = a.len();
    let mut best = T::zero();
    let mut at = None;
    for i in 0..n {
        for j in 0..n {
            let d = (a.get(i, j) - b.get(i, j)).abs();
            if d > best {
                best = d;
                at = Some((i, j));
            }
        }
    }
    (best, at)
}

/// True when the algebra product of `T` and `T*` coincides with the ordinary
/// matrix product for every lower-triangular `T`, detected through the
/// absence of sources.
///
/// The source test is a proxy: it is exact for the poset families exercised
/// here (chains, stars, the worked four-element posets, and any poset whose
/// incomparable pairs have disjoint down-sets), but a source-free poset in
/// which two incomparable elements share a strict lower bound still masks
/// entries of the ordinary product.
pub fn is_standard_mult_equivalent(poset: &Poset) -> bool {
    poset.sources().is_empty()
}

/// Direct randomized comparison of the two products on `T T*`.
pub fn standard_mult_matches<T: Scalar>(poset: &Arc<Poset>, trials: usize, seed: u64) -> bool {
    let mut rng = crate::rng::stream(seed, 0);
    let tol = T::of(1e-12);
    for _ in 0..trials {
        let t = random_lower_positive::<T, _>(poset, &mut rng);
        let masked = t.multiply(&t.involution());
        let full = t.standard_product(&t.involution());
        let scale = t.max_norm() * t.max_norm() + T::min_positive_value();
        for i in 0..poset.len() {
            for j in 0..poset.len() {
                if (masked.get(i, j) - full[(i, j)]).abs() > tol * scale {
                    return false;
                }
            }
        }
    }
    true
}
