//! The homogeneous cone over a poset and its dual.
//!
//! A cone point is a Hermitian structured matrix `X` with a unique
//! factorization `X = T1 D T1*` into a unit lower triangular `T1` and a
//! positive diagonal `D`, computed by elimination along the linear extension.
//! The diagonal of `D` carries the generalized powers; the triangular group
//! acts through [`pi_action`]; division by a cone point, the chi-deformed
//! inverse maps between the cone and its dual, and the separator-driven
//! component decomposition all live here.
//!
//! Everything requires the poset to have unique Hasse paths between
//! comparable pairs; constructors check this eagerly because the sandwich
//! axiom, and with it the factorization identities, silently degrade without
//! it.

use crate::algebra::StructuredMatrix;
use crate::poset::Poset;
use crate::scalar::Scalar;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("matrix is not in the cone: pivot {index} is not positive")]
    NotInCone { index: usize },
    #[error("matrix is not in the dual cone: pivot {index} is not positive")]
    NotInDualCone { index: usize },
    #[error("matrix is not Hermitian at entry ({i}, {j})")]
    NotHermitian { i: usize, j: usize },
    #[error(
        "poset has two Hasse paths between `{lower}` and `{upper}`; \
         cone operations need unique paths"
    )]
    NonUniquePaths { lower: String, upper: String },
}

pub(crate) fn require_unique_paths(poset: &Poset) -> Result<(), ConeError> {
    match poset.path_witness() {
        None => Ok(()),
        Some(w) => Err(ConeError::NonUniquePaths {
            lower: poset.label(w.lower).to_string(),
            upper: poset.label(w.upper).to_string(),
        }),
    }
}

/// Relative pivot tolerance: a pivot at or below `1e-12 * max diagonal`
/// means the matrix is outside the (dual) cone.
fn pivot_floor<T: Scalar>(x: &StructuredMatrix<T>) -> T {
    let max_diag = (0..x.len()).map(|i| x.get(i, i)).fold(T::zero(), T::max);
    T::of(1e-12) * (max_diag + T::min_positive_value())
}

const HERMITIAN_REL_TOL: f64 = 1e-9;

/// Unit lower triangular factor plus positive diagonal of a cone point.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularFactor<T> {
    unit_lower: StructuredMatrix<T>,
    diag: Vec<T>,
}

impl<T: Scalar> TriangularFactor<T> {
    /// Splits `T = T1 sqrt(D)` into its unit-triangular and diagonal parts.
    pub fn from_t_plus(t_plus: &StructuredMatrix<T>) -> Self {
        assert!(
            t_plus.is_lower_triangular(),
            "factor must be lower triangular"
        );
        let n = t_plus.len();
        let mut unit_lower = t_plus.clone();
        let mut diag = Vec::with_capacity(n);
        for j in 0..n {
            let d = t_plus.get(j, j);
            assert!(d > T::zero(), "factor diagonal must be positive");
            diag.push(d * d);
            for i in j..n {
                if t_plus.poset().leq(j, i) {
                    unit_lower.set(i, j, t_plus.get(i, j) / d);
                }
            }
        }
        TriangularFactor { unit_lower, diag }
    }

    pub fn unit_lower(&self) -> &StructuredMatrix<T> {
        &self.unit_lower
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    /// The factor `T = T1 sqrt(D)` with positive diagonal.
    pub fn t_plus(&self) -> StructuredMatrix<T> {
        let n = self.unit_lower.len();
        let mut t = self.unit_lower.clone();
        for j in 0..n {
            let s = self.diag[j].sqrt();
            for i in j..n {
                if t.poset().leq(j, i) {
                    t.set(i, j, self.unit_lower.get(i, j) * s);
                }
            }
        }
        t
    }

    /// `T1 D T1*` as an algebra product.
    pub fn compose(&self) -> StructuredMatrix<T> {
        let t = self.t_plus();
        t.multiply(&t.involution())
    }
}

/// A point of the homogeneous cone with its cached factorization.
#[derive(Clone, Debug)]
pub struct ConePoint<T> {
    matrix: StructuredMatrix<T>,
    factor: TriangularFactor<T>,
}

impl<T: Scalar> ConePoint<T> {
    /// Factors a Hermitian structured matrix, or reports why it is outside
    /// the cone.
    pub fn decompose(x: &StructuredMatrix<T>) -> Result<Self, ConeError> {
        let poset = x.poset();
        require_unique_paths(poset)?;
        let n = x.len();
        let scale = x.max_norm() + T::min_positive_value();
        for i in 0..n {
            for j in 0..n {
                if (x.get(i, j) - x.get(j, i)).abs() > T::of(HERMITIAN_REL_TOL) * scale {
                    return Err(ConeError::NotHermitian { i, j });
                }
            }
        }
        let tol = pivot_floor(x);
        let mut unit_lower = StructuredMatrix::unit(poset);
        let mut diag = vec![T::zero(); n];
        for k in 0..n {
            let mut d = x.get(k, k);
            for mu in 0..k {
                if poset.lt(mu, k) {
                    let t = unit_lower.get(k, mu);
                    d -= t * t * diag[mu];
                }
            }
            if !(d > tol) {
                return Err(ConeError::NotInCone { index: k });
            }
            diag[k] = d;
            for j in k + 1..n {
                if poset.lt(k, j) {
                    let mut v = x.get(j, k);
                    for mu in 0..k {
                        if poset.lt(mu, k) {
                            v -= unit_lower.get(j, mu) * diag[mu] * unit_lower.get(k, mu);
                        }
                    }
                    unit_lower.set(j, k, v / d);
                }
            }
        }
        Ok(ConePoint {
            matrix: x.clone(),
            factor: TriangularFactor { unit_lower, diag },
        })
    }

    /// Cone point `T T*` for a lower-triangular `T` with positive diagonal.
    pub fn from_factor(t_plus: StructuredMatrix<T>) -> Self {
        require_unique_paths(t_plus.poset()).expect("cone machinery needs unique Hasse paths");
        let factor = TriangularFactor::from_t_plus(&t_plus);
        let matrix = t_plus.multiply(&t_plus.involution());
        ConePoint { matrix, factor }
    }

    pub fn unit(poset: &Arc<Poset>) -> Self {
        Self::from_factor(StructuredMatrix::unit(poset))
    }

    pub fn poset(&self) -> &Arc<Poset> {
        self.matrix.poset()
    }

    pub fn matrix(&self) -> &StructuredMatrix<T> {
        &self.matrix
    }

    pub fn factor(&self) -> &TriangularFactor<T> {
        &self.factor
    }

    /// The generalized power `x_{[i].}`, the `i`-th diagonal entry of `D`.
    pub fn generalized_power(&self, i: usize) -> T {
        self.factor.diag[i]
    }

    pub fn generalized_powers(&self) -> &[T] {
        self.factor.diag()
    }

    pub fn add(&self, other: &ConePoint<T>) -> Result<ConePoint<T>, ConeError> {
        ConePoint::decompose(&self.matrix.add(other.matrix()))
    }
}

/// Inverse of a lower-triangular structured matrix by forward substitution.
pub fn triangular_inverse<T: Scalar>(t: &StructuredMatrix<T>) -> StructuredMatrix<T> {
    assert!(t.is_lower_triangular());
    let poset = t.poset();
    let n = t.len();
    let mut inv = StructuredMatrix::zeros(poset);
    for j in 0..n {
        let d = t.get(j, j);
        assert!(d != T::zero(), "singular triangular factor");
        inv.set(j, j, T::one() / d);
        for i in j + 1..n {
            if poset.lt(j, i) {
                let mut s = T::zero();
                for mu in j..i {
                    s += t.get(i, mu) * inv.get(mu, j);
                }
                inv.set(i, j, -s / t.get(i, i));
            }
        }
    }
    inv
}

/// The action `pi(T): W W* -> (T W)(W* T*)` of the triangular group.
pub fn pi_action<T: Scalar>(t: &StructuredMatrix<T>, x: &ConePoint<T>) -> ConePoint<T> {
    let w = x.factor().t_plus();
    ConePoint::from_factor(t.multiply(&w))
}

/// The division transformation `g(U) = pi(T^{-1})` for `U = T T*`.
#[derive(Clone, Debug)]
pub struct DivisionMap<T> {
    t_inverse: StructuredMatrix<T>,
}

impl<T: Scalar> DivisionMap<T> {
    pub fn apply(&self, x: &ConePoint<T>) -> ConePoint<T> {
        pi_action(&self.t_inverse, x)
    }

    /// The triangular transform the map multiplies by.
    pub fn transform(&self) -> &StructuredMatrix<T> {
        &self.t_inverse
    }
}

pub fn division_transform<T: Scalar>(u: &ConePoint<T>) -> DivisionMap<T> {
    DivisionMap {
        t_inverse: triangular_inverse(&u.factor().t_plus()),
    }
}

/// Factorization `theta = Z~* D~ Z~` of a dual-cone point, with `Z~` unit
/// lower triangular; obtained by elimination against the linear extension.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFactor<T> {
    unit_lower: StructuredMatrix<T>,
    diag: Vec<T>,
}

impl<T: Scalar> DualFactor<T> {
    /// The factor `V = sqrt(D~) Z~` with `theta = V* V`.
    pub fn v_factor(&self) -> StructuredMatrix<T> {
        let n = self.unit_lower.len();
        let mut v = self.unit_lower.clone();
        for i in 0..n {
            let s = self.diag[i].sqrt();
            for j in 0..=i {
                if v.poset().leq(j, i) {
                    v.set(i, j, self.unit_lower.get(i, j) * s);
                }
            }
        }
        v
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }
}

/// A point of the dual cone with its cached factorization.
#[derive(Clone, Debug)]
pub struct DualPoint<T> {
    matrix: StructuredMatrix<T>,
    factor: DualFactor<T>,
}

impl<T: Scalar> DualPoint<T> {
    /// Factors a Hermitian structured matrix as `Z~* D~ Z~`, or reports why
    /// it is outside the dual cone.
    pub fn decompose(theta: &StructuredMatrix<T>) -> Result<Self, ConeError> {
        let poset = theta.poset();
        require_unique_paths(poset)?;
        let n = theta.len();
        let scale = theta.max_norm() + T::min_positive_value();
        for i in 0..n {
            for j in 0..n {
                if (theta.get(i, j) - theta.get(j, i)).abs() > T::of(HERMITIAN_REL_TOL) * scale {
                    return Err(ConeError::NotHermitian { i, j });
                }
            }
        }
        let tol = pivot_floor(theta);
        let mut unit_lower = StructuredMatrix::unit(poset);
        let mut diag = vec![T::zero(); n];
        for v in (0..n).rev() {
            let mut d = theta.get(v, v);
            for mu in v + 1..n {
                if poset.lt(v, mu) {
                    let z = unit_lower.get(mu, v);
                    d -= z * z * diag[mu];
                }
            }
            if !(d > tol) {
                return Err(ConeError::NotInDualCone { index: v });
            }
            diag[v] = d;
            for i in (0..v).rev() {
                if poset.lt(i, v) {
                    let mut s = theta.get(v, i);
                    for mu in v + 1..n {
                        if poset.lt(v, mu) {
                            s -= unit_lower.get(mu, v) * diag[mu] * unit_lower.get(mu, i);
                        }
                    }
                    unit_lower.set(v, i, s / d);
                }
            }
        }
        Ok(DualPoint {
            matrix: theta.clone(),
            factor: DualFactor { unit_lower, diag },
        })
    }

    /// Dual point `V* V` for a lower-triangular `V` with positive diagonal.
    pub fn from_v_factor(v: StructuredMatrix<T>) -> Self {
        require_unique_paths(v.poset()).expect("cone machinery needs unique Hasse paths");
        assert!(v.is_lower_triangular());
        let n = v.len();
        let mut unit_lower = v.clone();
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let d = v.get(i, i);
            assert!(d > T::zero(), "factor diagonal must be positive");
            diag.push(d * d);
            for j in 0..=i {
                if v.poset().leq(j, i) {
                    unit_lower.set(i, j, v.get(i, j) / d);
                }
            }
        }
        let matrix = v.involution().multiply(&v);
        DualPoint {
            matrix,
            factor: DualFactor { unit_lower, diag },
        }
    }

    pub fn poset(&self) -> &Arc<Poset> {
        self.matrix.poset()
    }

    pub fn matrix(&self) -> &StructuredMatrix<T> {
        &self.matrix
    }

    pub fn factor(&self) -> &DualFactor<T> {
        &self.factor
    }
}

/// The chi-deformed inverse `sigma -> sigma^{-chi} = (Z*)^{-1} diag(lambda) Z^{-1}`
/// for `sigma = Z Z*`.
pub fn chi_inverse<T: Scalar>(sigma: &ConePoint<T>, lambdas: &[T]) -> DualPoint<T> {
    let n = sigma.poset().len();
    assert_eq!(lambdas.len(), n);
    assert!(lambdas.iter().all(|&l| l > T::zero()));
    let z_inv = triangular_inverse(&sigma.factor().t_plus());
    // V = sqrt(diag(lambda)) Z^{-1}, a row scaling; sigma^{-chi} = V* V.
    let mut v = z_inv;
    for i in 0..n {
        let s = lambdas[i].sqrt();
        for j in 0..=i {
            if v.poset().leq(j, i) {
                v.set(i, j, v.get(i, j) * s);
            }
        }
    }
    DualPoint::from_v_factor(v)
}

/// The inverse deformation `theta -> theta^chi = Z^{-1} diag(lambda) (Z*)^{-1}`
/// for `theta = Z* Z`.
pub fn theta_chi<T: Scalar>(theta: &DualPoint<T>, lambdas: &[T]) -> ConePoint<T> {
    let n = theta.poset().len();
    assert_eq!(lambdas.len(), n);
    assert!(lambdas.iter().all(|&l| l > T::zero()));
    let z_inv = triangular_inverse(&theta.factor().v_factor());
    // W = Z^{-1} sqrt(diag(lambda)), a column scaling; theta^chi = W W*.
    let mut w = z_inv;
    for j in 0..n {
        let s = lambdas[j].sqrt();
        for i in j..n {
            if w.poset().leq(j, i) {
                w.set(i, j, w.get(i, j) * s);
            }
        }
    }
    ConePoint::from_factor(w)
}

/// Zeroes every factor entry whose row or column is not above `i`.
pub fn factor_up_set<T: Scalar>(t_plus: &StructuredMatrix<T>, i: usize) -> StructuredMatrix<T> {
    let poset = t_plus.poset();
    let n = t_plus.len();
    let mut out = StructuredMatrix::zeros(poset);
    for a in 0..n {
        for b in 0..=a {
            if poset.leq(b, a) && poset.leq(i, a) && poset.leq(i, b) {
                out.set(a, b, t_plus.get(a, b));
            }
        }
    }
    out
}

/// `Z_{i<=} = T_{i<=} T_{i<=}*`, the up-set part of a cone point, in full
/// coordinates.
pub fn z_up_set<T: Scalar>(z: &ConePoint<T>, i: usize) -> StructuredMatrix<T> {
    let ti = factor_up_set(&z.factor().t_plus(), i);
    ti.multiply(&ti.involution())
}

/// One term of the decomposition `Z = sum Z_i` over minimal elements and
/// minimal separators.
#[derive(Clone, Debug)]
pub struct Component<T> {
    pub element: usize,
    pub matrix: StructuredMatrix<T>,
}

/// Splits `Z` into components supported on up-sets: minimal elements
/// contribute their up-set part minus the up-set parts of their minimal
/// separators; minimal separators contribute their own up-set part.
pub fn component_decomposition<T: Scalar>(z: &ConePoint<T>) -> Vec<Component<T>> {
    let poset = z.poset();
    let seps = poset.separators();
    let t = z.factor().t_plus();
    let up = |i: usize| {
        let ti = factor_up_set(&t, i);
        ti.multiply(&ti.involution())
    };
    let mut out = Vec::new();
    for i in poset.minimal_elements() {
        let mut m = up(i);
        for &s in &seps.per_element[i] {
            m = m.sub(&up(s));
        }
        out.push(Component {
            element: i,
            matrix: m,
        });
    }
    for &s in &seps.minimal {
        out.push(Component {
            element: s,
            matrix: up(s),
        });
    }
    out.sort_by_key(|c| c.element);
    out
}

/// A cone point moved onto the sub-poset of an up-set.
#[derive(Clone, Debug)]
pub struct Restriction<T> {
    pub poset: Arc<Poset>,
    /// `map[sub_index] = full_index`.
    pub map: Vec<usize>,
    pub point: ConePoint<T>,
}

/// Restricts a lower-triangular transform to the sub-poset on `up_set(i)`.
pub fn restrict_lower<T: Scalar>(
    t: &StructuredMatrix<T>,
    i: usize,
) -> (StructuredMatrix<T>, Arc<Poset>, Vec<usize>) {
    let poset = t.poset();
    let (sub, map) = poset.induced(&poset.up_set(i));
    let sub = Arc::new(sub);
    let mut out = StructuredMatrix::zeros(&sub);
    for a in 0..sub.len() {
        for b in 0..sub.len() {
            if sub.leq(b, a) {
                out.set(a, b, t.get(map[a], map[b]));
            }
        }
    }
    (out, sub, map)
}

/// `Z_{i<=}` as a point of the sub-cone over the up-set of `i`.
pub fn restrict_point<T: Scalar>(z: &ConePoint<T>, i: usize) -> Restriction<T> {
    let (t_sub, poset, map) = restrict_lower(&z.factor().t_plus(), i);
    Restriction {
        point: ConePoint::from_factor(t_sub),
        poset,
        map,
    }
}
