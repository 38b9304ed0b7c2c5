//! The fibrewise product `∘`, super-commutators, `ad`, the involutions `C`
//! and `P`, and Lie derivatives along chart vector fields.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::forms::VectorField;
use crate::scalar::{GaussianRational, NuSeries, Scalar};
use crate::weyl::{anti_wedge, sym_merge, WeylElement, WeylError, WeylKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FibreError {
    #[error("omega is not antisymmetric at ({0}, {1})")]
    OmegaNotAntisymmetric(usize, usize),
    #[error("lambda is not antisymmetric at ({0}, {1})")]
    LambdaNotAntisymmetric(usize, usize),
    #[error("omega is degenerate")]
    Degenerate,
    #[error("omega has non-constant entries; supply lambda explicitly")]
    NeedLambda,
    #[error("omega_kj lambda^ij != delta^i_k at (i={0}, k={1})")]
    NotInverse(usize, usize),
    #[error("matrix must be {0}x{0}")]
    BadShape(usize),
    #[error("super-commutator not divisible by nu: {0}")]
    NotDivisible(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// One contraction pattern of a pair of symmetric multisets.
#[derive(Clone, Debug)]
struct Contraction {
    order: u32,
    rest_a: Vec<u8>,
    rest_b: Vec<u8>,
    /// `(1/2)^k/k!` times the summed `Λ` products and multiplicities.
    factor: Scalar,
}

type Table = Arc<Vec<Contraction>>;

/// The symplectic form `ω_ij` together with `Λ^ij`, `ω_kj Λ^ij = δ^i_k`.
#[derive(Clone, Debug)]
pub struct PoissonData {
    dim: usize,
    omega: Vec<Vec<Scalar>>,
    lambda: Vec<Vec<Scalar>>,
    cache: Arc<RwLock<HashMap<(Vec<u8>, Vec<u8>), Table>>>,
}

impl PartialEq for PoissonData {
    fn eq(&self, other: &Self) -> bool {
        self.omega == other.omega && self.lambda == other.lambda
    }
}

fn check_square(m: &[Vec<Scalar>], dim: usize) -> Result<(), FibreError> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(FibreError::BadShape(dim));
    }
    Ok(())
}

/// Inverse of a constant square matrix by Gauss-Jordan elimination.
fn invert(m: &[Vec<GaussianRational>]) -> Option<Vec<Vec<GaussianRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<GaussianRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].inv()?;
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let v = &a[col][c] * &f;
                    a[r][c] -= &v;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

impl PoissonData {
    /// From `ω` alone; `ω` must be constant so that `Λ = −ω⁻¹` is polynomial.
    pub fn from_omega(omega: Vec<Vec<Scalar>>) -> Result<Self, FibreError> {
        let dim = omega.len();
        check_square(&omega, dim)?;
        if omega.iter().flatten().any(|e| !e.is_constant()) {
            return Err(FibreError::NeedLambda);
        }
        let consts: Vec<Vec<GaussianRational>> =
            omega.iter().map(|row| row.iter().map(Scalar::constant_term).collect()).collect();
        let inv = invert(&consts).ok_or(FibreError::Degenerate)?;
        let lambda = inv
            .iter()
            .map(|row| row.iter().map(|c| Scalar::constant(-c)).collect())
            .collect();
        Self::new(omega, lambda)
    }

    /// From both matrices, checking antisymmetry and `ω_kj Λ^ij = δ^i_k`.
    pub fn new(omega: Vec<Vec<Scalar>>, lambda: Vec<Vec<Scalar>>) -> Result<Self, FibreError> {
        let dim = omega.len();
        check_square(&omega, dim)?;
        check_square(&lambda, dim)?;
        for i in 0..dim {
            for j in 0..dim {
                if omega[i][j] != -&omega[j][i] {
                    return Err(FibreError::OmegaNotAntisymmetric(i + 1, j + 1));
                }
                if lambda[i][j] != -&lambda[j][i] {
                    return Err(FibreError::LambdaNotAntisymmetric(i + 1, j + 1));
                }
            }
        }
        for i in 0..dim {
            for k in 0..dim {
                let mut sum = Scalar::zero();
                for j in 0..dim {
                    sum.add_assign_ref(&(&omega[k][j] * &lambda[i][j]));
                }
                let expected = if i == k { Scalar::one() } else { Scalar::zero() };
                if sum != expected {
                    return Err(FibreError::NotInverse(i + 1, k + 1));
                }
            }
        }
        Ok(PoissonData { dim, omega, lambda, cache: Arc::new(RwLock::new(HashMap::new())) })
    }

    /// Standard Darboux form on `R^{dim}`: `ω_{2a-1,2a} = 1`.
    pub fn darboux(dim: usize) -> Self {
        let mut omega = vec![vec![Scalar::zero(); dim]; dim];
        for a in 0..dim / 2 {
            omega[2 * a][2 * a + 1] = Scalar::one();
            omega[2 * a + 1][2 * a] = Scalar::from_int(-1);
        }
        Self::from_omega(omega).expect("Darboux form is symplectic")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self, i: usize, j: usize) -> &Scalar {
        &self.omega[i][j]
    }

    pub fn lambda(&self, i: usize, j: usize) -> &Scalar {
        &self.lambda[i][j]
    }

    pub fn omega_matrix(&self) -> &[Vec<Scalar>] {
        &self.omega
    }

    pub fn lambda_matrix(&self) -> &[Vec<Scalar>] {
        &self.lambda
    }

    /// Hamiltonian vector field `X_f^i = Λ^ij ∂_j f`.
    pub fn hamiltonian(&self, f: &Scalar) -> VectorField {
        let grads: Vec<Scalar> = (0..self.dim).map(|j| f.partial(j)).collect();
        VectorField(
            (0..self.dim)
                .map(|i| {
                    let mut s = Scalar::zero();
                    for (j, g) in grads.iter().enumerate() {
                        s.add_assign_ref(&(&self.lambda[i][j] * g));
                    }
                    s
                })
                .collect(),
        )
    }

    /// Poisson bracket `{f, g} = Λ^ij ∂_i f ∂_j g`.
    pub fn bracket(&self, f: &Scalar, g: &Scalar) -> Scalar {
        self.hamiltonian(g).apply(f)
    }

    fn table(&self, sa: &[u8], sb: &[u8]) -> Table {
        let key = (sa.to_vec(), sb.to_vec());
        if let Some(t) = self.cache.read().expect("cache lock").get(&key) {
            return t.clone();
        }
        let t = Arc::new(self.build_table(sa, sb));
        self.cache.write().expect("cache lock").insert(key, t.clone());
        t
    }

    fn build_table(&self, sa: &[u8], sb: &[u8]) -> Vec<Contraction> {
        let mut out = vec![Contraction { order: 0, rest_a: sa.to_vec(), rest_b: sb.to_vec(), factor: Scalar::one() }];
        let mut level: HashMap<(Vec<u8>, Vec<u8>), Scalar> = HashMap::new();
        level.insert((sa.to_vec(), sb.to_vec()), Scalar::one());
        let mut norm = GaussianRational::one();
        for k in 1..=sa.len().min(sb.len()) as u32 {
            let mut next: HashMap<(Vec<u8>, Vec<u8>), Scalar> = HashMap::new();
            for ((ra, rb), c) in &level {
                for (pa, &i) in ra.iter().enumerate() {
                    if pa > 0 && ra[pa - 1] == i {
                        continue;
                    }
                    let mi = ra.iter().filter(|&&x| x == i).count() as i64;
                    let mut na = ra.clone();
                    na.remove(pa);
                    for (pb, &j) in rb.iter().enumerate() {
                        if pb > 0 && rb[pb - 1] == j {
                            continue;
                        }
                        let lam = &self.lambda[i as usize][j as usize];
                        if lam.is_zero() {
                            continue;
                        }
                        let mj = rb.iter().filter(|&&x| x == j).count() as i64;
                        let mut nb = rb.clone();
                        nb.remove(pb);
                        let val = (c * lam).scale(&GaussianRational::from_int(mi * mj));
                        let e = next.entry((na.clone(), nb)).or_default();
                        e.add_assign_ref(&val);
                    }
                }
            }
            next.retain(|_, v| !v.is_zero());
            if next.is_empty() {
                break;
            }
            norm = &norm * &GaussianRational::from_frac(1, 2 * k as i64);
            let mut entries: Vec<_> = next.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            for ((ra, rb), c) in entries {
                out.push(Contraction { order: k, rest_a: ra.clone(), rest_b: rb.clone(), factor: c.scale(&norm) });
            }
            level = next;
        }
        out
    }
}

/// `a ∘ b` truncated at the common cap.
pub fn circ_product(a: &WeylElement, b: &WeylElement, pd: &PoissonData) -> Result<WeylElement, FibreError> {
    if a.cap() != b.cap() {
        return Err(WeylError::CapMismatch(a.cap(), b.cap()).into());
    }
    if a.dim() != b.dim() {
        return Err(WeylError::DimMismatch(a.dim(), b.dim()).into());
    }
    Ok(circ(a, b, pd))
}

/// Groups terms by `(ν, sym)` so that each contraction table is used once per pair of groups.
fn groups(a: &WeylElement) -> Vec<(u32, &Vec<u8>, Vec<(&Vec<u8>, &Scalar)>)> {
    let mut out: Vec<(u32, &Vec<u8>, Vec<(&Vec<u8>, &Scalar)>)> = Vec::new();
    for (k, v) in a.terms() {
        match out.last_mut() {
            Some((nu, sym, list)) if *nu == k.nu && *sym == &k.sym => list.push((&k.anti, v)),
            _ => out.push((k.nu, &k.sym, vec![(&k.anti, v)])),
        }
    }
    out
}

/// `a ∘ b`; panics on cap or dimension mismatch.
pub fn circ(a: &WeylElement, b: &WeylElement, pd: &PoissonData) -> WeylElement {
    assert_eq!(a.cap(), b.cap(), "cap mismatch");
    let cap = a.cap();
    let mut out = WeylElement::zero(a.dim(), cap);
    let gb = groups(b);
    for (nu_a, sa, la) in groups(a) {
        let deg_a = sa.len() as u32 + 2 * nu_a;
        for (nu_b, sb, lb) in &gb {
            if deg_a + sb.len() as u32 + 2 * nu_b > cap {
                continue;
            }
            let table = pd.table(sa, sb);
            for (anti_a, ca) in &la {
                for (anti_b, cb) in lb {
                    let Some((anti, negative)) = anti_wedge(anti_a, anti_b) else {
                        continue;
                    };
                    let cab = if negative { -&(*ca * *cb) } else { *ca * *cb };
                    for t in table.iter() {
                        let key = WeylKey::new(nu_a + nu_b + t.order, sym_merge(&t.rest_a, &t.rest_b), anti.clone());
                        out.add_term(key, &(&cab * &t.factor));
                    }
                }
            }
        }
    }
    out
}

/// `σ(a ∘ b)` without forming the full product.
pub fn circ_sigma(a: &WeylElement, b: &WeylElement, pd: &PoissonData) -> NuSeries {
    let cap = a.cap();
    let mut out = NuSeries::zero();
    let only_sym = |e: &WeylElement| e.filter(|k| k.anti.is_empty());
    let (a, b) = (only_sym(a), only_sym(b));
    let gb = groups(&b);
    for (nu_a, sa, la) in groups(&a) {
        for (nu_b, sb, lb) in &gb {
            if sa.len() != sb.len() || 2 * (sa.len() as u32 + nu_a + nu_b) > cap {
                continue;
            }
            let table = pd.table(sa, sb);
            let Some(full) = table.iter().find(|t| t.rest_a.is_empty() && t.rest_b.is_empty()) else {
                continue;
            };
            let (_, ca) = la[0];
            let (_, cb) = lb[0];
            out.add_at((nu_a + nu_b + full.order) as usize, &(&(ca * cb) * &full.factor));
        }
    }
    out
}

fn parity_split(a: &WeylElement) -> (WeylElement, WeylElement) {
    (a.filter(|k| k.anti.len() % 2 == 0), a.filter(|k| k.anti.len() % 2 == 1))
}

/// Graded commutator `[a, b] = a∘b − (−1)^{kl} b∘a`.
pub fn super_commutator(a: &WeylElement, b: &WeylElement, pd: &PoissonData) -> WeylElement {
    let (ae, ao) = parity_split(a);
    let (be, bo) = parity_split(b);
    let mut out = circ(a, b, pd);
    out.sub_assign_ref(&circ(&be, a, pd));
    out.sub_assign_ref(&circ(&bo, &ae, pd));
    out.add_assign_ref(&circ(&bo, &ao, pd));
    out
}

/// `(1/ν)[a, b]`, computed two degrees above the cap and checked for divisibility.
pub fn ad_over_nu(a: &WeylElement, b: &WeylElement, pd: &PoissonData) -> Result<WeylElement, FibreError> {
    let cap = a.cap();
    let wide = super_commutator(&a.with_cap(cap + 2), &b.with_cap(cap + 2), pd);
    let low = wide.filter(|k| k.nu == 0);
    if !low.is_zero() {
        return Err(FibreError::NotDivisible(low.to_string()));
    }
    Ok(wide.shift_nu_down().expect("checked").with_cap(cap))
}

/// `P`: `ν ↦ −ν`.
pub fn parity_apply(a: &WeylElement) -> WeylElement {
    a.parity()
}

/// `C`: complex conjugation with `Cν = −ν`.
pub fn conjugate_apply(a: &WeylElement) -> WeylElement {
    a.conjugate()
}

/// `ν∂_ν`
pub fn nu_euler(a: &WeylElement) -> WeylElement {
    a.nu_euler()
}

/// The grading operator `Deg`.
pub fn deg_operator(a: &WeylElement) -> WeylElement {
    a.map_coeffs(|k, v| v.scale(&GaussianRational::from_int(k.total_deg() as i64)))
}

/// `L_X` on coefficients and on every covector slot, `L_X dx^j = ∂_k X^j dx^k`.
pub fn lie_derivative_field(x: &VectorField, a: &WeylElement) -> WeylElement {
    let jac = x.jacobian();
    a.derivation(
        |f| x.apply(f),
        |j| {
            jac[j as usize]
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k as u8, c.clone()))
                .collect()
        },
    )
}
