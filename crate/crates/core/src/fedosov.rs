//! Chart data, the connection lift `∇`, curvature `R`, the element `r`, the
//! derivation `D` with its homotopy, Taylor series `τ` and the star product.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use thiserror::Error;

use crate::fibrewise::{ad_over_nu, circ_sigma, FibreError, PoissonData};
use crate::forms::{Form, FormSeries};
use crate::scalar::{GaussianRational, NuSeries, Scalar};
use crate::weyl::{WeylElement, WeylKey};

/// Raw chart input: `ω`, optional `Λ`, `Γ^k_ij` as `gamma[k][i][j]`, the
/// series `Ω = Σ_{i≥1} ν^i Ω_i` and the normalisation `s` (stored with cap
/// `N + 1`).
#[derive(Clone, Debug)]
pub struct ChartData {
    pub dim: usize,
    pub cap: u32,
    pub omega: Vec<Vec<Scalar>>,
    pub lambda: Option<Vec<Vec<Scalar>>>,
    pub gamma: Vec<Vec<Vec<Scalar>>>,
    pub big_omega: FormSeries,
    pub s: WeylElement,
}

impl ChartData {
    /// `ω_{12} = 1`-type Darboux chart with `Γ = 0`, `Ω = 0`, `s = 0`.
    pub fn flat(dim: usize, cap: u32) -> Self {
        let pd = PoissonData::darboux(dim);
        ChartData {
            dim,
            cap,
            omega: pd.omega_matrix().to_vec(),
            lambda: None,
            gamma: vec![vec![vec![Scalar::zero(); dim]; dim]; dim],
            big_omega: FormSeries::zero(2, dim),
            s: WeylElement::zero(dim, cap + 1),
        }
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Scalar {
        &self.gamma[k][i][j]
    }

    /// Deterministic text used for cache hashing.
    pub fn canonical_string(&self) -> String {
        let mut out = format!("dim={}\ncap={}\n", self.dim, self.cap);
        for (i, row) in self.omega.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out += &format!("omega[{}][{}]={v}\n", i + 1, j + 1);
            }
        }
        if let Some(l) = &self.lambda {
            for (i, row) in l.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out += &format!("lambda[{}][{}]={v}\n", i + 1, j + 1);
                }
            }
        }
        for (k, m) in self.gamma.iter().enumerate() {
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        out += &format!("gamma[{}][{}][{}]={v}\n", k + 1, i + 1, j + 1);
                    }
                }
            }
        }
        out += &format!("Omega={}\ns={}\n", self.big_omega, self.s);
        out
    }
}

/// One violated chart identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationFailure {
    pub identity: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, identity: &str, detail: String) {
        self.failures.push(ValidationFailure { identity: identity.to_string(), detail });
    }

    pub fn has(&self, identity: &str) -> bool {
        self.failures.iter().any(|f| f.identity == identity)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return writeln!(f, "PASS chart valid");
        }
        for x in &self.failures {
            writeln!(f, "FAIL {}: {}", x.identity, x.detail)?;
        }
        Ok(())
    }
}

/// `ω = Σ_{i<j} ω_ij dx^i∧dx^j`
pub fn omega_form(omega: &[Vec<Scalar>], dim: usize) -> Form {
    let mut f = Form::zero(2, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            f.add_component(&[i as u8, j as u8], &omega[i][j]);
        }
    }
    f
}

/// Check every chart invariant and collect all failures.
pub fn validate_chart(c: &ChartData) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let n = c.dim;
    if n == 0 || n % 2 == 1 || n > u8::MAX as usize {
        rep.fail("dimension", format!("dim = {n} is not a positive even integer"));
        return rep;
    }
    let square = |m: &[Vec<Scalar>]| m.len() == n && m.iter().all(|r| r.len() == n);
    if !square(&c.omega) {
        rep.fail("shape", format!("omega must be {n}x{n}"));
        return rep;
    }
    if c.gamma.len() != n || c.gamma.iter().any(|m| !square(m)) {
        rep.fail("shape", format!("gamma must be {n}x{n}x{n}"));
        return rep;
    }
    if c.lambda.as_ref().is_some_and(|l| !square(l)) {
        rep.fail("shape", format!("lambda must be {n}x{n}"));
        return rep;
    }
    let spans = c
        .omega
        .iter()
        .flatten()
        .chain(c.gamma.iter().flatten().flatten())
        .chain(c.lambda.iter().flatten().flatten())
        .map(Scalar::span)
        .max()
        .unwrap_or(0)
        .max(c.big_omega.orders.iter().map(Form::span).max().unwrap_or(0));
    if spans > n {
        rep.fail("shape", format!("a coefficient uses x{spans} beyond dimension {n}"));
        return rep;
    }

    for i in 0..n {
        for j in 0..n {
            if c.omega[i][j] != -&c.omega[j][i] {
                rep.fail("omega_ij = -omega_ji", format!("at ({}, {})", i + 1, j + 1));
            }
        }
    }
    let d_omega = omega_form(&c.omega, n).exterior_derivative();
    if !d_omega.is_zero() {
        rep.fail("d omega = 0", format!("d omega = {d_omega}"));
    }
    let pd = match &c.lambda {
        Some(l) => PoissonData::new(c.omega.clone(), l.clone()),
        None => PoissonData::from_omega(c.omega.clone()),
    };
    if let Err(e) = &pd {
        if !matches!(e, FibreError::OmegaNotAntisymmetric(..)) {
            rep.fail("omega_kj Lambda^ij = delta^i_k", e.to_string());
        }
    }

    for k in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                if c.gamma[k][i][j] != c.gamma[k][j][i] {
                    rep.fail(
                        "torsion free: Gamma^k_ij = Gamma^k_ji",
                        format!("Gamma^{}_{}{} = {} but Gamma^{}_{}{} = {}", k + 1, i + 1, j + 1, c.gamma[k][i][j], k + 1, j + 1, i + 1, c.gamma[k][j][i]),
                    );
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                let mut v = c.omega[j][k].partial(i);
                for m in 0..n {
                    v.sub_assign_ref(&(&c.gamma[m][i][j] * &c.omega[m][k]));
                    v.sub_assign_ref(&(&c.gamma[m][i][k] * &c.omega[j][m]));
                }
                if !v.is_zero() {
                    rep.fail(
                        "symplectic connection: nabla omega = 0",
                        format!("(nabla_{} omega)_{}{} = {v}", i + 1, j + 1, k + 1),
                    );
                }
            }
        }
    }

    if c.big_omega.degree != 2 || c.big_omega.dim != n {
        rep.fail("shape", "Omega must be a series of two-forms on the chart".into());
    } else {
        if !c.big_omega.coeff(0).is_zero() {
            rep.fail("Omega starts at nu^1", format!("Omega_0 = {}", c.big_omega.coeff(0)));
        }
        for (i, om) in c.big_omega.orders.iter().enumerate() {
            let d = om.exterior_derivative();
            if !d.is_zero() {
                rep.fail("d Omega_i = 0", format!("d Omega_{i} = {d}"));
            }
        }
    }

    if c.s.dim() != n || c.s.cap() != c.cap + 1 {
        rep.fail("shape", format!("s must have dimension {n} and cap {}", c.cap + 1));
    } else {
        if !c.s.sigma().is_zero() {
            rep.fail("sigma(s) = 0", format!("sigma(s) = {}", c.s.sigma()));
        }
        let low = c.s.filter(|k| k.total_deg() < 3);
        if !low.is_zero() {
            rep.fail("s has Deg >= 3", format!("low part {low}"));
        }
        let anti = c.s.filter(|k| !k.anti.is_empty());
        if !anti.is_zero() {
            rep.fail("s has antideg 0", format!("antideg > 0 part {anti}"));
        }
    }
    rep
}

#[derive(Debug, Error)]
pub enum FedosovError {
    #[error("invalid chart:\n{0}")]
    InvalidChart(ValidationReport),
    #[error("homotopy D^-1 needs antideg >= 1 on every term; found {0}")]
    AntidegZero(String),
    #[error("order nu^{order} is beyond the certified range nu^{max} at cap {cap}")]
    OrderBeyondCap { order: usize, max: usize, cap: u32 },
    #[error(transparent)]
    Fibre(#[from] FibreError),
}

/// Connection lift `∇ = (1⊗dx^i) ∇_{∂_i}`.
#[derive(Clone, Debug)]
pub struct Connection {
    dim: usize,
    /// `images[i][j]`: `∇_{∂_i} dx^j = −Γ^j_{ik} dx^k`.
    images: Vec<Vec<Vec<(u8, Scalar)>>>,
}

impl Connection {
    pub fn new(gamma: &[Vec<Vec<Scalar>>]) -> Self {
        let dim = gamma.len();
        let images = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        (0..dim)
                            .filter(|&k| !gamma[j][i][k].is_zero())
                            .map(|k| (k as u8, -&gamma[j][i][k]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Connection { dim, images }
    }

    /// `∇_{∂_i} a`
    pub fn covariant(&self, i: usize, a: &WeylElement) -> WeylElement {
        a.derivation(|f| f.partial(i), |j| self.images[i][j as usize].clone())
    }

    pub fn apply(&self, a: &WeylElement) -> WeylElement {
        let mut out = WeylElement::zero(a.dim(), a.cap());
        for i in 0..self.dim {
            out.add_assign_ref(&self.covariant(i, a).wedge_left(i as u8));
        }
        out
    }
}

/// `∇a` for the chart's connection.
pub fn nabla_apply(c: &ChartData, a: &WeylElement) -> WeylElement {
    Connection::new(&c.gamma).apply(a)
}

/// `R^t_{jkl} = ∂_kΓ^t_{lj} − ∂_lΓ^t_{kj} + Γ^t_{km}Γ^m_{lj} − Γ^t_{lm}Γ^m_{kj}`
pub fn riemann(gamma: &[Vec<Vec<Scalar>>], t: usize, j: usize, k: usize, l: usize) -> Scalar {
    let n = gamma.len();
    let mut v = gamma[t][l][j].partial(k);
    v.sub_assign_ref(&gamma[t][k][j].partial(l));
    for m in 0..n {
        v.add_assign_ref(&(&gamma[t][k][m] * &gamma[m][l][j]));
        v.sub_assign_ref(&(&gamma[t][l][m] * &gamma[m][k][j]));
    }
    v
}

/// `R = ¼ ω_{it} R^t_{jkl} dx^i∨dx^j ⊗ dx^k∧dx^l`
pub fn curvature_r(c: &ChartData, cap: u32) -> WeylElement {
    let n = c.dim;
    let mut out = WeylElement::zero(n, cap);
    let half = GaussianRational::from_frac(1, 2);
    for k in 0..n {
        for l in k + 1..n {
            for j in 0..n {
                let rs: Vec<Scalar> = (0..n).map(|t| riemann(&c.gamma, t, j, k, l)).collect();
                for i in 0..n {
                    let mut v = Scalar::zero();
                    for (t, r) in rs.iter().enumerate() {
                        v.add_assign_ref(&(&c.omega[i][t] * r));
                    }
                    let key = WeylKey::new(0, vec![i.min(j) as u8, i.max(j) as u8], vec![k as u8, l as u8]);
                    out.add_term(key, &v.scale(&half));
                }
            }
        }
    }
    out
}

/// Iteration schedule for [`solve_r`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Compute `r^(k)` from `r^(2..k−1)` one total degree at a time.
    ByDegree,
    /// Substitute the whole element into the right hand side until it is stable.
    Fixpoint,
}

fn sources(c: &ChartData, cap: u32) -> (WeylElement, WeylElement) {
    let big_omega = WeylElement::anti_form_series(&c.big_omega.orders, c.dim, cap);
    (curvature_r(c, cap), big_omega)
}

/// `(1/ν) a∘a` for odd `a`, as `½ (1/ν)[a, a]`.
fn half_square(a: &WeylElement, pd: &PoissonData) -> Result<WeylElement, FibreError> {
    Ok(ad_over_nu(a, a, pd)?.scale(&GaussianRational::from_frac(1, 2)))
}

/// Solve `r = δs + δ⁻¹(R + 1⊗Ω + ∇r − (1/ν) r∘r)` modulo `Deg > N`.
pub fn solve_r(c: &ChartData, pd: &PoissonData, schedule: Schedule) -> Result<WeylElement, FibreError> {
    let cap = c.cap;
    let (rr, om) = sources(c, cap);
    let nabla = Connection::new(&c.gamma);
    let base = rr.add(&om);
    let ds = c.s.delta().with_cap(cap);
    match schedule {
        Schedule::ByDegree => {
            let mut parts: Vec<WeylElement> = vec![WeylElement::zero(c.dim, cap); cap as usize + 2];
            for k in 2..=cap as usize {
                let mut src = base.deg_component(k as u32 - 1);
                src.add_assign_ref(&nabla.apply(&parts[k - 1]));
                for a in 2..=k - 1 {
                    let b = k + 1 - a;
                    if b < a || b > k - 1 {
                        continue;
                    }
                    let mut q = ad_over_nu(&parts[a], &parts[b], pd)?;
                    if a == b {
                        q = q.scale(&GaussianRational::from_frac(1, 2));
                    }
                    src.sub_assign_ref(&q.deg_component(k as u32 - 1));
                }
                let mut rk = src.delta_inv();
                rk.add_assign_ref(&ds.deg_component(k as u32));
                parts[k] = rk;
            }
            let mut r = WeylElement::zero(c.dim, cap);
            for p in &parts {
                r.add_assign_ref(p);
            }
            Ok(r)
        }
        Schedule::Fixpoint => {
            let mut r = WeylElement::zero(c.dim, cap);
            for _ in 0..=cap + 1 {
                let mut src = base.add(&nabla.apply(&r));
                src.sub_assign_ref(&half_square(&r, pd)?);
                let next = ds.add(&src.delta_inv());
                if next == r {
                    break;
                }
                r = next;
            }
            Ok(r)
        }
    }
}

/// A solved chart: `R`, `r`, the Deg-homogeneous pieces of `r` and the
/// memoised Taylor series.
#[derive(Debug)]
pub struct FedosovState {
    pub chart: ChartData,
    pub pd: PoissonData,
    pub nabla: Connection,
    pub curvature: WeylElement,
    pub r: WeylElement,
    r_parts: Vec<WeylElement>,
    tau_cache: RwLock<HashMap<String, WeylElement>>,
}

impl FedosovState {
    /// Validate the chart and solve for `r`.
    pub fn new(chart: ChartData) -> Result<Self, FedosovError> {
        let pd = Self::poisson(&chart)?;
        let r = solve_r(&chart, &pd, Schedule::ByDegree)?;
        Ok(Self::with_r(chart, pd, r))
    }

    /// Validate the chart and adopt a previously solved `r`.
    pub fn from_cached_r(chart: ChartData, r: WeylElement) -> Result<Self, FedosovError> {
        let pd = Self::poisson(&chart)?;
        Ok(Self::with_r(chart, pd, r))
    }

    /// Validate the chart and build its Poisson data.
    pub fn poisson(chart: &ChartData) -> Result<PoissonData, FedosovError> {
        let rep = validate_chart(chart);
        if !rep.is_valid() {
            return Err(FedosovError::InvalidChart(rep));
        }
        Ok(match &chart.lambda {
            Some(l) => PoissonData::new(chart.omega.clone(), l.clone())?,
            None => PoissonData::from_omega(chart.omega.clone())?,
        })
    }

    fn with_r(chart: ChartData, pd: PoissonData, r: WeylElement) -> Self {
        let cap = chart.cap;
        let r_parts = (0..=cap).map(|k| r.deg_component(k)).collect();
        FedosovState {
            nabla: Connection::new(&chart.gamma),
            curvature: curvature_r(&chart, cap),
            pd,
            r,
            r_parts,
            chart,
            tau_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    pub fn cap(&self) -> u32 {
        self.chart.cap
    }

    /// Highest certified `ν`-order of the star product.
    pub fn max_order(&self) -> usize {
        self.cap() as usize / 2
    }

    pub fn zero(&self) -> WeylElement {
        WeylElement::zero(self.dim(), self.cap())
    }

    pub fn nabla(&self, a: &WeylElement) -> WeylElement {
        self.nabla.apply(a)
    }

    pub fn ad_r(&self, a: &WeylElement) -> WeylElement {
        ad_over_nu(&self.r, a, &self.pd).expect("commutator with r is divisible by nu")
    }

    /// `D = −δ + ∇ − (1/ν)ad(r)`
    pub fn fedosov_d(&self, a: &WeylElement) -> WeylElement {
        let mut out = self.nabla(a);
        out.sub_assign_ref(&a.delta());
        out.sub_assign_ref(&self.ad_r(a));
        out
    }

    /// `D⁻¹a = −δ⁻¹ Σ_m B^m a` with `B = δ⁻¹X + Xδ⁻¹`, `X = ∇ − (1/ν)ad(r)`.
    pub fn d_inverse(&self, a: &WeylElement) -> Result<WeylElement, FedosovError> {
        let zero_part = a.filter(|k| k.anti.is_empty());
        if !zero_part.is_zero() {
            return Err(FedosovError::AntidegZero(zero_part.to_string()));
        }
        let x = |e: &WeylElement| self.nabla(e).sub(&self.ad_r(e));
        let mut sum = a.clone();
        let mut term = a.clone();
        while !term.is_zero() {
            let next = x(&term).delta_inv().add(&x(&term.delta_inv()));
            sum.add_assign_ref(&next);
            term = next;
        }
        Ok(sum.delta_inv().neg())
    }

    /// Fedosov-Taylor series of a function.
    pub fn taylor(&self, f: &Scalar) -> WeylElement {
        let key = f.canonical_string();
        if let Some(t) = self.tau_cache.read().expect("tau cache").get(&key) {
            return t.clone();
        }
        let t = self.taylor_uncached(f);
        self.tau_cache.write().expect("tau cache").entry(key).or_insert(t).clone()
    }

    fn taylor_uncached(&self, f: &Scalar) -> WeylElement {
        let cap = self.cap() as usize;
        let mut parts = vec![WeylElement::scalar(f.clone(), self.dim(), self.cap())];
        for k in 0..cap {
            let mut src = self.nabla(&parts[k]);
            for l in 0..k {
                let rl = &self.r_parts[l + 2];
                if rl.is_zero() || parts[k - l].is_zero() {
                    continue;
                }
                let q = ad_over_nu(rl, &parts[k - l], &self.pd).expect("commutator with r is divisible by nu");
                src.sub_assign_ref(&q);
            }
            parts.push(src.delta_inv());
        }
        let mut out = self.zero();
        for p in &parts {
            out.add_assign_ref(p);
        }
        out
    }

    /// `τ` extended `ν`-linearly to series.
    pub fn taylor_series(&self, f: &NuSeries) -> WeylElement {
        let mut out = self.zero();
        for (k, c) in f.coeffs().iter().enumerate() {
            if !c.is_zero() {
                out.add_assign_ref(&self.taylor(c).shift_nu(k as u32));
            }
        }
        out
    }

    /// `f * g = σ(τf ∘ τg)` through order `ν^{⌊N/2⌋}`.
    pub fn star(&self, f: &NuSeries, g: &NuSeries) -> NuSeries {
        circ_sigma(&self.taylor_series(f), &self.taylor_series(g), &self.pd).truncate(self.max_order() + 1)
    }

    pub fn star_scalar(&self, f: &Scalar, g: &Scalar) -> NuSeries {
        self.star(&f.clone().into(), &g.clone().into())
    }

    /// `C_k(f, g)`, the `ν^k` coefficient of `f * g`.
    pub fn extract_ck(&self, k: usize, f: &Scalar, g: &Scalar) -> Result<Scalar, FedosovError> {
        if k > self.max_order() {
            return Err(FedosovError::OrderBeyondCap { order: k, max: self.max_order(), cap: self.cap() });
        }
        Ok(self.star_scalar(f, g).coeff(k))
    }

    /// Number of memoised Taylor series.
    pub fn tau_cache_len(&self) -> usize {
        self.tau_cache.read().expect("tau cache").len()
    }
}
