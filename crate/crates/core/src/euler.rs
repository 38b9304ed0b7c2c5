//! Local ν-Euler derivations `𝖤 = σ ∘ 𝔈 ∘ τ`, the Deligne pair `d_ab`, the
//! deformed Cartan formula and the antisymmetric part of `C₂`.

use std::fmt;

use thiserror::Error;

use crate::fedosov::{omega_form, ChartData, FedosovError, FedosovState};
use crate::fibrewise::{ad_over_nu, circ_sigma, lie_derivative_field, PoissonData};
use crate::forms::{Form, FormSeries, VectorField};
use crate::report::{first_weyl_term, Report};
use crate::scalar::{rat, GaussianRational, NuSeries, Scalar};
use crate::weyl::{monomial_generators, WeylElement, WeylKey};

/// `t[a][i][j]` holds the component `S^a_ij`.
pub type Tensor3 = Vec<Vec<Vec<Scalar>>>;

#[derive(Debug, Error)]
pub enum EulerError {
    #[error("form of degree 0 has no potential")]
    DegreeZero,
    #[error("form is not closed: d of it is {0}")]
    NotClosed(String),
    #[error("bad potential choice: {0}")]
    BadPotential(String),
    #[error("consistency condition D(1⊗A - T - H r + r) = 0 fails at {0}")]
    Consistency(String),
    #[error("defining equation for h fails at {0}")]
    Defining(String),
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
}

/// Potential of a closed form via the radial homotopy; the result vanishes at
/// the origin.
pub fn poincare_potential(form: &Form) -> Result<Form, EulerError> {
    if form.degree() == 0 {
        return Err(EulerError::DegreeZero);
    }
    let d = form.exterior_derivative();
    if !d.is_zero() {
        return Err(EulerError::NotClosed(d.to_string()));
    }
    Ok(form.radial_homotopy())
}

pub fn poincare_potential_series(fs: &FormSeries) -> Result<FormSeries, EulerError> {
    if fs.degree == 0 {
        return Err(EulerError::DegreeZero);
    }
    let mut out = FormSeries::zero(fs.degree - 1, fs.dim);
    for (k, f) in fs.orders.iter().enumerate() {
        out.set(k, poincare_potential(f)?);
    }
    Ok(out)
}

/// `ξ` with `i_ξω = −θ`, i.e. `ξ^i = −Λ^ij θ_j`.
pub fn xi_from_theta(theta: &Form, pd: &PoissonData) -> VectorField {
    let dim = pd.dim();
    VectorField(
        (0..dim)
            .map(|i| {
                let mut s = Scalar::zero();
                for j in 0..dim {
                    s.sub_assign_ref(&(pd.lambda(i, j) * &theta.component(&[j as u8])));
                }
                s
            })
            .collect(),
    )
}

/// Potentials `θ` (`dθ = −ω`), `Θ = Σ ν^i Θ_i` (`dΘ_i = Ω_i`) and the
/// induced Euler field `ξ`.
#[derive(Clone, Debug)]
pub struct PotentialChoice {
    pub label: String,
    pub theta: Form,
    pub big_theta: FormSeries,
    pub xi: VectorField,
}

impl PotentialChoice {
    /// `θ = −K(ω)`, `Θ_i = K(Ω_i)`.
    pub fn radial(label: impl Into<String>, chart: &ChartData, pd: &PoissonData) -> Result<Self, EulerError> {
        let theta = poincare_potential(&omega_form(&chart.omega, chart.dim))?.neg();
        let big_theta = poincare_potential_series(&chart.big_omega)?;
        Self::new(label, chart, pd, theta, big_theta)
    }

    pub fn new(
        label: impl Into<String>,
        chart: &ChartData,
        pd: &PoissonData,
        theta: Form,
        big_theta: FormSeries,
    ) -> Result<Self, EulerError> {
        let omega = omega_form(&chart.omega, chart.dim);
        let excess = theta.exterior_derivative().add(&omega);
        if !excess.is_zero() {
            return Err(EulerError::BadPotential(format!("d theta + omega = {excess}")));
        }
        let n = big_theta.orders.len().max(chart.big_omega.orders.len());
        for k in 0..n {
            let excess = big_theta.coeff(k).exterior_derivative().sub(&chart.big_omega.coeff(k));
            if !excess.is_zero() {
                return Err(EulerError::BadPotential(format!("d Theta_{k} - Omega_{k} = {excess}")));
            }
        }
        let xi = xi_from_theta(&theta, pd);
        let excess = omega.lie_derivative(&xi).sub(&omega);
        if !excess.is_zero() {
            return Err(EulerError::BadPotential(format!("L_xi omega - omega = {excess}")));
        }
        Ok(PotentialChoice { label: label.into(), theta, big_theta, xi })
    }

    /// Gauge change `θ + df`, `Θ_i + dg_i`.
    pub fn shifted(
        &self,
        label: impl Into<String>,
        chart: &ChartData,
        pd: &PoissonData,
        f: &Scalar,
        g: &NuSeries,
    ) -> Result<Self, EulerError> {
        let dim = chart.dim;
        let theta = self.theta.add(&Form::function(f.clone(), dim).exterior_derivative());
        let mut big_theta = self.big_theta.clone();
        for (k, c) in g.coeffs().iter().enumerate() {
            big_theta.set(k, big_theta.coeff(k).add(&Form::function(c.clone(), dim).exterior_derivative()));
        }
        Self::new(label, chart, pd, theta, big_theta)
    }
}

/// `S^t_ij = ((L_ξ∇)_{∂_i}∂_j)^t`.
pub fn s_tensor(chart: &ChartData, xi: &VectorField) -> Tensor3 {
    let n = chart.dim;
    let g = &chart.gamma;
    let jac = xi.jacobian();
    let mut out = vec![vec![vec![Scalar::zero(); n]; n]; n];
    for t in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = xi.apply(&g[t][i][j]);
                v.add_assign_ref(&jac[t][j].partial(i));
                for m in 0..n {
                    v.sub_assign_ref(&(&g[m][i][j] * &jac[t][m]));
                    v.add_assign_ref(&(&jac[m][j] * &g[t][i][m]));
                    v.add_assign_ref(&(&jac[m][i] * &g[t][m][j]));
                }
                out[t][i][j] = v;
            }
        }
    }
    out
}

/// `T = ½ ω_ij S^j_kl dx^i∨dx^l ⊗ dx^k`.
pub fn t_element(chart: &ChartData, s: &Tensor3, cap: u32) -> WeylElement {
    let n = chart.dim;
    let half = GaussianRational::from_frac(1, 2);
    let mut out = WeylElement::zero(n, cap);
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut c = Scalar::zero();
                for j in 0..n {
                    c.add_assign_ref(&(&chart.omega[i][j] * &s[j][k][l]));
                }
                if !c.is_zero() {
                    let key = WeylKey::new(0, vec![i as u8, l as u8], vec![k as u8]);
                    out.add_assign_ref(&WeylElement::term(key, c.scale(&half), n, cap));
                }
            }
        }
    }
    out
}

/// Symmetric covariant derivative of a one-form,
/// `Dθ ⊗ 1 = (∂_iθ_j − Γ^k_ij θ_k) dx^i∨dx^j ⊗ 1`.
pub fn sym_cov_derivative(chart: &ChartData, theta: &Form, cap: u32) -> WeylElement {
    let n = chart.dim;
    let comps: Vec<Scalar> = (0..n).map(|j| theta.component(&[j as u8])).collect();
    let mut out = WeylElement::zero(n, cap);
    for i in 0..n {
        for j in 0..n {
            let mut c = comps[j].partial(i);
            for (k, tk) in comps.iter().enumerate() {
                c.sub_assign_ref(&(&chart.gamma[k][i][j] * tk));
            }
            if !c.is_zero() {
                out.add_assign_ref(&WeylElement::term(WeylKey::new(0, vec![i as u8, j as u8], vec![]), c, n, cap));
            }
        }
    }
    out
}

/// `H = ν∂_ν + L_ξ`
pub fn euler_h(xi: &VectorField, a: &WeylElement) -> WeylElement {
    a.nu_euler().add(&lie_derivative_field(xi, a))
}

/// `A = (id − H)Θ`, so `A_i = (1 − i)Θ_i − L_ξΘ_i`.
pub fn a_series(p: &PotentialChoice) -> FormSeries {
    p.big_theta.map(|i, th| {
        th.scale(&GaussianRational::from_int(1 - i as i64)).sub(&th.lie_derivative(&p.xi))
    })
}

/// `S`, `T` and their certified identities.
pub fn tensor_t_alpha(st: &FedosovState, p: &PotentialChoice) -> (Tensor3, WeylElement, Report) {
    let chart = &st.chart;
    let n = chart.dim;
    let cap = st.cap();
    let s = s_tensor(chart, &p.xi);
    let t = t_element(chart, &s, cap);
    let mut rep = Report::new();

    let asym = (0..n).flat_map(|a| (0..n).flat_map(move |i| (0..n).map(move |j| (a, i, j))))
        .find(|&(a, i, j)| s[a][i][j] != s[a][j][i]);
    rep.push("S symmetric", asym.is_none(), asym.map(|(a, i, j)| format!("S^{}_{}{}", a + 1, i + 1, j + 1)).unwrap_or_default());

    let mut skew = None;
    'outer: for z in 0..n {
        for x in 0..n {
            for y in 0..n {
                let mut v = Scalar::zero();
                for j in 0..n {
                    v.add_assign_ref(&(&chart.omega[z][j] * &s[j][x][y]));
                    v.add_assign_ref(&(&chart.omega[j][y] * &s[j][x][z]));
                }
                if !v.is_zero() {
                    skew = Some(format!("(z,x,y) = ({},{},{}): {v}", z + 1, x + 1, y + 1));
                    break 'outer;
                }
            }
        }
    }
    rep.push("omega(Z,S(X,Y)) = -omega(S(X,Z),Y)", skew.is_none(), skew.unwrap_or_default());

    let half = GaussianRational::from_frac(1, 2);
    let alt = st
        .curvature
        .insert_anti(&p.xi)
        .add(&st.nabla(&sym_cov_derivative(chart, &p.theta, cap).scale(&half)));
    rep.weyl_eq("T = i_a(xi)R + nabla(1/2 D theta ⊗ 1)", &t, &alt);
    rep.weyl_eq("delta T = 0", &t.delta(), &st.zero());
    let lr = lie_derivative_field(&p.xi, &st.curvature).sub(&st.curvature);
    rep.weyl_eq("nabla T = L_xi R - R", &st.nabla(&t), &lr);

    let gens = monomial_generators(n, 3, cap);
    rep.weyl_family(
        "(1/nu) ad(T) = [nabla, L_xi]",
        gens.iter().map(|a| {
            let lhs = ad_over_nu(&t, a, &st.pd).expect("T is even");
            let rhs = st.nabla(&lie_derivative_field(&p.xi, a)).sub(&lie_derivative_field(&p.xi, &st.nabla(a)));
            (a.to_string(), lhs, rhs)
        }),
    );
    (s, t, rep)
}

/// Everything attached to one potential choice.
#[derive(Clone, Debug)]
pub struct EulerData {
    pub choice: PotentialChoice,
    pub s: Tensor3,
    pub t: WeylElement,
    pub a: FormSeries,
    pub h: WeylElement,
    pub report: Report,
}

/// `1⊗A + r − H r − T`
fn h_source(st: &FedosovState, p: &PotentialChoice, a: &FormSeries, t: &WeylElement) -> WeylElement {
    let mut rhs = WeylElement::anti_form_series(&a.orders, st.dim(), st.cap());
    rhs.add_assign_ref(&st.r);
    rhs.sub_assign_ref(&euler_h(&p.xi, &st.r));
    rhs.sub_assign_ref(t);
    rhs
}

/// Solves `D h = 1⊗A + r − H r − T` and certifies the result.
pub fn solve_h_alpha(st: &FedosovState, p: &PotentialChoice) -> Result<EulerData, EulerError> {
    let (s, t, mut rep) = tensor_t_alpha(st, p);
    let a = a_series(p);
    let rhs = h_source(st, p, &a, &t);
    let valid = st.cap().saturating_sub(1);

    let cons = st.fedosov_d(&rhs).truncate(valid);
    if !cons.is_zero() {
        return Err(EulerError::Consistency(first_weyl_term(&cons)));
    }
    rep.pass("D(1⊗A - T - H r + r) = 0");

    let h = st.d_inverse(&rhs)?;
    let lhs = st.fedosov_d(&h).truncate(valid);
    let diff = lhs.sub(&rhs.truncate(valid));
    if !diff.is_zero() {
        return Err(EulerError::Defining(first_weyl_term(&diff)));
    }
    rep.pass("D h = 1⊗A + r - H r - T");
    rep.series_eq("sigma(h) = 0", &h.sigma(), &NuSeries::zero());
    let low = h.filter(|k| k.total_deg() < 3);
    rep.push("h has Deg >= 3", low.is_zero(), if low.is_zero() { String::new() } else { first_weyl_term(&low) });
    Ok(EulerData { choice: p.clone(), s, t, a, h, report: rep })
}

impl EulerData {
    /// `𝔈a = H a + (1/ν) ad(h) a`
    pub fn operator(&self, st: &FedosovState, a: &WeylElement) -> WeylElement {
        euler_h(&self.choice.xi, a).add(&ad_over_nu(&self.h, a, &st.pd).expect("commutator is divisible by nu"))
    }

    /// Number of `ν`-orders of `𝖤f` that are exact at this cap.
    pub fn valid_orders(st: &FedosovState) -> usize {
        st.max_order()
    }
}

/// `σ((1/ν) ad(h) τf)`, the part of `𝖤f` beyond `ν∂_ν + L_ξ`.
pub fn euler_correction(st: &FedosovState, e: &EulerData, f: &NuSeries) -> NuSeries {
    let cap = st.cap() + 2;
    let tau = st.taylor_series(f).with_cap(cap);
    let h = e.h.with_cap(cap);
    circ_sigma(&h, &tau, &st.pd)
        .sub(&circ_sigma(&tau, &h, &st.pd))
        .shift_down()
        .expect("sigma of a commutator of even elements starts at nu^1")
        .truncate(EulerData::valid_orders(st))
}

/// `𝖤f = ν∂_νf + ξ(f) + σ((1/ν) ad(h) τf)`, reduced modulo `ν^{⌊N/2⌋}`.
pub fn euler_derivation_apply(st: &FedosovState, e: &EulerData, f: &NuSeries) -> NuSeries {
    f.nu_euler()
        .add(&f.map(|c| e.choice.xi.apply(c)))
        .add(&euler_correction(st, e, f))
        .truncate(EulerData::valid_orders(st))
}

/// `∇_{∂_i}X`
fn covariant_field(chart: &ChartData, x: &VectorField, i: usize) -> VectorField {
    let n = chart.dim;
    VectorField(
        (0..n)
            .map(|k| {
                let mut v = x.component(k).partial(i);
                for j in 0..n {
                    v.add_assign_ref(&(&chart.gamma[k][i][j] * x.component(j)));
                }
                v
            })
            .collect(),
    )
}

/// Both sides of the deformed Cartan formula on the degree-3 generator set,
/// compared modulo `Deg > N − 1`. With `f` the Hamiltonian form for `X_f` is
/// checked too.
pub fn cartan_formula_check(st: &FedosovState, x: &VectorField, f: Option<&Scalar>) -> Report {
    let chart = &st.chart;
    let n = chart.dim;
    let cap = st.cap();
    let valid = cap.saturating_sub(1);
    let gens = monomial_generators(n, 3, cap);
    let mut rep = Report::new();
    let iar = st.r.insert_anti(x);
    let nabla_x: Vec<VectorField> = (0..n).map(|i| covariant_field(chart, x, i)).collect();
    rep.weyl_family(
        format!("L_X = D i_a(X) + i_a(X) D + i_s(X) + dx^i∨i_s(nabla_i X) + (1/nu)ad(i_a(X)r), X = {x}"),
        gens.iter().map(|a| {
            let lhs = lie_derivative_field(x, a);
            let mut rhs = st.fedosov_d(&a.insert_anti(x));
            rhs.add_assign_ref(&st.fedosov_d(a).insert_anti(x));
            rhs.add_assign_ref(&a.insert_sym(x));
            for (i, y) in nabla_x.iter().enumerate() {
                rhs.add_assign_ref(&a.insert_sym(y).sym_left(i as u8));
            }
            rhs.add_assign_ref(&ad_over_nu(&iar, a, &st.pd).expect("i_a(X)r is even"));
            (a.to_string(), lhs.truncate(valid), rhs.truncate(valid))
        }),
    );
    if let Some(f) = f {
        let xf = st.pd.hamiltonian(f);
        let df = Form::function(f.clone(), n).exterior_derivative();
        let mut big_f = WeylElement::scalar(f.clone(), n, cap);
        big_f.add_assign_ref(&WeylElement::sym_one_form(&df, cap));
        big_f.add_assign_ref(&sym_cov_derivative(chart, &df, cap).scale_rat(&rat(1, 2)));
        big_f.sub_assign_ref(&st.r.insert_anti(&xf));
        rep.weyl_family(
            format!("L_Xf = D i_a(Xf) + i_a(Xf) D - (1/nu)ad(f + df⊗1 + 1/2 Ddf⊗1 - i_a(Xf)r), f = {f}"),
            gens.iter().map(|a| {
                let lhs = lie_derivative_field(&xf, a);
                let mut rhs = st.fedosov_d(&a.insert_anti(&xf));
                rhs.add_assign_ref(&st.fedosov_d(a).insert_anti(&xf));
                rhs.sub_assign_ref(&ad_over_nu(&big_f, a, &st.pd).expect("even element"));
                (a.to_string(), lhs.truncate(valid), rhs.truncate(valid))
            }),
        );
    }
    rep
}

/// `[D, 𝔈] = 0` on the degree-3 generator set. `(1/ν)ad(h)` reads `h` up to
/// two degrees above its output, so `𝔈` is exact modulo `Deg > N − 2` and the
/// commutator modulo `Deg > N − 3`.
pub fn euler_commutes_with_d(st: &FedosovState, e: &EulerData) -> Report {
    let valid = st.cap().saturating_sub(3);
    let mut rep = Report::new();
    rep.weyl_family(
        "[D, E] = 0",
        monomial_generators(st.dim(), 3, st.cap()).iter().map(|a| {
            let lhs = st.fedosov_d(&e.operator(st, a)).truncate(valid);
            let rhs = e.operator(st, &st.fedosov_d(a)).truncate(valid);
            (a.to_string(), lhs, rhs)
        }),
    );
    rep
}

fn need_order_two(st: &FedosovState) -> Result<(), EulerError> {
    if st.max_order() < 2 {
        return Err(FedosovError::OrderBeyondCap { order: 2, max: st.max_order(), cap: st.cap() }.into());
    }
    Ok(())
}

/// `C₂⁻(f, g) = ½(C₂(f, g) − C₂(g, f))`
pub fn c2_minus(st: &FedosovState, f: &Scalar, g: &Scalar) -> Result<Scalar, EulerError> {
    need_order_two(st)?;
    let fg = st.extract_ck(2, f, g)?;
    let gf = st.extract_ck(2, g, f)?;
    Ok((&fg - &gf).scale_rat(&rat(1, 2)))
}

/// The one-form `s₁` in `s^(3) = s₃ + ν s₁`.
pub fn s1_form(chart: &ChartData) -> Form {
    let mut out = Form::zero(1, chart.dim);
    for (k, c) in chart.s.terms() {
        if k.nu == 1 && k.sym.len() == 1 && k.anti.is_empty() {
            out.add_component(&k.sym, c);
        }
    }
    out
}

/// `ρ₂ = −½(Ω₁ + ds₁)`
pub fn rho2_form(st: &FedosovState) -> Form {
    let chart = &st.chart;
    chart.big_omega.coeff(1).add(&s1_form(chart).exterior_derivative()).scale(&GaussianRational::from_frac(-1, 2))
}

/// `ρ₂` read off the star product: with `M_ab = C₂⁻(x^a, x^b)`, `ρ = −ωMω`.
pub fn rho2_from_star(st: &FedosovState) -> Result<Form, EulerError> {
    let n = st.dim();
    let mut m = vec![vec![Scalar::zero(); n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let v = c2_minus(st, &Scalar::var(a), &Scalar::var(b))?;
            m[b][a] = -&v;
            m[a][b] = v;
        }
    }
    let om = &st.chart.omega;
    let mut out = Form::zero(2, n);
    for i in 0..n {
        for j in i + 1..n {
            let mut v = Scalar::zero();
            for a in 0..n {
                for b in 0..n {
                    v.sub_assign_ref(&(&(&om[i][a] * &m[a][b]) * &om[b][j]));
                }
            }
            out.add_component(&[i as u8, j as u8], &v);
        }
    }
    Ok(out)
}

/// Representative `(1/ν)(ω + Ω)` with the certificate that `ρ₂ + ½Ω₁` is exact.
#[derive(Clone, Debug)]
pub struct CharacteristicForm {
    pub omega: Form,
    pub big_omega: FormSeries,
    pub rho2: Form,
    pub primitive: Form,
    pub report: Report,
}

impl fmt::Display for CharacteristicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nu^-1: {}", self.omega)?;
        for (k, o) in self.big_omega.orders.iter().enumerate().skip(1) {
            if !o.is_zero() {
                writeln!(f, "nu^{}: {o}", k - 1)?;
            }
        }
        writeln!(f, "rho2 = {}", self.rho2)?;
        writeln!(f, "rho2 + 1/2 Omega_1 = d({})", self.primitive)?;
        write!(f, "{}", self.report)
    }
}

pub fn characteristic_form(st: &FedosovState) -> Result<CharacteristicForm, EulerError> {
    let chart = &st.chart;
    let rho2 = rho2_from_star(st)?;
    let primitive = s1_form(chart).scale(&GaussianRational::from_frac(-1, 2));
    let mut report = Report::new();
    let formula = rho2_form(st);
    let diff = rho2.sub(&formula);
    report.push("C2^- = rho2 = -1/2(Omega_1 + d s_1)", diff.is_zero(), if diff.is_zero() { String::new() } else { diff.to_string() });
    let exact = rho2.add(&chart.big_omega.coeff(1).scale(&GaussianRational::from_frac(1, 2))).sub(&primitive.exterior_derivative());
    report.push("rho2 + 1/2 Omega_1 = -1/2 d s_1", exact.is_zero(), if exact.is_zero() { String::new() } else { exact.to_string() });
    Ok(CharacteristicForm {
        omega: omega_form(&chart.omega, chart.dim),
        big_omega: chart.big_omega.clone(),
        rho2,
        primitive,
        report,
    })
}

/// `i_ξΩ` order by order.
fn interior_series(fs: &FormSeries, x: &VectorField) -> FormSeries {
    let mut out = FormSeries::zero(fs.degree - 1, fs.dim);
    for (k, f) in fs.orders.iter().enumerate() {
        out.set(k, f.interior(x));
    }
    out
}

/// Builds `d_ab = f_ab + a_ab` for two potential choices over one chart and
/// checks `(𝖤_A − 𝖤_B)g = (1/ν)(d_ab * g − g * d_ab)` on `tests`.
pub fn deligne_pair_check(
    st: &FedosovState,
    ea: &EulerData,
    eb: &EulerData,
    tests: &[Scalar],
) -> Result<(NuSeries, Report), EulerError> {
    let (pa, pb) = (&ea.choice, &eb.choice);
    let dtheta = pa.theta.sub(&pb.theta);
    let f_ab = poincare_potential(&dtheta)?.as_function();
    let big_a = ea.a.add(&interior_series(&st.chart.big_omega, &pa.xi));
    let big_b = eb.a.add(&interior_series(&st.chart.big_omega, &pb.xi));
    let source = big_b.sub(&big_a);
    let mut rep = Report::new();
    let closed = source.exterior_derivative();
    rep.push("d((A_B + i_xiB Omega) - (A_A + i_xiA Omega)) = 0", closed.is_zero(), if closed.is_zero() { String::new() } else { closed.to_string() });
    let a_ab = poincare_potential_series(&source)?.as_functions();
    let d_ab = NuSeries::from(f_ab).add(&a_ab);

    let mut lhs_d = FormSeries::zero(1, st.dim());
    for (k, c) in d_ab.coeffs().iter().enumerate() {
        lhs_d.set(k, Form::function(c.clone(), st.dim()).exterior_derivative());
    }
    let mut expect = source.clone();
    expect.set(0, expect.coeff(0).add(&dtheta));
    let diff = lhs_d.sub(&expect);
    rep.push("d(d_ab) = (theta_A - theta_B) - ((A_A + i_xiA Omega) - (A_B + i_xiB Omega))", diff.is_zero(), if diff.is_zero() { String::new() } else { diff.to_string() });

    let order = EulerData::valid_orders(st);
    rep.series_family(
        "(E_A - E_B) g = (1/nu)(d_ab * g - g * d_ab)",
        tests.iter().map(|g| {
            let g: NuSeries = g.clone().into();
            let lhs = euler_derivation_apply(st, ea, &g).sub(&euler_derivation_apply(st, eb, &g));
            let rhs = st
                .star(&d_ab, &g)
                .sub(&st.star(&g, &d_ab))
                .shift_down()
                .expect("star commutator starts at nu^1")
                .truncate(order);
            (g.to_string(), lhs, rhs)
        }),
    );
    Ok((d_ab, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_nu_series, parse_scalar};

    fn s(t: &str) -> Scalar {
        parse_scalar(t, 2).unwrap()
    }

    fn flat(cap: u32) -> FedosovState {
        FedosovState::new(ChartData::flat(2, cap)).unwrap()
    }

    #[test]
    fn potential_of_omega_and_of_constant_one_form() {
        let mut om = Form::zero(2, 2);
        om.add_component(&[0, 1], &Scalar::one());
        let k = poincare_potential(&om).unwrap();
        assert_eq!(k.component(&[1]), s("1/2*x1"));
        assert_eq!(k.component(&[0]), s("-1/2*x2"));
        let mut c = Form::zero(1, 2);
        c.add_component(&[0], &s("3"));
        assert_eq!(poincare_potential(&c).unwrap().as_function(), s("3*x1"));
        let mut bad = Form::zero(1, 2);
        bad.add_component(&[0], &s("x2"));
        assert!(matches!(poincare_potential(&bad), Err(EulerError::NotClosed(_))));
    }

    #[test]
    fn flat_euler_field_and_trivial_data() {
        let st = flat(6);
        let p = PotentialChoice::radial("A", &st.chart, &st.pd).unwrap();
        assert_eq!(p.xi.component(0), &s("1/2*x1"));
        assert_eq!(p.xi.component(1), &s("1/2*x2"));
        let e = solve_h_alpha(&st, &p).unwrap();
        assert!(e.t.is_zero());
        assert!(e.s.iter().flatten().flatten().all(Scalar::is_zero));
        assert!(e.h.is_zero());
        assert!(e.report.all_pass(), "{}", e.report);
        let ex = euler_derivation_apply(&st, &e, &s("x1").into());
        assert_eq!(ex, parse_nu_series("1/2*x1", 2).unwrap());
    }

    #[test]
    fn bad_potential_is_rejected() {
        let st = flat(4);
        let mut theta = Form::zero(1, 2);
        theta.add_component(&[1], &s("1/2*x1"));
        theta.add_component(&[0], &s("-1/2*x2"));
        let err = PotentialChoice::new("A", &st.chart, &st.pd, theta, FormSeries::zero(1, 2)).unwrap_err();
        assert!(matches!(err, EulerError::BadPotential(_)));
    }

    #[test]
    fn constant_omega_gives_c2_minus() {
        let mut c = ChartData::flat(2, 6);
        let mut om = Form::zero(2, 2);
        om.add_component(&[0, 1], &s("2"));
        c.big_omega.set(1, om);
        let st = FedosovState::new(c).unwrap();
        assert_eq!(c2_minus(&st, &s("x1"), &s("x2")).unwrap(), s("-1"));
        let cf = characteristic_form(&st).unwrap();
        assert!(cf.report.all_pass(), "{}", cf.report);
        assert!(cf.primitive.is_zero());
        assert!(c2_minus(&flat(3), &s("x1"), &s("x2")).is_err());
    }
}
