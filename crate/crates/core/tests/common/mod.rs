#![allow(dead_code)]

use fedosov::fedosov::ChartData;
use fedosov::fibrewise::PoissonData;
use fedosov::forms::Form;
use fedosov::scalar::{parse_scalar, GaussianRational, NuSeries, Scalar};
use fedosov::weyl::parse_weyl;

pub fn s(t: &str) -> Scalar {
    parse_scalar(t, 2).unwrap()
}

/// 2D chart with constant ω, a single totally symmetric `Γ_111 = x1*x2`,
/// `Ω_1 = (1 + x1*x2) dx1∧dx2` and `s = ν x1 dx2 ⊗ 1`.
pub fn curved_chart(cap: u32) -> ChartData {
    let mut c = ChartData::flat(2, cap);
    c.gamma[1][0][0] = s("x1*x2");
    let mut om = Form::zero(2, 2);
    om.add_component(&[0, 1], &s("1 + x1*x2"));
    c.big_omega.set(1, om);
    c.s = parse_weyl("ν * (x1) * dx2 ⊗ 1", 2, cap + 1).unwrap();
    c
}

/// Flat chart with `Ω = ν c dx1∧dx2`.
pub fn flat_with_omega(cap: u32, c_val: &str) -> ChartData {
    let mut c = ChartData::flat(2, cap);
    let mut om = Form::zero(2, 2);
    om.add_component(&[0, 1], &s(c_val));
    c.big_omega.set(1, om);
    c
}

/// Closed-form Moyal product through `ν^max`.
pub fn moyal(f: &Scalar, g: &Scalar, pd: &PoissonData, max: usize) -> NuSeries {
    let dim = pd.dim();
    let mut out = NuSeries::zero();
    let mut layer = vec![(f.clone(), g.clone(), Scalar::one())];
    let mut norm = GaussianRational::one();
    for k in 0..=max {
        let mut acc = Scalar::zero();
        for (a, b, c) in &layer {
            acc.add_assign_ref(&(&(a * b) * c));
        }
        out.add_at(k, &acc.scale(&norm));
        norm = &norm * &GaussianRational::from_frac(1, 2 * (k as i64 + 1));
        let mut next = Vec::new();
        for (a, b, c) in &layer {
            for i in 0..dim {
                let da = a.partial(i);
                if da.is_zero() {
                    continue;
                }
                for j in 0..dim {
                    let lam = pd.lambda(i, j);
                    let db = b.partial(j);
                    if lam.is_zero() || db.is_zero() {
                        continue;
                    }
                    next.push((da.clone(), db, c * lam));
                }
            }
        }
        layer = next;
    }
    out
}

#[allow(unused_imports)]
pub use fedosov::weyl::monomial_generators as generators;
