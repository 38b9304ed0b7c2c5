//! Seeded identity suites, one report each.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::euler::{
    c2_minus, cartan_formula_check, characteristic_form, deligne_pair_check, euler_commutes_with_d,
    euler_correction, euler_derivation_apply, rho2_form, solve_h_alpha, EulerData, EulerError, PotentialChoice,
};
use crate::fedosov::{FedosovError, FedosovState};
use crate::forms::VectorField;
use crate::random::{Sampler, Shape};
use crate::scalar::{rat, NuSeries, Scalar};
use crate::symmetry::{check_antiautomorphism, Mode};
use crate::weyl::{monomial_generators, WeylElement};

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub seed: u64,
    pub samples: usize,
    pub test_degree: u32,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { seed: 1, samples: 20, test_degree: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Hodge,
    DSquare,
    Assoc,
    Cartan,
    Euler,
    DelignePair,
    C2,
    Symmetry,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Hodge,
        Suite::DSquare,
        Suite::Assoc,
        Suite::Cartan,
        Suite::Euler,
        Suite::DelignePair,
        Suite::C2,
        Suite::Symmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hodge => "hodge",
            Suite::DSquare => "dsquare",
            Suite::Assoc => "assoc",
            Suite::Cartan => "cartan",
            Suite::Euler => "euler",
            Suite::DelignePair => "deligne-pair",
            Suite::C2 => "c2",
            Suite::Symmetry => "symmetry",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Euler(#[from] EulerError),
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
}

use crate::report::Report;

/// The two potential choices compared by the pair suite; a single configured
/// choice is paired with its gauge shift by `d(x1 x_n)` and `ν d(x1²)`.
pub fn pair_choices(st: &FedosovState, choices: &[PotentialChoice]) -> Result<(PotentialChoice, PotentialChoice), EulerError> {
    let a = choices.first().cloned().map_or_else(|| PotentialChoice::radial("auto", &st.chart, &st.pd), Ok)?;
    let b = match choices.get(1) {
        Some(b) => b.clone(),
        None => {
            let last = st.dim() - 1;
            let f = &Scalar::var(0) * &Scalar::var(last);
            let g = NuSeries::monomial(1, Scalar::var(0).pow(2));
            a.shifted(format!("{}+shift", a.label), &st.chart, &st.pd, &f, &g)?
        }
    };
    Ok((a, b))
}

pub fn run_suite(
    st: &FedosovState,
    choices: &[PotentialChoice],
    suite: Suite,
    p: &SuiteParams,
) -> Result<Report, SuiteError> {
    let dim = st.dim();
    let cap = st.cap();
    let mut rng = Sampler::new(p.seed, dim);
    let mut rep = Report::new();
    match suite {
        Suite::Hodge => {
            let samples: Vec<WeylElement> = (0..p.samples * 10).map(|_| rng.weyl(&Shape::default(), cap)).collect();
            rep.weyl_family(
                "a = delta delta^-1 a + delta^-1 delta a + sigma(a)",
                samples.iter().map(|a| {
                    let sigma = WeylElement::nu_series(&a.sigma(), dim, cap);
                    (a.to_string(), a.delta_inv().delta().add(&a.delta().delta_inv()).add(&sigma), a.clone())
                }),
            );
            rep.weyl_family("delta^2 = 0", samples.iter().map(|a| (a.to_string(), a.delta().delta(), st.zero())));
            rep.weyl_family(
                "(delta^-1)^2 = 0",
                samples.iter().map(|a| (a.to_string(), a.delta_inv().delta_inv(), st.zero())),
            );
        }
        Suite::DSquare => {
            let valid = cap.saturating_sub(2);
            rep.weyl_family(
                "D^2 = 0 (mod Deg > N-2)",
                monomial_generators(dim, 3, cap)
                    .iter()
                    .map(|a| (a.to_string(), st.fedosov_d(&st.fedosov_d(a)).truncate(valid), st.zero())),
            );
        }
        Suite::Assoc => {
            let trip: Vec<[NuSeries; 3]> = (0..p.samples)
                .map(|_| std::array::from_fn(|_| rng.scalar(p.test_degree, 3, false).into()))
                .collect();
            rep.series_family(
                "(f*g)*h = f*(g*h)",
                trip.iter().map(|[f, g, h]| {
                    (format!("({f}, {g}, {h})"), st.star(&st.star(f, g), h), st.star(f, &st.star(g, h)))
                }),
            );
            let one: NuSeries = Scalar::one().into();
            rep.series_family(
                "1*f = f = f*1",
                trip.iter().flat_map(|[f, _, _]| {
                    [(f.to_string(), st.star(&one, f), f.clone()), (f.to_string(), st.star(f, &one), f.clone())]
                }),
            );
            let pairs: Vec<(Scalar, Scalar)> =
                (0..p.samples).map(|_| (rng.scalar(p.test_degree, 3, true), rng.scalar(p.test_degree, 3, true))).collect();
            rep.series_family(
                "C1(f,g) = 1/2 {f,g}",
                pairs.iter().map(|(f, g)| {
                    let c1 = st.star_scalar(f, g).coeff(1);
                    let half = st.pd.bracket(f, g).scale_rat(&rat(1, 2));
                    (format!("({f}, {g})"), c1.into(), half.into())
                }),
            );
        }
        Suite::Cartan => {
            let last = dim - 1;
            let x1 = Scalar::var(0);
            let xn = Scalar::var(last);
            let mut fields = vec![VectorField::coordinate(dim, 0)];
            let mut v = VectorField::zero(dim);
            v.0[last] = x1.clone();
            fields.push(v);
            let mut v = VectorField::zero(dim);
            v.0[0] = xn.pow(2);
            v.0[last] = &x1 * &xn;
            fields.push(v);
            for x in &fields {
                rep.extend(cartan_formula_check(st, x, None));
            }
            for f in [&x1.pow(2) * &xn, &(&x1 * &xn.pow(2)) + &x1.pow(3)] {
                rep.extend(cartan_formula_check(st, &st.pd.hamiltonian(&f), Some(&f)));
            }
        }
        Suite::Euler => {
            let choice = match choices.first() {
                Some(c) => c.clone(),
                None => PotentialChoice::radial("auto", &st.chart, &st.pd)?,
            };
            let e = solve_h_alpha(st, &choice)?;
            rep.extend(e.report.clone());
            let order = EulerData::valid_orders(st);
            let pairs: Vec<(NuSeries, NuSeries)> = (0..p.samples)
                .map(|_| (rng.scalar(p.test_degree - 1, 2, true).into(), rng.scalar(p.test_degree - 1, 2, true).into()))
                .collect();
            rep.series_family(
                "E(f*g) = Ef*g + f*Eg",
                pairs.iter().map(|(f, g)| {
                    let lhs = euler_derivation_apply(st, &e, &st.star(f, g));
                    let ef = euler_derivation_apply(st, &e, f);
                    let eg = euler_derivation_apply(st, &e, g);
                    (format!("({f}, {g})"), lhs, st.star(&ef, g).add(&st.star(f, &eg)).truncate(order))
                }),
            );
            rep.series_family(
                "E - nu d/dnu - L_xi starts at nu^1",
                pairs.iter().map(|(f, _)| {
                    let c = euler_correction(st, &e, f);
                    (f.to_string(), c.truncate(1), NuSeries::zero())
                }),
            );
            rep.extend(euler_commutes_with_d(st, &e));
        }
        Suite::DelignePair => {
            let (a, b) = pair_choices(st, choices)?;
            let ea = solve_h_alpha(st, &a)?;
            let eb = solve_h_alpha(st, &b)?;
            let tests: Vec<Scalar> = (0..p.samples).map(|_| rng.scalar(p.test_degree, 3, true)).collect();
            let (_, r) = deligne_pair_check(st, &ea, &eb, &tests)?;
            rep.extend(r);
        }
        Suite::C2 => {
            let rho = rho2_form(st);
            let pairs: Vec<(Scalar, Scalar)> =
                (0..p.samples).map(|_| (rng.scalar(p.test_degree, 2, false), rng.scalar(p.test_degree, 2, false))).collect();
            let mut cases = Vec::new();
            for (f, g) in &pairs {
                let lhs = c2_minus(st, f, g)?;
                let rhs = rho.eval2(&st.pd.hamiltonian(f), &st.pd.hamiltonian(g));
                cases.push((format!("({f}, {g})"), lhs.into(), rhs.into()));
            }
            rep.series_family("C2^-(f,g) = -1/2(Omega_1 + d s_1)(X_f, X_g)", cases);
            rep.extend(characteristic_form(st)?.report);
        }
        Suite::Symmetry => {
            rep.extend(check_antiautomorphism(st, Mode::P, p.test_degree));
            rep.extend(check_antiautomorphism(st, Mode::C, p.test_degree));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::ChartData;

    #[test]
    fn every_suite_passes_on_moyal() {
        let st = FedosovState::new(ChartData::flat(2, 6)).unwrap();
        let p = SuiteParams { samples: 4, ..SuiteParams::default() };
        for s in Suite::ALL {
            let rep = run_suite(&st, &[], s, &p).unwrap();
            assert!(!rep.checks.is_empty(), "{s}");
            assert!(rep.all_pass(), "{s}: {rep}");
        }
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
