//! Acceptance criteria, one PASS/FAIL line each. Every comparison is exact.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use common::{moyal, s};
use fedosov::cli::config::{load_config, Config};
use fedosov::euler::{
    c2_minus, deligne_pair_check, euler_commutes_with_d, euler_derivation_apply, solve_h_alpha, EulerData,
    PotentialChoice,
};
use fedosov::fedosov::{ChartData, FedosovState};
use fedosov::forms::Form;
use fedosov::random::Sampler;
use fedosov::report::Report;
use fedosov::scalar::{rat, NuSeries, Scalar};
use fedosov::suites::{run_suite, Suite};
use fedosov::symmetry::{
    build_weyl_type_data, certify_weyl_type, inner_derivation, monomials, symmetrize_equivalence, Mode,
};
use fedosov::weyl::{monomial_generators, parse_weyl};

fn fixture(name: &str) -> Config {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn solve(cfg: &Config) -> FedosovState {
    FedosovState::new(cfg.chart.clone()).unwrap()
}

/// `{f, g}` for `Λ^{12} = 1`.
fn darboux_bracket(f: &Scalar, g: &Scalar) -> Scalar {
    &(&f.partial(0) * &g.partial(1)) - &(&f.partial(1) * &g.partial(0))
}

fn vol(c: &str) -> Form {
    let mut f = Form::zero(2, 2);
    f.add_component(&[0, 1], &s(c));
    f
}

fn pairs(rng: &mut Sampler, n: usize, deg: u32, complex: bool) -> Vec<(Scalar, Scalar)> {
    (0..n).map(|_| (rng.scalar(deg, 3, complex), rng.scalar(deg, 3, complex))).collect()
}

fn moyal_oracle() -> Report {
    let cfg = fixture("flat2d.toml");
    let st = solve(&cfg);
    assert_eq!(st.cap(), 8);
    let mons = monomials(2, 4);
    let mut rep = Report::new();
    rep.series_family(
        "f * g = Moyal through nu^4, monomials of degree <= 4",
        mons.iter().flat_map(|f| mons.iter().map(move |g| (f, g))).map(|(f, g)| {
            (format!("({f}, {g})"), st.star_scalar(f, g), moyal(f, g, &st.pd, 4))
        }),
    );
    rep
}

fn fedosov_flatness() -> Report {
    let st = solve(&fixture("curved2d.toml"));
    assert_eq!(st.cap(), 6);
    let mut rep = Report::new();
    rep.weyl_family(
        "D^2 = 0 mod Deg > N-2, generators of Deg <= 3",
        monomial_generators(2, 3, st.cap())
            .iter()
            .map(|a| (a.to_string(), st.fedosov_d(&st.fedosov_d(a)).truncate(st.cap() - 2), st.zero())),
    );
    rep
}

fn associativity() -> Report {
    let cfg = fixture("curved2d.toml");
    let st = solve(&cfg);
    let mut rng = Sampler::new(cfg.suite.seed, 2);
    let trip: Vec<[NuSeries; 3]> =
        (0..20).map(|_| std::array::from_fn(|_| rng.scalar(3, 3, false).into())).collect();
    let mut rep = Report::new();
    rep.series_family(
        "(f*g)*h = f*(g*h) mod nu^4",
        trip.iter().map(|[f, g, h]| {
            let lhs = st.star(&st.star(f, g), h).truncate(4);
            let rhs = st.star(f, &st.star(g, h)).truncate(4);
            (format!("({f}, {g}, {h})"), lhs, rhs)
        }),
    );
    rep
}

fn first_order() -> Report {
    let cfg = fixture("curved2d.toml");
    let st = solve(&cfg);
    let mut rng = Sampler::new(cfg.suite.seed + 1, 2);
    let mut rep = Report::new();
    rep.series_family(
        "C1(f,g) = 1/2 {f,g} on 50 pairs",
        pairs(&mut rng, 50, 3, true).iter().map(|(f, g)| {
            let c1 = st.star_scalar(f, g).coeff(1);
            (format!("({f}, {g})"), c1.into(), darboux_bracket(f, g).scale_rat(&rat(1, 2)).into())
        }),
    );
    rep
}

fn c2_antisymmetric() -> Report {
    let mut omega_only = ChartData::flat(2, 6);
    omega_only.big_omega.set(1, vol("1 + x1*x2"));
    let mut s_only = ChartData::flat(2, 6);
    s_only.s = parse_weyl("ν * (x1^2*x2) * dx2 ⊗ 1", 2, 7).unwrap();
    let both = fixture("curved2d.toml").chart;
    let mut rep = Report::new();
    // (Omega_1 + d s_1) = c dx1∧dx2 evaluated on (X_f, X_g) is c {f, g}.
    for (name, chart, c) in [("Omega_1 only", omega_only, "1 + x1*x2"), ("s_1 only", s_only, "2*x1*x2"), ("both", both, "2 + x1*x2")] {
        let st = FedosovState::new(chart).unwrap();
        let mut rng = Sampler::new(99, 2);
        let mut cases = Vec::new();
        for (f, g) in pairs(&mut rng, 30, 3, false) {
            let fg = st.star_scalar(&f, &g).coeff(2);
            let gf = st.star_scalar(&g, &f).coeff(2);
            let lhs = (&fg - &gf).scale_rat(&rat(1, 2));
            let rhs = (&s(c) * &darboux_bracket(&f, &g)).scale_rat(&rat(-1, 2));
            let via_lib = c2_minus(&st, &f, &g).unwrap();
            cases.push((format!("({f}, {g})"), lhs.clone().into(), rhs.into()));
            cases.push((format!("c2_minus({f}, {g})"), via_lib.into(), lhs.into()));
        }
        rep.series_family(format!("C2^-(f,g) = -1/2(Omega_1 + d s_1)(X_f, X_g), {name}"), cases);
    }
    rep
}

fn euler_derivation() -> Report {
    let cfg = fixture("curved2d.toml");
    let st = solve(&cfg);
    assert!(!cfg.chart.big_omega.is_zero());
    let e = solve_h_alpha(&st, &cfg.potentials[0]).unwrap();
    let mut rep = e.report.clone();
    assert!(EulerData::valid_orders(&st) >= 3);
    let mut rng = Sampler::new(cfg.suite.seed + 2, 2);
    rep.series_family(
        "E(f*g) = Ef*g + f*Eg mod nu^3 on 20 pairs",
        pairs(&mut rng, 20, 2, true).into_iter().map(|(f, g)| {
            let (f, g): (NuSeries, NuSeries) = (f.into(), g.into());
            let lhs = euler_derivation_apply(&st, &e, &st.star(&f, &g)).truncate(3);
            let ef = euler_derivation_apply(&st, &e, &f);
            let eg = euler_derivation_apply(&st, &e, &g);
            (format!("({f}, {g})"), lhs, st.star(&ef, &g).add(&st.star(&f, &eg)).truncate(3))
        }),
    );
    rep.extend(euler_commutes_with_d(&st, &e));

    let flat = solve(&fixture("flat2d.toml"));
    let ef = solve_h_alpha(&flat, &PotentialChoice::radial("flat", &flat.chart, &flat.pd).unwrap()).unwrap();
    let x1x2: NuSeries = s("x1*x2").into();
    let expect: NuSeries = NuSeries::from_coeffs(vec![s("x1*x2"), s("1/2")]);
    let (x1, x2): (NuSeries, NuSeries) = (s("x1").into(), s("x2").into());
    let star = flat.star(&x1, &x2);
    rep.series_eq("flat: E(x1*x2) = x1x2 + nu/2", &euler_derivation_apply(&flat, &ef, &star), &expect);
    rep.series_eq("flat: E(x1 x2) = x1 x2", &euler_derivation_apply(&flat, &ef, &x1x2), &x1x2);
    rep
}

fn cartan() -> Report {
    let cfg = fixture("curved2d.toml");
    let st = solve(&cfg);
    let rep = run_suite(&st, &cfg.potentials, Suite::Cartan, &cfg.suite).unwrap();
    assert_eq!(rep.checks.len(), 3 + 2 * 2, "three general fields, two Hamiltonian ones in both forms");
    rep
}

fn deligne_pair() -> Report {
    let cfg = fixture("curved2d.toml");
    let st = solve(&cfg);
    let ea = solve_h_alpha(&st, &cfg.potentials[0]).unwrap();
    let eb = solve_h_alpha(&st, &cfg.potentials[1]).unwrap();
    let mut rng = Sampler::new(cfg.suite.seed + 3, 2);
    let tests: Vec<Scalar> = (0..20).map(|_| rng.scalar(3, 3, true)).collect();
    let (d, mut rep) = deligne_pair_check(&st, &ea, &eb, &tests).unwrap();
    rep.series_family(
        "(E_A - E_B)g = (1/nu)(d*g - g*d) mod nu^3 on 20 functions",
        tests.iter().map(|g| {
            let g: NuSeries = g.clone().into();
            let lhs = euler_derivation_apply(&st, &ea, &g).sub(&euler_derivation_apply(&st, &eb, &g)).truncate(3);
            let comm = st.star(&d, &g).sub(&st.star(&g, &d));
            assert!(comm.coeff(0).is_zero());
            let rhs = comm.shift_down().unwrap().truncate(3);
            (g.to_string(), lhs, rhs)
        }),
    );
    rep
}

fn weyl_type_data() -> Report {
    let mut curved = ChartData::flat(2, 6);
    curved.gamma[1][0][0] = s("x1*x2");
    let zero = Form::zero(2, 2);
    let mons = monomials(2, 3);
    let mut rep = Report::new();
    for (mode, target) in [
        (Mode::P, vec![zero.clone(), vol("x1^2 + 1")]),
        (Mode::C, vec![vol("i*x2"), vol("x1^2 + 1")]),
        (Mode::Weyl, vec![zero, vol("3 + x2")]),
    ] {
        let mut chart = curved.clone();
        let d = build_weyl_type_data(&target, mode, 2, chart.cap).unwrap();
        chart.big_omega = d.big_omega;
        chart.s = d.s;
        let st = FedosovState::new(chart).unwrap();
        let mut certified = certify_weyl_type(&st, mode, 3);
        for c in certified.checks.iter_mut() {
            c.name = format!("{mode}: {}", c.name);
        }
        rep.extend(certified);
        let grid = || mons.iter().flat_map(|f| mons.iter().map(move |g| (f.clone(), g.clone())));
        if matches!(mode, Mode::P | Mode::Weyl) {
            rep.series_family(
                format!("{mode}: (f*g)(-nu) = g*f mod nu^3"),
                grid().map(|(f, g)| {
                    let lhs = st.star_scalar(&f, &g).parity().truncate(3);
                    (format!("({f}, {g})"), lhs, st.star_scalar(&g, &f).truncate(3))
                }),
            );
        }
        if matches!(mode, Mode::C | Mode::Weyl) {
            rep.series_family(
                format!("{mode}: conj(conj f * conj g) = g*f mod nu^3"),
                grid().map(|(f, g)| {
                    let lhs = st.star_scalar(&f.conj(), &g.conj()).conjugate().truncate(3);
                    (format!("({f}, {g})"), lhs, st.star_scalar(&g, &f).truncate(3))
                }),
            );
        }
    }
    rep
}

fn symmetrization() -> Report {
    let st = solve(&fixture("flat2d.toml"));
    let mons = monomials(2, 3);
    let mut rng = Sampler::new(2024, 2);
    let mut rep = Report::new();
    for mode in [Mode::P, Mode::C, Mode::Weyl] {
        let h = rng.scalar(3, 3, true);
        let t = inner_derivation(&st, &h, 3).unwrap().nu_shift().exp().unwrap();
        let (sym, lib) = match symmetrize_equivalence(&t, &st, &st, mode, 3) {
            Ok(x) => x,
            Err(e) => {
                rep.push(format!("{mode}: symmetrize T = exp(nu D), H = {h}"), false, e.to_string());
                continue;
            }
        };
        for c in lib.checks {
            rep.push(format!("{mode}: {}", c.name), c.pass, c.detail);
        }
        let grid = || mons.iter().flat_map(|f| mons.iter().map(move |g| (f.clone(), g.clone())));
        rep.series_family(
            format!("{mode}: S(f*g) = Sf*Sg mod nu^4 (Moyal closed form)"),
            grid().map(|(f, g)| {
                let lhs = sym.apply_series(&moyal(&f, &g, &st.pd, 4)).truncate(4);
                let (sf, sg) = (sym.apply(&f), sym.apply(&g));
                let mut rhs = NuSeries::zero();
                for (i, a) in sf.coeffs().iter().enumerate() {
                    for (j, b) in sg.coeffs().iter().enumerate() {
                        rhs = rhs.add(&moyal(a, b, &st.pd, 4).shift_up(i + j));
                    }
                }
                (format!("({f}, {g})"), lhs, rhs.truncate(4))
            }),
        );
        if matches!(mode, Mode::P | Mode::Weyl) {
            rep.series_family(
                format!("{mode}: P S P = S mod nu^4"),
                mons.iter().map(|f| (f.to_string(), sym.apply(f).parity().truncate(4), sym.apply(f).truncate(4))),
            );
        }
        if matches!(mode, Mode::C | Mode::Weyl) {
            rep.series_family(
                format!("{mode}: C S C = S mod nu^4"),
                mons.iter().map(|f| (f.to_string(), sym.apply(f).conjugate().truncate(4), sym.apply(f).truncate(4))),
            );
        }
    }
    rep
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Report); 10] = [
        ("1 Moyal oracle on flat2d", moyal_oracle),
        ("2 D^2 = 0 on curved2d", fedosov_flatness),
        ("3 associativity mod nu^4 on curved2d", associativity),
        ("4 C1 = 1/2 {f,g}", first_order),
        ("5 C2^- in three configurations", c2_antisymmetric),
        ("6 Euler derivation and [D, E] = 0", euler_derivation),
        ("7 deformed Cartan formula", cartan),
        ("8 Deligne pair", deligne_pair),
        ("9 Weyl-type data in each mode", weyl_type_data),
        ("10 symmetrisation in each mode", symmetrization),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(rep) if rep.all_pass() => println!("PASS {name} ({} checks, {secs:.1}s)", rep.checks.len()),
            Ok(rep) => {
                failed += 1;
                let first = rep.failures().next().unwrap();
                println!("FAIL {name}: {} ({})", first.name, first.detail);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
