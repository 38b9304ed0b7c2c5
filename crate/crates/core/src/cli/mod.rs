//! Command-line front end. Exit status: 0 when every check passes, 1 when a
//! check fails, 2 on usage, configuration or evaluation errors.

pub mod cache;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::euler::characteristic_form;
use crate::fedosov::FedosovState;
use crate::report::Report;
use crate::scalar::{parse_nu_series, parse_scalar, Scalar};
use crate::suites::{run_suite, Suite};
use crate::symmetry::{parse_operator, symmetrize_equivalence, Mode};

use config::{load_config, Config, ConfigError};

#[derive(Debug, Parser)]
#[command(name = "fedosov", version, about = "Exact Fedosov star products on a symplectic chart")]
pub struct Cli {
    /// Chart configuration (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Solved-state cache; read when current, rewritten otherwise.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the chart identities and list the potential choices.
    Validate,
    /// Solve for r and print it.
    Solve,
    /// Print f * g.
    Star {
        #[arg(short)]
        f: String,
        #[arg(short)]
        g: String,
    },
    /// Print C_k(f, g), or the matrix C_k(x^a, x^b) when f and g are omitted.
    Ck {
        #[arg(short)]
        k: usize,
        #[arg(short, requires = "g")]
        f: Option<String>,
        #[arg(short, requires = "f")]
        g: Option<String>,
    },
    /// Run an identity suite (or `all`).
    Verify { suite: String },
    /// Print the characteristic form series and certify it against C2^-.
    Class,
    /// Symmetrise a self-equivalence of the configured star product.
    Symmetrize {
        #[arg(short = 'T')]
        t: PathBuf,
        #[arg(long)]
        mode: Mode,
        /// Highest monomial degree in the operator test set.
        #[arg(long, default_value_t = 3)]
        test_degree: u32,
    },
}

/// A failure that ends the command with exit status 2.
#[derive(Debug)]
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

struct Ctx<'a, O, E> {
    cli: &'a Cli,
    cfg: Config,
    out: &'a mut O,
    err: &'a mut E,
}

impl<O: Write, E: Write> Ctx<'_, O, E> {
    fn state(&mut self) -> Result<FedosovState, Fatal> {
        let chart = self.cfg.chart.clone();
        match &self.cli.cache {
            None => Ok(FedosovState::new(chart)?),
            Some(path) => {
                let (st, stale) = cache::load_or_solve(chart, path)?;
                match stale {
                    None => writeln!(self.err, "cache: loaded {}", path.display())?,
                    Some(cache::Stale::Missing) => writeln!(self.err, "cache: wrote {}", path.display())?,
                    Some(why) => writeln!(self.err, "cache: invalidated {} ({why}); recomputed", path.display())?,
                }
                Ok(st)
            }
        }
    }

    fn scalar(&self, text: &str) -> Result<Scalar, Fatal> {
        Ok(parse_scalar(text, self.cfg.chart.dim)?)
    }

    fn report(&mut self, title: &str, rep: &Report) -> Result<i32, Fatal> {
        write!(self.out, "{rep}")?;
        let total = rep.checks.len();
        match rep.failures().next() {
            None => {
                writeln!(self.out, "{title}: PASS ({total} checks)")?;
                Ok(0)
            }
            Some(first) => {
                let n = rep.failures().count();
                writeln!(self.out, "{title}: FAIL ({n} of {total} checks failed)")?;
                writeln!(self.err, "first failure: {} ({})", first.name, first.detail)?;
                Ok(1)
            }
        }
    }

    fn run(&mut self) -> Result<i32, Fatal> {
        match &self.cli.command {
            Command::Validate => {
                writeln!(self.out, "PASS chart valid")?;
                for p in &self.cfg.potentials {
                    writeln!(self.out, "potential {}: theta = {}", p.label, p.theta)?;
                    writeln!(self.out, "potential {}: Theta = {}", p.label, p.big_theta)?;
                    writeln!(self.out, "potential {}: xi = {}", p.label, p.xi)?;
                }
                Ok(0)
            }
            Command::Solve => {
                let st = self.state()?;
                writeln!(self.out, "cap {}", st.cap())?;
                writeln!(self.out, "max order {}", st.max_order())?;
                writeln!(self.out, "r = {}", st.r)?;
                Ok(0)
            }
            Command::Star { f, g } => {
                let dim = self.cfg.chart.dim;
                let (f, g) = (parse_nu_series(f, dim)?, parse_nu_series(g, dim)?);
                let st = self.state()?;
                writeln!(self.out, "{}", st.star(&f, &g))?;
                Ok(0)
            }
            Command::Ck { k, f, g } => {
                let pairs = match (f, g) {
                    (Some(f), Some(g)) => vec![(None, self.scalar(f)?, self.scalar(g)?)],
                    _ => {
                        let dim = self.cfg.chart.dim;
                        let mut v = Vec::new();
                        for a in 0..dim {
                            for b in 0..dim {
                                v.push((Some((a + 1, b + 1)), Scalar::var(a), Scalar::var(b)));
                            }
                        }
                        v
                    }
                };
                let st = self.state()?;
                for (label, f, g) in pairs {
                    let c = st.extract_ck(*k, &f, &g).map_err(|e| {
                        Fatal(format!("{e}; C_k is certified only for k <= floor(N/2) = {}", st.max_order()))
                    })?;
                    match label {
                        Some((a, b)) => writeln!(self.out, "C{k}(x{a}, x{b}) = {c}")?,
                        None => writeln!(self.out, "{c}")?,
                    }
                }
                Ok(0)
            }
            Command::Verify { suite } => {
                let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
                let st = self.state()?;
                let mut status = 0;
                for s in suites {
                    let rep = run_suite(&st, &self.cfg.potentials, s, &self.cfg.suite)?;
                    status = status.max(self.report(&format!("verify {s}"), &rep)?);
                }
                Ok(status)
            }
            Command::Class => {
                let st = self.state()?;
                let cf = characteristic_form(&st)?;
                write!(self.out, "{cf}")?;
                self.report("class", &cf.report)
            }
            Command::Symmetrize { t, mode, test_degree } => {
                let text = std::fs::read_to_string(t).map_err(|e| Fatal(format!("cannot read {}: {e}", t.display())))?;
                let op = parse_operator(&text)?;
                if op.dim() != self.cfg.chart.dim {
                    return Err(Fatal(format!("operator dim {} does not match chart dim {}", op.dim(), self.cfg.chart.dim)));
                }
                let st = self.state()?;
                let (s, rep) = symmetrize_equivalence(&op, &st, &st, *mode, *test_degree)?;
                write!(self.out, "{s}")?;
                self.report(&format!("symmetrize {mode}"), &rep)
            }
        }
    }
}

/// Parse `args` and run the command, writing the report to `out` and notices
/// and errors to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(ConfigError::Invalid(rep)) if matches!(cli.command, Command::Validate) => {
            let _ = write!(out, "{rep}");
            return 1;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut ctx = Ctx { cli: &cli, cfg, out, err };
    match ctx.run() {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            2
        }
    }
}
