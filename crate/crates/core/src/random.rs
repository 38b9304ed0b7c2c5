//! Seeded generators for random polynomials and Weyl elements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::VectorField;
use crate::scalar::{GaussianRational, Monomial, Scalar};
use crate::weyl::{WeylElement, WeylKey};

/// Shape bounds for random Weyl elements.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_symdeg: u32,
    pub max_antideg: u32,
    pub max_nu: u32,
    pub max_coeff_deg: u32,
    pub max_terms: usize,
    pub complex: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_symdeg: 3, max_antideg: 2, max_nu: 1, max_coeff_deg: 2, max_terms: 4, complex: false }
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
    dim: usize,
}

impl Sampler {
    pub fn new(seed: u64, dim: usize) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn below(&mut self, n: u32) -> u32 {
        self.rng.gen_range(0..=n)
    }

    pub fn coefficient(&mut self, complex: bool) -> GaussianRational {
        let pick = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(-5i64..=5);
            let d = rng.gen_range(1i64..=3);
            GaussianRational::from_frac(n, d)
        };
        let re = pick(&mut self.rng);
        if complex && self.rng.gen_bool(0.5) {
            let im = pick(&mut self.rng);
            &re + &(&im * &GaussianRational::i())
        } else if re.is_zero() {
            GaussianRational::one()
        } else {
            re
        }
    }

    pub fn monomial(&mut self, max_deg: u32) -> Monomial {
        let deg = self.rng.gen_range(0..=max_deg);
        let mut exps = vec![0u32; self.dim];
        for _ in 0..deg {
            exps[self.rng.gen_range(0..self.dim)] += 1;
        }
        Monomial::from_exponents(exps)
    }

    pub fn scalar(&mut self, max_deg: u32, max_terms: usize, complex: bool) -> Scalar {
        let n = self.rng.gen_range(1..=max_terms);
        let mut out = Scalar::zero();
        for _ in 0..n {
            let c = self.coefficient(complex);
            let m = self.monomial(max_deg);
            out.add_assign_ref(&Scalar::monomial(c, m));
        }
        out
    }

    pub fn vector_field(&mut self, max_deg: u32) -> VectorField {
        VectorField((0..self.dim).map(|_| self.scalar(max_deg, 2, false)).collect())
    }

    pub fn key(&mut self, shape: &Shape) -> WeylKey {
        let k = self.rng.gen_range(0..=shape.max_symdeg);
        let l = self.rng.gen_range(0..=shape.max_antideg.min(self.dim as u32));
        let nu = self.rng.gen_range(0..=shape.max_nu);
        let mut sym: Vec<u8> = (0..k).map(|_| self.rng.gen_range(0..self.dim) as u8).collect();
        sym.sort_unstable();
        let mut pool: Vec<u8> = (0..self.dim as u8).collect();
        let mut anti = Vec::new();
        for _ in 0..l {
            let at = self.rng.gen_range(0..pool.len());
            anti.push(pool.remove(at));
        }
        anti.sort_unstable();
        WeylKey::new(nu, sym, anti)
    }

    pub fn weyl(&mut self, shape: &Shape, cap: u32) -> WeylElement {
        let mut out = WeylElement::zero(self.dim, cap);
        let n = self.rng.gen_range(1..=shape.max_terms);
        for _ in 0..n {
            let key = self.key(shape);
            let c = self.scalar(shape.max_coeff_deg, 2, shape.complex);
            out.add_term(key, &c);
        }
        out
    }

    /// A term with fixed symmetric and antisymmetric degree.
    pub fn homogeneous(&mut self, symdeg: u32, antideg: u32, nu: u32, cap: u32) -> WeylElement {
        let shape = Shape { max_symdeg: 0, max_antideg: 0, max_nu: 0, ..Shape::default() };
        let mut out = WeylElement::zero(self.dim, cap);
        for _ in 0..2 {
            let mut key = self.key(&shape);
            key.nu = nu;
            key.sym = (0..symdeg).map(|_| self.rng.gen_range(0..self.dim) as u8).collect();
            key.sym.sort_unstable();
            let mut pool: Vec<u8> = (0..self.dim as u8).collect();
            key.anti = (0..antideg.min(self.dim as u32))
                .map(|_| pool.remove(self.rng.gen_range(0..pool.len())))
                .collect();
            key.anti.sort_unstable();
            let c = self.scalar(2, 2, false);
            out.add_term(key, &c);
        }
        out
    }
}
