//! Pauli strings, k-local observables and their measurement.
//!
//! Site `i` of a string acts on bit `i` of the basis index. String labels
//! are written site 0 first, so `"XI"` is X on site 0 of two sites.

mod measure;

pub use measure::{
    chernoff_trials, norm_tolerance, operator_expectation, pauli_quadratic_form, sample_from_expectation,
    sample_sigma, sigma_expectation_exact,
    sum_quadratic_form, ChernoffPlan, ExpectationReport, MeasureMode, SampleOutcome, TermReport,
};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// `<row| P |col>` for single-qubit basis states.
    pub fn entry(self, row: usize, col: usize) -> Complex64 {
        let (r, c) = (row & 1, col & 1);
        match self {
            Pauli::I => Complex64::new((r == c) as u8 as f64, 0.0),
            Pauli::X => Complex64::new((r != c) as u8 as f64, 0.0),
            Pauli::Y => match (r, c) {
                (0, 1) => Complex64::new(0.0, -1.0),
                (1, 0) => Complex64::new(0.0, 1.0),
                _ => Complex64::default(),
            },
            Pauli::Z => match (r, c) {
                (0, 0) => Complex64::new(1.0, 0.0),
                (1, 1) => Complex64::new(-1.0, 0.0),
                _ => Complex64::default(),
            },
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-site Pauli factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Self {
        PauliString { factors }
    }

    pub fn identity(n: usize) -> Self {
        PauliString {
            factors: vec![Pauli::I; n],
        }
    }

    /// `p` on `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.factors[site] = p;
        s
    }

    pub fn n_sites(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    /// Number of non-identity factors.
    pub fn locality(&self) -> usize {
        self.factors.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bits flipped by the string (sites with X or Y).
    pub fn flip_mask(&self) -> usize {
        self.mask_of(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Sites whose factor is not the identity.
    pub fn support_mask(&self) -> usize {
        self.mask_of(|p| p != Pauli::I)
    }

    fn mask_of(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, &p)| pred(p))
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    /// `sigma |col> = phase |col ^ flip_mask>`.
    pub fn act(&self, col: usize) -> (usize, Complex64) {
        let mut phase = Complex64::new(1.0, 0.0);
        for (i, &p) in self.factors.iter().enumerate() {
            let bit = (col >> i) & 1;
            phase *= p.entry(bit ^ matches!(p, Pauli::X | Pauli::Y) as usize, bit);
        }
        (col ^ self.flip_mask(), phase)
    }

    /// `sigma x` on a dense vector of length `2^n`.
    pub fn apply_dense(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); x.len()];
        for (col, &v) in x.iter().enumerate() {
            let (row, phase) = self.act(col);
            out[row] += phase * v;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n_sites();
        let mut m = vec![vec![Complex64::default(); dim]; dim];
        for col in 0..dim {
            let (row, phase) = self.act(col);
            m[row][col] = phase;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.factors.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Domain(format!("'{other}' is not a Pauli factor"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString::new)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub beta: f64,
    pub string: PauliString,
}

/// `sum_j beta_j sigma_j` with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub n_sites: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.string.n_sites() != n_sites) {
            return Err(Error::DimensionMismatch {
                expected: n_sites,
                found: t.string.n_sites(),
            });
        }
        Ok(PauliSum { n_sites, terms })
    }

    pub fn single(beta: f64, string: PauliString) -> Self {
        PauliSum {
            n_sites: string.n_sites(),
            terms: vec![PauliTerm { beta, string }],
        }
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.beta.abs()).sum()
    }

    pub fn max_locality(&self) -> usize {
        self.terms.iter().map(|t| t.string.locality()).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n_sites;
        let mut m = vec![vec![Complex64::default(); dim]; dim];
        for t in &self.terms {
            for col in 0..dim {
                let (row, phase) = t.string.act(col);
                m[row][col] += phase * t.beta;
            }
        }
        m
    }
}

/// One cluster of a k-local observable: a dense block on a set of sites.
/// Local index bit `b` is site `sites[b]`; `matrix` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub sites: Vec<usize>,
    pub matrix: Vec<Vec<Complex64>>,
}

/// Tensor product of cluster blocks, identity on every other site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KLocalSpec {
    pub n_sites: usize,
    pub clusters: Vec<Cluster>,
}

impl KLocalSpec {
    pub fn locality(&self) -> usize {
        self.clusters.iter().map(|c| c.sites.len()).sum()
    }

    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n_sites];
        for (ci, c) in self.clusters.iter().enumerate() {
            let dim = 1usize << c.sites.len();
            if c.matrix.len() != dim || c.matrix.iter().any(|r| r.len() != dim) {
                return Err(Error::Domain(format!(
                    "cluster {ci}: block must be {dim}x{dim} for {} sites",
                    c.sites.len()
                )));
            }
            for &s in &c.sites {
                if s >= self.n_sites {
                    return Err(Error::IndexOutOfRange {
                        index: s,
                        dim: self.n_sites,
                    });
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::Domain(format!("site {s} appears in more than one cluster")));
                }
            }
            let scale = c.matrix.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            for r in 0..dim {
                for col in r..dim {
                    if (c.matrix[r][col] - c.matrix[col][r].conj()).norm() > 1e-12 * scale.max(1.0) {
                        return Err(Error::NonHermitianBlock { cluster: ci });
                    }
                }
            }
        }
        Ok(())
    }

    /// Dense `2^n x 2^n` operator.
    pub fn to_dense(&self) -> Result<Vec<Vec<Complex64>>> {
        self.validate()?;
        let dim = 1usize << self.n_sites;
        let local = |c: &Cluster, idx: usize| -> usize {
            c.sites.iter().enumerate().fold(0, |acc, (b, &s)| acc | (((idx >> s) & 1) << b))
        };
        let mut covered = 0usize;
        for c in &self.clusters {
            for &s in &c.sites {
                covered |= 1 << s;
            }
        }
        let mut m = vec![vec![Complex64::default(); dim]; dim];
        for (r, row) in m.iter_mut().enumerate() {
            for (col, out) in row.iter_mut().enumerate() {
                if (r ^ col) & !covered != 0 {
                    continue;
                }
                *out = self
                    .clusters
                    .iter()
                    .fold(Complex64::new(1.0, 0.0), |acc, c| acc * c.matrix[local(c, r)][local(c, col)]);
            }
        }
        Ok(m)
    }
}

/// Expand every cluster in the tensor-Pauli basis, `beta_P = Tr(P M) / 2^s`,
/// multiply the expansions out across clusters, and drop terms with
/// `|beta| < 2^-frac_bits`.
pub fn pauli_decompose(spec: &KLocalSpec, frac_bits: u32) -> Result<PauliSum> {
    spec.validate()?;
    let threshold = 2f64.powi(-(frac_bits as i32));
    let mut terms = vec![(1.0, PauliString::identity(spec.n_sites))];
    for c in &spec.clusters {
        let local = local_expansion(c);
        let mut next = Vec::with_capacity(terms.len() * local.len());
        for (beta, string) in &terms {
            for (b, factors) in &local {
                let mut s = string.clone();
                for (&site, &p) in c.sites.iter().zip(factors) {
                    s.factors[site] = p;
                }
                next.push((beta * b, s));
            }
        }
        terms = next;
    }
    let terms = terms
        .into_iter()
        .filter(|(b, _)| b.abs() >= threshold)
        .map(|(beta, string)| PauliTerm { beta, string })
        .collect();
    PauliSum::new(spec.n_sites, terms)
}

fn local_expansion(c: &Cluster) -> Vec<(f64, Vec<Pauli>)> {
    let s = c.sites.len();
    let dim = 1usize << s;
    let mut out = Vec::new();
    for code in 0..(1usize << (2 * s)) {
        let factors: Vec<Pauli> = (0..s).map(|b| Pauli::ALL[(code >> (2 * b)) & 3]).collect();
        let string = PauliString::new(factors.clone());
        // Tr(P M) = sum_col P[row][col] M[col][row], one nonzero row per column
        let mut trace = Complex64::default();
        for col in 0..dim {
            let (row, phase) = string.act(col);
            trace += phase * c.matrix[col][row];
        }
        let beta = trace.re / dim as f64;
        if beta != 0.0 {
            out.push((beta, factors));
        }
    }
    out
}
