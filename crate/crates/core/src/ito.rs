//! Matrix representation of the generalized Itô algebra.
//!
//! An element for noise dimension `d` is a `(d+2) x (d+2)` complex matrix
//! with rows and columns ordered `(-, 1, .., d, +)`. The quantum stochastic
//! differential `dΛ_μ^ν` (μ in `{-, 1..d}`, ν in `{1..d, +}`) is the matrix
//! unit at row μ, column ν, so matrix multiplication realizes the
//! Hudson-Parthasarathy table `dΛ_μ^ι dΛ_κ^ν = δ_κ^ι dΛ_μ^ν`, with
//! `dΛ_-^+ = dt`. Entries in row `+` or column `-` are forbidden.
//!
//! For `d = 1` the canonical basis is `dt`, `e_-` (annihilation `dΛ_-`),
//! `e_+` (creation `dΛ^+`) and `e` (counting `dΛ`), and
//! `dw = e_- + e_+`, `dm = e_- + e_+ + e`.
//!
//! Coefficients are `f64` pairs; on integer inputs every product is exact.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

/// Row/column label in the Minkowski ordering `(-, 1..d, +)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MinkowskiIndex {
    Minus,
    Circle(usize),
    Plus,
}

impl MinkowskiIndex {
    fn position(self, d: usize) -> Result<usize> {
        match self {
            MinkowskiIndex::Minus => Ok(0),
            MinkowskiIndex::Circle(k) if (1..=d).contains(&k) => Ok(k),
            MinkowskiIndex::Plus => Ok(d + 1),
            other => Err(Error::IndexOutOfRange { index: other.to_string(), noise_dim: d }),
        }
    }

    fn from_position(p: usize, d: usize) -> Self {
        if p == 0 {
            MinkowskiIndex::Minus
        } else if p == d + 1 {
            MinkowskiIndex::Plus
        } else {
            MinkowskiIndex::Circle(p)
        }
    }

    fn is_lower(self) -> bool {
        !matches!(self, MinkowskiIndex::Plus)
    }

    fn is_upper(self) -> bool {
        !matches!(self, MinkowskiIndex::Minus)
    }
}

impl fmt::Display for MinkowskiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinkowskiIndex::Minus => f.write_str("-"),
            MinkowskiIndex::Circle(k) => write!(f, "{k}"),
            MinkowskiIndex::Plus => f.write_str("+"),
        }
    }
}

/// Named basis differentials for one-dimensional noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Dt,
    Dw,
    Dm,
    EMinus,
    EPlus,
    E,
}

impl Basis {
    pub const ALL: [Basis; 6] = [Basis::Dt, Basis::Dw, Basis::Dm, Basis::EMinus, Basis::EPlus, Basis::E];

    pub fn name(self) -> &'static str {
        match self {
            Basis::Dt => "dt",
            Basis::Dw => "dw",
            Basis::Dm => "dm",
            Basis::EMinus => "e_minus",
            Basis::EPlus => "e_plus",
            Basis::E => "e",
        }
    }

    pub fn element(self) -> ItoElement {
        let (m, c, p) = (MinkowskiIndex::Minus, MinkowskiIndex::Circle(1), MinkowskiIndex::Plus);
        let unit = |mu, nu| ItoElement::lambda(1, mu, nu).expect("valid d = 1 index");
        match self {
            Basis::Dt => unit(m, p),
            Basis::EMinus => unit(m, c),
            Basis::EPlus => unit(c, p),
            Basis::E => unit(c, c),
            Basis::Dw => &unit(m, c) + &unit(c, p),
            Basis::Dm => &(&unit(m, c) + &unit(c, p)) + &unit(c, c),
        }
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dt" => Basis::Dt,
            "dw" => Basis::Dw,
            "dm" => Basis::Dm,
            "e_minus" | "e_-" | "dLambda_-" => Basis::EMinus,
            "e_plus" | "e_+" | "dLambda^+" => Basis::EPlus,
            "e" | "dLambda" => Basis::E,
            other => return Err(Error::UnknownBasis(other.to_string())),
        })
    }
}

/// `basis("dw")` etc.; fails on unknown names.
pub fn basis(name: &str) -> Result<ItoElement> {
    Ok(name.parse::<Basis>()?.element())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItoElement {
    noise_dim: usize,
    matrix: Vec<C64>,
}

impl ItoElement {
    pub fn zero(noise_dim: usize) -> Self {
        assert!(noise_dim > 0, "noise dimension must be positive");
        let n = noise_dim + 2;
        Self { noise_dim, matrix: vec![C64::new(0.0, 0.0); n * n] }
    }

    /// The differential `dΛ_μ^ν`.
    pub fn lambda(noise_dim: usize, mu: MinkowskiIndex, nu: MinkowskiIndex) -> Result<Self> {
        if noise_dim == 0 {
            return Err(Error::EmptyDimension);
        }
        check_pair(noise_dim, mu, nu)?;
        let mut out = Self::zero(noise_dim);
        let (r, c) = (mu.position(noise_dim)?, nu.position(noise_dim)?);
        out.matrix[r * (noise_dim + 2) + c] = C64::new(1.0, 0.0);
        Ok(out)
    }

    pub fn dt(noise_dim: usize) -> Self {
        Self::lambda(noise_dim, MinkowskiIndex::Minus, MinkowskiIndex::Plus).expect("dt is valid")
    }

    /// Builds an element from a row-major `(d+2)^2` matrix, rejecting
    /// nonzero entries in row `+` or column `-`.
    pub fn from_matrix(noise_dim: usize, matrix: Vec<C64>) -> Result<Self> {
        if noise_dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let n = noise_dim + 2;
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: matrix.len() });
        }
        for r in 0..n {
            for c in 0..n {
                let z = matrix[r * n + c];
                if (r == n - 1 || c == 0) && (z.re != 0.0 || z.im != 0.0) {
                    return Err(Error::NotItoElement { row: r, col: c });
                }
            }
        }
        Ok(Self { noise_dim, matrix })
    }

    pub fn from_real_matrix(noise_dim: usize, matrix: &[f64]) -> Result<Self> {
        Self::from_matrix(noise_dim, matrix.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    #[inline]
    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn size(&self) -> usize {
        self.noise_dim + 2
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.size() + col]
    }

    /// Real parts as nested rows; exact for integer-valued elements.
    pub fn real_rows(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n).map(|r| (0..n).map(|c| self.entry(r, c).re).collect()).collect()
    }

    pub fn coefficient(&self, mu: MinkowskiIndex, nu: MinkowskiIndex) -> Result<C64> {
        check_pair(self.noise_dim, mu, nu)?;
        Ok(self.entry(mu.position(self.noise_dim)?, nu.position(self.noise_dim)?))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { noise_dim: self.noise_dim, matrix: self.matrix.iter().map(|z| z * s).collect() }
    }

    fn check_dim(&self, other: &ItoElement) -> Result<()> {
        if self.noise_dim != other.noise_dim {
            return Err(Error::DimensionMismatch { expected: self.noise_dim, found: other.noise_dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ItoElement) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &ItoElement) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, |a, b| a - b))
    }

    fn combine(&self, other: &ItoElement, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            noise_dim: self.noise_dim,
            matrix: self.matrix.iter().zip(&other.matrix).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Itô product `a · b` as a matrix product.
    pub fn multiply(&self, other: &ItoElement) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.size();
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.matrix[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.matrix[k * n + j];
                }
            }
        }
        Ok(Self { noise_dim: self.noise_dim, matrix: out })
    }

    /// Involution `a* = J a^dag J`, `J` swapping the `-` and `+` labels.
    pub fn star(&self) -> Self {
        let n = self.size();
        let flip = |p: usize| {
            if p == 0 {
                n - 1
            } else if p == n - 1 {
                0
            } else {
                p
            }
        };
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = self.matrix[flip(c) * n + flip(r)].conj();
            }
        }
        Self { noise_dim: self.noise_dim, matrix: out }
    }

    /// Commutator `ab - ba`.
    pub fn commutator(&self, other: &ItoElement) -> Result<Self> {
        self.multiply(other)?.try_sub(&other.multiply(self)?)
    }

    pub fn expansion(&self) -> ItoExpansion {
        ItoExpansion::from_element(self)
    }
}

impl core::ops::Add for &ItoElement {
    type Output = ItoElement;
    fn add(self, rhs: &ItoElement) -> ItoElement {
        self.try_add(rhs).expect("noise dimension mismatch")
    }
}

impl core::ops::Sub for &ItoElement {
    type Output = ItoElement;
    fn sub(self, rhs: &ItoElement) -> ItoElement {
        self.try_sub(rhs).expect("noise dimension mismatch")
    }
}

impl core::ops::Mul for &ItoElement {
    type Output = ItoElement;
    fn mul(self, rhs: &ItoElement) -> ItoElement {
        self.multiply(rhs).expect("noise dimension mismatch")
    }
}

fn check_pair(d: usize, mu: MinkowskiIndex, nu: MinkowskiIndex) -> Result<()> {
    if !mu.is_lower() {
        return Err(Error::IndexOutOfRange { index: format!("lower {mu}"), noise_dim: d });
    }
    if !nu.is_upper() {
        return Err(Error::IndexOutOfRange { index: format!("upper {nu}"), noise_dim: d });
    }
    mu.position(d)?;
    nu.position(d)?;
    Ok(())
}

/// Coefficients of an element over the labelled differentials `dΛ_μ^ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoExpansion {
    noise_dim: usize,
    terms: Vec<(MinkowskiIndex, MinkowskiIndex, C64)>,
}

impl ItoExpansion {
    pub fn zero(noise_dim: usize) -> Self {
        Self { noise_dim, terms: Vec::new() }
    }

    pub fn from_element(a: &ItoElement) -> Self {
        let d = a.noise_dim;
        let n = d + 2;
        let mut terms = Vec::new();
        // dt, then annihilation (-, k), creation (k, +), exchange (j, k)
        let mut positions = alloc::vec![(0, n - 1)];
        positions.extend((1..n - 1).map(|k| (0, k)));
        positions.extend((1..n - 1).map(|k| (k, n - 1)));
        positions.extend((1..n - 1).flat_map(|j| (1..n - 1).map(move |k| (j, k))));
        for (r, c) in positions {
            let z = a.entry(r, c);
            if z.re != 0.0 || z.im != 0.0 {
                terms.push((MinkowskiIndex::from_position(r, d), MinkowskiIndex::from_position(c, d), z));
            }
        }
        Self { noise_dim: d, terms }
    }

    /// Adds `coeff * dΛ_μ^ν`.
    pub fn with_term(mut self, mu: MinkowskiIndex, nu: MinkowskiIndex, coeff: C64) -> Result<Self> {
        check_pair(self.noise_dim, mu, nu)?;
        self.terms.push((mu, nu, coeff));
        Ok(Self::from_element(&self.to_element()?))
    }

    pub fn to_element(&self) -> Result<ItoElement> {
        let mut out = ItoElement::zero(self.noise_dim);
        let n = out.size();
        for &(mu, nu, z) in &self.terms {
            check_pair(self.noise_dim, mu, nu)?;
            let (r, c) = (mu.position(self.noise_dim)?, nu.position(self.noise_dim)?);
            out.matrix[r * n + c] += z;
        }
        Ok(out)
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn terms(&self) -> &[(MinkowskiIndex, MinkowskiIndex, C64)] {
        &self.terms
    }

    pub fn coefficient(&self, mu: MinkowskiIndex, nu: MinkowskiIndex) -> C64 {
        self.terms.iter().filter(|(m, n, _)| *m == mu && *n == nu).map(|t| t.2).sum()
    }

    pub fn dt_coefficient(&self) -> C64 {
        self.coefficient(MinkowskiIndex::Minus, MinkowskiIndex::Plus)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.2.re == 0.0 && t.2.im == 0.0)
    }

    fn label(&self, mu: MinkowskiIndex, nu: MinkowskiIndex) -> String {
        use MinkowskiIndex::*;
        match (self.noise_dim, mu, nu) {
            (_, Minus, Plus) => "dt".into(),
            (1, Minus, Circle(1)) => "e_-".into(),
            (1, Circle(1), Plus) => "e_+".into(),
            (1, Circle(1), Circle(1)) => "e".into(),
            (_, mu, nu) => format!("dL[{mu},{nu}]"),
        }
    }
}

fn format_real(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Renders e.g. `dt + 0.5*e_- - i*e_+`; the zero element renders as `0`.
impl fmt::Display for ItoExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(mu, nu, z) in &self.terms {
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let label = self.label(mu, nu);
            let (negative, body) = if z.im == 0.0 {
                let mag = z.re.abs();
                let body = if mag == 1.0 { label } else { format!("{}*{label}", format_real(mag)) };
                (z.re < 0.0, body)
            } else if z.re == 0.0 {
                let mag = z.im.abs();
                let body = if mag == 1.0 { format!("i*{label}") } else { format!("{}i*{label}", format_real(mag)) };
                (z.im < 0.0, body)
            } else {
                let sign = if z.im < 0.0 { "-" } else { "+" };
                (false, format!("({}{sign}{}i)*{label}", format_real(z.re), format_real(z.im.abs())))
            };
            match (first, negative) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// HP table entry: `dΛ_μ^ι · dΛ_κ^ν = δ_κ^ι dΛ_μ^ν`.
pub fn hp_product(
    iota: MinkowskiIndex,
    mu: MinkowskiIndex,
    nu: MinkowskiIndex,
    kappa: MinkowskiIndex,
    noise_dim: usize,
) -> Result<ItoExpansion> {
    if noise_dim == 0 {
        return Err(Error::EmptyDimension);
    }
    let left = ItoElement::lambda(noise_dim, mu, iota)?;
    let right = ItoElement::lambda(noise_dim, kappa, nu)?;
    Ok(left.multiply(&right)?.expansion())
}

/// Standard process differential `dy = dΛ^+ + dΛ_- + ε dΛ`, which satisfies
/// `(dy)^2 = dt + ε dy`.
pub fn standard_process(epsilon: f64) -> Result<ItoElement> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter { name: "epsilon", reason: "must be finite and >= 0" });
    }
    let dw = Basis::Dw.element();
    Ok(&dw + &Basis::E.element().scale(C64::new(epsilon, 0.0)))
}

/// Products of the error process `w = Λ_- + Λ^+` and the Langevin force
/// `f = iħ(Λ_- - Λ^+)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergTable {
    pub df_dw: ItoExpansion,
    pub dw_df: ItoExpansion,
    pub dw_dw: ItoExpansion,
    pub df_df: ItoExpansion,
}

pub fn heisenberg_pair_check(hbar: f64) -> Result<HeisenbergTable> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidParameter { name: "hbar", reason: "must be positive" });
    }
    let dw = Basis::Dw.element();
    let df = (&Basis::EMinus.element() - &Basis::EPlus.element()).scale(C64::new(0.0, hbar));
    Ok(HeisenbergTable {
        df_dw: (&df * &dw).expansion(),
        dw_df: (&dw * &df).expansion(),
        dw_dw: (&dw * &dw).expansion(),
        df_df: (&df * &df).expansion(),
    })
}

/// Outcome of testing `στ ≥ ħ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyProduct {
    pub satisfies: bool,
    pub product: f64,
    pub bound: f64,
    /// `στ - ħ/2`
    pub slack: f64,
}

/// The bound is checked with a four-ulp relative allowance so that
/// intensities computed through square roots still register at the boundary.
pub fn uncertainty_product(sigma: f64, tau: f64, hbar: f64) -> Result<UncertaintyProduct> {
    for (name, v) in [("sigma", sigma), ("tau", tau), ("hbar", hbar)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter { name, reason: "must be positive" });
        }
    }
    let product = sigma * tau;
    let bound = hbar / 2.0;
    Ok(UncertaintyProduct {
        satisfies: product >= bound * (1.0 - 4.0 * f64::EPSILON),
        product,
        bound,
        slack: product - bound,
    })
}

/// Error and force intensities `σ = (2λ)^(-1/2)`, `τ = (λħ²/2)^(1/2)` of
/// continuous position observation with accuracy `λ`.
pub fn white_noise_intensities(lambda: f64, hbar: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidParameter { name: "lambda", reason: "lambda and hbar must be positive" });
    }
    Ok(((2.0 * lambda).recip().sqrt(), (lambda * hbar * hbar / 2.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use MinkowskiIndex::{Circle, Minus, Plus};

    fn m(rows: &[f64]) -> ItoElement {
        ItoElement::from_real_matrix(1, rows).unwrap()
    }

    #[test]
    fn displayed_basis_matrices() {
        assert_eq!(basis("dt").unwrap(), m(&[0., 0., 1., 0., 0., 0., 0., 0., 0.]));
        assert_eq!(basis("dw").unwrap(), m(&[0., 1., 0., 0., 0., 1., 0., 0., 0.]));
        assert_eq!(basis("dm").unwrap(), m(&[0., 1., 0., 0., 1., 1., 0., 0., 0.]));
        assert_eq!(basis("e_minus").unwrap(), m(&[0., 1., 0., 0., 0., 0., 0., 0., 0.]));
        assert_eq!(basis("e_plus").unwrap(), m(&[0., 0., 0., 0., 0., 1., 0., 0., 0.]));
        assert_eq!(basis("e").unwrap(), m(&[0., 0., 0., 0., 1., 0., 0., 0., 0.]));
        assert!(matches!(basis("dq"), Err(Error::UnknownBasis(_))));
    }

    #[test]
    fn basis_relations() {
        let (dt, dw, dm) = (Basis::Dt.element(), Basis::Dw.element(), Basis::Dm.element());
        assert_eq!(&(&dw * &dm) - &dt, Basis::EMinus.element());
        assert_eq!(&(&dm * &dw) - &dt, Basis::EPlus.element());
        assert_eq!(&dm - &dw, Basis::E.element());
    }

    #[test]
    fn multiply_examples() {
        let (dt, dw, dm) = (Basis::Dt.element(), Basis::Dw.element(), Basis::Dm.element());
        assert_eq!(&dw * &dw, dt);
        assert_eq!(&dm * &dm, &dm + &dt);
        assert_eq!(&dw * &dm, m(&[0., 1., 1., 0., 0., 0., 0., 0., 0.]));
        assert_eq!(&dm * &dw, m(&[0., 0., 1., 0., 0., 1., 0., 0., 0.]));
        assert!((&dt * &dt).is_zero());
        assert!((&(&dw * &dw) * &dw).is_zero());
        assert!(dw.multiply(&ItoElement::dt(2)).is_err());
    }

    #[test]
    fn hp_table() {
        let d = 1;
        let c = Circle(1);
        // dΛ_- dΛ^+ = dt: left = Λ_-^∘ (mu = -, iota = ∘), right = Λ_∘^+ (kappa = ∘, nu = +)
        let r = hp_product(c, Minus, Plus, c, d).unwrap();
        assert_eq!(r.to_string(), "dt");
        // dΛ dΛ^+ = dΛ^+
        assert_eq!(hp_product(c, c, Plus, c, d).unwrap().to_string(), "e_+");
        // dΛ_- dΛ = dΛ_-
        assert_eq!(hp_product(c, Minus, c, c, d).unwrap().to_string(), "e_-");
        // dΛ^+ dΛ_- = 0: left = Λ_∘^+ (iota = +), right = Λ_-^∘ (kappa = -)
        assert!(hp_product(Plus, c, c, Minus, d).unwrap().is_zero());
        assert!(hp_product(Circle(2), Minus, Plus, Circle(2), 1).is_err());
        assert!(hp_product(Minus, Minus, Plus, Minus, 1).is_err());
    }

    #[test]
    fn hp_table_higher_dimension() {
        let r = hp_product(Circle(2), Circle(1), Circle(3), Circle(2), 3).unwrap();
        assert_eq!(r.to_string(), "dL[1,3]");
        assert!(hp_product(Circle(2), Circle(1), Circle(3), Circle(1), 3).unwrap().is_zero());
    }

    #[test]
    fn standard_process_examples() {
        let dt = Basis::Dt.element();
        let wiener = standard_process(0.0).unwrap();
        assert_eq!(&wiener * &wiener, dt);
        assert_eq!(standard_process(1.0).unwrap(), Basis::Dm.element());
        let dy = standard_process(0.5).unwrap(); // nu = 4
        assert_eq!(&dy * &dy, &dt + &dy.scale(C64::new(0.5, 0.0)));
        assert!(standard_process(-0.1).is_err());
    }

    #[test]
    fn heisenberg_pair() {
        let t = heisenberg_pair_check(1.0).unwrap();
        assert_eq!(t.df_dw.to_string(), "i*dt");
        assert_eq!(t.dw_df.to_string(), "-i*dt");
        assert_eq!(t.dw_dw.to_string(), "dt");
        assert_eq!(t.df_df.to_string(), "dt");
        let t = heisenberg_pair_check(2.0).unwrap();
        assert_eq!(t.df_dw.dt_coefficient(), C64::new(0.0, 2.0));
        assert_eq!(t.df_df.dt_coefficient(), C64::new(4.0, 0.0));
        assert!(heisenberg_pair_check(0.0).is_err());
    }

    #[test]
    fn uncertainty_product_examples() {
        let (s, t) = white_noise_intensities(2.0, 1.0).unwrap();
        let r = uncertainty_product(s, t, 1.0).unwrap();
        assert!(r.satisfies);
        assert_eq!(r.slack, 0.0);
        let r = uncertainty_product(1.0, 1.0, 1.0).unwrap();
        assert!(r.satisfies && r.slack == 0.5);
        let r = uncertainty_product(0.1, 0.1, 1.0).unwrap();
        assert!(!r.satisfies);
        assert!(uncertainty_product(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rendering() {
        let dy = standard_process(0.5).unwrap();
        let sq = (&dy * &dy).expansion();
        assert_eq!(sq.to_string(), "dt + 0.5*e_- + 0.5*e_+ + 0.25*e");
        assert_eq!(ItoExpansion::zero(1).to_string(), "0");
        let z = Basis::E.element().scale(C64::new(1.5, -2.0)).expansion();
        assert_eq!(z.to_string(), "(1.5-2i)*e");
    }

    #[test]
    fn rejects_forbidden_entries() {
        assert!(ItoElement::from_real_matrix(1, &[1., 0., 0., 0., 0., 0., 0., 0., 0.]).is_err());
        assert!(ItoElement::from_real_matrix(1, &[0., 0., 0., 0., 0., 0., 0., 0., 1.]).is_err());
    }

    #[test]
    fn expansion_round_trip() {
        let a = m(&[0., 3., -2., 0., 5., 7., 0., 0., 0.]);
        assert_eq!(a.expansion().to_element().unwrap(), a);
        let built = ItoExpansion::zero(1)
            .with_term(Minus, Plus, C64::new(2.0, 0.0))
            .unwrap()
            .with_term(Circle(1), Circle(1), C64::new(-1.0, 0.0))
            .unwrap();
        assert_eq!(built.to_string(), "2*dt - e");
    }
}
