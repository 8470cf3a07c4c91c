//! Complex dilogarithms: the principal branch of Li2, the Bloch-Wigner
//! function, and the four branch-tracked variants `ell` living on the
//! surfaces eta1*exp(-u1) + eta2*exp(u2) = 1, valued in C mod 4*pi^2*Z.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::f64::consts::PI;

use crate::{Error, Result};

/// 4*pi^2, the lattice spacing for dilogarithm values.
pub const LATTICE: f64 = 4.0 * PI * PI;

/// Default absolute tolerance for the on-surface check.
pub const SURFACE_TOL: f64 = 1e-9;

/// Coefficients B_n / (n+1)! of the expansion of Li2 in u = -Log(1-z),
/// computed once from the exact Bernoulli recurrence.
static U_SERIES_COEFFS: Lazy<Vec<f64>> = Lazy::new(|| {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    let n_max = 36usize;
    // B_m = -1/(m+1) * sum_{k<m} C(m+1,k) B_k, with B_0 = 1 (so B_1 = -1/2).
    let mut bernoulli: Vec<BigRational> = Vec::with_capacity(n_max + 1);
    bernoulli.push(BigRational::one());
    for m in 1..=n_max {
        let mut acc = BigRational::zero();
        let mut binom = BigRational::one(); // C(m+1, 0)
        for (k, b) in bernoulli.iter().enumerate() {
            acc += &binom * b;
            // C(m+1, k+1) = C(m+1, k) * (m+1-k)/(k+1)
            binom *= BigRational::new(BigInt::from(m as i64 + 1 - k as i64), BigInt::from(k as i64 + 1));
        }
        bernoulli.push(-acc / BigRational::from(BigInt::from(m as i64 + 1)));
    }
    let mut factorial = BigRational::one();
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for (n, b) in bernoulli.iter().enumerate() {
        factorial *= BigRational::from(BigInt::from(n as i64 + 1));
        coeffs.push((b / &factorial).to_f64().expect("coefficient fits in f64"));
    }
    coeffs
});

/// Power series sum_{n>=1} z^n / n^2, for |z| <= 0.5.
fn li2_series(z: Complex64) -> Complex64 {
    let mut term = z;
    let mut sum = z;
    for n in 2..64u32 {
        term *= z;
        let add = term / Complex64::new((n * n) as f64, 0.0);
        sum += add;
        if add.norm_sqr() < 1e-34 * sum.norm_sqr().max(1e-30) {
            break;
        }
    }
    sum
}

/// Expansion in u = -Log(1-z), valid for |u| < 2*pi. Used on the part of the
/// unit disc where the power series converges too slowly.
fn li2_u_series(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut upow = Complex64::new(1.0, 0.0);
    let mut small_run = 0;
    for c in U_SERIES_COEFFS.iter() {
        upow *= u;
        let add = upow * *c;
        sum += add;
        // Odd Bernoulli numbers vanish, so insist on two consecutive
        // negligible terms before stopping.
        if add.norm_sqr() < 1e-34 * sum.norm_sqr().max(1e-30) {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    sum
}

/// Li2 on the closed unit disc.
fn li2_disc(z: Complex64) -> Complex64 {
    if z.norm() <= 0.5 {
        li2_series(z)
    } else if z.re > 0.5 {
        if z == Complex64::new(1.0, 0.0) {
            return Complex64::new(PI * PI / 6.0, 0.0);
        }
        // Li2(z) = pi^2/6 - Log(z) Log(1-z) - Li2(1-z); here Re(1-z) < 1/2.
        let w = Complex64::new(1.0, 0.0) - z;
        let reflected = if w.norm() <= 0.5 { li2_series(w) } else { li2_u_series(w) };
        Complex64::new(PI * PI / 6.0, 0.0) - z.ln() * w.ln() - reflected
    } else {
        li2_u_series(z)
    }
}

/// Principal branch of the dilogarithm, with branch cut along (1, infinity).
pub fn li2(z: Complex64) -> Complex64 {
    if z.norm() <= 1.0 {
        li2_disc(z)
    } else {
        // Li2(z) = -pi^2/6 - Log(-z)^2/2 - Li2(1/z)
        let lnm = (-z).ln();
        -Complex64::new(PI * PI / 6.0, 0.0) - 0.5 * lnm * lnm - li2_disc(z.inv())
    }
}

/// Bloch-Wigner function D(z) = Im Li2(z) + log|z| arg(1-z).
pub fn bloch_wigner(z: Complex64) -> Result<f64> {
    if z == Complex64::new(0.0, 0.0) || z == Complex64::new(1.0, 0.0) {
        return Err(Error::Domain(format!("bloch_wigner undefined at {z}")));
    }
    let one_minus = Complex64::new(1.0, 0.0) - z;
    Ok(li2(z).im + z.norm().ln() * one_minus.arg())
}

/// A pair of signs selecting one of the four surfaces
/// S^eta = { (u1,u2) : eta1 exp(-u1) + eta2 exp(u2) = 1 }.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EtaPair {
    pub eta1: i8,
    pub eta2: i8,
}

impl EtaPair {
    pub fn new(eta1: i8, eta2: i8) -> Result<Self> {
        if eta1.abs() != 1 || eta2.abs() != 1 {
            return Err(Error::Domain(format!("eta components must be +-1, got ({eta1},{eta2})")));
        }
        Ok(EtaPair { eta1, eta2 })
    }

    /// Parse "++", "+-", "-+" or "--".
    pub fn parse(s: &str) -> Result<Self> {
        let sign = |c: char| match c {
            '+' => Ok(1i8),
            '-' => Ok(-1i8),
            _ => Err(Error::Domain(format!("bad eta spec {s:?}"))),
        };
        let mut it = s.chars();
        match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => Ok(EtaPair { eta1: sign(a)?, eta2: sign(b)? }),
            _ => Err(Error::Domain(format!("bad eta spec {s:?}"))),
        }
    }

    /// Residual of the defining equation of S^eta at (u1,u2).
    pub fn surface_residual(&self, u1: Complex64, u2: Complex64) -> f64 {
        (f64::from(self.eta1) * (-u1).exp() + f64::from(self.eta2) * u2.exp()
            - Complex64::new(1.0, 0.0))
        .norm()
    }
}

impl std::fmt::Display for EtaPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = |s: i8| if s > 0 { '+' } else { '-' };
        write!(f, "{}{}", c(self.eta1), c(self.eta2))
    }
}

/// A complex number regarded modulo the lattice 4*pi^2*Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilogValue {
    pub value: Complex64,
}

impl DilogValue {
    pub fn new(value: Complex64) -> Self {
        DilogValue { value }
    }

    /// True iff self - other lies within `tol` of the lattice 4*pi^2*Z.
    pub fn eq_mod(&self, other: Complex64, tol: f64) -> bool {
        let d = self.value - other;
        let frac = d.re / LATTICE;
        (frac - frac.round()).abs() < tol && d.im.abs() < tol
    }

    /// Representative with real part reduced into [0, 4*pi^2).
    pub fn reduced(&self) -> Complex64 {
        let mut re = self.value.re.rem_euclid(LATTICE);
        if re >= LATTICE {
            re -= LATTICE;
        }
        Complex64::new(re, self.value.im)
    }
}

/// Difference of two lattice-valued quantities, reduced to the representative
/// nearest zero. Useful for continuity and finite-difference checks.
pub fn reduce_mod_lattice(d: Complex64) -> Complex64 {
    Complex64::new(d.re - LATTICE * (d.re / LATTICE).round(), d.im)
}

fn floor_term(x: f64) -> f64 {
    x.floor()
}

/// The four dilogarithm variants on S^eta, as functions into C mod 4*pi^2*Z.
///
/// The input must satisfy eta1 exp(-u1) + eta2 exp(u2) = 1 within `SURFACE_TOL`.
pub fn ell(eta: EtaPair, u1: Complex64, u2: Complex64) -> Result<DilogValue> {
    ell_with_tol(eta, u1, u2, SURFACE_TOL)
}

pub fn ell_with_tol(eta: EtaPair, u1: Complex64, u2: Complex64, tol: f64) -> Result<DilogValue> {
    let res = eta.surface_residual(u1, u2);
    if !(res <= tol) {
        return Err(Error::OffSurface { eta: eta.to_string(), residual: res });
    }
    let i = Complex64::new(0.0, 1.0);
    let two_pi_i = 2.0 * PI * i;
    let pi_i = PI * i;
    let half = Complex64::new(0.5, 0.0);
    let value = match (eta.eta1, eta.eta2) {
        (1, 1) => {
            let m = floor_term(-u2.im / (2.0 * PI) + 0.5);
            li2((-u1).exp()) - half * u1 * u2 - two_pi_i * m * u1
        }
        (-1, 1) => {
            let m = floor_term(-u2.im / (2.0 * PI) + 0.5);
            li2(-(-u1).exp()) - half * u1 * u2 - two_pi_i * m * (u1 + pi_i)
        }
        (1, -1) => {
            let m = floor_term(-u2.im / (2.0 * PI));
            li2((-u1).exp()) - half * u1 * u2 - pi_i * u1 - two_pi_i * m * u1
        }
        (-1, -1) => {
            let m = floor_term(-u2.im / (2.0 * PI));
            li2(-(-u1).exp()) - half * u1 * u2 - pi_i * u1 - two_pi_i * m * (u1 + pi_i)
        }
        _ => unreachable!("EtaPair enforces +-1 components"),
    };
    Ok(DilogValue::new(value))
}

/// exp( ell / (2 pi i) ); well defined because the 4*pi^2 ambiguity
/// exponentiates to exp(-2 pi i) = 1.
pub fn ell_factor(eta: EtaPair, u1: Complex64, u2: Complex64) -> Result<Complex64> {
    Ok(exp_ell_over_2pii(ell(eta, u1, u2)?.value))
}

pub fn exp_ell_over_2pii(ell_value: Complex64) -> Complex64 {
    (ell_value / Complex64::new(0.0, 2.0 * PI)).exp()
}

/// Replace u2 by the exact on-surface logarithm keeping its Im-branch:
/// u2' = Log(eta2 (1 - eta1 exp(-u1))) + 2 pi i k with k chosen to stay
/// closest to the supplied u2.
pub fn project_to_surface(eta: EtaPair, u1: Complex64, u2: Complex64) -> Result<Complex64> {
    let target = f64::from(eta.eta2)
        * (Complex64::new(1.0, 0.0) - f64::from(eta.eta1) * (-u1).exp());
    if target.norm() == 0.0 {
        return Err(Error::Domain("projection hits exp(u2) = 0".into()));
    }
    let base = target.ln();
    let k = ((u2.im - base.im) / (2.0 * PI)).round();
    Ok(base + Complex64::new(0.0, 2.0 * PI * k))
}
