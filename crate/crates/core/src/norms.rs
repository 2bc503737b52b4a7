//! Admissible exponents and the lattice norms the Strichartz bounds use.
//!
//! Exponent arithmetic is exact: finite exponents are rationals, so
//! admissibility lines and infeasibility are decided without tolerances.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize};

use crate::cutoff::CutoffKind;
use crate::error::{Error, Result};
use crate::grid::{Domain, Field};
use crate::par;
use crate::spectral;

pub type Rational = Ratio<i64>;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Lebesgue exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn finite(n: i64, d: i64) -> Self {
        Exponent::Finite(rat(n, d))
    }

    pub fn int(n: i64) -> Self {
        Exponent::Finite(Rational::from_integer(n))
    }

    /// `1 / p`, with `1 / inf = 0`.
    pub fn reciprocal(&self) -> Rational {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinity => Rational::from_integer(0),
        }
    }

    /// Exponent whose reciprocal is `inv`; `inv = 0` gives infinity.
    pub fn from_reciprocal(inv: Rational) -> Self {
        if inv == Rational::from_integer(0) {
            Exponent::Infinity
        } else {
            Exponent::Finite(inv.recip())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(p) => to_f64(*p),
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Hoelder conjugate `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(&self) -> Result<Self> {
        let inv = self.reciprocal();
        if inv > Rational::from_integer(1) {
            return Err(Error::param("p", format!("{self} is below 1")));
        }
        Ok(Self::from_reciprocal(Rational::from_integer(1) - inv))
    }

    fn check_at_least(&self, lo: i64, name: &'static str) -> Result<()> {
        match self {
            Exponent::Finite(p) if *p < Rational::from_integer(lo) => Err(Error::param(
                name,
                format!("exponent must be >= {lo}, got {self}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) if p.is_integer() => write!(f, "{}", p.numer()),
            Exponent::Finite(p) => write!(f, "{}/{}", p.numer(), p.denom()),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(v) => v.to_string(),
            Raw::Float(v) => v.to_string(),
            Raw::Text(v) => v,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parse a rational from `"3"`, `"16/3"` or a terminating decimal `"0.9"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::param("exponent", format!("cannot parse `{text}` as a rational"));
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(rat(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let mag = int_part.abs() * scale + frac_part;
        return Ok(rat(if neg { -mag } else { mag }, scale));
    }
    t.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => Ok(Exponent::Finite(parse_rational(other)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `2/q + mu/r = mu/2`.
    #[serde(alias = "paper", alias = "literal")]
    PaperLiteral,
    /// `1/q = mu (1/2 - 1/r)`, the sharp line for decay rate `mu`.
    #[serde(alias = "classical", alias = "sharp")]
    ClassicalSharp,
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "paper_literal" | "literal" => Ok(Convention::PaperLiteral),
            "classical" | "classical_sharp" | "sharp" => Ok(Convention::ClassicalSharp),
            other => Err(Error::param("convention", format!("unknown convention `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuKind {
    Schroedinger,
    Wave,
    /// `mu = (2 - theta) / 2`, the two-dimensional interpolation scale.
    Theta(Rational),
}

impl MuKind {
    pub fn mu(&self, d: usize) -> Result<Rational> {
        match self {
            MuKind::Schroedinger => Ok(rat(d as i64, 2)),
            MuKind::Wave => Ok(rat(d as i64 - 1, 2)),
            MuKind::Theta(theta) => {
                check_theta(*theta)?;
                Ok((Rational::from_integer(2) - theta) / 2)
            }
        }
    }
}

impl FromStr for MuKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "schroedinger" | "schrodinger" => Ok(MuKind::Schroedinger),
            "wave" => Ok(MuKind::Wave),
            _ => match t.strip_prefix("theta:") {
                Some(v) => Ok(MuKind::Theta(parse_rational(v)?)),
                None => Err(Error::param("mu_kind", format!("unknown kind `{s}`"))),
            },
        }
    }
}

fn check_theta(theta: Rational) -> Result<()> {
    if theta < Rational::from_integer(0) || theta >= Rational::from_integer(1) {
        return Err(Error::param(
            "theta",
            format!("must lie in [0, 1), got {theta}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissiblePair {
    pub q: Exponent,
    pub r: Exponent,
    pub mu: Rational,
    pub convention: Convention,
}

impl Serialize for AdmissiblePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AdmissiblePair", 5)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("r", &self.r)?;
        st.serialize_field("mu", &Exponent::Finite(self.mu))?;
        st.serialize_field("convention", &self.convention)?;
        st.serialize_field("beta", &Exponent::Finite(self.beta()))?;
        st.end()
    }
}

impl AdmissiblePair {
    /// Validate `(q, r)` against the admissibility line of `convention`.
    pub fn new(q: Exponent, r: Exponent, mu: Rational, convention: Convention) -> Result<Self> {
        q.check_at_least(2, "q")?;
        r.check_at_least(2, "r")?;
        if mu <= Rational::from_integer(0) {
            return Err(Error::param("mu", format!("must be positive, got {mu}")));
        }
        let (iq, ir) = (q.reciprocal(), r.reciprocal());
        let half = rat(1, 2);
        let on_line = match convention {
            Convention::PaperLiteral => iq * 2 + mu * ir == mu * half,
            Convention::ClassicalSharp => iq == mu * (half - ir),
        };
        if !on_line {
            return Err(Error::Infeasible(format!(
                "({q}, {r}) is not on the {convention:?} line for mu = {mu}"
            )));
        }
        if q == Exponent::int(2) && r == Exponent::Infinity && mu == Rational::from_integer(1) {
            return Err(Error::Infeasible("the endpoint (2, inf) with mu = 1 is excluded".into()));
        }
        Ok(Self {
            q,
            r,
            mu,
            convention,
        })
    }

    pub fn beta(&self) -> Rational {
        beta_unchecked(self.r)
    }
}

/// Which exponent of the pair is prescribed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Given {
    Q(Exponent),
    R(Exponent),
}

/// Complete a pair on the admissibility line.
pub fn solve_admissible(
    d: usize,
    mu_kind: MuKind,
    given: Given,
    convention: Convention,
) -> Result<AdmissiblePair> {
    if d < 2 {
        return Err(Error::param("d", format!("dimension must be >= 2, got {d}")));
    }
    let mu = mu_kind.mu(d)?;
    let half = rat(1, 2);
    let zero = Rational::from_integer(0);
    let (q, r) = match given {
        Given::Q(q) => {
            q.check_at_least(2, "q")?;
            let iq = q.reciprocal();
            let ir = match convention {
                Convention::PaperLiteral => half - iq * 2 / mu,
                Convention::ClassicalSharp => half - iq / mu,
            };
            if ir < zero || ir > half {
                return Err(Error::Infeasible(format!(
                    "q = {q} needs 1/r = {ir}, outside [0, 1/2]"
                )));
            }
            (q, Exponent::from_reciprocal(ir))
        }
        Given::R(r) => {
            r.check_at_least(2, "r")?;
            let b = half - r.reciprocal();
            let iq = match convention {
                Convention::PaperLiteral => mu * b / 2,
                Convention::ClassicalSharp => mu * b,
            };
            if iq < zero || iq > half {
                return Err(Error::Infeasible(format!(
                    "r = {r} needs 1/q = {iq}, outside [0, 1/2]"
                )));
            }
            (Exponent::from_reciprocal(iq), r)
        }
    };
    AdmissiblePair::new(q, r, mu, convention)
}

fn beta_unchecked(r: Exponent) -> Rational {
    rat(1, 2) - r.reciprocal()
}

/// `beta(r) = 1/2 - 1/r`.
pub fn beta(r: Exponent) -> Result<Rational> {
    r.check_at_least(2, "r")?;
    Ok(beta_unchecked(r))
}

/// `(alpha_0, alpha_1) = ((d-2)/2 beta(r), (d-2)/2 (beta(r) + beta(r1)))`.
pub fn alpha_exponents(d: usize, r: Exponent, r1: Exponent) -> Result<(Rational, Rational)> {
    if d < 2 {
        return Err(Error::param("d", format!("dimension must be >= 2, got {d}")));
    }
    let c = rat(d as i64 - 2, 2);
    let (b, b1) = (beta(r)?, beta(r1)?);
    Ok((c * b, c * (b + b1)))
}

/// Regularity index `s = 3 beta(r) theta` of the interpolated estimate.
pub fn prop_b_exponent(theta: Rational, r: Exponent) -> Result<Rational> {
    check_theta(theta)?;
    Ok(beta(r)? * theta * 3)
}

/// Lattice `L^r` norm `(sum |u|^r h^d)^{1/r}`; the maximum for `r = inf`.
pub fn lebesgue_norm(f: &Field, r: Exponent) -> Result<f64> {
    r.check_at_least(1, "r")?;
    let u = f.to_domain(Domain::Space);
    let v = u.values();
    Ok(match r {
        Exponent::Infinity => u.max_abs(),
        Exponent::Finite(p) => {
            let p = to_f64(p);
            let cell = f.grid().cell_volume();
            if p == 2.0 {
                (par::ordered_sum(v.len(), |i| v[i].norm_sqr()) * cell).sqrt()
            } else {
                (par::ordered_sum(v.len(), |i| v[i].norm().powf(p)) * cell).powf(1.0 / p)
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedNormSpec {
    pub q: Exponent,
    pub r: Exponent,
    pub t_end: f64,
    pub time_samples: usize,
}

impl MixedNormSpec {
    pub fn new(q: Exponent, r: Exponent, t_end: f64, time_samples: usize) -> Result<Self> {
        q.check_at_least(1, "q")?;
        r.check_at_least(1, "r")?;
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::param("T", format!("must be positive, got {t_end}")));
        }
        if time_samples < 16 {
            return Err(Error::param(
                "time_samples",
                format!("need at least 16, got {time_samples}"),
            ));
        }
        Ok(Self {
            q,
            r,
            t_end,
            time_samples,
        })
    }
}

/// `L^q(0, T)` norm of uniform samples, by the trapezoid rule.
pub fn time_norm(values: &[f64], q: Exponent, t_end: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: values.len(),
        });
    }
    q.check_at_least(1, "q")?;
    Ok(match q {
        Exponent::Infinity => values.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let p = to_f64(p);
            let dt = t_end / (values.len() - 1) as f64;
            let last = values.len() - 1;
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let w = if j == 0 || j == last { 0.5 } else { 1.0 };
                    w * v.powf(p)
                })
                .sum();
            (s * dt).powf(1.0 / p)
        }
    })
}

/// `||u||_{L^q(0, T; L^r)}` for a trajectory sampled at uniform times.
pub fn mixed_norm(trajectory: &[Field], spec: &MixedNormSpec) -> Result<f64> {
    if trajectory.len() != spec.time_samples {
        return Err(Error::InsufficientSamples {
            need: spec.time_samples,
            got: trajectory.len(),
        });
    }
    let first = &trajectory[0];
    for f in &trajectory[1..] {
        first.check_same_grid(f)?;
    }
    let inner = trajectory
        .iter()
        .map(|f| lebesgue_norm(f, spec.r))
        .collect::<Result<Vec<_>>>()?;
    time_norm(&inner, spec.q, spec.t_end)
}

/// Homogeneous Sobolev norm `(h^d sum |xi|^{2 alpha} |f^|^2)^{1/2}`.
pub fn sobolev_norm(f: &Field, alpha: f64) -> Result<f64> {
    let fh = f.to_domain(Domain::Frequency);
    let grid = *f.grid();
    let v = fh.values();
    if alpha < 0.0 && v[0].norm() > 1e-14 * fh.l2().max(f64::MIN_POSITIVE) {
        return Err(Error::param(
            "alpha",
            "negative order needs a mean-free field",
        ));
    }
    let s = par::ordered_sum(v.len(), |i| {
        let r = grid.xi_abs(i);
        let w = if alpha == 0.0 {
            1.0
        } else if r == 0.0 {
            0.0
        } else {
            r.powf(2.0 * alpha)
        };
        w * v[i].norm_sqr()
    });
    Ok((s * grid.cell_volume()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesovNorm {
    pub value: f64,
    /// Ladder blocks `2^k` that were summed.
    pub k_range: (i32, i32),
    /// The zero mode carries mass that no block sees.
    pub zero_mode_dropped: bool,
}

/// Homogeneous Besov norm `(sum_k 2^{2ks} ||P_{2^k} f||_{L^r}^2)^{1/2}` over
/// the lattice-representable blocks.
pub fn besov_norm(f: &Field, s: f64, r: Exponent, kind: CutoffKind) -> Result<BesovNorm> {
    let grid = *f.grid();
    let range = spectral::dyadic_range(&grid);
    let fh = f.to_domain(Domain::Frequency);
    let mut total = 0.0;
    for k in range.clone() {
        let block = spectral::dyadic_project(&fh, k, kind).field;
        let n = lebesgue_norm(&block, r)?;
        total += 2f64.powf(2.0 * k as f64 * s) * n * n;
    }
    let zero = fh.values()[0].norm();
    Ok(BesovNorm {
        value: total.sqrt(),
        k_range: (*range.start(), *range.end()),
        zero_mode_dropped: zero > 1e-14 * fh.l2().max(f64::MIN_POSITIVE),
    })
}
