//! The projection calculus: from projections `Q`, `R` and a function `f` on `σ(QR)`, the
//! partial isometry `U_{Q,R,f}` with initial projection `R` and final projection `P_{Q,R,f}`
//! satisfying `QPQ = f(QRQ)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ProjError, Result};
use crate::numeric::spectral::{hermitian_eig_unchecked, snap_unit, SpectralDecomposition};
use crate::numeric::{OperatorMatrix, Tolerances};
use crate::support::SpectralFunction;

/// Piecewise-linear function on `[0, 1]` with `f(0) = 0`.
///
/// With `jump_at_zero` the breakpoints describe `f` on `(0, 1]` only and the first one may
/// be `(0, y)` for any `y`, giving a χ-type discontinuity at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunction")]
pub struct ScalarFunction {
    breakpoints: Vec<(f64, f64)>,
    jump_at_zero: bool,
}

#[derive(Deserialize)]
struct RawFunction {
    breakpoints: Vec<(f64, f64)>,
    #[serde(default)]
    jump_at_zero: bool,
}

impl TryFrom<RawFunction> for ScalarFunction {
    type Error = ProjError;

    fn try_from(raw: RawFunction) -> Result<Self> {
        ScalarFunction::new(raw.breakpoints, raw.jump_at_zero)
    }
}

impl ScalarFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>, jump_at_zero: bool) -> Result<Self> {
        let bad = |m: &str| Err(ProjError::InvalidFunction(m.to_string()));
        if breakpoints.len() < 2 {
            return bad("need at least two breakpoints");
        }
        if breakpoints[0].0 != 0.0 || breakpoints[breakpoints.len() - 1].0 != 1.0 {
            return bad("breakpoints must start at x = 0 and end at x = 1");
        }
        if breakpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return bad("breakpoint abscissae must be strictly increasing");
        }
        if breakpoints.iter().any(|&(_, y)| !(0.0..=1.0).contains(&y)) {
            return bad("values must lie in [0, 1]");
        }
        if !jump_at_zero && breakpoints[0].1 != 0.0 {
            return bad("first breakpoint must be (0, 0)");
        }
        Ok(ScalarFunction { breakpoints, jump_at_zero })
    }

    pub fn identity() -> Self {
        ScalarFunction { breakpoints: vec![(0.0, 0.0), (1.0, 1.0)], jump_at_zero: false }
    }

    /// Characteristic function of `(0, 1]`.
    pub fn chi() -> Self {
        Self::constant(1.0).expect("1 is a valid level")
    }

    /// `t·χ`.
    pub fn constant(t: f64) -> Result<Self> {
        ScalarFunction::new(vec![(0.0, t), (1.0, t)], true)
    }

    /// `s ↦ min(s, c)`.
    pub fn cap(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(ProjError::InvalidFunction(format!("cap level {c} outside [0, 1]")));
        }
        if c == 0.0 {
            return ScalarFunction::new(vec![(0.0, 0.0), (1.0, 0.0)], false);
        }
        if c == 1.0 {
            return Ok(Self::identity());
        }
        ScalarFunction::new(vec![(0.0, 0.0), (c, c), (1.0, c)], false)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn jump_at_zero(&self) -> bool {
        self.jump_at_zero
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(-1e-12..=1.0 + 1e-12).contains(&x) || x.is_nan() {
            return Err(ProjError::DomainError { value: x });
        }
        let x = x.clamp(0.0, 1.0);
        if x == 0.0 {
            return Ok(0.0);
        }
        let i = self.breakpoints.partition_point(|&(bx, _)| bx < x);
        let (x1, y1) = self.breakpoints[i];
        if i == 0 || x1 == x {
            return Ok(y1);
        }
        let (x0, y0) = self.breakpoints[i - 1];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

impl SpectralFunction for ScalarFunction {
    fn eval(&self, x: f64) -> Result<f64> {
        self.evaluate(x)
    }
}

impl FromStr for ScalarFunction {
    type Err = ProjError;

    /// `id`, `chi`, `cap:c`, `const:t`, or the JSON form.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |v: &str| v.parse::<f64>().map_err(|_| ProjError::InvalidFunction(format!("bad number '{v}'")));
        match s {
            "id" => Ok(Self::identity()),
            "chi" => Ok(Self::chi()),
            _ if s.starts_with("cap:") => Self::cap(num(&s[4..])?),
            _ if s.starts_with("const:") => {
                let t = num(&s[6..])?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(ProjError::InvalidFunction(format!("level {t} outside [0, 1]")));
                }
                Self::constant(t)
            }
            _ if s.starts_with('{') => serde_json::from_str(s).map_err(|e| ProjError::InvalidFunction(e.to_string())),
            _ => Err(ProjError::InvalidFunction(format!("unknown function '{s}'"))),
        }
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CalculusResult {
    pub u: OperatorMatrix,
    pub p: OperatorMatrix,
    pub used_spectrum: Vec<f64>,
}

/// `RQR` decomposed, with cluster representatives pinned to 0 and 1 where within the
/// clustering width.
pub(crate) struct PairSpectrum {
    eig: SpectralDecomposition,
    /// `(start, end, value)` per cluster.
    clusters: Vec<(usize, usize, f64)>,
}

impl PairSpectrum {
    pub(crate) fn new(q: &OperatorMatrix, r: &OperatorMatrix, tol: &Tolerances) -> Self {
        Self::of(&(r * q * r), tol)
    }

    pub(crate) fn of(s: &OperatorMatrix, tol: &Tolerances) -> Self {
        let eig = hermitian_eig_unchecked(s);
        let clusters =
            eig.clusters(tol.cluster).into_iter().map(|c| (c.start, c.end, snap_unit(c.value, tol.cluster))).collect();
        PairSpectrum { eig, clusters }
    }

    pub(crate) fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.clusters.iter().map(|c| c.2).collect();
        v.dedup();
        v
    }

    /// `h(RQR)` for `h` given on the cluster representatives.
    pub(crate) fn map(&self, h: impl Fn(f64) -> f64) -> OperatorMatrix {
        let n = self.eig.dim();
        let mut vals = vec![0.0; n];
        for &(a, b, s) in &self.clusters {
            let y = h(s);
            vals[a..b].iter_mut().for_each(|v| *v = y);
        }
        let v = self.eig.eigenvectors.inner();
        let mut scaled = v.clone();
        for (c, &w) in vals.iter().enumerate() {
            scaled.column_mut(c).scale_mut(w);
        }
        OperatorMatrix::from_inner(scaled * v.adjoint())
    }
}

fn admissible_values<F: SpectralFunction + ?Sized>(f: &F, spectrum: &[f64], tol: &Tolerances) -> Result<Vec<f64>> {
    let f0 = f.eval(0.0)?;
    if f0.abs() > tol.eq {
        return Err(ProjError::Inadmissible(format!("f(0) = {f0}, must be 0")));
    }
    spectrum
        .iter()
        .map(|&s| {
            let y = f.eval(s)?;
            if !(-tol.eq..=1.0 + tol.eq).contains(&y) {
                return Err(ProjError::Inadmissible(format!("f({s}) = {y} outside [0, 1]")));
            }
            if s == 1.0 && (y - 1.0).abs() > tol.eq {
                return Err(ProjError::Inadmissible(format!("f(1) = {y} but 1 is in the spectrum")));
            }
            Ok(if s == 0.0 { 0.0 } else { y.clamp(0.0, 1.0) })
        })
        .collect()
}

fn x_of(s: f64, fs: f64) -> f64 {
    if s > 0.0 {
        (fs / s).sqrt()
    } else {
        0.0
    }
}

fn y_of(s: f64, fs: f64) -> f64 {
    if s < 1.0 {
        ((1.0 - fs) / (1.0 - s)).sqrt()
    } else {
        0.0
    }
}

/// `x_f(s) = √(f(s)/s)` and `y_f(s) = √((1−f(s))/(1−s))` on a spectrum, with `x_f(0) = 0`
/// and `y_f(1) = 0`.
pub fn xf_yf<F: SpectralFunction + ?Sized>(f: &F, spectrum: &[f64], tol: &Tolerances) -> Result<(Vec<f64>, Vec<f64>)> {
    let values = admissible_values(f, spectrum, tol)?;
    let xs = spectrum.iter().zip(&values).map(|(&s, &y)| x_of(s, y)).collect();
    let ys = spectrum.iter().zip(&values).map(|(&s, &y)| y_of(s, y)).collect();
    Ok((xs, ys))
}

fn check_pair(q: &OperatorMatrix, r: &OperatorMatrix, tol: &Tolerances) -> Result<()> {
    q.require_same_dim(r)?;
    q.require_projection(tol.eq)?;
    r.require_projection(tol.eq)
}

/// Lookup table `s ↦ f(s)` on the clustered spectrum.
fn table<F: SpectralFunction + ?Sized>(f: &F, spec: &PairSpectrum, tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    let values = spec.values();
    let fv = admissible_values(f, &values, tol)?;
    Ok(values.into_iter().zip(fv).collect())
}

fn lookup(table: &[(f64, f64)], s: f64) -> f64 {
    table.iter().find(|&&(x, _)| x == s).map(|&(_, y)| y).unwrap_or(0.0)
}

pub(crate) fn build_with(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    spec: &PairSpectrum,
    f: &(impl SpectralFunction + ?Sized),
    tol: &Tolerances,
) -> Result<CalculusResult> {
    let t = table(f, spec, tol)?;
    let x = spec.map(|s| x_of(s, lookup(&t, s)));
    let y = spec.map(|s| y_of(s, lookup(&t, s)));
    let u = q * r * &x + q.complement() * r * &y;
    let p = (&u * u.adjoint()).hermitian_part();
    Ok(CalculusResult { u, p, used_spectrum: spec.values() })
}

/// `U = QR x_f(RQR) + Q⊥R y_f(RQR)` and `P = UU*`.
pub fn pc_build<F: SpectralFunction + ?Sized>(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    f: &F,
    tol: &Tolerances,
) -> Result<CalculusResult> {
    check_pair(q, r, tol)?;
    let spec = PairSpectrum::new(q, r, tol);
    build_with(q, r, &spec, f, tol)
}

/// `P_{Q,R,tχ}`.
pub fn pc_constant(q: &OperatorMatrix, r: &OperatorMatrix, t: f64, tol: &Tolerances) -> Result<CalculusResult> {
    if !(0.0..=1.0).contains(&t) {
        return Err(ProjError::InvalidFunction(format!("level {t} outside [0, 1]")));
    }
    pc_build(q, r, &ScalarFunction::constant(t)?, tol)
}

/// `σ(QR)` as seen by the calculus: clustered spectrum of `RQR`, pinned at 0 and 1.
pub fn calculus_spectrum(q: &OperatorMatrix, r: &OperatorMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    check_pair(q, r, tol)?;
    Ok(PairSpectrum::new(q, r, tol).values())
}

/// `h(S)` for self-adjoint `S` with spectrum in `[0, 1]`, using the calculus's spectral conventions.
pub fn calculus_apply<F: SpectralFunction + ?Sized>(
    s: &OperatorMatrix,
    f: &F,
    tol: &Tolerances,
) -> Result<OperatorMatrix> {
    s.require_self_adjoint(tol.eq)?;
    let spec = PairSpectrum::of(s, tol);
    let t: Vec<(f64, f64)> = spec.values().into_iter().map(|x| Ok((x, f.eval(x)?))).collect::<Result<_>>()?;
    Ok(spec.map(|x| lookup(&t, x)))
}

pub fn a_fg(fs: f64, gs: f64) -> f64 {
    (2.0 * (1.0 - (fs * gs).sqrt() - ((1.0 - fs) * (1.0 - gs)).sqrt())).max(0.0)
}

pub fn b_fg(fs: f64, gs: f64) -> f64 {
    (fs * gs).sqrt() + ((1.0 - fs) * (1.0 - gs)).sqrt()
}

pub fn c_fg(fs: f64, gs: f64) -> f64 {
    ((1.0 - fs) * gs).sqrt() - (fs * (1.0 - gs)).sqrt()
}

fn pointwise_max<F, G>(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    f: &F,
    g: &G,
    h: impl Fn(f64, f64) -> f64,
    tol: &Tolerances,
) -> Result<f64>
where
    F: SpectralFunction + ?Sized,
    G: SpectralFunction + ?Sized,
{
    let spectrum = calculus_spectrum(q, r, tol)?;
    let fv = admissible_values(f, &spectrum, tol)?;
    let gv = admissible_values(g, &spectrum, tol)?;
    Ok(fv.iter().zip(&gv).map(|(&a, &b)| h(a, b)).fold(0.0, f64::max))
}

/// `||U_f − U_g|| = max √a_{f,g}(s)` over `σ(QR)`.
pub fn pc_unitary_distance<F, G>(q: &OperatorMatrix, r: &OperatorMatrix, f: &F, g: &G, tol: &Tolerances) -> Result<f64>
where
    F: SpectralFunction + ?Sized,
    G: SpectralFunction + ?Sized,
{
    pointwise_max(q, r, f, g, |a, b| a_fg(a, b).sqrt(), tol)
}

/// `||P_f − P_g|| = max |c_{f,g}(s)|` over `σ(QR)`.
pub fn pc_projection_distance<F, G>(
    q: &OperatorMatrix,
    r: &OperatorMatrix,
    f: &F,
    g: &G,
    tol: &Tolerances,
) -> Result<f64>
where
    F: SpectralFunction + ?Sized,
    G: SpectralFunction + ?Sized,
{
    pointwise_max(q, r, f, g, |a, b| c_fg(a, b).abs(), tol)
}
