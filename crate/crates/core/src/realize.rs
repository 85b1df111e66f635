//! Integer-order rational approximation of a fractional transfer function
//! over a frequency band, and a plain-text export of the result.
//!
//! The fit is a vector-fitting iteration: partial-fraction poles are
//! relocated each round by a linearized least-squares problem in which the
//! unknown denominator reweights the data, until the residual stagnates.
//! Frequencies are normalized by the geometric band centre and every sample
//! is weighted by `1/|target|`, so the error being minimized is relative.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fotf::Fotf;
use crate::ilt::log_grid;
use crate::poly::Poly;

pub const DEFAULT_SAMPLES: usize = 200;
pub const MAX_ROUNDS: usize = 50;
pub const STAGNATION: f64 = 1e-8;
const CONDITION_LIMIT: f64 = 1e13;
const INITIAL_DAMPING: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct FitRequest {
    pub target: Fotf,
    pub band: (f64, f64),
    /// Degree of both numerator and denominator.
    pub order: usize,
    /// Size of the log-spaced fit grid, at least `4 * order`.
    pub n_samples: usize,
}

impl FitRequest {
    pub fn new(target: Fotf, band: (f64, f64), order: usize) -> Self {
        FitRequest {
            target,
            band,
            order,
            n_samples: DEFAULT_SAMPLES.max(4 * order),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.band;
        if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::invalid("band", "need 0 < omega_lo < omega_hi < inf"));
        }
        if self.order < 1 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        if self.n_samples < 4 * self.order {
            return Err(Error::invalid("n_samples", "must be at least 4 * order"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Descending powers of `s`.
    pub num: Vec<f64>,
    /// Descending powers of `s`, monic.
    pub den: Vec<f64>,
    pub max_mag_error_db: f64,
    pub max_phase_error_deg: f64,
    pub fit_stable: bool,
    pub rounds: usize,
}

impl FitResult {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    pub fn to_fotf(&self) -> Result<Fotf> {
        Fotf::from_coeffs(&self.num, &self.den)
    }

    pub fn zpk(&self) -> Result<Filter> {
        let num = Poly::from_descending(&self.num);
        let den = Poly::from_descending(&self.den);
        Ok(Filter::Zpk {
            gain: num.leading() / den.leading(),
            zeros: if num.is_zero() { vec![] } else { num.roots()? },
            poles: den.roots()?,
        })
    }
}

fn horner(desc: &[f64], s: Complex64) -> Complex64 {
    desc.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pole {
    Real(f64),
    /// Upper member of a conjugate pair.
    Pair(Complex64),
}

impl Pole {
    fn width(&self) -> usize {
        match self {
            Pole::Real(_) => 1,
            Pole::Pair(_) => 2,
        }
    }
}

fn width(poles: &[Pole]) -> usize {
    poles.iter().map(Pole::width).sum()
}

/// Real-parameter partial-fraction basis at `s`.
fn basis(poles: &[Pole], s: Complex64, out: &mut Vec<Complex64>) {
    let i = Complex64::new(0.0, 1.0);
    out.clear();
    for p in poles {
        match *p {
            Pole::Real(a) => out.push(1.0 / (s - a)),
            Pole::Pair(p) => {
                let (u, v) = (1.0 / (s - p), 1.0 / (s - p.conj()));
                out.push(u + v);
                out.push(i * u - i * v);
            }
        }
    }
}

struct Solved {
    x: DVector<f64>,
    condition: f64,
}

/// Column-scaled least squares through the SVD.
fn least_squares(mut a: DMatrix<f64>, b: DVector<f64>) -> Result<Solved> {
    let scales: Vec<f64> = a
        .column_iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    let mut x = svd
        .solve(&b, max * 1e-15)
        .map_err(|e| Error::invalid("fit", e.to_string()))?;
    for (j, s) in scales.iter().enumerate() {
        x[j] /= s;
    }
    Ok(Solved { x, condition })
}

/// Places the real and imaginary parts of `row` into rows `r` and `r + 1`.
fn put(a: &mut DMatrix<f64>, r: usize, col: usize, v: Complex64) {
    a[(r, col)] = v.re;
    a[(r + 1, col)] = v.im;
}

struct Data {
    s: Vec<Complex64>,
    h: Vec<Complex64>,
    w: Vec<f64>,
}

/// New poles as the zeros of the weighting function `sigma`.
fn relocate(poles: &[Pole], data: &Data) -> Result<Vec<Pole>> {
    let n = width(poles);
    let k = data.s.len();
    let cols = 2 * n + 1;
    let mut a = DMatrix::zeros(2 * k, cols);
    let mut b = DVector::zeros(2 * k);
    let mut phi = Vec::with_capacity(n);
    for (row, ((&s, &h), &w)) in data.s.iter().zip(&data.h).zip(&data.w).enumerate() {
        basis(poles, s, &mut phi);
        let r = 2 * row;
        for (j, &f) in phi.iter().enumerate() {
            put(&mut a, r, j, w * f);
            put(&mut a, r, n + 1 + j, -w * h * f);
        }
        put(&mut a, r, n, Complex64::new(w, 0.0));
        b[r] = w * h.re;
        b[r + 1] = w * h.im;
    }
    let sol = least_squares(a, b)?;
    let c = sol.x.rows(n + 1, n);

    let mut m = DMatrix::zeros(n, n);
    let mut bvec = DVector::zeros(n);
    let mut j = 0;
    for p in poles {
        match *p {
            Pole::Real(x) => {
                m[(j, j)] = x;
                bvec[j] = 1.0;
                j += 1;
            }
            Pole::Pair(p) => {
                m[(j, j)] = p.re;
                m[(j, j + 1)] = p.im;
                m[(j + 1, j)] = -p.im;
                m[(j + 1, j + 1)] = p.re;
                bvec[j] = 2.0;
                j += 2;
            }
        }
    }
    let m = m - bvec * c.transpose();
    let eig = m.complex_eigenvalues();
    Ok(classify(eig.iter().copied()))
}

/// Groups eigenvalues into real poles and conjugate pairs.
fn classify(eig: impl Iterator<Item = Complex64>) -> Vec<Pole> {
    let mut reals = Vec::new();
    let mut uppers = Vec::new();
    for e in eig {
        if e.im.abs() <= 1e-12 * e.norm().max(1e-300) {
            reals.push(e.re);
        } else if e.im > 0.0 {
            uppers.push(e);
        }
    }
    let mut out: Vec<Pole> = reals.into_iter().map(Pole::Real).collect();
    out.extend(uppers.into_iter().map(Pole::Pair));
    out.sort_by(|a, b| key(a).total_cmp(&key(b)));
    out
}

fn key(p: &Pole) -> f64 {
    match p {
        Pole::Real(x) => x.abs(),
        Pole::Pair(z) => z.norm(),
    }
}

struct Residues {
    /// Complex residue per pole (upper member for pairs).
    r: Vec<Complex64>,
    d: f64,
    rms: f64,
    condition: f64,
}

fn residues(poles: &[Pole], data: &Data) -> Result<Residues> {
    let n = width(poles);
    let k = data.s.len();
    let mut a = DMatrix::zeros(2 * k, n + 1);
    let mut b = DVector::zeros(2 * k);
    let mut phi = Vec::with_capacity(n);
    for (row, ((&s, &h), &w)) in data.s.iter().zip(&data.h).zip(&data.w).enumerate() {
        basis(poles, s, &mut phi);
        let r = 2 * row;
        for (j, &f) in phi.iter().enumerate() {
            put(&mut a, r, j, w * f);
        }
        put(&mut a, r, n, Complex64::new(w, 0.0));
        b[r] = w * h.re;
        b[r + 1] = w * h.im;
    }
    let sol = least_squares(a.clone(), b.clone())?;
    let resid = &a * &sol.x - b;
    let rms = (resid.norm_squared() / k as f64).sqrt();
    let mut r = Vec::with_capacity(poles.len());
    let mut j = 0;
    for p in poles {
        match p {
            Pole::Real(_) => {
                r.push(Complex64::new(sol.x[j], 0.0));
                j += 1;
            }
            Pole::Pair(_) => {
                r.push(Complex64::new(sol.x[j], sol.x[j + 1]));
                j += 2;
            }
        }
    }
    Ok(Residues {
        r,
        d: sol.x[n],
        rms,
        condition: sol.condition,
    })
}

fn cpoly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Ascending coefficients of `prod (s - p)`.
fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    roots.iter().fold(vec![Complex64::new(1.0, 0.0)], |acc, &p| {
        cpoly_mul(&acc, &[-p, Complex64::new(1.0, 0.0)])
    })
}

/// Pole-residue form in the normalized variable to descending real
/// coefficients in `s`, denominator monic.
fn to_coefficients(poles: &[Pole], res: &Residues, omega0: f64) -> (Vec<f64>, Vec<f64>) {
    let mut roots = Vec::new();
    let mut rr = Vec::new();
    for (p, r) in poles.iter().zip(&res.r) {
        match *p {
            Pole::Real(x) => {
                roots.push(Complex64::new(x, 0.0));
                rr.push(*r);
            }
            Pole::Pair(z) => {
                roots.extend([z, z.conj()]);
                rr.extend([*r, r.conj()]);
            }
        }
    }
    let n = roots.len();
    let den = from_roots(&roots);
    let mut num: Vec<Complex64> = den.iter().map(|c| c * res.d).collect();
    for i in 0..n {
        let others: Vec<Complex64> = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &p)| p)
            .collect();
        for (k, c) in from_roots(&others).iter().enumerate() {
            num[k] += rr[i] * c;
        }
    }
    // s' = s / omega0, then divide through by omega0^-n
    let rescale = |v: &[Complex64]| -> Vec<f64> {
        let mut out: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(k, c)| c.re * omega0.powi(n as i32 - k as i32))
            .collect();
        out.reverse();
        out
    };
    (rescale(&num), rescale(&den))
}

/// Fits `num(jω)/den(jω)` to the target over the requested band.
pub fn fit_rational(req: &FitRequest) -> Result<FitResult> {
    req.validate()?;
    let (lo, hi) = req.band;
    let omega0 = (lo * hi).sqrt();
    let omegas = log_grid(lo, hi, req.n_samples);
    let form = req.target.commensurate_form();
    let h: Vec<Complex64> = omegas.iter().map(|&w| form.eval(Complex64::new(0.0, w))).collect();
    if let Some(i) = h.iter().position(|v| !v.is_finite() || v.norm() == 0.0) {
        return Err(Error::invalid(
            "target",
            format!("not evaluable at omega = {}", omegas[i]),
        ));
    }
    let data = Data {
        s: omegas.iter().map(|&w| Complex64::new(0.0, w / omega0)).collect(),
        w: h.iter().map(|v| 1.0 / v.norm()).collect(),
        h,
    };

    let betas = log_grid(lo / omega0, hi / omega0, req.order.div_ceil(2).max(1));
    let mut poles: Vec<Pole> = if req.order % 2 == 0 {
        betas
            .iter()
            .map(|&b| Pole::Pair(Complex64::new(-INITIAL_DAMPING * b, b)))
            .collect()
    } else {
        let mut v: Vec<Pole> = betas[..betas.len() - 1]
            .iter()
            .map(|&b| Pole::Pair(Complex64::new(-INITIAL_DAMPING * b, b)))
            .collect();
        v.push(Pole::Real(-betas[betas.len() - 1]));
        v
    };
    if req.order == 1 {
        poles = vec![Pole::Real(-1.0)];
    }

    let mut res = residues(&poles, &data)?;
    let mut rounds = 0;
    let mut last_change = f64::INFINITY;
    while rounds < MAX_ROUNDS {
        rounds += 1;
        let next = relocate(&poles, &data)?;
        let next_res = residues(&next, &data)?;
        last_change = (next_res.rms - res.rms).abs() / res.rms.max(f64::MIN_POSITIVE);
        poles = next;
        res = next_res;
        if last_change < STAGNATION || res.rms < 1e-14 {
            break;
        }
    }
    if !(last_change < STAGNATION || res.rms < 1e-14) {
        return Err(Error::FitNonConvergence { rounds, last_change });
    }
    if res.condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition: res.condition,
        });
    }

    // drop poles that carry no residue
    let hmax = data.h.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..poles.len())
        .filter(|&i| res.r[i].norm() > 1e-11 * hmax * key(&poles[i]).max(1.0))
        .collect();
    if keep.len() < poles.len() {
        poles = keep.iter().map(|&i| poles[i]).collect();
        res = residues(&poles, &data)?;
    }

    let (num, den) = to_coefficients(&poles, &res, omega0);
    let fit_stable = match Poly::from_descending(&den).roots() {
        Ok(r) => r.iter().all(|p| p.re < 0.0),
        Err(_) => false,
    };
    let mut out = FitResult {
        num,
        den,
        max_mag_error_db: 0.0,
        max_phase_error_deg: 0.0,
        fit_stable,
        rounds,
    };
    let (mag, phase) = band_errors(&out, &req.target, req.band, 4 * req.n_samples);
    out.max_mag_error_db = mag;
    out.max_phase_error_deg = phase;
    Ok(out)
}

/// Largest magnitude (dB) and phase (degrees) deviation from the target on
/// an `n`-point log grid.
pub fn band_errors(fit: &FitResult, target: &Fotf, band: (f64, f64), n: usize) -> (f64, f64) {
    let form = target.commensurate_form();
    validation_grid(band, n).iter().fold((0.0, 0.0), |(m, p), &w| {
        let s = Complex64::new(0.0, w);
        let ratio = fit.eval(s) / form.eval(s);
        (
            f64::max(m, (20.0 * ratio.norm().log10()).abs()),
            f64::max(p, ratio.arg().to_degrees().abs()),
        )
    })
}

pub fn validation_grid(band: (f64, f64), n: usize) -> Vec<f64> {
    log_grid(band.0, band.1, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportForm {
    TfCoeffs,
    Zpk,
}

/// A rational filter as read back from an export.
#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Tf { num: Vec<f64>, den: Vec<f64> },
    Zpk {
        gain: f64,
        zeros: Vec<Complex64>,
        poles: Vec<Complex64>,
    },
}

impl Filter {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        match self {
            Filter::Tf { num, den } => horner(num, s) / horner(den, s),
            Filter::Zpk { gain, zeros, poles } => {
                let n: Complex64 = zeros.iter().map(|z| s - z).product();
                let d: Complex64 = poles.iter().map(|p| s - p).product();
                *gain * n / d
            }
        }
    }
}

const HEADER: &str = "# fraccancel rational filter";

/// Plain-text listing: a header naming the form and ordering, then one
/// value per line at full precision. Roots are written as `re im`.
pub fn export_filter(res: &FitResult, form: ExportForm) -> Result<String> {
    let mut out = String::from(HEADER);
    out.push('\n');
    match form {
        ExportForm::TfCoeffs => {
            out.push_str("# form: tf_coeffs\n# ordering: descending powers of s\n");
            for (label, c) in [("num", &res.num), ("den", &res.den)] {
                out.push_str(&format!("{label} {}\n", c.len()));
                for v in c {
                    out.push_str(&format!("{v:e}\n"));
                }
            }
        }
        ExportForm::Zpk => {
            let Filter::Zpk { gain, zeros, poles } = res.zpk()? else {
                unreachable!()
            };
            out.push_str("# form: zpk\n# ordering: gain, then zeros and poles as `re im`\n");
            out.push_str(&format!("gain 1\n{gain:e}\n"));
            for (label, r) in [("zeros", &zeros), ("poles", &poles)] {
                out.push_str(&format!("{label} {}\n", r.len()));
                for z in r {
                    out.push_str(&format!("{:e} {:e}\n", z.re, z.im));
                }
            }
        }
    }
    Ok(out)
}

fn parse_err(reason: impl Into<String>) -> Error {
    Error::schema("filter", reason)
}

/// Reads back the output of [`export_filter`].
pub fn parse_filter(text: &str) -> Result<Filter> {
    let mut form = None;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
    while let Some(l) = lines.peek() {
        let Some(comment) = l.strip_prefix('#') else { break };
        if let Some(f) = comment.trim().strip_prefix("form:") {
            form = Some(f.trim().to_string());
        }
        lines.next();
    }
    let mut section = |name: &str| -> Result<Vec<Vec<f64>>> {
        let head = lines.next().ok_or_else(|| parse_err(format!("missing `{name}`")))?;
        let count = head
            .strip_prefix(name)
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or_else(|| parse_err(format!("expected `{name} <count>`, got `{head}`")))?;
        (0..count)
            .map(|_| {
                let l = lines.next().ok_or_else(|| parse_err(format!("`{name}` is short")))?;
                l.split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|e| parse_err(format!("`{v}`: {e}"))))
                    .collect()
            })
            .collect()
    };
    let flat = |rows: Vec<Vec<f64>>| -> Result<Vec<f64>> {
        rows.into_iter()
            .map(|r| match r[..] {
                [v] => Ok(v),
                _ => Err(parse_err("expected one value per line")),
            })
            .collect()
    };
    let pairs = |rows: Vec<Vec<f64>>| -> Result<Vec<Complex64>> {
        rows.into_iter()
            .map(|r| match r[..] {
                [re, im] => Ok(Complex64::new(re, im)),
                _ => Err(parse_err("expected `re im` per line")),
            })
            .collect()
    };
    match form.as_deref() {
        Some("tf_coeffs") => {
            let num = flat(section("num")?)?;
            let den = flat(section("den")?)?;
            Ok(Filter::Tf { num, den })
        }
        Some("zpk") => {
            let gain = flat(section("gain")?)?;
            let zeros = pairs(section("zeros")?)?;
            let poles = pairs(section("poles")?)?;
            Ok(Filter::Zpk {
                gain: gain[0],
                zeros,
                poles,
            })
        }
        other => Err(parse_err(format!("unknown form {other:?}"))),
    }
}
