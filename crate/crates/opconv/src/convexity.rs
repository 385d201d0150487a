//! Scalar convex functions and their diagnostics: a small parseable family
//! of test functions with optional analytic one-sided derivatives, numeric
//! one-sided differentiation, affine-chord search, chord normalization,
//! derivative-variation partitions, and midpoint strictness margins.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Base step for numeric one-sided derivatives.
pub const DERIV_H_BASE: f64 = 1e-6;
/// Default absolute tolerance for affine-chord detection.
pub const CHORD_TOL: f64 = 1e-9;
/// Default grid size for the affine-chord scan.
pub const CHORD_GRID: usize = 129;
/// Argument tolerance for golden-section minimization.
pub const GOLDEN_TOL: f64 = 1e-12;
/// Relative threshold below which a chord gap counts as affine.
pub const AFFINE_GAMMA_TOL: f64 = 1e-12;
/// Width factor (relative to the partition span) under which a piece is a
/// degenerate kink bracket and is exempt from gap verification.
pub const KINK_WIDTH_FACTOR: f64 = 1e-10;
/// Smallest derivative-variation budget accepted without analytic
/// derivatives; numeric one-sided differences cannot certify less.
pub const MIN_NUMERIC_EPS: f64 = 1e-4;
/// Hard cap on partition size.
pub const MAX_PARTITION_POINTS: usize = 1_000_000;
/// Grid used by the kink pre-scan of a partition.
pub const KINK_SCAN_GRID: usize = 257;

/// Closed interval with optionally infinite endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::BadRange {
                msg: format!("interval needs lo <= hi, got [{lo}, {hi}]"),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn whole() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    #[inline]
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Finite working bracket: each infinite side is replaced by the given
    /// default.
    pub fn finite_bracket(&self, lo_default: f64, hi_default: f64) -> (f64, f64) {
        let lo = if self.lo.is_finite() { self.lo } else { lo_default };
        let hi = if self.hi.is_finite() { self.hi } else { hi_default };
        (lo, hi)
    }
}

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct AnalyticDerivatives {
    plus: EvalFn,
    minus: EvalFn,
}

/// Scalar function with a domain interval, an evaluator, parse metadata for
/// echoing, and optional analytic one-sided derivatives.
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    params: Vec<(String, f64)>,
    points: Option<Vec<(f64, f64)>>,
    interval: Interval,
    eval_fn: EvalFn,
    deriv: Option<AnalyticDerivatives>,
}

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("interval", &self.interval)
            .finish()
    }
}

impl ScalarFunction {
    fn with_both_sides(
        name: &str,
        params: Vec<(String, f64)>,
        interval: Interval,
        eval_fn: EvalFn,
        d: EvalFn,
    ) -> Self {
        ScalarFunction {
            name: name.to_string(),
            params,
            points: None,
            interval,
            eval_fn,
            deriv: Some(AnalyticDerivatives {
                plus: d.clone(),
                minus: d,
            }),
        }
    }

    /// x^2 on the whole line.
    pub fn square() -> Self {
        Self::with_both_sides(
            "square",
            vec![],
            Interval::whole(),
            Arc::new(|x| x * x),
            Arc::new(|x| 2.0 * x),
        )
    }

    /// |x|^p for p > 1 on the whole line.
    pub fn abspow(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::BadFunctionSpec {
                spec: format!("abspow:{p}"),
                msg: "exponent must be finite and > 1".into(),
            });
        }
        let d = move |x: f64| {
            if x == 0.0 {
                0.0
            } else {
                p * x.abs().powf(p - 1.0) * x.signum()
            }
        };
        Ok(Self::with_both_sides(
            "abspow",
            vec![("p".into(), p)],
            Interval::whole(),
            Arc::new(move |x: f64| x.abs().powf(p)),
            Arc::new(d),
        ))
    }

    /// e^x on the whole line.
    pub fn exp() -> Self {
        Self::with_both_sides(
            "exp",
            vec![],
            Interval::whole(),
            Arc::new(f64::exp),
            Arc::new(f64::exp),
        )
    }

    /// |x|: convex but affine on each half line, with a derivative jump of 2
    /// at the origin.
    pub fn abs() -> Self {
        ScalarFunction {
            name: "abs".into(),
            params: vec![],
            points: None,
            interval: Interval::whole(),
            eval_fn: Arc::new(f64::abs),
            deriv: Some(AnalyticDerivatives {
                plus: Arc::new(|x| if x >= 0.0 { 1.0 } else { -1.0 }),
                minus: Arc::new(|x| if x > 0.0 { 1.0 } else { -1.0 }),
            }),
        }
    }

    /// Zero on [-w, w], (|x| - w)^2 outside: convex, C^1, flat on a segment.
    pub fn hinge_splice(w: f64) -> Result<Self> {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::BadFunctionSpec {
                spec: format!("hinge-splice:{w}"),
                msg: "half-width must be finite and >= 0".into(),
            });
        }
        let d = move |x: f64| {
            if x > w {
                2.0 * (x - w)
            } else if x < -w {
                2.0 * (x + w)
            } else {
                0.0
            }
        };
        Ok(Self::with_both_sides(
            "hinge-splice",
            vec![("w".into(), w)],
            Interval::whole(),
            Arc::new(move |x: f64| {
                let a = x.abs() - w;
                if a <= 0.0 {
                    0.0
                } else {
                    a * a
                }
            }),
            Arc::new(d),
        ))
    }

    /// Piecewise-linear interpolant of >= 2 points with strictly increasing
    /// abscissas; domain is [x_first, x_last]. Evaluation clamps to the
    /// domain so boundary-tolerance spectral checks stay well defined.
    pub fn polyline(points: &[(f64, f64)]) -> Result<Self> {
        let spec_echo = || {
            format!(
                "polyline:{}",
                points
                    .iter()
                    .map(|(x, y)| format!("{x},{y}"))
                    .collect::<Vec<_>>()
                    .join(";")
            )
        };
        if points.len() < 2 {
            return Err(Error::BadFunctionSpec {
                spec: spec_echo(),
                msg: "need at least 2 points".into(),
            });
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::BadFunctionSpec {
                spec: spec_echo(),
                msg: "points must be finite".into(),
            });
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::BadFunctionSpec {
                    spec: spec_echo(),
                    msg: "abscissas must be strictly increasing".into(),
                });
            }
        }
        let xs: Arc<Vec<f64>> = Arc::new(points.iter().map(|p| p.0).collect());
        let ys: Arc<Vec<f64>> = Arc::new(points.iter().map(|p| p.1).collect());
        let slopes: Arc<Vec<f64>> = Arc::new(
            points
                .windows(2)
                .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                .collect(),
        );
        let interval = Interval::new(xs[0], *xs.last().unwrap())?;

        let (exs, eys, esl) = (xs.clone(), ys.clone(), slopes.clone());
        let eval_fn: EvalFn = Arc::new(move |x: f64| {
            if x <= exs[0] {
                return eys[0];
            }
            if x >= *exs.last().unwrap() {
                return *eys.last().unwrap();
            }
            let idx = exs.partition_point(|&p| p <= x) - 1;
            eys[idx] + esl[idx] * (x - exs[idx])
        });
        let (pxs, psl) = (xs.clone(), slopes.clone());
        let plus: EvalFn = Arc::new(move |x: f64| {
            if x >= *pxs.last().unwrap() {
                return *psl.last().unwrap();
            }
            if x <= pxs[0] {
                return psl[0];
            }
            psl[pxs.partition_point(|&p| p <= x) - 1]
        });
        let (mxs, msl) = (xs, slopes);
        let minus: EvalFn = Arc::new(move |x: f64| {
            if x <= mxs[0] {
                return msl[0];
            }
            if x >= *mxs.last().unwrap() {
                return *msl.last().unwrap();
            }
            msl[mxs.partition_point(|&p| p < x) - 1]
        });
        Ok(ScalarFunction {
            name: "polyline".into(),
            params: vec![],
            points: Some(points.to_vec()),
            interval,
            eval_fn,
            deriv: Some(AnalyticDerivatives { plus, minus }),
        })
    }

    /// x itself; functional calculus with it is the identity map.
    pub fn identity() -> Self {
        Self::with_both_sides(
            "identity",
            vec![],
            Interval::whole(),
            Arc::new(|x| x),
            Arc::new(|_| 1.0),
        )
    }

    /// c0 + c1 x + c2 x^2 + ... via Horner; test helper with analytic
    /// derivative.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let c: Arc<Vec<f64>> = Arc::new(coeffs.to_vec());
        let dc: Arc<Vec<f64>> = Arc::new(
            coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| k as f64 * v)
                .collect(),
        );
        let horner = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &v| acc * x + v);
        let ce = c.clone();
        let params = coeffs
            .iter()
            .enumerate()
            .map(|(k, v)| (format!("c{k}"), *v))
            .collect();
        Self::with_both_sides(
            "poly",
            params,
            Interval::whole(),
            Arc::new(move |x| horner(&ce, x)),
            Arc::new(move |x| horner(&dc, x)),
        )
    }

    /// x / (1 + x^2): the bounded strictly increasing transform used to
    /// compare residuals of bounded and unbounded test functions.
    pub fn bounded_transform() -> Self {
        Self::with_both_sides(
            "phi",
            vec![],
            Interval::whole(),
            Arc::new(|x| x / (1.0 + x * x)),
            Arc::new(|x| {
                let d = 1.0 + x * x;
                (1.0 - x * x) / (d * d)
            }),
        )
    }

    /// Evaluator-only wrapper without analytic derivatives; differentiation
    /// falls back to one-sided finite differences.
    pub fn from_closure(
        name: &str,
        interval: Interval,
        eval_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarFunction {
            name: name.to_string(),
            params: vec![],
            points: None,
            interval,
            eval_fn: Arc::new(eval_fn),
            deriv: None,
        }
    }

    /// Parses the function mini-language:
    /// `square` | `abspow:P` | `exp` | `abs` | `hinge-splice:W` |
    /// `polyline:x1,y1;x2,y2;...`
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: &str| Error::BadFunctionSpec {
            spec: spec.to_string(),
            msg: msg.to_string(),
        };
        let (head, payload) = match spec.split_once(':') {
            Some((h, p)) => (h.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        let no_payload = |f: ScalarFunction| {
            if payload.is_some() {
                Err(bad("takes no parameter"))
            } else {
                Ok(f)
            }
        };
        match head {
            "square" => no_payload(Self::square()),
            "exp" => no_payload(Self::exp()),
            "abs" => no_payload(Self::abs()),
            "abspow" => {
                let p: f64 = payload
                    .ok_or_else(|| bad("needs an exponent, e.g. abspow:1.5"))?
                    .parse()
                    .map_err(|_| bad("exponent is not a number"))?;
                Self::abspow(p)
            }
            "hinge-splice" => {
                let w: f64 = payload
                    .ok_or_else(|| bad("needs a half-width, e.g. hinge-splice:0.25"))?
                    .parse()
                    .map_err(|_| bad("half-width is not a number"))?;
                Self::hinge_splice(w)
            }
            "polyline" => {
                let body = payload.ok_or_else(|| bad("needs points, e.g. polyline:0,0;1,1"))?;
                let mut pts = Vec::new();
                for chunk in body.split(';') {
                    let (xs, ys) = chunk
                        .split_once(',')
                        .ok_or_else(|| bad("each point must be x,y"))?;
                    let x: f64 = xs.trim().parse().map_err(|_| bad("bad abscissa"))?;
                    let y: f64 = ys.trim().parse().map_err(|_| bad("bad ordinate"))?;
                    pts.push((x, y));
                }
                Self::polyline(&pts)
            }
            _ => Err(bad(
                "unknown function; expected square | abspow:P | exp | abs | hinge-splice:W | polyline:...",
            )),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval_fn)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn points(&self) -> Option<&[(f64, f64)]> {
        self.points.as_deref()
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.deriv.is_some()
    }

    /// Comma-free label for CSV cells; polyline points use `~` between
    /// coordinates.
    pub fn csv_token(&self) -> String {
        if let Some(pts) = &self.points {
            return format!(
                "polyline:{}",
                pts.iter()
                    .map(|(x, y)| format!("{x}~{y}"))
                    .collect::<Vec<_>>()
                    .join(";")
            );
        }
        match self.params.as_slice() {
            [] => self.name.clone(),
            one_or_more => format!(
                "{}:{}",
                self.name,
                one_or_more
                    .iter()
                    .map(|(_, v)| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join(":")
            ),
        }
    }
}

/// Which one-sided derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// One-sided derivative of `f` at `x`: analytic when the function carries
/// closed forms, otherwise a second-order one-sided difference with one
/// Richardson extrapolation. The numeric stencil shrinks near a domain
/// endpoint and errors if no room is left on the required side.
pub fn one_sided_derivative(f: &ScalarFunction, x: f64, side: Side) -> Result<f64> {
    let iv = *f.interval();
    if !iv.contains(x, 0.0) {
        return Err(Error::OutsideInterval {
            x,
            lo: iv.lo(),
            hi: iv.hi(),
        });
    }
    if let Some(d) = &f.deriv {
        return Ok(match side {
            Side::Plus => (d.plus)(x),
            Side::Minus => (d.minus)(x),
        });
    }
    let room = match side {
        Side::Plus => (iv.hi() - x) / 2.0,
        Side::Minus => (x - iv.lo()) / 2.0,
    };
    let scale = 1.0_f64.max(x.abs());
    let h = (DERIV_H_BASE * scale).min(room);
    if !(h > 1e-12 * scale) {
        return Err(Error::OutsideInterval {
            x,
            lo: iv.lo(),
            hi: iv.hi(),
        });
    }
    let stencil = |h: f64| match side {
        Side::Plus => (-3.0 * f.eval(x) + 4.0 * f.eval(x + h) - f.eval(x + 2.0 * h)) / (2.0 * h),
        Side::Minus => (3.0 * f.eval(x) - 4.0 * f.eval(x - h) + f.eval(x - 2.0 * h)) / (2.0 * h),
    };
    let d_h = stencil(h);
    let d_half = stencil(h / 2.0);
    Ok((4.0 * d_half - d_h) / 3.0)
}

/// Golden-section minimization on [a, b] with an absolute argument
/// tolerance. Ties resolve toward the left bracket, so the result is
/// deterministic even on flat valleys.
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Evenly spaced grid; the last point is exactly `hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
                .collect()
        }
    }
}

/// Points x < y and interior ratio t where the chord of f lies on the graph
/// within tolerance: f((1-t)x + t y) agrees with (1-t)f(x) + t f(y).
#[derive(Clone, Copy, Debug)]
pub struct ChordWitness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    /// Signed interpolation defect at the witness; <= 0 for convex f.
    pub defect: f64,
}

fn chord_defect(f: &ScalarFunction, x: f64, fx: f64, y: f64, fy: f64, t: f64) -> f64 {
    f.eval((1.0 - t) * x + t * y) - ((1.0 - t) * fx + t * fy)
}

/// Scans a grid on [lo, hi] for an affine chord of f: a pair of grid points
/// whose midpoint-family defects vanish within `tol`. Among hits the widest
/// pair wins (then the rightmost, then the earliest probe ratio). If the
/// grid scan finds nothing, the probe ratio is polished by golden-section
/// search over t in [1/4, 3/4] for each pair, widest first; ratios outside
/// that window are never reported because every chord's defect vanishes as
/// t approaches 0 or 1.
pub fn find_affine_chord(
    f: &ScalarFunction,
    lo: f64,
    hi: f64,
    grid_n: usize,
    tol: f64,
) -> Result<Option<ChordWitness>> {
    if grid_n < 3 {
        return Err(Error::BadRange {
            msg: format!("chord grid needs >= 3 points, got {grid_n}"),
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::BadRange {
            msg: format!("chord tolerance must be positive, got {tol}"),
        });
    }
    if !(lo < hi) {
        return Err(Error::BadRange {
            msg: format!("chord bracket needs lo < hi, got [{lo}, {hi}]"),
        });
    }
    for end in [lo, hi] {
        if !f.interval().contains(end, 0.0) {
            return Err(Error::OutsideInterval {
                x: end,
                lo: f.interval().lo(),
                hi: f.interval().hi(),
            });
        }
    }
    let xs = linspace(lo, hi, grid_n);
    let fs: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    if fs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    const PROBES: [f64; 3] = [0.5, 0.25, 0.75];

    let mut best: Option<(usize, usize, usize, ChordWitness)> = None;
    for i in 0..grid_n {
        for j in (i + 1)..grid_n {
            for (rank, &t) in PROBES.iter().enumerate() {
                let d = chord_defect(f, xs[i], fs[i], xs[j], fs[j], t);
                if d.abs() <= tol {
                    let key = (j - i, i + j, PROBES.len() - rank);
                    let better = match &best {
                        None => true,
                        Some((delta, sum, rk, _)) => key > (*delta, *sum, *rk),
                    };
                    if better {
                        best = Some((
                            key.0,
                            key.1,
                            key.2,
                            ChordWitness {
                                x: xs[i],
                                y: xs[j],
                                t,
                                defect: d,
                            },
                        ));
                    }
                }
            }
        }
    }
    if let Some((_, _, _, w)) = best {
        return Ok(Some(w));
    }

    // Polish pass: widest pairs first, rightmost first within a width.
    for delta in (1..grid_n).rev() {
        for i in (0..grid_n - delta).rev() {
            let j = i + delta;
            let (tm, neg) = golden_section_min(
                |t| -chord_defect(f, xs[i], fs[i], xs[j], fs[j], t),
                0.25,
                0.75,
                GOLDEN_TOL,
            );
            if neg.abs() <= tol {
                let d = chord_defect(f, xs[i], fs[i], xs[j], fs[j], tm);
                return Ok(Some(ChordWitness {
                    x: xs[i],
                    y: xs[j],
                    t: tm,
                    defect: d,
                }));
            }
        }
    }
    Ok(None)
}

/// f minus its chord over [a, x], with the depth of the gap.
///
/// g = f - chord vanishes at both ends and is <= 0 between them when f is
/// convex; gamma = -min g > 0 certifies strictness on the pair. A gamma
/// indistinguishable from zero, or any mesh point poking above the chord,
/// reports the pair as not strictly convex.
#[derive(Clone)]
pub struct ChordNormalization {
    f: ScalarFunction,
    /// Left chord abscissa.
    pub a: f64,
    /// Right chord abscissa.
    pub x: f64,
    /// Argmin of the normalized gap on [a, x].
    pub c: f64,
    /// Depth of the gap: gamma = -min g >= 0.
    pub gamma: f64,
    slope: f64,
}

impl ChordNormalization {
    /// g(s) = f(s) - chord(s).
    pub fn g(&self, s: f64) -> f64 {
        self.f.eval(s) - (self.f.eval(self.a) + self.slope * (s - self.a))
    }

    /// Largest coefficient beta with g + gamma >= beta on [y, +inf):
    /// beta(y) = g(y) + gamma for y to the right of the chord.
    pub fn beta(&self, y: f64) -> Result<f64> {
        if !(y > self.x) {
            return Err(Error::BadRange {
                msg: format!("beta needs y > {}, got {y}", self.x),
            });
        }
        if !self.f.interval().contains(y, 0.0) {
            return Err(Error::OutsideInterval {
                x: y,
                lo: self.f.interval().lo(),
                hi: self.f.interval().hi(),
            });
        }
        Ok(self.g(y) + self.gamma)
    }
}

pub fn chord_normalize(f: &ScalarFunction, a: f64, x: f64) -> Result<ChordNormalization> {
    if !(a < x) {
        return Err(Error::BadRange {
            msg: format!("chord needs a < x, got a = {a}, x = {x}"),
        });
    }
    for end in [a, x] {
        if !f.interval().contains(end, 0.0) {
            return Err(Error::OutsideInterval {
                x: end,
                lo: f.interval().lo(),
                hi: f.interval().hi(),
            });
        }
    }
    let fa = f.eval(a);
    let fx = f.eval(x);
    if !(fa.is_finite() && fx.is_finite()) {
        return Err(Error::NonFinite);
    }
    let slope = (fx - fa) / (x - a);
    let g = |s: f64| f.eval(s) - (fa + slope * (s - a));
    let scale = 1.0_f64.max(fa.abs()).max(fx.abs());

    // Anything above the chord on a mesh disqualifies the pair outright.
    let mesh = linspace(a, x, CHORD_GRID);
    for &s in &mesh {
        if g(s) > AFFINE_GAMMA_TOL * scale {
            return Err(Error::NotConvexDetected {
                a,
                x,
                gamma: -g(s),
            });
        }
    }

    let tol = GOLDEN_TOL * (x - a).max(1.0);
    let (c, gc) = golden_section_min(g, a, x, tol);
    // The golden bracket assumes unimodality; a mesh minimum below it means
    // the gap dips elsewhere, so keep whichever is deeper. On an exact tie
    // the (leftmost) mesh point wins: grid points make cleaner reports than
    // the sqrt(eps)-fuzzy argmin a value-comparison search can localize.
    let (mc, mg) = mesh
        .iter()
        .map(|&s| (s, g(s)))
        .reduce(|acc, cand| if cand.1 < acc.1 { cand } else { acc })
        .expect("mesh is nonempty");
    let (c, gc) = if mg <= gc { (mc, mg) } else { (c, gc) };
    let gamma = -gc;
    if gamma <= AFFINE_GAMMA_TOL * scale {
        return Err(Error::NotConvexDetected { a, x, gamma });
    }
    Ok(ChordNormalization {
        f: f.clone(),
        a,
        x,
        c,
        gamma,
        slope,
    })
}

/// Piece record from partition verification.
#[derive(Clone, Copy, Debug)]
pub struct GapRecord {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    /// Inward derivative variation across the piece; None for degenerate
    /// kink brackets, which are exempt.
    pub gap: Option<f64>,
    pub ok: bool,
}

/// Partition of [lo, hi] whose pieces each carry derivative variation
/// strictly below eps, with kink locations isolated into their own boundary
/// points (or degenerate brackets when the kink is not exactly
/// representable).
#[derive(Clone, Debug)]
pub struct Partition {
    pub lo: f64,
    pub hi: f64,
    pub eps: f64,
    pub points: Vec<f64>,
    /// Detected derivative jumps: (u, v) with u == v for an exactly located
    /// kink, u < v for a terminating bracket.
    pub kinks: Vec<(f64, f64)>,
}

impl Partition {
    pub fn piece_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn degenerate_width(&self) -> f64 {
        KINK_WIDTH_FACTOR * (self.hi - self.lo)
    }
}

struct PartitionCtx<'a> {
    f: &'a ScalarFunction,
    eps: f64,
    kink_w: f64,
}

impl PartitionCtx<'_> {
    fn d_plus(&self, x: f64) -> Result<f64> {
        one_sided_derivative(self.f, x, Side::Plus)
    }

    fn d_minus(&self, x: f64) -> Result<f64> {
        one_sided_derivative(self.f, x, Side::Minus)
    }

    /// Derivative variation of the open piece (u, v): inward derivatives
    /// exclude any jumps sitting exactly at the ends.
    fn inner_gap(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.d_minus(v)? - self.d_plus(u)?)
    }

    fn jump(&self, w: f64) -> Result<f64> {
        Ok(self.d_plus(w)? - self.d_minus(w)?)
    }

    fn scan_cell(&self, u: f64, v: f64, out: &mut Vec<(f64, f64)>) -> Result<()> {
        if self.inner_gap(u, v)? < self.eps {
            return Ok(());
        }
        if v - u <= self.kink_w {
            out.push((u, v));
            return Ok(());
        }
        let w = 0.5 * (u + v);
        if self.jump(w)? >= self.eps {
            out.push((w, w));
        }
        self.scan_cell(u, w, out)?;
        self.scan_cell(w, v, out)
    }
}

/// Splits [lo, hi] into pieces whose inward derivative variation is
/// strictly below eps. Kinks (derivative jumps >= eps) become boundary
/// points; a kink that bisection cannot place exactly becomes a degenerate
/// bracket of two boundary points at most `KINK_WIDTH_FACTOR * (hi - lo)`
/// apart, and such slivers are exempt from the gap requirement.
pub fn epsilon_partition(f: &ScalarFunction, lo: f64, hi: f64, eps: f64) -> Result<Partition> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::BadRange {
            msg: format!("partition needs finite lo < hi, got [{lo}, {hi}]"),
        });
    }
    for end in [lo, hi] {
        if !f.interval().contains(end, 0.0) {
            return Err(Error::OutsideInterval {
                x: end,
                lo: f.interval().lo(),
                hi: f.interval().hi(),
            });
        }
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadRange {
            msg: format!("eps must be positive and finite, got {eps}"),
        });
    }
    if !f.has_analytic_derivatives() && eps < MIN_NUMERIC_EPS {
        return Err(Error::BadRange {
            msg: format!(
                "eps = {eps} is below {MIN_NUMERIC_EPS}, the floor for numeric one-sided derivatives"
            ),
        });
    }
    let span = hi - lo;
    let ctx = PartitionCtx {
        f,
        eps,
        kink_w: KINK_WIDTH_FACTOR * span,
    };

    // Kink pre-scan: explicit jumps at grid points, then bisection inside
    // each cell whose inward variation is still >= eps.
    let grid = linspace(lo, hi, KINK_SCAN_GRID);
    let mut kinks: Vec<(f64, f64)> = Vec::new();
    for &w in &grid[1..KINK_SCAN_GRID - 1] {
        if ctx.jump(w)? >= eps {
            kinks.push((w, w));
        }
    }
    for cell in grid.windows(2) {
        ctx.scan_cell(cell[0], cell[1], &mut kinks)?;
    }
    kinks.sort_by(|a, b| a.partial_cmp(b).expect("kink locations are finite"));
    kinks.dedup();

    let mut boundaries = vec![lo, hi];
    for &(u, v) in &kinks {
        boundaries.push(u);
        if v > u {
            boundaries.push(v);
        }
    }
    boundaries.sort_by(|a, b| a.partial_cmp(b).expect("boundaries are finite"));
    boundaries.dedup();
    boundaries.retain(|&b| b >= lo && b <= hi);

    // Greedy refinement of each non-degenerate segment: take the largest
    // right step whose inward variation stays below eps.
    let mut points = vec![lo];
    for seg in boundaries.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b - a <= ctx.kink_w {
            points.push(b);
            continue;
        }
        let mut u = a;
        loop {
            if points.len() > MAX_PARTITION_POINTS {
                return Err(Error::TooManyPoints {
                    max: MAX_PARTITION_POINTS,
                });
            }
            if b - u <= ctx.kink_w {
                points.push(b);
                break;
            }
            let full = b - u;
            if ctx.inner_gap(u, b)? < eps {
                points.push(b);
                break;
            }
            let mut step = full;
            let mut halvings = 0;
            let mut found_good = false;
            while halvings < 60 {
                step *= 0.5;
                halvings += 1;
                if u + step <= u {
                    break;
                }
                if ctx.inner_gap(u, u + step)? < eps {
                    found_good = true;
                    break;
                }
            }
            if !found_good {
                // Variation stays >= eps down to sub-bracket widths: an
                // undetected kink. Terminate it as a degenerate sliver.
                let v = u + step.max(f64::EPSILON * 1.0_f64.max(u.abs()));
                points.push(v.min(b));
                u = v.min(b);
                continue;
            }
            let mut s_good = step;
            let mut s_bad = (2.0 * step).min(full);
            for _ in 0..50 {
                let mid = 0.5 * (s_good + s_bad);
                if ctx.inner_gap(u, u + mid)? < eps {
                    s_good = mid;
                } else {
                    s_bad = mid;
                }
            }
            let v = u + s_good;
            points.push(v);
            u = v;
        }
    }
    points.dedup();

    Ok(Partition {
        lo,
        hi,
        eps,
        points,
        kinks,
    })
}

/// Re-measures every piece of a partition. Degenerate slivers (width at
/// most the kink-bracket width) are recorded with `gap: None` and pass by
/// construction; every other piece must have inward derivative variation
/// strictly below the partition's eps.
pub fn verify_partition(f: &ScalarFunction, partition: &Partition) -> Result<Vec<GapRecord>> {
    let ctx = PartitionCtx {
        f,
        eps: partition.eps,
        kink_w: partition.degenerate_width(),
    };
    let mut records = Vec::with_capacity(partition.piece_count());
    for pair in partition.points.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        let width = v - u;
        if width <= ctx.kink_w {
            records.push(GapRecord {
                lo: u,
                hi: v,
                width,
                gap: None,
                ok: true,
            });
            continue;
        }
        let gap = ctx.inner_gap(u, v)?;
        records.push(GapRecord {
            lo: u,
            hi: v,
            width,
            gap: Some(gap),
            ok: gap < partition.eps,
        });
    }
    Ok(records)
}

/// Smallest midpoint convexity margin over all pairs of grid points:
/// min (f(x) + f(y))/2 - f((x + y)/2), clamped at zero. Strictly convex
/// functions give a strictly positive margin on any grid with >= 2 points;
/// functions with an affine stretch give zero once two grid points land in
/// it.
pub fn strictness_margin(f: &ScalarFunction, grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::BadRange {
            msg: format!("margin grid needs >= 2 points, got {}", grid.len()),
        });
    }
    for &x in grid {
        if !f.interval().contains(x, 0.0) {
            return Err(Error::OutsideInterval {
                x,
                lo: f.interval().lo(),
                hi: f.interval().hi(),
            });
        }
    }
    let fs: Vec<f64> = grid.iter().map(|&x| f.eval(x)).collect();
    if fs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut margin = f64::INFINITY;
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            let m = 0.5 * (fs[i] + fs[j]) - f.eval(0.5 * (grid[i] + grid[j]));
            if m < margin {
                margin = m;
            }
        }
    }
    Ok(margin.max(0.0))
}
