//! Problem data: the nonlinearity `g` with its primitive, and the radial weight `kappa`.

use std::fmt;
use std::sync::Arc;

use crate::error::{FunkError, Result};
use crate::finsler::ModelParams;
use crate::finsler::oracle::golden_max;
use crate::quadrature::{gauss_legendre, radial_integral, Measure, QuadratureConfig};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Search window `[lo, hi]` for `c_g = max_{s > 0} g(s) / s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgWindow {
    pub lo: f64,
    pub hi: f64,
    /// Log-spaced scan points before refinement.
    pub scan_points: usize,
}

impl Default for CgWindow {
    fn default() -> Self {
        Self {
            lo: 1e-6,
            hi: 1e6,
            scan_points: 4000,
        }
    }
}

/// `c_g = max_{s > 0} g(s) / s` over the window by a dense logarithmic scan
/// followed by golden-section refinement. Returns `(c_g, argmax)`.
pub fn compute_cg<G: Fn(f64) -> f64>(g: G, window: &CgWindow) -> Result<(f64, f64)> {
    if !(window.lo > 0.0 && window.hi > window.lo) || window.scan_points < 3 {
        return Err(FunkError::Config("invalid c_g search window".into()));
    }
    let (llo, lhi) = (window.lo.ln(), window.hi.ln());
    let step = (lhi - llo) / (window.scan_points - 1) as f64;
    let ratio = |ls: f64| {
        let s = ls.exp();
        g(s) / s
    };
    let mut best = (llo, ratio(llo));
    for k in 1..window.scan_points {
        let ls = llo + step * k as f64;
        let v = ratio(ls);
        if !v.is_finite() {
            return Err(FunkError::NonFinite(format!("g(s)/s at s = {}", ls.exp())));
        }
        if v > best.1 {
            best = (ls, v);
        }
    }
    let lo = (best.0 - step).max(llo);
    let hi = (best.0 + step).min(lhi);
    let (ls, v) = golden_max(&mut |x| ratio(x), lo, hi, 1e-12);
    let (ls, v) = if v >= best.1 { (ls, v) } else { best };
    Ok((v, ls.exp()))
}

#[derive(Clone)]
enum Primitive {
    Closed(ScalarFn),
    /// `G(s) = int_0^s g` by composite Gauss-Legendre.
    Quadrature,
}

/// The pair `(g, G)` with cached `c_g`. `g` is extended by zero to `s <= 0`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    g: ScalarFn,
    primitive: Primitive,
    derivative: Option<ScalarFn>,
    scale: f64,
    c_g: f64,
    argmax: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("scale", &self.scale)
            .field("c_g", &self.c_g)
            .finish()
    }
}

/// `x - ln(1 + x)` without cancellation for small `x`.
fn x_minus_log1p(x: f64) -> f64 {
    if x < 1e-3 {
        let mut term = x * x;
        let mut sum = 0.0;
        for k in 2..10 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term / k as f64;
            term *= x;
        }
        sum
    } else {
        x - x.ln_1p()
    }
}

impl Nonlinearity {
    /// `g(s) = s^2 / (1 + s^{3/2})`: quadratic at zero, growth `sqrt(s)` at
    /// infinity. `G(s) = (2/3)(s^{3/2} - ln(1 + s^{3/2}))` and
    /// `c_g = 2^{2/3} / 3` at `s* = 2^{2/3}`.
    pub fn sublinear() -> Self {
        let argmax = 2f64.powf(2.0 / 3.0);
        Self {
            name: "sublinear".into(),
            g: Arc::new(|s: f64| s * s / (1.0 + s.powf(1.5))),
            primitive: Primitive::Closed(Arc::new(|s: f64| {
                (2.0 / 3.0) * x_minus_log1p(s.powf(1.5))
            })),
            derivative: Some(Arc::new(|s: f64| {
                let w = s.powf(1.5);
                (2.0 * s + 0.5 * s * w) / ((1.0 + w) * (1.0 + w))
            })),
            scale: 1.0,
            c_g: argmax / 3.0,
            argmax,
        }
    }

    /// `g(s) = ln(1 + s^2)` with `G(s) = s ln(1 + s^2) - 2 s + 2 atan(s)`.
    pub fn logarithmic() -> Self {
        let g = |s: f64| (s * s).ln_1p();
        let (c_g, argmax) = compute_cg(g, &CgWindow::default()).expect("log nonlinearity is finite");
        Self {
            name: "log".into(),
            g: Arc::new(g),
            primitive: Primitive::Closed(Arc::new(|s: f64| {
                if s < 1e-3 {
                    // s^3/3 - s^5/10 + s^7/21
                    let s2 = s * s;
                    s * s2 * (1.0 / 3.0 - s2 / 10.0 + s2 * s2 / 21.0)
                } else {
                    s * (s * s).ln_1p() - 2.0 * s + 2.0 * s.atan()
                }
            })),
            derivative: Some(Arc::new(|s: f64| 2.0 * s / (1.0 + s * s))),
            scale: 1.0,
            c_g,
            argmax,
        }
    }

    /// Arbitrary continuous `g` on `[0, inf)`; `G` by quadrature, `g'` by
    /// central differences. Rejected when it violates the growth conditions.
    pub fn from_fn<G>(name: impl Into<String>, g: G) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (c_g, argmax) = compute_cg(&g, &CgWindow::default())?;
        let nl = Self {
            name: name.into(),
            g: Arc::new(g),
            primitive: Primitive::Quadrature,
            derivative: None,
            scale: 1.0,
            c_g,
            argmax,
        };
        nl.validate()?;
        Ok(nl)
    }

    /// Checks `g(s) = o(s)` at both ends, `c_g > 0`, and `G(s_0) > 0` somewhere.
    pub fn validate(&self) -> Result<()> {
        if !(self.c_g > 0.0 && self.c_g.is_finite()) {
            return Err(FunkError::Nonlinearity(format!("c_g = {} is not positive", self.c_g)));
        }
        for s in [1e-7, 1e7] {
            let ratio = self.g(s) / s;
            if !(ratio.abs() < 0.05 * self.c_g) {
                return Err(FunkError::Nonlinearity(format!(
                    "g(s)/s = {ratio:e} at s = {s:e} does not vanish (g must be o(s) at 0 and at infinity)"
                )));
            }
        }
        if !(self.big_g(self.argmax) > 0.0) {
            return Err(FunkError::Nonlinearity("G(s) > 0 fails at the c_g maximizer".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `k g` for `k > 0`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.scale *= k;
        out.c_g *= k;
        if k != 1.0 {
            out.name = format!("{}*{}", self.name, k);
        }
        out
    }

    pub fn g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            self.scale * (self.g)(s)
        }
    }

    /// Primitive `G(s) = int_0^s g`, zero for `s <= 0`.
    pub fn big_g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let raw = match &self.primitive {
            Primitive::Closed(f) => f(s),
            Primitive::Quadrature => {
                let (x, w) = gauss_legendre(24);
                let panels = 8;
                let h = s / panels as f64;
                let mut sum = 0.0;
                for p in 0..panels {
                    let mid = (p as f64 + 0.5) * h;
                    for (xi, wi) in x.iter().zip(&w) {
                        sum += 0.5 * h * wi * (self.g)(mid + 0.5 * h * xi);
                    }
                }
                sum
            }
        };
        self.scale * raw
    }

    /// `g'(s)`, zero for `s < 0`.
    pub fn dg(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match &self.derivative {
            Some(d) => self.scale * d(s),
            None => {
                let h = 1e-6 * (1.0 + s.abs());
                (self.g(s + h) - self.g(s - h)) / (2.0 * h)
            }
        }
    }

    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// Maximizer of `g(s)/s`.
    pub fn cg_argmax(&self) -> f64 {
        self.argmax
    }
}

/// Non-negative radial weight `kappa` with cached sup-norm.
#[derive(Clone)]
pub struct WeightKappa {
    name: String,
    f: ScalarFn,
    sup: f64,
    support: Option<f64>,
    measure: Measure,
}

impl fmt::Debug for WeightKappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightKappa")
            .field("name", &self.name)
            .field("sup", &self.sup)
            .field("support", &self.support)
            .field("measure", &self.measure)
            .finish()
    }
}

impl WeightKappa {
    /// `exp(-1 / (R^2 - r^2))` for `r < R`, zero beyond. Sup-norm `exp(-1/R^2)`.
    pub fn bump(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(FunkError::Weight(format!("bump radius {radius} outside (0, 1)")));
        }
        let r2 = radius * radius;
        Ok(Self {
            name: format!("bump({radius})"),
            f: Arc::new(move |r: f64| {
                let d = r2 - r * r;
                if d <= 0.0 {
                    0.0
                } else {
                    (-1.0 / d).exp()
                }
            }),
            sup: (-1.0 / r2).exp(),
            support: Some(radius),
            measure: Measure::Finsler,
        })
    }

    /// The default weight, a bump of radius 1/2.
    pub fn default_bump() -> Self {
        Self::bump(0.5).expect("radius 1/2 is valid")
    }

    /// Arbitrary weight; the sup-norm is taken by a dense scan of `[0, 1)`.
    pub fn from_fn<F>(name: impl Into<String>, f: F, support: Option<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let samples = 20_000;
        let mut sup: f64 = 0.0;
        for k in 0..samples {
            let r = k as f64 / samples as f64;
            let v = f(r);
            if !v.is_finite() {
                return Err(FunkError::Weight(format!("kappa({r}) = {v} is not finite")));
            }
            if v < 0.0 {
                return Err(FunkError::Weight(format!("kappa({r}) = {v} is negative")));
            }
            sup = sup.max(v);
        }
        if sup == 0.0 {
            return Err(FunkError::Weight("kappa vanishes identically".into()));
        }
        Ok(Self {
            name: name.into(),
            f: Arc::new(f),
            sup,
            support,
            measure: Measure::Finsler,
        })
    }

    /// Sets the measure used for the `L^1` accounting.
    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn scaled(&self, k: f64) -> Self {
        let inner = Arc::clone(&self.f);
        Self {
            name: format!("{}*{}", self.name, k),
            f: Arc::new(move |r| k * inner(r)),
            sup: k * self.sup,
            support: self.support,
            measure: self.measure,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// `||kappa||_{L^1}` against the recorded measure.
    pub fn l1_norm(&self, params: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
        let cfg = match self.support {
            Some(s) => cfg.clone().with_breakpoints(&[s]),
            None => cfg.clone(),
        };
        radial_integral(|r| self.value(r), params, self.measure, &cfg)
    }
}

/// `c_g^{-1} ||kappa||_inf^{-1} (n-1)^2 (1-a^2)^{(n+1)/2} / (4 (1+a)^2)`:
/// below this value only the zero solution exists.
pub fn nonexistence_threshold(params: &ModelParams, nl: &Nonlinearity, kappa: &WeightKappa) -> f64 {
    threshold_from_constants(params, nl.c_g(), kappa.sup_norm())
}

/// [`nonexistence_threshold`] from raw constants.
pub fn threshold_from_constants(params: &ModelParams, c_g: f64, kappa_sup: f64) -> f64 {
    let n = params.n() as f64;
    let a = params.a();
    (n - 1.0).powi(2) * (1.0 - a * a).powf(0.5 * (n + 1.0)) / (4.0 * (1.0 + a).powi(2) * c_g * kappa_sup)
}
