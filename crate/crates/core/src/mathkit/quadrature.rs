//! Adaptive Gauss-Legendre quadrature in one and two dimensions.
//!
//! Each panel is integrated with a 10-point rule on the whole panel and on
//! its two halves; the difference is the panel's error estimate. The panel
//! with the largest estimate is bisected until the total estimate falls
//! below the requested tolerance.

const NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Integration domain `{(u, v) : u_min <= u <= u_max, lo(u) <= v <= hi(u)}`
/// where `(lo, hi) = v_bounds(u)`.
pub struct Region2D<B: Fn(f64) -> (f64, f64)> {
    pub u_min: f64,
    pub u_max: f64,
    pub v_bounds: B,
}

impl<B: Fn(f64) -> (f64, f64)> Region2D<B> {
    pub fn new(u_min: f64, u_max: f64, v_bounds: B) -> Self {
        Self {
            u_min,
            u_max,
            v_bounds,
        }
    }
}

/// Rectangle helper.
pub fn rectangle(u: (f64, f64), v: (f64, f64)) -> Region2D<impl Fn(f64) -> (f64, f64)> {
    Region2D::new(u.0, u.1, move |_| v)
}

fn gl10(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

struct Panel {
    a: f64,
    b: f64,
    /// GL10 values on the two halves.
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn from_coarse(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, coarse: f64) -> Panel {
        let m = 0.5 * (a + b);
        let left = gl10(f, a, m);
        let right = gl10(f, m, b);
        Panel {
            a,
            b,
            left,
            right,
            error: (left + right - coarse).abs(),
        }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

/// Adaptive integral of `f` over `[a, b]` to relative tolerance `tol`
/// (with an absolute floor of `tol * 1e-300` so identically-zero
/// integrands terminate).
pub fn integrate_1d(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    integrate_1d_abs(&mut f, a, b, tol, 0.0)
}

/// As [`integrate_1d`] but also stops once the error estimate is below
/// `abs_tol`.
pub fn integrate_1d_abs(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    abs_tol: f64,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
        };
    }
    let coarse = gl10(f, a, b);
    let mut panels = vec![Panel::from_coarse(f, a, b, coarse)];
    loop {
        let total: f64 = panels.iter().map(Panel::value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Quadrature {
                value: total,
                error_estimate: f64::INFINITY,
                converged: false,
            };
        }
        if err <= (tol * total.abs()).max(abs_tol).max(1e-300) {
            return Quadrature {
                value: total,
                error_estimate: err,
                converged: true,
            };
        }
        if panels.len() >= MAX_PANELS {
            return Quadrature {
                value: total,
                error_estimate: err,
                converged: false,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Panel cannot be split further in floating point.
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        panels.push(Panel::from_coarse(f, p.a, m, p.left));
        panels.push(Panel::from_coarse(f, m, p.b, p.right));
    }
}

/// Iterated adaptive integral of `f(u, v)` over `region` to relative
/// tolerance `tol`. The inner integrals run at a tenth of the outer
/// tolerance; any inner non-convergence marks the result unconverged.
pub fn integrate_2d<B: Fn(f64) -> (f64, f64)>(
    mut f: impl FnMut(f64, f64) -> f64,
    region: &Region2D<B>,
    tol: f64,
) -> Quadrature {
    let mut inner_ok = true;
    let mut inner_err = 0.0;
    let outer = integrate_1d(
        |u| {
            let (lo, hi) = (region.v_bounds)(u);
            let q = integrate_1d(|v| f(u, v), lo, hi, 0.1 * tol);
            inner_ok &= q.converged;
            inner_err = f64::max(inner_err, q.error_estimate * (region.u_max - region.u_min).abs());
            q.value
        },
        region.u_min,
        region.u_max,
        tol,
    );
    Quadrature {
        value: outer.value,
        error_estimate: outer.error_estimate + inner_err,
        converged: outer.converged && inner_ok,
    }
}
