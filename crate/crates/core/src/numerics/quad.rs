//! Adaptive Gauss–Kronrod (10/21) quadrature with a global error heap, plus
//! the two semi-infinite variants used by the analytical formulas.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::invalid(format!(
                "quadrature tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Kronrod abscissae on [-1, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_097_393,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One GK21 panel: (kronrod estimate, error estimate).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Nodes and weights of the 21-point Kronrod rule applied on `panels`
/// equal subintervals of `[a, b]`, for integrating several functions that
/// share expensive per-node setup.
pub fn kronrod_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(21 * panels);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let center = lo + 0.5 * width;
        let half = 0.5 * width;
        out.push((center, WGK[10] * half));
        for (&x, &w) in XGK[..10].iter().zip(&WGK[..10]) {
            out.push((center - half * x, w * half));
            out.push((center + half * x, w * half));
        }
    }
    out
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

/// Adaptive integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// error drops below `max(abs_tol, rel_tol * |I|)`. Running out of
/// subdivisions is an error that carries the best estimate so far.
pub fn integrate_finite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_detailed(&mut f, a, b, spec).map(|e| e.value)
}

pub fn integrate_detailed<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::invalid(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let (value, err) = gk21(f, a, b);
    if !value.is_finite() {
        return Err(Error::NonFinite { a, b });
    }
    let mut total = value;
    let mut total_err = err;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut subdivisions = 1;
    while total_err > spec.target(total) {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureDiverged {
                estimate: total,
                error: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds every live panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel has collapsed to adjacent floats; accept it as is.
            total_err -= worst.err;
            heap.push(Panel { err: 0.0, ..worst });
            if heap.iter().all(|p| p.err == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::NonFinite { a: worst.a, b: worst.b });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
        subdivisions += 1;
    }
    // Re-sum to shed the drift of the running update.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.err).sum();
    Ok(Estimate {
        value,
        error,
        subdivisions,
    })
}

/// Integrates over `[a, b]` split at the given interior breakpoints (points
/// outside the interval are ignored). Each piece gets the full relative
/// tolerance and an equal share of the absolute one.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut knots: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces = (knots.len() - 1).max(1) as f64;
    let piece_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / pieces,
        ..*spec
    };
    knots
        .windows(2)
        .map(|w| integrate_finite(&mut f, w[0], w[1], &piece_spec))
        .sum()
}

/// `∫_a^∞ f` through the map `x = a + (1 - t) / t`, `t ∈ (0, 1]`.
///
/// Suitable for integrands that decay at least like `x^{-1-ε}`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::invalid(format!("lower limit must be finite, got {a}")));
    }
    let g = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - t) / t;
        let v = f(x) / (t * t);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_finite(g, 0.0, 1.0, spec)
}

/// `∫_a^∞ f` truncated at a cutoff `R_c` chosen so that the caller-supplied
/// analytic bound `tail(R_c) ≥ ∫_{R_c}^∞ |f|` is below half the absolute
/// tolerance. The finite part is split at `breaks` and then geometrically,
/// so that slowly decaying power-law tails are resolved cheaply.
pub fn integrate_with_tail_bound<F, T>(
    mut f: F,
    a: f64,
    breaks: &[f64],
    tail: T,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let budget = 0.5 * spec.abs_tol;
    let mut cutoff = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a)
        .fold(a.abs().max(1.0), f64::max);
    let mut doublings = 0;
    while !(tail(cutoff) < budget) {
        cutoff *= 2.0;
        doublings += 1;
        if doublings > 200 || !cutoff.is_finite() {
            return Err(Error::TailNotBounded {
                cutoff,
                bound: tail(cutoff),
                tolerance: budget,
            });
        }
    }
    let mut knots: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < cutoff)
        .collect();
    let mut x = a.abs().max(1.0);
    while x < cutoff {
        if x > a {
            knots.push(x);
        }
        x *= 4.0;
    }
    let finite_spec = QuadratureSpec {
        abs_tol: budget,
        ..*spec
    };
    integrate_piecewise(&mut f, a, cutoff, &knots, &finite_spec)
}
