//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed by their error estimate and the
//! worst one is bisected until the summed error meets the tolerance. The
//! integration range can be pre-split into panels no wider than a given
//! width, which keeps oscillatory integrands from aliasing on the first pass.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 200_000 }
    }
}

/// One Kronrod-15 panel: `(estimate, error estimate)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`, starting from panels of width at most
/// `max_panel_width` (pass `f64::INFINITY` for a single starting panel).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    max_panel_width: f64,
    opts: QuadOptions,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let n_panels = if max_panel_width.is_finite() && max_panel_width > 0.0 {
        ((hi - lo) / max_panel_width).ceil().max(1.0) as usize
    } else {
        1
    };
    if n_panels > opts.max_intervals {
        return Err(Error::QuadratureNonConvergence { lo, hi, error: f64::INFINITY });
    }

    let width = (hi - lo) / n_panels as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n_panels);
    for k in 0..n_panels {
        let pa = lo + k as f64 * width;
        let pb = if k + 1 == n_panels { hi } else { pa + width };
        let (value, error) = gauss_kronrod_15(&f, pa, pb);
        heap.push(Panel { a: pa, b: pb, value, error });
    }

    loop {
        // Re-sum each pass to avoid drift from incremental updates.
        let (total, err): (f64, f64) =
            heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !total.is_finite() {
            return Err(Error::QuadratureNonConvergence { lo, hi, error: f64::NAN });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(sign * total);
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence { lo, hi, error: err });
        }
        // Split a batch of the worst panels per pass.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                return Err(Error::QuadratureNonConvergence { lo, hi, error: err });
            }
            let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
            let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        }
    }
}
