//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed by their error estimate; the worst
//! one is bisected until the summed estimate drops below
//! `max(abs_tol, rel_tol·|I|)`.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx)? + f(center + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok(Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    })
}

/// Integrate `f` over the union of `breakpoints` intervals.
///
/// `breakpoints` must be sorted; consecutive pairs define the initial panels.
pub fn integrate_panels<F>(
    mut f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if breakpoints.len() < 2 {
        return Err(Error::domain("quadrature needs at least one panel"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::domain(format!(
                "quadrature breakpoints must increase: {} then {}",
                w[0], w[1]
            )));
        }
        heap.push(kronrod(&mut f, w[0], w[1])?);
        evaluations += 15;
    }

    let totals = |heap: &BinaryHeap<Segment>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    let (mut value, mut error) = totals(&heap);
    loop {
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target || heap.len() >= max_segments {
            // running sums drift; settle on a fresh total
            let (v, e) = totals(&heap);
            if e <= abs_tol.max(rel_tol * v.abs()) || heap.len() >= max_segments {
                return Ok(QuadratureResult {
                    value: v,
                    error_estimate: e,
                    evaluations,
                });
            }
            value = v;
            error = e;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in f64
            error -= worst.error;
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            continue;
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 30;
    }
}

/// Integrate `f` on `[0, ∞)`.
///
/// The upper limit Ξ is found by doubling from `scale` until two consecutive
/// samples fall below `1e-16` of the largest sampled magnitude. The range is
/// then split into geometric panels `[0, s], [s, 2s], …` before adaptive
/// refinement.
pub fn integrate_semi_infinite<F>(
    mut f: F,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(QuadratureResult, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!(
            "integration scale must be positive, got {scale}"
        )));
    }
    // Start below the scale so a narrow peak near the origin is resolved.
    let start = scale / 64.0;
    let mut peak = f(0.0)?.abs();
    let mut points = vec![0.0, start];
    let mut x = start;
    let mut quiet = 0;
    for _ in 0..400 {
        let v = f(x)?.abs();
        peak = peak.max(v);
        if v <= 1e-16 * peak {
            quiet += 1;
            if quiet == 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        x *= 2.0;
        points.push(x);
    }
    let upper = *points.last().expect("nonempty");
    let result = integrate_panels(f, &points, abs_tol, rel_tol, 20_000)?;
    Ok((result, upper))
}
