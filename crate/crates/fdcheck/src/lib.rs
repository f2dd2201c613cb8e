//! Finite-difference oracles for checking exact derivative code.
//!
//! Everything here works on plain `f64` closures and knows nothing about the
//! jet or circuit machinery it is used to validate.

/// Partial-derivative slot order shared with the jet layout:
/// `(f, f_x, f_y, f_xx, f_xy, f_yy, f_xxx, f_xxy, f_xyy, f_yyy)`.
pub const SLOTS: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// Central-difference stencil for the `k`-th derivative, as (offset, weight) pairs
/// in units of the step. Truncation error is O(h^2) for k <= 3.
fn stencil(k: usize) -> &'static [(f64, f64)] {
    match k {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        _ => panic!("stencil order {k} not supported"),
    }
}

/// Nested (tensor-product) central difference of order (a, b) at step h.
pub fn nested_central<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, a: usize, b: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for &(ox, wx) in stencil(a) {
        for &(oy, wy) in stencil(b) {
            acc += wx * wy * f(x + ox * h, y + oy * h);
        }
    }
    acc / h.powi((a + b) as i32)
}

/// Richardson-refined nested central difference: combines steps h and h/2 to
/// cancel the leading O(h^2) error term.
pub fn richardson<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, a: usize, b: usize, h: f64) -> f64 {
    if a + b == 0 {
        return f(x, y);
    }
    let coarse = nested_central(f, x, y, a, b, h);
    let fine = nested_central(f, x, y, a, b, 0.5 * h);
    fine + (fine - coarse) / 3.0
}

/// All partial derivatives up to `order` in jet slot order.
pub fn partials<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, order: usize, h: f64) -> Vec<f64> {
    let len = (order + 1) * (order + 2) / 2;
    SLOTS[..len]
        .iter()
        .map(|&(a, b)| richardson(f, x, y, a, b, h))
        .collect()
}

/// Central difference gradient of a scalar function of a parameter vector.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, theta: &[f64], h: f64) -> Vec<f64> {
    let mut work = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            let orig = work[i];
            work[i] = orig + h;
            let up = f(&work);
            work[i] = orig - h;
            let down = f(&work);
            work[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central difference of a scalar function in one parameter direction.
pub fn directional<F: Fn(&[f64]) -> f64>(f: &F, theta: &[f64], index: usize, h: f64) -> f64 {
    let mut work = theta.to_vec();
    work[index] = theta[index] + h;
    let up = f(&work);
    work[index] = theta[index] - h;
    let down = f(&work);
    (up - down) / (2.0 * h)
}

/// `|a - b| <= rtol * (1 + |b|)`: relative with a unit floor so slots that
/// happen to vanish do not demand absolute agreement to rtol * 0.
pub fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * (1.0 + b.abs())
}

/// Index and values of the worst slot under [`close`], if any disagree.
pub fn first_mismatch(actual: &[f64], expected: &[f64], rtol: f64) -> Option<(usize, f64, f64)> {
    assert_eq!(actual.len(), expected.len(), "length mismatch");
    actual
        .iter()
        .zip(expected)
        .enumerate()
        .find(|(_, (a, b))| !close(**a, **b, rtol))
        .map(|(i, (a, b))| (i, *a, *b))
}
