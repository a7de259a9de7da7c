//! Real roots of a polynomial: companion-matrix eigenvalues followed by a
//! Newton polish on the original coefficients.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

use super::Polynomial;

/// Imaginary parts below `IMAG_TOL * (1 + |root|)` count as real.
const IMAG_TOL: f64 = 1e-9;
const MAX_NEWTON: usize = 100;
const MAX_SCHUR_ITERATIONS: usize = 10_000;
/// Spectral shifts, in units of the Cauchy root bound, tried in turn.
const SHIFTS: [f64; 5] = [0.0, 0.371, -0.613, 1.27, -2.09];

pub(crate) fn residual_scale(p: &Polynomial, x: f64) -> f64 {
    let deg = p.degree().unwrap_or(0) as i32;
    (1.0 + x.abs().powi(deg)) * p.max_abs_coefficient().max(1.0)
}

/// All distinct real roots of `p`, ascending. Constant polynomials have none.
pub fn real_roots(p: &Polynomial) -> Vec<f64> {
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    // deflate exact roots at zero; a singular companion matrix can stall the QR iteration
    let all = p.coefficients();
    let zeros = all.iter().take_while(|c| **c == 0.0).count();
    let c = &all[zeros..];
    let deg = deg - zeros;
    let lead = c[deg];

    let mut candidates: Vec<f64> = if zeros > 0 { vec![0.0] } else { Vec::new() };
    if deg == 1 {
        candidates.push(-c[0] / lead);
    } else if deg > 1 {
        let mut companion = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            companion[(i, deg - 1)] = -c[i] / lead;
        }
        // the QR iteration can stall on root sets symmetric about the origin
        // (even polynomials); a shifted spectrum breaks the symmetry
        let radius = c[..deg].iter().fold(0.0_f64, |m, ci| m.max((ci / lead).abs())) + 1.0;
        let eigenvalues = SHIFTS
            .iter()
            .find_map(|s| {
                let shift = s * radius;
                let shifted = &companion + DMatrix::<f64>::identity(deg, deg) * shift;
                Schur::try_new(shifted, f64::EPSILON, MAX_SCHUR_ITERATIONS)
                    .map(|schur| schur.complex_eigenvalues().map(|z| z - shift))
            })
            .expect("QR iteration on the companion matrix did not converge for any shift");
        candidates.extend(
            eigenvalues
                .iter()
                .filter(|z| z.im.abs() <= IMAG_TOL * (1.0 + z.norm()))
                .map(|z| z.re),
        );
    }

    let dp = p.derivative();
    let mut roots: Vec<f64> = candidates.into_iter().map(|x| polish(p, &dp, x)).collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    roots
}

/// Newton iteration until the residual stops shrinking; returns the best iterate.
fn polish(p: &Polynomial, dp: &Polynomial, mut x: f64) -> f64 {
    let mut best = (p.evaluate(x).abs(), x);
    let mut stalled = 0;
    for _ in 0..MAX_NEWTON {
        if best.0 == 0.0 || stalled >= 2 {
            break;
        }
        let slope = dp.evaluate(x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        x -= p.evaluate(x) / slope;
        let r = p.evaluate(x).abs();
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            best = (r, x);
            stalled = 0;
        } else {
            stalled += 1;
        }
    }
    best.1
}
