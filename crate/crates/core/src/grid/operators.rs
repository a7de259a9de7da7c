//! Dense finite-difference operators.
//!
//! Block Hamiltonians use the compact three-point Laplacian with periodic
//! wrap. The spinor operators used for the algebra checks are built from a
//! single central-difference momentum `P` with hard-wall truncation, and the
//! spinor `H` uses `P²/2m` so that `2Q² = H` is exact when `W = 0`.
//! Spinor index `s·n + j`, with `s = 0` for the plus channel.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{GridError, SpatialGrid};
use crate::potential::{effective_potential, Channel, HarmonicChannel, SuperpotentialModel};

/// Residuals at or below this value count as exact.
pub const EXACT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorLabel {
    H,
    Hplus,
    Hminus,
    Q1,
    Q2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    label: OperatorLabel,
    matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `max |A - A†|` relative to `max |A|`.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.dimension();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &OperatorMatrix) -> DMatrix<Complex64> {
        product(&self.matrix, &other.matrix)
    }
}

/// Dense product that skips zero entries of the right operand.
fn product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (rows, inner, cols) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(inner, b.nrows());
    let mut out = DMatrix::<Complex64>::zeros(rows, cols);
    let av = a.as_slice();
    for j in 0..cols {
        let dst = &mut out.as_mut_slice()[j * rows..(j + 1) * rows];
        for k in 0..inner {
            let s = b[(k, j)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (d, x) in dst.iter_mut().zip(&av[k * rows..(k + 1) * rows]) {
                *d += s * x;
            }
        }
    }
    out
}

fn diagonal_values(model: &SuperpotentialModel, grid: &SpatialGrid, ch: Channel, clamp: Option<&HarmonicChannel>) -> Vec<f64> {
    match clamp {
        Some(hc) => grid.points().into_iter().map(|x| hc.potential(x)).collect(),
        None => {
            let v = effective_potential(model, ch);
            grid.points().into_iter().map(|x| v.evaluate(x)).collect()
        }
    }
}

/// `H± = P²/2m + V±(x)` with the periodic three-point Laplacian. With a
/// clamp the potential is the channel's quadratic model.
pub fn build_block_hamiltonian(
    model: &SuperpotentialModel,
    grid: &SpatialGrid,
    ch: Channel,
    clamp: Option<&HarmonicChannel>,
) -> OperatorMatrix {
    let n = grid.n();
    let t = model.hbar() * model.hbar() / (2.0 * model.mass() * grid.dx() * grid.dx());
    let v = diagonal_values(model, grid, ch, clamp);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = Complex64::new(2.0 * t + v[j], 0.0);
        m[(j, (j + 1) % n)] += Complex64::new(-t, 0.0);
        m[(j, (j + n - 1) % n)] += Complex64::new(-t, 0.0);
    }
    let label = match ch {
        Channel::Plus => OperatorLabel::Hplus,
        Channel::Minus => OperatorLabel::Hminus,
    };
    OperatorMatrix { label, matrix: m }
}

/// Central-difference momentum `-iħ ∂` with hard-wall truncation.
fn momentum(grid: &SpatialGrid, hbar: f64) -> DMatrix<Complex64> {
    let n = grid.n();
    let c = Complex64::new(0.0, -hbar / (2.0 * grid.dx()));
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n - 1 {
        p[(j, j + 1)] = c;
        p[(j + 1, j)] = -c;
    }
    p
}

fn spinor_blocks(blocks: [[&DMatrix<Complex64>; 2]; 2]) -> DMatrix<Complex64> {
    let n = blocks[0][0].nrows();
    let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for (r, row) in blocks.iter().enumerate() {
        for (c, b) in row.iter().enumerate() {
            m.view_mut((r * n, c * n), (n, n)).copy_from(*b);
        }
    }
    m
}

fn diag(values: impl Iterator<Item = f64>) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.size_hint().0,
        values.map(|v| Complex64::new(v, 0.0)),
    ))
}

/// Spinor `H = diag(P²/2m + V₊, P²/2m + V₋)` with the central-difference `P`.
pub fn build_hamiltonian(model: &SuperpotentialModel, grid: &SpatialGrid) -> OperatorMatrix {
    let p = momentum(grid, model.hbar());
    let kinetic = product(&p, &p).unscale(2.0 * model.mass());
    let xs = grid.points();
    let [hp, hm] = Channel::BOTH.map(|ch| {
        let v = effective_potential(model, ch);
        &kinetic + diag(xs.iter().map(|x| v.evaluate(*x)))
    });
    let zero = DMatrix::zeros(grid.n(), grid.n());
    OperatorMatrix { label: OperatorLabel::H, matrix: spinor_blocks([[&hp, &zero], [&zero, &hm]]) }
}

/// `Q₁ = (σ₁ P/√2m + σ₂ W)/√2` for `which = 1`, `Q₂ = (σ₂ P/√2m − σ₁ W)/√2`
/// for `which = 2`.
pub fn build_supercharge(model: &SuperpotentialModel, grid: &SpatialGrid, which: u8) -> Result<OperatorMatrix, GridError> {
    let a = momentum(grid, model.hbar()).unscale((2.0 * model.mass()).sqrt());
    let w = diag(grid.points().into_iter().map(|x| model.w().evaluate(x)));
    let i = Complex64::new(0.0, 1.0);
    let (upper, lower, label) = match which {
        1 => (&a - &w * i, &a + &w * i, OperatorLabel::Q1),
        2 => (&a * (-i) - &w, &a * i - &w, OperatorLabel::Q2),
        _ => return Err(GridError::InvalidParameter(format!("supercharge index must be 1 or 2, got {which}"))),
    };
    let zero = DMatrix::zeros(grid.n(), grid.n());
    let m = spinor_blocks([[&zero, &upper], [&lower, &zero]]).unscale(std::f64::consts::SQRT_2);
    Ok(OperatorMatrix { label, matrix: m })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    TwoQ1SquaredMinusH,
    TwoQ2SquaredMinusH,
    CommutatorHQ1,
    AnticommutatorQ1Q2,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 4] = [
        ResidualKind::TwoQ1SquaredMinusH,
        ResidualKind::TwoQ2SquaredMinusH,
        ResidualKind::CommutatorHQ1,
        ResidualKind::AnticommutatorQ1Q2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::TwoQ1SquaredMinusH => "2Q1^2-H",
            ResidualKind::TwoQ2SquaredMinusH => "2Q2^2-H",
            ResidualKind::CommutatorHQ1 => "[H,Q1]",
            ResidualKind::AnticommutatorQ1Q2 => "{Q1,Q2}",
        }
    }
}

/// Frobenius-relative algebra residuals on one grid. Squares are relative
/// to `‖H‖`; brackets `[A,B]`, `{A,B}` are relative to `‖AB‖ + ‖BA‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlgebraResiduals {
    pub n: usize,
    pub dx: f64,
    pub values: [f64; 4],
}

impl AlgebraResiduals {
    pub fn get(&self, kind: ResidualKind) -> f64 {
        self.values[ResidualKind::ALL.iter().position(|k| *k == kind).unwrap()]
    }
}

pub fn algebra_residuals(model: &SuperpotentialModel, grid: &SpatialGrid) -> AlgebraResiduals {
    let h = build_hamiltonian(model, grid);
    let q1 = build_supercharge(model, grid, 1).expect("index 1");
    let q2 = build_supercharge(model, grid, 2).expect("index 2");
    let h_norm = h.matrix.norm();
    let square = |q: &OperatorMatrix| {
        let r = q.mul(q) * Complex64::new(2.0, 0.0) - &h.matrix;
        if h_norm == 0.0 { r.norm() } else { r.norm() / h_norm }
    };
    let bracket = |a: &OperatorMatrix, b: &OperatorMatrix, sign: f64| {
        let ab = a.mul(b);
        let ba = b.mul(a);
        let scale = ab.norm() + ba.norm();
        let r = (&ab + &ba * Complex64::new(sign, 0.0)).norm();
        if scale == 0.0 { r } else { r / scale }
    };
    AlgebraResiduals {
        n: grid.n(),
        dx: grid.dx(),
        values: [square(&q1), square(&q2), bracket(&h, &q1, -1.0), bracket(&q1, &q2, 1.0)],
    }
}

/// One residual across a sequence of refinements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SusyReportEntry {
    pub kind: ResidualKind,
    pub values: Vec<f64>,
    /// Fitted order in `dx`; `None` when every value is at the floor.
    pub order: Option<f64>,
}

impl SusyReportEntry {
    pub fn is_exact(&self) -> bool {
        self.values.iter().all(|v| *v <= EXACT_FLOOR)
    }

    /// Successive reduction factors `r(dx)/r(dx/2)`.
    pub fn ratios(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SusyReport {
    pub n: Vec<usize>,
    pub dx: Vec<f64>,
    pub entries: Vec<SusyReportEntry>,
}

impl SusyReport {
    pub fn entry(&self, kind: ResidualKind) -> &SusyReportEntry {
        self.entries.iter().find(|e| e.kind == kind).expect("all kinds present")
    }
}

/// Least-squares slope of `ln r` against `ln dx`; `None` if any residual is
/// at the floor.
pub fn fit_order(dx: &[f64], residuals: &[f64]) -> Option<f64> {
    if dx.len() < 2 || residuals.iter().any(|r| *r <= EXACT_FLOOR) {
        return None;
    }
    let xs: Vec<f64> = dx.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Residuals at `grid` and `halvings` successive refinements of `dx`.
pub fn susy_algebra_report(model: &SuperpotentialModel, grid: &SpatialGrid, halvings: usize) -> SusyReport {
    let mut levels = vec![*grid];
    for _ in 0..halvings {
        levels.push(levels.last().unwrap().refined());
    }
    let res: Vec<AlgebraResiduals> = levels.iter().map(|g| algebra_residuals(model, g)).collect();
    let dx: Vec<f64> = res.iter().map(|r| r.dx).collect();
    let entries = ResidualKind::ALL
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let values: Vec<f64> = res.iter().map(|r| r.values[i]).collect();
            SusyReportEntry { kind: *kind, order: fit_order(&dx, &values), values }
        })
        .collect();
    SusyReport { n: res.iter().map(|r| r.n).collect(), dx, entries }
}

/// The `k` lowest eigenvalues of a Hermitian matrix, ascending.
pub fn spectrum(matrix: &OperatorMatrix, k: usize) -> Result<Vec<f64>, GridError> {
    if k == 0 || k > matrix.dimension() {
        return Err(GridError::InvalidParameter(format!(
            "requested {k} eigenvalues of a {}-dimensional operator",
            matrix.dimension()
        )));
    }
    let mut eig: Vec<f64> = if matrix.matrix.iter().all(|z| z.im == 0.0) {
        matrix.matrix.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        matrix.matrix.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    eig.sort_by(f64::total_cmp);
    eig.truncate(k);
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{resolve_channel, Polynomial};

    fn model(coeffs: Vec<f64>) -> SuperpotentialModel {
        SuperpotentialModel::new(Polynomial::new(coeffs), 1.0, 1.0).unwrap()
    }

    #[test]
    fn operators_hermitian() {
        let m = SuperpotentialModel::quartic_example(0.5);
        let g = SpatialGrid::new(64, 4.0).unwrap();
        for op in [
            build_hamiltonian(&m, &g),
            build_supercharge(&m, &g, 1).unwrap(),
            build_supercharge(&m, &g, 2).unwrap(),
            build_block_hamiltonian(&m, &g, Channel::Plus, None),
            build_block_hamiltonian(&m, &g, Channel::Minus, None),
        ] {
            assert!(op.hermiticity_error() <= 1e-12, "{:?}", op.label());
        }
        assert!(build_supercharge(&m, &g, 3).is_err());
    }

    #[test]
    fn free_model_exact() {
        let r = algebra_residuals(&model(vec![]), &SpatialGrid::new(64, 4.0).unwrap());
        assert!(r.values.iter().all(|v| *v <= EXACT_FLOOR), "{r:?}");
    }

    #[test]
    fn quartic_second_order() {
        let rep = susy_algebra_report(&SuperpotentialModel::quartic_example(0.5), &SpatialGrid::new(64, 4.0).unwrap(), 2);
        for kind in [ResidualKind::TwoQ1SquaredMinusH, ResidualKind::TwoQ2SquaredMinusH, ResidualKind::CommutatorHQ1] {
            let order = rep.entry(kind).order.unwrap();
            assert!((order - 2.0).abs() < 0.3, "{kind:?} {order}");
        }
        assert!(rep.entry(ResidualKind::AnticommutatorQ1Q2).is_exact());
    }

    #[test]
    fn printed_q2_sign_breaks_algebra() {
        // Q2' = (σ₂P/√2m + σ₁W)/√2 neither anticommutes with Q1 nor squares to 2Q1²
        let m = model(vec![0.0, 1.0]);
        let g = SpatialGrid::new(64, 4.0).unwrap();
        let q1 = build_supercharge(&m, &g, 1).unwrap();
        let q2 = build_supercharge(&m, &g, 2).unwrap();
        let w = diag(g.points().into_iter().map(|x| m.w().evaluate(x)));
        let zero = DMatrix::zeros(g.n(), g.n());
        let flip = spinor_blocks([[&zero, &w], [&w, &zero]]) * Complex64::new(std::f64::consts::SQRT_2, 0.0);
        let printed = OperatorMatrix { label: OperatorLabel::Q2, matrix: q2.matrix() + flip };
        let two = Complex64::new(2.0, 0.0);
        let q1sq = q1.mul(&q1) * two;
        assert!((q2.mul(&q2) * two - &q1sq).norm() <= 1e-12 * q1sq.norm());
        assert!((q1.mul(&q2) + q2.mul(&q1)).norm() <= 1e-12 * q1sq.norm());
        assert!((printed.mul(&printed) * two - &q1sq).norm() > 1e-2 * q1sq.norm());
        assert!((q1.mul(&printed) + printed.mul(&q1)).norm() > 1e-2 * q1sq.norm());
    }

    #[test]
    fn clamp_oscillator_ladder() {
        let m = SuperpotentialModel::quartic_example(0.5);
        let hc = resolve_channel(&m, Channel::Plus).unwrap();
        let mut errors = Vec::new();
        for n in [256, 512] {
            let g = SpatialGrid::new(n, 8.0).unwrap();
            let e = spectrum(&build_block_hamiltonian(&m, &g, Channel::Plus, Some(&hc)), 4).unwrap();
            let err = e
                .iter()
                .enumerate()
                .map(|(j, e)| (e - hc.v0 - hc.omega0 * (j as f64 + 0.5)).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[1] < 2e-3, "{errors:?}");
        let ratio = errors[0] / errors[1];
        assert!((3.2..=4.8).contains(&ratio), "{ratio}");
    }

    #[test]
    fn broken_susy_pairing() {
        let m = SuperpotentialModel::quartic_example(0.5);
        let g = SpatialGrid::new(256, 8.0).unwrap();
        let ep = spectrum(&build_block_hamiltonian(&m, &g, Channel::Plus, None), 6).unwrap();
        let em = spectrum(&build_block_hamiltonian(&m, &g, Channel::Minus, None), 6).unwrap();
        assert!(ep[0] > 0.0);
        for (a, b) in ep.iter().zip(&em) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn free_spectrum_is_doubly_counted() {
        let g = SpatialGrid::new(64, 4.0).unwrap();
        let e = spectrum(&build_block_hamiltonian(&model(vec![]), &g, Channel::Plus, None), 5).unwrap();
        assert!(e[0].abs() < 1e-12);
        assert!((e[1] - e[2]).abs() < 1e-10 && (e[3] - e[4]).abs() < 1e-10);
        // three-point dispersion (2 - 2cos k dx)/(2 dx²)
        let k = std::f64::consts::PI / 4.0;
        let want = (1.0 - (k * g.dx()).cos()) / (g.dx() * g.dx());
        assert!((e[1] - want).abs() < 1e-10);
        assert!(spectrum(&build_block_hamiltonian(&model(vec![]), &g, Channel::Plus, None), 65).is_err());
    }

    #[test]
    fn product_matches_nalgebra() {
        let a = DMatrix::from_fn(5, 4, |i, j| Complex64::new(i as f64 - j as f64, (i * j) as f64));
        let b = DMatrix::from_fn(4, 3, |i, j| if (i + j) % 2 == 0 { Complex64::new(1.5, -(i as f64)) } else { Complex64::new(0.0, 0.0) });
        assert!((product(&a, &b) - &a * &b).norm() < 1e-12);
    }

    #[test]
    fn fitted_order() {
        let dx = [0.1, 0.05, 0.025];
        assert!((fit_order(&dx, &[1e-2, 2.5e-3, 6.25e-4]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_order(&dx, &[1e-2, 0.0, 1e-3]), None);
    }
}
