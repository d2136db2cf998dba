//! Finite-difference evolution of `u_t = x²·u_xx + f(x)·u_y` on the
//! logarithmic lattice, plus an independent residual stencil used both as a
//! self-check of the solver and as the yardstick for symmetry verification.
//!
//! In the `z = ln x` chart the equation reads
//!
//! ```text
//! u_t = u_zz − u_z + f(e^z)·u_y + s(t, x, y)
//! ```
//!
//! and is advanced with an IMEX splitting: the stiff `z`-diffusion is taken
//! implicitly (backward Euler, one tridiagonal solve per `y`-line), while the
//! `y`-advection is explicit first-order upwind, the difference direction
//! chosen per node by the sign of `f`.  The explicit part carries the CFL
//! restriction `dt·max|f| ≤ dy`; violations are rejected up front with a
//! usable suggestion rather than silently producing garbage.
//!
//! The held residual is evaluated on a *different* stencil than the scheme —
//! time-centered, with centered `y`-differences — so a small value is
//! evidence about the solution rather than an identity of the update rule.
//! All loops are straightforward sequential sweeps; the per-`y`-line solves
//! are independent and could be parallelized, but determinism and simplicity
//! win at these grid sizes.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{Env, Expr, Var};

use super::grid::{Field3, Grid};
use super::NumericError;

/// Solution of one initial/boundary-value problem, with enough context
/// retained to re-derive its quality estimate.
#[derive(Clone, Debug)]
pub struct Solution {
    pub grid: Grid,
    pub field: Field3,
    /// Drift `f` sampled at the `z` nodes.
    pub drift_values: Vec<f64>,
    /// RMS of the independent time-centered stencil over all interior
    /// points, computed once at solve time.  `independent_residual`
    /// reproduces it exactly.
    pub residual_norm: f64,
}

/// A closed-form solution of the equation with drift `f = x`:
/// `u = (e^{3t/4} − (t+1)·e^{−t/4})·x^{3/2} + (y + t·x)·√x·e^{−t/4}`.
///
/// Obtained by the substitution `w = y + t·x`, which turns fields linear in
/// `w` into two one-variable problems; the combination above solves both.
/// As lattice data it keeps every boundary strip compatible with the
/// interior dynamics, so the solver's self-check residual is pure
/// truncation — the tightest available budget for symmetry grading.
pub fn exact_solution_linear_drift() -> Expr {
    crate::expr::parse(
        "(exp(3/4*t) - (t+1)*exp(-1/4*t)) * x^(3/2) \
         + (y + t*x) * x^(1/2) * exp(-1/4*t)",
    )
    .expect("fixed grammar text")
}

/// Evaluate the drift expression (a function of `x` alone) at every lattice
/// node.
pub fn sample_drift(grid: &Grid, drift: &Expr) -> Result<Vec<f64>, NumericError> {
    let mut vals = Vec::with_capacity(grid.nz);
    for i in 0..grid.nz {
        let env = Env::new().var(Var::X, grid.x_at(i));
        vals.push(drift.eval(&env)?);
    }
    Ok(vals)
}

/// Solve the tridiagonal system `sub_i·v_{i−1} + diag_i·v_i + sup_i·v_{i+1} =
/// rhs_i` in place by the Thomas algorithm; `rhs` holds the solution on
/// return.  `sub[0]` and `sup[n−1]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![0.0; n];
    c_star[0] = sup[0] / diag[0];
    d_star[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c_star[i - 1];
        c_star[i] = sup[i] / m;
        d_star[i] = (rhs[i] - sub[i] * d_star[i - 1]) / m;
    }
    rhs[n - 1] = d_star[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d_star[i] - c_star[i] * rhs[i + 1];
    }
}

/// Advance `u_t = u_zz − u_z + f·u_y + s` from data to `t_max`.
///
/// `data(t, x, y)` supplies the initial level and the Dirichlet boundary
/// values; `source` is optional and evaluated pointwise.  Both `x`-edges are
/// data-pinned (the diffusion is second order in `z`), but in `y` the
/// equation is first order, so only the *inflow* strip may carry data: for
/// `f ≥ 0` information travels toward smaller `y` and enters at `y_max`, for
/// `f < 0` at `y_min`.  The opposite strip is evolved with the same scheme —
/// pinning it would fight the characteristics and leave an O(1) layer.
/// Fails fast on a CFL violation with the smallest admissible number of
/// time steps.
pub fn solve_fd<D, S>(
    grid: &Grid,
    drift: &Expr,
    data: &D,
    source: Option<&S>,
) -> Result<Solution, NumericError>
where
    D: Fn(f64, f64, f64) -> f64,
    S: Fn(f64, f64, f64) -> f64,
{
    let drift_values = sample_drift(grid, drift)?;
    let max_f = drift_values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let (dt, dy, dz) = (grid.dt(), grid.dy(), grid.dz());
    if max_f * dt > dy * (1.0 + 1e-12) {
        let suggested = libm::ceil(grid.t_max * max_f / dy) as usize + 1;
        return Err(NumericError::CflViolation {
            max_drift: max_f,
            suggested_nt: suggested,
        });
    }

    let (nz, ny) = (grid.nz, grid.ny);
    let mut field = Field3::zeros(grid.nt + 1, nz, ny);

    for i in 0..nz {
        for j in 0..ny {
            field.set(0, i, j, data(0.0, grid.x_at(i), grid.y_at(j)));
        }
    }

    // Implicit operator I − dt·(∂zz − ∂z) on interior rows; boundary rows
    // become identities carrying data.
    let lo = -dt * (1.0 / (dz * dz) + 1.0 / (2.0 * dz));
    let mid = 1.0 + 2.0 * dt / (dz * dz);
    let hi = -dt * (1.0 / (dz * dz) - 1.0 / (2.0 * dz));

    let mut rhs = vec![0.0; nz];
    let mut sub = vec![0.0; nz];
    let mut diag = vec![0.0; nz];
    let mut sup = vec![0.0; nz];
    for k in 0..grid.nt {
        let (t_now, t_next) = (grid.t_at(k), grid.t_at(k + 1));
        for j in 0..ny {
            for i in 0..nz {
                let f = drift_values[i];
                let y_inflow = if f >= 0.0 { ny - 1 } else { 0 };
                if i == 0 || i == nz - 1 || j == y_inflow {
                    (sub[i], diag[i], sup[i]) = (0.0, 1.0, 0.0);
                    rhs[i] = data(t_next, grid.x_at(i), grid.y_at(j));
                    continue;
                }
                (sub[i], diag[i], sup[i]) = (lo, mid, hi);
                // Upwind advection: toward the side the information comes
                // from.  The outflow strip needs only its inward neighbor,
                // so the formula stays in range there.
                let advect = if f >= 0.0 {
                    f * (field.at(k, i, j + 1) - field.at(k, i, j)) / dy
                } else {
                    f * (field.at(k, i, j) - field.at(k, i, j - 1)) / dy
                };
                let s = source.map_or(0.0, |s| s(t_now, grid.x_at(i), grid.y_at(j)));
                rhs[i] = field.at(k, i, j) + dt * (advect + s);
            }
            thomas(&sub, &diag, &sup, &mut rhs);
            for i in 0..nz {
                field.set(k + 1, i, j, rhs[i]);
            }
        }
    }

    let mut solution = Solution {
        grid: grid.clone(),
        field,
        drift_values,
        residual_norm: 0.0,
    };
    let (norm, _) = independent_residual(&solution, source, None);
    solution.residual_norm = norm;
    Ok(solution)
}

/// Evaluate the time-centered residual stencil of `values` against the
/// equation, restricted to nodes where `valid` (if given) is set and the full
/// stencil is available.  Returns `(rms, coverage)` where coverage is the
/// evaluated fraction of all interior half-level points.
///
/// The stencil at the half level `k + 1/2`, interior node `(i, j)`:
///
/// ```text
/// (u⁺ − u⁻)/dt − ½[(Lz u⁺) + (Lz u⁻)] − f_i·½[(Dy u⁺) + (Dy u⁻)] − s
/// ```
///
/// with `Lz` the centered `∂zz − ∂z` and `Dy` the centered first difference —
/// deliberately not the upwind difference the solver marched with.
pub fn stencil_residual<S>(
    grid: &Grid,
    values: &Field3,
    drift_values: &[f64],
    source: Option<&S>,
    valid: Option<&Field3>,
) -> (f64, f64)
where
    S: Fn(f64, f64, f64) -> f64,
{
    let (dt, dy, dz) = (grid.dt(), grid.dy(), grid.dz());
    let (nz, ny) = (grid.nz, grid.ny);
    let levels = values.levels;
    let is_ok = |k: usize, i: usize, j: usize| -> bool {
        valid.map_or(true, |m| m.at(k, i, j) > 0.5)
    };
    let mut sum_sq = 0.0;
    let mut used = 0usize;
    let mut total = 0usize;
    for k in 0..levels - 1 {
        let t_half = grid.t_at(k) + 0.5 * dt;
        for i in 1..nz - 1 {
            for j in 1..ny - 1 {
                total += 1;
                let mut stencil_ready = true;
                for lev in [k, k + 1] {
                    for (di, dj) in [(0i64, 0i64), (-1, 0), (1, 0), (0, -1), (0, 1)] {
                        let (ii, jj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                        if !is_ok(lev, ii, jj) {
                            stencil_ready = false;
                        }
                    }
                }
                if !stencil_ready {
                    continue;
                }
                let lz = |lev: usize| {
                    (values.at(lev, i + 1, j) - 2.0 * values.at(lev, i, j)
                        + values.at(lev, i - 1, j))
                        / (dz * dz)
                        - (values.at(lev, i + 1, j) - values.at(lev, i - 1, j)) / (2.0 * dz)
                };
                let dyc = |lev: usize| {
                    (values.at(lev, i, j + 1) - values.at(lev, i, j - 1)) / (2.0 * dy)
                };
                let du_dt = (values.at(k + 1, i, j) - values.at(k, i, j)) / dt;
                let s = source.map_or(0.0, |s| s(t_half, grid.x_at(i), grid.y_at(j)));
                let r = du_dt
                    - 0.5 * (lz(k) + lz(k + 1))
                    - drift_values[i] * 0.5 * (dyc(k) + dyc(k + 1))
                    - s;
                sum_sq += r * r;
                used += 1;
            }
        }
    }
    if used == 0 {
        return (f64::INFINITY, 0.0);
    }
    (libm::sqrt(sum_sq / used as f64), used as f64 / total as f64)
}

/// Recompute the solution's held residual norm from scratch.
pub fn independent_residual<S>(
    solution: &Solution,
    source: Option<&S>,
    valid: Option<&Field3>,
) -> (f64, f64)
where
    S: Fn(f64, f64, f64) -> f64,
{
    stencil_residual(
        &solution.grid,
        &solution.field,
        &solution.drift_values,
        source,
        valid,
    )
}

#[cfg(test)]
mod tests {
    use super::super::grid::Grid;
    use super::{independent_residual, sample_drift, solve_fd, thomas, Solution};
    use crate::expr::{parse, Env, Expr, Var};
    use crate::numeric::NumericError;
    use alloc::vec;
    use alloc::vec::Vec;

    type Src = fn(f64, f64, f64) -> f64;

    #[test]
    fn thomas_matches_a_direct_solve() {
        // 4×4 system with identity end rows and varying interior bands.
        let sub = [0.0, -0.3, -0.4, 0.0];
        let diag = [1.0, 1.4, 1.6, 1.0];
        let sup = [0.0, -0.2, -0.1, 0.0];
        let mut rhs = vec![1.0, 2.0, -1.0, 3.0];
        thomas(&sub, &diag, &sup, &mut rhs);
        assert!((rhs[0] - 1.0).abs() < 1e-14);
        assert!((rhs[3] - 3.0).abs() < 1e-14);
        assert!((sub[1] * rhs[0] + diag[1] * rhs[1] + sup[1] * rhs[2] - 2.0).abs() < 1e-12);
        assert!((sub[2] * rhs[1] + diag[2] * rhs[2] + sup[2] * rhs[3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cfl_violations_are_rejected_with_a_suggestion() {
        let grid = Grid::default_box(1.0, 9, 5, 2).unwrap();
        let drift = parse("x").unwrap();
        let err = solve_fd(&grid, &drift, &|_, _, _| 0.0, None::<&Src>).unwrap_err();
        match err {
            NumericError::CflViolation { suggested_nt, .. } => {
                let fixed = Grid::default_box(1.0, 9, 5, suggested_nt).unwrap();
                assert!(solve_fd(&fixed, &drift, &|_, _, _| 0.0, None::<&Src>).is_ok());
            }
            other => panic!("expected a CFL error, got {other:?}"),
        }
    }

    #[test]
    fn y_independent_steady_data_stays_y_independent() {
        // v_i = 3 + r^i with r = (2+dz)/(2−dz) is the exact null vector of
        // the discrete ∂zz − ∂z, so it is a steady state of the full update
        // to rounding.  Being y-independent, it must stay so column by
        // column (a sign-changing drift exercises both upwind branches).
        let grid = Grid::default_box(0.2, 17, 7, 40).unwrap();
        let dz = grid.dz();
        let (z0, r) = (grid.z_min(), (2.0 + dz) / (2.0 - dz));
        let drift = parse("ln(x)").unwrap();
        let data = move |_t: f64, x: f64, _y: f64| {
            let steps = (libm::log(x) - z0) / dz;
            3.0 + libm::pow(r, steps)
        };
        let sol = solve_fd(&grid, &drift, &data, None::<&Src>).unwrap();
        for k in 0..=grid.nt {
            for i in 0..grid.nz {
                let expected = data(0.0, grid.x_at(i), 0.0);
                for j in 0..grid.ny {
                    assert!(
                        (sol.field.at(k, i, j) - expected).abs() < 1e-11,
                        "drift from steady state at k={k}, i={i}, j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn held_residual_is_reproducible() {
        let grid = Grid::default_box(0.1, 13, 9, 40).unwrap();
        let drift = parse("x").unwrap();
        let data = |t: f64, x: f64, y: f64| libm::exp(-t) * libm::sin(libm::log(x)) * (1.0 + 0.3 * y);
        let sol = solve_fd(&grid, &drift, &data, None::<&Src>).unwrap();
        assert!(sol.residual_norm.is_finite());
        let (again, coverage) = independent_residual(&sol, None::<&Src>, None);
        assert!((again - sol.residual_norm).abs() < 1e-12);
        assert!((coverage - 1.0).abs() < 1e-15);
    }

    /// Build a pointwise source closure for a manufactured exact solution by
    /// pushing it through the symbolic operator.
    fn manufactured(
        exact: &Expr,
        drift: &Expr,
    ) -> (impl Fn(f64, f64, f64) -> f64, impl Fn(f64, f64, f64) -> f64) {
        let x = Expr::var(Var::X);
        let residual = exact
            .diff(Var::T)
            .sub(&x.mul(&x).mul(&exact.diff(Var::X).diff(Var::X)))
            .sub(&drift.mul(&exact.diff(Var::Y)));
        let exact = exact.clone();
        let source = move |t: f64, x: f64, y: f64| {
            let env = Env::new().var(Var::T, t).var(Var::X, x).var(Var::Y, y);
            residual.eval(&env).unwrap()
        };
        let data = {
            let exact = exact.clone();
            move |t: f64, x: f64, y: f64| {
                let env = Env::new().var(Var::T, t).var(Var::X, x).var(Var::Y, y);
                exact.eval(&env).unwrap()
            }
        };
        (data, source)
    }

    fn max_error_at_final_level<D: Fn(f64, f64, f64) -> f64>(sol: &Solution, exact: &D) -> f64 {
        let g = &sol.grid;
        let mut worst = 0.0f64;
        for i in 0..g.nz {
            for j in 0..g.ny {
                let e = (sol.field.at(g.nt, i, j) - exact(g.t_max, g.x_at(i), g.y_at(j))).abs();
                worst = worst.max(e);
            }
        }
        worst
    }

    #[test]
    fn manufactured_solution_convergence_orders() {
        // Manufactured exact fields with the source pushed through the
        // symbolic operator, one per direction so each truncation term is
        // measured without the others flooring it.
        let drift = parse("x").unwrap();

        // z study: a y-independent field (no advection error at all) with
        // dt slaved to dz², leaving the centered-in-z truncation dominant;
        // expect second order.
        let exact_z = parse("exp(-t) * sin(ln(x))").unwrap();
        let (data_z, source_z) = manufactured(&exact_z, &drift);
        let mut z_errs = Vec::new();
        for nz in [9usize, 17, 33] {
            let dz = libm::log(4.0) / (nz - 1) as f64;
            let nt = libm::ceil(0.1 / (dz * dz)) as usize;
            let grid = Grid::new(0.5, 2.0, 0.0, 1.0, 0.1, nz, 5, nt).unwrap();
            let sol = solve_fd(&grid, &drift, &data_z, Some(&source_z)).unwrap();
            z_errs.push(max_error_at_final_level(&sol, &data_z));
        }
        let z_order = libm::log2(z_errs[1] / z_errs[2]);
        assert!(
            z_order >= 1.8,
            "z-refinement order {z_order:.3} from errors {z_errs:?}"
        );

        // y study: an x-independent field (zero z-truncation, even
        // discretely) with dt slaved to dy; expect first order from the
        // upwind advection.
        let exact_y = parse("exp(-t) * cos(y)").unwrap();
        let (data_y, source_y) = manufactured(&exact_y, &drift);
        let mut y_errs = Vec::new();
        for ny in [17usize, 33, 65] {
            let nt = (ny - 1) / 2;
            let grid = Grid::new(0.5, 2.0, 0.0, 1.0, 0.2, 9, ny, nt).unwrap();
            let sol = solve_fd(&grid, &drift, &data_y, Some(&source_y)).unwrap();
            y_errs.push(max_error_at_final_level(&sol, &data_y));
        }
        let y_order = libm::log2(y_errs[1] / y_errs[2]);
        assert!(
            y_order >= 0.8,
            "y-refinement order {y_order:.3} from errors {y_errs:?}"
        );
    }

    #[test]
    fn negative_drift_upwinds_from_below() {
        // A drift that is negative on the whole box must still converge —
        // this drives the backward-difference branch.
        let exact = parse("exp(-t) * sin(ln(x)) * cos(y)").unwrap();
        let drift = parse("-2 + 0*x").unwrap();
        let (data, source) = manufactured(&exact, &drift);
        let mut errs = Vec::new();
        for ny in [17usize, 33] {
            let nt = 4 * (ny - 1);
            let grid = Grid::new(0.5, 2.0, 0.0, 1.0, 0.1, 65, ny, nt).unwrap();
            let sol = solve_fd(&grid, &drift, &data, Some(&source)).unwrap();
            errs.push(max_error_at_final_level(&sol, &data));
        }
        assert!(errs[1] < errs[0], "refinement must reduce error: {errs:?}");
    }

    #[test]
    fn drift_sampling_uses_the_x_chart() {
        let grid = Grid::default_box(0.1, 5, 4, 2).unwrap();
        let drift = parse("x^2").unwrap();
        let vals = sample_drift(&grid, &drift).unwrap();
        assert!((vals[0] - 0.25).abs() < 1e-12);
        assert!((vals[grid.nz - 1] - 4.0).abs() < 1e-12);
    }
}
