//! The five subcommands, each producing a [`Report`].
//!
//! Every function here is a pure input → report mapping (plus declared file
//! IO); rendering and exit codes live in `main`. Checks are pushed in a
//! fixed order so identical inputs produce byte-identical reports.

use std::fmt;
use std::fs;
use std::path::Path;

use asianlie_core::algebra::{closure_report, decompose, dimension};
use asianlie_core::cases::{case_ansatz, parse_catalog, row_case, verify_row, CatalogRow, CATALOG_V1};
use asianlie_core::determining::{derive, monomial_label, parse_reference, REFERENCE_SYSTEM_V1};
use asianlie_core::expr::{parse, Atom, Env, Expr, Var};
use asianlie_core::family::{canonicalize, recognize, CanonicalShape, FunctionFamily};
use asianlie_core::field::VectorField;
use asianlie_core::numeric::{
    check_symmetry, csv_slice, exact_solution_linear_drift, map_point, solve_fd, CheckConfig,
    FlowMethod, Grid, NumericError, Solution, Verdict,
};
use asianlie_core::reduce::{characteristic_system, reduce, ReduceError, ReduceOutcome};

use crate::report::{Report, Status, Tolerances};

/// The command could not produce a report at all: unparseable inputs,
/// missing files, or an internal engine error. Rendered to stderr with exit
/// code 2 (distinct from a report that contains failing checks).
#[derive(Debug)]
pub struct CommandError(pub String);

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CommandError {}

fn engine<E: fmt::Display>(e: E) -> CommandError {
    CommandError(format!("engine error: {e}"))
}

fn parse_drift(text: &str) -> Result<Expr, CommandError> {
    parse(text).map_err(|e| CommandError(format!("cannot parse --f {text:?}: {e}")))
}

fn load_fixture(path: Option<&Path>, embedded: &str) -> Result<(String, String), CommandError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CommandError(format!("cannot read fixture {}: {e}", p.display())))?;
            Ok((p.display().to_string(), text))
        }
        None => Ok(("(embedded)".to_string(), embedded.to_string())),
    }
}

// ---------------------------------------------------------------------------
// determining
// ---------------------------------------------------------------------------

/// Regenerate the determining system from the invariance criterion and prove
/// it equivalent (two-way span inclusion plus matching vanishing patterns)
/// to the reference fixture.
pub fn determining(
    show_monomials: bool,
    fixtures: Option<&Path>,
    tol: Tolerances,
) -> Result<Report, CommandError> {
    let mut report = Report::new("determining", tol);
    report.input("show-monomials", show_monomials);
    let (source, text) = load_fixture(fixtures, REFERENCE_SYSTEM_V1)?;
    report.input("fixtures", &source);

    let system = derive().map_err(engine)?;
    report.pass(
        "determining system derived",
        format!(
            "{} jet-monomial coefficient equations for fully general \
             coefficients in (t, x, y, u)",
            system.equations.len()
        ),
    );

    let reduced = system.reduce().map_err(engine)?;
    let vanished: Vec<String> = reduced.vanishing.iter().map(|v| format!("{v} = 0")).collect();
    report.pass(
        "single-symbol reduction",
        format!(
            "proven identically zero: {}; {} equations survive",
            vanished.join(", "),
            reduced.system.equations.len()
        ),
    );

    let reference = parse_reference(&text).map_err(engine)?;
    let eq = reduced.equivalent_to(&reference).map_err(engine)?;
    report.verdict(
        "vanishing patterns agree",
        eq.vanishing_match,
        format!(
            "{} symbols proven zero on each side",
            reduced.vanishing.len()
        ),
    );

    for (name, witnesses, lookup_generated) in [
        ("generated equations lie in the reference span", &eq.forward, true),
        ("reference equations lie in the generated span", &eq.backward, false),
    ] {
        let bad: Vec<&str> = witnesses
            .iter()
            .filter(|w| !w.ok)
            .map(|w| w.label.as_str())
            .collect();
        report.verdict(
            name,
            bad.is_empty(),
            if bad.is_empty() {
                format!("all {} equations expressed exactly", witnesses.len())
            } else {
                format!("outside the span: {}", bad.join(", "))
            },
        );
        for label in bad {
            let lhs = if lookup_generated {
                reduced
                    .system
                    .equations
                    .iter()
                    .find(|e| monomial_label(&e.monomial) == label)
                    .map(|e| e.lhs.to_string())
            } else {
                reference
                    .equations
                    .iter()
                    .find(|(l, _)| l == label)
                    .map(|(_, e)| e.to_string())
            };
            report.discrepancy(
                name,
                format!("{label}: {}", lhs.unwrap_or_else(|| "<missing>".into())),
                None,
            );
        }
    }

    let rendered = if show_monomials {
        reduced.system.render()
    } else {
        let mut s = String::new();
        for eq in &reduced.system.equations {
            s.push_str(&eq.lhs.to_string());
            s.push('\n');
        }
        s
    };
    report.artifact("vanishing-derivatives", vanished.join("\n"));
    report.artifact("determining-system", rendered);
    Ok(report)
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

/// Which embedded catalog row covers a canonical shape.
fn shape_row(shape: &CanonicalShape) -> usize {
    match shape {
        CanonicalShape::Identity => 2,
        CanonicalShape::LogPower(n) => {
            if n.sub(&Expr::one()).is_zero() {
                4
            } else if n.add(&Expr::int(2)).is_zero() {
                5
            } else {
                3
            }
        }
        CanonicalShape::LogLog => 6,
    }
}

fn catalog_row(index: usize) -> Result<CatalogRow, CommandError> {
    let catalog = parse_catalog(CATALOG_V1).map_err(engine)?;
    catalog
        .rows
        .into_iter()
        .find(|r| r.index == index)
        .ok_or_else(|| CommandError(format!("embedded catalog has no row {index}")))
}

fn kernel_summary(report: &mut Report) {
    report.pass(
        "admitted algebra",
        "kernel only: Dt, Dy, u*Du, plus the shift family beta(t,x)*Du for \
         solutions beta of the drift-free equation",
    );
}

/// Recognize the drift's family, canonicalize it through the equivalence
/// group, and report the admitted symmetry algebra of the canonical form.
pub fn classify(f_text: &str, tol: Tolerances) -> Result<Report, CommandError> {
    let mut report = Report::new("classify", tol);
    report.input("f", f_text);
    report.assume("symbolic constants are treated as nonzero where a family branch requires it");
    report.assume(
        "the catalog's case analysis takes the time component xi0 independent of y (axiom)",
    );
    let f = parse_drift(f_text)?;
    let family = recognize(&f).map_err(|e| CommandError(format!("--f: {e}")))?;
    report.pass("family recognition", family.to_string());

    match &family {
        FunctionFamily::Constant(c) => {
            report.check(
                "canonicalization",
                Status::Inconclusive,
                format!(
                    "constant drift {c}: the classification covers drifts with \
                     nonvanishing derivative"
                ),
            );
            kernel_summary(&mut report);
        }
        FunctionFamily::Generic => {
            report.check(
                "canonicalization",
                Status::Inconclusive,
                "no equivalence-group normal form recognized for this drift",
            );
            kernel_summary(&mut report);
        }
        recognized => {
            let canon = canonicalize(recognized).map_err(engine)?;
            report.verdict(
                "canonical form",
                canon.verified,
                format!(
                    "{}; drift law checked symbolically",
                    canon.description
                ),
            );
            report.artifact("transform", canon.transform.describe());

            let row = catalog_row(shape_row(&canon.shape))?;
            let gens: Vec<String> = row.generators.iter().map(|g| g.to_string()).collect();
            let dim = dimension(&row.generators, tol.seed).map_err(engine)?;
            report.pass(
                "admitted algebra",
                format!(
                    "catalog row {} (canonical drift {}): {} finite generators, \
                     dimension {}, plus the kernel shift family",
                    row.index, row.pattern, row.generators.len(), dim
                ),
            );
            report.artifact("row-generators", gens.join("\n"));

            let row_report = verify_row(&row).map_err(engine)?;
            report.verdict(
                "row residuals",
                row_report.all_pass(),
                "every listed generator re-checked against the canonical drift",
            );
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// verify-catalog
// ---------------------------------------------------------------------------

fn has_params(e: &Expr) -> bool {
    let mut found = false;
    e.for_each_atom(&mut |a| {
        if matches!(a, Atom::Param(_)) {
            found = true;
        }
    });
    found
}

fn field_has_params(f: &VectorField) -> bool {
    f.components().iter().any(|c| has_params(c))
}

/// Candidate solution boxes, tried in order: the default box, then one
/// bounded away from x = 1 for drifts singular where ln x vanishes.
const BOXES: [(f64, f64); 2] = [(0.5, 2.0), (1.5, 3.0)];

fn numeric_grid(drift: &Expr) -> Option<(Grid, Vec<f64>)> {
    for (x_min, x_max) in BOXES {
        let trial = Grid::new(x_min, x_max, 0.0, 1.0, 0.4, 25, 25, 1).ok()?;
        let Ok(values) = asianlie_core::numeric::sample_drift(&trial, drift) else {
            continue;
        };
        if values.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let max_f = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dy = trial.dy();
        let nt = ((0.4 * max_f / dy).ceil() as usize + 1).max(200);
        let grid = Grid::new(x_min, x_max, 0.0, 1.0, 0.4, 25, 25, nt).ok()?;
        return Some((grid, values));
    }
    None
}

/// Lattice data: the exact closed-form solution when the drift is `x`
/// (fully compatible boundaries, truncation-only baseline), otherwise a
/// smooth generic profile (the budget self-calibrates to its baseline).
fn solve_for_checks(grid: &Grid, drift: &Expr) -> Result<Solution, NumericError> {
    type Src = fn(f64, f64, f64) -> f64;
    if drift.sub(&Expr::var(Var::X)).is_zero() {
        let exact = exact_solution_linear_drift();
        let data = move |t: f64, x: f64, y: f64| {
            let env = Env::new().var(Var::T, t).var(Var::X, x).var(Var::Y, y);
            exact.eval(&env).expect("exact solution is total for x > 0")
        };
        solve_fd(grid, drift, &data, None::<&Src>)
    } else {
        let data = |t: f64, x: f64, y: f64| (-0.5 * t).exp() * (x + y * (1.0 - y));
        solve_fd(grid, drift, &data, None::<&Src>)
    }
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

fn method_name(m: FlowMethod) -> &'static str {
    match m {
        FlowMethod::ClosedForm => "closed-form",
        FlowMethod::RungeKutta => "Runge-Kutta",
    }
}

/// Maximum round-trip defect `|Φ_{−ε}(Φ_ε(p)) − p|` over a few box points.
fn flow_round_trip(field: &VectorField, eps: f64) -> Result<f64, NumericError> {
    let mut worst = 0.0f64;
    for p in [
        [0.1, 0.6, 0.2, 0.7],
        [0.3, 1.7, 0.9, -0.4],
        [0.0, 1.0, 0.5, 1.3],
    ] {
        let (fwd, _) = map_point(field, eps, p)?;
        let (back, _) = map_point(field, -eps, fwd)?;
        for k in 0..4 {
            worst = worst.max((back[k] - p[k]).abs());
        }
    }
    Ok(worst)
}

fn describe_sweep(check: &asianlie_core::numeric::SymmetryCheck) -> String {
    let mut parts = vec![format!("baseline {:.3e}", check.baseline)];
    for r in &check.reports {
        parts.push(format!(
            "eps {:.3}: residual {:.3e} vs budget {:.3e}, coverage {:.2}, {}",
            r.eps,
            r.residual_norm,
            r.budget,
            r.coverage,
            method_name(r.method)
        ));
    }
    parts.join("; ")
}

/// The nearest combination of the covering case ansatz, for discrepancy
/// reports on failing catalog generators.
fn nearest_ansatz(row_index: usize, target: &VectorField, seed: u64) -> Option<String> {
    let case = row_case(row_index)?;
    let ansatz = case_ansatz(case).ok()?;
    let basis = ansatz.basis().ok()?;
    let fields: Vec<VectorField> = basis.iter().map(|(_, f)| f.clone()).collect();
    let dec = decompose(target, &fields, seed).ok()?;
    let combo: Vec<String> = basis
        .iter()
        .zip(&dec.coefficients)
        .filter(|(_, c)| !c.is_zero())
        .map(|((name, _), c)| format!("({c})*[{name}]"))
        .collect();
    let head = if combo.is_empty() {
        "0".to_string()
    } else {
        combo.join(" + ")
    };
    Some(if dec.exact {
        format!("case ({case}) specialization: {head}")
    } else {
        format!(
            "case ({case}) nearest combination: {head}; remainder {}",
            dec.remainder
        )
    })
}

/// Check every generator of every (selected) row against the symmetry
/// condition, report per-row closure and dimension, and — with `numeric` —
/// grade the generators' finite flows against a solved lattice.
pub fn verify_catalog(
    row_filter: Option<usize>,
    numeric: bool,
    fixtures: Option<&Path>,
    tol: Tolerances,
) -> Result<Report, CommandError> {
    let mut report = Report::new("verify-catalog", tol);
    report.input("numeric", numeric);
    let (source, text) = load_fixture(fixtures, CATALOG_V1)?;
    report.input("fixtures", &source);
    if let Some(r) = row_filter {
        report.input("row", r);
    }
    report.assume(
        "the catalog's case analysis takes the time component xi0 independent of y (axiom)",
    );
    report.assume("the exponent n in drift patterns is an arbitrary constant outside {-2, 0, 1}");

    let catalog = parse_catalog(&text).map_err(|e| CommandError(format!("fixture: {e}")))?;
    report.input("catalog-version", catalog.version);
    let rows: Vec<&CatalogRow> = match row_filter {
        Some(k) => {
            let row = catalog
                .rows
                .iter()
                .find(|r| r.index == k)
                .ok_or_else(|| CommandError(format!("catalog has no row {k}")))?;
            vec![row]
        }
        None => catalog.rows.iter().collect(),
    };

    let mut dims: Vec<(usize, usize)> = Vec::new();
    for row in &rows {
        let row_report = verify_row(row).map_err(engine)?;
        for (check, field) in row_report.checks.iter().zip(&row.generators) {
            let name = format!("row {}: residual of {}", row.index, check.generator);
            report.verdict(
                name.as_str(),
                check.pass,
                if check.pass {
                    format!("identically zero against f = {}", row_report.drift)
                } else {
                    format!("nonzero residual against f = {}", row_report.drift)
                },
            );
            if !check.pass {
                report.discrepancy(
                    &name,
                    check.residual.to_string(),
                    nearest_ansatz(row.index, field, tol.seed),
                );
            }
        }

        let table = closure_report(&row.generators, tol.seed).map_err(engine)?;
        report.verdict(
            format!("row {}: closure", row.index),
            table.closed && table.antisymmetric && table.jacobi,
            format!(
                "brackets decompose over the span: {}; antisymmetry: {}; Jacobi: {}",
                table.closed, table.antisymmetric, table.jacobi
            ),
        );
        report.artifact(
            &format!("structure-table-row-{}", row.index),
            table.render(),
        );

        let dim = dimension(&row.generators, tol.seed).map_err(engine)?;
        report.pass(
            format!("row {}: dimension", row.index),
            format!("{dim} independent finite generators"),
        );
        dims.push((row.index, dim));
    }

    if row_filter.is_none() {
        let (max_row, max_dim) = dims
            .iter()
            .copied()
            .max_by_key(|&(_, d)| d)
            .expect("catalog is nonempty");
        let unique = dims.iter().filter(|&&(_, d)| d == max_dim).count() == 1;
        let listing: Vec<String> = dims
            .iter()
            .map(|(r, d)| format!("row {r}: {d}"))
            .collect();
        report.verdict(
            "dimension summary",
            unique,
            format!(
                "{}; maximum {max_dim} at row {max_row}{}",
                listing.join(", "),
                if unique { " (unique)" } else { " (tied)" }
            ),
        );
    }

    if numeric {
        numeric_checks(&mut report, &rows, tol)?;
        convergence_checks(&mut report)?;
    }

    Ok(report)
}

fn numeric_checks(
    report: &mut Report,
    rows: &[&CatalogRow],
    tol: Tolerances,
) -> Result<(), CommandError> {
    let config = CheckConfig::default();
    report.input(
        "epsilons",
        config
            .epsilons
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    report.input("budget-factor", config.budget_factor);

    for row in rows {
        let drift = match &row.pattern {
            asianlie_core::cases::DriftPattern::Arbitrary => {
                report.check(
                    format!("row {}: flow checks", row.index),
                    Status::Inconclusive,
                    "numeric checks need a concrete drift; this row holds for every drift",
                );
                continue;
            }
            asianlie_core::cases::DriftPattern::Specific(e) => e.clone(),
        };
        if has_params(&drift) {
            report.check(
                format!("row {}: flow checks", row.index),
                Status::Inconclusive,
                "drift carries a symbolic constant; instantiate it to run numeric checks",
            );
            continue;
        }
        let Some((grid, _)) = numeric_grid(&drift) else {
            report.check(
                format!("row {}: flow checks", row.index),
                Status::Inconclusive,
                "no candidate box evaluates the drift finitely",
            );
            continue;
        };
        let solution = solve_for_checks(&grid, &drift).map_err(engine)?;

        for field in &row.generators {
            let name = format!("row {}: flow of {}", row.index, field);
            if field_has_params(field) {
                report.check(
                    name,
                    Status::Inconclusive,
                    "generator carries a symbolic constant; instantiate it to flow numerically",
                );
                continue;
            }
            let trip_name = format!("row {}: flow round-trip of {}", row.index, field);
            match flow_round_trip(field, 0.05) {
                Ok(trip) => report.verdict(
                    trip_name,
                    trip <= tol.tolerance,
                    format!("max |backward(forward(p)) - p| = {trip:.3e}"),
                ),
                Err(e) => report.check(
                    trip_name,
                    Status::Inconclusive,
                    format!("not evaluable: {e}"),
                ),
            }
            match check_symmetry(&solution, field, &config) {
                Ok(check) => {
                    let status = verdict_status(check.verdict);
                    let detail = describe_sweep(&check);
                    if status == Status::Fail {
                        report.discrepancy(&name, detail.clone(), None);
                    }
                    report.check(name, status, detail);
                }
                Err(e) => {
                    report.check(name, Status::Inconclusive, format!("not gradable: {e}"));
                }
            }
        }
    }
    Ok(())
}

/// Manufactured-solution refinement study, one direction at a time: the
/// implicit x-diffusion is second order, the upwind y-advection first order.
fn convergence_checks(report: &mut Report) -> Result<(), CommandError> {
    fn manufactured(
        exact: &Expr,
        drift: &Expr,
    ) -> (
        impl Fn(f64, f64, f64) -> f64,
        impl Fn(f64, f64, f64) -> f64,
    ) {
        let x = Expr::var(Var::X);
        let residual = exact
            .diff(Var::T)
            .sub(&x.mul(&x).mul(&exact.diff(Var::X).diff(Var::X)))
            .sub(&drift.mul(&exact.diff(Var::Y)));
        let exact = exact.clone();
        let eval = move |e: &Expr, t: f64, x: f64, y: f64| {
            let env = Env::new().var(Var::T, t).var(Var::X, x).var(Var::Y, y);
            e.eval(&env).expect("manufactured fields are total on the box")
        };
        let source = {
            let eval = eval.clone();
            move |t: f64, x: f64, y: f64| eval(&residual, t, x, y)
        };
        let data = move |t: f64, x: f64, y: f64| eval(&exact, t, x, y);
        (data, source)
    }

    fn sup_error<D: Fn(f64, f64, f64) -> f64>(sol: &Solution, exact: &D) -> f64 {
        let g = &sol.grid;
        let mut worst = 0.0f64;
        for i in 0..g.nz {
            for j in 0..g.ny {
                worst =
                    worst.max((sol.field.at(g.nt, i, j) - exact(g.t_max, g.x_at(i), g.y_at(j))).abs());
            }
        }
        worst
    }

    let drift = parse("x").expect("fixed grammar text");

    let exact_z = parse("exp(-t) * sin(ln(x))").expect("fixed grammar text");
    let (data_z, source_z) = manufactured(&exact_z, &drift);
    let mut z_errs = Vec::new();
    for nz in [9usize, 17, 33] {
        let dz = (4.0f64).ln() / (nz - 1) as f64;
        let nt = (0.1 / (dz * dz)).ceil() as usize;
        let grid = Grid::new(0.5, 2.0, 0.0, 1.0, 0.1, nz, 5, nt).map_err(engine)?;
        let sol = solve_fd(&grid, &drift, &data_z, Some(&source_z)).map_err(engine)?;
        z_errs.push(sup_error(&sol, &data_z));
    }
    let z_order = (z_errs[1] / z_errs[2]).log2();
    report.verdict(
        "manufactured-solution order in x",
        z_order >= 1.8,
        format!("errors {z_errs:?}, refinement order {z_order:.3} (needed >= 1.8)"),
    );

    let exact_y = parse("exp(-t) * cos(y)").expect("fixed grammar text");
    let (data_y, source_y) = manufactured(&exact_y, &drift);
    let mut y_errs = Vec::new();
    for ny in [17usize, 33, 65] {
        let nt = (ny - 1) / 2;
        let grid = Grid::new(0.5, 2.0, 0.0, 1.0, 0.2, 9, ny, nt).map_err(engine)?;
        let sol = solve_fd(&grid, &drift, &data_y, Some(&source_y)).map_err(engine)?;
        y_errs.push(sup_error(&sol, &data_y));
    }
    let y_order = (y_errs[1] / y_errs[2]).log2();
    report.verdict(
        "manufactured-solution order in y",
        y_order >= 0.8,
        format!("errors {y_errs:?}, refinement order {y_order:.3} (needed >= 0.8)"),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

/// Reduce the equation by a generator: invariant ansatz, reduced equation,
/// and the back-substitution verdict. Generators outside the automated
/// family get their characteristic system instead.
pub fn reduce_cmd(f_text: &str, gen_text: &str, tol: Tolerances) -> Result<Report, CommandError> {
    let mut report = Report::new("reduce", tol);
    report.input("f", f_text);
    report.input("generator", gen_text);
    report.assume(
        "the automated family is a*Dt + b*Dy + lambda*u*Du with constant (possibly symbolic) \
         coefficients",
    );
    let drift = parse_drift(f_text)?;
    let field = VectorField::parse(gen_text)
        .map_err(|e| CommandError(format!("cannot parse --generator {gen_text:?}: {e}")))?;

    match reduce(&field, &drift) {
        Ok(ReduceOutcome::Reduced(r)) => {
            report.pass("invariant ansatz", r.description.clone());
            report.verdict(
                "back-substitution",
                r.verified,
                if r.verified {
                    format!(
                        "substituting the ansatz factors the equation as ({}) times the \
                         reduced equation, exactly",
                        r.weight
                    )
                } else {
                    "the substituted equation does not factor through the reduced one".to_string()
                },
            );
            report.artifact("ansatz", r.ansatz.to_string());
            report.artifact("reduced-equation", format!("{} = 0", r.reduced));
            report.artifact("weight", r.weight.to_string());
        }
        Ok(ReduceOutcome::Characteristics(c)) => {
            report.check(
                "automated reduction",
                Status::Inconclusive,
                "generator outside the constant-coefficient family; invariants are first \
                 integrals of the characteristic system",
            );
            report.artifact("characteristic-system", c);
        }
        Err(ReduceError::NoInvariantSolutions) => {
            return Err(CommandError(format!(
                "no invariant ansatz for {gen_text}: {}; its characteristic system is {}",
                ReduceError::NoInvariantSolutions,
                characteristic_system(&field)
            )));
        }
        Err(e) => return Err(CommandError(format!("reduction failed: {e}"))),
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

/// Solve the equation on a box and export the final-time slice as CSV.
pub fn solve(
    f_text: &str,
    size: usize,
    t_max: f64,
    out: &Path,
    tol: Tolerances,
) -> Result<Report, CommandError> {
    let mut report = Report::new("solve", tol);
    report.input("f", f_text);
    report.input("size", size);
    report.input("t-max", t_max);
    report.input("out", out.display().to_string());
    report.assume(
        "first-order upwinding in y and backward-Euler x-diffusion; the reported self-check \
         uses an independent time-centered stencil",
    );
    let drift = parse_drift(f_text)?;
    if has_params(&drift) {
        return Err(CommandError(
            "the drift carries symbolic constants; substitute numbers first".to_string(),
        ));
    }
    if t_max <= 0.0 || !t_max.is_finite() {
        return Err(CommandError(format!("--t-max must be positive, got {t_max}")));
    }
    if size < 4 {
        return Err(CommandError(format!("--size must be at least 4, got {size}")));
    }

    let Some((probe, values)) = numeric_grid(&drift) else {
        return Err(CommandError(
            "no candidate box evaluates the drift finitely".to_string(),
        ));
    };
    let max_f = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dy = 1.0 / (size - 1) as f64;
    let nt = ((t_max * max_f / dy).ceil() as usize + 1).max(4 * size);
    let mut grid = Grid::new(probe.x_min, probe.x_max, 0.0, 1.0, t_max, size, size, nt)
        .map_err(engine)?;

    // The step count came from a coarse probe of the drift; if the fine
    // lattice sees a larger drift value, retry once with the solver's own
    // suggestion.
    let solution = match solve_for_checks(&grid, &drift) {
        Ok(s) => s,
        Err(NumericError::CflViolation { suggested_nt, .. }) => {
            grid = Grid::new(
                probe.x_min,
                probe.x_max,
                0.0,
                1.0,
                t_max,
                size,
                size,
                suggested_nt,
            )
            .map_err(engine)?;
            solve_for_checks(&grid, &drift).map_err(engine)?
        }
        Err(e) => return Err(engine(e)),
    };
    report.pass(
        "solved",
        format!(
            "box x in [{}, {}], y in [0, 1], t in [0, {t_max}]; {size}x{size} nodes, {nt} steps; \
             independent-stencil self-check RMS {:.3e}",
            grid.x_min, grid.x_max, solution.residual_norm
        ),
    );

    let csv = csv_slice(&grid, &solution.field, grid.nt);
    fs::write(out, &csv)
        .map_err(|e| CommandError(format!("cannot write {}: {e}", out.display())))?;
    report.pass(
        "exported",
        format!("final-time slice, {} bytes of CSV", csv.len()),
    );
    report.artifact("csv-path", out.display().to_string());
    Ok(report)
}
