//! The five drifts with enlarged symmetry, their general symmetry fields,
//! and the versioned generator catalog.
//!
//! For an arbitrary drift the equation `u_t = x²u_xx + f(x)u_y` admits only
//! the kernel: time and accumulation translations, the `u`-scaling, and the
//! shifts by solutions of the free equation. The drifts (up to equivalence)
//! `x`, `ln^n x`, `ln x`, `ln⁻² x` and `ln ln x` admit more; each case here
//! carries the complete general symmetry field with free constants
//! `C1, C2, …`, and the catalog lists the corresponding basis generators.
//! Every claim is re-derived on load: the case fields are run through the
//! symmetry condition with all constants symbolic, and each catalog
//! generator is checked individually.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{parse, Expr, ExprError, ParseError, Var};
use crate::field::{FieldError, FieldParseError, VectorField};

/// The catalog shipped with the engine.
pub const CATALOG_V1: &str = include_str!("catalog_v1.txt");

/// Error raised by case construction or catalog handling.
#[derive(Clone, PartialEq, Debug)]
pub enum CasesError {
    /// No case with this number (valid: 1–5).
    UnknownCase(u8),
    /// A fixture line failed to parse.
    Fixture(String),
    /// A field operation failed.
    Field(FieldError),
    /// An expression operation failed.
    Expr(ExprError),
}

impl From<FieldError> for CasesError {
    fn from(e: FieldError) -> Self {
        CasesError::Field(e)
    }
}

impl From<ExprError> for CasesError {
    fn from(e: ExprError) -> Self {
        CasesError::Expr(e)
    }
}

impl fmt::Display for CasesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CasesError::UnknownCase(k) => write!(f, "no case {k}; valid cases are 1-5"),
            CasesError::Fixture(msg) => write!(f, "catalog fixture: {msg}"),
            CasesError::Field(e) => write!(f, "{e}"),
            CasesError::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CasesError {}

/// The general symmetry field of one enlarged case, constants symbolic.
#[derive(Clone, Debug)]
pub struct CaseAnsatz {
    /// Case number 1–5.
    pub case: u8,
    /// The drift, with `n` symbolic where the case is a one-parameter
    /// family.
    pub drift: Expr,
    /// The general field; every admitted symmetry is an instantiation of
    /// the constants (plus a kernel shift).
    pub field: VectorField,
    /// Names of the free constants.
    pub constants: &'static [&'static str],
}

fn build(
    case: u8,
    drift: &str,
    xi0: &str,
    xi1: &str,
    xi2: &str,
    eta: &str,
    constants: &'static [&'static str],
) -> Result<CaseAnsatz, CasesError> {
    let p = |s: &str| parse(s).map_err(|e| CasesError::Fixture(format!("{s}: {e}")));
    let field = VectorField::new(p(xi0)?, p(xi1)?, p(xi2)?, p(eta)?)?;
    Ok(CaseAnsatz {
        case,
        drift: p(drift)?,
        field,
        constants,
    })
}

/// The general symmetry field of case 1–5. Constants are the parameters
/// `C1, C2, …`; the drift of case 2 carries the symbolic exponent `n`
/// (excluded values `n = -2, 0, 1` are cases 4, the kernel, and 3).
pub fn case_ansatz(case: u8) -> Result<CaseAnsatz, CasesError> {
    match case {
        1 => build(
            1,
            "x",
            "C1",
            "(C2*y + C3)*x",
            "1/2*C2*y^2 + C3*y + C4",
            "(1/2*C2*x + C5)*u",
            &["C1", "C2", "C3", "C4", "C5"],
        ),
        2 => build(
            2,
            "ln(x)^n",
            "C1*t + C2",
            "1/2*C1*x*ln(x)",
            "(n+2)/2*C1*y + C3",
            "(1/4*C1*(ln(x) - t) + C4)*u",
            &["C1", "C2", "C3", "C4"],
        ),
        3 => build(
            3,
            "ln(x)",
            "C1*t^2 + C2*t + C3",
            "(C1*t + 1/2*C2)*x*ln(x) + (C4*t^2 + C5*t - 3*C1*y + C6)*x",
            "3*C1*t*y + 3/2*C2*y - 1/3*C4*t^3 - 1/2*C5*t^2 - C6*t + C7",
            "(-C1*ln(x)^2 + 1/2*((C1 - 2*C4)*t - C5 + 1/2*C2)*ln(x) \
             + 1/4*(2*C4 - C1)*t^2 + 1/4*(2*C5 - 8*C1 - C2)*t \
             - (3/2*C1 + C4)*y + C8)*u",
            &["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"],
        ),
        4 => build(
            4,
            "ln(x)^(-2)",
            "C1*t^2 + C2*t + C3",
            "(C1*t + 1/2*C2)*x*ln(x)",
            "C4",
            "(-1/4*C1*ln(x)^2 + (2*C1*t + C2)/4*ln(x) - 1/4*C1*t^2 \
             - (2*C1 + C2)/4*t + C5)*u",
            &["C1", "C2", "C3", "C4", "C5"],
        ),
        5 => build(
            5,
            "ln(ln(x))",
            "C1*t + C2",
            "1/2*C1*x*ln(x)",
            "C1*(y - 1/2*t) + C3",
            "(1/4*C1*(ln(x) - t) + C4)*u",
            &["C1", "C2", "C3", "C4"],
        ),
        other => Err(CasesError::UnknownCase(other)),
    }
}

impl CaseAnsatz {
    /// The field with one constant set to 1 and the others to 0.
    pub fn basis_field(&self, constant: &str) -> Result<VectorField, CasesError> {
        let mut comps: Vec<Expr> = Vec::new();
        for c in self.field.components() {
            let mut e = (*c).clone();
            for name in self.constants {
                let value = if *name == constant {
                    Expr::one()
                } else {
                    Expr::zero()
                };
                e = e.subst_param(name, &value)?;
            }
            comps.push(e);
        }
        Ok(VectorField::new(
            comps[0].clone(),
            comps[1].clone(),
            comps[2].clone(),
            comps[3].clone(),
        )?)
    }

    /// All single-constant basis fields, dropping any that vanish.
    pub fn basis(&self) -> Result<Vec<(String, VectorField)>, CasesError> {
        let mut out = Vec::new();
        for name in self.constants {
            let f = self.basis_field(name)?;
            if !f.is_zero() {
                out.push((name.to_string(), f));
            }
        }
        Ok(out)
    }

    /// The symmetry-condition residual of the general field against the
    /// case drift; identically zero for a correct ansatz.
    pub fn residual(&self) -> Result<Expr, CasesError> {
        Ok(self.field.lie_residual(&self.drift)?)
    }
}

/// The drift pattern of a catalog row.
#[derive(Clone, PartialEq, Debug)]
pub enum DriftPattern {
    /// Any drift; verified with an opaque function symbol.
    Arbitrary,
    /// A concrete drift (possibly with the symbolic exponent `n`).
    Specific(Expr),
}

impl DriftPattern {
    /// The drift expression used for verification.
    pub fn drift(&self) -> Expr {
        match self {
            DriftPattern::Arbitrary => Expr::fun("f", &[Expr::var(Var::X)]),
            DriftPattern::Specific(e) => e.clone(),
        }
    }
}

impl fmt::Display for DriftPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftPattern::Arbitrary => write!(f, "arbitrary"),
            DriftPattern::Specific(e) => write!(f, "{e}"),
        }
    }
}

/// One catalog row: a drift and its claimed generators.
#[derive(Clone, Debug)]
pub struct CatalogRow {
    pub index: usize,
    pub pattern: DriftPattern,
    pub generators: Vec<VectorField>,
}

/// A parsed generator catalog.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub version: u32,
    pub rows: Vec<CatalogRow>,
}

/// Parses a catalog fixture. Lines: `version N` once, `row K: f = EXPR`
/// (with `_` for an arbitrary drift) starting a row, `gen FIELD` adding a
/// generator. `#` comments and blank lines are ignored.
pub fn parse_catalog(text: &str) -> Result<Catalog, CasesError> {
    let mut version = None;
    let mut rows: Vec<CatalogRow> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CasesError::Fixture(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("version") {
            let v: u32 = rest
                .trim()
                .parse()
                .map_err(|_| err(format!("bad version {rest:?}")))?;
            if version.replace(v).is_some() {
                return Err(err("duplicate version line".to_string()));
            }
        } else if let Some(rest) = line.strip_prefix("row") {
            let (num, spec) = rest
                .split_once(':')
                .ok_or_else(|| err("expected `row K: f = EXPR`".to_string()))?;
            let index: usize = num
                .trim()
                .parse()
                .map_err(|_| err(format!("bad row number {num:?}")))?;
            let spec = spec.trim();
            let drift = spec
                .strip_prefix("f")
                .map(str::trim_start)
                .and_then(|s| s.strip_prefix('='))
                .map(str::trim)
                .ok_or_else(|| err("expected `f = EXPR`".to_string()))?;
            let pattern = if drift == "_" {
                DriftPattern::Arbitrary
            } else {
                DriftPattern::Specific(
                    parse(drift).map_err(|e: ParseError| err(format!("{e}")))?,
                )
            };
            rows.push(CatalogRow {
                index,
                pattern,
                generators: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix("gen") {
            let row = rows
                .last_mut()
                .ok_or_else(|| err("`gen` before any `row`".to_string()))?;
            let field = VectorField::parse(rest.trim())
                .map_err(|e: FieldParseError| err(format!("{e}")))?;
            row.generators.push(field);
        } else {
            return Err(err(format!("unrecognized line {line:?}")));
        }
    }
    let version = version.ok_or_else(|| {
        CasesError::Fixture("missing version line".to_string())
    })?;
    Ok(Catalog { version, rows })
}

/// The verdict on a single catalog generator.
#[derive(Clone, Debug)]
pub struct GeneratorCheck {
    /// The generator, in operator notation.
    pub generator: String,
    /// The symmetry-condition residual (zero iff the generator passes).
    pub residual: Expr,
    pub pass: bool,
}

/// The verdict on one catalog row.
#[derive(Clone, Debug)]
pub struct RowReport {
    pub index: usize,
    pub drift: String,
    pub checks: Vec<GeneratorCheck>,
}

impl RowReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Runs every generator of a row through the symmetry condition.
pub fn verify_row(row: &CatalogRow) -> Result<RowReport, CasesError> {
    let drift = row.pattern.drift();
    let mut checks = Vec::new();
    for g in &row.generators {
        let residual = g.lie_residual(&drift)?;
        let pass = residual.is_zero();
        checks.push(GeneratorCheck {
            generator: format!("{g}"),
            residual,
            pass,
        });
    }
    Ok(RowReport {
        index: row.index,
        drift: format!("{}", row.pattern),
        checks,
    })
}

/// The case number whose general field covers a catalog row (rows 2–6).
pub fn row_case(index: usize) -> Option<u8> {
    match index {
        2 => Some(1),
        3 => Some(2),
        4 => Some(3),
        5 => Some(4),
        6 => Some(5),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use alloc::vec::Vec;

    use crate::expr::parse;
    use crate::field::VectorField;

    use super::{
        case_ansatz, parse_catalog, row_case, verify_row, DriftPattern, CATALOG_V1,
    };

    #[test]
    fn every_case_field_satisfies_the_symmetry_condition_symbolically() {
        for case in 1..=5 {
            let ansatz = case_ansatz(case).unwrap();
            let residual = ansatz.residual().unwrap();
            assert!(
                residual.is_zero(),
                "case {case} residual: {residual}"
            );
        }
    }

    #[test]
    fn catalog_parses_with_expected_shape() {
        let catalog = parse_catalog(CATALOG_V1).unwrap();
        assert_eq!(catalog.version, 1);
        let counts: Vec<usize> = catalog.rows.iter().map(|r| r.generators.len()).collect();
        assert_eq!(counts, [3, 5, 4, 8, 5, 4]);
        assert_eq!(catalog.rows[0].pattern, DriftPattern::Arbitrary);
        assert_eq!(
            catalog.rows[3].pattern,
            DriftPattern::Specific(parse("ln(x)").unwrap())
        );
    }

    #[test]
    fn every_catalog_generator_passes_the_symmetry_condition() {
        let catalog = parse_catalog(CATALOG_V1).unwrap();
        for row in &catalog.rows {
            let report = verify_row(row).unwrap();
            for check in &report.checks {
                assert!(
                    check.pass,
                    "row {} generator {}: residual {}",
                    row.index, check.generator, check.residual
                );
            }
        }
    }

    #[test]
    fn every_specific_generator_is_a_basis_field_of_its_case() {
        let catalog = parse_catalog(CATALOG_V1).unwrap();
        for row in &catalog.rows {
            let Some(case) = row_case(row.index) else {
                continue;
            };
            let ansatz = case_ansatz(case).unwrap();
            let basis = ansatz.basis().unwrap();
            for g in &row.generators {
                let hit = basis.iter().any(|(_, b)| b.sub(g).is_zero());
                assert!(
                    hit,
                    "row {} generator {g} is not a single-constant field of case {case}",
                    row.index
                );
            }
        }
    }

    #[test]
    fn a_corrupted_generator_is_caught() {
        let mut catalog = parse_catalog(CATALOG_V1).unwrap();
        let row = &mut catalog.rows[1];
        row.generators[3] = VectorField::parse("x^2*Dx").unwrap();
        let report = verify_row(row).unwrap();
        assert!(!report.all_pass());
        assert!(!report.checks[3].pass);
        assert!(report.checks[4].pass);
    }

    #[test]
    fn fixture_errors_carry_line_numbers() {
        let bad = "version 1\ngen Dt\n";
        let err = parse_catalog(bad).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("line 2"), "{msg}");
    }
}
