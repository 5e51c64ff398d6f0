use std::collections::BTreeMap;

use ddrec::asymptotics::compare_with_rows;
use ddrec::distribution::{normality, pmf, NormalityReport, PmfTable};
use ddrec::families::{self, build_exponent, recurrence_constants, validate_nonnegativity, FAMILIES};
use ddrec::oracle::{self, OracleReport};
use ddrec::speclang::{self, Parsed, SpecSource};
use ddrec::{ExactPolynomial, FamilyDescriptor, RecurrenceSpec, SaddleFunction};
use serde_json::{json, Map, Value};

use crate::output::{emit, exact, real, real_csv, Rendered};
use crate::{Command, Failure, NList, Source};

/// Rows checked against the enumeration oracle.
const ORACLE_ROWS: usize = 8;

const FAMILY_PREFIX: &str = "family: ";

/// A resolved spec source. Custom specs carry a saddle function only when
/// their closed form is available.
struct Target {
    label: String,
    spec: RecurrenceSpec,
    family: Option<FamilyDescriptor>,
    saddle: Result<SaddleFunction, ddrec::Error>,
}

impl Target {
    fn resolve(source: &Source) -> Result<Self, Failure> {
        let parsed = if let Some(text) = &source.family {
            let call = if text.contains('(') { text.clone() } else { format!("{text}()") };
            let src = SpecSource::file("--family", format!("{FAMILY_PREFIX}{call};"));
            speclang::parse(&src).map_err(|mut e| {
                // Report positions relative to the flag value.
                let shift = FAMILY_PREFIX.len().min(e.offset);
                e.offset -= shift;
                e.column = e.column.saturating_sub(shift).max(1);
                e
            })?
        } else if let Some(path) = &source.spec {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            speclang::parse(&SpecSource::file(path.display().to_string(), text))?
        } else {
            let text = source.inline.clone().unwrap_or_default();
            speclang::parse(&SpecSource::inline(text))?
        };
        Ok(match parsed {
            Parsed::Family(request) => {
                let fam = request.resolve()?;
                Self {
                    label: fam.invocation(),
                    spec: fam.spec.clone(),
                    saddle: Ok(fam.saddle.clone()),
                    family: Some(fam),
                }
            }
            Parsed::Spec(spec) => Self {
                label: speclang::format(&spec),
                saddle: build_exponent(&spec),
                spec,
                family: None,
            },
        })
    }

    fn saddle(&self) -> Result<&SaddleFunction, Failure> {
        self.saddle.as_ref().map_err(|e| Failure::from(e.clone()))
    }

    /// Descriptor for the family checks; custom specs get a bare one.
    fn descriptor(&self) -> Option<FamilyDescriptor> {
        if let Some(f) = &self.family {
            return Some(f.clone());
        }
        let saddle = self.saddle.as_ref().ok()?.clone();
        Some(FamilyDescriptor {
            name: "custom".into(),
            parameters: BTreeMap::new(),
            spec: self.spec.clone(),
            saddle,
            oeis_refs: Vec::new(),
        })
    }

    /// Theorem constant `d`.
    fn degree(&self) -> Result<usize, Failure> {
        let d = match &self.saddle {
            Ok(sf) => sf.theorem_constants().d,
            Err(_) => recurrence_constants(&self.spec)?.0,
        };
        if d == 0 {
            return Err(Failure::from(ddrec::Error::SaddleFailure(
                "theorem normalization needs d >= 1".into(),
            )));
        }
        Ok(d)
    }

    /// `P_n` for each requested `n`, zero below the start index.
    fn rows(&self, ns: &[usize]) -> Result<Vec<ExactPolynomial>, Failure> {
        let start = self.spec.start_index();
        let Some(&max_n) = ns.iter().max() else {
            return Ok(Vec::new());
        };
        let polys = self.spec.generate(max_n.max(start))?;
        Ok(ns
            .iter()
            .map(|&n| n.checked_sub(start).and_then(|i| polys.get(i)).cloned().unwrap_or_default())
            .collect())
    }
}

fn n_list(ns: &NList) -> Result<Vec<usize>, Failure> {
    if let Some(n) = ns.n {
        return Ok(vec![n]);
    }
    ns.ns
        .as_deref()
        .unwrap_or_default()
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::usage(format!("invalid n `{s}` in --ns"))))
        .collect()
}

fn string_row(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Triangle { source, max_n, out } => emit(&out, triangle(&Target::resolve(&source)?, max_n)?),
        Command::Pmf { source, ns, out } => emit(&out, pmf_tables(&Target::resolve(&source)?, &n_list(&ns)?)?),
        Command::Moments { source, ns, out } => emit(&out, moments(&Target::resolve(&source)?, &n_list(&ns)?)?),
        Command::Clt { source, ns, out } => emit(&out, clt(&Target::resolve(&source)?, &n_list(&ns)?)?),
        Command::Asymptotics { source, ns, out } => {
            emit(&out, asymptotics(&Target::resolve(&source)?, &n_list(&ns)?)?)
        }
        Command::Verify { source, max_n, out } => {
            let (rendered, failures) = verify(&Target::resolve(&source)?, max_n)?;
            emit(&out, rendered)?;
            if failures.is_empty() {
                Ok(())
            } else {
                Err(Failure {
                    code: 1,
                    kind: "verification",
                    message: format!("failed checks: {}", failures.join(", ")),
                    detail: Value::Null,
                })
            }
        }
        Command::Families { out } => emit(&out, list_families()),
    }
}

fn triangle(t: &Target, max_n: usize) -> Result<Rendered, Failure> {
    let rows = if max_n < t.spec.start_index() { Vec::new() } else { t.spec.triangle(max_n)? };
    let width = rows.iter().map(|r| r.coeffs.len()).max().unwrap_or(0);
    let mut header = vec!["n".to_string()];
    header.extend((0..width).map(|k| format!("c{k}")));
    let mut csv = vec![header];
    let mut json_rows = Vec::new();
    for row in &rows {
        let coeffs: Vec<String> = row.coeffs.iter().map(exact).collect();
        let mut line = vec![row.n.to_string()];
        line.extend(coeffs.iter().cloned());
        csv.push(line);
        json_rows.push(json!({ "n": row.n, "coeffs": coeffs }));
    }
    Ok(Rendered { json: json!({ "source": t.label, "rows": json_rows }), csv })
}

fn tables(t: &Target, ns: &[usize]) -> Result<Vec<PmfTable>, Failure> {
    let rows = t.rows(ns)?;
    Ok(ns.iter().zip(&rows).map(|(&n, p)| pmf(p, n)).collect::<Result<_, _>>()?)
}

fn pmf_tables(t: &Target, ns: &[usize]) -> Result<Rendered, Failure> {
    let mut csv = vec![string_row(&["n", "k", "prob", "prob_float"])];
    let mut out = Vec::new();
    for table in tables(t, ns)? {
        let mut probs = Map::new();
        let mut floats = Map::new();
        for (k, q) in &table.probs {
            let f = ddrec::algebra::rational_to_f64(q);
            probs.insert(k.to_string(), json!(exact(q)));
            floats.insert(k.to_string(), real(f));
            csv.push(vec![table.n.to_string(), k.to_string(), exact(q), real_csv(f)]);
        }
        out.push(json!({
            "n": table.n,
            "probs": probs,
            "probs_float": floats,
            "mean": exact(&table.mean),
            "variance": exact(&table.variance),
        }));
    }
    Ok(Rendered { json: json!({ "source": t.label, "tables": out }), csv })
}

fn moments(t: &Target, ns: &[usize]) -> Result<Rendered, Failure> {
    let to_f = ddrec::algebra::rational_to_f64;
    let mut csv = vec![string_row(&[
        "n",
        "mean",
        "variance",
        "mean_float",
        "variance_float",
        "skewness",
        "excess_kurtosis",
    ])];
    let mut out = Vec::new();
    for table in tables(t, ns)? {
        let (mean, var) = (to_f(&table.mean), to_f(&table.variance));
        csv.push(vec![
            table.n.to_string(),
            exact(&table.mean),
            exact(&table.variance),
            real_csv(mean),
            real_csv(var),
            real_csv(table.skewness),
            real_csv(table.excess_kurtosis),
        ]);
        out.push(json!({
            "n": table.n,
            "mean": exact(&table.mean),
            "variance": exact(&table.variance),
            "mean_float": real(mean),
            "variance_float": real(var),
            "skewness": real(table.skewness),
            "excess_kurtosis": real(table.excess_kurtosis),
        }));
    }
    Ok(Rendered { json: json!({ "source": t.label, "moments": out }), csv })
}

fn clt(t: &Target, ns: &[usize]) -> Result<Rendered, Failure> {
    const FIELDS: [&str; 9] = [
        "n",
        "ks_plain",
        "ks_continuity",
        "standardized_third",
        "standardized_fourth",
        "center",
        "scale",
        "ks_theorem_plain",
        "ks_theorem_continuity",
    ];
    let reports: Vec<NormalityReport> = if ns.is_empty() {
        Vec::new()
    } else {
        let d = t.degree()?;
        tables(t, ns)?.iter().map(|table| normality(table, d)).collect::<Result<_, _>>()?
    };
    let mut csv = vec![string_row(&FIELDS)];
    let mut out = Vec::new();
    for r in &reports {
        let values = [
            r.ks_plain,
            r.ks_continuity,
            r.standardized_third,
            r.standardized_fourth,
            r.center,
            r.scale,
            r.ks_theorem_plain,
            r.ks_theorem_continuity,
        ];
        let mut obj = Map::new();
        obj.insert("n".into(), json!(r.n));
        let mut line = vec![r.n.to_string()];
        for (name, v) in FIELDS[1..].iter().zip(values) {
            obj.insert(name.to_string(), real(v));
            line.push(real_csv(v));
        }
        out.push(Value::Object(obj));
        csv.push(line);
    }
    Ok(Rendered { json: json!({ "source": t.label, "reports": out }), csv })
}

fn asymptotics(t: &Target, ns: &[usize]) -> Result<Rendered, Failure> {
    const FIELDS: [&str; 17] = [
        "n",
        "rho",
        "rho_prime",
        "predicted_mean",
        "predicted_variance",
        "b_value",
        "coeff_estimate_log",
        "leading_mean",
        "leading_variance",
        "exact_mean",
        "mean_rel_error",
        "exact_variance",
        "variance_rel_error",
        "log_row_sum",
        "log_row_sum_estimate",
        "log_rel_error",
        "saddle_residual",
    ];
    let mut csv = vec![string_row(&FIELDS)];
    let mut out = Vec::new();
    if let Some(&max_n) = ns.iter().max() {
        let sf = t.saddle()?;
        let polys = t.spec.generate(max_n.max(t.spec.start_index()))?;
        for &n in ns {
            let c = compare_with_rows(sf, &t.spec, &polys, n)?;
            let s = &c.saddle;
            let residual = ddrec::asymptotics::saddle_residual(sf, s.rho, 1.0, s.n);
            let values = [
                s.rho,
                s.rho_prime,
                c.predicted_mean,
                c.predicted_variance,
                s.b_value,
                s.coeff_estimate_log,
                s.leading_mean,
                s.leading_variance,
                c.exact_mean,
                c.mean_rel_error,
                c.exact_variance,
                c.variance_rel_error,
                c.log_row_sum,
                c.log_row_sum_estimate,
                c.log_rel_error,
                residual,
            ];
            let mut obj = Map::new();
            obj.insert("n".into(), json!(n));
            let mut line = vec![n.to_string()];
            for (name, v) in FIELDS[1..].iter().zip(values) {
                obj.insert(name.to_string(), real(v));
                line.push(real_csv(v));
            }
            out.push(Value::Object(obj));
            csv.push(line);
        }
    }
    Ok(Rendered { json: json!({ "source": t.label, "comparisons": out }), csv })
}

struct Check {
    name: &'static str,
    status: &'static str,
    detail: String,
}

fn verify(t: &Target, max_n: usize) -> Result<(Rendered, Vec<&'static str>), Failure> {
    let mut checks = Vec::new();
    let desc = t.descriptor();

    checks.push(match (&desc, &t.saddle) {
        (Some(d), _) => match d.verify_egf(max_n)? {
            None => Check {
                name: "egf",
                status: "pass",
                detail: format!("series and recurrence agree for n <= {max_n}"),
            },
            Some(m) => Check {
                name: "egf",
                status: "fail",
                detail: format!(
                    "n = {}: series gives {}, recurrence gives {}",
                    m.n, m.from_series, m.from_recurrence
                ),
            },
        },
        (None, Err(e)) => Check { name: "egf", status: "skipped", detail: e.to_string() },
        (None, Ok(_)) => unreachable!("descriptor exists whenever the saddle function does"),
    });

    checks.push(match &t.family {
        Some(fam) => {
            let limit = oracle::combinatorial_model(fam).map_or(0, |m| {
                (oracle::MAX_ELEMENTS + m.row_shift).saturating_sub(m.r)
            });
            match oracle::verify_family(fam, max_n.min(ORACLE_ROWS).min(limit))? {
                OracleReport::Pass { rows_checked } => Check {
                    name: "oracle",
                    status: "pass",
                    detail: format!("{rows_checked} rows match enumeration"),
                },
                OracleReport::Mismatch { n, k, triangle, oracle } => Check {
                    name: "oracle",
                    status: "fail",
                    detail: format!("n = {n}, k = {k}: triangle {triangle}, enumeration {oracle}"),
                },
                OracleReport::Skipped(why) => Check { name: "oracle", status: "skipped", detail: why },
            }
        }
        None => Check {
            name: "oracle",
            status: "skipped",
            detail: "custom specs have no combinatorial model".into(),
        },
    });

    let rows = if max_n < t.spec.start_index() { Vec::new() } else { t.spec.triangle(max_n)? };
    let nn = validate_nonnegativity(&rows);
    checks.push(match nn.first_negative {
        None => Check {
            name: "nonnegativity",
            status: "pass",
            detail: format!("{} rows nonnegative", nn.rows_checked),
        },
        Some((n, k)) => Check {
            name: "nonnegativity",
            status: "fail",
            detail: format!("negative entry at n = {n}, k = {k}"),
        },
    });

    let failures: Vec<&'static str> =
        checks.iter().filter(|c| c.status == "fail").map(|c| c.name).collect();
    let mut csv = vec![string_row(&["check", "status", "detail"])];
    let mut out = Vec::new();
    for c in &checks {
        csv.push(string_row(&[c.name, c.status, &c.detail]));
        out.push(json!({ "check": c.name, "status": c.status, "detail": c.detail }));
    }
    let json = json!({ "source": t.label, "checks": out, "ok": failures.is_empty() });
    Ok((Rendered { json, csv }, failures))
}

fn list_families() -> Rendered {
    let mut csv = vec![string_row(&["name", "defaults", "oeis", "description"])];
    let mut out = Vec::new();
    for (info, fam) in FAMILIES.iter().zip(families::default_families()) {
        let params: Map<String, Value> =
            info.params.iter().zip(info.defaults).map(|(k, v)| (k.to_string(), json!(v))).collect();
        csv.push(vec![
            info.name.to_string(),
            fam.invocation(),
            fam.oeis_refs.join(" "),
            info.description.to_string(),
        ]);
        out.push(json!({
            "name": info.name,
            "parameters": info.params,
            "defaults": params,
            "oeis": fam.oeis_refs,
            "description": info.description,
        }));
    }
    Rendered { json: json!({ "families": out }), csv }
}
