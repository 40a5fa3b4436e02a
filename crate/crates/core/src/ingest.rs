//! Documents in and out: system specs (JSON), measurement counts (CSV),
//! analysis reports and witness couplings (JSON).
//!
//! Emitted JSON is canonical: object keys sorted, no insignificant
//! whitespace, every rational as a `"p/q"` string.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    delta_of_coupling, variable_names, AnalysisReport, Branch, BunchStats, ConnectionVector,
    CouplingPMF, SystemSpec, MAX_COUPLING_VARS,
};
use crate::rational::{parse_rational, to_decimal_string, to_fraction_string, Rational};

/// Largest `n` a spec document may declare.
pub const MAX_DOCUMENT_N: usize = 4096;

/// Significant digits of the human-readable decimal renderings.
pub const DECIMAL_DIGITS: usize = 12;

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::schema(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn as_object<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::schema(loc, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, loc: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(loc, format!("missing field {key:?}")))
}

fn reject_unknown(obj: &Map<String, Value>, known: &[&str], loc: &str) -> Result<()> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::schema(loc, format!("unknown field {k:?}"))),
        None => Ok(()),
    }
}

fn rational_field(obj: &Map<String, Value>, key: &str, loc: &str) -> Result<Rational> {
    let loc = format!("{loc}.{key}");
    rational_value(field(obj, key, &loc)?, &loc)
}

fn rational_value(v: &Value, loc: &str) -> Result<Rational> {
    let s = v.as_str().ok_or_else(|| {
        Error::schema(
            loc,
            "expected a decimal or \"p/q\" string, not a JSON number",
        )
    })?;
    parse_rational(s).map_err(|e| Error::schema(loc, e.to_string()))
}

fn usize_field(obj: &Map<String, Value>, key: &str, loc: &str) -> Result<usize> {
    let loc = format!("{loc}.{key}");
    field(obj, key, &loc)?
        .as_u64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::schema(&loc, "expected a non-negative integer"))
}

fn frac_str(r: &Rational) -> Value {
    Value::String(to_fraction_string(r))
}

fn dec_str(r: &Rational) -> Value {
    Value::String(to_decimal_string(r, DECIMAL_DIGITS))
}

/// Reads a spec document without checking the pair bounds.
///
/// Schema: `{"n": int, "bunches": [{"context": i, "v_mean": s,
/// "w_next_mean": s, "product_mean": s}, ...]}` with 1-based contexts in any
/// order, each exactly once.
pub fn parse_spec_document(text: &str) -> Result<SystemSpec> {
    let doc = parse_json(text)?;
    let root = as_object(&doc, "$")?;
    reject_unknown(root, &["n", "bunches"], "$")?;
    let n = usize_field(root, "n", "$")?;
    if !(2..=MAX_DOCUMENT_N).contains(&n) {
        return Err(Error::schema(
            "$.n",
            format!("n must lie in 2..={MAX_DOCUMENT_N}, got {n}"),
        ));
    }
    let list = field(root, "bunches", "$")?
        .as_array()
        .ok_or_else(|| Error::schema("$.bunches", "expected an array"))?;
    if list.len() != n {
        return Err(Error::schema(
            "$.bunches",
            format!("expected {n} bunches, found {}", list.len()),
        ));
    }
    let mut slots: Vec<Option<BunchStats>> = vec![None; n];
    for (pos, item) in list.iter().enumerate() {
        let loc = format!("$.bunches[{pos}]");
        let obj = as_object(item, &loc)?;
        reject_unknown(
            obj,
            &["context", "v_mean", "w_next_mean", "product_mean"],
            &loc,
        )?;
        let context = usize_field(obj, "context", &loc)?;
        if !(1..=n).contains(&context) {
            return Err(Error::schema(
                format!("{loc}.context"),
                format!("context {context} outside 1..={n}"),
            ));
        }
        let bunch = BunchStats::new(
            rational_field(obj, "v_mean", &loc)?,
            rational_field(obj, "w_next_mean", &loc)?,
            rational_field(obj, "product_mean", &loc)?,
        );
        let slot = &mut slots[context - 1];
        if slot.is_some() {
            return Err(Error::schema(
                format!("{loc}.context"),
                format!("context {context} appears twice"),
            ));
        }
        *slot = Some(bunch);
    }
    // n entries, each context at most once: every slot is filled
    SystemSpec::new(
        slots
            .into_iter()
            .map(|b| b.expect("all contexts present"))
            .collect(),
    )
}

/// [`parse_spec_document`] followed by validation; bound violations come back
/// as [`Error::InvalidSystem`].
pub fn parse_spec(text: &str) -> Result<SystemSpec> {
    let spec = parse_spec_document(text)?;
    spec.ensure_valid()?;
    Ok(spec)
}

pub fn spec_value(spec: &SystemSpec) -> Value {
    let bunches: Vec<Value> = spec
        .bunches()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            json!({
                "context": i + 1,
                "v_mean": frac_str(&b.v_mean),
                "w_next_mean": frac_str(&b.w_next_mean),
                "product_mean": frac_str(&b.product_mean),
            })
        })
        .collect();
    json!({ "n": spec.n(), "bunches": bunches })
}

pub fn emit_spec(spec: &SystemSpec) -> String {
    spec_value(spec).to_string()
}

/// One row of a counts table: how often context `context` produced the
/// outcome pair `(v_outcome, w_outcome)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountsRecord {
    /// 1-based.
    pub context: usize,
    pub v_outcome: i8,
    pub w_outcome: i8,
    pub count: u64,
}

const COUNTS_HEADER: [&str; 4] = ["context", "v_outcome", "w_outcome", "count"];

fn parse_outcome(s: &str, loc: &str) -> Result<i8> {
    match s.trim() {
        "1" | "+1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        other => Err(Error::schema(
            loc,
            format!("outcome must be +1 or -1, got {other:?}"),
        )),
    }
}

/// Parses a comma-delimited counts table with the header
/// `context,v_outcome,w_outcome,count`.
pub fn parse_counts(text: &str) -> Result<Vec<CountsRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::schema("line 1", e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != COUNTS_HEADER {
        return Err(Error::schema(
            "line 1",
            format!("header must be {:?}", COUNTS_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::schema(format!("line {line}"), e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let loc = format!("line {line}");
        let context = row[0]
            .parse::<usize>()
            .map_err(|_| Error::schema(&loc, format!("bad context {:?}", &row[0])))?;
        let count = row[3]
            .parse::<u64>()
            .map_err(|_| Error::schema(&loc, format!("bad count {:?}", &row[3])))?;
        out.push(CountsRecord {
            context,
            v_outcome: parse_outcome(&row[1], &loc)?,
            w_outcome: parse_outcome(&row[2], &loc)?,
            count,
        });
    }
    Ok(out)
}

/// Exact relative-frequency expectations per context. Repeated cells add up.
pub fn counts_to_spec(records: &[CountsRecord], n: usize) -> Result<SystemSpec> {
    if !(2..=MAX_DOCUMENT_N).contains(&n) {
        return Err(Error::schema(
            "n",
            format!("n must lie in 2..={MAX_DOCUMENT_N}, got {n}"),
        ));
    }
    // per context: counts indexed by (v is -1, w is -1)
    let mut tables: BTreeMap<usize, [u128; 4]> = BTreeMap::new();
    for r in records {
        if !(1..=n).contains(&r.context) {
            return Err(Error::schema(
                format!("context {}", r.context),
                format!("context outside 1..={n}"),
            ));
        }
        let cell = usize::from(r.v_outcome < 0) | (usize::from(r.w_outcome < 0) << 1);
        tables.entry(r.context).or_insert([0; 4])[cell] += u128::from(r.count);
    }
    let mut bunches = Vec::with_capacity(n);
    for context in 1..=n {
        let t = tables
            .get(&context)
            .ok_or_else(|| Error::schema(format!("context {context}"), "missing"))?;
        let total: u128 = t.iter().sum();
        if total == 0 {
            return Err(Error::schema(
                format!("context {context}"),
                "zero total count",
            ));
        }
        let signed = |f: &dyn Fn(usize) -> bool| -> Rational {
            let s: i128 = (0..4)
                .map(|cell| {
                    if f(cell) {
                        t[cell] as i128
                    } else {
                        -(t[cell] as i128)
                    }
                })
                .sum();
            Rational::new(s.into(), (total as i128).into())
        };
        bunches.push(BunchStats::new(
            signed(&|c| c & 1 == 0),
            signed(&|c| c & 2 == 0),
            signed(&|c| (c & 1) == ((c >> 1) & 1)),
        ));
    }
    SystemSpec::new(bunches)
}

/// Largest context index in a counts table, used as `n` when none is given.
pub fn counts_n(records: &[CountsRecord]) -> Option<usize> {
    records.iter().map(|r| r.context).max()
}

pub fn report_value(report: &AnalysisReport) -> Value {
    let conns: Vec<Value> = report
        .optimal_connections
        .values
        .iter()
        .map(frac_str)
        .collect();
    let conns_dec: Vec<Value> = report
        .optimal_connections
        .values
        .iter()
        .map(dec_str)
        .collect();
    json!({
        "n": report.n,
        "delta0": frac_str(&report.delta0),
        "delta_min": frac_str(&report.delta_min),
        "cntx": frac_str(&report.cntx),
        "contextual": report.contextual,
        "s1_bunches": frac_str(&report.s1_bunches),
        "main_criterion_lhs": frac_str(&report.main_criterion_lhs),
        "argmax_branch": report.argmax_branch.as_str(),
        "canonical_signs": report.canonical_signs,
        "optimal_connections": conns,
        "decimal": {
            "delta0": dec_str(&report.delta0),
            "delta_min": dec_str(&report.delta_min),
            "cntx": dec_str(&report.cntx),
            "s1_bunches": dec_str(&report.s1_bunches),
            "main_criterion_lhs": dec_str(&report.main_criterion_lhs),
            "optimal_connections": conns_dec,
        },
    })
}

pub fn emit_report(report: &AnalysisReport) -> String {
    report_value(report).to_string()
}

/// Reads a report document. The `decimal` block is informational and
/// ignored.
pub fn parse_report(text: &str) -> Result<AnalysisReport> {
    let doc = parse_json(text)?;
    let root = as_object(&doc, "$")?;
    reject_unknown(
        root,
        &[
            "n",
            "delta0",
            "delta_min",
            "cntx",
            "contextual",
            "s1_bunches",
            "main_criterion_lhs",
            "argmax_branch",
            "canonical_signs",
            "optimal_connections",
            "decimal",
        ],
        "$",
    )?;
    let n = usize_field(root, "n", "$")?;
    let contextual = field(root, "contextual", "$")?
        .as_bool()
        .ok_or_else(|| Error::schema("$.contextual", "expected a boolean"))?;
    let branch_name = field(root, "argmax_branch", "$")?
        .as_str()
        .ok_or_else(|| Error::schema("$.argmax_branch", "expected a string"))?;
    let argmax_branch = Branch::from_name(branch_name).ok_or_else(|| {
        Error::schema("$.argmax_branch", format!("unknown branch {branch_name:?}"))
    })?;
    let canonical_signs = field(root, "canonical_signs", "$")?
        .as_array()
        .ok_or_else(|| Error::schema("$.canonical_signs", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| match v.as_i64() {
            Some(1) => Ok(1),
            Some(-1) => Ok(-1),
            _ => Err(Error::schema(
                format!("$.canonical_signs[{i}]"),
                "expected 1 or -1",
            )),
        })
        .collect::<Result<Vec<i8>>>()?;
    let optimal_connections = field(root, "optimal_connections", "$")?
        .as_array()
        .ok_or_else(|| Error::schema("$.optimal_connections", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| rational_value(v, &format!("$.optimal_connections[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if canonical_signs.len() != n || optimal_connections.len() != n {
        return Err(Error::schema(
            "$",
            format!("per-property arrays must have length n = {n}"),
        ));
    }
    Ok(AnalysisReport {
        n,
        delta0: rational_field(root, "delta0", "$")?,
        delta_min: rational_field(root, "delta_min", "$")?,
        cntx: rational_field(root, "cntx", "$")?,
        contextual,
        s1_bunches: rational_field(root, "s1_bunches", "$")?,
        main_criterion_lhs: rational_field(root, "main_criterion_lhs", "$")?,
        argmax_branch,
        canonical_signs,
        optimal_connections: ConnectionVector::new(optimal_connections),
    })
}

fn assignment(atom: u64, num_vars: usize) -> String {
    (0..num_vars)
        .map(|p| if (atom >> p) & 1 == 0 { '+' } else { '-' })
        .collect()
}

fn parse_assignment(s: &str, num_vars: usize, loc: &str) -> Result<u64> {
    if s.len() != num_vars {
        return Err(Error::schema(
            loc,
            format!("assignment needs {num_vars} signs"),
        ));
    }
    s.bytes().enumerate().try_fold(0u64, |acc, (p, b)| match b {
        b'+' => Ok(acc),
        b'-' => Ok(acc | (1 << p)),
        _ => Err(Error::schema(
            loc,
            "assignment characters must be '+' or '-'",
        )),
    })
}

/// Witness document. Atom keys spell the variable values in order (`+` for
/// +1, `-` for -1); zero-probability atoms are left out. Whole-system
/// couplings also carry `n`, `delta` and the achieved connection vector.
pub fn witness_value(pmf: &CouplingPMF) -> Map<String, Value> {
    let k = pmf.num_vars();
    let atoms: Map<String, Value> = pmf
        .atoms()
        .map(|(a, p)| (assignment(a, k), frac_str(p)))
        .collect();
    let mut doc = Map::new();
    doc.insert("num_vars".into(), json!(k));
    doc.insert("atoms".into(), Value::Object(atoms));
    match pmf.system_n() {
        Some(n) => {
            doc.insert("variables".into(), json!(variable_names(n)));
            doc.insert("n".into(), json!(n));
            let delta = delta_of_coupling(pmf).expect("system coupling");
            doc.insert("delta".into(), frac_str(&delta));
            let conns = pmf.connections().expect("system coupling");
            doc.insert(
                "connections".into(),
                Value::Array(conns.values.iter().map(frac_str).collect()),
            );
        }
        None => {
            let names: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
            doc.insert("variables".into(), json!(names));
        }
    }
    doc
}

pub fn emit_witness(pmf: &CouplingPMF) -> String {
    Value::Object(witness_value(pmf)).to_string()
}

/// Reads the pmf back from a witness document; derived fields are ignored.
pub fn parse_witness(text: &str) -> Result<CouplingPMF> {
    let doc = parse_json(text)?;
    let root = as_object(&doc, "$")?;
    let k = usize_field(root, "num_vars", "$")?;
    if !(1..=MAX_COUPLING_VARS).contains(&k) {
        return Err(Error::schema(
            "$.num_vars",
            format!("must lie in 1..={MAX_COUPLING_VARS}"),
        ));
    }
    let atoms = field(root, "atoms", "$")?
        .as_object()
        .ok_or_else(|| Error::schema("$.atoms", "expected an object"))?;
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(atoms.len());
    for (key, v) in atoms {
        let loc = format!("$.atoms.{key}");
        let atom = parse_assignment(key, k, &loc)?;
        seen.insert(atom);
        entries.push((atom, rational_value(v, &loc)?));
    }
    CouplingPMF::new(k, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    const PR_BOX: &str = r#"{"n": 4, "bunches": [
        {"context": 1, "v_mean": "0", "w_next_mean": "0", "product_mean": "1"},
        {"context": 2, "v_mean": "0", "w_next_mean": "0", "product_mean": "1"},
        {"context": 3, "v_mean": "0", "w_next_mean": "0", "product_mean": "1"},
        {"context": 4, "v_mean": "0", "w_next_mean": "0", "product_mean": "-1"}]}"#;

    #[test]
    fn parses_pr_box() {
        let spec = parse_spec(PR_BOX).unwrap();
        assert_eq!(spec.n(), 4);
        assert_eq!(spec.products(), vec![int(1), int(1), int(1), int(-1)]);
    }

    #[test]
    fn bound_violation_is_reported() {
        let doc = r#"{"n": 2, "bunches": [
            {"context": 2, "v_mean": "0", "w_next_mean": "0", "product_mean": "0"},
            {"context": 1, "v_mean": "0.5", "w_next_mean": "-0.5", "product_mean": "0.5"}]}"#;
        match parse_spec(doc) {
            Err(Error::InvalidSystem(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].context, 0);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_locations() {
        let cases = [
            (r#"{"n": 1, "bunches": []}"#, "$.n"),
            (r#"{"n": 2}"#, "$"),
            (
                r#"{"n": 2, "bunches": [{"context": 1, "v_mean": "0", "w_next_mean": "0", "product_mean": "0"}, {"context": 1, "v_mean": "0", "w_next_mean": "0", "product_mean": "0"}]}"#,
                "$.bunches[1].context",
            ),
            (
                r#"{"n": 2, "bunches": [{"context": 1, "v_mean": 0.5, "w_next_mean": "0", "product_mean": "0"}, {"context": 2, "v_mean": "0", "w_next_mean": "0", "product_mean": "0"}]}"#,
                "$.bunches[0].v_mean",
            ),
            ("{\"n\": 2,\n \"bunches\": [", "line 2"),
        ];
        for (doc, loc) in cases {
            match parse_spec_document(doc) {
                Err(Error::Schema { location, .. }) => {
                    assert!(location.starts_with(loc), "{location} vs {loc}")
                }
                other => panic!("expected schema error for {doc}, got {other:?}"),
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec = parse_spec(PR_BOX).unwrap();
        let text = emit_spec(&spec);
        assert!(!text.contains(' '));
        assert_eq!(parse_spec(&text).unwrap(), spec);
        assert_eq!(emit_spec(&parse_spec(&text).unwrap()), text);
    }

    #[test]
    fn counts_examples() {
        let text = "context,v_outcome,w_outcome,count\n1,+1,+1,50\n1,-1,-1,50\n2,1,1,25\n2,1,-1,25\n2,-1,1,25\n2,-1,-1,25\n";
        let records = parse_counts(text).unwrap();
        let spec = counts_to_spec(&records, 2).unwrap();
        assert_eq!(spec.bunch(0), &BunchStats::new(int(0), int(0), int(1)));
        assert_eq!(spec.bunch(1), &BunchStats::new(int(0), int(0), int(0)));
    }

    #[test]
    fn counts_errors() {
        assert!(parse_counts("ctx,v,w,c\n1,1,1,1\n").is_err());
        assert!(parse_counts("context,v_outcome,w_outcome,count\n1,2,1,1\n").is_err());
        assert!(parse_counts("context,v_outcome,w_outcome,count\n1,1,1,-3\n").is_err());
        let r = parse_counts("context,v_outcome,w_outcome,count\n1,1,1,3\n").unwrap();
        assert!(counts_to_spec(&r, 2).is_err());
        let r = parse_counts("context,v_outcome,w_outcome,count\n1,1,1,3\n2,1,1,0\n").unwrap();
        assert!(counts_to_spec(&r, 2).is_err());
    }

    #[test]
    fn witness_round_trip_drops_zero_atoms() {
        let pmf =
            CouplingPMF::new(4, [(0, frac(1, 2)), (0b1111, frac(1, 2)), (3, int(0))]).unwrap();
        let text = emit_witness(&pmf);
        assert!(
            text.contains(r#""atoms":{"++++":"1/2","----":"1/2"}"#),
            "{text}"
        );
        assert!(text.contains(r#""delta":"0/1""#));
        assert_eq!(parse_witness(&text).unwrap(), pmf);
    }
}
