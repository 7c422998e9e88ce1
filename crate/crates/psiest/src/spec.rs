//! Estimator descriptors on the command line.
//!
//! Accepted forms:
//!   normal(sigma=1.5)
//!   alpha-density
//!   sign
//!   quasi-arith(f="sqrt(x)")                       optional theta=(a,b), x-domain=(c,d)
//!   expr(psi="(x - t)/2.25", theta=(-inf,inf), x-domain=(-inf,inf))
//!   kappa | max | mid-range
//!
//! Bounds accept `inf` and `-inf`. Quoted values carry no escapes; an
//! expression never needs a `"` of its own.

use psi_estimator::expr::Expr;
use psi_estimator::{Estimator, Interval, ParameterDomain, Psi, ReferenceEstimator};

pub fn parse_estimator(input: &str) -> Result<Estimator, String> {
    let spec = input.trim();
    let (head, args) = match spec.find('(') {
        Some(open) => {
            if !spec.ends_with(')') {
                return Err(format!("`{spec}`: missing closing `)`"));
            }
            (spec[..open].trim(), Some(&spec[open + 1..spec.len() - 1]))
        }
        None => (spec, None),
    };

    match (head, args) {
        ("alpha-density", None) => Ok(Estimator::Psi(Psi::alpha_density())),
        ("sign", None) => Ok(Estimator::Psi(Psi::sign_location())),
        ("kappa", None) => Ok(Estimator::Reference(ReferenceEstimator::kappa())),
        ("max", None) => Ok(Estimator::Reference(ReferenceEstimator::max())),
        ("mid-range", None) => Ok(Estimator::Reference(ReferenceEstimator::mid_range())),
        ("normal", Some(args)) => {
            let fields = parse_fields(args, &["sigma"])?;
            let sigma = require_number(&fields, "sigma")?;
            Psi::normal_location(sigma)
                .map(Estimator::Psi)
                .map_err(|e| e.to_string())
        }
        ("quasi-arith", Some(args)) => {
            let fields = parse_fields(args, &["f", "theta", "x-domain"])?;
            let body = require_quoted(&fields, "f")?;
            let generator =
                Expr::parse(&body).map_err(|e| format!("in generator `{body}`: {e}"))?;
            let theta = match optional_pair(&fields, "theta")? {
                Some((a, b)) => domain(a, b)?,
                None => ParameterDomain::positive_half_line(),
            };
            let x_domain = match optional_pair(&fields, "x-domain")? {
                Some((c, d)) => open_interval(c, d)?,
                None => open_interval(0.0, f64::INFINITY)?,
            };
            Psi::quasi_arithmetic(generator, theta, x_domain)
                .map(Estimator::Psi)
                .map_err(|e| e.to_string())
        }
        ("expr", Some(args)) => {
            let fields = parse_fields(args, &["psi", "theta", "x-domain"])?;
            let body = require_quoted(&fields, "psi")?;
            let parsed = Expr::parse(&body).map_err(|e| format!("in psi `{body}`: {e}"))?;
            let (a, b) = require_pair(&fields, "theta")?;
            let (c, d) = require_pair(&fields, "x-domain")?;
            Psi::user_expression(parsed, domain(a, b)?, open_interval(c, d)?)
                .map(Estimator::Psi)
                .map_err(|e| e.to_string())
        }
        ("normal" | "quasi-arith" | "expr", None) => {
            Err(format!("`{head}` needs arguments, e.g. `{}`", usage(head)))
        }
        (_, Some(_))
            if matches!(
                head,
                "alpha-density" | "sign" | "kappa" | "max" | "mid-range"
            ) =>
        {
            Err(format!("`{head}` takes no arguments"))
        }
        _ => Err(format!(
            "unknown estimator `{head}`; expected one of normal(sigma=...), alpha-density, \
             sign, quasi-arith(f=\"...\"), expr(psi=\"...\", theta=(a,b), x-domain=(c,d)), \
             kappa, max, mid-range"
        )),
    }
}

fn usage(head: &str) -> &'static str {
    match head {
        "normal" => "normal(sigma=1)",
        "quasi-arith" => "quasi-arith(f=\"sqrt(x)\")",
        _ => "expr(psi=\"(x - t)/4\", theta=(-inf,inf), x-domain=(-inf,inf))",
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FieldValue {
    Number(f64),
    Quoted(String),
    Pair(f64, f64),
}

type Fields = Vec<(String, FieldValue)>;

/// Splits `key=value, key=value` at top level (commas inside quotes or
/// parentheses belong to the value) and rejects unknown or repeated keys.
fn parse_fields(args: &str, allowed: &[&str]) -> Result<Fields, String> {
    let mut fields = Fields::new();
    for part in split_top_level(args)? {
        let part = part.trim();
        if part.is_empty() {
            return Err("empty argument".into());
        }
        let eq = part
            .find('=')
            .ok_or_else(|| format!("`{part}`: expected key=value"))?;
        let key = part[..eq].trim();
        if !allowed.contains(&key) {
            return Err(format!(
                "unknown key `{key}`; allowed here: {}",
                allowed.join(", ")
            ));
        }
        if fields.iter().any(|(k, _)| k == key) {
            return Err(format!("key `{key}` given twice"));
        }
        let value = parse_value(part[eq + 1..].trim())?;
        fields.push((key.to_owned(), value));
    }
    Ok(fields)
}

fn split_top_level(args: &str) -> Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let bytes = args.as_bytes();
    let mut depth = 0usize;
    let mut in_quote = false;
    let mut start = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'"' => in_quote = !in_quote,
            b'(' if !in_quote => depth += 1,
            b')' if !in_quote => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| format!("`{args}`: unbalanced `)`"))?;
            }
            b',' if !in_quote && depth == 0 => {
                parts.push(&args[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if in_quote {
        return Err(format!("`{args}`: unterminated quote"));
    }
    if depth != 0 {
        return Err(format!("`{args}`: unbalanced `(`"));
    }
    parts.push(&args[start..]);
    Ok(parts)
}

fn parse_value(text: &str) -> Result<FieldValue, String> {
    if let Some(inner) = text.strip_prefix('"') {
        let inner = inner
            .strip_suffix('"')
            .ok_or_else(|| format!("`{text}`: unterminated quote"))?;
        if inner.contains('"') {
            return Err(format!("`{text}`: stray quote inside a quoted value"));
        }
        return Ok(FieldValue::Quoted(inner.to_owned()));
    }
    if let Some(inner) = text.strip_prefix('(') {
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| format!("`{text}`: unterminated `(`"))?;
        let nums: Vec<&str> = inner.split(',').collect();
        if nums.len() != 2 {
            return Err(format!("`{text}`: expected a pair (a, b)"));
        }
        return Ok(FieldValue::Pair(
            parse_number(nums[0].trim())?,
            parse_number(nums[1].trim())?,
        ));
    }
    Ok(FieldValue::Number(parse_number(text)?))
}

fn parse_number(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .parse()
        .map_err(|_| format!("`{text}`: not a number"))?;
    if v.is_nan() {
        return Err(format!("`{text}`: NaN is not a valid bound"));
    }
    Ok(v)
}

fn lookup<'a>(fields: &'a Fields, key: &str) -> Option<&'a FieldValue> {
    fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn require_number(fields: &Fields, key: &str) -> Result<f64, String> {
    match lookup(fields, key) {
        Some(FieldValue::Number(v)) => Ok(*v),
        Some(_) => Err(format!("`{key}` must be a number")),
        None => Err(format!("missing `{key}=...`")),
    }
}

fn require_quoted(fields: &Fields, key: &str) -> Result<String, String> {
    match lookup(fields, key) {
        Some(FieldValue::Quoted(s)) => Ok(s.clone()),
        Some(_) => Err(format!("`{key}` must be a quoted expression")),
        None => Err(format!("missing `{key}=\"...\"`")),
    }
}

fn require_pair(fields: &Fields, key: &str) -> Result<(f64, f64), String> {
    match lookup(fields, key) {
        Some(FieldValue::Pair(a, b)) => Ok((*a, *b)),
        Some(_) => Err(format!("`{key}` must be a pair (a, b)")),
        None => Err(format!("missing `{key}=(a, b)`")),
    }
}

fn optional_pair(fields: &Fields, key: &str) -> Result<Option<(f64, f64)>, String> {
    match lookup(fields, key) {
        Some(FieldValue::Pair(a, b)) => Ok(Some((*a, *b))),
        Some(_) => Err(format!("`{key}` must be a pair (a, b)")),
        None => Ok(None),
    }
}

fn domain(a: f64, b: f64) -> Result<ParameterDomain, String> {
    ParameterDomain::new(a, b).map_err(|e| e.to_string())
}

fn open_interval(c: f64, d: f64) -> Result<Interval, String> {
    Interval::open(c, d).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_family() {
        for spec in [
            "normal(sigma=1.5)",
            "alpha-density",
            "sign",
            "quasi-arith(f=\"sqrt(x)\")",
            "quasi-arith(f=\"ln(x)\", theta=(0, inf), x-domain=(0, inf))",
            "expr(psi=\"(x - t)/4\", theta=(-inf, inf), x-domain=(-inf, inf))",
            "kappa",
            "max",
            "mid-range",
        ] {
            parse_estimator(spec).unwrap_or_else(|e| panic!("{spec}: {e}"));
        }
    }

    #[test]
    fn labels_round_trip_through_the_parser() {
        let est = parse_estimator("normal(sigma=2.5)").unwrap();
        assert_eq!(parse_estimator(&est.label()).unwrap(), est);
    }

    #[test]
    fn commas_inside_quotes_do_not_split_fields() {
        let est =
            parse_estimator("expr(psi=\"min(x, t) - t\", theta=(-inf, inf), x-domain=(-inf, inf))");
        assert!(est.is_ok(), "{est:?}");
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in [
            "normal",
            "normal(sigma=abc)",
            "normal(sigma=1, sigma=2)",
            "normal(rho=1)",
            "gamma(k=2)",
            "sign(x=1)",
            "quasi-arith(f=\"sqrt(x)\"",
            "expr(psi=\"x - t\")",
            "expr(psi=\"x - t\", theta=(1), x-domain=(0,1))",
            "quasi-arith(f=\"oops(\")",
        ] {
            assert!(parse_estimator(bad).is_err(), "`{bad}` should be rejected");
        }
    }
}
