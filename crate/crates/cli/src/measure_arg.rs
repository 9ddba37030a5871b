//! Measure arguments: a JSON descriptor file, a built-in name such as
//! `quartercircle(4)`, or `sqrt(..)`, `square(..)`, `dilate(λ, ..)` applied
//! to either.

use std::path::Path;

use freefisher::measures::MeasureDescriptor;
use freefisher::{CompactMeasure, Error, Result};

pub fn parse_measure(spec: &str) -> Result<CompactMeasure> {
    let spec = spec.trim();
    if let Some(inner) = call(spec, "sqrt") {
        return parse_measure(inner)?.symmetric_square_root();
    }
    if let Some(inner) = call(spec, "square") {
        return parse_measure(inner)?.push_square();
    }
    if let Some(args) = call(spec, "dilate") {
        let (lambda, inner) =
            args.split_once(',').ok_or_else(|| Error::Input(format!("`{spec}`: expected dilate(λ, measure)")))?;
        let lambda: f64 =
            lambda.trim().parse().map_err(|_| Error::Input(format!("bad dilation factor `{}`", lambda.trim())))?;
        return parse_measure(inner)?.dilate(lambda);
    }
    if spec.ends_with(".json") || Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| Error::Input(format!("cannot read `{spec}`: {e}")))?;
        let label = Path::new(spec).file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_string();
        return Ok(MeasureDescriptor::from_json(&text)?.with_label(label));
    }
    CompactMeasure::from_name(spec)
}

fn call<'a>(spec: &'a str, name: &str) -> Option<&'a str> {
    spec.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}
