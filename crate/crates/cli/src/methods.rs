//! Method-descriptor micro-grammar: `lrt`, `wlrt:<t*>`, `mwlrt:<t*>`,
//! `landmark:<t*>`, and grids as `<family>:<start>:<stop>:<step>`.

use wlrt_core::MethodSpec;

use crate::CliError;

fn build(family: &str, t_star: f64, descriptor: &str) -> Result<MethodSpec, CliError> {
    if !t_star.is_finite() || t_star < 0.0 {
        return Err(CliError::Validation(format!(
            "`{descriptor}`: t* must be finite and >= 0"
        )));
    }
    match family {
        "wlrt" => Ok(MethodSpec::Wlrt { t_star }),
        "mwlrt" => Ok(MethodSpec::Mwlrt { t_star }),
        "landmark" => Ok(MethodSpec::Landmark { t_star }),
        other => Err(CliError::Validation(format!(
            "unknown method family `{other}` in `{descriptor}`"
        ))),
    }
}

fn parse_f64(field: &str, descriptor: &str) -> Result<f64, CliError> {
    field.parse().map_err(|_| {
        CliError::Validation(format!("`{descriptor}`: `{field}` is not a number"))
    })
}

/// Parse a single-method descriptor (no grids).
pub fn parse_method(descriptor: &str) -> Result<MethodSpec, CliError> {
    let descriptor = descriptor.trim();
    let parts: Vec<&str> = descriptor.split(':').collect();
    match parts.as_slice() {
        ["lrt"] => Ok(MethodSpec::Lrt),
        [family] => Err(CliError::Validation(format!(
            "method `{family}` needs a t* (e.g. `{family}:6` or `--tstar 6`)"
        ))),
        ["lrt", ..] => Err(CliError::Validation(
            "`lrt` takes no t*".to_string(),
        )),
        [family, t] => build(family, parse_f64(t, descriptor)?, descriptor),
        _ => Err(CliError::Validation(format!(
            "`{descriptor}`: grids are only valid in `power --methods`"
        ))),
    }
}

/// Parse a single method given either the colon form (`mwlrt:18`) or a
/// bare family plus a separate `--tstar` flag.
pub fn resolve_method(descriptor: &str, tstar: Option<f64>) -> Result<MethodSpec, CliError> {
    match tstar {
        None => parse_method(descriptor),
        Some(t) => {
            let descriptor = descriptor.trim();
            if descriptor.contains(':') {
                return Err(CliError::Validation(format!(
                    "`{descriptor}` already carries a t*; drop `--tstar`"
                )));
            }
            if descriptor == "lrt" {
                return Err(CliError::Validation("`lrt` takes no t*".to_string()));
            }
            build(descriptor, t, descriptor)
        }
    }
}

/// Parse a comma-separated method list, expanding grid descriptors.
pub fn parse_method_grid(list: &str) -> Result<Vec<MethodSpec>, CliError> {
    let mut methods = Vec::new();
    for descriptor in list.split(',') {
        let descriptor = descriptor.trim();
        let parts: Vec<&str> = descriptor.split(':').collect();
        match parts.as_slice() {
            [family, start, stop, step] => {
                let start = parse_f64(start, descriptor)?;
                let stop = parse_f64(stop, descriptor)?;
                let step = parse_f64(step, descriptor)?;
                if !step.is_finite() || step <= 0.0 {
                    return Err(CliError::Validation(format!(
                        "`{descriptor}`: grid step must be > 0"
                    )));
                }
                if stop < start {
                    return Err(CliError::Validation(format!(
                        "`{descriptor}`: grid stop lies before start"
                    )));
                }
                let mut t = start;
                while t <= stop + 1e-9 {
                    methods.push(build(family, t, descriptor)?);
                    t += step;
                }
            }
            _ => methods.push(parse_method(descriptor)?),
        }
    }
    if methods.is_empty() {
        return Err(CliError::Validation("empty method list".to_string()));
    }
    Ok(methods)
}
