//! Operator specifications: `forward`, `backward`, `central`, `quantum`,
//! `rs(r,s)` and `gamma(g_-N,...,g_N)`, with complex numbers written `re+imi`.

use qcv_core::boxop::Stencil;
use qcv_core::C64;

use crate::error::{CliError, Result};

/// Parses `1.5`, `-2i`, `0.5-0.5i`, `i`, `-i`, `1e-3+2e-1i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::usage(format!("invalid complex number '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that does not follow an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Builds the stencil named by `spec` with step `eps`.
pub fn parse_operator(spec: &str, eps: f64) -> Result<Stencil> {
    let spec = spec.trim();
    let args = |prefix: &str| -> Option<Vec<&str>> {
        let inner = spec.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
        Some(inner.split(',').collect())
    };
    let op = match spec {
        "forward" | "box10" => Stencil::forward(eps),
        "backward" | "box01" => Stencil::backward(eps),
        "central" => Stencil::central(eps),
        "quantum" | "boxq" => Stencil::quantum(eps),
        _ => {
            if let Some(a) = args("rs") {
                if a.len() != 2 {
                    return Err(CliError::usage(format!("rs() takes two arguments in '{spec}'")));
                }
                Stencil::box_rs(parse_complex(a[0])?, parse_complex(a[1])?, eps)
            } else if let Some(a) = args("gamma") {
                let gamma = a.iter().map(|x| parse_complex(x)).collect::<Result<Vec<_>>>()?;
                Stencil::new(gamma, eps)
            } else {
                return Err(CliError::usage(format!("unknown operator '{spec}'")));
            }
        }
    };
    op.map_err(|e| CliError::usage(format!("operator '{spec}': {e}")))
}

/// Splits `a;b;c` into trimmed, nonempty operator specs.
pub fn split_operators(list: &str) -> Vec<String> {
    list.split(';').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5-0.5i").unwrap(), C64::new(0.5, -0.5));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("2").unwrap(), C64::new(2.0, 0.0));
        assert_eq!(parse_complex("1e-3+2E-1i").unwrap(), C64::new(1e-3, 0.2));
        assert_eq!(parse_complex("-1e+2i").unwrap(), C64::new(0.0, -100.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("x").is_err());
        for z in [C64::new(0.5, -0.5), C64::new(-1.0, 0.25), C64::new(3.0, 0.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn operators() {
        let q = parse_operator("rs(0.5-0.5i, 0.5+0.5i)", 0.1).unwrap();
        assert_eq!(q, Stencil::quantum(0.1).unwrap());
        let c = parse_operator("gamma(-0.5,0,0.5)", 0.1).unwrap();
        assert_eq!(c, Stencil::central(0.1).unwrap());
        assert!(parse_operator("gamma(1,2)", 0.1).is_err());
        assert!(parse_operator("leapfrog", 0.1).is_err());
        assert_eq!(split_operators(" forward; ;quantum"), vec!["forward", "quantum"]);
    }
}
