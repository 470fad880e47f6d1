//! TOML config for the atomic constants.
//!
//! ```toml
//! [cesium]
//! delta_hz = 1.1e9
//! gamma_hz = 1.24e8
//! f_cs = 0.58
//! alpha_se_cm3_per_s = 6.5e-10
//! nuclear_spin = 3.5
//! p_squared = 0.125
//! ```
//!
//! Frequencies are given in Hz and converted to rad/s on load. Missing keys
//! fall back to the defaults in [`crate::params`].

use std::f64::consts::PI;

use serde::Deserialize;
use toml::Spanned;

use crate::params::CesiumParams;
use crate::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    cesium: CesiumSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CesiumSection {
    delta_hz: Option<Spanned<f64>>,
    gamma_hz: Option<Spanned<f64>>,
    f_cs: Option<Spanned<f64>>,
    alpha_se_cm3_per_s: Option<Spanned<f64>>,
    nuclear_spin: Option<Spanned<f64>>,
    p_squared: Option<Spanned<f64>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses the `[cesium]` section of a config document.
pub fn parse_params(text: &str) -> Result<CesiumParams> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let sec = file.cesium;
    let mut params = CesiumParams::default();

    let check = |key: &str, v: &Spanned<f64>, ok: bool, want: &str| -> Result<f64> {
        let x = *v.get_ref();
        if ok && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Config(format!(
                "line {}: `{key}` = {x} is invalid ({want})",
                line_of(text, v.span().start)
            )))
        }
    };

    if let Some(v) = &sec.delta_hz {
        params.delta = check("delta_hz", v, *v.get_ref() > 0.0, "must be > 0")? * 2.0 * PI;
    }
    if let Some(v) = &sec.gamma_hz {
        params.gamma = check("gamma_hz", v, *v.get_ref() > 0.0, "must be > 0")? * 2.0 * PI;
    }
    if let Some(v) = &sec.f_cs {
        params.f_cs = check("f_cs", v, *v.get_ref() >= 0.0, "must be >= 0")?;
    }
    if let Some(v) = &sec.alpha_se_cm3_per_s {
        params.alpha_se = check("alpha_se_cm3_per_s", v, *v.get_ref() > 0.0, "must be > 0")?;
    }
    if let Some(v) = &sec.nuclear_spin {
        let x = *v.get_ref();
        params.nuclear_spin = check(
            "nuclear_spin",
            v,
            x >= 1.0 && (2.0 * x).fract() == 0.0,
            "must be a half-integer >= 1",
        )?;
    }
    if let Some(v) = &sec.p_squared {
        let x = *v.get_ref();
        let p2 = check("p_squared", v, x > 0.0 && x < 1.0, "must lie in (0, 1)")?;
        params = params.with_p_squared(p2)?;
    }
    params.validate()?;
    Ok(params)
}

/// Writes params back out in the config format. Floats use Rust's shortest
/// round-trip representation.
pub fn to_config_string(params: &CesiumParams) -> String {
    format!(
        "[cesium]\ndelta_hz = {:?}\ngamma_hz = {:?}\nf_cs = {:?}\nalpha_se_cm3_per_s = {:?}\nnuclear_spin = {:?}\np_squared = {:?}\n",
        params.delta / (2.0 * PI),
        params.gamma / (2.0 * PI),
        params.f_cs,
        params.alpha_se,
        params.nuclear_spin,
        params.p_coeff * params.p_coeff,
    )
}
