//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export takes `.cmx` text. The `*_text` functions hold the logic and
//! are plain Rust so they can be tested natively.

use conceptforge_core::{compile, parse_model, validate_model, Target};
use wasm_bindgen::prelude::*;

pub fn render_text(cmx: &str) -> Result<String, String> {
    compile_text(cmx, "svg")
}

/// One diagnostic per line; empty when the model is valid.
pub fn validate_text(cmx: &str) -> Result<String, String> {
    let m = parse_model(cmx).map_err(|e| format!("parse error at {e}"))?;
    Ok(validate_model(&m).iter().map(|d| format!("{d}\n")).collect())
}

pub fn compile_text(cmx: &str, target: &str) -> Result<String, String> {
    let target: Target = target.parse()?;
    let m = parse_model(cmx).map_err(|e| format!("parse error at {e}"))?;
    compile(&m, target).map_err(|e| match e {
        conceptforge_core::CompileError::Invalid(ref d) => {
            let lines: Vec<String> = d.iter().map(ToString::to_string).collect();
            format!("{e}\n{}", lines.join("\n"))
        }
        other => other.to_string(),
    })
}

#[wasm_bindgen(js_name = renderSvg)]
pub fn render_svg(cmx: &str) -> Result<String, JsError> {
    render_text(cmx).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn validate(cmx: &str) -> Result<String, JsError> {
    validate_text(cmx).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = compileModel)]
pub fn compile_model(cmx: &str, target: &str) -> Result<String, JsError> {
    compile_text(cmx, target).map_err(|e| JsError::new(&e))
}
