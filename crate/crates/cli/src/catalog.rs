//! Built-in example configurations.

use serde_json::{json, Value};

pub const NAMES: [&str; 3] = ["exp-xy", "free", "radial-demo"];

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "exp-xy" => "u = x^2 + y^2, f0 = exp(x*y), rho = x*y on [0.1, 1.1]^2",
        "free" => "u = 0, f0 = 1, rho = x on [-1, 1]^2",
        "radial-demo" => "u = 1 + 1/r, f0 = exp(r), rho = r on [0.5, 1.5]^2",
        _ => return None,
    })
}

fn unit_circle() -> Value {
    json!({"kind": "param", "x": "cos(2*pi*t)", "y": "sin(2*pi*t)"})
}

pub fn get(name: &str) -> Option<Value> {
    let v = match name {
        "exp-xy" => json!({
            "name": "exp-xy",
            "problem": {
                "u": "x^2 + y^2",
                "f0": "exp(x*y)",
                "domain": {"x": [0.1, 1.1], "y": [0.1, 1.1]}
            },
            "rho": {"rho": "x*y", "s": "0", "S": "0", "f0_of_rho": "exp(rho)"},
            "curves": {
                "unit-circle": unit_circle(),
                "box": {"kind": "polyline", "points": [[0.1, 0.1], [1.1, 0.1], [1.1, 1.1], [0.1, 1.1], [0.1, 0.1]]}
            },
            "solutions": {
                "exp-minus-xy": "exp(-x*y)",
                "from-F_I": "(y^2 - x^2 + 2)*exp(x*y)",
                "from-G_I": "exp(-x*y) + exp(x*y)"
            },
            "pipeline": {"anchor": [0.0, 0.0], "C": 1.0, "C1": -2.0, "C2": 1.0, "steps": 3}
        }),
        "free" => json!({
            "name": "free",
            "problem": {
                "u": "0",
                "f0": "1",
                "domain": {"x": [-1.0, 1.0], "y": [-1.0, 1.0]}
            },
            "rho": {"rho": "x", "s": "0", "S": "0", "f0_of_rho": "1"},
            "curves": {"unit-circle": unit_circle()},
            "solutions": {"xy": "x*y", "exp-cos": "exp(x)*cos(y)"},
            "pipeline": {"C1": -4.0, "C2": 3.0, "steps": 2}
        }),
        "radial-demo" => json!({
            "name": "radial-demo",
            "problem": {
                "u": "1 + 1/sqrt(x^2 + y^2)",
                "f0": "exp(sqrt(x^2 + y^2))",
                "domain": {"x": [0.5, 1.5], "y": [0.5, 1.5]}
            },
            "rho": {"rho": "sqrt(x^2 + y^2)", "s": "1/rho", "S": "ln(rho)", "f0_of_rho": "exp(rho)"},
            "curves": {"circle": {"kind": "param", "x": "1 + 0.4*cos(2*pi*t)", "y": "1 + 0.4*sin(2*pi*t)"}},
            "pipeline": {"steps": 1}
        }),
        _ => return None,
    };
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn catalog_entries_are_valid_configs() {
        for name in NAMES {
            let text = get(name).unwrap().to_string();
            let cfg = RunConfig::from_json(&text, name).unwrap();
            assert_eq!(cfg.name.as_deref(), Some(name));
            assert!(cfg.rho.is_some());
            assert!(describe(name).is_some());
        }
        assert!(get("nope").is_none());
    }
}
