use std::fmt::Write as _;

/// Formats `v` with 12 significant digits, trailing zeros removed.
pub fn sig12(v: f64) -> String {
    significant(v, 12)
}

/// Formats `v` with `digits` significant digits, trailing zeros removed.
pub fn significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.*e}", digits - 1);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&e) {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        format!("{}e{e}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Clone, Debug)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl Value {
    fn human(&self) -> String {
        match self {
            Value::Num(v) => sig12(*v),
            Value::Int(v) => v.to_string(),
            Value::Text(t) => t.clone(),
            Value::Flag(b) => b.to_string(),
        }
    }

    fn machine(&self) -> String {
        match self {
            Value::Num(v) => significant(*v, 16),
            other => other.human(),
        }
    }
}

/// One line per entry: `label: value` for people, `key = value` for tools.
#[derive(Default)]
pub struct Report {
    lines: Vec<(String, String, Value)>,
}

impl Report {
    pub fn push(&mut self, key: &str, label: &str, value: Value) -> &mut Self {
        self.lines.push((key.into(), label.into(), value));
        self
    }

    pub fn num(&mut self, key: &str, label: &str, v: f64) -> &mut Self {
        self.push(key, label, Value::Num(v))
    }

    pub fn int(&mut self, key: &str, label: &str, v: i64) -> &mut Self {
        self.push(key, label, Value::Int(v))
    }

    pub fn text(&mut self, key: &str, label: &str, v: impl Into<String>) -> &mut Self {
        self.push(key, label, Value::Text(v.into()))
    }

    pub fn flag(&mut self, key: &str, label: &str, v: bool) -> &mut Self {
        self.push(key, label, Value::Flag(v))
    }

    pub fn render(&self, machine: bool) -> String {
        let mut out = String::new();
        for (key, label, value) in &self.lines {
            if machine {
                let _ = writeln!(out, "{key} = {}", value.machine());
            } else {
                let _ = writeln!(out, "{label}: {}", value.human());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(5.656854249492381), "5.65685424949");
        assert_eq!(sig12(4.0), "4");
        assert_eq!(sig12(-std::f64::consts::FRAC_PI_4), "-0.785398163397");
        assert_eq!(sig12(1.5e-9), "1.5e-9");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(significant(4.000000000000001, 16), "4.000000000000001");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
    }

    #[test]
    fn machine_uses_sixteen_digits() {
        let mut r = Report::default();
        r.num("sv_abs", "|Sv|", 5.6568542494923815)
            .flag("ok", "ok", true);
        assert_eq!(r.render(true), "sv_abs = 5.656854249492381\nok = true\n");
        assert_eq!(r.render(false), "|Sv|: 5.65685424949\nok: true\n");
    }
}
