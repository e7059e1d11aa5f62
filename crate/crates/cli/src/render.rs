use serde_json::Value;

pub fn json(report: &Value) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn inline(v: &Value) -> Option<String> {
    if let Some(s) = scalar(v) {
        return Some(s);
    }
    match v {
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        _ => None,
    }
}

/// Rows of objects whose fields all print inline, with shared keys.
fn as_rows(items: &[Value]) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let first = items.first()?.as_object()?;
    let keys: Vec<String> = first.keys().cloned().collect();
    let mut rows = Vec::new();
    for item in items {
        let obj = item.as_object()?;
        if obj.len() != keys.len() {
            return None;
        }
        rows.push(
            keys.iter()
                .map(|k| obj.get(k).and_then(inline))
                .collect::<Option<Vec<_>>>()?,
        );
    }
    Some((keys, rows))
}

fn grid(out: &mut Vec<String>, indent: &str, keys: &[String], rows: &[Vec<String>]) {
    let widths: Vec<usize> = (0..keys.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([keys[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("{indent}{}", padded.join("  ").trim_end())
    };
    out.push(line(keys));
    for r in rows {
        out.push(line(r));
    }
}

fn walk(out: &mut Vec<String>, indent: &str, key: &str, v: &Value) {
    if let Some(s) = inline(v) {
        out.push(format!("{indent}{key}: {s}"));
        return;
    }
    out.push(format!("{indent}{key}:"));
    let deeper = format!("{indent}  ");
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                walk(out, &deeper, k, x);
            }
        }
        Value::Array(items) => {
            if let Some((keys, rows)) = as_rows(items) {
                grid(out, &deeper, &keys, &rows);
            } else {
                for (i, x) in items.iter().enumerate() {
                    walk(out, &deeper, &format!("[{i}]"), x);
                }
            }
        }
        _ => unreachable!("scalars print inline"),
    }
}

pub fn table(report: &Value) -> String {
    let mut out = Vec::new();
    match report {
        Value::Object(map) => {
            for (k, v) in map {
                walk(&mut out, "", k, v);
            }
        }
        other => walk(&mut out, "", "report", other),
    }
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rows_become_columns() {
        let r = json!({"rows": [{"n": 1, "d": "3/4"}, {"n": 10, "d": "2047/1048576"}]});
        let t = table(&r);
        assert!(t.contains("  n   d\n"), "{t}");
        assert!(t.contains("  10  2047/1048576"), "{t}");
    }

    #[test]
    fn nested_objects_indent() {
        let t = table(&json!({"a": {"b": [1, 2]}, "c": true}));
        assert_eq!(t, "a:\n  b: [1, 2]\nc: true");
    }
}
