use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

fn read_pairs(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
            _ => None,
        };
        match parsed {
            Some(pair) => out.push(pair),
            // A non-numeric first line is a header.
            None if out.is_empty() && lineno == 0 => continue,
            None => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: lineno + 1,
                    msg: format!("expected two nonnegative integers, got {raw:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// `node_id,class_id` lines.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    read_pairs(path.as_ref())
}

/// `class_id,superclass_id` lines, returned as a dense class → superclass map.
pub fn read_superclasses_csv(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let pairs = read_pairs(path)?;
    let k = pairs.iter().map(|p| p.0 + 1).max().unwrap_or(0);
    let mut map = vec![usize::MAX; k];
    for (c, s) in pairs {
        map[c] = s;
    }
    if let Some(c) = map.iter().position(|&s| s == usize::MAX) {
        return Err(Error::Parse { path: path.display().to_string(), line: 0, msg: format!("class {c} has no superclass") });
    }
    Ok(map)
}
