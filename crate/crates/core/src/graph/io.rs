use super::WeightedGraph;
use crate::error::{Error, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

/// Reads the `i j w` edge-list format. The node count is one past the
/// largest endpoint unless `n` is given.
pub fn read_graph(path: impl AsRef<Path>, n: Option<usize>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(path, lineno + 1, format!("expected `i j w`, got {:?}", raw)));
        }
        let i: usize = fields[0].parse().map_err(|_| parse_err(path, lineno + 1, "bad node index"))?;
        let j: usize = fields[1].parse().map_err(|_| parse_err(path, lineno + 1, "bad node index"))?;
        let w: f64 = fields[2].parse().map_err(|_| parse_err(path, lineno + 1, "bad weight"))?;
        if i >= j {
            return Err(parse_err(path, lineno + 1, "edges must satisfy i < j"));
        }
        max_node = max_node.max(j);
        edges.push((i, j, w));
    }
    let n = n.unwrap_or(if edges.is_empty() { 0 } else { max_node + 1 });
    WeightedGraph::new(n, edges)
}

pub fn write_graph(path: impl AsRef<Path>, g: &WeightedGraph) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# nodes {}", g.node_count())?;
    for e in g.edges() {
        writeln!(out, "{} {} {:e}", e.i, e.j, e.w)?;
    }
    out.flush()?;
    Ok(())
}

/// Headerless CSV of feature rows.
pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(path, lineno + 1, e.to_string()))?;
        if let Some(first) = rows.first().map(Vec::len) {
            if first != row.len() {
                return Err(parse_err(path, lineno + 1, format!("expected {first} columns, got {}", row.len())));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// The `# nodes N` header written by [`write_graph`], if present.
pub fn declared_node_count(path: &Path) -> Result<Option<usize>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .take_while(|l| l.trim_start().starts_with('#') || l.trim().is_empty())
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("nodes").and_then(|s| s.trim().parse().ok())))
}
