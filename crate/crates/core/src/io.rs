//! Text file formats: edge lists, attribute tables and recruitment forests.
//!
//! * edge list: header `src,dst`, one undirected edge per row, `src < dst`
//! * attributes: header `node,<name1>,...`, one row per node, values 0/1
//! * forest: header `node,recruiter,wave,seed_id,coupon_index,degree,<attrs...>`,
//!   with `recruiter` and `coupon_index` empty for seeds

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{AttributeVector, CovariateMatrix, Graph, NodeId};
use crate::rds::{ForestEntry, RecruitmentForest};

const FOREST_FIXED: [&str; 6] = ["node", "recruiter", "wave", "seed_id", "coupon_index", "degree"];

fn at_line(record: &csv::StringRecord, message: impl std::fmt::Display) -> Error {
    let line = record.position().map_or(0, |p| p.line());
    Error::InvalidInput(format!("line {line}: {message}"))
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, index: usize, what: &str) -> Result<T> {
    let raw = record.get(index).unwrap_or("").trim();
    raw.parse()
        .map_err(|_| at_line(record, format!("invalid {what} {raw:?}")))
}

fn parse_optional<T: std::str::FromStr>(
    record: &csv::StringRecord,
    index: usize,
    what: &str,
) -> Result<Option<T>> {
    if record.get(index).unwrap_or("").trim().is_empty() {
        Ok(None)
    } else {
        parse_field(record, index, what).map(Some)
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let matches = found.len() >= expected.len()
        && expected.iter().zip(found.iter()).all(|(e, f)| *e == f);
    if !matches {
        return Err(Error::InvalidInput(format!(
            "header {:?} does not start with {:?}",
            found.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    Ok(())
}

pub fn write_edge_list<W: Write>(g: &Graph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["src", "dst"])?;
    for &(a, b) in g.edges() {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an edge list. Without `node_count`, the graph spans the largest
/// index seen.
pub fn read_edge_list<R: Read>(input: R, node_count: Option<usize>) -> Result<Graph> {
    let mut r = reader(input);
    check_header(r.headers()?, &["src", "dst"])?;
    let mut edges = Vec::new();
    for record in r.records() {
        let record = record?;
        let a: NodeId = parse_field(&record, 0, "src")?;
        let b: NodeId = parse_field(&record, 1, "dst")?;
        if a >= b {
            return Err(at_line(&record, format!("expected src < dst, got {a},{b}")));
        }
        edges.push((a, b));
    }
    let n = node_count.unwrap_or_else(|| edges.iter().map(|&(_, b)| b + 1).max().unwrap_or(0));
    Graph::from_edges(n, edges)
}

pub fn write_attributes<W: Write>(columns: &[AttributeVector], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node".to_owned()];
    header.extend(columns.iter().map(|c| c.name().to_owned()));
    w.write_record(&header)?;
    let rows = columns.first().map_or(0, AttributeVector::len);
    for node in 0..rows {
        let mut row = vec![node.to_string()];
        row.extend(columns.iter().map(|c| c.get(node).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an attribute table; every node `0..rows` must appear exactly once.
pub fn read_attributes<R: Read>(input: R) -> Result<CovariateMatrix> {
    let mut r = reader(input);
    let header = r.headers()?.clone();
    check_header(&header, &["node"])?;
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if names.is_empty() {
        return Err(Error::InvalidInput("attribute file has no attribute columns".into()));
    }
    let mut rows: Vec<(NodeId, Vec<u8>)> = Vec::new();
    for record in r.records() {
        let record = record?;
        let node: NodeId = parse_field(&record, 0, "node")?;
        let mut values = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let v: u8 = parse_field(&record, i + 1, name)?;
            if v > 1 {
                return Err(at_line(&record, format!("{name} value {v} is not 0 or 1")));
            }
            values.push(v);
        }
        rows.push((node, values));
    }
    rows.sort_by_key(|(node, _)| *node);
    for (expected, (node, _)) in rows.iter().enumerate() {
        if *node != expected {
            return Err(Error::InvalidInput(format!(
                "attribute rows must cover nodes 0..{} exactly once (found {node} at position {expected})",
                rows.len()
            )));
        }
    }
    let columns = names
        .iter()
        .enumerate()
        .map(|(i, name)| AttributeVector::new(name.clone(), rows.iter().map(|(_, v)| v[i]).collect()))
        .collect::<Result<Vec<_>>>()?;
    CovariateMatrix::new(columns)
}

pub fn write_forest<W: Write>(f: &RecruitmentForest, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FOREST_FIXED.iter().map(|s| s.to_string()).collect();
    header.extend(f.attribute_names.iter().cloned());
    w.write_record(&header)?;
    for e in &f.entries {
        let mut row = vec![
            e.node.to_string(),
            e.recruiter.map(|r| r.to_string()).unwrap_or_default(),
            e.wave.to_string(),
            e.seed_id.to_string(),
            e.coupon_index.map(|c| c.to_string()).unwrap_or_default(),
            e.reported_degree.to_string(),
        ];
        row.extend(e.attributes.iter().map(u8::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_forest<R: Read>(input: R) -> Result<RecruitmentForest> {
    let mut r = reader(input);
    let header = r.headers()?.clone();
    check_header(&header, &FOREST_FIXED)?;
    let attribute_names: Vec<String> = header.iter().skip(FOREST_FIXED.len()).map(str::to_owned).collect();
    let mut entries = Vec::new();
    for record in r.records() {
        let record = record?;
        let mut attributes = Vec::with_capacity(attribute_names.len());
        for (i, name) in attribute_names.iter().enumerate() {
            let v: u8 = parse_field(&record, FOREST_FIXED.len() + i, name)?;
            if v > 1 {
                return Err(at_line(&record, format!("{name} value {v} is not 0 or 1")));
            }
            attributes.push(v);
        }
        entries.push(ForestEntry {
            node: parse_field(&record, 0, "node")?,
            recruiter: parse_optional(&record, 1, "recruiter")?,
            wave: parse_field(&record, 2, "wave")?,
            seed_id: parse_field(&record, 3, "seed_id")?,
            coupon_index: parse_optional(&record, 4, "coupon_index")?,
            reported_degree: parse_field(&record, 5, "degree")?,
            attributes,
        });
    }
    let forest = RecruitmentForest {
        attribute_names,
        entries,
        truncated: false,
        reseeds: 0,
    };
    forest.check_invariants(None, usize::MAX)?;
    Ok(forest)
}

fn with_path<T>(path: &Path, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Io(_) | Error::Parse { .. } => e,
        other => Error::Parse {
            path: path.to_owned(),
            message: other.to_string(),
        },
    })
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<()> {
    write_edge_list(g, BufWriter::new(File::create(path)?))
}

pub fn load_edge_list(path: &Path, node_count: Option<usize>) -> Result<Graph> {
    with_path(path, read_edge_list(BufReader::new(File::open(path)?), node_count))
}

pub fn save_attributes(columns: &[AttributeVector], path: &Path) -> Result<()> {
    write_attributes(columns, BufWriter::new(File::create(path)?))
}

pub fn load_attributes(path: &Path) -> Result<CovariateMatrix> {
    with_path(path, read_attributes(BufReader::new(File::open(path)?)))
}

pub fn save_forest(f: &RecruitmentForest, path: &Path) -> Result<()> {
    write_forest(f, BufWriter::new(File::create(path)?))
}

pub fn load_forest(path: &Path) -> Result<RecruitmentForest> {
    with_path(path, read_forest(BufReader::new(File::open(path)?)))
}
