//! File formats: edge lists, coordinates, covariates, event logs and priors.
//!
//! Node labels are strings at the file boundary and dense indices inside.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder, NodeId, Point};
use crate::mcmc::{Prior, PriorSpec};
use crate::si::{CovariateSet, EventLog, InfectionEvent};

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

/// Records with their 1-based line numbers; blank and `#` lines are skipped.
fn records(path: &Path, text: &str) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(trimmed.as_bytes());
        let mut rec = csv::StringRecord::new();
        rdr.read_record(&mut rec).map_err(|e| parse_err(path, line, e.to_string()))?;
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_f64(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| parse_err(path, line, format!("bad {what} {field:?}")))
}

/// Parses `source,target[,weight]` lines into a graph.
///
/// A line holding a single label declares a node, which keeps isolated
/// nodes and node order intact across a write/read round trip.
/// Duplicates keep the last weight; self-loops are dropped with a warning.
pub fn parse_edge_list(path: &Path, text: &str) -> Result<Graph> {
    let mut b = GraphBuilder::new();
    for (line, rec) in records(path, text)? {
        if rec.len() == 1 && !rec[0].is_empty() {
            b.node(&rec[0]);
            continue;
        }
        if !(2..=3).contains(&rec.len()) {
            return Err(parse_err(path, line, format!("expected 2 or 3 fields, found {}", rec.len())));
        }
        let (s, t) = (&rec[0], &rec[1]);
        if s.is_empty() || t.is_empty() {
            return Err(parse_err(path, line, "empty node label"));
        }
        let w = match rec.get(2) {
            Some(f) => parse_f64(path, line, f, "weight")?,
            None => 1.0,
        };
        if s == t {
            log::warn!("{}:{line}: self-loop on {s:?} skipped", path.display());
            b.node(s);
            continue;
        }
        b.add_labeled_edge(s, t, w).map_err(|e| parse_err(path, line, e.to_string()))?;
    }
    Ok(b.build())
}

pub fn ingest_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    parse_edge_list(path, &read_text(path)?)
}

/// True when reading the edges back would assign every node its current index.
fn edges_preserve_order(g: &Graph) -> bool {
    let mut next = 0;
    let mut seen = vec![false; g.node_count()];
    for &(u, v) in g.edges() {
        for x in [u, v] {
            if !seen[x] {
                if x != next {
                    return false;
                }
                seen[x] = true;
                next += 1;
            }
        }
    }
    next == g.node_count()
}

/// Writes an edge list; weights are emitted only when some weight differs from 1.
///
/// Node declarations precede the edges when needed to reproduce isolated
/// nodes or the node order.
pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let weighted = (0..g.edge_count()).any(|e| g.edge_weight(e) != 1.0);
    let declare = !edges_preserve_order(g);
    write_atomic(path, |w| {
        if declare {
            for label in g.labels() {
                writeln!(w, "{label}")?;
            }
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if weighted {
                writeln!(w, "{},{},{}", g.label(u), g.label(v), g.edge_weight(e))?;
            } else {
                writeln!(w, "{},{}", g.label(u), g.label(v))?;
            }
        }
        Ok(())
    })
}

fn keyed_rows<'a>(
    path: &Path,
    g: &Graph,
    rows: &'a [(u64, csv::StringRecord)],
) -> Result<Vec<Option<&'a (u64, csv::StringRecord)>>> {
    let index = g.label_index();
    let mut by_node = vec![None; g.node_count()];
    for row in rows {
        let (line, rec) = row;
        let label = &rec[0];
        let Some(&u) = index.get(label) else {
            log::warn!("{}:{line}: label {label:?} not in graph, ignored", path.display());
            continue;
        };
        if by_node[u].replace(row).is_some() {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
    }
    Ok(by_node)
}

/// Attaches `label,x,y` coordinates to every node of `g`.
pub fn ingest_coordinates(path: impl AsRef<Path>, g: Graph) -> Result<Graph> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let rows = records(path, &text)?;
    for (line, rec) in &rows {
        if rec.len() != 3 {
            return Err(parse_err(path, *line, format!("expected label,x,y, found {} fields", rec.len())));
        }
    }
    let by_node = keyed_rows(path, &g, &rows)?;
    let mut pts = Vec::with_capacity(g.node_count());
    for (u, rec) in by_node.iter().enumerate() {
        let (line, rec) = rec.ok_or_else(|| Error::MissingCoordinates(g.label(u).to_string()))?;
        let line = *line;
        pts.push(Point::new(parse_f64(path, line, &rec[1], "x")?, parse_f64(path, line, &rec[2], "y")?));
    }
    g.with_coords(pts)
}

pub fn write_coordinates(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let coords = g.coords().ok_or_else(|| crate::error::invalid("graph has no coordinates"))?;
    write_atomic(path, |w| {
        for (u, p) in coords.iter().enumerate() {
            writeln!(w, "{},{},{}", g.label(u), p.x, p.y)?;
        }
        Ok(())
    })
}

/// Reads per-node transmissibility covariates from `node_label,c1,c2,...`
/// with a header row. Every node must appear.
pub fn ingest_covariates(path: impl AsRef<Path>, g: &Graph) -> Result<CovariateSet> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut rows = records(path, &text)?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, "missing header"));
    }
    let width = rows.remove(0).1.len();
    for (line, rec) in &rows {
        if rec.len() != width {
            return Err(parse_err(path, *line, format!("expected {width} fields, found {}", rec.len())));
        }
    }
    let by_node = keyed_rows(path, g, &rows)?;
    let mut cov = CovariateSet::empty(g.node_count());
    for (u, rec) in by_node.iter().enumerate() {
        let (line, rec) = rec.ok_or_else(|| Error::UnknownLabel(g.label(u).to_string()))?;
        let line = *line;
        cov.transmissibility[u] =
            rec.iter().skip(1).map(|f| parse_f64(path, line, f, "covariate")).collect::<Result<_>>()?;
    }
    Ok(cov)
}

pub fn write_covariates(g: &Graph, cov: &CovariateSet, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "node_label,deg_c,btw_c,clust")?;
        for u in 0..g.node_count() {
            let vals: Vec<String> = cov.transmissibility[u].iter().map(f64::to_string).collect();
            writeln!(w, "{},{}", g.label(u), vals.join(","))?;
        }
        Ok(())
    })
}

/// Reads one edge covariate from `source,target,value`; edges not listed get 0.
pub fn ingest_edge_covariate(path: impl AsRef<Path>, g: &Graph) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let index = g.label_index();
    let mut values = vec![0.0; g.edge_count()];
    for (line, rec) in records(path, &text)? {
        if rec.len() != 3 {
            return Err(parse_err(path, line, format!("expected source,target,value, found {} fields", rec.len())));
        }
        let Ok(value) = rec[2].parse::<f64>() else {
            if line == 1 {
                continue; // header
            }
            return Err(parse_err(path, line, format!("bad value {:?}", &rec[2])));
        };
        let lookup = |l: &str| index.get(l).copied().ok_or_else(|| Error::UnknownLabel(l.to_string()));
        let (u, v) = (lookup(&rec[0])?, lookup(&rec[1])?);
        let e = g
            .edge_id(u, v)
            .ok_or_else(|| parse_err(path, line, format!("{:?}-{:?} is not an edge", &rec[0], &rec[1])))?;
        values[e] = value;
    }
    Ok(values)
}

/// Parses an event log: `# initial:` and `# horizon:` header lines, then `time,node_label` rows.
///
/// Exact ties are separated by adding `1e-9 * rank` to later events.
pub fn parse_event_log(path: &Path, text: &str, g: &Graph) -> Result<EventLog> {
    let index = g.label_index();
    let lookup = |l: &str| index.get(l).copied().ok_or_else(|| Error::UnknownLabel(l.to_string()));
    let mut initial: Vec<NodeId> = Vec::new();
    let mut horizon = None;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('#') else { continue };
        let rest = rest.trim();
        if let Some(list) = rest.strip_prefix("initial:") {
            for l in list.split([',', ' ', '\t']).filter(|s| !s.is_empty()) {
                initial.push(lookup(l)?);
            }
        } else if let Some(h) = rest.strip_prefix("horizon:") {
            horizon = Some(parse_f64(path, i as u64 + 1, h.trim(), "horizon")?);
        }
    }
    let mut events = Vec::new();
    for (line, rec) in records(path, text)? {
        if rec.len() != 2 {
            return Err(parse_err(path, line, format!("expected time,node_label, found {} fields", rec.len())));
        }
        let Ok(time) = rec[0].parse::<f64>() else {
            if events.is_empty() && &rec[0] == "time" {
                continue;
            }
            return Err(parse_err(path, line, format!("bad time {:?}", &rec[0])));
        };
        events.push(InfectionEvent { time, node: lookup(&rec[1])? });
    }
    if events.windows(2).any(|w| w[1].time < w[0].time) {
        return Err(Error::InvalidEventLog("event times must be sorted ascending".into()));
    }
    let orig: Vec<f64> = events.iter().map(|e| e.time).collect();
    let mut rank = 0;
    for i in 1..events.len() {
        if orig[i] == orig[i - 1] {
            rank += 1;
            log::warn!("{}: tied event time {}, perturbed", path.display(), orig[i]);
            events[i].time = orig[i] + 1e-9 * rank as f64;
        } else {
            rank = 0;
        }
    }
    let last = events.last().map_or(0.0, |e| e.time);
    let log = EventLog { initial, events, horizon: horizon.unwrap_or(last) };
    log.validate(g.node_count())?;
    Ok(log)
}

pub fn ingest_event_log(path: impl AsRef<Path>, g: &Graph) -> Result<EventLog> {
    let path = path.as_ref();
    parse_event_log(path, &read_text(path)?, g)
}

pub fn write_event_log(g: &Graph, log: &EventLog, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, |w| {
        let init: Vec<&str> = log.initial.iter().map(|&u| g.label(u)).collect();
        writeln!(w, "# initial: {}", init.join(","))?;
        writeln!(w, "# horizon: {}", log.horizon)?;
        writeln!(w, "time,node_label")?;
        for ev in &log.events {
            writeln!(w, "{},{}", ev.time, g.label(ev.node))?;
        }
        Ok(())
    })
}

/// Parses a prior file with one `name = family(args)` per line, e.g.
/// `alpha = uniform(0, 1)`, `zeta = exponential(1e-4)`, `phi1 = fixed(1)`.
pub fn parse_priors(path: &Path, text: &str) -> Result<PriorSpec> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| parse_err(path, line_no, m.to_string());
        let (name, rhs) = line.split_once('=').ok_or_else(|| err("expected name = family(args)"))?;
        let rhs = rhs.trim();
        let open = rhs.find('(').ok_or_else(|| err("missing '('"))?;
        let body = rhs[open + 1..].strip_suffix(')').ok_or_else(|| err("missing ')'"))?;
        let args: Vec<f64> = body
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| err(&format!("bad number {a:?}"))))
            .collect::<Result<_>>()?;
        let prior = match (rhs[..open].trim().to_ascii_lowercase().as_str(), args.as_slice()) {
            ("uniform", &[lo, hi]) => Prior::Uniform { lo, hi },
            ("exponential" | "exp", &[rate]) => Prior::Exponential { rate },
            ("fixed", &[v]) => Prior::Fixed(v),
            (f, _) => return Err(err(&format!("unknown prior {f:?} or wrong argument count"))),
        };
        prior.validate().map_err(|e| err(&e.to_string()))?;
        entries.push((name.trim().to_string(), prior));
    }
    PriorSpec::new(entries)
}

pub fn ingest_priors(path: impl AsRef<Path>) -> Result<PriorSpec> {
    let path = path.as_ref();
    parse_priors(path, &read_text(path)?)
}

/// Writes through a temporary file in the target directory and renames on
/// success, so a failed write never leaves a partial file behind.
pub fn write_atomic(path: impl AsRef<Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Label → index map owned by the caller.
pub fn label_map(g: &Graph) -> HashMap<String, NodeId> {
    g.labels().iter().enumerate().map(|(i, l)| (l.clone(), i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PathBuf {
        PathBuf::from("test.csv")
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_nodes_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        for g in [
            Graph::from_edges(5, [(0, 3), (1, 2)]).unwrap(),
            Graph::path(4),
            crate::generators::erdos_renyi(30, 0.1, 7).unwrap(),
        ] {
            write_edge_list(&g, &path).unwrap();
            assert_eq!(ingest_edge_list(&path).unwrap(), g);
        }
        write_edge_list(&Graph::path(3), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "0,1\n1,2\n");
    }

    #[test]
    fn edge_list_examples() {
        let g = parse_edge_list(&p(), "a,b\nb,c\n").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
        let w = parse_edge_list(&p(), "# comment\na,b,5.0\n\n").unwrap();
        assert_eq!(w.weight(0, 1), Some(5.0));
        let dup = parse_edge_list(&p(), "a,b,1\nb,a,3\n").unwrap();
        assert_eq!((dup.edge_count(), dup.weight(0, 1)), (1, Some(3.0)));
        let looped = parse_edge_list(&p(), "a,a\na,b\n").unwrap();
        assert_eq!(looped.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse_edge_list(&p(), "a,b\nb,c,x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_edge_list(&p(), "a,b\n# c\nb,c,1,2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn event_log_ties_are_perturbed() {
        let g = Graph::complete(4);
        let text = "# initial: 0\n# horizon: 5\ntime,node_label\n1.0,1\n1.0,2\n1.0,3\n";
        let log = parse_event_log(&p(), text, &g).unwrap();
        assert_eq!(log.initial, vec![0]);
        assert_eq!(log.horizon, 5.0);
        let t: Vec<f64> = log.events.iter().map(|e| e.time).collect();
        assert!(t[0] < t[1] && t[1] < t[2]);
        assert_eq!(t[2], 1.0 + 2e-9);
    }

    #[test]
    fn priors_file() {
        let spec = parse_priors(&p(), "# priors\nzeta = exponential(1e-4)\nalpha = uniform(0, 1) # scale\nphi1 = fixed(1)\n")
            .unwrap();
        assert_eq!(spec.names, vec!["zeta", "alpha", "phi1"]);
        assert_eq!(spec.priors[1], Prior::Uniform { lo: 0.0, hi: 1.0 });
        assert!(parse_priors(&p(), "a = uniform(1, 0)\n").is_err());
        assert!(parse_priors(&p(), "a = gamma(1, 2)\n").is_err());
    }
}
