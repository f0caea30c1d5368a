//! Line-oriented topology file format.
//!
//! ```text
//! # comment
//! nodes 3
//! gain pl:2          # pl:<alpha> | exp:<gamma> | const
//! power 10
//! noise 1
//! pos 1 0.0          # id x [y]
//! pos 2 1.0
//! pos 3 2.5
//! hop1 2 1 3         # optional: node id followed by its 1-hop neighbors
//! ```
//!
//! Instead of `pos` rows a file may give `dist i j d` rows; each unordered
//! pair must be covered, and a single row fills both directions. Ids are
//! 1-based. Power and noise are network-wide: a per-node override such as
//! `power 2 5.0` is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{GainFunction, NodeSet, Point, Topology, TopologyError};

fn err(line: usize, reason: impl Into<String>) -> TopologyError {
    TopologyError::Parse {
        line,
        reason: reason.into(),
    }
}

fn number(line: usize, tok: &str) -> Result<f64, TopologyError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("expected a number, got {tok:?}")))
}

fn node_id(line: usize, tok: &str, n: usize) -> Result<usize, TopologyError> {
    let id: usize = tok
        .parse()
        .map_err(|_| err(line, format!("expected a node id, got {tok:?}")))?;
    if id == 0 || id > n {
        return Err(err(line, format!("node id {id} outside 1..={n}")));
    }
    Ok(id - 1)
}

/// Parses a file that must carry its own `gain`, `power` and `noise` lines.
pub fn parse_topology(text: &str) -> Result<Topology, TopologyError> {
    parse(text, None)
}

/// Parses a file, taking gain, power and noise from `fallback` where the
/// file leaves them out.
pub fn parse_topology_with(text: &str, fallback: (GainFunction, f64, f64)) -> Result<Topology, TopologyError> {
    parse(text, Some(fallback))
}

fn parse(text: &str, fallback: Option<(GainFunction, f64, f64)>) -> Result<Topology, TopologyError> {
    let mut n: Option<usize> = None;
    let mut gain: Option<GainFunction> = None;
    let mut power: Option<f64> = None;
    let mut noise: Option<f64> = None;
    let mut positions: BTreeMap<usize, Point> = BTreeMap::new();
    let mut distances: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut hops: BTreeMap<usize, NodeSet> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let need_n = || n.ok_or_else(|| err(line, "`nodes` must come first"));
        match toks[0] {
            "nodes" => {
                if n.is_some() {
                    return Err(err(line, "duplicate `nodes` header"));
                }
                let [_, count] = toks[..] else {
                    return Err(err(line, "usage: nodes <n>"));
                };
                n = Some(count.parse().map_err(|_| err(line, "bad node count"))?);
            }
            "gain" => {
                let [_, preset] = toks[..] else {
                    return Err(err(line, "usage: gain pl:<alpha>|exp:<gamma>|const"));
                };
                gain = Some(preset.parse().map_err(|e: TopologyError| err(line, e.to_string()))?);
            }
            kw @ ("power" | "noise") => {
                let value = match toks[..] {
                    [_, v] => number(line, v)?,
                    [_, _, _] => {
                        return Err(err(
                            line,
                            format!("per-node {kw} overrides are not supported; {kw} is network-wide"),
                        ))
                    }
                    _ => return Err(err(line, format!("usage: {kw} <watts>"))),
                };
                if kw == "power" {
                    power = Some(value);
                } else {
                    noise = Some(value);
                }
            }
            "pos" => {
                let n = need_n()?;
                let (id, x, y) = match toks[..] {
                    [_, id, x] => (node_id(line, id, n)?, number(line, x)?, 0.0),
                    [_, id, x, y] => (node_id(line, id, n)?, number(line, x)?, number(line, y)?),
                    _ => return Err(err(line, "usage: pos <id> <x> [<y>]")),
                };
                if positions.insert(id, Point::new(x, y)).is_some() {
                    return Err(err(line, format!("duplicate position for node {}", id + 1)));
                }
            }
            "dist" => {
                let n = need_n()?;
                let [_, i, j, d] = toks[..] else {
                    return Err(err(line, "usage: dist <i> <j> <d>"));
                };
                let (i, j, d) = (node_id(line, i, n)?, node_id(line, j, n)?, number(line, d)?);
                if i == j {
                    return Err(err(line, "dist row needs two distinct nodes"));
                }
                distances.insert((i, j), d);
            }
            "hop1" => {
                let n = need_n()?;
                let Some((id, rest)) = toks[1..].split_first() else {
                    return Err(err(line, "usage: hop1 <id> <neighbor>..."));
                };
                let id = node_id(line, id, n)?;
                let set = rest
                    .iter()
                    .map(|t| node_id(line, t, n))
                    .collect::<Result<NodeSet, _>>()?;
                hops.entry(id).or_default().extend(set);
            }
            other => return Err(err(line, format!("unknown keyword {other:?}"))),
        }
    }

    let n = n.ok_or_else(|| err(0, "missing `nodes` header"))?;
    if let Some((g, p, z)) = fallback {
        gain.get_or_insert(g);
        power.get_or_insert(p);
        noise.get_or_insert(z);
    }
    let gain = gain.ok_or_else(|| err(0, "missing `gain` line"))?;
    let power = power.ok_or_else(|| err(0, "missing `power` line"))?;
    let noise = noise.ok_or_else(|| err(0, "missing `noise` line"))?;

    let topology = match (positions.is_empty(), distances.is_empty()) {
        (false, false) => return Err(err(0, "give either `pos` or `dist` rows, not both")),
        (true, true) => return Err(err(0, "no `pos` or `dist` rows")),
        (false, true) => {
            if positions.len() != n {
                let missing = (0..n).find(|i| !positions.contains_key(i)).unwrap_or(0);
                return Err(err(0, format!("missing position for node {}", missing + 1)));
            }
            Topology::from_positions(positions.into_values().collect(), gain, power, noise)?
        }
        (true, false) => {
            let mut matrix = vec![vec![0.0; n]; n];
            for (i, row) in matrix.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    if i == j {
                        continue;
                    }
                    *cell = *distances
                        .get(&(i, j))
                        .or_else(|| distances.get(&(j, i)))
                        .ok_or_else(|| err(0, format!("missing distance between {} and {}", i + 1, j + 1)))?;
                }
            }
            Topology::from_distances(matrix, gain, power, noise)?
        }
    };

    if hops.is_empty() {
        Ok(topology)
    } else {
        let sets = (0..n).map(|i| hops.remove(&i).unwrap_or_default()).collect();
        topology.with_one_hop(sets)
    }
}

/// Canonical text form; `parse_topology(render_topology(t))` rebuilds `t`
/// for every preset gain.
pub fn render_topology(topology: &Topology) -> String {
    let n = topology.node_count();
    let mut out = String::new();
    let _ = writeln!(out, "nodes {n}");
    let _ = writeln!(out, "gain {}", topology.gain());
    let _ = writeln!(out, "power {:?}", topology.power());
    let _ = writeln!(out, "noise {:?}", topology.noise());
    match topology.positions() {
        Some(points) => {
            for (i, p) in points.iter().enumerate() {
                let _ = writeln!(out, "pos {} {:?} {:?}", i + 1, p.x, p.y);
            }
        }
        None => {
            for i in 0..n {
                for j in 0..n {
                    if i != j && (i < j || topology.distance(i, j) != topology.distance(j, i)) {
                        let _ = writeln!(out, "dist {} {} {:?}", i + 1, j + 1, topology.distance(i, j));
                    }
                }
            }
        }
    }
    if let Some(sets) = topology.one_hop() {
        for (i, set) in sets.iter().enumerate() {
            let ids: Vec<String> = set.iter().map(|j| (j + 1).to_string()).collect();
            let _ = writeln!(out, "hop1 {} {}", i + 1, ids.join(" "));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_positions_and_hops() {
        let text = "nodes 3\ngain pl:2\npower 10\nnoise 1\npos 1 0\npos 2 1 # mid\npos 3 2 0\nhop1 2 1 3\n";
        let t = parse_topology(text).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.distance(0, 2), 2.0);
        let hops = t.one_hop().unwrap();
        assert_eq!(hops[1], NodeSet::from([0, 2]));
        assert!(hops[0].is_empty());
    }

    #[test]
    fn parses_distance_rows() {
        let text = "nodes 3\ngain exp:1\npower 1\nnoise 0.5\ndist 1 2 1\ndist 2 3 1\ndist 1 3 2\n";
        let t = parse_topology(text).unwrap();
        assert_eq!(t.distance(2, 0), 2.0);
        assert!(t.positions().is_none());
    }

    #[test]
    fn fallback_fills_missing_link_parameters() {
        let text = "nodes 2\npower 4\npos 1 0\npos 2 2\n";
        assert!(parse_topology(text).is_err());
        let t = parse_topology_with(text, (GainFunction::Constant, 1.0, 0.5)).unwrap();
        assert_eq!(t.power(), 4.0);
        assert_eq!(t.noise(), 0.5);
        assert_eq!(t.gain().to_string(), "const");
    }

    #[test]
    fn rejects_per_node_power() {
        let text = "nodes 2\ngain const\npower 2 5\nnoise 1\npos 1 0\npos 2 1\n";
        let e = parse_topology(text).unwrap_err();
        assert!(matches!(e, TopologyError::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn rejects_incomplete_files() {
        let base = "nodes 3\ngain const\npower 1\nnoise 1\n";
        assert!(parse_topology(&format!("{base}pos 1 0\npos 2 1\n")).is_err());
        assert!(parse_topology(&format!("{base}dist 1 2 1\ndist 1 3 1\n")).is_err());
        assert!(parse_topology(&format!("{base}pos 1 0\npos 4 1\n")).is_err());
        assert!(parse_topology("gain const\n").is_err());
        assert!(parse_topology(&format!("{base}pos 1 0\npos 2 1\npos 3 2\nwarp 9\n")).is_err());
    }

    #[test]
    fn render_round_trips() {
        let t = Topology::arc(5, 1.0, 7.0, GainFunction::exponential(0.3).unwrap(), 3.0, 0.7)
            .unwrap()
            .with_one_hop(crate::topology::line_one_hop(&[0, 1, 2, 3, 4]))
            .unwrap();
        let back = parse_topology(&render_topology(&t)).unwrap();
        assert_eq!(render_topology(&back), render_topology(&t));
        assert_eq!(back.distances(), t.distances());
    }
}
