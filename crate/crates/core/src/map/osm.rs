use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::MapError;

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub lat: f64,
    pub lon: f64,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Way {
    pub id: i64,
    pub refs: Vec<i64>,
    pub tags: Tags,
}

impl Way {
    pub fn is_closed(&self) -> bool {
        self.refs.len() >= 2 && self.refs.first() == self.refs.last()
    }

    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bounds {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

/// Raw OSM content: nodes by id, ways in document order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapData {
    pub nodes: BTreeMap<i64, Node>,
    pub ways: Vec<Way>,
    pub bounds: Bounds,
}

fn line_of(doc: &roxmltree::Document, node: roxmltree::Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn attr<T: std::str::FromStr>(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    name: &str,
) -> Result<T, MapError> {
    node.attribute(name)
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| MapError::Attribute {
            line: line_of(doc, node),
            element: node.tag_name().name().to_string(),
            attribute: name.to_string(),
        })
}

fn read_tags(doc: &roxmltree::Document, el: roxmltree::Node) -> Result<Tags, MapError> {
    let mut tags = Tags::new();
    for t in el.children().filter(|c| c.has_tag_name("tag")) {
        let k: String = attr(doc, t, "k")?;
        let v = t.attribute("v").unwrap_or_default().to_string();
        tags.insert(k, v);
    }
    Ok(tags)
}

/// Parses an OSM XML v0.6 document. Elements other than `bounds`, `node` and
/// `way` are ignored; all tags are kept verbatim.
pub fn parse_osm(document: &str) -> Result<MapData, MapError> {
    let doc = roxmltree::Document::parse(document).map_err(|e| {
        let pos = e.pos();
        MapError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if !root.has_tag_name("osm") {
        return Err(MapError::Xml {
            line: line_of(&doc, root),
            column: 1,
            message: format!("expected <osm> root, found <{}>", root.tag_name().name()),
        });
    }

    let mut map = MapData::default();
    let mut explicit_bounds = None;
    for el in root.children().filter(roxmltree::Node::is_element) {
        match el.tag_name().name() {
            "bounds" => {
                explicit_bounds = Some(Bounds {
                    min_lat: attr(&doc, el, "minlat")?,
                    min_lon: attr(&doc, el, "minlon")?,
                    max_lat: attr(&doc, el, "maxlat")?,
                    max_lon: attr(&doc, el, "maxlon")?,
                });
            }
            "node" => {
                let id: i64 = attr(&doc, el, "id")?;
                let node = Node {
                    lat: attr(&doc, el, "lat")?,
                    lon: attr(&doc, el, "lon")?,
                    tags: read_tags(&doc, el)?,
                };
                map.nodes.insert(id, node);
            }
            "way" => {
                let id: i64 = attr(&doc, el, "id")?;
                let refs = el
                    .children()
                    .filter(|c| c.has_tag_name("nd"))
                    .map(|nd| attr::<i64>(&doc, nd, "ref"))
                    .collect::<Result<Vec<_>, _>>()?;
                map.ways.push(Way {
                    id,
                    refs,
                    tags: read_tags(&doc, el)?,
                });
            }
            _ => {}
        }
    }

    for way in &map.ways {
        if way.refs.len() < 2 {
            return Err(MapError::ShortWay {
                way: way.id,
                refs: way.refs.len(),
            });
        }
        if let Some(&missing) = way.refs.iter().find(|r| !map.nodes.contains_key(r)) {
            return Err(MapError::MissingNode {
                way: way.id,
                node: missing,
            });
        }
    }

    map.bounds = explicit_bounds.unwrap_or_else(|| computed_bounds(&map));
    Ok(map)
}

fn computed_bounds(map: &MapData) -> Bounds {
    let mut it = map.nodes.values();
    let Some(first) = it.next() else {
        return Bounds::default();
    };
    it.fold(
        Bounds {
            min_lat: first.lat,
            min_lon: first.lon,
            max_lat: first.lat,
            max_lon: first.lon,
        },
        |b, n| Bounds {
            min_lat: b.min_lat.min(n.lat),
            min_lon: b.min_lon.min(n.lon),
            max_lat: b.max_lat.max(n.lat),
            max_lon: b.max_lon.max(n.lon),
        },
    )
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn write_tags(out: &mut String, tags: &Tags) {
    for (k, v) in tags {
        let _ = writeln!(out, "    <tag k=\"{}\" v=\"{}\"/>", escape(k), escape(v));
    }
}

/// Serializes back to OSM XML. Coordinates use the shortest round-trip
/// decimal form, so `parse_osm(&to_osm_xml(m)) == m`.
pub fn to_osm_xml(map: &MapData) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<osm version=\"0.6\" generator=\"urbansynth\">\n");
    let b = map.bounds;
    let _ = writeln!(
        out,
        "  <bounds minlat=\"{}\" minlon=\"{}\" maxlat=\"{}\" maxlon=\"{}\"/>",
        b.min_lat, b.min_lon, b.max_lat, b.max_lon
    );
    for (id, n) in &map.nodes {
        if n.tags.is_empty() {
            let _ = writeln!(out, "  <node id=\"{id}\" lat=\"{}\" lon=\"{}\"/>", n.lat, n.lon);
        } else {
            let _ = writeln!(out, "  <node id=\"{id}\" lat=\"{}\" lon=\"{}\">", n.lat, n.lon);
            write_tags(&mut out, &n.tags);
            out.push_str("  </node>\n");
        }
    }
    for w in &map.ways {
        let _ = writeln!(out, "  <way id=\"{}\">", w.id);
        for r in &w.refs {
            let _ = writeln!(out, "    <nd ref=\"{r}\"/>");
        }
        write_tags(&mut out, &w.tags);
        out.push_str("  </way>\n");
    }
    out.push_str("</osm>\n");
    out
}
