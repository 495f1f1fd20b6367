//! GraphML and GEXF writers for colored hyperlink subnetworks.

use std::io::{self, Write};
use std::path::Path;

use cohistory_core::biograph::HyperlinkGraph;

use crate::error::Result;
use crate::formats::write_atomic;

pub const UNASSIGNED: &str = "unassigned";

/// Per-node attributes, parallel to the graph's node list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeAttributes {
    pub cluster: Option<u32>,
    pub color_index: Option<u32>,
    pub article_title: Option<String>,
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}

fn cluster_label(a: &NodeAttributes) -> String {
    a.cluster.map_or_else(|| UNASSIGNED.to_string(), |c| c.to_string())
}

/// Unassigned nodes get color index -1.
fn color_label(a: &NodeAttributes) -> i64 {
    a.color_index.map_or(-1, i64::from)
}

fn graphml(w: &mut dyn Write, g: &HyperlinkGraph, attrs: &[NodeAttributes]) -> io::Result<()> {
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(w, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(w, r#"  <key id="birth_year" for="node" attr.name="birth_year" attr.type="int"/>"#)?;
    writeln!(w, r#"  <key id="cluster" for="node" attr.name="cluster" attr.type="string"/>"#)?;
    writeln!(w, r#"  <key id="color_index" for="node" attr.name="color_index" attr.type="int"/>"#)?;
    writeln!(w, r#"  <key id="article_title" for="node" attr.name="article_title" attr.type="string"/>"#)?;
    writeln!(w, r#"  <graph id="G" edgedefault="undirected">"#)?;
    for ((id, birth), a) in g.nodes.iter().zip(&g.birth_years).zip(attrs) {
        writeln!(w, r#"    <node id="{}">"#, escape(id))?;
        writeln!(w, r#"      <data key="birth_year">{birth}</data>"#)?;
        writeln!(w, r#"      <data key="cluster">{}</data>"#, cluster_label(a))?;
        writeln!(w, r#"      <data key="color_index">{}</data>"#, color_label(a))?;
        if let Some(t) = &a.article_title {
            writeln!(w, r#"      <data key="article_title">{}</data>"#, escape(t))?;
        }
        writeln!(w, "    </node>")?;
    }
    for (i, &(a, b)) in g.edges.iter().enumerate() {
        writeln!(
            w,
            r#"    <edge id="e{i}" source="{}" target="{}"/>"#,
            escape(&g.nodes[a as usize]),
            escape(&g.nodes[b as usize])
        )?;
    }
    writeln!(w, "  </graph>")?;
    writeln!(w, "</graphml>")
}

fn gexf(w: &mut dyn Write, g: &HyperlinkGraph, attrs: &[NodeAttributes]) -> io::Result<()> {
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(w, r#"<gexf xmlns="http://gexf.net/1.3" version="1.3">"#)?;
    writeln!(w, r#"  <graph mode="static" defaultedgetype="undirected">"#)?;
    writeln!(w, r#"    <attributes class="node">"#)?;
    writeln!(w, r#"      <attribute id="0" title="birth_year" type="integer"/>"#)?;
    writeln!(w, r#"      <attribute id="1" title="cluster" type="string"/>"#)?;
    writeln!(w, r#"      <attribute id="2" title="color_index" type="integer"/>"#)?;
    writeln!(w, r#"      <attribute id="3" title="article_title" type="string"/>"#)?;
    writeln!(w, "    </attributes>")?;
    writeln!(w, "    <nodes>")?;
    for ((id, birth), a) in g.nodes.iter().zip(&g.birth_years).zip(attrs) {
        let id = escape(id);
        let label = a.article_title.as_deref().map_or_else(|| id.clone(), escape);
        writeln!(w, r#"      <node id="{id}" label="{label}">"#)?;
        writeln!(w, "        <attvalues>")?;
        writeln!(w, r#"          <attvalue for="0" value="{birth}"/>"#)?;
        writeln!(w, r#"          <attvalue for="1" value="{}"/>"#, cluster_label(a))?;
        writeln!(w, r#"          <attvalue for="2" value="{}"/>"#, color_label(a))?;
        if let Some(t) = &a.article_title {
            writeln!(w, r#"          <attvalue for="3" value="{}"/>"#, escape(t))?;
        }
        writeln!(w, "        </attvalues>")?;
        writeln!(w, "      </node>")?;
    }
    writeln!(w, "    </nodes>")?;
    writeln!(w, "    <edges>")?;
    for (i, &(a, b)) in g.edges.iter().enumerate() {
        writeln!(
            w,
            r#"      <edge id="{i}" source="{}" target="{}"/>"#,
            escape(&g.nodes[a as usize]),
            escape(&g.nodes[b as usize])
        )?;
    }
    writeln!(w, "    </edges>")?;
    writeln!(w, "  </graph>")?;
    writeln!(w, "</gexf>")
}

pub fn write_graphml(path: &Path, graph: &HyperlinkGraph, attrs: &[NodeAttributes]) -> Result<()> {
    write_atomic(path, |w| graphml(w, graph, attrs))
}

pub fn write_gexf(path: &Path, graph: &HyperlinkGraph, attrs: &[NodeAttributes]) -> Result<()> {
    write_atomic(path, |w| gexf(w, graph, attrs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (HyperlinkGraph, Vec<NodeAttributes>) {
        let g = HyperlinkGraph {
            nodes: vec!["Q1".into(), "Q2".into()],
            birth_years: vec![1900, -43],
            edges: vec![(0, 1)],
            directions: vec![1],
        };
        let attrs = vec![
            NodeAttributes { cluster: Some(2), color_index: Some(1), article_title: Some("Tom & \"Jerry\"".into()) },
            NodeAttributes { cluster: None, color_index: None, article_title: None },
        ];
        (g, attrs)
    }

    #[test]
    fn graphml_carries_all_attributes() {
        let (g, attrs) = sample();
        let mut buf = Vec::new();
        graphml(&mut buf, &g, &attrs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("Tom &amp; &quot;Jerry&quot;"));
        assert!(text.contains(r#"<data key="cluster">unassigned</data>"#));
        assert!(text.contains(r#"<data key="birth_year">-43</data>"#));
        assert!(text.contains(r#"<edge id="e0" source="Q1" target="Q2"/>"#));
    }

    #[test]
    fn gexf_lists_nodes_and_edges() {
        let (g, attrs) = sample();
        let mut buf = Vec::new();
        gexf(&mut buf, &g, &attrs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<node ").count(), 2);
        assert_eq!(text.matches("<edge ").count(), 1);
        assert!(text.contains(r#"<attvalue for="2" value="-1"/>"#));
    }
}
