//! Graph exports: GEXF 1.2 (with viz positions and sizes), a plain edge
//! list and a node-attribute CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::FriendshipGraph;
use crate::error::Result;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Write an undirected GEXF file with party/closeness/size attributes and
/// viz positions.
pub fn write_gexf(graph: &FriendshipGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<gexf xmlns="http://www.gexf.net/1.2draft" xmlns:viz="http://www.gexf.net/1.2draft/viz" version="1.2">"#
    )?;
    writeln!(out, r#"  <graph mode="static" defaultedgetype="undirected">"#)?;
    writeln!(out, r#"    <attributes class="node">"#)?;
    writeln!(
        out,
        r#"      <attribute id="0" title="party" type="string"/>"#
    )?;
    writeln!(
        out,
        r#"      <attribute id="1" title="closeness" type="double"/>"#
    )?;
    writeln!(out, r#"      <attribute id="2" title="size" type="double"/>"#)?;
    writeln!(out, r#"    </attributes>"#)?;

    writeln!(out, r#"    <nodes>"#)?;
    for node in graph.nodes() {
        let uid = xml_escape(node.uid.as_str());
        let party = node.label.map_or(String::new(), |p| p.name().to_owned());
        writeln!(out, r#"      <node id="{uid}" label="{uid}">"#)?;
        writeln!(out, r#"        <attvalues>"#)?;
        writeln!(
            out,
            r#"          <attvalue for="0" value="{}"/>"#,
            xml_escape(&party)
        )?;
        writeln!(
            out,
            r#"          <attvalue for="1" value="{}"/>"#,
            node.closeness
        )?;
        writeln!(out, r#"          <attvalue for="2" value="{}"/>"#, node.size)?;
        writeln!(out, r#"        </attvalues>"#)?;
        writeln!(
            out,
            r#"        <viz:position x="{}" y="{}" z="0"/>"#,
            node.x, node.y
        )?;
        writeln!(
            out,
            r#"        <viz:size value="{}"/>"#,
            node.size.max(0.05)
        )?;
        writeln!(out, r#"      </node>"#)?;
    }
    writeln!(out, r#"    </nodes>"#)?;

    writeln!(out, r#"    <edges>"#)?;
    for (i, (a, b)) in graph.edges().iter().enumerate() {
        writeln!(
            out,
            r#"      <edge id="{i}" source="{}" target="{}"/>"#,
            xml_escape(graph.nodes()[*a].uid.as_str()),
            xml_escape(graph.nodes()[*b].uid.as_str())
        )?;
    }
    writeln!(out, r#"    </edges>"#)?;
    writeln!(out, r#"  </graph>"#)?;
    writeln!(out, r#"</gexf>"#)?;
    out.flush()?;
    Ok(())
}

/// Write `source,target` rows.
pub fn write_edge_list(graph: &FriendshipGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "source,target")?;
    for (a, b) in graph.edges() {
        writeln!(
            out,
            "{},{}",
            graph.nodes()[*a].uid,
            graph.nodes()[*b].uid
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Write `uid,party,closeness,size,x,y` rows.
pub fn write_node_attributes(graph: &FriendshipGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "uid,party,closeness,size,x,y")?;
    for node in graph.nodes() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            node.uid,
            node.label.map_or("", |p| p.name()),
            node.closeness,
            node.size,
            node.x,
            node.y
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, TimeWindow, User};
    use crate::types::{Party, UserId};
    use std::collections::{BTreeMap, BTreeSet};

    fn small_graph() -> FriendshipGraph {
        let mut corpus = Corpus::new(TimeWindow::new(0, 10).unwrap());
        let mut members = BTreeSet::new();
        for (uid, follows) in [("a<x>", vec!["b"]), ("b", vec![])] {
            members.insert(UserId::new(uid));
            let mut user = User::new(UserId::new(uid));
            for f in follows {
                user.followings.insert(UserId::new(f));
            }
            corpus.insert_user(user);
        }
        let labels: BTreeMap<UserId, Party> =
            [(UserId::new("a<x>"), Party::VOX)].into_iter().collect();
        let mut g = FriendshipGraph::build(&corpus, &members, &labels);
        g.annotate_closeness();
        g.set_positions(&[(0.5, -0.25), (1.0, 2.0)]);
        g
    }

    #[test]
    fn gexf_is_wellformed_and_escaped() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("g.gexf");
        write_gexf(&small_graph(), &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert!(content.contains("defaultedgetype=\"undirected\""));
        assert!(content.contains("a&lt;x&gt;"));
        assert!(!content.contains("<node id=\"a<x>\""));
        assert!(content.contains("viz:position"));
        assert!(content.contains("<edge id=\"0\""));
    }

    #[test]
    fn csv_exports_list_all_rows() {
        let dir = tempfile::TempDir::new().unwrap();
        let g = small_graph();
        let edges = dir.path().join("edges.csv");
        let nodes = dir.path().join("nodes.csv");
        write_edge_list(&g, &edges).unwrap();
        write_node_attributes(&g, &nodes).unwrap();
        assert_eq!(std::fs::read_to_string(&edges).unwrap().lines().count(), 2);
        let node_content = std::fs::read_to_string(&nodes).unwrap();
        assert_eq!(node_content.lines().count(), 3);
        assert!(node_content.contains("VOX"));
    }
}
