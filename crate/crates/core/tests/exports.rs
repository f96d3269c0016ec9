mod common;

use common::{post, random_corpus, Rng};
use emopair::annotation::EmotionPolicy;
use emopair::emonet::{
    build_cooccurrence, export_network, matrix_to_network, node_stats, render_network, CountMode,
    NetworkFormat,
};
use emopair::{EmotionLabel, SentimentMap};
use quick_xml::events::Event;
use quick_xml::Reader;

fn network(posts: &[emopair::AnnotatedPost]) -> emopair::emonet::EmotionNetwork {
    let policy = EmotionPolicy::default();
    let m = build_cooccurrence(posts, &policy, CountMode::Distinct);
    matrix_to_network(&m, &node_stats(posts, &policy), &SentimentMap::default())
}

/// Node ids and (source, target, weight) edges read back from GraphML.
fn parse_graphml(text: &str) -> (Vec<String>, Vec<(String, String, u64)>) {
    let mut reader = Reader::from_str(text);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut in_edge_weight = false;
    let attr = |e: &quick_xml::events::BytesStart, key: &[u8]| {
        e.attributes()
            .filter_map(Result::ok)
            .find(|a| a.key.as_ref() == key)
            .map(|a| String::from_utf8(a.value.to_vec()).unwrap())
    };
    loop {
        match reader.read_event().expect("well-formed xml") {
            Event::Start(e) if e.name().as_ref() == b"node" => nodes.push(attr(&e, b"id").unwrap()),
            Event::Start(e) if e.name().as_ref() == b"edge" => {
                edges.push((
                    attr(&e, b"source").unwrap(),
                    attr(&e, b"target").unwrap(),
                    0,
                ));
            }
            Event::Start(e) if e.name().as_ref() == b"data" => {
                in_edge_weight = attr(&e, b"key").as_deref() == Some("weight");
            }
            Event::Text(t) if in_edge_weight => {
                let value = String::from_utf8(t.to_vec()).unwrap();
                edges.last_mut().unwrap().2 = value.trim().parse().unwrap();
                in_edge_weight = false;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    (nodes, edges)
}

#[test]
fn graphml_parses_and_matches_network() {
    use EmotionLabel::*;
    let posts = vec![
        post("a", &[Anger, Sadness], 1),
        post("b", &[Anger, Sadness, Joy], 0),
    ];
    let net = network(&posts);
    let (nodes, edges) = parse_graphml(&render_network(&net, NetworkFormat::GraphMl));
    assert_eq!(nodes, ["anger", "joy", "sadness"]);
    assert_eq!(
        edges,
        [
            ("anger".into(), "joy".into(), 1),
            ("anger".into(), "sadness".into(), 2),
            ("joy".into(), "sadness".into(), 1)
        ]
    );
    let text = render_network(&net, NetworkFormat::GraphMl);
    assert!(text.contains(r#"<data key="sentiment">negative</data>"#));
    assert!(text.contains(r#"<data key="occurrence_count">2</data>"#));
}

#[test]
fn empty_network_exports_are_valid() {
    let net = network(&[]);
    let (nodes, edges) = parse_graphml(&render_network(&net, NetworkFormat::GraphMl));
    assert!(nodes.is_empty() && edges.is_empty());
    assert_eq!(
        render_network(&net, NetworkFormat::Dot),
        "graph emotions {\n}\n"
    );
}

#[test]
fn exports_are_byte_identical_across_runs() {
    let mut rng = Rng::new(4);
    let posts = random_corpus(&mut rng, 100, 5);
    let dir = tempfile::tempdir().unwrap();
    for format in [
        NetworkFormat::GraphMl,
        NetworkFormat::Dot,
        NetworkFormat::EdgeCsv,
    ] {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        export_network(&network(&posts), format, &a).unwrap();
        export_network(&network(&posts), format, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn random_networks_round_trip_through_graphml() {
    let mut rng = Rng::new(17);
    for _ in 0..10 {
        let posts = random_corpus(&mut rng, 80, 6);
        let net = network(&posts);
        let (nodes, edges) = parse_graphml(&render_network(&net, NetworkFormat::GraphMl));
        assert_eq!(nodes.len(), net.nodes.len());
        let total: u64 = edges.iter().map(|e| e.2).sum();
        assert_eq!(total, net.edges.iter().map(|e| e.weight).sum::<u64>());
        for n in &net.nodes {
            let degree: u64 = edges
                .iter()
                .filter(|e| e.0 == n.emotion.name() || e.1 == n.emotion.name())
                .map(|e| e.2)
                .sum();
            assert_eq!(degree, net.weighted_degree(n.emotion));
        }
    }
}

#[test]
fn unwritable_destination() {
    let err = export_network(
        &network(&[]),
        NetworkFormat::EdgeCsv,
        std::path::Path::new("/nonexistent/dir/net.csv"),
    )
    .unwrap_err();
    assert_eq!(err.kind(), "Io");
}
