mod common;

use std::sync::Arc;

use common::{parse, result_ids, TestServer, TOKEN};
use motamot_core::model::{AxieId, Contributor, QualityLevel};
use motamot_core::store::{Store, VolumeHandle};
use motamot_core::xml::{self, structural_diff};
use motamot_server::{render_lookup, render_values};

const REIFIED: &str = include_str!("../../core/tests/golden/abondant.reified.xml");

#[tokio::test]
async fn match_returns_entry_xml() {
    let s = TestServer::seeded().await;
    let resp = s
        .client
        .get(s.url(&["api", "motamot", "fra", "cdm-headword", "abondant"], &[]))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 200);
    let ct = resp.headers()["content-type"].to_str().unwrap().to_owned();
    assert!(ct.starts_with("application/xml"));
    let root = parse(&resp.text().await.unwrap());
    assert_eq!(root.name, "m:results");
    assert_eq!(root.attr("total"), Some("1"));
    let entry = root.elements().next().unwrap();
    let golden = xml::parse(REIFIED).unwrap().root;
    assert!(structural_diff(&golden, entry, &["m:gloss"]).is_empty());
}

#[tokio::test]
async fn no_match_is_404() {
    let s = TestServer::seeded().await;
    let (status, body) = s
        .get(&["api", "motamot", "fra", "cdm-headword", "zzz"], &[])
        .await;
    assert_eq!(status, 404);
    assert_eq!(parse(&body).name, "m:error");
    assert_eq!(
        s.get(&["api", "nodict", "fra", "cdm-headword", "abondant"], &[])
            .await
            .0,
        404
    );
}

#[tokio::test]
async fn key_projection_lists_values() {
    let s = TestServer::seeded().await;
    let (status, body) = s
        .get(
            &["api", "*", "eng", "cdm-headword", "trial", "cdm-pos"],
            &[],
        )
        .await;
    assert_eq!(status, 200);
    let values: Vec<(String, String)> = parse(&body)
        .elements()
        .map(|v| (v.attr("entry").unwrap().to_owned(), v.text()))
        .collect();
    assert_eq!(
        values,
        [
            ("eng.trial.1.e".to_owned(), "n.".to_owned()),
            ("eng.trial.2.e".to_owned(), "v.".to_owned())
        ]
    );
    let (status, body) = s
        .get(
            &[
                "api",
                "motamot",
                "fra",
                "cdm-headword",
                "abondant",
                "cdm-pronunciation",
            ],
            &[],
        )
        .await;
    assert_eq!(status, 200);
    assert_eq!(parse(&body).elements().next().unwrap().text(), "ABON-DAN");
    let (status, body) = s
        .get(&["api", "mini", "eng", "cdm-headword", "tree", "*"], &[])
        .await;
    assert_eq!(status, 200);
    let keys: Vec<String> = parse(&body)
        .elements()
        .map(|v| v.attr("key").unwrap().to_owned())
        .collect();
    assert_eq!(keys, ["cdm-headword", "cdm-pos"]);
    assert_eq!(
        s.get(
            &["api", "mini", "eng", "cdm-headword", "tree", "nokey"],
            &[]
        )
        .await
        .0,
        400
    );
}

#[tokio::test]
async fn handle_returns_full_entry() {
    let s = TestServer::seeded().await;
    let h = VolumeHandle::new("motamot", "fra");
    let (status, body) = s
        .get(
            &["api", "motamot", "fra", "handle", "fra.abondant.27.e"],
            &[],
        )
        .await;
    assert_eq!(status, 200);
    let root = parse(&body);
    assert_eq!(root.elements().count(), 1);
    assert_eq!(
        root.elements().next().unwrap(),
        &s.store.entry(&h, "fra.abondant.27.e").unwrap()
    );
    let (status, body) = s
        .get(&["api", "motamot", "khm", "handle", "khm.sambō.1.e"], &[])
        .await;
    assert_eq!(status, 200);
    assert_eq!(result_ids(&body), ["khm.sambō.1.e"]);
}

#[tokio::test]
async fn wildcard_is_deduplicated_union() {
    let s = TestServer::seeded().await;
    let q = [("strategy", "prefix"), ("count", "1000")];
    let (status, body) = s.get(&["api", "*", "*", "cdm-headword", "ab"], &q).await;
    assert_eq!(status, 200);
    let all = result_ids(&body);
    let mut union = Vec::new();
    for (dict, lang) in [
        ("copy", "fra"),
        ("mini", "eng"),
        ("motamot", "fra"),
        ("motamot", "khm"),
    ] {
        let (status, body) = s.get(&["api", dict, lang, "cdm-headword", "ab"], &q).await;
        if status == 200 {
            for id in result_ids(&body) {
                if !union.contains(&id) {
                    union.push(id);
                }
            }
        } else {
            assert_eq!(status, 404);
        }
    }
    assert_eq!(all, union);
    let french = result_ids(
        &s.get(&["api", "motamot", "fra", "cdm-headword", "ab"], &q)
            .await
            .1,
    );
    assert_eq!(all.len(), french.len());
    assert_eq!(parse(&body).attr("total").unwrap(), all.len().to_string());
}

#[tokio::test]
async fn bad_requests() {
    let s = TestServer::seeded().await;
    for (path, query) in [
        (vec!["api", "motamot", "fra", "cdm-colour", "x"], vec![]),
        (
            vec!["api", "motamot", "fra", "cdm-headword", "x"],
            vec![("strategy", "fuzzy")],
        ),
        (
            vec!["api", "motamot", "fra", "cdm-headword", "x"],
            vec![("count", "-2")],
        ),
        (
            vec!["api", "motamot", "fra", "cdm-headword", "x"],
            vec![("startIndex", "a")],
        ),
        (
            vec!["api", "motamot", "fra", "cdm-headword", "x"],
            vec![("page", "2")],
        ),
        (vec!["api", "motamot", "export"], vec![("format", "zip")]),
    ] {
        assert_eq!(s.get(&path, &query).await.0, 400, "{path:?} {query:?}");
    }
}

#[tokio::test]
async fn responses_equal_direct_store_calls() {
    let s = TestServer::seeded().await;
    type Case<'a> = (&'a str, &'a str, &'a str, &'a str, &'a [(&'a str, &'a str)]);
    let cases: &[Case] = &[
        (
            "motamot",
            "fra",
            "cdm-headword",
            "ab",
            &[("strategy", "prefix")],
        ),
        (
            "motamot",
            "fra",
            "cdm-headword",
            "ab",
            &[("strategy", "prefix"), ("startIndex", "4"), ("count", "3")],
        ),
        ("*", "*", "cdm-pos", "adj.", &[]),
        (
            "motamot",
            "khm",
            "cdm-writing",
            "ស",
            &[("strategy", "prefix")],
        ),
        ("*", "fra", "handle", "fra.abord", &[("strategy", "prefix")]),
    ];
    for &(dict, lang, criteria, value, params) in cases {
        let params_map = params
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let q = motamot_server::parse_query(criteria, value, &params_map, 10).unwrap();
        let direct = render_lookup(&s.store.lookup(dict, lang, &q).unwrap());
        let (status, body) = s.get(&["api", dict, lang, criteria, value], params).await;
        assert_eq!(status, 200, "{dict}/{lang}/{criteria}/{value}");
        assert_eq!(body, direct);

        let found = s.store.lookup(dict, lang, &q).unwrap();
        let direct = render_values(&found, &s.store.project(&found, "cdm-headword").unwrap());
        let (_, body) = s
            .get(
                &["api", dict, lang, criteria, value, "cdm-headword"],
                params,
            )
            .await;
        assert_eq!(body, direct);
    }
}

async fn put(
    s: &TestServer,
    id: &str,
    body: String,
    token: Option<&str>,
    if_match: Option<&str>,
) -> (u16, String, Option<String>) {
    let lang = &id[..3];
    let mut req = s
        .client
        .put(s.url(&["api", "motamot", lang, "entry", id], &[]))
        .body(body);
    if let Some(t) = token {
        req = req.header("Authorization", format!("Bearer {t}"));
    }
    if let Some(m) = if_match {
        req = req.header("If-Match", m);
    }
    let resp = req.send().await.unwrap();
    let status = resp.status().as_u16();
    let etag = resp
        .headers()
        .get("etag")
        .map(|v| v.to_str().unwrap().to_owned());
    (status, resp.text().await.unwrap(), etag)
}

#[tokio::test]
async fn editing_contract() {
    let s = TestServer::seeded().await;
    let id = "fra.abondant.27.e";
    let resp = s
        .client
        .get(s.url(&["api", "motamot", "fra", "entry", id], &[]))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.headers()["etag"], "\"0\"");
    let original = resp.text().await.unwrap();
    let edited = original.replace("(pluie)", "(averse)");

    assert_eq!(put(&s, id, edited.clone(), None, Some("0")).await.0, 401);
    assert_eq!(
        put(&s, id, edited.clone(), Some("wrong"), Some("0"))
            .await
            .0,
        401
    );
    assert_eq!(put(&s, id, edited.clone(), Some(TOKEN), None).await.0, 400);

    let (status, body, etag) = put(&s, id, edited.clone(), Some(TOKEN), Some("\"0\"")).await;
    assert_eq!(status, 200, "{body}");
    assert_eq!(etag.as_deref(), Some("\"1\""));
    let root = parse(&body);
    assert_eq!(root.attr("revision"), Some("1"));
    assert_eq!(root.attr("level"), Some("3"));

    assert_eq!(
        put(&s, id, edited.clone(), Some(TOKEN), Some("0")).await.0,
        409
    );
    let unknown = edited.replace(id, "fra.nothing.1.e");
    assert_eq!(
        put(&s, "fra.nothing.1.e", unknown, Some(TOKEN), Some("0"))
            .await
            .0,
        404
    );
    let invalid = edited.replace("<m:head>", "<m:head><m:colour>red</m:colour>");
    assert_eq!(put(&s, id, invalid, Some(TOKEN), Some("1")).await.0, 422);
    assert_eq!(
        put(&s, id, "<m:entry".into(), Some(TOKEN), Some("1"))
            .await
            .0,
        422
    );

    let (status, body) = s
        .get(&["api", "motamot", "export"], &[("lang", "fra")])
        .await;
    assert_eq!(status, 200);
    assert!(body.contains("(averse)"));
}

#[tokio::test]
async fn link_creation_generates_an_axie() {
    let s = TestServer::seeded().await;
    let link =
        r#"<m:link xmlns:m="http://motamot.org/xml/volume" sense="s2" target="khm.sambō.1.e" />"#;
    assert_eq!(
        put(&s, "fra.abondant.27.e", link.into(), None, None)
            .await
            .0,
        401
    );
    let (status, body, _) = put(&s, "fra.abondant.27.e", link.into(), Some(TOKEN), None).await;
    assert_eq!(status, 200, "{body}");
    let root = parse(&body);
    assert_eq!(root.attr("case"), Some("draft-sense"));
    let axie: AxieId = root.attr("axie").unwrap().parse().unwrap();
    assert_eq!(axie.to_string(), "axi.[fra:abondant,khm:sambō].27.3.e");
    let created = root.attr("created-sense").unwrap();

    let (_, body) = s
        .get(
            &["api", "motamot", "fra", "handle", "fra.abondant.27.e"],
            &[],
        )
        .await;
    assert!(body.contains(&axie.to_string()));
    let (_, body) = s
        .get(&["api", "motamot", "axi", "handle", &axie.to_string()], &[])
        .await;
    assert_eq!(result_ids(&body), [axie.to_string()]);
    let khm = s
        .store
        .entry(&VolumeHandle::new("motamot", "khm"), "khm.sambō.1.e")
        .unwrap();
    let sense = khm
        .children_named("m:sense")
        .find(|e| e.attr("id") == Some(created))
        .unwrap();
    assert_eq!(sense.attr("level"), Some("1"));

    let same_volume = r#"<m:link sense="s1" target="fra.abord.31.e" />"#;
    assert_eq!(
        put(
            &s,
            "fra.abondant.27.e",
            same_volume.into(),
            Some(TOKEN),
            None
        )
        .await
        .0,
        422
    );
    let missing = r#"<m:link sense="s1" target="khm.nothing.1.e" />"#;
    assert_eq!(
        put(&s, "fra.abondant.27.e", missing.into(), Some(TOKEN), None)
            .await
            .0,
        404
    );
}

#[tokio::test]
async fn export_matches_store() {
    let s = TestServer::seeded().await;
    for lang in ["fra", "axi", "khm"] {
        let (status, body) = s
            .get(&["api", "motamot", "export"], &[("lang", lang)])
            .await;
        assert_eq!(status, 200);
        assert_eq!(
            body,
            s.store
                .export_volume(&VolumeHandle::new("motamot", lang))
                .unwrap()
        );
        assert!(body.contains("CC BY 4.0"));
    }
    let (status, body) = s.get(&["api", "motamot", "export"], &[]).await;
    assert_eq!(status, 200);
    assert_eq!(body, s.store.export_dictionary("motamot").unwrap());
    assert_eq!(s.get(&["api", "nodict", "export"], &[]).await.0, 404);
    assert_eq!(
        s.get(&["api", "motamot", "export"], &[("lang", "deu")])
            .await
            .0,
        404
    );
}

#[tokio::test]
async fn restart_loses_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open_dir(dir.path()).unwrap();
    common::seed(&store);
    let s = TestServer::start(Arc::new(store)).await;
    let id = "fra.abord.31.e";
    let (_, original) = s.get(&["api", "motamot", "fra", "entry", id], &[]).await;
    let (status, _, _) = put(
        &s,
        id,
        original.replace("(d'—)", "(d'abord)"),
        Some(TOKEN),
        Some("0"),
    )
    .await;
    assert_eq!(status, 200);
    let (_, before) = s.get(&["api", "motamot", "export"], &[]).await;
    s.stop();

    let s = TestServer::start(Arc::new(Store::open_dir(dir.path()).unwrap())).await;
    let (_, after) = s.get(&["api", "motamot", "export"], &[]).await;
    assert_eq!(after, before);
    let (_, entry) = s.get(&["api", "motamot", "fra", "entry", id], &[]).await;
    assert_eq!(parse(&entry).attr("revision"), Some("1"));
    let who = Contributor::new("x", QualityLevel::new(1).unwrap());
    assert!(s
        .store
        .update_entry(&VolumeHandle::new("motamot", "fra"), id, &entry, &who, 0)
        .is_err());
    assert!(entry.contains("(d'abord)"));
}
