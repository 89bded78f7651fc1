#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use motamot_core::pipeline::run_pipeline;
use motamot_core::restructure::SupplementLexicon;
use motamot_core::store::{Store, VolumeDescriptor};
use motamot_core::translit::RuleSet;
use motamot_core::xml::{self, Element};
use motamot_server::{router, AppState, ServerConfig, User};
use reqwest::{Client, Url};

pub const SAMPLE: &str = include_str!("../../../core/data/sample.mam-src");
pub const FEM: &str = include_str!("../../../core/data/fem.tsv");
pub const TOKEN: &str = "secret-ana";

const ENGLISH: &str = r#"<m:volume xmlns:m="http://motamot.org/xml/volume" name="mini" lang="eng">
  <m:entry id="eng.trial.1.e" level="">
    <m:head><m:headword>trial</m:headword><m:pos>n.</m:pos></m:head>
    <m:sense id="s1" level=""><m:gloss>court case</m:gloss></m:sense>
  </m:entry>
  <m:entry id="eng.trial.2.e" level="">
    <m:head><m:headword>trial</m:headword><m:pos>v.</m:pos></m:head>
    <m:sense id="s1" level=""><m:gloss>to test</m:gloss></m:sense>
  </m:entry>
  <m:entry id="eng.tree.1.e" level="">
    <m:head><m:headword>tree</m:headword><m:pos>n.</m:pos></m:head>
    <m:sense id="s1" level=""><m:gloss>plant</m:gloss></m:sense>
  </m:entry>
</m:volume>
"#;

/// Sample volumes under `motamot`, the French volume again under `copy`,
/// and a small English volume under `mini`.
pub fn seed(store: &Store) {
    let supp = SupplementLexicon::parse(FEM).unwrap();
    let out = run_pipeline(SAMPLE, &supp, &RuleSet::bundled(), "motamot").unwrap();
    let fra = out.french.to_document().to_xml();
    for (dict, xml, lang) in [
        ("motamot", fra.clone(), "fra"),
        ("motamot", out.axies.to_document().to_xml(), "axi"),
        ("motamot", out.khmer.to_document().to_xml(), "khm"),
        ("copy", fra, "fra"),
        ("mini", ENGLISH.to_owned(), "eng"),
    ] {
        store
            .import_volume(&xml, VolumeDescriptor::new(dict, lang))
            .unwrap();
    }
}

pub fn config() -> ServerConfig {
    let mut users = BTreeMap::new();
    users.insert(
        "ana".to_owned(),
        User {
            token: TOKEN.into(),
            skill: 3,
        },
    );
    ServerConfig {
        users,
        ..ServerConfig::default()
    }
}

pub struct TestServer {
    pub base: Url,
    pub store: Arc<Store>,
    pub client: Client,
    handle: tokio::task::JoinHandle<()>,
}

impl TestServer {
    pub async fn start(store: Arc<Store>) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let app = router(AppState::new(store.clone(), config()));
        let handle = tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        TestServer {
            base: Url::parse(&format!("http://{addr}/")).unwrap(),
            store,
            client: Client::new(),
            handle,
        }
    }

    pub async fn seeded() -> Self {
        let store = Store::in_memory();
        seed(&store);
        Self::start(Arc::new(store)).await
    }

    /// URL from raw path segments, each percent-encoded.
    pub fn url(&self, segments: &[&str], query: &[(&str, &str)]) -> Url {
        let mut url = self.base.clone();
        url.path_segments_mut().unwrap().clear().extend(segments);
        if !query.is_empty() {
            url.query_pairs_mut().extend_pairs(query);
        }
        url
    }

    pub async fn get(&self, segments: &[&str], query: &[(&str, &str)]) -> (u16, String) {
        let resp = self
            .client
            .get(self.url(segments, query))
            .send()
            .await
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.text().await.unwrap())
    }

    pub fn stop(self) {
        self.handle.abort();
    }
}

pub fn parse(body: &str) -> Element {
    xml::parse(body).unwrap().root
}

pub fn result_ids(body: &str) -> Vec<String> {
    parse(body)
        .elements()
        .map(|e| e.attr("id").unwrap().to_owned())
        .collect()
}
