//! Black-box tests against a live listener on an ephemeral port.

use std::net::SocketAddr;
use std::path::Path;

use kgsel_core::reports::{export, ExportFormat, ExportTarget};
use kgsel_core::{catalog::load_catalog_json, run_batch, PruneConfig, COBOTS_FIXTURE};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};

struct Api {
    base: String,
    http: Client,
    handle: tokio::task::JoinHandle<()>,
}

impl Api {
    async fn start(dir: &Path) -> Api {
        let any: SocketAddr = "127.0.0.1:0".parse().unwrap();
        let (addr, handle) = kgsel_server::spawn(dir, any).await.unwrap();
        Api {
            base: format!("http://{addr}"),
            http: Client::new(),
            handle,
        }
    }

    async fn get(&self, path: &str) -> (StatusCode, String) {
        let r = self.http.get(format!("{}{path}", self.base)).send().await.unwrap();
        (r.status(), r.text().await.unwrap())
    }

    async fn get_json(&self, path: &str) -> Value {
        let (status, body) = self.get(path).await;
        assert_eq!(status, StatusCode::OK, "{path}: {body}");
        serde_json::from_str(&body).unwrap()
    }

    async fn post(&self, path: &str, body: impl Into<reqwest::Body>) -> (StatusCode, Value) {
        let r = self
            .http
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .await
            .unwrap();
        let status = r.status();
        (status, r.json().await.unwrap())
    }

    async fn advance(&self, sid: &str, decision: Value) -> (StatusCode, Value) {
        self.post(
            &format!("/sessions/{sid}/advance"),
            json!({ "decision": decision }).to_string(),
        )
        .await
    }

    async fn step(&self, sid: &str, decision: Value) -> Value {
        let (status, body) = self.advance(sid, decision).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body
    }

    async fn new_session(&self) -> String {
        let (status, cat) = self.post("/catalogs", COBOTS_FIXTURE).await;
        assert!(status.is_success(), "{cat}");
        let (status, s) = self
            .post(
                "/sessions",
                json!({ "catalog_id": cat["id"] }).to_string(),
            )
            .await;
        assert_eq!(status, StatusCode::CREATED, "{s}");
        s["id"].as_str().unwrap().to_owned()
    }
}

impl Drop for Api {
    fn drop(&mut self) {
        self.handle.abort();
    }
}

#[tokio::test]
async fn interactive_session_matches_batch_run() {
    let dir = tempfile::tempdir().unwrap();
    let api = Api::start(dir.path()).await;
    let sid = api.new_session().await;

    let s = api.get_json(&format!("/sessions/{sid}")).await;
    assert_eq!(s["stage"], "FullKG");
    assert_eq!(s["status"], "InProgress");

    api.step(&sid, json!({"type": "prioritize"})).await;
    let h = api.get_json(&format!("/sessions/{sid}/histogram")).await;
    let zero = h["buckets"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["score"] == 0)
        .unwrap();
    assert_eq!(zero["count"], 12);

    let s = api.step(&sid, json!({"type": "cluster"})).await;
    assert_eq!(s["stages"].as_array().unwrap().last().unwrap()["summary"]["clusters"], 23);

    // Accepting candidates before any analysis is out of order.
    let (status, err) = api
        .advance(&sid, json!({"type": "accept_candidates", "ids": ["pcell-recovery"]}))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "IllegalTransition");

    api.step(&sid, json!({"type": "prune"})).await;
    let cov = api.get_json(&format!("/sessions/{sid}/coverage")).await;
    assert_eq!(cov["gaps"], json!(["Safety"]));

    let cands = api.get_json(&format!("/sessions/{sid}/candidates")).await;
    assert_eq!(cands[0]["enabler_id"], "pcell-recovery");

    api.step(&sid, json!({"type": "analyze"})).await;
    let (status, err) = api
        .advance(&sid, json!({"type": "accept_candidates", "ids": ["not-an-enabler"]}))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "NotRemoved");

    api.step(&sid, json!({"type": "accept_candidates", "ids": ["pcell-recovery"]})).await;
    api.step(&sid, json!({"type": "analyze"})).await;
    assert_eq!(api.get_json(&format!("/sessions/{sid}/candidates")).await, json!([]));
    let s = api.step(&sid, json!({"type": "finalize"})).await;
    assert_eq!(s["status"], "Finalized");
    assert_eq!(s["summary"]["retained"], 82);

    let (status, err) = api.advance(&sid, json!({"type": "analyze"})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "SessionClosed");

    let (status, csv) = api.get(&format!("/sessions/{sid}/export?fmt=selection-csv")).await;
    assert_eq!(status, StatusCode::OK);
    let c = load_catalog_json(COBOTS_FIXTURE.as_bytes()).unwrap();
    let batch = run_batch(&c, &PruneConfig::default()).unwrap();
    let expected = export(ExportTarget::Session(&batch), ExportFormat::SelectionCsv).unwrap();
    assert_eq!(csv, expected);
}

#[tokio::test]
async fn whatif_is_stateless_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let api = Api::start(dir.path()).await;
    let sid = api.new_session().await;
    for d in ["prioritize", "cluster", "prune"] {
        api.step(&sid, json!({ "type": d })).await;
    }
    let before = api.get_json(&format!("/sessions/{sid}")).await;
    let body = json!({"kpi_score_min": 2, "trl_min": 4}).to_string();
    let (s1, a) = api.post(&format!("/sessions/{sid}/whatif"), body.clone()).await;
    let (s2, b) = api.post(&format!("/sessions/{sid}/whatif"), body).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    assert_eq!(a["config"]["kpi_score_min"], 2);
    let after = api.get_json(&format!("/sessions/{sid}")).await;
    assert_eq!(before, after);

    let stricter = a["outcome"]["retained_ids"].as_array().unwrap().len();
    assert!(stricter < 81, "stricter thresholds retained {stricter}");

    let (status, err) = api
        .post(&format!("/sessions/{sid}/whatif"), json!({"trl_min": 12}).to_string())
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "InvalidConfig");
}

#[tokio::test]
async fn concurrent_whatif_queries_agree() {
    let dir = tempfile::tempdir().unwrap();
    let api = Api::start(dir.path()).await;
    let sid = api.new_session().await;
    let path = format!("/sessions/{sid}/whatif");
    let body = json!({"kpi_score_min": 1}).to_string();
    let results = futures_join(&api, &path, &body, 8).await;
    for r in &results[1..] {
        assert_eq!(r, &results[0]);
    }
}

async fn futures_join(api: &Api, path: &str, body: &str, n: usize) -> Vec<Value> {
    let mut tasks = Vec::new();
    for _ in 0..n {
        let http = api.http.clone();
        let url = format!("{}{path}", api.base);
        let body = body.to_owned();
        tasks.push(tokio::spawn(async move {
            let r = http
                .post(url)
                .header("content-type", "application/json")
                .body(body)
                .send()
                .await
                .unwrap();
            assert_eq!(r.status(), StatusCode::OK);
            r.json::<Value>().await.unwrap()
        }));
    }
    let mut out = Vec::new();
    for t in tasks {
        out.push(t.await.unwrap());
    }
    out
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (sid, view) = {
        let api = Api::start(dir.path()).await;
        let sid = api.new_session().await;
        for d in ["prioritize", "cluster", "prune", "analyze"] {
            api.step(&sid, json!({ "type": d })).await;
        }
        (sid.clone(), api.get_json(&format!("/sessions/{sid}")).await)
    };
    let api = Api::start(dir.path()).await;
    assert_eq!(api.get_json(&format!("/sessions/{sid}")).await, view);
    // The replayed session keeps going.
    api.step(&sid, json!({"type": "accept_candidates", "ids": ["pcell-recovery"]})).await;
    let cats = api.get_json("/catalogs").await;
    assert_eq!(cats.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn malformed_and_invalid_catalogs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let api = Api::start(dir.path()).await;

    let (status, err) = api.post("/catalogs", "{ not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "SyntaxError");

    let mut v: Value = serde_json::from_str(COBOTS_FIXTURE).unwrap();
    v["enablers"][0]["trl"] = json!(42);
    let (status, err) = api.post("/catalogs", v.to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "SchemaError");
    assert!(!err["violations"].as_array().unwrap().is_empty());

    let (status, _) = api.get("/catalogs/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, err) = api
        .post("/sessions", json!({"catalog_id": "nope"}).to_string())
        .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "UnknownCatalog");
    let (status, _) = api.get("/sessions/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn exports_and_openapi_are_served() {
    let dir = tempfile::tempdir().unwrap();
    let api = Api::start(dir.path()).await;
    let sid = api.new_session().await;
    for fmt in ExportFormat::ALL {
        let (status, body) = api
            .get(&format!("/sessions/{sid}/export?fmt={}", fmt.as_str()))
            .await;
        assert_eq!(status, StatusCode::OK, "{fmt:?}");
        assert!(!body.is_empty());
    }
    let (status, _) = api.get(&format!("/sessions/{sid}/export?fmt=pdf")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let doc = api.get_json("/openapi.json").await;
    assert!(doc["paths"]["/sessions/{id}/advance"].is_object());
    let g = api.get_json(&format!("/sessions/{sid}/graph?stage=1")).await;
    assert!(g["nodes"].is_object() || g["nodes"].is_array());
}
