use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use plotsynth_cli::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

const QUERY: &str =
    "show the fuel efficiency for cars from different countries segregated based on body style";

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, body)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, b) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn post(app: &Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    send(app, Request::post(uri).body(body.into()).unwrap()).await
}

async fn synthesize(app: &Router, body: Value) -> (StatusCode, Value) {
    let (s, b) = post(app, "/synthesize", body.to_string()).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn with_cars() -> (Router, String) {
    let app = router(Arc::new(AppState::new()));
    let csv = std::fs::read(fixture("cars.csv")).unwrap();
    let (status, body) = post(&app, "/datasets?name=cars", csv).await;
    assert_eq!(status, StatusCode::CREATED);
    let info: Value = serde_json::from_slice(&body).unwrap();
    (app, info["id"].as_str().unwrap().to_string())
}

#[tokio::test]
async fn health() {
    let app = router(Arc::new(AppState::new()));
    let (status, body) = get(&app, "/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn dataset_registry() {
    let app = router(Arc::new(AppState::new()));
    let (status, body) = get(&app, "/datasets").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));

    let csv = std::fs::read(fixture("cars.csv")).unwrap();
    let (status, _) = post(&app, "/datasets?name=cars", csv).await;
    assert_eq!(status, StatusCode::CREATED);
    let (_, body) = get(&app, "/datasets").await;
    let list = body.as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["name"], "cars");
    assert_eq!(list[0]["rows"], 30);
    let types: Vec<(&str, &str)> = list[0]["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap(), c["type"].as_str().unwrap()))
        .collect();
    assert!(types.contains(&("Fuel_economy", "Continuous")));
    assert!(types.contains(&("Origin", "Nominal")));
}

#[tokio::test]
async fn malformed_upload_is_rejected() {
    let app = router(Arc::new(AppState::new()));
    let (status, body) = post(&app, "/datasets", "a,b\n1,2,3\n").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let body: Value = serde_json::from_slice(&body).unwrap();
    assert!(body["error"].as_str().unwrap().contains("row"));
}

#[tokio::test]
async fn running_example() {
    let (app, id) = with_cars().await;
    let (status, body) = synthesize(&app, json!({"dataset_id": id, "query": QUERY})).await;
    assert_eq!(status, StatusCode::OK);
    let results = body["results"].as_array().unwrap();
    assert!(!results.is_empty() && results.len() <= 10);
    assert!(results.iter().any(|r| {
        r["vega"]["mark"] == "bar"
            && r["vega"]["encoding"]["x"]["field"] == "Origin"
            && r["vega"]["encoding"]["y"]["field"] == "Fuel_economy"
            && r["vega"]["encoding"]["column"]["field"] == "Body_style"
            && r["program"]["steps"][0]["op"] == "select"
    }));
}

#[tokio::test]
async fn spec_documents_are_accepted() {
    let (app, id) = with_cars().await;
    let specs: Value = serde_json::from_str(
        &std::fs::read_to_string(fixture("running_example.spec.json")).unwrap(),
    )
    .unwrap();
    let (status, body) = synthesize(&app, json!({"dataset_id": id, "specs": specs})).await;
    assert_eq!(status, StatusCode::OK);
    assert!(!body["results"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn error_statuses() {
    let (app, id) = with_cars().await;
    let cases = [
        (
            json!({"dataset_id": "nope", "query": QUERY}),
            StatusCode::NOT_FOUND,
        ),
        (json!({"dataset_id": id}), StatusCode::BAD_REQUEST),
        (
            json!({"dataset_id": id, "query": "x", "specs": {}}),
            StatusCode::BAD_REQUEST,
        ),
        (
            json!({"dataset_id": id, "query": "x", "colour": 1}),
            StatusCode::BAD_REQUEST,
        ),
        (
            json!({"dataset_id": id, "specs": {"version": 1, "specs": []}}),
            StatusCode::BAD_REQUEST,
        ),
        (
            json!({"dataset_id": id, "specs": {"specs": [{"prob": 2}]}}),
            StatusCode::BAD_REQUEST,
        ),
        (
            json!({"dataset_id": id, "query": "x", "config": {"max_results": 0}}),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            json!({"dataset_id": id, "query": "x", "config": {"ablation": ["fast"]}}),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
    ];
    for (body, expected) in cases {
        let (status, reply) = synthesize(&app, body.clone()).await;
        assert_eq!(status, expected, "{body}");
        assert!(reply["error"].is_string());
    }
    let (status, _) = post(&app, "/synthesize", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn lemmas_carry_over_between_requests() {
    let (app, id) = with_cars().await;
    let specs: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("overlapping.spec.json")).unwrap())
            .unwrap();
    let body = json!({"dataset_id": id, "specs": specs, "config": {"max_expansions": 20000}});
    let (_, first) = synthesize(&app, body.clone()).await;
    let (_, second) = synthesize(&app, body).await;
    let learned = first["counters"]["lemmas_learned"].as_u64().unwrap();
    assert!(learned > 0);
    assert_eq!(second["counters"]["lemmas_learned"], 0);
    assert!(second["counters"]["prunes_by_lemma"].as_u64().unwrap() >= learned);
    assert!(
        second["counters"]["expansions"].as_u64().unwrap()
            < first["counters"]["expansions"].as_u64().unwrap()
    );
    assert_eq!(first["results"], second["results"]);
}

#[tokio::test]
async fn matches_the_command_line_byte_for_byte() {
    let (app, id) = with_cars().await;
    let (status, body) = post(
        &app,
        "/synthesize",
        json!({"dataset_id": id, "query": QUERY, "config": {"max_results": 10}, "deterministic": true})
            .to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let out = Command::new(env!("CARGO_BIN_EXE_plotsynth"))
        .args(["synthesize", "--data"])
        .arg(fixture("cars.csv"))
        .args([
            "--query",
            QUERY,
            "--max-results",
            "10",
            "--seedless-determinism",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(body).unwrap(),
        String::from_utf8(out.stdout).unwrap()
    );
}

#[tokio::test]
async fn data_dir_is_loaded() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("cars.csv"), dir.path().join("cars.csv")).unwrap();
    std::fs::copy(fixture("sales.csv"), dir.path().join("sales.csv")).unwrap();
    std::fs::write(dir.path().join("notes.txt"), "skip").unwrap();
    let state = Arc::new(AppState::new());
    assert_eq!(state.load_dir(dir.path()).unwrap(), 2);
    let names: Vec<String> = state.list().into_iter().map(|d| d.name).collect();
    assert!(names.contains(&"cars".to_string()) && names.contains(&"sales".to_string()));
}

fn published(component: &str) -> jsonschema::Validator {
    let mut doc: Value = serde_json::from_str(include_str!("../../../docs/openapi.json")).unwrap();
    doc["$schema"] = json!("https://json-schema.org/draft/2020-12/schema");
    doc["$ref"] = json!(format!("#/components/schemas/{component}"));
    jsonschema::validator_for(&doc).unwrap()
}

#[tokio::test]
async fn responses_match_the_published_description() {
    let doc: Value = serde_json::from_str(include_str!("../../../docs/openapi.json")).unwrap();
    let mut routes: Vec<(String, String)> = doc["paths"]
        .as_object()
        .unwrap()
        .iter()
        .flat_map(|(path, ops)| {
            ops.as_object()
                .unwrap()
                .keys()
                .map(move |m| (path.clone(), m.clone()))
        })
        .collect();
    routes.sort();
    assert_eq!(
        routes,
        [
            ("/datasets".to_string(), "get".to_string()),
            ("/datasets".to_string(), "post".to_string()),
            ("/health".to_string(), "get".to_string()),
            ("/synthesize".to_string(), "post".to_string()),
        ]
    );

    let (app, id) = with_cars().await;
    let (_, list) = get(&app, "/datasets").await;
    let info = published("DatasetInfo");
    assert!(list.as_array().unwrap().iter().all(|d| info.is_valid(d)));

    let (status, result) = synthesize(
        &app,
        json!({"dataset_id": id, "query": QUERY, "config": {"max_results": 3}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let errors: Vec<String> = published("SessionResult")
        .iter_errors(&result)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{errors:?}");
    assert!(!published("SessionResult").is_valid(&json!({"version": 1})));
}
