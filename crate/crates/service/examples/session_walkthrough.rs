//! Drives the HTTP API in-process: create a session, step it, apply a
//! mutation, read metrics back. `cargo run -p modechoice-service --example
//! session_walkthrough`

use axum::body::Body;
use axum::http::{Method, Request};
use axum::Router;
use http_body_util::BodyExt;
use modechoice_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method.clone())
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    println!("{method} {uri} -> {status}");
    v
}

#[tokio::main]
async fn main() {
    let app = router(AppState::new(ServiceConfig::default()));

    let created = call(&app, Method::POST, "/sessions", json!({ "config": { "seed": 7 } })).await;
    let id = created["session_id"].as_str().unwrap().to_string();
    println!("  session {id}, initial shares {}", created["initial_frame"]["modal_share"]);

    call(&app, Method::POST, &format!("/sessions/{id}/step"), json!({ "n": 50 })).await;
    let applied = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/mutations"),
        json!({ "kind": "set-env", "mode": "bike", "criterion": "safety", "value": 9.0 }),
    )
    .await;
    println!("  applied {}", applied["applied"]);
    call(&app, Method::POST, &format!("/sessions/{id}/step"), json!({ "n": 50 })).await;

    let rejected = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/mutations"),
        json!({ "kind": "set-env", "mode": "bike", "criterion": "safety", "value": 12 }),
    )
    .await;
    println!("  {rejected}");

    let m = call(&app, Method::GET, &format!("/sessions/{id}/metrics?from=48&to=52"), Value::Null).await;
    for f in m["frames"].as_array().unwrap() {
        println!("  tick {:>3}  bike share {}", f["tick"], f["modal_share"]["bike"]);
    }
    let log = call(&app, Method::GET, &format!("/sessions/{id}/log"), Value::Null).await;
    print!("  replay script:\n{}", log["script"].as_str().unwrap());
}
