use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use morphfab::server::{router, ErrorBody, PipelineResponse};
use morphfab_core::fixtures;
use morphfab_core::mesh::read_stl_triangle_count;
use morphfab_core::pipeline::PipelineConfig;
use morphfab_core::voxel::{serialize_morphology, MorphologySpec};

async fn spawn() -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(PipelineConfig::default())).await.unwrap() });
    format!("http://{addr}")
}

async fn post(base: &str, body: Vec<u8>) -> reqwest::Response {
    reqwest::Client::new().post(format!("{base}/v1/pipeline")).body(body).send().await.unwrap()
}

async fn post_spec(base: &str, spec: &MorphologySpec) -> reqwest::Response {
    post(base, serialize_morphology(spec)).await
}

#[tokio::test]
async fn tripod_returns_blueprint_with_meshes() {
    let base = spawn().await;
    let resp = post_spec(&base, &fixtures::tripod()).await;
    assert_eq!(resp.status(), 200);
    let body: PipelineResponse = resp.json().await.unwrap();
    assert_eq!(body.status, "success");
    assert!(body.failure.is_none());
    assert_eq!(body.reports.len(), 6);
    assert_eq!(body.meshes.len(), 5);
    for mesh in &body.meshes {
        assert_eq!(mesh.format, "stl-base64");
        let bytes = STANDARD.decode(&mesh.data).unwrap();
        let triangles = read_stl_triangle_count(&bytes).unwrap() as usize;
        assert!(triangles > 0);
        assert_eq!(bytes.len(), 84 + 50 * triangles);
    }
    assert_eq!(body.placements.motors.len(), 3);
    assert_eq!(body.placements.electronics.len(), 2);
    assert_eq!(body.routes.len(), 3);
    assert!(body.scores.s_mfg > 0.0);
}

#[tokio::test]
async fn malformed_body_is_rejected() {
    let base = spawn().await;
    let resp = post(&base, b"{not json".to_vec()).await;
    assert_eq!(resp.status(), 400);
    let body: ErrorBody = resp.json().await.unwrap();
    assert_eq!(body.status, "error");

    let resp = post(&base, br#"{"version": 1, "dims": [4, 4, 4]}"#.to_vec()).await;
    assert_eq!(resp.status(), 400);
}

#[tokio::test]
async fn thin_limb_fails_at_electronics() {
    let base = spawn().await;
    let resp = post_spec(&base, &fixtures::thin_limb()).await;
    assert_eq!(resp.status(), 422);
    let body: PipelineResponse = resp.json().await.unwrap();
    assert_eq!(body.status, "failure");
    let failure = body.failure.unwrap();
    assert_eq!(failure.stage, "electronics");
    assert_eq!(failure.reason, "no_controller_host");
    assert!(body.meshes.is_empty());
    assert_eq!(body.reports.last().unwrap().stage.as_str(), "electronics");
}

#[tokio::test]
async fn config_and_health() {
    let base = spawn().await;
    let config: PipelineConfig = reqwest::get(format!("{base}/v1/config")).await.unwrap().json().await.unwrap();
    assert_eq!(config, PipelineConfig::default());
    let health: serde_json::Value = reqwest::get(format!("{base}/v1/health")).await.unwrap().json().await.unwrap();
    assert_eq!(health["status"], "ok");
}

#[tokio::test]
async fn concurrent_requests_are_isolated() {
    let base = spawn().await;
    let (quadruped, ring) = (fixtures::quadruped(), fixtures::ring());
    let (a, b) = tokio::join!(post_spec(&base, &quadruped), post_spec(&base, &ring));
    assert_eq!(a.status(), 200);
    assert_eq!(b.status(), 422);
    let ring: PipelineResponse = b.json().await.unwrap();
    assert_eq!(ring.failure.unwrap().reason, "invalid_tree");
}
