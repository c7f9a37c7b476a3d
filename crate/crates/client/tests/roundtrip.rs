use reqwest::StatusCode;
use tokio::sync::oneshot;

use vqa_client::VqaClient;
use vqa_core::catalog::ConfigId;
use vqa_core::session::{Btc, BtcTiming, SessionPlan, VoteSubmission};
use vqa_service::{serve_on, AppState};

fn plan() -> SessionPlan {
    let btc = |i: u32, scene: &str| Btc {
        btc_index: i,
        scene_id: scene.into(),
        test_config: ConfigId::Downscaled4K,
        a_is_reference: false,
    };
    SessionPlan {
        seed: 1,
        timing: BtcTiming::default(),
        sessions: vec![vec![btc(1, "A"), btc(2, "B")], vec![btc(3, "A"), btc(4, "B")]],
    }
}

async fn start(dir: &std::path::Path) -> (VqaClient, oneshot::Sender<()>, tokio::task::JoinHandle<()>) {
    let state = AppState::open(plan(), dir.join("votes.jsonl")).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = oneshot::channel();
    let handle = tokio::spawn(async move {
        serve_on(state, listener, async {
            rx.await.ok();
        })
        .await
        .unwrap();
    });
    (VqaClient::new(format!("http://{addr}/")), tx, handle)
}

fn vote(observer: &str, btc: u32, a: f64, b: f64) -> VoteSubmission {
    VoteSubmission {
        observer_id: observer.into(),
        btc_index: btc,
        score_a: a,
        score_b: b,
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn session_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (client, stop, handle) = start(dir.path()).await;

    assert_eq!(client.plan().await.unwrap(), plan());
    let playlist = client.playlist(2).await.unwrap();
    assert_eq!(playlist.btcs.iter().map(|b| b.btc_index).collect::<Vec<_>>(), [3, 4]);
    assert_eq!(client.btc(4).await.unwrap().position, 2);
    assert_eq!(client.btc(5).await.unwrap_err().status(), Some(StatusCode::NOT_FOUND));

    client.register("obs01").await.unwrap();
    client.register("obs01").await.unwrap();
    let stored = client.submit_vote(&vote("obs01", 3, 85.0, 60.0)).await.unwrap();
    assert_eq!((stored.btc_index, stored.score_a, stored.score_b), (3, 85.0, 60.0));

    let dup = client.submit_vote(&vote("obs01", 3, 85.0, 60.0)).await.unwrap_err();
    assert!(dup.is_conflict(), "{dup}");
    let bad = client.submit_vote(&vote("obs01", 4, 85.0, 100.5)).await.unwrap_err();
    assert_eq!(bad.status(), Some(StatusCode::UNPROCESSABLE_ENTITY));
    assert!(bad.to_string().contains("score_b"), "{bad}");
    let stranger = client.submit_vote(&vote("nobody", 4, 1.0, 1.0)).await.unwrap_err();
    assert_eq!(stranger.status(), Some(StatusCode::NOT_FOUND));

    assert_eq!(client.export().await.unwrap(), vec![stored]);

    stop.send(()).unwrap();
    handle.await.unwrap();
    assert!(client.plan().await.is_err());
}

#[tokio::test(flavor = "multi_thread")]
async fn unreachable_service() {
    let client = VqaClient::new("http://127.0.0.1:9");
    let err = client.plan().await.unwrap_err();
    assert!(err.status().is_none());
}
