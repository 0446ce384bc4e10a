use cfsim::cf_engine::CfParams;
use cfsim::verifier::{Experiment, ExperimentConfig, ExperimentEntry};
use cfsim_client::{Client, ClientError};

async fn client() -> Client {
    let addr = cfsim_server::spawn("127.0.0.1:0".parse().unwrap()).await.unwrap();
    Client::new(format!("http://{addr}/"))
}

#[tokio::test]
async fn run_over_the_wire_matches_local_run() {
    let c = client().await;
    assert!(c.health().await.unwrap());
    let cfg = ExperimentConfig {
        mc_samples: 2_000,
        experiments: vec![ExperimentEntry::new(Experiment::SquareRoots), ExperimentEntry::new(Experiment::Fubini)],
        ..Default::default()
    };
    let remote = c.run(&cfg).await.unwrap().into_reports();
    let local = cfsim::verifier::run_all(&cfg).unwrap();
    assert_eq!(remote, local);
    assert_eq!(remote[1].tables.len(), 1);
}

#[tokio::test]
async fn server_errors_surface_as_messages() {
    let c = client().await;
    let err = c.run(&ExperimentConfig { experiments: vec![], ..Default::default() }).await.unwrap_err();
    match err {
        ClientError::Server { status, message } => assert_eq!((status, message.contains("no experiments")), (400, true)),
        e => panic!("{e}"),
    }
    let v = c.validate_cf(&CfParams::default()).await.unwrap();
    assert!(v.pass);
    assert_eq!(c.levels(&CfParams::default()).await.unwrap().len(), 9);
    let d = c.discrepancy(1, vec![vec![0.5]]).await.unwrap();
    assert_eq!((d.n, d.star), (1, 0.5));
    assert_eq!(c.experiments().await.unwrap().experiments.len(), 11);
    assert!(matches!(Client::new("http://127.0.0.1:1").health().await, Err(ClientError::Transport(_))));
}
