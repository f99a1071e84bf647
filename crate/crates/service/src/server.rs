use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tower_http::services::ServeDir;
use tuner_core::audio::{CaptureGate, CaptureReservation, CaptureSource};
use tuner_core::{GuitarString, Tuner64, TunerError};

use crate::protocol::{ClientMessage, ErrorCode, ResultMessage, ServerMessage, PROTOCOL_VERSION};
use crate::session::{SessionError, SessionState, TestOutcome};

const INDEX_PAGE: &str = include_str!("../assets/index.html");

/// Default recording length per test, in seconds.
pub const DEFAULT_CAPTURE_SECONDS: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub capture_seconds: f64,
    /// Directory of static UI assets served at `/`.
    pub assets_dir: Option<PathBuf>,
    pub tuner: Tuner64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            capture_seconds: DEFAULT_CAPTURE_SECONDS,
            assets_dir: None,
            tuner: Tuner64::default(),
        }
    }
}

/// Shared by every connection of one service instance.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    source: Arc<dyn CaptureSource>,
    gate: CaptureGate,
    config: ServiceConfig,
}

impl AppState {
    /// Uses a private capture gate, so independent instances never contend.
    pub fn new(source: Arc<dyn CaptureSource>, config: ServiceConfig) -> Self {
        Self::with_gate(source, CaptureGate::new(), config)
    }

    pub fn with_gate(
        source: Arc<dyn CaptureSource>,
        gate: CaptureGate,
        config: ServiceConfig,
    ) -> Self {
        Self {
            inner: Arc::new(Inner {
                source,
                gate,
                config,
            }),
        }
    }

    pub fn source(&self) -> &dyn CaptureSource {
        self.inner.source.as_ref()
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub version: String,
    pub device: bool,
    pub protocol: u32,
}

pub fn router(state: AppState) -> Router {
    let app = Router::new()
        .route("/health", get(health))
        .route("/ws", get(ws_upgrade));
    let app = match &state.config().assets_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(index)),
    };
    app.with_state(state)
}

/// Binds a listener, mapping "address in use" to a readable message.
pub async fn bind(addr: SocketAddr) -> io::Result<TcpListener> {
    TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == io::ErrorKind::AddrInUse {
            io::Error::new(e.kind(), format!("{addr} is already in use"))
        } else {
            e
        }
    })
}

/// Runs until `shutdown` resolves.
pub async fn serve<F>(listener: TcpListener, state: AppState, shutdown: F) -> io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    if let Ok(addr) = listener.local_addr() {
        log::info!("listening on {addr}");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut sig) => {
                sig.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}

async fn health(State(state): State<AppState>) -> Json<HealthStatus> {
    let source = state.inner.source.clone();
    let device = tokio::task::spawn_blocking(move || source.is_available())
        .await
        .unwrap_or(false);
    Json(HealthStatus {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        device,
        protocol: PROTOCOL_VERSION,
    })
}

async fn index() -> Html<&'static str> {
    Html(INDEX_PAGE)
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| run_session(socket, state))
        .into_response()
}

enum TestEvent {
    Stopped(GuitarString),
    Finished {
        message: ServerMessage,
        outcome: TestOutcome,
    },
}

async fn run_session(socket: WebSocket, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    let (events_tx, mut events_rx) = mpsc::unbounded_channel();
    let mut session = SessionState::default();

    loop {
        let replies = tokio::select! {
            frame = stream.next() => match frame {
                Some(Ok(Message::Text(text))) => {
                    handle_frame(&mut session, &state, &events_tx, text.as_str())
                }
                Some(Ok(Message::Binary(_))) => vec![ServerMessage::error(
                    ErrorCode::BadRequest,
                    "binary frames are not supported",
                )],
                Some(Ok(_)) => continue,
                Some(Err(_)) | None => break,
            },
            Some(event) = events_rx.recv() => handle_event(&mut session, event),
        };
        for reply in replies {
            if sink
                .send(Message::Text(reply.to_json().into()))
                .await
                .is_err()
            {
                return;
            }
        }
    }
}

fn handle_frame(
    session: &mut SessionState,
    state: &AppState,
    events: &mpsc::UnboundedSender<TestEvent>,
    text: &str,
) -> Vec<ServerMessage> {
    let message = match ClientMessage::from_json(text) {
        Ok(m) => m,
        Err(reply) => return vec![reply],
    };
    match message {
        ClientMessage::SelectString { string } => match session.select_string(&string) {
            Ok(s) => vec![ServerMessage::Ack {
                string: s.name().into(),
                target: s.target_hz(),
            }],
            Err(e) => vec![session_error(e)],
        },
        ClientMessage::StartTest => start_test(session, state, events),
    }
}

fn session_error(e: SessionError) -> ServerMessage {
    let code = match e {
        SessionError::UnknownString(_) => ErrorCode::Validation,
        SessionError::WrongPhase { .. } => ErrorCode::State,
        SessionError::NoStringSelected => ErrorCode::NoStringSelected,
    };
    ServerMessage::error(code, e.to_string())
}

fn start_test(
    session: &mut SessionState,
    state: &AppState,
    events: &mpsc::UnboundedSender<TestEvent>,
) -> Vec<ServerMessage> {
    let string = match session.ready_to_test() {
        Ok(s) => s,
        Err(e @ SessionError::WrongPhase { .. }) => {
            return vec![ServerMessage::Busy {
                message: e.to_string(),
            }]
        }
        Err(e) => return vec![session_error(e)],
    };
    let reservation = match state.inner.gate.try_reserve() {
        Ok(r) => r,
        Err(e) => {
            return vec![ServerMessage::Busy {
                message: e.to_string(),
            }]
        }
    };
    if !state.source().is_available() {
        return vec![ServerMessage::error(
            ErrorCode::DeviceUnavailable,
            format!("no capture device: {}", state.source().describe()),
        )];
    }
    session
        .begin_recording()
        .expect("readiness was checked on this session");
    tokio::spawn(run_test(state.clone(), string, reservation, events.clone()));
    vec![ServerMessage::RecordingStarted {
        string: string.name().into(),
        duration: state.config().capture_seconds,
    }]
}

async fn run_test(
    state: AppState,
    string: GuitarString,
    reservation: CaptureReservation,
    events: mpsc::UnboundedSender<TestEvent>,
) {
    let capture_state = state.clone();
    let captured = tokio::task::spawn_blocking(move || {
        let config = capture_state.config();
        let result = reservation.capture::<f64>(
            capture_state.source(),
            config.capture_seconds,
            &config.tuner.analysis,
        );
        drop(reservation);
        result
    })
    .await;
    let _ = events.send(TestEvent::Stopped(string));

    let (message, outcome) = match captured {
        Ok(Ok(buffer)) => {
            let analyzed =
                tokio::task::spawn_blocking(move || state.config().tuner.analyze(&buffer, string))
                    .await;
            match analyzed {
                Ok(Ok(analysis)) => {
                    let result = ResultMessage::from_analysis(&analysis);
                    (
                        ServerMessage::Result(result.clone()),
                        TestOutcome::Result(Box::new(result)),
                    )
                }
                Ok(Err(TunerError::NoSignal)) => (
                    ServerMessage::NoSignal {
                        string: string.name().into(),
                    },
                    TestOutcome::NoSignal,
                ),
                Ok(Err(e)) => (
                    ServerMessage::error(ErrorCode::Analysis, e.to_string()),
                    TestOutcome::Failed,
                ),
                Err(e) => (
                    ServerMessage::error(ErrorCode::Analysis, format!("analysis task failed: {e}")),
                    TestOutcome::Failed,
                ),
            }
        }
        Ok(Err(e)) => {
            let code = match e {
                TunerError::DeviceUnavailable(_) => ErrorCode::DeviceUnavailable,
                _ => ErrorCode::Capture,
            };
            (
                ServerMessage::error(code, e.to_string()),
                TestOutcome::Failed,
            )
        }
        Err(e) => (
            ServerMessage::error(ErrorCode::Capture, format!("capture task failed: {e}")),
            TestOutcome::Failed,
        ),
    };
    let _ = events.send(TestEvent::Finished { message, outcome });
}

fn handle_event(session: &mut SessionState, event: TestEvent) -> Vec<ServerMessage> {
    match event {
        TestEvent::Stopped(string) => {
            if let Err(e) = session.recording_stopped() {
                log::warn!("unexpected recording_stopped: {e}");
            }
            vec![ServerMessage::RecordingStopped {
                string: string.name().into(),
            }]
        }
        TestEvent::Finished { message, outcome } => {
            if let Err(e) = session.finish(outcome) {
                log::warn!("unexpected test completion: {e}");
            }
            vec![message]
        }
    }
}
