//! In-process HTTP stub of the model service.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread;

type Handler = dyn Fn(&str, &str, usize) -> (u16, String) + Send + Sync;

pub struct Stub {
    pub url: String,
    server: Arc<tiny_http::Server>,
    log: Arc<Mutex<Vec<(String, String)>>>,
    worker: Option<thread::JoinHandle<()>>,
}

impl Stub {
    /// `handler(path, body, nth call to this path)` gives status and body.
    pub fn start(handler: impl Fn(&str, &str, usize) -> (u16, String) + Send + Sync + 'static) -> Stub {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let log = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let (srv, lg) = (server.clone(), log.clone());
        let worker = thread::spawn(move || {
            let counts = Arc::new(Mutex::new(HashMap::<String, usize>::new()));
            for mut req in srv.incoming_requests() {
                let (h, lg, counts) = (handler.clone(), lg.clone(), counts.clone());
                thread::spawn(move || {
                    let mut body = String::new();
                    req.as_reader().read_to_string(&mut body).unwrap();
                    let path = req.url().to_string();
                    let n = {
                        let mut c = counts.lock().unwrap();
                        let e = c.entry(path.clone()).or_default();
                        *e += 1;
                        *e - 1
                    };
                    lg.lock().unwrap().push((path.clone(), body.clone()));
                    let (status, out) = h(&path, &body, n);
                    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let _ =
                        req.respond(tiny_http::Response::from_string(out).with_status_code(status).with_header(header));
                });
            }
        });
        Stub { url: format!("http://127.0.0.1:{port}"), server, log, worker: Some(worker) }
    }

    pub fn calls(&self, path: &str) -> Vec<String> {
        self.log.lock().unwrap().iter().filter(|(p, _)| p == path).map(|(_, b)| b.clone()).collect()
    }
}

impl Drop for Stub {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
