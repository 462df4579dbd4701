#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "airtwin/game/session.hpp"
#include "airtwin/service/event_feed.hpp"

namespace airtwin::service {

/// Immutable view of a session after a tick, shared with request handlers.
struct Snapshot {
  nlohmann::json state;
  /// Serialized reading payload per sensor id.
  std::map<std::string, std::string, std::less<>> readings;
  nlohmann::json bubbles;
  std::shared_ptr<const sim::ConcentrationField> field;
  scenario::ProbeLayout probes;
  bool running = true;
};

/// Owns one session. In threaded mode a tick loop advances it in wall time;
/// in manual mode the caller steps it. Commands are queued and applied at
/// the next tick boundary either way.
class SessionRunner {
 public:
  struct Options {
    bool manual = false;
    /// Wall seconds between ticks of the loop.
    double tick_wall_s = 0.05;
    std::size_t event_capacity = 1 << 16;
    /// NDJSON event log written as events are published.
    std::optional<std::filesystem::path> log_path;
  };

  SessionRunner(std::unique_ptr<game::Session> session, Options options);
  ~SessionRunner();
  SessionRunner(const SessionRunner&) = delete;
  SessionRunner& operator=(const SessionRunner&) = delete;

  const std::string& id() const { return id_; }
  std::shared_ptr<const Snapshot> snapshot() const;
  const EventFeed& feed() const { return feed_; }

  /// Queues a command; the future resolves once it has been applied.
  std::future<game::CommandResult> submit(game::Command command);
  /// Manual mode: applies queued commands and runs n ticks.
  void step(int n = 1);
  /// Manual mode: applies queued commands without ticking.
  void pump();
  /// Ends the session (if still running) and stops the loop.
  void shutdown();

 private:
  void loop();
  void drain_commands();
  void publish();

  std::string id_;
  Options options_;
  std::unique_ptr<game::Session> session_;
  std::mutex session_mu_;

  std::mutex queue_mu_;
  std::deque<std::pair<game::Command, std::promise<game::CommandResult>>> queue_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;

  EventFeed feed_;
  std::uint64_t published_seq_ = 0;
  std::ofstream log_;

  std::atomic<bool> stop_{false};
  std::thread thread_;
};

struct ServiceConfig {
  /// Scenario of the session started at construction; empty starts none.
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  std::optional<double> time_scale;
  SessionRunner::Options runner;
  std::optional<std::filesystem::path> log_dir;
  /// Static files served at "/".
  std::optional<std::filesystem::path> www_dir;
};

/// Transport-independent request and response, so handlers can be exercised
/// without sockets.
struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class DeviceService {
 public:
  explicit DeviceService(ServiceConfig config);
  ~DeviceService();

  /// Starts a session and makes it the active one; the previous active
  /// session ends. Returns its id.
  std::string start_session(const std::string& scenario, const std::string& mode, std::uint64_t seed,
                            bool paused = false);
  std::shared_ptr<SessionRunner> runner(const std::string& id) const;
  std::shared_ptr<SessionRunner> active() const;

  Response handle(const Request& request);

  /// Binds and serves until stop(). Port 0 picks a free port; see port().
  void listen(const std::string& host, int port);
  /// Binds, then serves on a background thread. Returns the bound port.
  int start_background(const std::string& host, int port);
  int port() const { return port_; }
  void stop();

 private:
  Response get_measure(const std::string& device_id);
  Response get_session(const std::string& id);
  Response post_session(const std::string& body);
  Response post_action(const std::string& body);
  Response get_bubbles(const std::string& id);
  Response get_heatmap(const std::string& id, const std::map<std::string, std::string>& query);
  Response get_events(const std::string& id, const std::map<std::string, std::string>& query);
  void bind(const std::string& host, int port);
  std::string active_id_copy() const;

  ServiceConfig config_;
  std::mutex create_mu_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<SessionRunner>> sessions_;
  std::string active_id_;
  int next_id_ = 1;

  struct Http;
  std::unique_ptr<Http> http_;
  std::thread server_thread_;
  int port_ = 0;
};

}  // namespace airtwin::service
