#include "airtwin/service/device_service.hpp"

#include <charconv>
#include <sstream>

#include <httplib.h>

#include "airtwin/error.hpp"
#include "airtwin/game/payload.hpp"

namespace airtwin::service {
namespace {

constexpr auto kCommandTimeout = std::chrono::seconds(5);
constexpr long kMaxWaitMs = 30000;

Response json_response(int status, const nlohmann::json& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& message) { return json_response(status, {{"error", message}}); }

template <typename T>
std::optional<T> parse_int(const std::string& text) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

/// "/api/<route>/<rest>" -> {route, rest}
std::pair<std::string, std::string> split_route(const std::string& path) {
  constexpr std::string_view prefix = "/api/";
  if (path.rfind(prefix, 0) != 0) return {};
  const std::string tail = path.substr(prefix.size());
  const auto slash = tail.find('/');
  if (slash == std::string::npos) return {tail, {}};
  return {tail.substr(0, slash), tail.substr(slash + 1)};
}

}  // namespace

// ---------------------------------------------------------------------------

SessionRunner::SessionRunner(std::unique_ptr<game::Session> session, Options options)
    : id_(session->id()), options_(std::move(options)), session_(std::move(session)), feed_(options_.event_capacity) {
  if (options_.log_path) {
    std::filesystem::create_directories(options_.log_path->parent_path());
    log_.open(*options_.log_path, std::ios::trunc);
    if (!log_) throw Error("cannot write event log " + options_.log_path->string());
  }
  {
    std::lock_guard lock(session_mu_);
    publish();
  }
  if (!options_.manual) thread_ = std::thread([this] { loop(); });
}

SessionRunner::~SessionRunner() { shutdown(); }

std::shared_ptr<const Snapshot> SessionRunner::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

std::future<game::CommandResult> SessionRunner::submit(game::Command command) {
  std::promise<game::CommandResult> promise;
  auto future = promise.get_future();
  std::lock_guard lock(queue_mu_);
  queue_.emplace_back(std::move(command), std::move(promise));
  return future;
}

void SessionRunner::drain_commands() {
  std::deque<std::pair<game::Command, std::promise<game::CommandResult>>> batch;
  {
    std::lock_guard lock(queue_mu_);
    batch.swap(queue_);
  }
  for (auto& [cmd, promise] : batch) {
    try {
      promise.set_value(session_->submit(cmd));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
}

void SessionRunner::step(int n) {
  std::lock_guard lock(session_mu_);
  drain_commands();
  session_->run_ticks(n);
  publish();
}

void SessionRunner::pump() {
  std::lock_guard lock(session_mu_);
  drain_commands();
  publish();
}

void SessionRunner::loop() {
  auto last = std::chrono::steady_clock::now();
  const auto period = std::chrono::duration<double>(options_.tick_wall_s);
  while (!stop_.load()) {
    std::this_thread::sleep_for(period);
    const auto now = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(now - last).count();
    last = now;
    std::lock_guard lock(session_mu_);
    drain_commands();
    session_->advance(wall);
    publish();
  }
}

void SessionRunner::publish() {
  const auto events = session_->log().since(published_seq_);
  if (!events.empty()) {
    feed_.publish(events);
    if (log_.is_open()) {
      for (const auto& e : events) log_ << game::to_line(e) << '\n';
      log_.flush();
    }
    published_seq_ = events.back().seq;
  }

  auto snap = std::make_shared<Snapshot>();
  snap->state = session_->snapshot();
  for (const auto& s : session_->sensors()) {
    if (auto r = session_->latest_reading(s.device_id())) snap->readings.emplace(s.device_id(), game::serialize_reading(*r));
  }
  snap->bubbles = snap->state["bubbles"];
  snap->field = std::make_shared<const sim::ConcentrationField>(session_->field());
  snap->probes = session_->scenario().probes;
  snap->running = session_->running();
  {
    std::lock_guard lock(snapshot_mu_);
    snapshot_ = std::move(snap);
  }
  if (!session_->running()) feed_.close();
}

void SessionRunner::shutdown() {
  stop_.store(true);
  if (thread_.joinable()) thread_.join();
  std::lock_guard lock(session_mu_);
  drain_commands();
  if (session_->running()) {
    game::Command stop;
    stop.target = "session";
    stop.verb = game::Verb::stop;
    session_->submit(stop);
  }
  publish();
}

// ---------------------------------------------------------------------------

struct DeviceService::Http {
  httplib::Server server;
};

DeviceService::DeviceService(ServiceConfig config) : config_(std::move(config)), http_(std::make_unique<Http>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    const auto out = handle(r);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body, out.content_type);
  };
  http_->server.Get(R"(/api/.*)", forward);
  http_->server.Post(R"(/api/.*)", forward);
  http_->server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
  if (config_.www_dir && !http_->server.set_mount_point("/", config_.www_dir->string())) {
    throw InvalidArgument("cannot serve static files from " + config_.www_dir->string());
  }
  if (!config_.scenario.empty()) start_session(config_.scenario, config_.mode, config_.seed);
}

DeviceService::~DeviceService() {
  stop();
  std::map<std::string, std::shared_ptr<SessionRunner>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  for (auto& [_, runner] : sessions) runner->shutdown();
}

std::string DeviceService::start_session(const std::string& scenario_name, const std::string& mode,
                                         std::uint64_t seed, bool paused) {
  auto sc = scenario::load_scenario(scenario::resolve(scenario_name));
  game::SessionOptions so;
  so.mode = game::parse_mode(mode.empty() ? sc.session.mode : mode);
  so.seed = seed;
  so.time_scale = config_.time_scale;
  so.paused = paused;
  // Ids advance only for sessions that were actually created.
  std::lock_guard create(create_mu_);
  {
    std::lock_guard lock(mu_);
    so.id = "s" + std::to_string(next_id_);
  }
  auto session = std::make_unique<game::Session>(std::move(sc), so);
  auto options = config_.runner;
  if (config_.log_dir) options.log_path = *config_.log_dir / (so.id + ".ndjson");
  auto runner = std::make_shared<SessionRunner>(std::move(session), options);

  std::shared_ptr<SessionRunner> previous;
  {
    std::lock_guard lock(mu_);
    if (auto it = sessions_.find(active_id_); it != sessions_.end()) previous = it->second;
    ++next_id_;
    sessions_[so.id] = runner;
    active_id_ = so.id;
  }
  if (previous) previous->shutdown();
  return so.id;
}

std::shared_ptr<SessionRunner> DeviceService::runner(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string DeviceService::active_id_copy() const {
  std::lock_guard lock(mu_);
  return active_id_;
}

std::shared_ptr<SessionRunner> DeviceService::active() const { return runner(active_id_copy()); }

Response DeviceService::handle(const Request& req) {
  try {
    const auto [route, rest] = split_route(req.path);
    const bool get = req.method == "GET";
    const bool post = req.method == "POST";
    if (route == "measure" && !rest.empty()) return get ? get_measure(rest) : error(405, "method not allowed");
    if (route == "session" && rest.empty()) return post ? post_session(req.body) : error(405, "method not allowed");
    if (route == "session") return get ? get_session(rest) : error(405, "method not allowed");
    if (route == "action" && rest.empty()) return post ? post_action(req.body) : error(405, "method not allowed");
    if (route == "bubbles" && !rest.empty()) return get ? get_bubbles(rest) : error(405, "method not allowed");
    if (route == "heatmap" && !rest.empty()) return get ? get_heatmap(rest, req.query) : error(405, "method not allowed");
    if (route == "events" && !rest.empty()) return get ? get_events(rest, req.query) : error(405, "method not allowed");
    return error(404, "no such endpoint " + req.path);
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response DeviceService::get_measure(const std::string& device_id) {
  const auto runner = active();
  if (!runner) return error(503, "no session is running");
  const auto snap = runner->snapshot();
  if (!snap->running) return error(503, "session " + runner->id() + " is not running");
  const auto it = snap->readings.find(device_id);
  if (it == snap->readings.end()) return error(404, "unknown device '" + device_id + "'");
  return {200, it->second, "application/json"};
}

Response DeviceService::get_session(const std::string& id) {
  const auto r = runner(id);
  if (!r) return error(404, "unknown session '" + id + "'");
  return json_response(200, r->snapshot()->state);
}

Response DeviceService::post_session(const std::string& body) {
  nlohmann::json j = nlohmann::json::object();
  if (!body.empty()) {
    j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return error(400, "body must be a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "scenario" && key != "mode" && key != "seed" && key != "paused") {
      return error(400, "unknown field '" + key + "'");
    }
  }
  std::string scenario_name = config_.scenario;
  std::string mode;
  std::uint64_t seed = config_.seed;
  bool paused = false;
  if (j.contains("scenario")) {
    if (!j["scenario"].is_string()) return error(400, "'scenario' must be a string");
    scenario_name = j["scenario"].get<std::string>();
  }
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) return error(400, "'mode' must be a string");
    mode = j["mode"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) return error(400, "'seed' must be a non-negative integer");
    seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("paused")) {
    if (!j["paused"].is_boolean()) return error(400, "'paused' must be a boolean");
    paused = j["paused"].get<bool>();
  }
  if (scenario_name.empty()) return error(400, "no scenario given");
  std::string id;
  try {
    id = start_session(scenario_name, mode, seed, paused);
  } catch (const scenario::ScenarioError& e) {
    return error(e.field() == "scenario" ? 404 : 400, e.what());
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  }
  return json_response(201, {{"id", id}, {"session", runner(id)->snapshot()->state}});
}

Response DeviceService::post_action(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) return error(400, "body is not valid JSON");
  game::CommandResult parsed;
  auto cmd = game::parse_command(j, parsed);
  if (!cmd) return error(game::http_status(parsed.status), parsed.message);
  const std::string sid = cmd->session_id.empty() ? active_id_copy() : cmd->session_id;
  const auto r = runner(sid);
  if (!r) return error(404, "unknown session '" + sid + "'");
  cmd->session_id = sid;
  auto future = r->submit(*cmd);
  if (config_.runner.manual) r->pump();
  if (future.wait_for(kCommandTimeout) != std::future_status::ready) return error(503, "session did not respond");
  const auto result = future.get();
  if (!result.ok()) return error(game::http_status(result.status), result.message);
  return json_response(200, {{"ok", true}, {"target", cmd->target}, {"verb", std::string(game::to_string(cmd->verb))},
                             {"state", result.state}, {"t", r->snapshot()->state["t"]}});
}

Response DeviceService::get_bubbles(const std::string& id) {
  const auto r = runner(id);
  if (!r) return error(404, "unknown session '" + id + "'");
  const auto snap = r->snapshot();
  return json_response(200, {{"session_id", id}, {"t", snap->state["t"]}, {"bubbles", snap->bubbles}});
}

Response DeviceService::get_heatmap(const std::string& id, const std::map<std::string, std::string>& query) {
  const auto r = runner(id);
  if (!r) return error(404, "unknown session '" + id + "'");
  const auto it = query.find("height");
  const std::string label = it == query.end() ? "T" : it->second;
  scenario::HeightLayer layer;
  try {
    layer = scenario::parse_height(label);
  } catch (const InvalidArgument& e) {
    return error(400, e.what());
  }
  const auto snap = r->snapshot();
  const auto grid = game::heatmap_snapshot(*snap->field, snap->probes, layer);
  nlohmann::json rows = nlohmann::json::array();
  for (int row = 0; row < grid.rows; ++row) {
    nlohmann::json cells = nlohmann::json::array();
    for (int c = 0; c < grid.cols; ++c) cells.push_back(grid.at(row, c));
    rows.push_back(std::move(cells));
  }
  return json_response(200, {{"session_id", id},
                             {"t", snap->field->t},
                             {"height", std::string(1, scenario::label(layer))},
                             {"height_m", grid.height_m},
                             {"rows", grid.rows},
                             {"cols", grid.cols},
                             {"ppm", rows}});
}

Response DeviceService::get_events(const std::string& id, const std::map<std::string, std::string>& query) {
  const auto r = runner(id);
  if (!r) return error(404, "unknown session '" + id + "'");
  std::uint64_t since = 0;
  long wait_ms = 0;
  if (auto it = query.find("since"); it != query.end()) {
    const auto v = parse_int<std::uint64_t>(it->second);
    if (!v) return error(400, "'since' must be a non-negative integer");
    since = *v;
  }
  if (auto it = query.find("wait_ms"); it != query.end()) {
    const auto v = parse_int<long>(it->second);
    if (!v || *v < 0) return error(400, "'wait_ms' must be a non-negative integer");
    wait_ms = std::min(*v, kMaxWaitMs);
  }
  const auto batch = r->feed().since(since, std::chrono::milliseconds(wait_ms));
  if (batch.gone) {
    return json_response(410, {{"error", "events after " + std::to_string(since) + " are gone"},
                               {"last_seq", batch.last_seq}});
  }
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : batch.events) events.push_back(game::to_json(e));
  return json_response(200, {{"session_id", id}, {"events", events}, {"last_seq", batch.last_seq}});
}

void DeviceService::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = http_->server.bind_to_any_port(host);
  } else if (http_->server.bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
}

void DeviceService::listen(const std::string& host, int port) {
  bind(host, port);
  http_->server.listen_after_bind();
}

int DeviceService::start_background(const std::string& host, int port) {
  bind(host, port);
  server_thread_ = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return port_;
}

void DeviceService::stop() {
  http_->server.stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace airtwin::service
