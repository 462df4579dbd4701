#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "airtwin/service/device_service.hpp"
#include "airtwin/service/event_feed.hpp"

using namespace airtwin;
using namespace airtwin::service;

namespace {

ServiceConfig manual_config(std::string scenario = "R2", std::size_t capacity = 1 << 16) {
  ServiceConfig c;
  c.scenario = std::move(scenario);
  c.seed = 9;
  c.runner.manual = true;
  c.runner.event_capacity = capacity;
  return c;
}

Response get(DeviceService& s, std::string path, std::map<std::string, std::string> query = {}) {
  return s.handle({"GET", std::move(path), std::move(query), ""});
}

Response post(DeviceService& s, std::string path, std::string body) {
  return s.handle({"POST", std::move(path), {}, std::move(body)});
}

nlohmann::json body(const Response& r) { return nlohmann::json::parse(r.body); }

std::vector<game::Event> events(std::uint64_t first, std::uint64_t last) {
  std::vector<game::Event> out;
  for (auto s = first; s <= last; ++s) out.push_back({s, static_cast<double>(s), "k", nlohmann::json::object()});
  return out;
}

}  // namespace

TEST(EventFeed, ReplayAndGone) {
  EventFeed feed(4);
  const auto first = events(1, 3);
  feed.publish(first);
  auto b = feed.since(1);
  ASSERT_EQ(b.events.size(), 2u);
  EXPECT_EQ(b.events.front().seq, 2u);
  EXPECT_TRUE(feed.since(3).events.empty());
  EXPECT_FALSE(feed.since(3).gone);
  const auto more = events(4, 7);
  feed.publish(more);
  EXPECT_EQ(feed.first_seq(), 4u);
  EXPECT_TRUE(feed.since(1).gone);
  EXPECT_FALSE(feed.since(3).gone);
  const auto gap = events(9, 9);
  EXPECT_THROW(feed.publish(gap), InvalidArgument);
  feed.close();
  EXPECT_TRUE(feed.since(7).gone);
  EXPECT_EQ(feed.since(5).events.size(), 2u);
}

TEST(EventFeed, LongPollWakes) {
  EventFeed feed;
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    const auto e = events(1, 1);
    feed.publish(e);
  });
  const auto b = feed.since(0, std::chrono::milliseconds(5000));
  writer.join();
  ASSERT_EQ(b.events.size(), 1u);
}

TEST(Service, MeasureLifecycle) {
  DeviceService svc(manual_config());
  auto r = get(svc, "/api/measure/wrist-1");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(body(r)["status"], "warming");
  EXPECT_FALSE(body(r).contains("co2_ppm"));
  EXPECT_EQ(get(svc, "/api/measure/nobody").status, 404);

  svc.active()->step(130);
  r = get(svc, "/api/measure/wrist-1");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(body(r)["status"], "ok");
  EXPECT_TRUE(body(r)["co2_ppm"].is_number());
  EXPECT_EQ(r.body.rfind("{\"device_id\":\"wrist-1\",\"ts_ms\":", 0), 0u);
  EXPECT_EQ(post(svc, "/api/measure/wrist-1", "").status, 405);
  EXPECT_EQ(get(svc, "/api/nothing").status, 404);
}

TEST(Service, NoSession) {
  ServiceConfig c = manual_config("");
  DeviceService svc(c);
  EXPECT_EQ(get(svc, "/api/measure/wrist-1").status, 503);
  EXPECT_EQ(post(svc, "/api/session", R"({"scenario":"nowhere"})").status, 404);
  EXPECT_EQ(post(svc, "/api/session", R"({"scenario":"R2","mode":"heatmap_baseline"})").status, 400);
  EXPECT_EQ(post(svc, "/api/session", R"({"scenario":"R2","colour":1})").status, 400);
  const auto created = post(svc, "/api/session", R"({"scenario":"R1","mode":"heatmap_baseline","seed":3})");
  ASSERT_EQ(created.status, 201);
  EXPECT_EQ(body(created)["id"], "s1");
  EXPECT_EQ(get(svc, "/api/measure/probe-6").status, 200);
}

TEST(Service, ActionsAndEvents) {
  DeviceService svc(manual_config());
  const auto id = svc.active()->id();
  const auto before = body(get(svc, "/api/events/" + id))["last_seq"].get<std::uint64_t>();

  auto r = post(svc, "/api/action", R"({"target":"fan-1","verb":"set_state","args":{"on":true}})");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(body(r)["state"]["on"], true);

  const auto ev = body(get(svc, "/api/events/" + id, {{"since", std::to_string(before)}}));
  ASSERT_FALSE(ev["events"].empty());
  EXPECT_EQ(ev["events"][0]["seq"], before + 1);
  EXPECT_EQ(ev["events"][0]["kind"], "device_state");
  const auto last = ev["last_seq"].get<std::uint64_t>();
  EXPECT_TRUE(body(get(svc, "/api/events/" + id, {{"since", std::to_string(last)}}))["events"].empty());

  EXPECT_EQ(post(svc, "/api/action", R"({"target":"fan-1","verb":"aim","args":{"direction":[0,0,0]}})").status, 400);
  EXPECT_EQ(post(svc, "/api/action", R"({"target":"ghost","verb":"set_state","args":{"on":true}})").status, 404);
  EXPECT_EQ(post(svc, "/api/action", "not json").status, 400);
  svc.active()->step(130);
  ASSERT_EQ(post(svc, "/api/action", R"({"target":"session","verb":"place_bubble"})").status, 200);
  EXPECT_EQ(post(svc, "/api/action", R"({"target":"b1","verb":"set_state","args":{"on":true}})").status, 409);

  const auto bubbles = body(get(svc, "/api/bubbles/" + id));
  ASSERT_EQ(bubbles["bubbles"].size(), 1u);
  EXPECT_EQ(bubbles["bubbles"][0]["id"], 1);

  const auto heat = body(get(svc, "/api/heatmap/" + id, {{"height", "C"}}));
  EXPECT_EQ(heat["height"], "C");
  EXPECT_EQ(heat["ppm"].size(), 3u);
  EXPECT_EQ(get(svc, "/api/heatmap/" + id, {{"height", "X"}}).status, 400);
  EXPECT_EQ(get(svc, "/api/session/" + id).status, 200);
  EXPECT_EQ(get(svc, "/api/session/zzz").status, 404);
}

TEST(Service, TwoSubscribersSeeSameOrder) {
  DeviceService svc(manual_config());
  const auto id = svc.active()->id();
  post(svc, "/api/action", R"({"target":"window-1","verb":"set_state","args":{"on":true}})");
  svc.active()->step(40);
  post(svc, "/api/action", R"({"target":"fan-1","verb":"set_state","args":{"on":true}})");
  const auto a = get(svc, "/api/events/" + id, {{"since", "0"}});
  const auto b = get(svc, "/api/events/" + id, {{"since", "0"}});
  EXPECT_EQ(body(a)["events"], body(b)["events"]);
  std::uint64_t seq = 0;
  for (const auto& e : body(a)["events"]) EXPECT_EQ(e["seq"].get<std::uint64_t>(), ++seq);
}

TEST(Service, ReplayWindowExhausted) {
  DeviceService svc(manual_config("R2", 32));
  const auto id = svc.active()->id();
  svc.active()->step(1000);
  const auto r = get(svc, "/api/events/" + id, {{"since", "0"}});
  EXPECT_EQ(r.status, 410);
  const auto last = body(r)["last_seq"].get<std::uint64_t>();
  EXPECT_EQ(get(svc, "/api/events/" + id, {{"since", std::to_string(last - 1)}}).status, 200);
  EXPECT_EQ(get(svc, "/api/events/" + id, {{"since", "abc"}}).status, 400);
}

TEST(Service, NewSessionEndsPrevious) {
  DeviceService svc(manual_config());
  const auto first = svc.active();
  const auto second = svc.start_session("R2", "", 1);
  EXPECT_NE(first->id(), second);
  EXPECT_FALSE(first->snapshot()->running);
  EXPECT_TRUE(first->feed().closed());
}

TEST(Service, LoopbackHttp) {
  ServiceConfig c;
  c.scenario = "R2";
  c.time_scale = 20.0;
  DeviceService svc(c);
  const int port = svc.start_background("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/measure/wrist-1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto act = client.Post("/api/action", R"({"target":"vent-1","verb":"set_state","args":{"on":true}})",
                         "application/json");
  ASSERT_TRUE(act);
  EXPECT_EQ(act->status, 200);
  auto ev = client.Get("/api/events/s1?since=0&wait_ms=100");
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->status, 200);
  svc.stop();
}
