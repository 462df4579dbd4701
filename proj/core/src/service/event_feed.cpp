#include "airtwin/service/event_feed.hpp"

#include "airtwin/error.hpp"

namespace airtwin::service {

EventFeed::EventFeed(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidArgument("event feed capacity must be positive");
}

void EventFeed::publish(std::span<const game::Event> events) {
  if (events.empty()) return;
  {
    std::lock_guard lock(mu_);
    for (const auto& e : events) {
      if (e.seq != last_seq_ + 1) throw InvalidArgument("event feed sequence gap");
      buffer_.push_back(e);
      last_seq_ = e.seq;
      if (buffer_.size() > capacity_) buffer_.pop_front();
    }
  }
  cv_.notify_all();
}

void EventFeed::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

EventFeed::Batch EventFeed::collect(std::uint64_t after) const {
  Batch batch;
  batch.last_seq = last_seq_;
  const std::uint64_t first = buffer_.empty() ? last_seq_ + 1 : buffer_.front().seq;
  if (after + 1 < first) {
    batch.gone = true;
    return batch;
  }
  for (const auto& e : buffer_) {
    if (e.seq > after) batch.events.push_back(e);
  }
  batch.gone = batch.events.empty() && closed_;
  return batch;
}

EventFeed::Batch EventFeed::since(std::uint64_t after, std::chrono::milliseconds wait) const {
  std::unique_lock lock(mu_);
  if (wait.count() > 0) cv_.wait_for(lock, wait, [&] { return last_seq_ > after || closed_; });
  return collect(after);
}

std::uint64_t EventFeed::last_seq() const {
  std::lock_guard lock(mu_);
  return last_seq_;
}

std::uint64_t EventFeed::first_seq() const {
  std::lock_guard lock(mu_);
  return buffer_.empty() ? last_seq_ + 1 : buffer_.front().seq;
}

bool EventFeed::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

}  // namespace airtwin::service
