#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <span>
#include <vector>

#include "airtwin/game/events.hpp"

namespace airtwin::service {

/// Bounded replay buffer of one session's events. One publisher, any number
/// of long-polling readers.
class EventFeed {
 public:
  explicit EventFeed(std::size_t capacity = 1 << 16);

  /// Appends events in order; their seq must continue the feed.
  void publish(std::span<const game::Event> events);
  /// Marks the session as ended; waiting readers wake up.
  void close();

  struct Batch {
    /// Replay impossible: events after `after` already dropped, or the feed
    /// is closed and the reader has seen everything.
    bool gone = false;
    std::vector<game::Event> events;
    std::uint64_t last_seq = 0;
  };
  /// Events with seq > after, waiting up to `wait` for at least one.
  Batch since(std::uint64_t after, std::chrono::milliseconds wait = std::chrono::milliseconds(0)) const;

  std::uint64_t last_seq() const;
  std::uint64_t first_seq() const;
  bool closed() const;

 private:
  Batch collect(std::uint64_t after) const;

  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<game::Event> buffer_;
  std::uint64_t last_seq_ = 0;
  bool closed_ = false;
};

}  // namespace airtwin::service
