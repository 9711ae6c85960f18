#pragma once

// In-process message passing between simulated ranks.
//
// Point-to-point channels are ordered and reliable per (sender, receiver)
// pair. Sends never block. A failing rank aborts the communicator, which
// wakes every blocked receiver with CommAborted.

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <vector>

#include "ccc/error.hpp"

namespace ccc {

using Message = std::vector<std::uint64_t>;

class CommAborted : public Error {
 public:
  CommAborted() : Error("communicator aborted") {}
};

class Comm {
 public:
  explicit Comm(std::size_t num_ranks, bool blocking = true);

  std::size_t num_ranks() const { return num_ranks_; }

  void send(std::size_t from, std::size_t to, Message message);
  /// Next message from `from` to `to`. In non-blocking mode an empty channel
  /// is an error (used when ranks run one after another).
  Message recv(std::size_t to, std::size_t from);

  void abort();
  bool aborted() const;
  std::uint64_t messages_sent() const;

 private:
  struct Channel {
    std::deque<Message> queue;
  };

  Channel& channel(std::size_t from, std::size_t to) { return channels_[from * num_ranks_ + to]; }

  std::size_t num_ranks_;
  bool blocking_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Channel> channels_;
  bool aborted_ = false;
  std::uint64_t sent_ = 0;
};

enum class ExecMode { threaded, sequential };

/// Runs body(rank, stage) for every rank and stage, with a barrier between
/// stages. Threaded mode gives each rank its own thread; sequential mode
/// runs ranks in order within each stage. The first failure is rethrown as
/// RunAborted carrying the failing rank.
void run_ranks(Comm& comm, std::size_t num_stages, ExecMode mode,
               const std::function<void(std::size_t rank, std::size_t stage)>& body);

}  // namespace ccc
