#include "ccc/comm.hpp"

#include <barrier>
#include <exception>
#include <optional>
#include <string>
#include <thread>

namespace ccc {

Comm::Comm(std::size_t num_ranks, bool blocking)
    : num_ranks_(num_ranks), blocking_(blocking), channels_(num_ranks * num_ranks) {}

void Comm::send(std::size_t from, std::size_t to, Message message) {
  if (from >= num_ranks_ || to >= num_ranks_) throw ValidationError("send: rank out of range");
  {
    std::lock_guard lock(mutex_);
    if (aborted_) throw CommAborted();
    channel(from, to).queue.push_back(std::move(message));
    ++sent_;
  }
  cv_.notify_all();
}

Message Comm::recv(std::size_t to, std::size_t from) {
  if (from >= num_ranks_ || to >= num_ranks_) throw ValidationError("recv: rank out of range");
  std::unique_lock lock(mutex_);
  auto& q = channel(from, to).queue;
  if (!blocking_ && q.empty() && !aborted_)
    throw Error("recv from rank " + std::to_string(from) + " would block");
  cv_.wait(lock, [&] { return aborted_ || !q.empty(); });
  if (aborted_) throw CommAborted();
  Message m = std::move(q.front());
  q.pop_front();
  return m;
}

void Comm::abort() {
  {
    std::lock_guard lock(mutex_);
    aborted_ = true;
  }
  cv_.notify_all();
}

bool Comm::aborted() const {
  std::lock_guard lock(mutex_);
  return aborted_;
}

std::uint64_t Comm::messages_sent() const {
  std::lock_guard lock(mutex_);
  return sent_;
}

namespace {

struct Failure {
  std::size_t rank = 0;
  std::string what;
};

}  // namespace

void run_ranks(Comm& comm, std::size_t num_stages, ExecMode mode,
               const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t n = comm.num_ranks();
  std::mutex failure_mutex;
  std::optional<Failure> failure;
  auto record = [&](std::size_t rank, const std::string& what) {
    std::lock_guard lock(failure_mutex);
    if (!failure) failure = Failure{rank, what};
  };

  if (mode == ExecMode::sequential) {
    for (std::size_t stage = 0; stage < num_stages && !failure; ++stage)
      for (std::size_t rank = 0; rank < n && !failure; ++rank) {
        try {
          body(rank, stage);
        } catch (const std::exception& e) {
          record(rank, e.what());
        }
      }
  } else {
    std::barrier sync(static_cast<std::ptrdiff_t>(n));
    std::vector<std::jthread> threads;
    threads.reserve(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
      threads.emplace_back([&, rank] {
        for (std::size_t stage = 0; stage < num_stages; ++stage) {
          try {
            if (comm.aborted()) throw CommAborted();
            body(rank, stage);
          } catch (const CommAborted&) {
            sync.arrive_and_drop();
            return;
          } catch (const std::exception& e) {
            record(rank, e.what());
            comm.abort();
            sync.arrive_and_drop();
            return;
          }
          sync.arrive_and_wait();
        }
      });
    }
  }
  if (failure) throw RunAborted(failure->rank, failure->what);
}

}  // namespace ccc
