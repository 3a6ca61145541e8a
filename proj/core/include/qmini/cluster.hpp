#pragma once

// In-process "simulated cluster": a fixed set of long-lived rank threads that
// share no mutable state and talk only through ordered point-to-point
// mailboxes. The protocol code sees a Communicator; swapping the transport
// (sockets, MPI) would only touch this file's implementation.

#include <complex>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace qmini {

struct ExchangeStats {
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_exchanged = 0;
  std::uint64_t exchange_rounds = 0;

  ExchangeStats& operator+=(const ExchangeStats& o) noexcept {
    messages_sent += o.messages_sent;
    bytes_exchanged += o.bytes_exchanged;
    exchange_rounds += o.exchange_rounds;
    return *this;
  }
  friend bool operator==(const ExchangeStats&, const ExchangeStats&) = default;
};

nlohmann::json to_json(const ExchangeStats& s);
ExchangeStats exchange_stats_from_json(const nlohmann::json& j);

using Payload = std::vector<std::complex<double>>;

class RankCluster;

/// Per-rank view of the cluster, valid for the duration of one spmd() call.
class Communicator {
 public:
  int rank() const noexcept { return rank_; }
  int size() const noexcept;

  void send(int dest, Payload data);
  /// Blocks until the next message from `source` arrives (per-source FIFO).
  Payload recv(int source);
  void barrier();

  std::uint64_t messages_sent() const noexcept { return messages_sent_; }
  std::uint64_t bytes_sent() const noexcept { return bytes_sent_; }

 private:
  friend class RankCluster;
  Communicator(RankCluster& cluster, int rank) : cluster_(&cluster), rank_(rank) {}

  RankCluster* cluster_;
  int rank_;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t bytes_sent_ = 0;
};

class RankCluster {
 public:
  explicit RankCluster(int ranks);
  ~RankCluster();

  RankCluster(const RankCluster&) = delete;
  RankCluster& operator=(const RankCluster&) = delete;

  int size() const noexcept { return static_cast<int>(workers_.size()); }

  /// Runs `body` on every rank concurrently and blocks until all return.
  /// Returns the per-rank communicators' message counts. If any rank throws,
  /// the remaining ranks are unblocked and an ExecutionError naming the
  /// lowest failing rank is raised.
  struct RankTotals {
    std::vector<std::uint64_t> messages;
    std::vector<std::uint64_t> bytes;
  };
  RankTotals spmd(const std::function<void(Communicator&)>& body);

  /// Joins all rank threads; idempotent.
  void shutdown();

 private:
  friend class Communicator;

  struct Message {
    int source;
    Payload data;
  };
  struct Mailbox {
    std::deque<Message> queue;
  };

  void worker_loop(int rank);
  void deliver(int dest, Message msg);
  Payload take(int self, int source);
  void arrive_and_wait();

  std::vector<std::thread> workers_;
  std::vector<Mailbox> mailboxes_;

  std::mutex mutex_;
  std::condition_variable job_cv_;
  std::condition_variable done_cv_;
  std::condition_variable mail_cv_;
  std::condition_variable barrier_cv_;

  const std::function<void(Communicator&)>* job_ = nullptr;
  std::uint64_t job_generation_ = 0;
  int pending_ = 0;
  bool stopping_ = false;
  bool aborted_ = false;
  std::vector<std::exception_ptr> failures_;
  std::vector<std::uint64_t> rank_messages_;
  std::vector<std::uint64_t> rank_bytes_;

  int barrier_waiting_ = 0;
  std::uint64_t barrier_generation_ = 0;
};

/// Number of live worker threads across every cluster and executor.
int active_worker_threads() noexcept;

namespace detail {
/// RAII registration of a worker thread in the live-thread counter.
class WorkerThreadScope {
 public:
  WorkerThreadScope() noexcept;
  ~WorkerThreadScope();
  WorkerThreadScope(const WorkerThreadScope&) = delete;
  WorkerThreadScope& operator=(const WorkerThreadScope&) = delete;
};
}  // namespace detail

}  // namespace qmini
