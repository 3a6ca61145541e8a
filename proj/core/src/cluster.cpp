#include "qmini/cluster.hpp"

#include <atomic>
#include <string>

#include "qmini/errors.hpp"

namespace qmini {

namespace {

std::atomic<int> g_live_workers{0};

/// Thrown inside ranks that were blocked when a sibling failed.
struct ClusterAborted {};

}  // namespace

int active_worker_threads() noexcept { return g_live_workers.load(); }

namespace detail {
WorkerThreadScope::WorkerThreadScope() noexcept { g_live_workers.fetch_add(1); }
WorkerThreadScope::~WorkerThreadScope() { g_live_workers.fetch_sub(1); }
}  // namespace detail

nlohmann::json to_json(const ExchangeStats& s) {
  return {{"messages_sent", s.messages_sent},
          {"bytes_exchanged", s.bytes_exchanged},
          {"exchange_rounds", s.exchange_rounds}};
}

ExchangeStats exchange_stats_from_json(const nlohmann::json& j) {
  return {j.at("messages_sent").get<std::uint64_t>(), j.at("bytes_exchanged").get<std::uint64_t>(),
          j.at("exchange_rounds").get<std::uint64_t>()};
}

int Communicator::size() const noexcept { return cluster_->size(); }

void Communicator::send(int dest, Payload data) {
  if (dest < 0 || dest >= size()) {
    throw InvalidArgument("send to nonexistent rank " + std::to_string(dest));
  }
  ++messages_sent_;
  bytes_sent_ += data.size() * sizeof(Payload::value_type);
  cluster_->deliver(dest, {rank_, std::move(data)});
}

Payload Communicator::recv(int source) { return cluster_->take(rank_, source); }

void Communicator::barrier() { cluster_->arrive_and_wait(); }

RankCluster::RankCluster(int ranks) {
  if (ranks < 1) throw InvalidArgument("cluster needs at least one rank");
  mailboxes_.resize(static_cast<std::size_t>(ranks));
  workers_.reserve(static_cast<std::size_t>(ranks));
  // The counter token is created here so a thread counts as live from the
  // moment it is spawned until its function object is destroyed.
  for (int r = 0; r < ranks; ++r) {
    workers_.emplace_back([this, r, live = std::make_shared<detail::WorkerThreadScope>()] { worker_loop(r); });
  }
}

RankCluster::~RankCluster() { shutdown(); }

void RankCluster::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  job_cv_.notify_all();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

RankCluster::RankTotals RankCluster::spmd(const std::function<void(Communicator&)>& body) {
  std::unique_lock lock(mutex_);
  if (stopping_) throw ExecutionError("cluster has been shut down");
  const auto n = static_cast<std::size_t>(size());
  job_ = &body;
  pending_ = size();
  aborted_ = false;
  failures_.assign(n, nullptr);
  rank_messages_.assign(n, 0);
  rank_bytes_.assign(n, 0);
  barrier_waiting_ = 0;
  for (auto& box : mailboxes_) box.queue.clear();
  ++job_generation_;
  job_cv_.notify_all();
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;

  for (std::size_t r = 0; r < n; ++r) {
    if (!failures_[r]) continue;
    try {
      std::rethrow_exception(failures_[r]);
    } catch (const std::exception& e) {
      throw ExecutionError("rank " + std::to_string(r) + " failed: " + e.what());
    } catch (...) {
      throw ExecutionError("rank " + std::to_string(r) + " failed with a non-standard exception");
    }
  }
  return {rank_messages_, rank_bytes_};
}

void RankCluster::worker_loop(int rank) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(Communicator&)>* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      job_cv_.wait(lock, [&] { return stopping_ || job_generation_ != seen; });
      if (stopping_) return;
      seen = job_generation_;
      job = job_;
    }
    Communicator comm(*this, rank);
    std::exception_ptr failure;
    try {
      (*job)(comm);
    } catch (const ClusterAborted&) {
      // A sibling failed; its own exception is reported instead.
    } catch (...) {
      failure = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      const auto r = static_cast<std::size_t>(rank);
      failures_[r] = failure;
      rank_messages_[r] = comm.messages_sent();
      rank_bytes_[r] = comm.bytes_sent();
      if (failure) {
        aborted_ = true;
        mail_cv_.notify_all();
        barrier_cv_.notify_all();
      }
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }
}

void RankCluster::deliver(int dest, Message msg) {
  {
    std::lock_guard lock(mutex_);
    mailboxes_[static_cast<std::size_t>(dest)].queue.push_back(std::move(msg));
  }
  mail_cv_.notify_all();
}

Payload RankCluster::take(int self, int source) {
  std::unique_lock lock(mutex_);
  auto& queue = mailboxes_[static_cast<std::size_t>(self)].queue;
  for (;;) {
    if (aborted_) throw ClusterAborted{};
    for (auto it = queue.begin(); it != queue.end(); ++it) {
      if (it->source == source) {
        Payload data = std::move(it->data);
        queue.erase(it);
        return data;
      }
    }
    mail_cv_.wait(lock);
  }
}

void RankCluster::arrive_and_wait() {
  std::unique_lock lock(mutex_);
  if (aborted_) throw ClusterAborted{};
  const std::uint64_t gen = barrier_generation_;
  if (++barrier_waiting_ == size()) {
    barrier_waiting_ = 0;
    ++barrier_generation_;
    barrier_cv_.notify_all();
    return;
  }
  barrier_cv_.wait(lock, [&] { return aborted_ || barrier_generation_ != gen; });
  if (barrier_generation_ == gen) throw ClusterAborted{};
}

}  // namespace qmini
