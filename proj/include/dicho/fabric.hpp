#ifndef DICHO_FABRIC_HPP
#define DICHO_FABRIC_HPP

#include <condition_variable>
#include <coroutine>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <initializer_list>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dicho/errors.hpp"

namespace dicho::fabric {

enum class Mode { Deterministic, Concurrent };

// Inclusive contiguous rank range with a designated root.
struct Group {
  int lo = 0, hi = -1, root = 0;
  bool empty() const { return lo > hi; }
  int size() const { return empty() ? 0 : hi - lo + 1; }
};

// Sub-groups on either side of rank m, m itself excluded. Empty halves are
// returned with lo > hi; the engine simply skips them.
std::pair<Group, Group> split_around(const Group& g, int m);

// Minimal lazy coroutine task. Child tasks start when awaited and resume the
// awaiting frame through symmetric transfer, so a whole rank program can be
// driven from a single outer handle.
template <typename T>
class [[nodiscard]] Task {
public:
  struct promise_type {
    std::optional<T> value;
    std::exception_ptr error;
    std::coroutine_handle<> continuation;

    Task get_return_object() {
      return Task(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    struct FinalAwaiter {
      bool await_ready() noexcept { return false; }
      std::coroutine_handle<> await_suspend(std::coroutine_handle<promise_type> h) noexcept {
        auto c = h.promise().continuation;
        return c ? c : std::noop_coroutine();
      }
      void await_resume() noexcept {}
    };
    FinalAwaiter final_suspend() noexcept { return {}; }
    void return_value(T v) { value = std::move(v); }
    void unhandled_exception() { error = std::current_exception(); }
  };

  explicit Task(std::coroutine_handle<promise_type> h) : h_(h) {}
  Task(Task&& o) noexcept : h_(std::exchange(o.h_, nullptr)) {}
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept {
    h_.promise().continuation = parent;
    return h_;
  }
  T await_resume() {
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
    return std::move(*h_.promise().value);
  }

  std::coroutine_handle<promise_type> handle() const { return h_; }

private:
  std::coroutine_handle<promise_type> h_;
};

template <>
class [[nodiscard]] Task<void> {
public:
  struct promise_type {
    std::exception_ptr error;
    std::coroutine_handle<> continuation;

    Task get_return_object() {
      return Task(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    struct FinalAwaiter {
      bool await_ready() noexcept { return false; }
      std::coroutine_handle<> await_suspend(std::coroutine_handle<promise_type> h) noexcept {
        auto c = h.promise().continuation;
        return c ? c : std::noop_coroutine();
      }
      void await_resume() noexcept {}
    };
    FinalAwaiter final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { error = std::current_exception(); }
  };

  explicit Task(std::coroutine_handle<promise_type> h) : h_(h) {}
  Task(Task&& o) noexcept : h_(std::exchange(o.h_, nullptr)) {}
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept {
    h_.promise().continuation = parent;
    return h_;
  }
  void await_resume() {
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
  }

  std::coroutine_handle<promise_type> handle() const { return h_; }

private:
  std::coroutine_handle<promise_type> h_;
};

using Payload = std::vector<double>;

class Fabric;

// Per-rank endpoint handed to the rank program. Must be used from exactly
// one worker at a time.
class Ctx {
public:
  int rank() const { return rank_; }
  int ranks() const;
  void set_level(int level) { level_ = level; }

  void send(int to, std::span<const double> payload);
  void send(int to, std::initializer_list<double> payload) {
    send(to, std::span<const double>(payload.begin(), payload.size()));
  }

  struct RecvAwaiter;
  RecvAwaiter recv(int from);

  struct RecvAnyAwaiter;
  RecvAnyAwaiter recv_any(std::vector<int> candidates);

  // Elementwise sum over every rank in [g.lo, g.hi]; the root's co_await
  // yields the total, everyone else receives an empty payload.
  // Deterministic mode folds contributions strictly in rank order; in
  // Concurrent mode a binomial tree combines whatever partials arrive first.
  Task<Payload> reduce_sum(Group g, std::vector<double> contribution);

private:
  friend class Fabric;
  Fabric* fabric_ = nullptr;
  int rank_ = -1;
  int level_ = -1;
};

class Fabric {
public:
  explicit Fabric(int ranks, Mode mode = Mode::Deterministic, double timeout_seconds = 10.0);

  int ranks() const { return p_; }
  Mode mode() const { return mode_; }
  void set_trace(std::ostream* sink) { trace_ = sink; }

  // Runs one program instance per rank to completion. Deterministic mode
  // steps every rank cooperatively on the calling worker in round-robin
  // order; Concurrent mode gives each rank its own thread.
  void run(const std::function<Task<void>(Ctx&)>& make_program);

private:
  friend class Ctx;

  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::unordered_map<int, std::deque<Payload>> queues;  // keyed by sender
  };

  struct Waiter {
    std::coroutine_handle<> handle;
    std::vector<int> sources;  // acceptable senders
    bool active = false;
  };

  bool has_message(int at, std::span<const int> sources);
  Payload pop_message(int at, std::span<const int> sources, int* from);
  void push_message(int from, int to, std::span<const double> payload);
  void blocking_wait(int at, std::span<const int> sources);
  void trace_event(const char* event, const char* kind, int level, int glo, int ghi, int src,
                   int dst, std::size_t width);

  void run_deterministic(const std::function<Task<void>(Ctx&)>& make_program);
  void run_concurrent(const std::function<Task<void>(Ctx&)>& make_program);

  int p_;
  Mode mode_;
  double timeout_;
  std::vector<Mailbox> boxes_;
  std::vector<Waiter> waiters_;  // deterministic scheduler registry
  std::vector<Ctx> ctxs_;
  std::ostream* trace_ = nullptr;
  std::mutex trace_mu_;
};

struct Ctx::RecvAwaiter {
  Ctx* ctx;
  int from;

  bool await_ready();
  void await_suspend(std::coroutine_handle<> h);
  Payload await_resume();
};

struct Ctx::RecvAnyAwaiter {
  Ctx* ctx;
  std::vector<int> candidates;
  int from = -1;

  bool await_ready();
  void await_suspend(std::coroutine_handle<> h);
  std::pair<int, Payload> await_resume();
};

}  // namespace dicho::fabric

#endif
