#include "dicho/fabric.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace dicho::fabric {

std::pair<Group, Group> split_around(const Group& g, int m) {
  if (m < g.lo || m > g.hi) raise(Err::Config, "split point outside the group", m);
  Group left{g.lo, m - 1, g.lo};
  Group right{m + 1, g.hi, m + 1};
  if (!left.empty()) left.root = (left.lo + left.hi) / 2;
  if (!right.empty()) right.root = (right.lo + right.hi) / 2;
  return {left, right};
}

Fabric::Fabric(int ranks, Mode mode, double timeout_seconds)
    : p_(ranks), mode_(mode), timeout_(timeout_seconds), boxes_(ranks), waiters_(ranks),
      ctxs_(ranks) {
  if (ranks < 1) raise(Err::Config, "fabric needs at least one rank");
  for (int r = 0; r < ranks; ++r) {
    ctxs_[r].fabric_ = this;
    ctxs_[r].rank_ = r;
  }
}

int Ctx::ranks() const { return fabric_->p_; }

void Fabric::trace_event(const char* event, const char* kind, int level, int glo, int ghi,
                         int src, int dst, std::size_t width) {
  if (!trace_) return;
  std::lock_guard<std::mutex> lock(trace_mu_);
  (*trace_) << event << ',' << kind << ',' << level << ',' << glo << ',' << ghi << ',' << src
            << ',' << dst << ',' << width << '\n';
}

void Fabric::push_message(int from, int to, std::span<const double> payload) {
  if (to < 0 || to >= p_ || from == to) raise(Err::UnknownRank, "bad message endpoint", to);
  Mailbox& box = boxes_[to];
  {
    std::lock_guard<std::mutex> lock(box.mu);
    box.queues[from].emplace_back(payload.begin(), payload.end());
  }
  box.cv.notify_all();
}

bool Fabric::has_message(int at, std::span<const int> sources) {
  Mailbox& box = boxes_[at];
  std::lock_guard<std::mutex> lock(box.mu);
  for (int s : sources) {
    auto it = box.queues.find(s);
    if (it != box.queues.end() && !it->second.empty()) return true;
  }
  return false;
}

Payload Fabric::pop_message(int at, std::span<const int> sources, int* from) {
  Mailbox& box = boxes_[at];
  std::lock_guard<std::mutex> lock(box.mu);
  // fixed ascending scan keeps the deterministic schedule reproducible
  std::vector<int> order(sources.begin(), sources.end());
  std::sort(order.begin(), order.end());
  for (int s : order) {
    auto it = box.queues.find(s);
    if (it != box.queues.end() && !it->second.empty()) {
      Payload p = std::move(it->second.front());
      it->second.pop_front();
      if (from) *from = s;
      return p;
    }
  }
  raise(Err::Deadlock, "pop on empty mailbox", at);
}

void Fabric::blocking_wait(int at, std::span<const int> sources) {
  Mailbox& box = boxes_[at];
  std::unique_lock<std::mutex> lock(box.mu);
  const auto ready = [&] {
    for (int s : sources) {
      auto it = box.queues.find(s);
      if (it != box.queues.end() && !it->second.empty()) return true;
    }
    return false;
  };
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_);
  if (!box.cv.wait_until(lock, deadline, ready))
    raise(Err::Deadlock, "recv timed out", at);
}

void Ctx::send(int to, std::span<const double> payload) {
  if (to == rank_) raise(Err::UnknownRank, "self-send is not allowed", to);
  fabric_->trace_event("send", "p2p", level_, -1, -1, rank_, to, payload.size());
  fabric_->push_message(rank_, to, payload);
}

Ctx::RecvAwaiter Ctx::recv(int from) {
  if (from < 0 || from >= fabric_->p_ || from == rank_)
    raise(Err::UnknownRank, "bad recv source", from);
  return RecvAwaiter{this, from};
}

Ctx::RecvAnyAwaiter Ctx::recv_any(std::vector<int> candidates) {
  return RecvAnyAwaiter{this, std::move(candidates)};
}

bool Ctx::RecvAwaiter::await_ready() {
  Fabric* f = ctx->fabric_;
  const int src[] = {from};
  if (f->mode_ == Mode::Concurrent) {
    f->blocking_wait(ctx->rank_, src);
    return true;
  }
  return f->has_message(ctx->rank_, src);
}

void Ctx::RecvAwaiter::await_suspend(std::coroutine_handle<> h) {
  Fabric::Waiter& w = ctx->fabric_->waiters_[ctx->rank_];
  w.handle = h;
  w.sources = {from};
  w.active = true;
}

Payload Ctx::RecvAwaiter::await_resume() {
  const int src[] = {from};
  Payload p = ctx->fabric_->pop_message(ctx->rank_, src, nullptr);
  ctx->fabric_->trace_event("recv", "p2p", ctx->level_, -1, -1, from, ctx->rank_, p.size());
  return p;
}

bool Ctx::RecvAnyAwaiter::await_ready() {
  Fabric* f = ctx->fabric_;
  if (f->mode_ == Mode::Concurrent) {
    f->blocking_wait(ctx->rank_, candidates);
    return true;
  }
  return f->has_message(ctx->rank_, candidates);
}

void Ctx::RecvAnyAwaiter::await_suspend(std::coroutine_handle<> h) {
  Fabric::Waiter& w = ctx->fabric_->waiters_[ctx->rank_];
  w.handle = h;
  w.sources = candidates;
  w.active = true;
}

std::pair<int, Payload> Ctx::RecvAnyAwaiter::await_resume() {
  Payload p = ctx->fabric_->pop_message(ctx->rank_, candidates, &from);
  ctx->fabric_->trace_event("recv", "reduce", ctx->level_, -1, -1, from, ctx->rank_, p.size());
  return {from, std::move(p)};
}

namespace {

void accumulate(Payload& acc, const Payload& in) {
  if (acc.empty()) {
    acc = in;
    return;
  }
  if (acc.size() != in.size())
    raise(Err::MismatchedWidth, "reduce contributions disagree on width");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += in[i];
}

}  // namespace

Task<Payload> Ctx::reduce_sum(Group g, std::vector<double> contribution) {
  if (g.empty() || g.root < g.lo || g.root > g.hi)
    raise(Err::Config, "reduce group must contain its root");
  if (rank_ < g.lo || rank_ > g.hi) raise(Err::Config, "rank outside reduce group", rank_);

  if (g.size() == 1) {
    fabric_->trace_event("result", "reduce", level_, g.lo, g.hi, rank_, rank_, contribution.size());
    co_return contribution;
  }

  if (fabric_->mode_ == Mode::Deterministic) {
    // rooted gather, summed left-to-right in rank order
    if (rank_ != g.root) {
      fabric_->trace_event("send", "reduce", level_, g.lo, g.hi, rank_, g.root,
                           contribution.size());
      fabric_->push_message(rank_, g.root, contribution);
      co_return Payload{};
    }
    Payload acc;
    for (int m = g.lo; m <= g.hi; ++m) {
      if (m == rank_) {
        accumulate(acc, contribution);
      } else {
        Payload v = co_await recv(m);
        accumulate(acc, v);
      }
    }
    fabric_->trace_event("result", "reduce", level_, g.lo, g.hi, rank_, rank_, acc.size());
    co_return acc;
  }

  // Concurrent: binomial tree rotated so the root maps to virtual rank 0;
  // partials from ready children are folded in arrival order.
  const int size = g.size();
  const int root_off = g.root - g.lo;
  const int v = ((rank_ - g.lo) - root_off + size) % size;
  Payload acc = std::move(contribution);

  std::vector<int> children;
  for (int step = 1; step < size; step <<= 1) {
    if (v % (2 * step) != 0) break;
    if (v + step < size) {
      const int child_v = v + step;
      children.push_back(g.lo + (child_v + root_off) % size);
    }
  }
  std::vector<int> pending = children;
  while (!pending.empty()) {
    auto [src, val] = co_await recv_any(pending);
    accumulate(acc, val);
    pending.erase(std::remove(pending.begin(), pending.end(), src), pending.end());
  }
  if (v != 0) {
    int step = 1;
    while (v % (2 * step) == 0) step <<= 1;
    const int parent_v = v - step;
    const int parent = g.lo + (parent_v + root_off) % size;
    fabric_->trace_event("send", "reduce", level_, g.lo, g.hi, rank_, parent, acc.size());
    fabric_->push_message(rank_, parent, acc);
    co_return Payload{};
  }
  fabric_->trace_event("result", "reduce", level_, g.lo, g.hi, rank_, rank_, acc.size());
  co_return acc;
}

void Fabric::run(const std::function<Task<void>(Ctx&)>& make_program) {
  for (auto& box : boxes_) {
    std::lock_guard<std::mutex> lock(box.mu);
    box.queues.clear();
  }
  for (auto& w : waiters_) w.active = false;
  if (mode_ == Mode::Deterministic)
    run_deterministic(make_program);
  else
    run_concurrent(make_program);
}

void Fabric::run_deterministic(const std::function<Task<void>(Ctx&)>& make_program) {
  std::vector<Task<void>> tasks;
  tasks.reserve(p_);
  for (int r = 0; r < p_; ++r) tasks.push_back(make_program(ctxs_[r]));
  for (int r = 0; r < p_; ++r) tasks[r].handle().resume();

  while (true) {
    bool all_done = true;
    bool progressed = false;
    for (int r = 0; r < p_; ++r) {
      if (tasks[r].handle().done()) continue;
      all_done = false;
      Waiter& w = waiters_[r];
      if (!w.active) continue;  // program never suspends without a wait
      if (!has_message(r, w.sources)) continue;
      w.active = false;
      auto h = w.handle;
      h.resume();
      progressed = true;
    }
    if (all_done) break;
    if (!progressed) {
      for (int r = 0; r < p_; ++r)
        if (tasks[r].handle().done() && tasks[r].handle().promise().error)
          std::rethrow_exception(tasks[r].handle().promise().error);
      raise(Err::Deadlock, "no rank can make progress");
    }
  }
  for (int r = 0; r < p_; ++r)
    if (tasks[r].handle().promise().error)
      std::rethrow_exception(tasks[r].handle().promise().error);
}

void Fabric::run_concurrent(const std::function<Task<void>(Ctx&)>& make_program) {
  std::vector<std::exception_ptr> errors(p_);
  {
    std::vector<std::jthread> workers;
    workers.reserve(p_);
    for (int r = 0; r < p_; ++r) {
      workers.emplace_back([this, r, &make_program, &errors] {
        try {
          Task<void> t = make_program(ctxs_[r]);
          t.handle().resume();
          if (t.handle().promise().error) std::rethrow_exception(t.handle().promise().error);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      });
    }
  }
  // prefer a root-cause error over secondary recv timeouts
  std::exception_ptr deadlock;
  for (auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const SolverError& se) {
      if (se.kind() == Err::Deadlock) {
        if (!deadlock) deadlock = e;
        continue;
      }
      throw;
    } catch (...) {
      throw;
    }
  }
  if (deadlock) std::rethrow_exception(deadlock);
}

}  // namespace dicho::fabric
