#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace asyspcd {

// Deterministic model of the inconsistent-read memory semantics. Each actor
// assembles a local copy of x one component at a time; a copy is complete once
// every slot has been filled. Writes take effect at their event time.
struct WriteEvent {
  std::size_t component = 0;
  double value = 0.0;
};

struct ReadEvent {
  std::size_t component = 0;
  std::size_t slot = 0;  // position in the actor's local copy
};

struct ScheduleEvent {
  std::int64_t time = 0;
  std::size_t actor = 0;
  std::variant<WriteEvent, ReadEvent> action;
};

struct ScheduleScript {
  std::vector<ScheduleEvent> events;

  ScheduleScript& write(std::int64_t t, std::size_t actor, std::size_t component,
                        double value) {
    events.push_back({t, actor, WriteEvent{component, value}});
    return *this;
  }

  ScheduleScript& read(std::int64_t t, std::size_t actor, std::size_t component) {
    return read(t, actor, component, component);
  }

  ScheduleScript& read(std::int64_t t, std::size_t actor, std::size_t component,
                       std::size_t slot) {
    events.push_back({t, actor, ReadEvent{component, slot}});
    return *this;
  }
};

struct MemoryState {
  std::int64_t time = 0;  // first time this state was visible
  std::vector<double> x;
};

struct SnapshotTrace {
  std::size_t actor = 0;
  std::int64_t start_time = 0;
  std::int64_t completion_time = 0;
  std::vector<double> values;
  bool consistent = false;
  std::optional<std::size_t> matching_state;  // index into history
};

struct InterleavingTrace {
  std::vector<MemoryState> history;  // initial state, then one per write
  std::vector<SnapshotTrace> snapshots;
};

inline InterleavingTrace simulate_interleaving(std::span<const double> initial,
                                               const ScheduleScript& script) {
  InterleavingTrace trace;
  if (script.events.empty()) return trace;

  const std::size_t n = initial.size();
  if (n == 0) throw std::invalid_argument("script needs a non-empty initial vector");

  struct Pending {
    std::vector<std::optional<double>> slots;
    std::size_t filled = 0;
    std::int64_t start = 0;
  };
  std::map<std::size_t, Pending> pending;

  std::vector<double> memory(initial.begin(), initial.end());
  trace.history.push_back({script.events.front().time - 1, memory});

  std::optional<std::int64_t> last;
  for (const auto& ev : script.events) {
    if (last && ev.time <= *last)
      throw std::invalid_argument("schedule times must be strictly increasing");
    last = ev.time;

    if (const auto* w = std::get_if<WriteEvent>(&ev.action)) {
      if (w->component >= n)
        throw std::invalid_argument("write references component " +
                                    std::to_string(w->component));
      memory[w->component] = w->value;
      trace.history.push_back({ev.time, memory});
      continue;
    }

    const auto& r = std::get<ReadEvent>(ev.action);
    if (r.component >= n || r.slot >= n)
      throw std::invalid_argument("read references component " +
                                  std::to_string(r.component) + " / slot " +
                                  std::to_string(r.slot));
    auto& buf = pending[ev.actor];
    if (buf.slots.empty()) {
      buf.slots.assign(n, std::nullopt);
      buf.start = ev.time;
    }
    if (buf.slots[r.slot])
      throw std::invalid_argument("slot " + std::to_string(r.slot) +
                                  " read twice within one snapshot");
    buf.slots[r.slot] = memory[r.component];
    if (++buf.filled < n) continue;

    SnapshotTrace snap;
    snap.actor = ev.actor;
    snap.start_time = buf.start;
    snap.completion_time = ev.time;
    for (const auto& v : buf.slots) snap.values.push_back(*v);
    for (std::size_t k = 0; k < trace.history.size(); ++k) {
      if (trace.history[k].x == snap.values) {
        snap.consistent = true;
        snap.matching_state = k;
        break;
      }
    }
    trace.snapshots.push_back(std::move(snap));
    pending.erase(ev.actor);
  }
  return trace;
}

}  // namespace asyspcd
