#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "v2v/rng.hpp"

namespace v2v {

struct TrafficConfig {
  double packet_bits = 3200.0;
  double arrival_rate_per_ms = 0.5;
  double deadline_ms = 0.0;  // <= 0 means 1 / arrival rate
  int max_queue = 100;       // packets

  double deadline() const { return deadline_ms > 0 ? deadline_ms : 1.0 / arrival_rate_per_ms; }
  /// Traffic influx in bits/ms.
  double influx() const { return arrival_rate_per_ms * packet_bits; }
  void validate() const;
};

struct Packet {
  double arrival_ms = 0.0;
  double bits_remaining = 0.0;
};

/// FIFO packet buffer with cumulative counters. The head packet may be
/// partially transmitted.
class PacketQueue {
 public:
  const std::deque<Packet>& packets() const { return packets_; }
  std::size_t size() const { return packets_.size(); }
  bool empty() const { return packets_.empty(); }
  /// Backlog in packets, counting the partial head fractionally.
  double length(double packet_bits) const;
  double backlog_bits() const;

  std::uint64_t arrivals() const { return arrivals_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }

  /// Appends `count` packets stamped `now_ms`; excess over max_queue is
  /// counted as arrived and dropped. Returns the number dropped.
  std::size_t push(std::size_t count, double now_ms, double packet_bits, int max_queue);

  // Low-level mutators used by the service and deadline routines.
  Packet& head() { return packets_.front(); }
  void pop_delivered() { packets_.pop_front(); ++delivered_; }
  void pop_dropped() { packets_.pop_front(); ++dropped_; }
  std::size_t drop_if(const std::vector<bool>& mask);

 private:
  std::deque<Packet> packets_;
  std::uint64_t arrivals_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Number of packets arriving in one slot, Poisson(lambda * slot).
std::size_t draw_arrivals(const TrafficConfig& cfg, double slot_ms, Rng& rng);

/// Draws Poisson(lambda * slot) packets and enqueues them at `slot_end_ms`.
/// Returns (arrived, dropped on overflow).
std::pair<std::size_t, std::size_t> arrivals(PacketQueue& q, double slot_end_ms, double slot_ms,
                                             const TrafficConfig& cfg, Rng& rng);

struct ServiceResult {
  std::vector<double> delays;  // ms, one per delivered packet
  std::size_t dropped = 0;     // packets whose deadline passed mid-service
};

/// Drains rate_bps * slot bits head-of-line, linearly over [slot_start,
/// slot_start + slot). A packet that cannot finish before arrival + deadline
/// is dropped at its deadline; the capacity spent on it is lost.
ServiceResult serve(PacketQueue& q, double rate_bps, double slot_start_ms, double slot_ms,
                    double deadline_ms = std::numeric_limits<double>::infinity());

enum class DeadlineEvent : unsigned { kNone = 0, kArrival = 1, kSchedulingBoundary = 2 };

inline DeadlineEvent operator|(DeadlineEvent a, DeadlineEvent b) {
  return static_cast<DeadlineEvent>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
inline bool any(DeadlineEvent e) { return static_cast<unsigned>(e) != 0; }

/// Drops packets older than the deadline. At an arrival event or scheduling
/// boundary also drops packets whose projected completion at `rate_bps`
/// would overshoot the deadline. Returns the number dropped.
std::size_t enforce_deadlines(PacketQueue& q, double now_ms, double rate_bps, DeadlineEvent events,
                              double deadline_ms);

/// Per-vTx delay and drop statistics accumulated over one scheduling window.
struct SlotDelayStats {
  std::optional<double> mean_delay;  // ms; empty when nothing was delivered
  double drop_ratio = 0.0;
  double success_ratio() const { return 1.0 - drop_ratio; }
};

class WindowAccumulator {
 public:
  /// Records one transmission slot.
  void add_slot(std::span<const double> delays, std::size_t arrived, std::size_t dropped);

  /// Mean of per-slot mean delays over slots with deliveries, and
  /// dropped / (delivered + dropped) over packets resolved in the window
  /// (0 when none was).
  SlotDelayStats stats() const;

  std::size_t arrivals() const { return arrivals_; }
  std::size_t delivered() const { return delivered_; }
  std::size_t dropped() const { return dropped_; }
  std::size_t resolved() const { return delivered_ + dropped_; }
  std::size_t slots() const { return slots_; }

 private:
  double slot_mean_sum_ = 0.0;
  std::size_t slots_with_delivery_ = 0;
  std::size_t slots_ = 0;
  std::size_t arrivals_ = 0;
  std::size_t delivered_ = 0;
  std::size_t dropped_ = 0;
};

/// Mean delay of one slot; empty when nothing was delivered.
std::optional<double> slot_mean_delay(std::span<const double> delays);

}  // namespace v2v
