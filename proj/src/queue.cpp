#include "v2v/queue.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "v2v/errors.hpp"

namespace v2v {

void TrafficConfig::validate() const {
  if (!(packet_bits > 0)) throw ConfigError("traffic.packet_bits must be > 0");
  if (!(arrival_rate_per_ms > 0)) throw ConfigError("traffic.arrival_rate_per_ms must be > 0");
  if (max_queue < 1) throw ConfigError("traffic.max_queue must be >= 1");
}

double PacketQueue::backlog_bits() const {
  double b = 0.0;
  for (const auto& p : packets_) b += p.bits_remaining;
  return b;
}

double PacketQueue::length(double packet_bits) const { return backlog_bits() / packet_bits; }

std::size_t PacketQueue::push(std::size_t count, double now_ms, double packet_bits, int max_queue) {
  arrivals_ += count;
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (packets_.size() < static_cast<std::size_t>(max_queue)) {
      packets_.push_back({now_ms, packet_bits});
    } else {
      ++dropped;
    }
  }
  dropped_ += dropped;
  return dropped;
}

std::size_t PacketQueue::drop_if(const std::vector<bool>& mask) {
  std::deque<Packet> kept;
  std::size_t n = 0;
  for (std::size_t k = 0; k < packets_.size(); ++k) {
    if (mask[k])
      ++n;
    else
      kept.push_back(packets_[k]);
  }
  packets_ = std::move(kept);
  dropped_ += n;
  return n;
}

std::size_t draw_arrivals(const TrafficConfig& cfg, double slot_ms, Rng& rng) {
  std::poisson_distribution<long> dist(cfg.arrival_rate_per_ms * slot_ms);
  return static_cast<std::size_t>(dist(rng));
}

std::pair<std::size_t, std::size_t> arrivals(PacketQueue& q, double slot_end_ms, double slot_ms,
                                             const TrafficConfig& cfg, Rng& rng) {
  const std::size_t n = draw_arrivals(cfg, slot_ms, rng);
  const std::size_t dropped = q.push(n, slot_end_ms, cfg.packet_bits, cfg.max_queue);
  return {n, dropped};
}

ServiceResult serve(PacketQueue& q, double rate_bps, double slot_start_ms, double slot_ms, double deadline_ms) {
  if (rate_bps < 0) throw std::invalid_argument("serve: rate must be >= 0");
  ServiceResult res;
  if (rate_bps == 0.0) return res;
  const double bits_per_ms = rate_bps / 1000.0;
  const double slot_end = slot_start_ms + slot_ms;
  double now = slot_start_ms;
  while (!q.empty() && now < slot_end) {
    Packet& p = q.head();
    const double expiry = p.arrival_ms + deadline_ms;
    if (now >= expiry) {
      q.pop_dropped();
      ++res.dropped;
      continue;
    }
    const double finish = now + p.bits_remaining / bits_per_ms;
    if (finish > expiry && expiry <= slot_end) {
      // Cannot make it: transmit until expiry, then discard.
      now = expiry;
      q.pop_dropped();
      ++res.dropped;
      continue;
    }
    if (finish <= slot_end) {
      res.delays.push_back(finish - p.arrival_ms);
      now = finish;
      q.pop_delivered();
    } else {
      p.bits_remaining -= (slot_end - now) * bits_per_ms;
      now = slot_end;
    }
  }
  return res;
}

std::size_t enforce_deadlines(PacketQueue& q, double now_ms, double rate_bps, DeadlineEvent events,
                              double deadline_ms) {
  const auto& pk = q.packets();
  std::vector<bool> mask(pk.size(), false);
  const bool project = any(events);
  const double bits_per_ms = rate_bps / 1000.0;
  double cumulative = 0.0;
  bool any_drop = false;
  for (std::size_t k = 0; k < pk.size(); ++k) {
    const double age = now_ms - pk[k].arrival_ms;
    if (age > deadline_ms) {
      mask[k] = true;
    } else if (project) {
      // Completion if everything ahead that survives is served first.
      const double bits = cumulative + pk[k].bits_remaining;
      const double completion = bits_per_ms > 0 ? now_ms + bits / bits_per_ms : std::numeric_limits<double>::infinity();
      if (completion - pk[k].arrival_ms > deadline_ms)
        mask[k] = true;
      else
        cumulative = bits;
    }
    any_drop = any_drop || mask[k];
  }
  return any_drop ? q.drop_if(mask) : 0;
}

std::optional<double> slot_mean_delay(std::span<const double> delays) {
  if (delays.empty()) return std::nullopt;
  return std::accumulate(delays.begin(), delays.end(), 0.0) / static_cast<double>(delays.size());
}

void WindowAccumulator::add_slot(std::span<const double> delays, std::size_t arrived, std::size_t dropped) {
  ++slots_;
  if (auto m = slot_mean_delay(delays)) {
    slot_mean_sum_ += *m;
    ++slots_with_delivery_;
  }
  delivered_ += delays.size();
  arrivals_ += arrived;
  dropped_ += dropped;
}

SlotDelayStats WindowAccumulator::stats() const {
  SlotDelayStats s;
  if (slots_with_delivery_ > 0) s.mean_delay = slot_mean_sum_ / static_cast<double>(slots_with_delivery_);
  // Packets whose fate was decided in this window, whenever they arrived.
  if (resolved() > 0) s.drop_ratio = static_cast<double>(dropped_) / static_cast<double>(resolved());
  return s;
}

}  // namespace v2v
