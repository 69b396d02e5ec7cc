#include "resroute/reservation.hpp"

#include <cmath>
#include <ostream>

#include "resroute/error.hpp"

namespace resroute {

ReservationLog::ReservationLog(Seconds slot_length) : slot_length_(slot_length) {
  if (!(slot_length > 0.0)) throw InvalidArgument("slot_length must be > 0");
}

std::int64_t ReservationLog::slot_of(Seconds t) const {
  return static_cast<std::int64_t>(std::floor(t / slot_length_));
}

void ReservationLog::check(Seconds t_enter, Seconds t_exit) const {
  if (!std::isfinite(t_enter) || !std::isfinite(t_exit) || t_enter < 0.0 || !(t_exit > t_enter)) {
    throw InvalidArgument("reservation interval must satisfy t_exit > t_enter >= 0");
  }
}

std::pair<std::int64_t, std::int64_t> ReservationLog::span_of(Seconds t_enter, Seconds t_exit) const {
  const std::int64_t first = slot_of(t_enter);
  const std::int64_t last = static_cast<std::int64_t>(std::ceil(t_exit / slot_length_)) - 1;
  return {first, std::max(first, last)};
}

void ReservationLog::add(Seconds t_enter, Seconds t_exit) {
  check(t_enter, t_exit);
  auto [first, last] = span_of(t_enter, t_exit);
  first = std::max(first, base_);
  if (last < first) return;
  const auto need = static_cast<std::size_t>(last - base_ + 1);
  if (counts_.size() < need) counts_.resize(need, 0);
  for (std::int64_t k = first; k <= last; ++k) ++counts_[static_cast<std::size_t>(k - base_)];
}

void ReservationLog::remove(Seconds t_enter, Seconds t_exit) {
  check(t_enter, t_exit);
  auto [first, last] = span_of(t_enter, t_exit);
  first = std::max(first, base_);
  for (std::int64_t k = first; k <= last; ++k) {
    const auto pos = static_cast<std::size_t>(k - base_);
    if (pos < counts_.size() && counts_[pos] > 0) {
      --counts_[pos];
    } else {
      ++clamps_;
    }
  }
}

int ReservationLog::count(std::int64_t slot) const {
  if (slot < base_) return 0;
  const auto pos = static_cast<std::size_t>(slot - base_);
  return pos < counts_.size() ? counts_[pos] : 0;
}

int ReservationLog::expected_flow(Seconds t) const { return count(slot_of(t)); }

void ReservationLog::prune(Seconds now) {
  const std::int64_t keep_from = slot_of(now) - 1;
  if (keep_from <= base_) return;
  const auto drop = static_cast<std::size_t>(keep_from - base_);
  if (drop >= counts_.size()) {
    counts_.clear();
  } else {
    counts_.erase(counts_.begin(), counts_.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  base_ = keep_from;
}

ReservationLedger::ReservationLedger(std::size_t link_count, Seconds slot_length)
    : slot_length_(slot_length), logs_(link_count, ReservationLog(slot_length)) {}

std::uint64_t ReservationLedger::clamps() const {
  std::uint64_t total = 0;
  for (const auto& log : logs_) total += log.clamps();
  return total;
}

void ReservationLedger::prune(Seconds now) {
  for (auto& log : logs_) log.prune(now);
}

void ReservationLedger::dump_csv(const RoadNetwork& net, std::ostream& out, bool header) const {
  if (header) out << "link_id,slot_index,count\n";
  for (LinkIndex l = 0; l < logs_.size(); ++l) {
    const auto& log = logs_[l];
    for (std::int64_t k = log.first_slot(); k < log.end_slot(); ++k) {
      if (int c = log.count(k); c > 0) out << net.link(l).id << ',' << k << ',' << c << '\n';
    }
  }
}

void validate_reservation(const PathReservation& r, const RoadNetwork* net) {
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const ReservedLink& e = r.entries[i];
    if (!std::isfinite(e.t_enter) || !std::isfinite(e.t_exit) || e.t_enter < 0.0 || !(e.t_exit > e.t_enter)) {
      throw InvalidArgument("reservation entry " + std::to_string(i) + " has an empty or inverted interval");
    }
    if (net && e.link >= net->link_count()) {
      throw InvalidArgument("reservation entry " + std::to_string(i) + " names an unknown link");
    }
    if (i == 0) continue;
    const ReservedLink& prev = r.entries[i - 1];
    if (prev.t_exit != e.t_enter) {
      throw InvalidArgument("reservation entry " + std::to_string(i) + " is not time-contiguous");
    }
    if (net && net->head(prev.link) != net->tail(e.link)) {
      throw InvalidArgument("reservation entry " + std::to_string(i) + " is not graph-contiguous");
    }
  }
}

void reserve_path(ReservationLedger& ledger, const std::optional<PathReservation>& old,
                  const PathReservation& next, Seconds now) {
  validate_reservation(next);
  for (const auto& e : next.entries) {
    if (e.link >= ledger.size()) throw InvalidArgument("reservation names an unknown link");
  }
  if (old) {
    for (const auto& e : old->entries) {
      if (e.t_enter >= now) ledger.log(e.link).remove(e.t_enter, e.t_exit);
    }
  }
  for (const auto& e : next.entries) ledger.log(e.link).add(e.t_enter, e.t_exit);
}

}  // namespace resroute
