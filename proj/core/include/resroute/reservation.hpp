#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "resroute/network.hpp"

namespace resroute {

using VehicleId = std::int64_t;

// Slotted counter of registered future occupancy for one link. Slot k covers
// [k*slot_length, (k+1)*slot_length); reservation intervals are half-open too.
class ReservationLog {
 public:
  explicit ReservationLog(Seconds slot_length = 60.0);

  Seconds slot_length() const { return slot_length_; }
  std::int64_t slot_of(Seconds t) const;

  // +1 on every slot overlapping [t_enter, t_exit). Throws InvalidArgument
  // unless t_exit > t_enter >= 0.
  void add(Seconds t_enter, Seconds t_exit);
  // Inverse of add. Counts clamp at zero; each clamped slot bumps clamps().
  void remove(Seconds t_enter, Seconds t_exit);

  // Raw count of the slot containing t. The caller adds 1 for itself.
  int expected_flow(Seconds t) const;
  int count(std::int64_t slot) const;

  // Drops slots below slot_of(now) - 1.
  void prune(Seconds now);

  std::uint64_t clamps() const { return clamps_; }
  std::int64_t first_slot() const { return base_; }
  std::int64_t end_slot() const { return base_ + static_cast<std::int64_t>(counts_.size()); }

 private:
  void check(Seconds t_enter, Seconds t_exit) const;
  std::pair<std::int64_t, std::int64_t> span_of(Seconds t_enter, Seconds t_exit) const;

  Seconds slot_length_;
  std::int64_t base_ = 0;
  std::vector<int> counts_;
  std::uint64_t clamps_ = 0;
};

struct ReservedLink {
  LinkIndex link = kNoLink;
  Seconds t_enter = 0.0;
  Seconds t_exit = 0.0;

  friend bool operator==(const ReservedLink&, const ReservedLink&) = default;
};

// A vehicle's registered path: graph- and time-contiguous entries.
struct PathReservation {
  VehicleId vehicle = -1;
  std::vector<ReservedLink> entries;

  friend bool operator==(const PathReservation&, const PathReservation&) = default;
};

// One ReservationLog per link of a network.
class ReservationLedger {
 public:
  ReservationLedger() = default;
  ReservationLedger(std::size_t link_count, Seconds slot_length);

  ReservationLog& log(LinkIndex l) { return logs_[l]; }
  const ReservationLog& log(LinkIndex l) const { return logs_[l]; }
  std::size_t size() const { return logs_.size(); }
  Seconds slot_length() const { return slot_length_; }

  int expected_flow(LinkIndex l, Seconds t) const { return logs_[l].expected_flow(t); }
  std::uint64_t clamps() const;
  void prune(Seconds now);

  // CSV rows (link_id, slot_index, count) for every non-zero slot.
  void dump_csv(const RoadNetwork& net, std::ostream& out, bool header = true) const;

 private:
  Seconds slot_length_ = 60.0;
  std::vector<ReservationLog> logs_;
};

// Throws InvalidArgument if entries are not time-contiguous, have empty
// intervals, or (when net is given) are not graph-contiguous.
void validate_reservation(const PathReservation& r, const RoadNetwork* net = nullptr);

// Replaces `old` by `next` in the ledger. Entries of `old` that start at or
// after `now` are withdrawn; past and ongoing entries stay. Every entry of
// `next` is then registered. `next` is validated up front so the ledger is
// never left half-updated.
void reserve_path(ReservationLedger& ledger, const std::optional<PathReservation>& old,
                  const PathReservation& next, Seconds now);

}  // namespace resroute
