#pragma once

#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

#include "resroute/network.hpp"

namespace resroute {

// Sliding window of per-minute prediction errors for one link. Samples are
// read back with x re-indexed 1..n so the oldest retained sample has x = 1.
class ErrorWindow {
 public:
  static constexpr std::size_t kCapacity = 60;

  // Stores err = t_cur - t_lpf, evicting the oldest sample beyond kCapacity.
  void record(Seconds t_cur, Seconds t_lpf);

  std::size_t size() const { return errors_.size(); }
  bool empty() const { return errors_.empty(); }
  std::vector<std::pair<double, double>> samples() const;
  double last_error() const { return errors_.back(); }

  // Pearson correlation between sample index and error.
  double pearson_r() const;

 private:
  std::deque<double> errors_;
};

// Empirical Pearson coefficient of paired samples. Returns 0 for fewer than
// two samples or when either side has zero variance. Inputs must be equally
// sized.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

// Weighs the LPF prediction against the measured mean by |r|. r > 0 means
// the error grows over the window, so the measurement gets weight |r|;
// r < 0 gives the prediction weight |r|; r == 0 is pure prediction.
// Throws InvalidArgument for r outside [-1, 1].
Seconds blend(double r, Seconds t_lpf, Seconds t_cur);

}  // namespace resroute
