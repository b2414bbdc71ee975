#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace mat::obs {

// Raw tactile stream as the hardware driver would deliver it: per-cell force
// magnitudes in [0, 20] at an arbitrary rate, plus a proprioceptive effort
// value per finger.
class RawTactileStream {
 public:
  RawTactileStream(int n_cells = 96, int n_fingers = 3, int cells_per_finger = 24);

  void push_force(int cell, double force);
  void push_effort(int finger, double effort);

  int n_cells() const { return n_cells_; }
  int n_fingers() const { return n_fingers_; }
  bool empty() const { return total_samples_ == 0; }

  // Mean of the last min(window, available) force readings of a cell.
  double running_mean(int cell, int window) const;
  double latest_effort(int finger) const { return efforts_[finger]; }
  int owning_finger(int cell) const;

 private:
  int n_cells_, n_fingers_, cells_per_finger_;
  std::size_t total_samples_ = 0;
  std::vector<std::deque<double>> readings_;
  std::vector<double> efforts_;
};

// Binary contacts from raw readings: per-cell running mean over the last
// `window_len` readings, plus the owning finger's effort (palm cells get
// none), thresholded at `threshold` (strictly above = contact).
std::vector<std::uint8_t> condition_raw_tactile(const RawTactileStream& stream,
                                                int window_len = 50, double threshold = 0.8);

// Replay file: CSV rows (timestamp, cell_id, force). cell_id in [0, n_cells)
// is a force sample; n_cells + f carries finger f's effort.
RawTactileStream replay_stream_csv(const std::string& path, int n_cells = 96, int n_fingers = 3);

}  // namespace mat::obs
