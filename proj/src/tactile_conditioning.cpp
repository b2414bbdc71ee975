#include "mat/tactile_conditioning.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mat::obs {

RawTactileStream::RawTactileStream(int n_cells, int n_fingers, int cells_per_finger)
    : n_cells_(n_cells),
      n_fingers_(n_fingers),
      cells_per_finger_(cells_per_finger),
      readings_(n_cells),
      efforts_(n_fingers, 0.0) {}

void RawTactileStream::push_force(int cell, double force) {
  if (cell < 0 || cell >= n_cells_) throw std::out_of_range("push_force: bad cell");
  if (force < 0.0 || force > 20.0)
    throw std::invalid_argument("push_force: force outside [0, 20]");
  readings_[cell].push_back(force);
  ++total_samples_;
}

void RawTactileStream::push_effort(int finger, double effort) {
  if (finger < 0 || finger >= n_fingers_) throw std::out_of_range("push_effort: bad finger");
  efforts_[finger] = effort;
  ++total_samples_;
}

double RawTactileStream::running_mean(int cell, int window) const {
  const auto& r = readings_[cell];
  if (r.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(window, r.size());
  double sum = 0.0;
  for (std::size_t i = r.size() - n; i < r.size(); ++i) sum += r[i];
  return sum / static_cast<double>(n);
}

int RawTactileStream::owning_finger(int cell) const {
  const int finger = cell / cells_per_finger_;
  return finger < n_fingers_ ? finger : -1;  // palm cells own no effort
}

std::vector<std::uint8_t> condition_raw_tactile(const RawTactileStream& stream, int window_len,
                                                double threshold) {
  if (stream.empty()) throw std::invalid_argument("condition_raw_tactile: empty stream");
  std::vector<std::uint8_t> binary(stream.n_cells(), 0);
  for (int cell = 0; cell < stream.n_cells(); ++cell) {
    double value = stream.running_mean(cell, window_len);
    const int finger = stream.owning_finger(cell);
    if (finger >= 0) value += stream.latest_effort(finger);
    binary[cell] = value > threshold ? 1 : 0;
  }
  return binary;
}

RawTactileStream replay_stream_csv(const std::string& path, int n_cells, int n_fingers) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay file: " + path);
  RawTactileStream stream(n_cells, n_fingers, n_cells / (n_fingers + 1));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {  // optional header row
      first = false;
      if (line.find("timestamp") != std::string::npos) continue;
    }
    std::istringstream ss(line);
    std::string ts, id_s, force_s;
    if (!std::getline(ss, ts, ',') || !std::getline(ss, id_s, ',') ||
        !std::getline(ss, force_s, ','))
      throw std::runtime_error("bad replay row: " + line);
    const int id = std::stoi(id_s);
    const double value = std::stod(force_s);
    if (id < n_cells)
      stream.push_force(id, value);
    else if (id < n_cells + n_fingers)
      stream.push_effort(id - n_cells, value);
    else
      throw std::runtime_error("replay cell_id out of range: " + id_s);
  }
  return stream;
}

}  // namespace mat::obs
