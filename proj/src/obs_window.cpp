#include "mat/obs_window.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace mat::obs {

ObservationWindow::ObservationWindow(ObsDims dims, double joint_delta_threshold)
    : dims_(dims), joint_delta_threshold_(joint_delta_threshold) {
  if (dims_.history < 2) throw std::invalid_argument("window history must be >= 2");
  contacts_.assign(static_cast<std::size_t>(dims_.history) * dims_.cells, 0.0);
  joints_.assign(static_cast<std::size_t>(dims_.history) * dims_.joints, 0.0);
  xyz_.assign(static_cast<std::size_t>(dims_.history) * dims_.cells * 3, 0.0);
}

void ObservationWindow::push(const TactileFrame& frame) {
  if (static_cast<int>(frame.binary.size()) != dims_.cells ||
      static_cast<int>(frame.joint_angles.size()) != dims_.joints)
    throw std::invalid_argument("push_frame: frame dimensions do not match window");

  const int h = dims_.history;
  std::memmove(contacts_.data(), contacts_.data() + dims_.cells,
               sizeof(double) * dims_.cells * (h - 1));
  std::memmove(joints_.data(), joints_.data() + dims_.joints,
               sizeof(double) * dims_.joints * (h - 1));
  std::memmove(xyz_.data(), xyz_.data() + dims_.cells * 3,
               sizeof(double) * dims_.cells * 3 * (h - 1));

  double* c = contacts_.data() + static_cast<std::size_t>(h - 1) * dims_.cells;
  double* q = joints_.data() + static_cast<std::size_t>(h - 1) * dims_.joints;
  double* x = xyz_.data() + static_cast<std::size_t>(h - 1) * dims_.cells * 3;
  for (int i = 0; i < dims_.cells; ++i) {
    c[i] = frame.binary[i];
    x[i * 3 + 0] = frame.positions_ee[i].x;
    x[i * 3 + 1] = frame.positions_ee[i].y;
    x[i * 3 + 2] = frame.positions_ee[i].z;
  }
  for (int j = 0; j < dims_.joints; ++j) q[j] = frame.joint_angles[j];
  ++frames_seen_;
}

void ObservationWindow::encode_into(double* out) const {
  const int h = dims_.history;
  std::size_t pos = 0;

  std::memcpy(out + pos, contacts_.data(), sizeof(double) * contacts_.size());
  pos += contacts_.size();

  for (int k = 0; k + 1 < h; ++k)
    for (int i = 0; i < dims_.cells; ++i)
      out[pos++] = contact(k + 1, i) - contact(k, i);

  std::memcpy(out + pos, joints_.data(), sizeof(double) * joints_.size());
  pos += joints_.size();

  for (int k = 0; k + 1 < h; ++k)
    for (int j = 0; j < dims_.joints; ++j)
      out[pos++] = std::fabs(joint(k + 1, j) - joint(k, j)) > joint_delta_threshold_ ? 1.0 : 0.0;

  std::memcpy(out + pos, xyz_.data(), sizeof(double) * xyz_.size());
  pos += xyz_.size();

  const std::size_t row = static_cast<std::size_t>(dims_.cells) * 3;
  for (int k = 0; k + 1 < h; ++k)
    for (std::size_t i = 0; i < row; ++i)
      out[pos++] = xyz_[(k + 1) * row + i] - xyz_[k * row + i];
}

void ObservationWindow::encode_into(float* out) const {
  std::vector<double> tmp(dims_.encoded_len());
  encode_into(tmp.data());
  for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = static_cast<float>(tmp[i]);
}

std::vector<double> ObservationWindow::encode() const {
  std::vector<double> out(dims_.encoded_len());
  encode_into(out.data());
  return out;
}

}  // namespace mat::obs
