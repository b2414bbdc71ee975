#pragma once

#include <cstdint>
#include <vector>

#include "mat/world.hpp"

namespace mat::obs {

using sim::TactileFrame;

struct ObsDims {
  int history = 20;
  int cells = 96;
  int joints = 8;

  int contacts_len() const { return history * cells; }
  int d_contacts_len() const { return (history - 1) * cells; }
  int joints_len() const { return history * joints; }
  int d_joints_len() const { return (history - 1) * joints; }
  int xyz_len() const { return history * cells * 3; }
  int d_xyz_len() const { return (history - 1) * cells * 3; }
  int encoded_len() const {
    return contacts_len() + d_contacts_len() + joints_len() + d_joints_len() + xyz_len() +
           d_xyz_len();
  }
};

// Rolling observation of the last `history` frames with per-row deltas.
// Row 0 is the oldest slot and the last row the newest frame; rows older
// than the available history stay zero-filled. Deltas are taken between
// adjacent rows of the (zero-filled) buffers:
//   d_contacts[k]   = contacts[k+1] - contacts[k]
//   d_joints[k][j]  = 1 iff |joints[k+1][j] - joints[k][j]| > delta_threshold
//   d_xyz[k]        = xyz[k+1] - xyz[k]
class ObservationWindow {
 public:
  explicit ObservationWindow(ObsDims dims = {}, double joint_delta_threshold = 0.05);

  void push(const TactileFrame& frame);

  // Flat encoding in block order: contacts_binary, d_contacts_binary,
  // joint_angles, d_joint_angles, contacts_xyz, d_contacts_xyz; each block
  // row-major from oldest to newest row.
  std::vector<double> encode() const;
  void encode_into(float* out) const;
  void encode_into(double* out) const;

  const ObsDims& dims() const { return dims_; }
  int frames_seen() const { return frames_seen_; }
  int real_rows() const { return frames_seen_ < dims_.history ? frames_seen_ : dims_.history; }
  double joint_delta_threshold() const { return joint_delta_threshold_; }

  double contact(int row, int cell) const { return contacts_[row * dims_.cells + cell]; }
  double joint(int row, int j) const { return joints_[row * dims_.joints + j]; }
  Vec3 xyz(int row, int cell) const {
    const int base = (row * dims_.cells + cell) * 3;
    return {xyz_[base], xyz_[base + 1], xyz_[base + 2]};
  }

 private:
  ObsDims dims_;
  double joint_delta_threshold_;
  int frames_seen_ = 0;
  std::vector<double> contacts_;  // history x cells
  std::vector<double> joints_;    // history x joints
  std::vector<double> xyz_;       // history x cells x 3
};

}  // namespace mat::obs
