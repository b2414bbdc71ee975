#pragma once

#include <iosfwd>
#include <string>

#include "mat/policy_net.hpp"

namespace mat::policy {

// Binary checkpoint: fixed header (format version, network structure, layer
// shapes, finger count) followed by the flat little-endian float64 parameter
// array. Round-trips bit-exactly.
void save_net(const Net& net, std::ostream& out);
void save_net_file(const Net& net, const std::string& path);

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Net load_net(std::istream& in);
Net load_net_file(const std::string& path);

}  // namespace mat::policy
