#include "mat/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace mat::kern {
namespace {

const Ops* select() {
  if (const char* env = std::getenv("MAT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return &avx2_ops();
  }
  return avx2_supported() ? &avx2_ops() : &scalar_ops();
}

}  // namespace

const Ops& ops() {
  static const Ops* selected = select();
  return *selected;
}

std::string active_kernel_name() {
  return &ops() == &scalar_ops() ? "scalar" : "avx2";
}

}  // namespace mat::kern
