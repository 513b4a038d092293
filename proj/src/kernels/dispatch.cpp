// SPDX-License-Identifier: Apache-2.0
#include "eternal/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace eternal::kernels {

#ifndef ETERNAL_BUILD_AVX2
const Table *avx2() { return nullptr; }
#endif

namespace {
const Table &select() {
  const char *env = std::getenv("ETERNAL_ISA");
  if (env && std::strcmp(env, "scalar") == 0)
    return scalar();
  if (const Table *t = avx2())
    return *t;
  return scalar();
}
} // namespace

const Table &active() {
  static const Table &t = select();
  return t;
}

std::string active_name() { return active().name; }

} // namespace eternal::kernels
