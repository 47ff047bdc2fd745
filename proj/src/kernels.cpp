/*
 * Copyright 2026 the pasoa authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pasoa/kernels.hpp"

#include <cstdlib>
#include <string>

namespace pasoa::kernels {
namespace {

const Ops* detect() {
#ifdef PASOA_HAVE_AVX2_KERNELS
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &avx2_ops();
  }
#endif
  return &scalar_ops();
}

const Ops* resolve() {
  if (const char* env = std::getenv("PASOA_KERNEL")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_ops();
#ifdef PASOA_HAVE_AVX2_KERNELS
    if (want == "avx2") return &avx2_ops();
#endif
    // unknown or unsupported name falls through to auto-detection
  }
  return detect();
}

const Ops*& active() {
  static const Ops* ptr = resolve();
  return ptr;
}

}  // namespace

const Ops& ops() { return *active(); }

bool force_backend(const std::string& name) {
  if (name == "scalar") {
    active() = &scalar_ops();
    return true;
  }
#ifdef PASOA_HAVE_AVX2_KERNELS
  if (name == "avx2") {
    if (!(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))) {
      return false;
    }
    active() = &avx2_ops();
    return true;
  }
#endif
  if (name == "auto") {
    active() = detect();
    return true;
  }
  return false;
}

}  // namespace pasoa::kernels
