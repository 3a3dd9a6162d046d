// Copyright 2026 The pscp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#ifndef PSCP_KERNELS_IMPL_HPP
#define PSCP_KERNELS_IMPL_HPP

#include <cstddef>

// Internal: per-ISA kernel declarations and the dispatch table.
// User code includes pscp/kernels.hpp instead.

#if defined(__x86_64__) || defined(_M_X64)
#define PSCP_X86_64 1
#else
#define PSCP_X86_64 0
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define PSCP_AARCH64 1
#else
#define PSCP_AARCH64 0
#endif

namespace pscp::kern {

struct Impl {
  const char* name;
  void (*add)(double*, const double*, const double*, std::size_t);
  void (*sub)(double*, const double*, const double*, std::size_t);
  void (*mul)(double*, const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*scale)(double*, double, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*matmul)(double*, const double*, const double*,
                 std::size_t, std::size_t, std::size_t);
  void (*matmul_tn)(double*, const double*, const double*,
                    std::size_t, std::size_t, std::size_t);
  void (*matmul_nt)(double*, const double*, const double*,
                    std::size_t, std::size_t, std::size_t);
};

#define PSCP_DECLARE_KERNELS()                                              \
  void add(double*, const double*, const double*, std::size_t);             \
  void sub(double*, const double*, const double*, std::size_t);             \
  void mul(double*, const double*, const double*, std::size_t);             \
  void axpy(double*, double, const double*, std::size_t);                   \
  void scale(double*, double, const double*, std::size_t);                  \
  double sum(const double*, std::size_t);                                   \
  double dot(const double*, const double*, std::size_t);                    \
  void matmul(double*, const double*, const double*,                        \
              std::size_t, std::size_t, std::size_t);                       \
  void matmul_tn(double*, const double*, const double*,                     \
                 std::size_t, std::size_t, std::size_t);                    \
  void matmul_nt(double*, const double*, const double*,                     \
                 std::size_t, std::size_t, std::size_t)

namespace scalar {
PSCP_DECLARE_KERNELS();
}

#if PSCP_X86_64
namespace avx2 {
PSCP_DECLARE_KERNELS();
}
#endif

#if PSCP_AARCH64
namespace neon {
PSCP_DECLARE_KERNELS();
}
#endif

}  // namespace pscp::kern

#endif  // PSCP_KERNELS_IMPL_HPP
