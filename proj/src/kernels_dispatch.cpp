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

#include "pscp/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "pscp/kernels_impl.hpp"

namespace pscp::kern {

namespace {

constexpr Impl kScalar = {
    "scalar",        scalar::add,    scalar::sub,       scalar::mul,
    scalar::axpy,    scalar::scale,  scalar::sum,       scalar::dot,
    scalar::matmul,  scalar::matmul_tn, scalar::matmul_nt,
};

#if PSCP_X86_64
constexpr Impl kAvx2 = {
    "avx2",        avx2::add,    avx2::sub,       avx2::mul,
    avx2::axpy,    avx2::scale,  avx2::sum,       avx2::dot,
    avx2::matmul,  avx2::matmul_tn, avx2::matmul_nt,
};
#endif

#if PSCP_AARCH64
constexpr Impl kNeon = {
    "neon",        neon::add,    neon::sub,       neon::mul,
    neon::axpy,    neon::scale,  neon::sum,       neon::dot,
    neon::matmul,  neon::matmul_tn, neon::matmul_nt,
};
#endif

const Impl* detect() {
  const char* env = std::getenv("PSCP_FORCE_SCALAR");
  if (env && std::strcmp(env, "0") != 0) return &kScalar;
#if PSCP_X86_64
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &kAvx2;
  }
#endif
#if PSCP_AARCH64
  return &kNeon;
#endif
  return &kScalar;
}

const Impl* g_impl = detect();

}  // namespace

void force_scalar(bool on) { g_impl = on ? &kScalar : detect(); }

const char* active_isa() { return g_impl->name; }

void add(double* dst, const double* a, const double* b, std::size_t n) {
  g_impl->add(dst, a, b, n);
}
void sub(double* dst, const double* a, const double* b, std::size_t n) {
  g_impl->sub(dst, a, b, n);
}
void mul(double* dst, const double* a, const double* b, std::size_t n) {
  g_impl->mul(dst, a, b, n);
}
void axpy(double* dst, double c, const double* a, std::size_t n) {
  g_impl->axpy(dst, c, a, n);
}
void scale(double* dst, double c, const double* a, std::size_t n) {
  g_impl->scale(dst, c, a, n);
}
double sum(const double* a, std::size_t n) { return g_impl->sum(a, n); }
double dot(const double* a, const double* b, std::size_t n) {
  return g_impl->dot(a, b, n);
}
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n) {
  g_impl->matmul(c, a, b, m, k, n);
}
void matmul_tn(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n) {
  g_impl->matmul_tn(c, a, b, m, k, n);
}
void matmul_nt(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n) {
  g_impl->matmul_nt(c, a, b, m, k, n);
}

}  // namespace pscp::kern
