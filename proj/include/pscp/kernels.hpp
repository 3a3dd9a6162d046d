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

#ifndef PSCP_KERNELS_HPP
#define PSCP_KERNELS_HPP

#include <cstddef>

// Data-parallel f64 kernels used by the tensor layer. Every kernel has a
// scalar reference implementation plus SIMD variants (AVX2+FMA on x86-64,
// NEON on aarch64) selected once at startup from CPU capabilities. The
// scalar path is always available and is the ground truth for the
// equivalence tests.
//
// All matmul variants ACCUMULATE into C; callers zero C first.

namespace pscp::kern {

// dst[i] = a[i] + b[i]
void add(double* dst, const double* a, const double* b, std::size_t n);
// dst[i] = a[i] - b[i]
void sub(double* dst, const double* a, const double* b, std::size_t n);
// dst[i] = a[i] * b[i]
void mul(double* dst, const double* a, const double* b, std::size_t n);
// dst[i] += c * a[i]
void axpy(double* dst, double c, const double* a, std::size_t n);
// dst[i] = c * a[i]
void scale(double* dst, double c, const double* a, std::size_t n);

double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// C[m,n] += A[m,k] * B[k,n]
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n);
// C[m,n] += A[k,m]^T * B[k,n]
void matmul_tn(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n);
// C[m,n] += A[m,k] * B[n,k]^T
void matmul_nt(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n);

// Name of the active implementation: "scalar", "avx2" or "neon".
const char* active_isa();

// Test hook: force the scalar reference path (true) or re-run CPU
// detection (false). Not thread-safe; call before any compute.
void force_scalar(bool on);

}  // namespace pscp::kern

#endif  // PSCP_KERNELS_HPP
