/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The parf-forge Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "parf/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace parf {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw std::invalid_argument("FFT length must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(n);
  impl_->spec = fftw_alloc_complex(n / 2 + 1);
  const int len = static_cast<int>(n);
  impl_->fwd = fftw_plan_dft_r2c_1d(len, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(len, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> x, std::span<cdouble> out) {
  if (out.size() < bins()) throw std::invalid_argument("RealFft: output too small");
  const std::size_t m = std::min(x.size(), n_);
  std::copy_n(x.begin(), m, impl_->real);
  std::fill(impl_->real + m, impl_->real + n_, 0.0);
  fftw_execute(impl_->fwd);
  for (std::size_t i = 0; i < bins(); ++i) out[i] = {impl_->spec[i][0], impl_->spec[i][1]};
}

std::vector<cdouble> RealFft::forward(std::span<const double> x) {
  std::vector<cdouble> out(bins());
  forward(x, out);
  return out;
}

void RealFft::inverse(std::span<const cdouble> spectrum, std::span<double> out) {
  if (spectrum.size() < bins()) throw std::invalid_argument("RealFft: spectrum too small");
  for (std::size_t i = 0; i < bins(); ++i) {
    impl_->spec[i][0] = spectrum[i].real();
    impl_->spec[i][1] = spectrum[i].imag();
  }
  fftw_execute(impl_->inv);
  const double scale = 1.0 / static_cast<double>(n_);
  const std::size_t m = std::min(out.size(), n_);
  for (std::size_t i = 0; i < m; ++i) out[i] = impl_->real[i] * scale;
}

std::vector<cdouble> fft2_real(std::span<const double> data, std::size_t rows, std::size_t cols) {
  if (data.size() != rows * cols || rows == 0 || cols == 0) {
    throw std::invalid_argument("fft2_real: shape mismatch");
  }
  std::vector<cdouble> out(rows * cols);
  fftw_complex* buf = fftw_alloc_complex(rows * cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    buf[i][0] = data[i];
    buf[i][1] = 0.0;
  }
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  for (std::size_t i = 0; i < rows * cols; ++i) out[i] = {buf[i][0], buf[i][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace parf
