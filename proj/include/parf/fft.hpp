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

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace parf {

using cdouble = std::complex<double>;

/// Reusable real-input 1D transform of fixed length n (FFTW backed).
/// Forward output has n/2+1 bins; inverse is normalized so inverse(forward(x)) = x.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// x is zero-padded (or truncated) to n.
  void forward(std::span<const double> x, std::span<cdouble> out);
  std::vector<cdouble> forward(std::span<const double> x);
  void inverse(std::span<const cdouble> spectrum, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Full complex 2D DFT of a real rows x cols row-major array (unnormalized).
std::vector<cdouble> fft2_real(std::span<const double> data, std::size_t rows, std::size_t cols);

std::size_t next_pow2(std::size_t n);

}  // namespace parf
