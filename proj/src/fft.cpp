// Copyright 2026 The phonovc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phonovc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "phonovc/error.hpp"

namespace phonovc::fft {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealPlan {
  int n;
  double* in;
  fftw_complex* out;
  fftw_plan plan;

  explicit RealPlan(int size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  ~RealPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

struct ComplexPlan {
  int n;
  fftw_complex* in;
  fftw_complex* out;
  fftw_plan plan;

  explicit ComplexPlan(int size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    plan = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~ComplexPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

template <typename Plan>
Plan& cached(int n) {
  thread_local std::map<int, std::unique_ptr<Plan>> plans;
  auto it = plans.find(n);
  if (it == plans.end()) {
    it = plans.emplace(n, std::make_unique<Plan>(n)).first;
  }
  return *it->second;
}

}  // namespace

void forward_real(std::span<const double> in,
                  std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  PHONOVC_CHECK(n > 0 && out.size() == static_cast<size_t>(n / 2 + 1),
                ShapeError, "forward_real: bad buffer sizes");
  RealPlan& p = cached<RealPlan>(n);
  std::copy(in.begin(), in.end(), p.in);
  fftw_execute(p.plan);
  for (int k = 0; k <= n / 2; ++k) out[k] = {p.out[k][0], p.out[k][1]};
}

void backward_complex(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  PHONOVC_CHECK(n > 0 && out.size() == in.size(), ShapeError,
                "backward_complex: bad buffer sizes");
  ComplexPlan& p = cached<ComplexPlan>(n);
  for (int k = 0; k < n; ++k) {
    p.in[k][0] = in[k].real();
    p.in[k][1] = in[k].imag();
  }
  fftw_execute(p.plan);
  for (int k = 0; k < n; ++k) out[k] = {p.out[k][0], p.out[k][1]};
}

}  // namespace phonovc::fft
