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

#ifndef PHONOVC_FFT_HPP_
#define PHONOVC_FFT_HPP_

#include <complex>
#include <span>

namespace phonovc::fft {

// One-sided forward DFT of a real frame: out[k] = sum_n in[n] e^{-i 2 pi k n / N}
// for k in [0, N/2]. out must hold N/2 + 1 values.
void forward_real(std::span<const double> in, std::span<std::complex<double>> out);

// Full-length inverse-direction DFT without normalization:
// out[n] = sum_k in[k] e^{+i 2 pi k n / N}, N = in.size().
void backward_complex(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out);

}  // namespace phonovc::fft

#endif  // PHONOVC_FFT_HPP_
