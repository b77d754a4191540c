#pragma once

// Real-input DFT along the periodic angular direction.  Radix-2
// Cooley-Tukey for power-of-two lengths, with a naive O(n^2) fallback so
// any even length remains correct.

#include <complex>
#include <vector>

#include "vpl/common.hpp"

namespace vpl {

template <typename Scalar = double>
class ThetaDft {
 public:
  using Cplx = std::complex<Scalar>;

  explicit ThetaDft(Eigen::Index n) : n_(n), pow2_((n & (n - 1)) == 0) {
    if (n < 2) throw std::invalid_argument("ThetaDft: length must be >= 2");
    if (pow2_) {
      log2n_ = 0;
      while ((Eigen::Index(1) << log2n_) < n_) ++log2n_;
      bitrev_.resize(n_);
      for (Eigen::Index i = 0; i < n_; ++i) {
        Eigen::Index rev = 0;
        for (int b = 0; b < log2n_; ++b)
          if (i & (Eigen::Index(1) << b)) rev |= Eigen::Index(1) << (log2n_ - 1 - b);
        bitrev_[i] = rev;
      }
    }
    twiddle_.resize(n_);
    for (Eigen::Index k = 0; k < n_; ++k) {
      const Scalar ang = Scalar(-2) * pi_v<Scalar> * Scalar(k) / Scalar(n_);
      twiddle_[k] = Cplx(std::cos(ang), std::sin(ang));
    }
  }

  Eigen::Index size() const { return n_; }
  Eigen::Index spectrum_size() const { return n_ / 2 + 1; }

  /// X_m = sum_j x_j exp(-2 pi i j m / n), m = 0 .. n/2 (real input).
  void forward_real(const Scalar* in, Cplx* out, std::vector<Cplx>& scratch) const {
    scratch.resize(n_);
    for (Eigen::Index j = 0; j < n_; ++j) scratch[j] = Cplx(in[j], Scalar(0));
    transform(scratch.data());
    for (Eigen::Index m = 0; m <= n_ / 2; ++m) out[m] = scratch[m];
  }

  /// Inverse of forward_real with the 1/n factor; input is the half
  /// spectrum, conjugate symmetry supplies the rest.
  void inverse_real(const Cplx* in, Scalar* out, std::vector<Cplx>& scratch) const {
    scratch.resize(n_);
    scratch[0] = std::conj(in[0]);
    for (Eigen::Index m = 1; m <= n_ / 2; ++m) {
      scratch[m] = std::conj(in[m]);
      scratch[n_ - m] = in[m];
    }
    transform(scratch.data());
    const Scalar inv = Scalar(1) / Scalar(n_);
    for (Eigen::Index j = 0; j < n_; ++j) out[j] = std::real(scratch[j]) * inv;
  }

 private:
  // In-place forward DFT (sign -1 convention).
  void transform(Cplx* a) const {
    if (pow2_) {
      for (Eigen::Index i = 0; i < n_; ++i) {
        const Eigen::Index j = bitrev_[i];
        if (j > i) std::swap(a[i], a[j]);
      }
      for (Eigen::Index len = 2; len <= n_; len <<= 1) {
        const Eigen::Index stride = n_ / len;
        for (Eigen::Index start = 0; start < n_; start += len) {
          for (Eigen::Index k = 0; k < len / 2; ++k) {
            const Cplx w = twiddle_[k * stride];
            const Cplx u = a[start + k];
            const Cplx v = a[start + k + len / 2] * w;
            a[start + k] = u + v;
            a[start + k + len / 2] = u - v;
          }
        }
      }
      return;
    }
    std::vector<Cplx> tmp(n_);
    for (Eigen::Index m = 0; m < n_; ++m) {
      Cplx acc(0, 0);
      for (Eigen::Index j = 0; j < n_; ++j)
        acc += a[j] * twiddle_[(j * m) % n_];
      tmp[m] = acc;
    }
    for (Eigen::Index m = 0; m < n_; ++m) a[m] = tmp[m];
  }

  Eigen::Index n_;
  bool pow2_;
  int log2n_ = 0;
  std::vector<Eigen::Index> bitrev_;
  std::vector<Cplx> twiddle_;
};

}  // namespace vpl
