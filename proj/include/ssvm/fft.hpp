#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "ssvm/errors.hpp"

namespace ssvm {

/// In-place multi-axis complex DFT for the small axis lengths that arise from
/// node lattices. Power-of-two axes use an iterative radix-2 transform; other
/// lengths multiply by a precomputed dense DFT matrix per line. Axes are
/// given fastest varying first with strides equal to the running product of
/// lengths. The hot loops run on split real/imaginary scalars to keep the
/// arithmetic inline.
class MultiAxisFft {
 public:
  using Complex = std::complex<double>;

  explicit MultiAxisFft(const std::array<int, 6>& axis_len) : axis_len_(axis_len) {
    total_ = 1;
    max_len_ = 1;
    for (int a = 0; a < 6; ++a) {
      if (axis_len_[a] < 1) throw StructuralError("fft axis length must be positive");
      stride_[a] = total_;
      total_ *= axis_len_[a];
      max_len_ = std::max(max_len_, static_cast<std::int64_t>(axis_len_[a]));
      plan_for(axis_len_[a]);
    }
  }

  std::int64_t size() const { return total_; }

  void forward(Complex* data) const { transform(data, /*inverse=*/false); }
  void inverse(Complex* data) const { transform(data, /*inverse=*/true); }

 private:
  struct Plan {
    int len = 1;
    bool radix2 = false;
    // radix-2: len/2 stage twiddles; dense: len*len DFT matrix entries
    std::vector<double> fwd_re, fwd_im, inv_re, inv_im;
    std::vector<int> bit_reverse;
  };

  void plan_for(int len) {
    for (const auto& p : plans_)
      if (p.len == len) return;
    Plan plan;
    plan.len = len;
    plan.radix2 = (len & (len - 1)) == 0;
    const double base = 2.0 * M_PI / len;
    if (plan.radix2 && len > 1) {
      plan.fwd_re.resize(len / 2);
      plan.fwd_im.resize(len / 2);
      plan.inv_re.resize(len / 2);
      plan.inv_im.resize(len / 2);
      for (int k = 0; k < len / 2; ++k) {
        plan.fwd_re[k] = std::cos(base * k);
        plan.fwd_im[k] = -std::sin(base * k);
        plan.inv_re[k] = std::cos(base * k);
        plan.inv_im[k] = std::sin(base * k);
      }
      plan.bit_reverse.resize(len);
      int bits = 0;
      while ((1 << bits) < len) ++bits;
      for (int i = 0; i < len; ++i) {
        int r = 0;
        for (int b = 0; b < bits; ++b)
          if (i & (1 << b)) r |= 1 << (bits - 1 - b);
        plan.bit_reverse[i] = r;
      }
    } else {
      plan.fwd_re.resize(static_cast<std::size_t>(len) * len);
      plan.fwd_im.resize(static_cast<std::size_t>(len) * len);
      plan.inv_re.resize(static_cast<std::size_t>(len) * len);
      plan.inv_im.resize(static_cast<std::size_t>(len) * len);
      for (int k = 0; k < len; ++k)
        for (int j = 0; j < len; ++j) {
          const double angle = base * ((static_cast<std::int64_t>(j) * k) % len);
          plan.fwd_re[k * len + j] = std::cos(angle);
          plan.fwd_im[k * len + j] = -std::sin(angle);
          plan.inv_re[k * len + j] = std::cos(angle);
          plan.inv_im[k * len + j] = std::sin(angle);
        }
    }
    plans_.push_back(std::move(plan));
  }

  const Plan& plan_of(int len) const {
    for (const auto& p : plans_)
      if (p.len == len) return p;
    throw StructuralError("missing fft plan");
  }

  void transform(Complex* data, bool inverse) const {
    // std::complex<double> is layout-compatible with double[2]
    double* raw = reinterpret_cast<double*>(data);
    std::vector<double> line(2 * max_len_);
    std::vector<double> scratch(2 * max_len_);
    for (int axis = 0; axis < 6; ++axis) {
      const int len = axis_len_[axis];
      if (len == 1) continue;
      const Plan& plan = plan_of(len);
      const std::int64_t stride = stride_[axis];
      const std::int64_t block = stride * len;
      const double scale = inverse ? 1.0 / len : 1.0;
      for (std::int64_t base = 0; base < total_; base += block) {
        for (std::int64_t inner = 0; inner < stride; ++inner) {
          double* start = raw + 2 * (base + inner);
          for (int k = 0; k < len; ++k) {
            line[2 * k] = start[2 * k * stride];
            line[2 * k + 1] = start[2 * k * stride + 1];
          }
          transform_line(line.data(), scratch.data(), plan, inverse);
          for (int k = 0; k < len; ++k) {
            start[2 * k * stride] = line[2 * k] * scale;
            start[2 * k * stride + 1] = line[2 * k + 1] * scale;
          }
        }
      }
    }
  }

  static void transform_line(double* x, double* scratch, const Plan& plan, bool inverse) {
    const int n = plan.len;
    const double* tw_re = inverse ? plan.inv_re.data() : plan.fwd_re.data();
    const double* tw_im = inverse ? plan.inv_im.data() : plan.fwd_im.data();
    if (plan.radix2) {
      for (int i = 0; i < n; ++i) {
        const int r = plan.bit_reverse[i];
        if (i < r) {
          std::swap(x[2 * i], x[2 * r]);
          std::swap(x[2 * i + 1], x[2 * r + 1]);
        }
      }
      for (int half = 1; half < n; half *= 2) {
        const int step = n / (2 * half);
        for (int start = 0; start < n; start += 2 * half) {
          for (int k = 0; k < half; ++k) {
            const double wr = tw_re[k * step], wi = tw_im[k * step];
            const double br = x[2 * (start + half + k)], bi = x[2 * (start + half + k) + 1];
            const double tr = br * wr - bi * wi;
            const double ti = br * wi + bi * wr;
            const double ar = x[2 * (start + k)], ai = x[2 * (start + k) + 1];
            x[2 * (start + k)] = ar + tr;
            x[2 * (start + k) + 1] = ai + ti;
            x[2 * (start + half + k)] = ar - tr;
            x[2 * (start + half + k) + 1] = ai - ti;
          }
        }
      }
    } else {
      for (int k = 0; k < n; ++k) {
        const double* row_re = tw_re + static_cast<std::size_t>(k) * n;
        const double* row_im = tw_im + static_cast<std::size_t>(k) * n;
        double acc_re = 0.0, acc_im = 0.0;
        for (int j = 0; j < n; ++j) {
          const double xr = x[2 * j], xi = x[2 * j + 1];
          acc_re += xr * row_re[j] - xi * row_im[j];
          acc_im += xr * row_im[j] + xi * row_re[j];
        }
        scratch[2 * k] = acc_re;
        scratch[2 * k + 1] = acc_im;
      }
      for (int k = 0; k < 2 * n; ++k) x[k] = scratch[k];
    }
  }

  std::array<int, 6> axis_len_;
  std::array<std::int64_t, 6> stride_{};
  std::int64_t total_ = 1;
  std::int64_t max_len_ = 1;
  std::vector<Plan> plans_;
};

}  // namespace ssvm
