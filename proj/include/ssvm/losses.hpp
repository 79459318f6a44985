#pragma once

#include <algorithm>
#include <cmath>

#include "ssvm/errors.hpp"

namespace ssvm {

enum class LossType { Hinge, TruncatedLs, HuberizedHinge };

/// Margin-based loss selector. delta is the huberization width and is only
/// read for HuberizedHinge.
struct Loss {
  LossType type = LossType::Hinge;
  double delta = 0.5;
};

inline void validate(const Loss& loss) {
  if (loss.type == LossType::HuberizedHinge && !(loss.delta > 0.0))
    throw StructuralError("huberized hinge requires delta > 0");
}

inline double loss_value(const Loss& loss, double t) {
  switch (loss.type) {
    case LossType::Hinge:
      return std::max(0.0, 1.0 - t);
    case LossType::TruncatedLs: {
      const double m = std::max(0.0, 1.0 - t);
      return m * m;
    }
    case LossType::HuberizedHinge: {
      const double d = loss.delta;
      if (t > 1.0) return 0.0;
      if (t >= 1.0 - d) return (1.0 - t) * (1.0 - t) / (2.0 * d);
      return 1.0 - t - d / 2.0;
    }
  }
  return 0.0;
}

/// Closed-form scaled proximal operator argmin_u tau*loss(u) + (u-t)^2/2.
inline double loss_prox(const Loss& loss, double t, double tau) {
  if (!(tau > 0.0)) throw StructuralError("loss_prox requires tau > 0");
  switch (loss.type) {
    case LossType::Hinge:
      if (t > 1.0) return t;
      if (t >= 1.0 - tau) return 1.0;
      return t + tau;
    case LossType::TruncatedLs:
      if (t > 1.0) return t;
      return (t + 2.0 * tau) / (1.0 + 2.0 * tau);
    case LossType::HuberizedHinge: {
      const double d = loss.delta;
      if (t > 1.0) return t;
      if (t >= 1.0 - d - tau) return (t + tau / d) / (1.0 + tau / d);
      return t + tau;
    }
  }
  return t;
}

inline double soft_threshold(double t, double tau) {
  if (tau < 0.0) throw StructuralError("soft_threshold requires tau >= 0");
  if (t > tau) return t - tau;
  if (t < -tau) return t + tau;
  return 0.0;
}

/// Subdifferential of the loss at t as a closed interval; single-valued where
/// the loss is differentiable. Used by optimality diagnostics.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline Interval loss_subgradient(const Loss& loss, double t) {
  switch (loss.type) {
    case LossType::Hinge:
      if (t > 1.0) return {0.0, 0.0};
      if (t < 1.0) return {-1.0, -1.0};
      return {-1.0, 0.0};
    case LossType::TruncatedLs: {
      const double g = t >= 1.0 ? 0.0 : -2.0 * (1.0 - t);
      return {g, g};
    }
    case LossType::HuberizedHinge: {
      const double d = loss.delta;
      double g;
      if (t > 1.0)
        g = 0.0;
      else if (t >= 1.0 - d)
        g = -(1.0 - t) / d;
      else
        g = -1.0;
      return {g, g};
    }
  }
  return {0.0, 0.0};
}

}  // namespace ssvm
